//! Hardware cost of the omnicell RAA versus a three-sector ULA deployment.
//!
//! The RAA pays for `N·M` antennas plus `N_RF·N/2` RF switches; the sectored
//! ULA pays for `N_RF·M` phase shifters plus `S·M` antennas.

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Unit prices in USD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PriceTable {
    #[serde(default = "defaults::shifter")]
    pub cost_shifter: f64,
    #[serde(default = "defaults::switch")]
    pub cost_switch: f64,
    #[serde(default = "defaults::antenna")]
    pub cost_antenna: f64,
}

mod defaults {
    pub fn shifter() -> f64 {
        120.0
    }
    pub fn switch() -> f64 {
        28.62
    }
    pub fn antenna() -> f64 {
        0.01
    }
}

impl Default for PriceTable {
    fn default() -> Self {
        PriceTable {
            cost_shifter: defaults::shifter(),
            cost_switch: defaults::switch(),
            cost_antenna: defaults::antenna(),
        }
    }
}

impl PriceTable {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("cost_shifter", self.cost_shifter),
            ("cost_switch", self.cost_switch),
            ("cost_antenna", self.cost_antenna),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "{name}: price must be non-negative"
                )));
            }
        }
        Ok(())
    }

    pub fn scaled(&self, factor: f64) -> Self {
        PriceTable {
            cost_shifter: self.cost_shifter * factor,
            cost_switch: self.cost_switch * factor,
            cost_antenna: self.cost_antenna * factor,
        }
    }
}

pub fn cost_raa(num_rays: usize, elements_per_ray: usize, rf_chains: usize, prices: &PriceTable) -> f64 {
    let antennas = (num_rays * elements_per_ray) as f64;
    antennas * prices.cost_antenna + (rf_chains * num_rays) as f64 * prices.cost_switch / 2.0
}

pub fn cost_ula(elements: usize, rf_chains: usize, num_sectors: usize, prices: &PriceTable) -> f64 {
    (rf_chains * elements) as f64 * prices.cost_shifter
        + (num_sectors * elements) as f64 * prices.cost_antenna
}

/// Antenna price at which both deployments cost the same, with `M`
/// elements per ray and per ULA panel.
///
/// Negative values mean the RAA is never cheaper at any non-negative price.
pub fn breakeven_antenna_price(
    num_rays: usize,
    elements_per_ray: usize,
    rf_chains: usize,
    num_sectors: usize,
    prices: &PriceTable,
) -> Result<f64> {
    breakeven_antenna_price_mixed(
        num_rays,
        elements_per_ray,
        elements_per_ray,
        rf_chains,
        num_sectors,
        prices,
    )
}

/// Breakeven price when the ULA panels have `ula_elements` elements.
pub fn breakeven_antenna_price_mixed(
    num_rays: usize,
    elements_per_ray: usize,
    ula_elements: usize,
    rf_chains: usize,
    num_sectors: usize,
    prices: &PriceTable,
) -> Result<f64> {
    let denom = (num_rays * elements_per_ray) as f64 - (num_sectors * ula_elements) as f64;
    if denom <= 0.0 {
        return Err(Error::NoBreakeven);
    }
    let nrf = rf_chains as f64;
    Ok(
        (nrf * ula_elements as f64 * prices.cost_shifter - nrf * num_rays as f64 * prices.cost_switch / 2.0)
            / denom,
    )
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CostReport {
    pub cost_raa: f64,
    pub cost_ula: f64,
    pub ratio: f64,
    /// `None` when the RAA does not use more antennas than the ULA sectors.
    pub breakeven_antenna_price: Option<f64>,
    /// Whether the RAA is cheaper for some non-negative antenna price.
    pub raa_advantage: bool,
}

/// One priced line of the cost table.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostLine {
    pub item: String,
    pub quantity: usize,
    pub unit_price: f64,
    pub subtotal: f64,
}

/// ULA and RAA share the element count `M`.
pub fn cost_report(
    num_rays: usize,
    elements_per_ray: usize,
    rf_chains: usize,
    num_sectors: usize,
    prices: &PriceTable,
) -> CostReport {
    cost_report_mixed(
        num_rays,
        elements_per_ray,
        elements_per_ray,
        rf_chains,
        num_sectors,
        prices,
    )
}

pub fn cost_report_mixed(
    num_rays: usize,
    elements_per_ray: usize,
    ula_elements: usize,
    rf_chains: usize,
    num_sectors: usize,
    prices: &PriceTable,
) -> CostReport {
    let raa = cost_raa(num_rays, elements_per_ray, rf_chains, prices);
    let ula = cost_ula(ula_elements, rf_chains, num_sectors, prices);
    let breakeven = breakeven_antenna_price_mixed(
        num_rays,
        elements_per_ray,
        ula_elements,
        rf_chains,
        num_sectors,
        prices,
    )
    .ok();
    CostReport {
        cost_raa: raa,
        cost_ula: ula,
        ratio: raa / ula,
        breakeven_antenna_price: breakeven,
        raa_advantage: breakeven.is_some_and(|p| p >= 0.0),
    }
}

/// Itemised bill of materials for both deployments.
pub fn cost_lines(
    num_rays: usize,
    elements_per_ray: usize,
    ula_elements: usize,
    rf_chains: usize,
    num_sectors: usize,
    prices: &PriceTable,
) -> Vec<CostLine> {
    let line = |item: &str, quantity: usize, unit_price: f64| CostLine {
        item: item.to_string(),
        quantity,
        unit_price,
        subtotal: quantity as f64 * unit_price,
    };
    vec![
        line("raa_antenna", num_rays * elements_per_ray, prices.cost_antenna),
        // N_RF·N switches at half price each: counted as N_RF·N half-switches
        line("raa_switch_half", rf_chains * num_rays, prices.cost_switch / 2.0),
        line("ula_phase_shifter", rf_chains * ula_elements, prices.cost_shifter),
        line("ula_antenna", num_sectors * ula_elements, prices.cost_antenna),
    ]
}
