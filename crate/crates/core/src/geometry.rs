//! Array geometry for the full-angle RAA, the sectored ULA panels and the UCA.
//!
//! Every constructor validates its closed-form constraints and returns an
//! immutable parameter set. Positions are planar `(x, y)` in metres.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Slack used when checking the half-wavelength spacing constraint.
pub const SPACING_EPS_M: f64 = 1e-12;

/// Guards `floor` against values that should be integral but land a few ulps low.
const FLOOR_EPS: f64 = 1e-9;

pub fn wavelength_from_carrier(carrier_hz: f64) -> f64 {
    SPEED_OF_LIGHT / carrier_hz
}

/// Wraps an angle to the principal interval `(-π, π]`.
pub fn wrap_angle(angle: f64) -> f64 {
    if angle > -PI && angle <= PI {
        return angle;
    }
    let mut wrapped = angle.rem_euclid(TAU);
    if wrapped > PI {
        wrapped -= TAU;
    }
    // rem_euclid can return exactly TAU for tiny negative inputs
    if wrapped <= -PI {
        wrapped += TAU;
    }
    wrapped
}

/// Heading (from +x) of the line along which a ray with orientation `eta`
/// (measured from +y) extends.
pub fn ray_orientation_to_heading(eta: f64) -> f64 {
    wrap_angle(eta + FRAC_PI_2)
}

/// Inverse of [`ray_orientation_to_heading`].
pub fn heading_to_ray_orientation(heading: f64) -> f64 {
    wrap_angle(heading - FRAC_PI_2)
}

/// Angular spacing between adjacent rays, `arcsin(2/M)`.
pub fn ray_spacing(elements_per_ray: usize) -> f64 {
    (2.0 / elements_per_ray as f64).asin()
}

/// Smallest central distance keeping the first elements of adjacent rays
/// half a wavelength apart.
pub fn min_central_distance(elements_per_ray: usize, wavelength: f64) -> f64 {
    wavelength / (4.0 * (0.5 * ray_spacing(elements_per_ray)).sin())
}

/// Ray count from the wrap-around spacing rule, forced odd by decrementing.
pub fn strict_ray_count(elements_per_ray: usize, wavelength: f64, central_distance: f64) -> usize {
    let chi = ray_spacing(elements_per_ray);
    let ratio = (wavelength / (4.0 * central_distance)).min(1.0);
    let raw = (2.0 * (PI - ratio.asin()) / chi + 1.0 + FLOOR_EPS).floor();
    force_odd(raw.max(0.0) as usize)
}

/// Ray count from the large-`M` approximation `N ≈ ⌊Mπ⌋`, forced odd.
pub fn approximate_ray_count(elements_per_ray: usize) -> usize {
    force_odd((elements_per_ray as f64 * PI + FLOOR_EPS).floor() as usize)
}

fn force_odd(n: usize) -> usize {
    if n.is_multiple_of(2) {
        n.saturating_sub(1)
    } else {
        n
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SizingMode {
    /// Ray count from the exact wrap-around spacing constraint.
    #[default]
    Strict,
    /// Ray count from `⌊Mπ⌋`.
    Approximate,
}

/// A full-angle ray antenna array.
///
/// Rays are indexed symmetrically, `n ∈ {-(N-1)/2, …, (N-1)/2}`, with
/// orientation `η_n = n·arcsin(2/M)` measured from the positive y axis.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RaaParams {
    num_rays: usize,
    elements_per_ray: usize,
    central_distance: f64,
    wavelength: f64,
    orientations: Vec<f64>,
    allow_overlap: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementPosition {
    pub ray_index: i64,
    /// 1-based position along the ray.
    pub element_index: usize,
    pub x: f64,
    pub y: f64,
}

impl ElementPosition {
    pub fn distance(&self, other: &ElementPosition) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

impl RaaParams {
    /// Builds an RAA with the central distance at its lower bound.
    pub fn build(elements_per_ray: usize, wavelength: f64, sizing: SizingMode) -> Result<Self> {
        check_elements(elements_per_ray)?;
        check_wavelength(wavelength)?;
        let central_distance = min_central_distance(elements_per_ray, wavelength);
        let num_rays = match sizing {
            SizingMode::Strict => strict_ray_count(elements_per_ray, wavelength, central_distance),
            SizingMode::Approximate => approximate_ray_count(elements_per_ray),
        };
        Self::with_layout(elements_per_ray, wavelength, central_distance, num_rays, false)
    }

    /// Builds an RAA for a caller-chosen central distance, sizing the ray
    /// count with the strict rule.
    pub fn with_central_distance(
        elements_per_ray: usize,
        wavelength: f64,
        central_distance: f64,
    ) -> Result<Self> {
        check_elements(elements_per_ray)?;
        check_wavelength(wavelength)?;
        let num_rays = strict_ray_count(elements_per_ray, wavelength, central_distance);
        Self::with_layout(elements_per_ray, wavelength, central_distance, num_rays, false)
    }

    /// Fully explicit construction.
    ///
    /// `allow_overlap` admits layouts whose outermost rays meet near ±π
    /// (such as `M = 4, N = 13`); the spacing check then skips that pair.
    pub fn with_layout(
        elements_per_ray: usize,
        wavelength: f64,
        central_distance: f64,
        num_rays: usize,
        allow_overlap: bool,
    ) -> Result<Self> {
        check_elements(elements_per_ray)?;
        check_wavelength(wavelength)?;
        if !(central_distance.is_finite() && central_distance > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "central distance must be positive, got {central_distance}"
            )));
        }
        if num_rays < 3 {
            return Err(Error::DegenerateArray(format!(
                "need at least 3 rays, got {num_rays}"
            )));
        }
        if num_rays.is_multiple_of(2) {
            return Err(Error::InvalidParameter(format!(
                "ray count must be odd for the symmetric index set, got {num_rays}"
            )));
        }
        let chi = ray_spacing(elements_per_ray);
        let half = (num_rays as i64 - 1) / 2;
        let orientations: Vec<f64> = (-half..=half).map(|n| n as f64 * chi).collect();
        if orientations[num_rays - 1] > PI + 1e-12 {
            return Err(Error::DegenerateArray(format!(
                "{num_rays} rays spaced {chi:.6} rad exceed the full angle"
            )));
        }
        let params = RaaParams {
            num_rays,
            elements_per_ray,
            central_distance,
            wavelength,
            orientations,
            allow_overlap,
        };
        params.validate()?;
        Ok(params)
    }

    fn validate(&self) -> Result<()> {
        let chi = ray_spacing(self.elements_per_ray);
        let gap = self.wraparound_gap();
        if !self.allow_overlap && gap < 0.5 * chi {
            return Err(Error::DegenerateArray(format!(
                "outermost rays are {gap:.3e} rad apart around ±π (less than half the ray spacing)"
            )));
        }
        let min_dist = self.min_element_distance();
        let bound = 0.5 * self.wavelength - SPACING_EPS_M;
        if min_dist < bound {
            return Err(Error::DegenerateArray(format!(
                "element spacing {min_dist:.6e} m is below half a wavelength ({:.6e} m); \
                 increase the central distance or reduce the ray count",
                0.5 * self.wavelength
            )));
        }
        Ok(())
    }

    /// Angular gap between the outermost rays measured across ±π.
    pub fn wraparound_gap(&self) -> f64 {
        TAU - (self.orientations[self.num_rays - 1] - self.orientations[0])
    }

    /// Minimum distance between distinct elements, computed analytically.
    ///
    /// For two rays separated by `Δ` the closest pair always sits at equal
    /// radius, and elements at different radii are at least `λ/2` apart, so
    /// only the first elements of angularly adjacent rays matter.
    pub fn min_element_distance(&self) -> f64 {
        let chi = ray_spacing(self.elements_per_ray);
        let mut min_gap = chi;
        if !self.allow_overlap {
            min_gap = min_gap.min(self.wraparound_gap());
        }
        let across = 2.0 * self.central_distance * (0.5 * min_gap.min(PI)).sin();
        across.min(0.5 * self.wavelength)
    }

    pub fn num_rays(&self) -> usize {
        self.num_rays
    }

    pub fn elements_per_ray(&self) -> usize {
        self.elements_per_ray
    }

    pub fn central_distance(&self) -> f64 {
        self.central_distance
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn allow_overlap(&self) -> bool {
        self.allow_overlap
    }

    pub fn ray_spacing(&self) -> f64 {
        ray_spacing(self.elements_per_ray)
    }

    /// Largest ray index, `(N-1)/2`.
    pub fn half_span(&self) -> i64 {
        (self.num_rays as i64 - 1) / 2
    }

    /// Orientations in ascending ray-index order.
    pub fn orientations(&self) -> &[f64] {
        &self.orientations
    }

    /// Symmetric ray indices in ascending order.
    pub fn ray_indices(&self) -> impl Iterator<Item = i64> {
        let half = self.half_span();
        -half..=half
    }

    /// Orientation of ray `n` (symmetric index).
    pub fn orientation(&self, n: i64) -> f64 {
        self.orientations[self.slot(n)]
    }

    /// Converts a symmetric ray index into a 0-based branch slot.
    pub fn slot(&self, n: i64) -> usize {
        let slot = n + self.half_span();
        assert!(
            (0..self.num_rays as i64).contains(&slot),
            "ray index {n} outside ±{}",
            self.half_span()
        );
        slot as usize
    }

    /// Inverse of [`RaaParams::slot`].
    pub fn ray_index(&self, slot: usize) -> i64 {
        slot as i64 - self.half_span()
    }

    /// Distance of element `m` (1-based) from the array centre.
    pub fn element_radius(&self, m: usize) -> f64 {
        self.central_distance + (m as f64 - 1.0) * 0.5 * self.wavelength
    }

    /// All `N·M` element positions, ordered by ray index then element index.
    pub fn element_positions(&self) -> Vec<ElementPosition> {
        let mut out = Vec::with_capacity(self.num_rays * self.elements_per_ray);
        for n in self.ray_indices() {
            let (sin_eta, cos_eta) = self.orientation(n).sin_cos();
            for m in 1..=self.elements_per_ray {
                let radius = self.element_radius(m);
                out.push(ElementPosition {
                    ray_index: n,
                    element_index: m,
                    x: -radius * sin_eta,
                    y: radius * cos_eta,
                });
            }
        }
        out
    }
}

fn check_elements(elements_per_ray: usize) -> Result<()> {
    if elements_per_ray < 2 {
        return Err(Error::InvalidParameter(format!(
            "elements per ray must be at least 2, got {elements_per_ray}"
        )));
    }
    Ok(())
}

fn check_wavelength(wavelength: f64) -> Result<()> {
    if !(wavelength.is_finite() && wavelength > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "wavelength must be positive, got {wavelength}"
        )));
    }
    Ok(())
}

/// A set of identical ULA panels, each serving an equal azimuth sector.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UlaSectorParams {
    elements_per_array: usize,
    boresights: Vec<f64>,
    wavelength: f64,
}

impl UlaSectorParams {
    /// Sector `p` points at `2πp / num_sectors` (wrapped), so sector 0 looks
    /// along the positive x axis.
    pub fn build(elements_per_array: usize, wavelength: f64, num_sectors: usize) -> Result<Self> {
        if elements_per_array < 2 {
            return Err(Error::InvalidParameter(format!(
                "ULA needs at least 2 elements, got {elements_per_array}"
            )));
        }
        if num_sectors == 0 {
            return Err(Error::InvalidParameter("ULA needs at least one sector".into()));
        }
        check_wavelength(wavelength)?;
        let boresights = (0..num_sectors)
            .map(|p| wrap_angle(TAU * p as f64 / num_sectors as f64))
            .collect();
        Ok(UlaSectorParams {
            elements_per_array,
            boresights,
            wavelength,
        })
    }

    pub fn elements_per_array(&self) -> usize {
        self.elements_per_array
    }

    pub fn num_sectors(&self) -> usize {
        self.boresights.len()
    }

    pub fn boresights(&self) -> &[f64] {
        &self.boresights
    }

    pub fn boresight(&self, sector: usize) -> f64 {
        self.boresights[sector]
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    /// Half of the angular range each sector covers.
    pub fn sector_halfwidth(&self) -> f64 {
        PI / self.num_sectors() as f64
    }

    /// Sector-relative angle of a global AoA.
    pub fn relative_angle(&self, phi: f64, sector: usize) -> f64 {
        wrap_angle(phi - self.boresights[sector])
    }

    /// Element positions of one panel. The panel sits at the origin with its
    /// axis perpendicular to the boresight; element `m` is `(m-1)λ/2` along it.
    pub fn element_positions(&self, sector: usize) -> Vec<(f64, f64)> {
        let (sin_b, cos_b) = self.boresights[sector].sin_cos();
        (0..self.elements_per_array)
            .map(|m| {
                let offset = m as f64 * 0.5 * self.wavelength;
                (-offset * sin_b, offset * cos_b)
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum UcaRadiusMode {
    /// `a = Nλ/(4π)`, which puts adjacent elements half a wavelength apart.
    #[default]
    Standard,
    Explicit,
}

/// Uniform circular array with element `n` (1-based) at angle `2π(n-1)/N`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UcaParams {
    num_elements: usize,
    radius: f64,
    orientations: Vec<f64>,
    wavelength: f64,
}

impl UcaParams {
    pub fn build(num_elements: usize, wavelength: f64) -> Result<Self> {
        check_wavelength(wavelength)?;
        let radius = num_elements as f64 * wavelength / (4.0 * PI);
        Self::with_radius(num_elements, wavelength, radius)
    }

    pub fn with_radius(num_elements: usize, wavelength: f64, radius: f64) -> Result<Self> {
        if num_elements < 3 {
            return Err(Error::InvalidParameter(format!(
                "UCA needs at least 3 elements, got {num_elements}"
            )));
        }
        check_wavelength(wavelength)?;
        if !(radius.is_finite() && radius > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "UCA radius must be positive, got {radius}"
            )));
        }
        let orientations = (0..num_elements)
            .map(|n| TAU * n as f64 / num_elements as f64)
            .collect();
        Ok(UcaParams {
            num_elements,
            radius,
            orientations,
            wavelength,
        })
    }

    pub fn num_elements(&self) -> usize {
        self.num_elements
    }

    pub fn radius(&self) -> f64 {
        self.radius
    }

    pub fn orientations(&self) -> &[f64] {
        &self.orientations
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }

    pub fn element_positions(&self) -> Vec<(f64, f64)> {
        self.orientations
            .iter()
            .map(|phi| (self.radius * phi.cos(), self.radius * phi.sin()))
            .collect()
    }
}
