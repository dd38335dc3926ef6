//! The `geometry`, `pattern`, `sumrate` and `cost` subcommands.

use std::fmt::Write as _;

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::Serialize;

use omnicell::channel::{draw_scenario, PathSet};
use omnicell::cost::{cost_lines, cost_raa, cost_report_mixed, cost_ula, CostReport, PriceTable};
use omnicell::pattern::{angle_grid, raa_response, uca_response, ula_hbf_response, ResponseMethod};
use omnicell::selection::{db_to_linear, evaluate_link, LinkProblem, Strategy};
use omnicell::Architecture;

use crate::config::{Arrays, Config};
use crate::output::{aligned_table, mag_db, num, Csv, RunManifest, Writer};

/// Result of a subcommand: the manifest plus a short human-readable report.
#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub manifest: RunManifest,
    pub summary: String,
}

#[derive(Debug, Serialize)]
struct RaaSummary {
    num_rays: usize,
    elements_per_ray: usize,
    wavelength_m: f64,
    central_distance_m: f64,
    central_distance_mm: f64,
    ray_spacing_rad: f64,
    ray_spacing_deg: f64,
    ray_indices: Vec<i64>,
    orientations_rad: Vec<f64>,
    wraparound_gap_rad: f64,
    min_element_distance_m: f64,
    allow_overlap: bool,
}

#[derive(Debug, Serialize)]
struct UlaSummary {
    elements_per_array: usize,
    num_sectors: usize,
    boresights_rad: Vec<f64>,
    sector_halfwidth_rad: f64,
    codewords_per_sector: usize,
}

#[derive(Debug, Serialize)]
struct UcaSummary {
    num_elements: usize,
    radius_m: f64,
    num_codewords: usize,
}

#[derive(Debug, Serialize)]
struct GeometrySummary {
    #[serde(skip_serializing_if = "Option::is_none")]
    raa: Option<RaaSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    ula: Option<UlaSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    uca: Option<UcaSummary>,
}

fn selected(cfg: &Config, arch: Architecture) -> bool {
    cfg.run.architectures.contains(&arch)
}

pub fn cmd_geometry(cfg: &Config) -> Result<CommandOutput> {
    let mut w = Writer::new("geometry", cfg)?;
    let arrays = cfg.build_arrays()?;
    let mut summary = GeometrySummary {
        raa: None,
        ula: None,
        uca: None,
    };
    let mut text = String::new();
    if selected(cfg, Architecture::Raa) {
        let raa = &arrays.raa;
        let mut csv = Csv::new("ray_index,element_index,x_m,y_m");
        for e in raa.element_positions() {
            csv.row([
                e.ray_index.to_string(),
                e.element_index.to_string(),
                num(e.x),
                num(e.y),
            ]);
        }
        w.write("geometry_raa.csv", &csv.into_string())?;
        let s = RaaSummary {
            num_rays: raa.num_rays(),
            elements_per_ray: raa.elements_per_ray(),
            wavelength_m: raa.wavelength(),
            central_distance_m: raa.central_distance(),
            central_distance_mm: raa.central_distance() * 1e3,
            ray_spacing_rad: raa.ray_spacing(),
            ray_spacing_deg: raa.ray_spacing().to_degrees(),
            ray_indices: raa.ray_indices().collect(),
            orientations_rad: raa.orientations().to_vec(),
            wraparound_gap_rad: raa.wraparound_gap(),
            min_element_distance_m: raa.min_element_distance(),
            allow_overlap: raa.allow_overlap(),
        };
        let _ = writeln!(
            text,
            "raa: N = {}, M = {}, D = {:.4} mm, ray spacing = {:.4} deg",
            s.num_rays, s.elements_per_ray, s.central_distance_mm, s.ray_spacing_deg
        );
        summary.raa = Some(s);
    }
    if selected(cfg, Architecture::Ula) {
        let ula = &arrays.ula;
        for p in 0..ula.num_sectors() {
            let mut csv = Csv::new("element_index,x_m,y_m");
            for (i, (x, y)) in ula.element_positions(p).into_iter().enumerate() {
                csv.row([(i + 1).to_string(), num(x), num(y)]);
            }
            w.write(&format!("geometry_ula_sector{p}.csv"), &csv.into_string())?;
        }
        let _ = writeln!(
            text,
            "ula: {} sectors x {} elements, {} codewords per sector",
            ula.num_sectors(),
            ula.elements_per_array(),
            arrays.dft.num_codewords()
        );
        summary.ula = Some(UlaSummary {
            elements_per_array: ula.elements_per_array(),
            num_sectors: ula.num_sectors(),
            boresights_rad: ula.boresights().to_vec(),
            sector_halfwidth_rad: ula.sector_halfwidth(),
            codewords_per_sector: arrays.dft.num_codewords(),
        });
    }
    if selected(cfg, Architecture::Uca) {
        let uca = &arrays.uca;
        let mut csv = Csv::new("element_index,x_m,y_m");
        for (i, (x, y)) in uca.element_positions().into_iter().enumerate() {
            csv.row([(i + 1).to_string(), num(x), num(y)]);
        }
        w.write("geometry_uca.csv", &csv.into_string())?;
        let _ = writeln!(
            text,
            "uca: {} elements, radius = {:.4} mm, {} codewords",
            uca.num_elements(),
            uca.radius() * 1e3,
            arrays.parametric.num_codewords()
        );
        summary.uca = Some(UcaSummary {
            num_elements: uca.num_elements(),
            radius_m: uca.radius(),
            num_codewords: arrays.parametric.num_codewords(),
        });
    }
    w.write_json("geometry_summary.json", &summary)?;
    w.lap("geometry");
    Ok(CommandOutput {
        manifest: w.finish()?,
        summary: text,
    })
}

/// Complex branch outputs of one architecture at `phi`.
fn branch_outputs(cfg: &Config, arrays: &Arrays, arch: Architecture, phi: f64) -> Vec<omnicell::Complex64> {
    match arch {
        Architecture::Raa => {
            raa_response(&arrays.raa, &cfg.raa.pattern, phi, ResponseMethod::ClosedForm).values
        }
        Architecture::Ula => (0..arrays.ula.num_sectors())
            .flat_map(|p| ula_hbf_response(&arrays.ula, &arrays.dft, &cfg.ula.pattern, phi, p).values)
            .collect(),
        Architecture::Uca => uca_response(&arrays.uca, &arrays.parametric, &cfg.uca.pattern, phi).values,
    }
}

pub fn cmd_pattern(cfg: &Config) -> Result<CommandOutput> {
    let mut w = Writer::new("pattern", cfg)?;
    let arrays = cfg.build_arrays()?;
    let grid = angle_grid(cfg.run.angle_grid);
    let mut text = String::new();
    for &arch in &cfg.run.architectures {
        let sweeps: Vec<Vec<omnicell::Complex64>> = grid
            .par_iter()
            .map(|&phi| branch_outputs(cfg, &arrays, arch, phi))
            .collect();
        let mut csv = Csv::new("phi_rad,branch_index,mag,mag_db,phase_rad");
        let mut env = Csv::new("phi_rad,mag,mag_db");
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for (&phi, values) in grid.iter().zip(&sweeps) {
            let phi_s = num(phi);
            let mut peak = 0.0f64;
            for (b, v) in values.iter().enumerate() {
                let mag = v.norm();
                peak = peak.max(mag);
                csv.row([
                    phi_s.as_str(),
                    &b.to_string(),
                    &num(mag),
                    &num(mag_db(mag)),
                    &num(v.arg()),
                ]);
            }
            env.row([phi_s, num(peak), num(mag_db(peak))]);
            lo = lo.min(peak);
            hi = hi.max(peak);
        }
        w.write(&format!("pattern_{arch}.csv"), &csv.into_string())?;
        w.write(&format!("pattern_{arch}_envelope.csv"), &env.into_string())?;
        let branches = sweeps.first().map_or(0, Vec::len);
        let _ = writeln!(
            text,
            "{arch}: {branches} branches, envelope min {lo:.6}, max {hi:.6} over {} angles",
            grid.len()
        );
    }
    w.lap("pattern");
    Ok(CommandOutput {
        manifest: w.finish()?,
        summary: text,
    })
}

/// Link problem of one architecture for one realisation.
fn link_problem(cfg: &Config, arrays: &Arrays, arch: Architecture, users: &[PathSet]) -> Result<LinkProblem> {
    let noise = cfg.run.noise_model;
    let p = match arch {
        Architecture::Raa => LinkProblem::raa(users, &arrays.raa, &cfg.raa.pattern),
        Architecture::Ula => LinkProblem::ula(users, &arrays.ula, &arrays.dft, &cfg.ula.pattern, noise),
        Architecture::Uca => {
            LinkProblem::uca(users, &arrays.uca, &arrays.parametric, noise, cfg.raa.m as f64)
        }
    };
    Ok(p?)
}

struct SeedResult {
    rows: String,
    /// Sum rate per `(snr, architecture)`, row-major.
    sum_rates: Vec<f64>,
}

fn run_seed(
    cfg: &Config,
    arrays: &Arrays,
    seed: u64,
    snrs: &[f64],
    strategy: Strategy,
) -> Result<SeedResult> {
    let users = draw_scenario(&cfg.scenario, seed);
    let archs = &cfg.run.architectures;
    let problems = archs
        .iter()
        .map(|&a| link_problem(cfg, arrays, a, &users).with_context(|| format!("architecture {a}")))
        .collect::<Result<Vec<_>>>()?;
    let nrf = cfg.scenario.num_rf_chains;
    let mut rows = Csv::default();
    let mut sum_rates = Vec::with_capacity(snrs.len() * archs.len());
    for &snr_db in snrs {
        for (&arch, problem) in archs.iter().zip(&problems) {
            let report = evaluate_link(problem, &users, strategy, db_to_linear(snr_db), nrf)
                .with_context(|| format!("architecture {arch}, strategy {}", strategy.name()))?;
            let rate = num(report.sum_rate);
            for (k, s) in report.sinr_db().into_iter().enumerate() {
                rows.row([
                    arch.name(),
                    &seed.to_string(),
                    &num(snr_db),
                    &k.to_string(),
                    &num(s),
                    &rate,
                    strategy.name(),
                ]);
            }
            sum_rates.push(report.sum_rate);
        }
    }
    Ok(SeedResult {
        rows: rows.into_string(),
        sum_rates,
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct AggregatePoint {
    pub architecture: Architecture,
    pub snr_db: f64,
    pub mean_sum_rate: f64,
    /// Sample standard deviation; absent for a single seed.
    pub std_sum_rate: Option<f64>,
    pub num_seeds: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct Aggregate {
    pub strategy: Strategy,
    pub first_seed: u64,
    pub num_seeds: usize,
    pub points: Vec<AggregatePoint>,
}

fn mean_std(xs: &[f64]) -> (f64, Option<f64>) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = (xs.len() > 1).then(|| (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (mean, std)
}

pub fn cmd_sumrate(cfg: &Config) -> Result<CommandOutput> {
    let mut w = Writer::new("sumrate", cfg)?;
    let arrays = cfg.build_arrays()?;
    let snrs = cfg.run.snr_db.points();
    let strategy = cfg.run.strategy;
    let seeds: Vec<u64> = (0..cfg.run.num_seeds as u64)
        .map(|i| cfg.run.seed.wrapping_add(i))
        .collect();
    w.lap("setup");

    let results = seeds
        .par_iter()
        .map(|&s| run_seed(cfg, &arrays, s, &snrs, strategy).with_context(|| format!("seed {s}")))
        .collect::<Result<Vec<_>>>()?;
    w.lap("simulate");

    let mut csv = Csv::new("architecture,seed,snr_db,user,sinr_db,sum_rate_bpshz,strategy");
    for r in &results {
        csv.push_raw(&r.rows);
    }
    w.write("linkreport.csv", &csv.into_string())?;

    let archs = &cfg.run.architectures;
    let mut points = Vec::new();
    let mut table = Vec::new();
    for (i, &snr_db) in snrs.iter().enumerate() {
        let mut line = vec![format!("{snr_db}")];
        for (j, &arch) in archs.iter().enumerate() {
            let xs: Vec<f64> = results.iter().map(|r| r.sum_rates[i * archs.len() + j]).collect();
            let (mean, std) = mean_std(&xs);
            line.push(format!("{mean:.4}"));
            points.push(AggregatePoint {
                architecture: arch,
                snr_db,
                mean_sum_rate: mean,
                std_sum_rate: std,
                num_seeds: xs.len(),
            });
        }
        table.push(line);
    }
    let aggregate = Aggregate {
        strategy,
        first_seed: cfg.run.seed,
        num_seeds: seeds.len(),
        points,
    };
    w.write_json("aggregate.json", &aggregate)?;

    if cfg.run.dump_channels {
        let mut dump = Csv::new("user,path,alpha_re,alpha_im,phi_rad");
        for u in draw_scenario(&cfg.scenario, cfg.run.seed) {
            for (l, p) in u.paths.iter().enumerate() {
                dump.row([
                    u.user.to_string(),
                    l.to_string(),
                    num(p.gain.re),
                    num(p.gain.im),
                    num(p.azimuth),
                ]);
            }
        }
        w.write("channels.csv", &dump.into_string())?;
    }
    w.lap("write");

    let mut header = vec!["snr_db"];
    header.extend(archs.iter().map(|a| a.name()));
    let summary = format!(
        "mean sum rate (bit/s/Hz) over {} seeds, strategy {}\n{}",
        seeds.len(),
        strategy.name(),
        aligned_table(&header, &table)
    );
    Ok(CommandOutput {
        manifest: w.finish()?,
        summary,
    })
}

#[derive(Debug, Serialize)]
struct CostSummary {
    num_rays: usize,
    elements_per_ray: usize,
    ula_elements: usize,
    rf_chains: usize,
    num_sectors: usize,
    prices: PriceTable,
    report: CostReport,
}

pub fn cmd_cost(cfg: &Config) -> Result<CommandOutput> {
    let mut w = Writer::new("cost", cfg)?;
    let raa = cfg.build_raa()?;
    let (n, m, mu) = (raa.num_rays(), cfg.raa.m, cfg.ula.m);
    let (nrf, sectors) = (cfg.scenario.num_rf_chains, cfg.ula.num_sectors);
    let p = &cfg.prices;
    let report = cost_report_mixed(n, m, mu, nrf, sectors, p);
    debug_assert_eq!(report.cost_raa, cost_raa(n, m, nrf, p));
    debug_assert_eq!(report.cost_ula, cost_ula(mu, nrf, sectors, p));

    let lines = cost_lines(n, m, mu, nrf, sectors, p);
    let mut csv = Csv::new("item,quantity,unit_price_usd,subtotal_usd");
    let mut rows = Vec::new();
    for l in &lines {
        csv.row([
            l.item.clone(),
            l.quantity.to_string(),
            num(l.unit_price),
            num(l.subtotal),
        ]);
        rows.push(vec![
            l.item.clone(),
            l.quantity.to_string(),
            format!("{:.4}", l.unit_price),
            format!("{:.2}", l.subtotal),
        ]);
    }
    let breakeven = report.breakeven_antenna_price;
    let summary_rows = [
        (
            "total_raa",
            num(report.cost_raa),
            format!("{:.2}", report.cost_raa),
        ),
        (
            "total_ula",
            num(report.cost_ula),
            format!("{:.2}", report.cost_ula),
        ),
        (
            "ratio_raa_to_ula",
            num(report.ratio),
            format!("{:.2}%", 100.0 * report.ratio),
        ),
        (
            "breakeven_antenna_price",
            breakeven.map_or_else(|| "none".to_string(), num),
            breakeven.map_or_else(|| "none".to_string(), |b| format!("{b:.4}")),
        ),
    ];
    for (item, exact, shown) in summary_rows {
        csv.row([item, "", "", exact.as_str()]);
        rows.push(vec![item.to_string(), String::new(), String::new(), shown]);
    }
    w.write("cost.csv", &csv.into_string())?;

    let mut table = aligned_table(&["item", "quantity", "unit_price_usd", "subtotal_usd"], &rows);
    if !report.raa_advantage {
        table.push_str("raa is not cheaper at any non-negative antenna price\n");
    }
    w.write("cost.txt", &table)?;
    w.write_json(
        "cost_summary.json",
        &CostSummary {
            num_rays: n,
            elements_per_ray: m,
            ula_elements: mu,
            rf_chains: nrf,
            num_sectors: sectors,
            prices: *p,
            report,
        },
    )?;
    w.lap("cost");
    Ok(CommandOutput {
        manifest: w.finish()?,
        summary: table,
    })
}
