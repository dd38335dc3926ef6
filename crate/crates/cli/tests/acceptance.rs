//! Acceptance criteria, one result line each. Exits non-zero if any fails.

use std::f64::consts::{PI, TAU};
use std::path::Path;
use std::time::Instant;

use omnicell::channel::{draw_scenario, Path as Ray, PathSet, ScenarioConfig};
use omnicell::cost::{breakeven_antenna_price, cost_raa, cost_ula, PriceTable};
use omnicell::geometry::{
    wavelength_from_carrier, wrap_angle, RaaParams, SizingMode, UcaParams, UlaSectorParams,
};
use omnicell::pattern::{
    angle_grid, build_dft_codebook, build_parametric_codebook, raa_ray_response, raa_response,
    ElementPattern, ParametricCodebookOptions, ResponseMethod,
};
use omnicell::selection::{
    select_exhaustive, select_greedy, BeamformingMatrix, LinkProblem, SelectionMatrix,
};
use omnicell::Complex64;
use omnicell_cli::{cmd_sumrate, Config};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn c1_cost() -> Outcome {
    let t = Instant::now();
    let p = PriceTable::default();
    let raa = cost_raa(201, 64, 10, &p);
    let ula = cost_ula(64, 10, 3, &p);
    let ratio = 100.0 * raa / ula;
    let be = breakeven_antenna_price(201, 64, 10, 3, &p).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let pass = (raa - 28_891.74).abs() <= 0.01
        && (ula - 76_801.92).abs() <= 0.01
        && (ratio - 37.62).abs() <= 0.01
        && (be - 3.79).abs() <= 0.05
        && secs < 1.0;
    outcome(
        pass,
        format!("raa {raa:.2} usd, ula {ula:.2} usd, ratio {ratio:.4}%, breakeven {be:.4} usd, {secs:.3}s"),
    )
}

fn c2_geometry() -> Outcome {
    let t = Instant::now();
    let lambda = wavelength_from_carrier(47.2e9);
    let small = RaaParams::build(4, lambda, SizingMode::Strict).unwrap();
    let d_mm = small.central_distance() * 1e3;
    let spacing_ok = small.ray_spacing() == 0.5f64.asin()
        && small
            .orientations()
            .windows(2)
            .all(|w| (w[1] - w[0] - 0.5f64.asin()).abs() < 1e-15);
    let lambda64 = wavelength_from_carrier(28e9);
    let large = RaaParams::with_central_distance(64, lambda64, 64.0 * lambda64 / 4.0).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let pass = (d_mm - 6.135).abs() <= 0.05 && spacing_ok && large.num_rays() == 201 && secs < 1.0;
    outcome(
        pass,
        format!(
            "D {d_mm:.4} mm, spacing arcsin(0.5) {}, N(M=64, D=M*lambda/4) = {}, {secs:.3}s",
            if spacing_ok { "exact" } else { "off" },
            large.num_rays()
        ),
    )
}

/// Plane-wave sum over the exported element positions.
fn plane_wave(raa: &RaaParams, pattern: &ElementPattern, phi: f64) -> Vec<Complex64> {
    let k = TAU / raa.wavelength();
    let mut out = vec![Complex64::new(0.0, 0.0); raa.num_rays()];
    for e in raa.element_positions() {
        let amp = pattern.amplitude(wrap_angle(phi - raa.orientation(e.ray_index)));
        out[raa.slot(e.ray_index)] += Complex64::from_polar(amp, k * (e.x * phi.cos() + e.y * phi.sin()));
    }
    out
}

fn c3_oracle() -> Outcome {
    let t = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst_brute = 0.0f64;
    let mut worst_plane = 0.0f64;
    let mut near = 0;
    let cases = 10_000;
    for i in 0..cases {
        let m = rng.random_range(2..=64usize);
        let f_c = rng.random_range(1e9..1e11);
        let raa = RaaParams::build(m, wavelength_from_carrier(f_c), SizingMode::Strict).unwrap();
        let pattern = if i % 2 == 0 {
            ElementPattern::directional()
        } else {
            ElementPattern::Isotropic
        };
        let phi = if i % 5 == 0 {
            // within 1e-8 rad of a Dirichlet singularity of some ray
            near += 1;
            let n = raa.ray_index(rng.random_range(0..raa.num_rays()));
            let base = raa.orientation(n) + if rng.random_bool(0.5) { 0.0 } else { PI };
            wrap_angle(base + rng.random_range(-1e-8..1e-8))
        } else {
            rng.random_range(-PI..PI)
        };
        let closed = raa_response(&raa, &pattern, phi, ResponseMethod::ClosedForm).values;
        let brute = raa_response(&raa, &pattern, phi, ResponseMethod::BruteForce).values;
        let plane = plane_wave(&raa, &pattern, phi);
        for ((c, b), p) in closed.iter().zip(&brute).zip(&plane) {
            worst_brute = worst_brute.max((c - b).norm());
            worst_plane = worst_plane.max((c - p).norm());
        }
    }
    let secs = t.elapsed().as_secs_f64();
    let pass = worst_brute <= 1e-9 && worst_plane <= 1e-9 && secs < 30.0;
    outcome(
        pass,
        format!(
            "{cases} cases ({near} near singularities), max |closed - brute| {worst_brute:.2e}, max |closed - plane wave| {worst_plane:.2e}, {secs:.1}s"
        ),
    )
}

fn c4_uniformity() -> Outcome {
    let raa = RaaParams::build(4, wavelength_from_carrier(47.2e9), SizingMode::Strict).unwrap();
    let pattern = ElementPattern::directional();
    let centre = raa.slot(0);
    let mut worst = 0.0f64;
    for phi in angle_grid(4096) {
        for slot in 0..raa.num_rays() {
            let eta = raa.orientation(raa.ray_index(slot));
            let a = raa_ray_response(&raa, &pattern, phi, slot, ResponseMethod::ClosedForm).norm();
            let b = raa_ray_response(
                &raa,
                &pattern,
                wrap_angle(phi - eta),
                centre,
                ResponseMethod::ClosedForm,
            )
            .norm();
            worst = worst.max((a - b).abs());
        }
    }
    let mut worst_null = 0.0f64;
    for n in raa.ray_indices() {
        for nb in [n - 1, n + 1] {
            if nb.abs() <= raa.half_span() {
                let v = raa_ray_response(
                    &raa,
                    &pattern,
                    raa.orientation(nb),
                    raa.slot(n),
                    ResponseMethod::ClosedForm,
                );
                worst_null = worst_null.max(v.norm());
            }
        }
    }
    outcome(
        worst <= 1e-12 && worst_null <= 1e-9,
        format!(
            "N = {}, max rotation mismatch {worst:.2e} over 4096 angles, max |r_n(eta_n+-1)| {worst_null:.2e}",
            raa.num_rays()
        ),
    )
}

fn small_problem(i: usize) -> (LinkProblem, usize) {
    // architecture, chain count, user count and SNR vary independently
    let chains = 1 + (i / 3) % 3;
    let users = 1 + (i / 9) % 3;
    let cfg = ScenarioConfig {
        f_c: 28e9,
        num_users: users,
        num_rf_chains: chains,
        num_clusters: 4,
        rays_per_cluster: 5,
        ..ScenarioConfig::default()
    };
    let lambda = cfg.wavelength();
    let paths = draw_scenario(&cfg, 1000 + i as u64);
    let pattern = ElementPattern::directional();
    let noise = omnicell::selection::NoiseModel::AsWritten;
    let problem = match i % 3 {
        // 11 rays
        0 => {
            let raa = RaaParams::build(4, lambda, SizingMode::Strict).unwrap();
            LinkProblem::raa(&paths, &raa, &pattern).unwrap()
        }
        // 3 sectors x 3 codewords
        1 => {
            let ula = UlaSectorParams::build(4, lambda, 3).unwrap();
            let cb = build_dft_codebook(4, ula.sector_halfwidth()).unwrap();
            LinkProblem::ula(&paths, &ula, &cb, &pattern, noise).unwrap()
        }
        // 12 codewords
        _ => {
            let uca = UcaParams::build(13, lambda).unwrap();
            let cb = build_parametric_codebook(&uca, &ParametricCodebookOptions::matching_raa(4)).unwrap();
            LinkProblem::uca(&paths, &uca, &cb, noise, 4.0).unwrap()
        }
    };
    (problem, chains)
}

fn c5_selection() -> Outcome {
    let t = Instant::now();
    let mut good = 0;
    let mut violations = 0;
    let mut max_branches = 0;
    let mut worst = f64::INFINITY;
    for i in 0..100 {
        let (problem, chains) = small_problem(i);
        max_branches = max_branches.max(problem.num_branches());
        let snr = omnicell::selection::db_to_linear([-10.0, 0.0, 10.0][(i / 27) % 3]);
        let ex = select_exhaustive(&problem, snr, chains).unwrap().report.sum_rate;
        let gr = select_greedy(&problem, snr, chains).unwrap().report.sum_rate;
        // exhaustive keeps the first of candidates within 1e-12 relative
        if ex < gr * (1.0 - 1e-12) {
            violations += 1;
        }
        let ratio = gr / ex;
        worst = worst.min(ratio);
        if ratio >= 0.95 {
            good += 1;
        }
    }
    let secs = t.elapsed().as_secs_f64();
    outcome(
        good >= 95 && violations == 0 && max_branches <= 12 && secs < 300.0,
        format!(
            "greedy >= 95% of optimum on {good}/100, exhaustive < greedy on {violations}, worst ratio {worst:.4}, max {max_branches} branches, {secs:.1}s"
        ),
    )
}

fn gaussian(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

fn c6_mmse() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut worst = f64::NEG_INFINITY;
    let mut checks = 0;
    for _ in 0..1000 {
        let branches = rng.random_range(2..=12usize);
        let users = rng.random_range(1..=4usize);
        let chains = rng.random_range(1..=branches.min(4));
        let channels: Vec<Vec<Complex64>> = (0..users)
            .map(|_| (0..branches).map(|_| gaussian(&mut rng)).collect())
            .collect();
        let noise: Vec<f64> = (0..branches).map(|_| rng.random_range(0.5..8.0)).collect();
        let problem = LinkProblem::new(
            omnicell::Architecture::Raa,
            channels,
            vec![0; branches],
            vec![0; users],
            noise,
            vec![0.0; branches],
        )
        .unwrap();
        let mut pool: Vec<usize> = (0..branches).collect();
        let mut assigned = Vec::new();
        for _ in 0..chains {
            assigned.push(pool.swap_remove(rng.random_range(0..pool.len())));
        }
        let sel = SelectionMatrix::new(branches, assigned).unwrap();
        let snr = 10f64.powf(rng.random_range(-2.0..2.0));
        let f = problem.mmse(&sel, snr).unwrap();
        for k in 0..users {
            let base = problem.sinr(&sel, &f, snr, k).unwrap();
            let norm = f.column(k).iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
            for _ in 0..20 {
                let mut d: Vec<Complex64> = (0..chains).map(|_| gaussian(&mut rng)).collect();
                let dn = d.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
                for v in &mut d {
                    *v *= 1e-2 * norm / dn;
                }
                let mut cols = f.columns().to_vec();
                for (v, dv) in cols[k].iter_mut().zip(&d) {
                    *v += dv;
                }
                let s = problem
                    .sinr(&sel, &BeamformingMatrix::from_columns(cols), snr, k)
                    .unwrap();
                worst = worst.max((s - base) / base);
                checks += 1;
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("{checks} perturbations, largest relative SINR gain {worst:.2e}"),
    )
}

fn c7_analytic() -> Outcome {
    let mut worst = 0.0f64;
    let mut cases = 0;
    for m in [4usize, 16, 64] {
        let raa = RaaParams::build(m, wavelength_from_carrier(28e9), SizingMode::Strict).unwrap();
        for slot in 0..raa.num_rays() {
            let eta = raa.orientation(raa.ray_index(slot));
            let user = PathSet {
                user: 0,
                los_azimuth: eta,
                paths: vec![Ray {
                    gain: Complex64::new(1.0, 0.0),
                    azimuth: eta,
                }],
            };
            let problem = LinkProblem::raa(&[user], &raa, &ElementPattern::directional()).unwrap();
            let sel = SelectionMatrix::new(raa.num_rays(), vec![slot]).unwrap();
            for p in [0.1, 1.0, 10.0] {
                let (_, report) = problem.evaluate(&sel, p).unwrap();
                worst = worst.max(rel_err(report.sinr[0], p * m as f64));
                cases += 1;
            }
        }
    }
    outcome(
        worst <= 1e-9,
        format!("{cases} cases, max relative error {worst:.2e}"),
    )
}

const DESK: &str = r#"{
  "scenario": {"f_c": 28e9, "num_users": 4, "num_rf_chains": 4, "num_clusters": 4, "rays_per_cluster": 5},
  "raa": {"m": 16, "sizing": "strict"}, "ula": {"m": 16, "num_sectors": 3}, "uca": {"n": 25},
  "run": {"num_seeds": 200, "snr_db": {"lo": -10, "hi": 10, "step": 10}, "strategy": "greedy"}
}"#;

fn desk_means(cfg: &Config) -> Vec<(f64, [f64; 3])> {
    cmd_sumrate(cfg).unwrap();
    let agg: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(cfg.run.out_dir.join("aggregate.json")).unwrap())
            .unwrap();
    let mut rows: Vec<(f64, [f64; 3])> = Vec::new();
    for p in agg["points"].as_array().unwrap() {
        let snr = p["snr_db"].as_f64().unwrap();
        let idx = ["raa", "ula", "uca"]
            .iter()
            .position(|a| p["architecture"] == *a)
            .unwrap();
        if rows.last().is_none_or(|r| r.0 != snr) {
            rows.push((snr, [f64::NAN; 3]));
        }
        rows.last_mut().unwrap().1[idx] = p["mean_sum_rate"].as_f64().unwrap();
    }
    rows
}

fn format_means(rows: &[(f64, [f64; 3])]) -> String {
    rows.iter()
        .map(|(s, m)| format!("{s} dB: raa {:.3} ula {:.3} uca {:.3}", m[0], m[1], m[2]))
        .collect::<Vec<_>>()
        .join("; ")
}

fn c8_ordering(dir: &Path) -> (Outcome, String) {
    let t = Instant::now();
    let mut cfg = Config::from_json(DESK).unwrap();
    cfg.run.out_dir = dir.join("desk");
    let rows = desk_means(&cfg);
    let pass = rows.len() == 3 && rows.iter().all(|(_, m)| m[0] > m[1] && m[0] > m[2]);
    let main = outcome(
        pass,
        format!("{} ({:.1}s)", format_means(&rows), t.elapsed().as_secs_f64()),
    );
    // same run with the UCA combining only the elements facing each target
    cfg.uca.semicircle = true;
    cfg.run.out_dir = dir.join("desk_semicircle");
    let semi = desk_means(&cfg);
    let ordered = semi.iter().all(|(_, m)| m[0] > m[1] && m[0] > m[2]);
    let note = format!(
        "semicircle UCA variant: {} (ordering {})",
        format_means(&semi),
        if ordered { "holds" } else { "fails" }
    );
    (main, note)
}

fn c9_determinism(dir: &Path) -> Outcome {
    let mut cfg = Config::from_json(DESK).unwrap();
    cfg.run.num_seeds = 24;
    let mut bodies = Vec::new();
    for (run, threads) in [1usize, 1, 3].into_iter().enumerate() {
        cfg.run.out_dir = dir.join(format!("det{run}"));
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| cmd_sumrate(&cfg)).unwrap();
        let read = |f: &str| std::fs::read(cfg.run.out_dir.join(f)).unwrap();
        bodies.push((read("linkreport.csv"), read("aggregate.json")));
    }
    let same = bodies.windows(2).all(|w| w[0] == w[1]);
    outcome(
        same,
        format!(
            "3 runs (1, 1 and 3 worker threads), linkreport.csv {} bytes, {}",
            bodies[0].0.len(),
            if same { "byte-identical" } else { "differ" }
        ),
    )
}

fn main() {
    // `cargo test` forwards harness flags; `--list` must not run the suite
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let dir = tempfile::tempdir().unwrap();
    let mut results = vec![
        ("1 cost reproduction", c1_cost()),
        ("2 geometry reproduction", c2_geometry()),
        ("3 pattern oracle equivalence", c3_oracle()),
        ("4 uniform resolution", c4_uniformity()),
        ("5 selection correctness", c5_selection()),
        ("6 mmse optimality", c6_mmse()),
        ("7 analytic sinr", c7_analytic()),
    ];
    let (c8, note) = c8_ordering(dir.path());
    results.push(("8 desk-scale sum-rate ordering", c8));
    results.push(("9 determinism", c9_determinism(dir.path())));

    let mut failed = 0;
    for (name, r) in &results {
        println!(
            "{} criterion {name}: {}",
            if r.pass { "PASS" } else { "FAIL" },
            r.detail
        );
        if *name == "8 desk-scale sum-rate ordering" {
            println!("     note: {note}");
        }
        failed += usize::from(!r.pass);
    }
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
