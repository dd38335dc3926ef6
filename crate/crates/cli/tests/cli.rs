use std::path::Path;
use std::process::Command;

use omnicell::geometry::wrap_angle;
use omnicell_cli::{cmd_cost, cmd_geometry, cmd_pattern, cmd_sumrate, Config};
use serde_json::Value;
use sha2::{Digest, Sha256};

fn config(json: &str, out: &Path) -> Config {
    let mut cfg = Config::from_json(json).unwrap();
    cfg.run.out_dir = out.to_path_buf();
    cfg
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

const SMALL: &str = r#"{
  "scenario": {"f_c": 28e9, "num_users": 3, "num_rf_chains": 3, "num_clusters": 3, "rays_per_cluster": 4},
  "raa": {"m": 8}, "ula": {"m": 8}, "uca": {"n": 12},
  "run": {"num_seeds": 4, "snr_db": {"lo": -10, "hi": 10, "step": 10}}
}"#;

#[test]
fn missing_carrier_fails_with_field_name() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"scenario": {"num_users": 2}}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_omnicell"))
        .args(["geometry", "--config"])
        .arg(&path)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("f_c"), "{err}");
}

#[test]
fn size_guard_reaches_the_exit_status() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, SMALL).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_omnicell"))
        .args(["sumrate", "--strategy", "exhaustive", "--snr", "-5:0:5", "--out"])
        .arg(dir.path().join("o"))
        .arg("--config")
        .arg(&path)
        .output()
        .unwrap();
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("exhaustive") && err.contains("16 branches"), "{err}");
}

#[test]
fn binary_runs_cost_with_overrides() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cfg.json");
    std::fs::write(&path, r#"{"scenario": {"f_c": 28e9}}"#).unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_omnicell"))
        .args(["cost", "--seed", "5", "--config"])
        .arg(&path)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(
        text.contains("28891.74") && text.contains("76801.92") && text.contains("37.62%"),
        "{text}"
    );
    assert_eq!(read_json(&dir.path().join("manifest.json"))["seed"], 5);
}

#[test]
fn manifest_lists_every_output_with_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(SMALL, dir.path());
    let out = cmd_sumrate(&cfg).unwrap();
    let names: Vec<_> = out.manifest.outputs.iter().map(|o| o.path.as_str()).collect();
    assert_eq!(names, ["linkreport.csv", "aggregate.json"]);
    for o in &out.manifest.outputs {
        let body = std::fs::read(dir.path().join(&o.path)).unwrap();
        assert_eq!(hex::encode(Sha256::digest(&body)), o.sha256);
        assert_eq!(body.len(), o.bytes);
    }
    let m = read_json(&dir.path().join("manifest.json"));
    assert_eq!(m["command"], "sumrate");
    assert_eq!(m["outputs"].as_array().unwrap().len(), 2);
}

#[test]
fn config_snapshot_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = config(SMALL, &dir.path().join("a"));
    cmd_sumrate(&first).unwrap();
    let snapshot = read_json(&dir.path().join("a/manifest.json"))["config"].to_string();
    let mut again = Config::from_json(&snapshot).unwrap();
    assert_eq!(again, first);
    again.run.out_dir = dir.path().join("b");
    cmd_sumrate(&again).unwrap();
    for f in ["linkreport.csv", "aggregate.json"] {
        assert_eq!(
            std::fs::read(dir.path().join("a").join(f)).unwrap(),
            std::fs::read(dir.path().join("b").join(f)).unwrap()
        );
    }
}

#[test]
fn linkreport_layout() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(SMALL, dir.path());
    cmd_sumrate(&cfg).unwrap();
    let text = std::fs::read_to_string(dir.path().join("linkreport.csv")).unwrap();
    assert!(text.starts_with("architecture,seed,snr_db,user,sinr_db,sum_rate_bpshz,strategy\n"));
    let rows = read_csv(&dir.path().join("linkreport.csv"));
    // seeds x SNR points x architectures x users
    assert_eq!(rows.len(), 4 * 3 * 3 * 3);
    assert!(rows.iter().all(|r| r.len() == 7 && r[6] == "greedy"));
    // per-user rates add up to the reported sum rate
    for chunk in rows.chunks(3) {
        let total: f64 = chunk
            .iter()
            .map(|r| (1.0 + 10f64.powf(r[4].parse::<f64>().unwrap() / 10.0)).log2())
            .sum();
        let reported: f64 = chunk[0][5].parse().unwrap();
        assert!(
            (total - reported).abs() < 1e-9 * reported.max(1.0),
            "{total} vs {reported}"
        );
    }
    let agg = read_json(&dir.path().join("aggregate.json"));
    let points = agg["points"].as_array().unwrap();
    assert_eq!(points.len(), 9);
    assert!(points.iter().all(|p| p["std_sum_rate"].as_f64().unwrap() >= 0.0));
}

#[test]
fn single_user_rate_grows_with_snr() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        r#"{"scenario": {"f_c": 28e9, "num_users": 1, "num_rf_chains": 2, "num_clusters": 4, "rays_per_cluster": 5},
            "raa": {"m": 8}, "ula": {"m": 8}, "uca": {"n": 12},
            "run": {"num_seeds": 5, "snr_db": {"lo": -10, "hi": 10, "step": 2}}}"#,
        dir.path(),
    );
    cmd_sumrate(&cfg).unwrap();
    let agg = read_json(&dir.path().join("aggregate.json"));
    for arch in ["raa", "ula", "uca"] {
        let means: Vec<f64> = agg["points"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|p| p["architecture"] == arch)
            .map(|p| p["mean_sum_rate"].as_f64().unwrap())
            .collect();
        assert_eq!(means.len(), 11);
        assert!(means.windows(2).all(|w| w[1] > w[0]), "{arch}: {means:?}");
    }
}

#[test]
fn geometry_summaries() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        r#"{"scenario": {"f_c": 47.2e9}, "raa": {"m": 4, "sizing": "approximate"}}"#,
        dir.path(),
    );
    cmd_geometry(&cfg).unwrap();
    let s = read_json(&dir.path().join("geometry_summary.json"));
    assert!((s["raa"]["central_distance_mm"].as_f64().unwrap() - 6.135).abs() < 0.01);
    assert!((s["raa"]["ray_spacing_deg"].as_f64().unwrap() - 30.0).abs() < 1e-9);
    let rows = read_csv(&dir.path().join("geometry_raa.csv"));
    assert_eq!(rows.len(), 11 * 4);

    let cfg = config(r#"{"scenario": {"f_c": 28e9}}"#, dir.path());
    cmd_geometry(&cfg).unwrap();
    let s = read_json(&dir.path().join("geometry_summary.json"));
    assert_eq!(s["raa"]["num_rays"], 201);
    assert_eq!(read_csv(&dir.path().join("geometry_uca.csv")).len(), 100);
    assert_eq!(read_csv(&dir.path().join("geometry_ula_sector2.csv")).len(), 64);
}

fn envelope(dir: &Path, arch: &str) -> Vec<(f64, f64)> {
    read_csv(&dir.join(format!("pattern_{arch}_envelope.csv")))
        .into_iter()
        .map(|r| (r[0].parse().unwrap(), r[1].parse().unwrap()))
        .collect()
}

#[test]
fn pattern_envelopes() {
    let dir = tempfile::tempdir().unwrap();
    // 1200 points put a grid angle on every multiple of 30 degrees
    let cfg = config(
        r#"{"scenario": {"f_c": 47.2e9},
            "raa": {"m": 4, "num_rays": 13, "allow_overlap": true},
            "ula": {"m": 4}, "uca": {"n": 13},
            "run": {"angle_grid": 1200}}"#,
        dir.path(),
    );
    cmd_pattern(&cfg).unwrap();
    let at = |env: &[(f64, f64)], phi: f64| {
        env.iter()
            .min_by(|a, b| {
                wrap_angle(a.0 - phi)
                    .abs()
                    .total_cmp(&wrap_angle(b.0 - phi).abs())
            })
            .unwrap()
            .1
    };
    let raa = envelope(dir.path(), "raa");
    for n in -6..=6 {
        let eta = n as f64 * std::f64::consts::PI / 6.0;
        assert!((at(&raa, eta) - 4.0).abs() < 1e-9, "ray {n}: {}", at(&raa, eta));
    }
    let ula = envelope(dir.path(), "ula");
    let third = std::f64::consts::FRAC_PI_3;
    assert!(at(&ula, third) < at(&ula, 0.0));
    assert!(at(&ula, -third) < at(&ula, 0.0));
    assert!(at(&ula, std::f64::consts::PI) < at(&ula, 2.0 * third));

    let rows = read_csv(&dir.path().join("pattern_uca.csv"));
    let peak = rows
        .iter()
        .map(|r| r[2].parse::<f64>().unwrap())
        .fold(0.0, f64::max);
    assert!(peak <= 13.0 + 1e-9 && peak > 12.9, "{peak}");
    assert_eq!(rows.len(), 1200 * 12);
}

#[test]
fn cost_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(
        r#"{"scenario": {"f_c": 28e9}, "prices": {"cost_switch": 200}}"#,
        dir.path(),
    );
    cmd_cost(&cfg).unwrap();
    let rows = read_csv(&dir.path().join("cost.csv"));
    let last = rows.last().unwrap();
    assert_eq!(last[0], "breakeven_antenna_price");
    assert!(last[3].parse::<f64>().unwrap() < 0.0);
    let text = std::fs::read_to_string(dir.path().join("cost.txt")).unwrap();
    assert!(text.contains("not cheaper"), "{text}");
    let m = read_json(&dir.path().join("manifest.json"));
    assert_eq!(m["config"]["prices"]["cost_switch"], 200.0);

    let cfg = config(
        r#"{"scenario": {"f_c": 28e9}, "raa": {"m": 4}, "ula": {"m": 64}}"#,
        dir.path(),
    );
    cmd_cost(&cfg).unwrap();
    let rows = read_csv(&dir.path().join("cost.csv"));
    assert_eq!(rows.last().unwrap()[3], "none");
}
