//! End-to-end tests of the kdtli binary: exit codes, output formats,
//! determinism and the designed failure modes.

use std::path::Path;
use std::process::{Command, Output};

fn kdtli(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kdtli"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, extra: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    let base = r#"
seed = 99

[mc]
samples = 120000
ratios = [0.5, 10.0]
temperature_pair_k = [300.0, 3000.0]
ks_threshold = 0.005

[qdist]
ratios = [10.0, "linear"]
points = 201

[sweep]
variable = "laser_power"
values = [0.0, 5.0, 10.0]
"#;
    std::fs::write(&path, format!("{base}\n{extra}")).unwrap();
    path
}

#[test]
fn qdist_output_is_sane_and_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out1 = dir.path().join("q1.csv");
    let out2 = dir.path().join("q2.csv");
    for out in [&out1, &out2] {
        let r = kdtli(
            &["qdist", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
            dir.path(),
        );
        assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    }
    // Byte-identical reruns.
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());

    let text = std::fs::read_to_string(&out1).unwrap();
    assert!(text.starts_with("# mass_kg="), "audit header present");
    assert!(!text.contains('\r'), "LF line endings");
    let mut per_ratio: std::collections::BTreeMap<String, Vec<(f64, f64)>> = Default::default();
    for line in text.lines().skip(2) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 3);
        let q: f64 = cols[1].parse().unwrap();
        let p: f64 = cols[2].parse().unwrap();
        assert!((0.0..=1.0).contains(&q));
        assert!(p >= 0.0 || p.is_infinite());
        per_ratio.entry(cols[0].into()).or_default().push((q, p));
    }
    assert_eq!(per_ratio.len(), 2);
    for rows in per_ratio.values() {
        assert!(rows.windows(2).all(|w| w[0].0 < w[1].0), "monotone in q");
    }
    // The divergence point is annotated with an inf row for finite ratios.
    assert!(per_ratio["10"].iter().any(|&(q, p)| (q - 2.0 / 3.0).abs() < 1e-12 && p.is_infinite()));
    // Linear-rotor column satisfies p_th(q) * sqrt(2q - 1) = 1 above 0.55.
    for &(q, p) in per_ratio["linear"].iter().filter(|(q, _)| *q > 0.55) {
        let resid = (p * (2.0 * q - 1.0).sqrt() - 1.0).abs();
        assert!(resid < 1e-3, "q = {q}: residual {resid}");
    }
}

#[test]
fn mc_validate_passes_and_reports() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("mc.json");
    let r = kdtli(
        &["mc-validate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["samples"], 120000);
    assert_eq!(report["seed"], 99);
    assert!(report["temperature_pair"]["ks"].as_f64().unwrap() < 0.005);
    for ratio in report["ratios"].as_array().unwrap() {
        assert!(ratio["ks_vs_closed_form"].as_f64().unwrap() < 0.005);
    }
}

#[test]
fn mc_validate_small_sample_needs_advisory_flag() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    // Too few samples without --advisory: config error (exit 2).
    let r = kdtli(
        &["mc-validate", "--config", cfg.to_str().unwrap(), "--samples", "1000"],
        dir.path(),
    );
    assert_eq!(r.status.code(), Some(2));
    // With --advisory it runs, reports larger KS, and still exits 0.
    let out = dir.path().join("mc_small.json");
    let r = kdtli(
        &[
            "mc-validate",
            "--config",
            cfg.to_str().unwrap(),
            "--samples",
            "1000",
            "--advisory",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["advisory"], true);
    let ks = report["ratios"][0]["ks_vs_closed_form"].as_f64().unwrap();
    assert!(ks > 0.005, "1e3 samples fluctuate well above the 1e6 threshold: {ks}");
}

#[test]
fn visibility_sweep_columns_and_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "[interferometer]\nseparation_ratio = 1.0\nopening_fraction = 0.42\ntemperature_k = 600.0\n",
    );
    let out = dir.path().join("vis.csv");
    let r = kdtli(
        &[
            "visibility",
            "--config",
            cfg.to_str().unwrap(),
            "--mode",
            "integral",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# "));
    assert_eq!(
        lines.next().unwrap(),
        "laser_power,quantum_integral_signed,quantum_integral_abs,diagnostic"
    );
    // At L/L_T = 1 every quantum visibility vanishes (Talbot node).
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        let v: f64 = cols[1].parse().unwrap();
        assert!(v.abs() < 1e-20, "{line}");
    }
}

#[test]
fn oracle_compare_small_grid_passes() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[oracle]
temperature_k = 0.4
phi0_values = [0.0, 3.0]
anisotropies = [0.0, 0.5]
tail_mass = 1e-6
n_max = 48
n_sources = 24
n_bloch = 12
tol_point = 1e-3
tol_thermal = 5e-3
"#,
    );
    let out = dir.path().join("oracle.json");
    let r = kdtli(
        &["oracle-compare", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()],
        dir.path(),
    );
    assert!(r.status.success(), "{}", String::from_utf8_lossy(&r.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(report["pass"], true);
    assert!(report["max_deviation_point_particle"].as_f64().unwrap() < 1e-3);
    assert!(report["max_deviation_thermal"].as_f64().unwrap() < 5e-3);
}

#[test]
fn oracle_compare_truncated_run_fails_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"
[oracle]
temperature_k = 0.4
phi0_values = [6.0]
anisotropies = [0.5]
tail_mass = 1e-6
n_max = 4
n_sources = 24
n_bloch = 12
tol_point = 1e-3
tol_thermal = 5e-3
"#,
    );
    let r = kdtli(&["oracle-compare", "--config", cfg.to_str().unwrap()], dir.path());
    assert_eq!(r.status.code(), Some(1), "validation failure exit code");
    let stderr = String::from_utf8_lossy(&r.stderr);
    assert!(stderr.contains("truncation"), "diagnostic names the cause: {stderr}");
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "[molecule]\nnot_a_field = 3\n").unwrap();
    let r = kdtli(&["qdist", "--config", bad.to_str().unwrap()], dir.path());
    assert_eq!(r.status.code(), Some(2));
    let r = kdtli(&["qdist", "--config", "/nonexistent/x.toml"], dir.path());
    assert_eq!(r.status.code(), Some(2));
}

#[test]
fn seed_flag_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "");
    let out = dir.path().join("q.csv");
    let r = kdtli(
        &[
            "qdist",
            "--config",
            cfg.to_str().unwrap(),
            "--seed",
            "777",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(r.status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().next().unwrap().contains("seed=777"));
}
