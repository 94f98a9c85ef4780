use std::path::Path;
use std::process::Command;

use hs_vanish_cli::commands::config_hash;
use hs_vanish_cli::config::RunConfig;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_hs-vanish"))
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let path = dir.join("run.toml");
    std::fs::write(&path, text).unwrap();
    path
}

fn read_json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_SWEEP: &str = r#"
[sweep]
orders = [0.1, 0.3]
deltas = [0.1, 0.01, 0.0]
time_nodes = 16

[divergence]
enabled = false
"#;

#[test]
fn sweep_writes_cartesian_rows_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SWEEP);
    let out = dir.path().join("out");
    let status = bin().args(["sweep", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));

    let mut reader = csv::Reader::from_path(out.join("sweep.csv")).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header.join(","),
        "n,s,delta,eps,seminorm_sq,l2_sq,len_bound,len_direct,endpoint_drift,method,wall_time_ms,status"
    );
    let rows: Vec<csv::StringRecord> = reader.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 6);
    for r in rows.iter().filter(|r| r[2].parse::<f64>().unwrap() == 0.0) {
        assert_eq!(r[4].parse::<f64>().unwrap(), 0.0);
        assert_eq!(r[6].parse::<f64>().unwrap(), 0.0);
    }

    let manifest = read_json(&out.join("sweep_manifest.json"));
    let config = manifest["config"].as_str().unwrap();
    assert_eq!(manifest["config_hash"].as_str().unwrap(), config_hash(config));
    assert_eq!(manifest["rows"].as_u64(), Some(6));
    // the snapshot reproduces the effective configuration
    let snap = RunConfig::parse(config).unwrap();
    assert_eq!(snap.sweep.orders, vec![0.1, 0.3]);
    assert_eq!(snap.out, out);
}

#[test]
fn sweep_csv_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL_SWEEP);
    let mut bytes = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("out{k}"));
        let status = bin().args(["sweep", "--workers", "1", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
        assert!(status.success());
        bytes.push(std::fs::read(out.join("sweep.csv")).unwrap());
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn config_errors_exit_two_and_name_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[verify]\norders = [0.6]\n");
    let output = bin().args(["verify", "--config"]).arg(&cfg).arg("--out").arg(dir.path()).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
    let err = String::from_utf8_lossy(&output.stderr);
    assert!(err.contains("verify.orders") && err.contains("s < 1/2"), "{err}");

    let bad = write_config(dir.path(), "[sweep]\nbogus = 1\n");
    let output = bin().args(["sweep", "--config"]).arg(&bad).output().unwrap();
    assert_eq!(output.status.code(), Some(2));

    let output = bin().args(["flow", "--tol", "-1", "--out"]).arg(dir.path()).output().unwrap();
    assert_eq!(output.status.code(), Some(2));
}

#[test]
fn empty_check_list_passes_with_empty_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[verify]\nchecks = []\n");
    let out = dir.path().join("out");
    let status = bin().args(["verify", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let report = read_json(&out.join("verify_report.json"));
    assert_eq!(report["checks"].as_array().unwrap().len(), 0);
}

#[test]
fn failing_check_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[verify]\nchecks = [\"gauss_limit_threshold\"]\n");
    let status = bin().args(["verify", "--config"]).arg(&cfg).arg("--out").arg(dir.path().join("out")).status().unwrap();
    assert_eq!(status.code(), Some(1));
}

#[test]
fn identity_flow_fixes_every_seed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[flow]\ndelta = 0.0\nladder = 3\nseeds = 11\n");
    let out = dir.path().join("out");
    let status = bin().args(["flow", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let report = read_json(&out.join("flow.json"));
    for row in report["endpoints"].as_array().unwrap() {
        assert_eq!(row["seeds"], row["images"]);
    }
    for row in report["drift"].as_array().unwrap() {
        assert_eq!(row["drift"].as_f64(), Some(0.0));
    }
}

#[test]
fn default_flow_is_monotone_with_full_ladder() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let status = bin().arg("flow").arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let report = read_json(&out.join("flow.json"));
    let endpoints = report["endpoints"].as_array().unwrap();
    assert_eq!(endpoints.len(), 8);
    assert!(endpoints.iter().all(|r| r["monotone"].as_bool() == Some(true)));
    assert_eq!(report["drift"].as_array().unwrap().len(), 8);
    assert!(report["product_form"]["rows"].as_array().unwrap().len() > 0);
    let manifest = read_json(&out.join("flow_manifest.json"));
    assert_eq!(manifest["config_hash"].as_str().unwrap(), config_hash(manifest["config"].as_str().unwrap()));
}

#[test]
fn norm_and_ft_check_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "[norm]\ndim = 2\ns = 0.25\ngrid_points = 512\n");
    let out = dir.path().join("out");
    let status = bin().args(["norm", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let report = read_json(&out.join("norm.json"));
    let closed = report["closed_form"]["seminorm_sq"].as_f64().unwrap();
    let quad = report["quadrature"]["seminorm_sq"].as_f64().unwrap();
    let grid = report["grid"]["seminorm_sq"].as_f64().unwrap();
    assert!((quad / closed - 1.0).abs() < 1e-6);
    assert!((grid / closed - 1.0).abs() < 0.02);

    let status = bin().arg("ft-check").arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    assert_eq!(read_json(&out.join("ft_check.json"))["passed"].as_bool(), Some(true));
}

#[test]
fn seed_flag_overrides_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "seed = 1\n[verify]\nchecks = [\"bessel_antiderivative\"]\n");
    let out = dir.path().join("out");
    let status = bin().args(["verify", "--seed", "99", "--config"]).arg(&cfg).arg("--out").arg(&out).status().unwrap();
    assert!(status.success());
    let manifest = read_json(&out.join("verify_manifest.json"));
    assert_eq!(RunConfig::parse(manifest["config"].as_str().unwrap()).unwrap().seed, 99);
}
