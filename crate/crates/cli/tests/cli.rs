use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde_json::Value;
use sha2::{Digest, Sha256};

fn fixture() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/prices_10x120.csv")
}

fn fcix(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fcix"))
        .args(args)
        .env_remove("FCIX_WORKERS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn write_series(path: &Path, values: &[f64]) {
    let mut text = String::from("date,value\n");
    for (t, v) in values.iter().enumerate() {
        text.push_str(&format!("d{t:05},{v}\n"));
    }
    std::fs::write(path, text).unwrap();
}

fn normals(seed: u64, n: usize) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n).map(|_| StandardNormal.sample(&mut rng)).collect()
}

#[test]
fn fixture_run_writes_a_complete_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = fcix(&["fcix", "-i", fixture().to_str().unwrap(), "-o", out]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let daily = std::fs::read_to_string(dir.path().join("fcix_daily.csv")).unwrap();
    assert_eq!(daily.lines().count(), 1 + 119);

    let manifest = read_json(&dir.path().join("manifest.json"));
    let listed: Vec<&str> = manifest["artifacts"]
        .as_array()
        .unwrap()
        .iter()
        .map(|a| a["path"].as_str().unwrap())
        .collect();
    let mut on_disk: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    let mut sorted = listed.clone();
    sorted.sort();
    sorted.dedup();
    assert_eq!(sorted.len(), listed.len());
    assert_eq!(sorted, on_disk);
    for a in manifest["artifacts"].as_array().unwrap() {
        let bytes = std::fs::read(dir.path().join(a["path"].as_str().unwrap())).unwrap();
        assert_eq!(a["sha256"].as_str().unwrap(), format!("{:x}", Sha256::digest(&bytes)));
    }
    assert_eq!(manifest["config"]["lag"], 1);
}

#[test]
fn missing_input_names_the_path() {
    let dir = tempfile::tempdir().unwrap();
    let o = fcix(&["fcix", "-i", "/no/such/prices.csv", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("/no/such/prices.csv"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&fcix(&["fcix", "--lagg", "2"])), 1);
    assert_eq!(code(&fcix(&["bogus"])), 1);
    assert_eq!(code(&fcix(&["fcix", "--lag", "0", "-i", "x.csv"])), 1);
    let o = fcix(&["fcix", "-o", "/tmp/unused"]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("input"));
    assert_eq!(code(&fcix(&["--help"])), 0);
}

#[test]
fn worker_variable_is_validated() {
    let o = Command::new(env!("CARGO_BIN_EXE_fcix"))
        .args(["verify"])
        .env("FCIX_WORKERS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    let o = Command::new(env!("CARGO_BIN_EXE_fcix"))
        .args(["verify"])
        .env("FCIX_WORKERS", "2")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}

#[test]
fn config_file_sits_between_flags_and_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.toml");
    std::fs::write(&cfg, format!("input = {:?}\nlag = 2\naggregation = \"quarterly\"\n", fixture())).unwrap();
    let a = dir.path().join("a");
    let o = fcix(&["fcix", "-c", cfg.to_str().unwrap(), "-o", a.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let run = read_json(&a.join("run.json"));
    assert_eq!(run["lag"], 2);
    assert_eq!(run["aggregation"], "quarterly");
    assert!(a.join("fcix_quarterly.csv").exists());

    let b = dir.path().join("b");
    let o = fcix(&["fcix", "-c", cfg.to_str().unwrap(), "--lag", "3", "-o", b.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let run = read_json(&b.join("run.json"));
    assert_eq!(run["lag"], 3);
    assert_eq!(run["horizon"], 117);

    std::fs::write(&cfg, "lag = 1\nnot_a_key = 3\n").unwrap();
    assert_eq!(code(&fcix(&["fcix", "-c", cfg.to_str().unwrap()])), 1);
}

#[test]
fn verify_passes_and_negative_control_fails() {
    let o = fcix(&["verify"]);
    assert_eq!(code(&o), 0);
    let table = String::from_utf8_lossy(&o.stdout).to_string();
    assert!(table.contains("condition_number[5.225,3.17,0.001]"));
    assert!(!table.contains("FAIL"));

    let o = fcix(&["verify", "--perturb", "--json"]);
    assert_eq!(code(&o), 3);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let check = |name: &str| {
        report["checks"]
            .as_array()
            .unwrap()
            .iter()
            .find(|c| c["name"] == name)
            .unwrap()["passed"]
            .as_bool()
            .unwrap()
    };
    assert!(!check("power_identity"));
    assert!(check("condition_number[5.225,3.17,0.001]"));
}

#[test]
fn analyze_finds_a_regime_shift() {
    let dir = tempfile::tempdir().unwrap();
    let e = normals(1, 150);
    let x: Vec<f64> = (0..150).map(|t| if t < 90 { 0.0 } else { 2.5 } + 0.4 * e[t]).collect();
    let path = dir.path().join("x.csv");
    write_series(&path, &x);
    let out = dir.path().join("out");
    let o = fcix(&[
        "analyze",
        path.to_str().unwrap(),
        "--only",
        "segment,apen",
        "--segment-k-star",
        "1",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_json(&out.join("analysis.json"));
    let cp = summary["per_series"][0]["changepoints"][0].as_u64().unwrap();
    assert!(cp.abs_diff(90) <= 2, "{cp}");
    assert!(out.join("segments_z.csv").exists());
}

#[test]
fn analyze_recovers_transfer_direction() {
    let dir = tempfile::tempdir().unwrap();
    let v = normals(2, 800);
    let mut z = vec![0.0; 800];
    z[1..].copy_from_slice(&v[..799]);
    let (zp, vp) = (dir.path().join("z.csv"), dir.path().join("v.csv"));
    write_series(&zp, &z);
    write_series(&vp, &v);
    let out = dir.path().join("out");
    let o = fcix(&[
        "analyze",
        zp.to_str().unwrap(),
        vp.to_str().unwrap(),
        "--only",
        "entropy,xcf",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_json(&out.join("analysis.json"));
    assert!(s["transfer_v_to_z"].as_f64().unwrap() > s["transfer_z_to_v"].as_f64().unwrap());
    assert!(s["p_value_v_to_z"].as_f64().unwrap() <= 0.01);
    let xcf = std::fs::read_to_string(out.join("xcf.csv")).unwrap();
    let peak = xcf
        .lines()
        .skip(1)
        .map(|l| {
            let (lag, r) = l.split_once(',').unwrap();
            (lag.parse::<i64>().unwrap(), r.parse::<f64>().unwrap())
        })
        .max_by(|a, b| a.1.partial_cmp(&b.1).unwrap())
        .unwrap();
    assert_eq!(peak.0, -1);
}

#[test]
fn analyze_isolates_failures_and_requires_pairs() {
    let dir = tempfile::tempdir().unwrap();
    let x = normals(3, 60);
    let path = dir.path().join("x.csv");
    write_series(&path, &x);
    let o = fcix(&["analyze", path.to_str().unwrap(), "--only", "var", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("var needs two aligned series"));

    let short = dir.path().join("short.csv");
    write_series(&short, &x[..59]);
    let o = fcix(&["analyze", path.to_str().unwrap(), short.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("misaligned"));

    // Whittle needs a longer series than segmentation and ApEn; the others must still be written.
    let out = dir.path().join("out");
    let o = fcix(&["analyze", path.to_str().unwrap(), "-o", out.to_str().unwrap()]);
    assert_ne!(code(&o), 0);
    let s = read_json(&out.join("analysis.json"));
    assert_eq!(s["failures"][0]["analysis"], "whittle[z]");
    assert!(s["per_series"][0]["apen"].is_number());
    assert!(out.join("segments_z.csv").exists());
    assert!(out.join("manifest.json").exists());
}

#[test]
fn dynamics_defaults_to_published_parameters() {
    let dir = tempfile::tempdir().unwrap();
    let o = fcix(&["dynamics", "-o", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let report = read_json(&dir.path().join("dynamics.json"));
    let interior = &report["critical_points"][0];
    assert!((interior["v"].as_f64().unwrap() - 75.954).abs() < 1e-3);
    assert_eq!(interior["classification"], "source");
    let paths = report["paths"].as_array().unwrap();
    assert!(paths[0]["file"].is_string());
    assert!(paths[2]["blowup_step"].is_number() || paths[2]["file"].is_string());

    let o = fcix(&["dynamics", "--alpha", "1", "--beta", "0", "--gamma", "1", "--delta", "1", "--theta", "0"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn lag_report_covers_requested_lags() {
    let dir = tempfile::tempdir().unwrap();
    let o = fcix(&[
        "lag-report",
        "-i",
        fixture().to_str().unwrap(),
        "--lags",
        "1,2,4",
        "-o",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let r = read_json(&dir.path().join("lag_report.json"));
    assert_eq!(r["points"].as_array().unwrap().len(), 3);
    assert!(r["epsilon_exponent"]["slope"].is_number());
}
