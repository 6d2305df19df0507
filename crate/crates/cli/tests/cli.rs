use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn pspin(dir: &Path, config: &str, args: &[&str]) -> Output {
    let cfg = dir.join("config.in.json");
    std::fs::write(&cfg, config).unwrap();
    Command::new(env!("CARGO_BIN_EXE_pspin"))
        .args(args)
        .arg("--config")
        .arg(&cfg)
        .output()
        .expect("binary runs")
}

fn out_dir(root: &Path, name: &str) -> PathBuf {
    root.join(name)
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

/// `E f(z)` for standard normal `z` by composite Simpson on `[−12, 12]`.
fn gaussian_simpson(f: impl Fn(f64) -> f64) -> f64 {
    let n = 24_000;
    let h = 24.0 / n as f64;
    let mut acc = 0.0;
    for i in 0..=n {
        let z = -12.0 + i as f64 * h;
        let w = if i == 0 || i == n {
            1.0
        } else if i % 2 == 1 {
            4.0
        } else {
            2.0
        };
        acc += w * f(z) * (-0.5 * z * z).exp();
    }
    acc * h / 3.0 / (2.0 * std::f64::consts::PI).sqrt()
}

const DEGENERATE: &str =
    r#"{"model": {"beta": [0.5], "h": 0.2}, "experiment": {"sizes": [8, 16], "replicas": 300}}"#;

#[test]
fn constants_on_degenerate_spec_match_quadrature() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(tmp.path(), "c");
    let o = pspin(
        tmp.path(),
        DEGENERATE,
        &["constants", "--out", out.to_str().unwrap(), "--check"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let nu = json(&out.join("constants.json"))["result"]["nu"]
        .as_f64()
        .unwrap();
    let l = |z: f64| (2.0 * (0.2 + 0.5 * z).cosh()).ln();
    let m1 = gaussian_simpson(l);
    let oracle = gaussian_simpson(|z| (l(z) - m1).powi(2));
    assert!((nu - oracle).abs() < 1e-6, "{nu} vs {oracle}");

    let csv = std::fs::read_to_string(out.join("u_curve.csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines
        .next()
        .unwrap()
        .starts_with("# pspin v0.1.0 seed=1 config_sha256="));
    assert_eq!(lines.next().unwrap(), "t,u_t,xi_u_t");
    assert_eq!(lines.count(), 32);
    let resolved = json(&out.join("config.json"));
    assert_eq!(resolved["model"]["h"].as_f64(), Some(0.2));
    assert_eq!(resolved["threads"], "auto");
}

#[test]
fn clt_refuses_odd_spec() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(tmp.path(), "o");
    let o = pspin(
        tmp.path(),
        r#"{"model": {"beta": [0, 1, 0.5], "h": 0.5}}"#,
        &["clt", "--out", out.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("scope"), "{}", stderr(&o));
    let o = pspin(
        tmp.path(),
        r#"{"model": {"beta": [0, 1], "h": 0}}"#,
        &["clt", "--out", out.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(1));
    let o = pspin(
        tmp.path(),
        r#"{"model": {"beta": [0, 1, 0.5], "h": 0.5}}"#,
        &["guerra", "--out", out.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn rerun_is_byte_identical_across_threads() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = r#"{"experiment": {"sizes": [6, 8], "replicas": 200, "center": 0.15}, "seed": 77}"#;
    let mut dirs = Vec::new();
    for (name, threads) in [("a", "1"), ("b", "3")] {
        let out = out_dir(tmp.path(), name);
        let o = pspin(
            tmp.path(),
            cfg,
            &[
                "chaos",
                "--out",
                out.to_str().unwrap(),
                "--threads",
                threads,
            ],
        );
        assert!(o.status.success(), "{}", stderr(&o));
        dirs.push(out);
    }
    for f in ["chaos.csv", "chaos_hist.csv", "chaos.json"] {
        let a = std::fs::read(dirs[0].join(f)).unwrap();
        let b = std::fs::read(dirs[1].join(f)).unwrap();
        assert_eq!(a, b, "{f}");
    }
    let other = out_dir(tmp.path(), "c");
    let o = pspin(
        tmp.path(),
        cfg,
        &["chaos", "--out", other.to_str().unwrap(), "--seed", "78"],
    );
    assert!(o.status.success());
    assert_ne!(
        std::fs::read(dirs[0].join("chaos.csv")).unwrap(),
        std::fs::read(other.join("chaos.csv")).unwrap()
    );
}

#[test]
fn invalid_configs_exit_one() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(tmp.path(), "x");
    let out = out.to_str().unwrap();
    for cfg in [
        r#"{"bogus": 1}"#,
        r#"{"model": {"beta": [0, -1]}}"#,
        r#"{"grid": {"L": 10, "delta": 0.3}}"#,
        r#"{"format": "xml"}"#,
        "not json",
    ] {
        let o = pspin(tmp.path(), cfg, &["variance", "--out", out]);
        assert_eq!(o.status.code(), Some(1), "{cfg}: {}", stderr(&o));
    }
    let o = pspin(tmp.path(), "{}", &["parisi", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
    let o = pspin(tmp.path(), "{}", &["lemma2", "--out", out]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn numerical_failure_exits_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(tmp.path(), "n");
    let o = pspin(
        tmp.path(),
        r#"{"model": {"beta": [0, 20]}, "measure": {"atoms": [0], "cdf": [1, 1]}, "grid": {"gh_nodes": 400}}"#,
        &["parisi", "--out", out.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn failed_check_exits_three_only_with_flag() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(tmp.path(), "v");
    let cfg = r#"{"model": {"beta": [0.5], "h": 0.2}, "experiment": {"sizes": [8], "replicas": 300, "nu": 100}}"#;
    let o = pspin(
        tmp.path(),
        cfg,
        &["variance", "--out", out.to_str().unwrap(), "--check"],
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("FAIL"));
    let o = pspin(
        tmp.path(),
        cfg,
        &["variance", "--out", out.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn parisi_fixed_measure_and_json_format() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(tmp.path(), "p");
    let cfg = r#"{"measure": {"atoms": [0.4], "cdf": [0, 1]}, "grid": {"L": 8, "delta": 0.0625}, "format": "json"}"#;
    let o = pspin(
        tmp.path(),
        cfg,
        &["parisi", "--out", out.to_str().unwrap(), "--svg", "--check"],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let phi = json(&out.join("phi.json"));
    assert_eq!(
        phi["columns"],
        serde_json::json!(["q_layer", "x", "phi", "dphi"])
    );
    assert_eq!(phi["run"]["seed"], 1);
    // layers at q = 0, 0.4, 1 on 257 nodes
    assert_eq!(phi["rows"].as_array().unwrap().len(), 3 * 257);
    let svg = std::fs::read_to_string(out.join("phi.svg")).unwrap();
    assert!(svg.starts_with("<!-- pspin v0.1.0"));
    assert_eq!(svg.matches("<polyline").count(), 2);
    assert!(!out.join("phi.csv").exists());
}

#[test]
fn lemma2_writes_stable_schema() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(tmp.path(), "l");
    let cfg = r#"{"experiment": {"sizes": [2], "replicas": 2000, "t_nodes": 6}}"#;
    let o = pspin(tmp.path(), cfg, &["lemma2", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("lemma2.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[1], "t,mean_xiR,se");
    assert_eq!(lines.len(), 2 + 6);
    assert!(lines[2].starts_with("0,"));
    assert!(lines[7].starts_with("1,"));
}

#[test]
fn clt_writes_samples() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_dir(tmp.path(), "w");
    let o = pspin(
        tmp.path(),
        DEGENERATE,
        &["clt", "--out", out.to_str().unwrap()],
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = std::fs::read_to_string(out.join("clt.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[1], "w");
    let w: Vec<f64> = lines[2..].iter().map(|l| l.parse().unwrap()).collect();
    assert_eq!(w.len(), 300);
    assert!(w.iter().sum::<f64>().abs() < 1e-10);
    let summary = json(&out.join("clt.json"));
    assert_eq!(summary["result"]["ks"].as_array().unwrap().len(), 2);
}
