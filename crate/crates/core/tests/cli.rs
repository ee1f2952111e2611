use std::process::Command;

use rmt_linstats::ensembles::{mgf_direct, EnsembleSpec, Statistic};
use rmt_linstats::operator::TestFunction;
use serde_json::Value;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rmt-linstats"))
}

fn run_json(args: &[&str]) -> Value {
    let out = bin().args(args).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

fn rows(v: &Value) -> &Vec<Value> {
    v["rows"].as_array().unwrap()
}

fn f(v: &Value) -> f64 {
    v.as_f64().unwrap()
}

#[test]
fn zero_lambda_gives_one() {
    for beta in ["1", "2", "4"] {
        let v = run_json(&["mgf", "--family", "laguerre", "--beta", beta, "-N", "2,4", "--lambda", "0"]);
        for r in rows(&v) {
            assert_eq!(f(&r["g_determinant"]), 1.0);
        }
    }
}

#[test]
fn gse_n2_row_matches_direct_quadrature() {
    let v = run_json(&["mgf", "--beta", "4", "-N", "2", "--lambda", "0.3,0.7"]);
    let spec = EnsembleSpec::gse(2).unwrap();
    let stat = Statistic::scaled(&spec, TestFunction::gaussian());
    for r in rows(&v) {
        let d = mgf_direct(&spec, &stat, f(&r["lambda"])).unwrap().value;
        assert!((f(&r["g_determinant"]) - d).abs() < 1e-8 * d, "{r}");
    }
}

#[test]
fn gue_n1_row_matches_one_dimensional_quadrature() {
    let lambda = 0.8;
    let v = run_json(&["mgf", "--beta", "2", "-N", "1", "--lambda", "0.8"]);
    // E exp(−λ F(√2 x)) under e^{−x²}/√π, trapezoid on [−12, 12]
    let h = 1e-3;
    let (mut num, mut den) = (0.0, 0.0);
    for i in -12_000..=12_000 {
        let x = i as f64 * h;
        let w = (-x * x).exp();
        num += w * (-lambda * (-(x * x)).exp()).exp();
        den += w;
    }
    assert!((f(&rows(&v)[0]["g_determinant"]) - num / den).abs() < 1e-10);
}

#[test]
fn zero_statistic_meanvar_is_zero() {
    let v = run_json(&["meanvar", "--beta", "1", "-N", "4,6", "--amplitude", "0"]);
    for r in rows(&v) {
        for key in ["mean", "variance"] {
            assert_eq!(f(&r["asymptotic"][key]), 0.0);
            assert_eq!(f(&r["finite"][key]), 0.0);
        }
    }
}

#[test]
fn leading_columns_follow_unitary_values() {
    let goe = run_json(&["meanvar", "--beta", "1", "-N", "10"]);
    let gue = run_json(&["meanvar", "--beta", "2", "-N", "10"]);
    let a = f(&rows(&goe)[0]["asymptotic"]["leading_variance"]);
    let b = f(&rows(&gue)[0]["asymptotic"]["variance"]);
    assert!((a - 2.0 * b).abs() <= 1e-15 * a);
    let lse = run_json(&["meanvar", "--family", "laguerre", "--beta", "4", "--alpha", "2.5", "-N", "10"]);
    let lue = run_json(&["meanvar", "--family", "laguerre", "--beta", "2", "--alpha", "1.5", "-N", "10"]);
    let a = f(&rows(&lse)[0]["asymptotic"]["mean_terms"]["half LUE(alpha-1) mean"]);
    let b = f(&rows(&lue)[0]["asymptotic"]["mean"]);
    assert!((a - 0.5 * b).abs() <= 1e-15 * b);
}

#[test]
fn output_is_reproducible_and_embeds_config() {
    let args = ["meanvar", "--beta", "4", "-N", "6", "--samples", "2000", "--seed", "7", "--format", "csv"];
    let a = bin().args(args).output().unwrap();
    let b = bin().env("RMT_LINSTATS_THREADS", "1").args(args).output().unwrap();
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let text = String::from_utf8(a.stdout).unwrap();
    assert!(text.starts_with(&format!("# rmt-linstats {}", env!("CARGO_PKG_VERSION"))));
    assert!(text.contains("\"seed\":7"));
}

#[test]
fn flags_override_config_file() {
    let dir = std::env::temp_dir().join(format!("rmt-linstats-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("run.toml");
    std::fs::write(&cfg, "family = \"laguerre\"\nbeta = 4\nn = [2, 4]\nalpha = 2.0\nlambda = 0.25\n").unwrap();
    let v = run_json(&["mgf", "--config", cfg.to_str().unwrap(), "-N", "3"]);
    assert_eq!(v["config"]["family"], "laguerre");
    assert_eq!(v["config"]["n"], serde_json::json!([3]));
    assert_eq!(f(&v["config"]["lambda"][0]), 0.25);
    let out = dir.join("out.json");
    let st = bin().args(["mgf", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]).status().unwrap();
    assert!(st.success());
    let v: Value = serde_json::from_slice(&std::fs::read(&out).unwrap()).unwrap();
    assert_eq!(rows(&v).len(), 2);
    std::fs::write(&cfg, "famly = \"laguerre\"\n").unwrap();
    assert_eq!(bin().args(["mgf", "--config", cfg.to_str().unwrap()]).status().unwrap().code(), Some(2));
    std::fs::remove_dir_all(&dir).ok();
}

#[test]
fn validation_failures_exit_2() {
    for args in [
        vec!["mgf", "--beta", "1", "-N", "3"],
        vec!["mgf", "--beta", "3"],
        vec!["meanvar", "--family", "laguerre", "--beta", "4", "--alpha", "0"],
        vec!["mgf", "--format", "xml"],
        vec!["kernel", "--xmin", "2", "--xmax", "1"],
    ] {
        let st = bin().args(&args).output().unwrap();
        assert_eq!(st.status.code(), Some(2), "{args:?}: {}", String::from_utf8_lossy(&st.stderr));
    }
    let st = bin().env("RMT_LINSTATS_THREADS", "0").arg("verify").output().unwrap();
    assert_eq!(st.status.code(), Some(2));
}

#[test]
fn verify_all_passes() {
    let v = run_json(&["verify", "all"]);
    assert_eq!(v["passed"], Value::Bool(true));
    let names: Vec<&str> = rows(&v).iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert!(names.iter().any(|n| n.contains("1/(2n+1)!")));
    assert!(names.iter().any(|n| n.contains("1/pi")));
    assert!(names.iter().any(|n| n.contains("det(I+AB)")));
}

#[test]
fn kernel_and_sample_outputs() {
    let v = run_json(&["kernel", "--beta", "4", "-N", "100", "--points", "5"]);
    assert_eq!(rows(&v).len(), 25);
    for r in rows(&v) {
        assert!(f(&r["difference"]).abs() < 0.05);
    }
    let out = bin().args(["sample", "--family", "laguerre", "-N", "3", "--samples", "4", "--format", "csv"]).output().unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    let data: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(data[0], "x1,x2,x3");
    assert_eq!(data.len(), 5);
}
