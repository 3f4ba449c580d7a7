use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn delaylight(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delaylight"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn summary(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("summary.json")).unwrap()).unwrap()
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config_in.json");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const DELAY_CONFIG: &str = r#"{
    "scenario": "delay",
    "medium": {"d": 0.5, "gamma_1p": "300 MHz", "gamma": "333.3333333333333 /s_angular", "eta_act": 0.05},
    "drive": {"kappa": "3.14e11 rad2/s2/mW", "powers": ["0.01 mW", "0.1 mW", "1 mW"]},
    "delay_method": "all"
}"#;

#[test]
fn fig3a_signal_delay_approaches_inverse_gamma() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fig3a");
    let o = delaylight(&["reproduce", "fig3a", "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("delays.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next().unwrap(), "P_c_or_Delta,tau_p_s,tau_s_s,method");
    let first: Vec<&str> = lines.next().unwrap().split(',').collect();
    let tau_s: f64 = first[2].parse().unwrap();
    assert_eq!(first[3], "analytic");
    assert!((tau_s / 3e-3 - 1.0).abs() < 0.01, "tau_s = {tau_s}");
    assert!(out.join("config.json").exists());
    assert!(!out.join("_INCOMPLETE").exists());
}

#[test]
fn fig4_recovers_diffusion() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("fig4");
    let o = delaylight(&["reproduce", "fig4", "--out", out.to_str().unwrap(), "--threads", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = summary(&out);
    let d = s["results"]["fitted_diffusion_mm2_s"].as_f64().unwrap();
    assert!((d / 1050.0 - 1.0).abs() < 0.02, "D = {d}");
    assert_eq!(s["files"][0]["name"], "widths.csv");
    assert_eq!(s["files"][0]["columns"], serde_json::json!(["tau_s_s", "w2_mm2"]));
}

#[test]
fn identical_config_gives_identical_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), DELAY_CONFIG);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(delaylight(&["--config", &cfg, "--out", a.to_str().unwrap(), "--threads", "1"]).status.success());
    assert!(delaylight(&["--config", &cfg, "--out", b.to_str().unwrap(), "--threads", "4"]).status.success());
    let x = fs::read(a.join("delays.csv")).unwrap();
    assert_eq!(x, fs::read(b.join("delays.csv")).unwrap());
    assert_eq!(String::from_utf8(x).unwrap().lines().count(), 1 + 3 * 3);
}

#[test]
fn config_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let cfg = write_config(tmp.path(), &DELAY_CONFIG.replace(r#""0.01 mW", "0.1 mW", "1 mW""#, ""));
    let o = delaylight(&["--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("drive list is empty"));
    assert!(!out.exists());

    let cfg = write_config(tmp.path(), &DELAY_CONFIG.replace("\"d\": 0.5", "\"d\": 0.5, \"colour\": 1"));
    assert_eq!(delaylight(&["--config", &cfg]).status.code(), Some(2));

    let cfg = write_config(tmp.path(), &DELAY_CONFIG.replace("\"d\": 0.5", "\"d\": -0.5"));
    let o = delaylight(&["--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("medium"));

    let cfg = write_config(tmp.path(), &DELAY_CONFIG.replace("300 MHz", "300"));
    let o = delaylight(&["--config", &cfg]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("medium.gamma_1p"));

    assert_eq!(delaylight(&["delay"]).status.code(), Some(2));
    assert_eq!(delaylight(&["--scenario", "fig9"]).status.code(), Some(2));
}

#[test]
fn numerical_failure_leaves_marker() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("o");
    let body = DELAY_CONFIG
        .replace(r#""kappa": "3.14e11 rad2/s2/mW", "powers": ["0.01 mW", "0.1 mW", "1 mW"]"#, r#""rabi": ["0 rad/s"]"#)
        .replace("\"all\"", "\"numeric\"");
    let cfg = write_config(tmp.path(), &body);
    let o = delaylight(&["--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("FAILED").exists());
    assert!(!out.join("_INCOMPLETE").exists());
}

#[test]
fn hz_and_angular_configs_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let hz = format!("{} Hz", 1.0 / 3e-3 / (2.0 * std::f64::consts::PI));
    let a = write_config(tmp.path(), DELAY_CONFIG);
    let out_a = tmp.path().join("a");
    assert!(delaylight(&["--config", &a, "--out", out_a.to_str().unwrap()]).status.success());
    let b = write_config(tmp.path(), &DELAY_CONFIG.replace("333.3333333333333 /s_angular", &hz));
    let out_b = tmp.path().join("b");
    assert!(delaylight(&["--config", &b, "--out", out_b.to_str().unwrap()]).status.success());
    let ca: Value = serde_json::from_str(&fs::read_to_string(out_a.join("config.json")).unwrap()).unwrap();
    let cb: Value = serde_json::from_str(&fs::read_to_string(out_b.join("config.json")).unwrap()).unwrap();
    let (ga, gb) = (ca["medium"]["gamma"].as_f64().unwrap(), cb["medium"]["gamma"].as_f64().unwrap());
    assert!((ga / gb - 1.0).abs() < 1e-12);
}

#[test]
fn every_subcommand_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let body = r#"{
        "medium": {"d": 0.5, "gamma_1p": "300 MHz", "gamma": "53.05 Hz", "eta_act": 0.05, "diffusion": "10 mm2/s"},
        "drive": {"kappa": "3.14e11 rad2/s2/mW", "powers": ["0.02 mW", "0.05 mW", "0.1 mW"]},
        "spectrum": {"points": 512},
        "beam": {"n": 64, "pitch": "0.125 mm", "w_in": "0.5 mm", "write_profiles": true}
    }"#;
    let cfg = write_config(tmp.path(), body);
    for cmd in ["spectrum", "contrast", "delay", "pulse", "beam", "calibrate"] {
        let out = tmp.path().join(cmd);
        let o = delaylight(&[cmd, "--config", &cfg, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{cmd}: {}", String::from_utf8_lossy(&o.stderr));
        let s = summary(&out);
        assert_eq!(s["scenario"], cmd);
        for f in s["files"].as_array().unwrap() {
            assert!(out.join(f["name"].as_str().unwrap()).exists());
        }
    }
    let grid = fs::read_to_string(tmp.path().join("beam/beam_in.csv")).unwrap();
    let mut lines = grid.lines();
    assert_eq!(lines.next(), Some("N,pitch_mm"));
    assert!(lines.next().unwrap().starts_with("64,"));
    assert_eq!(lines.count(), 64 * 64);
    let cal = summary(&tmp.path().join("calibrate"));
    assert!(cal["results"]["kappa_relative_error"].as_f64().unwrap().abs() < 0.02);
}
