use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn config(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn conewave(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_conewave"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("CONEWAVE_THREADS")
        .output()
        .expect("binary runs")
}

fn with_config(cmd: &[&str], cfg: &Path, extra: &[&str], out: &Path) -> Output {
    let mut args: Vec<&str> = cmd.to_vec();
    args.push("--config");
    args.push(cfg.to_str().unwrap());
    args.extend_from_slice(extra);
    conewave(&args, out)
}

fn summary(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("stdout is JSON")
}

fn files_with_ext(dir: &Path, ext: &str) -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().and_then(|e| e.to_str()) == Some(ext))
        .collect();
    v.sort();
    v
}

#[test]
fn pv1d_default_meets_log_bound() {
    let dir = tempfile::tempdir().unwrap();
    let o = conewave(&["witness", "pv1d", "--k", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let s = summary(&o);
    assert!(s["value"].as_f64().unwrap() >= std::f64::consts::LN_2);
    assert!(s["tol"].is_number());
}

#[test]
fn unknown_subcommand_exits_2_with_usage() {
    let dir = tempfile::tempdir().unwrap();
    let o = conewave(&["cone", "hull"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("Usage"));
}

#[test]
fn missing_or_malformed_config_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(conewave(&["cone", "dual"], dir.path()).status.code(), Some(2));
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ \"kind\": \"circular\", \"axis\": [0, 0], \"cosHalf\": 0.5 }").unwrap();
    assert_eq!(with_config(&["cone", "dual"], &bad, &[], dir.path()).status.code(), Some(2));
    std::fs::write(&bad, "not json").unwrap();
    assert_eq!(with_config(&["witness", "lemma"], &bad, &[], dir.path()).status.code(), Some(2));
}

#[test]
fn bad_thread_count_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_conewave"))
        .args(["witness", "pv1d", "--out"])
        .arg(dir.path())
        .env("CONEWAVE_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn ray_has_halfspace_dual() {
    let dir = tempfile::tempdir().unwrap();
    let o = with_config(&["cone", "dual"], &config("ray2d.json"), &[], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let s = summary(&o);
    assert_eq!(s["dual"]["kind"], "halfspace");
}

#[test]
fn lemma_default_rows_all_pass() {
    let dir = tempfile::tempdir().unwrap();
    let o = with_config(&["witness", "lemma"], &config("default2d.json"), &["--deterministic"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = files_with_ext(dir.path(), "csv");
    assert_eq!(csv.len(), 1);
    let mut reader = csv::Reader::from_path(&csv[0]).unwrap();
    let headers = reader.headers().unwrap().clone();
    let pass = headers.iter().position(|h| h == "pass").unwrap();
    let tol = headers.iter().position(|h| h == "tol").unwrap();
    let rows: Vec<csv::StringRecord> = reader.records().map(|r| r.unwrap()).collect();
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().all(|r| &r[pass] == "true" && !r[tol].is_empty()));
}

#[test]
fn mixed_profile_check_reports_failure_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let o = with_config(&["profile", "check"], &config("mixed2d.json"), &[], dir.path());
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(summary(&o)["report"]["holds"], false);
}

#[test]
fn unmet_expectation_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let text = std::fs::read_to_string(config("hilbert_blowup.json")).unwrap();
    let mut cfg: Value = serde_json::from_str(&text).unwrap();
    cfg["expect"] = Value::from("stabilizing");
    let path = dir.path().join("stab.json");
    std::fs::write(&path, cfg.to_string()).unwrap();
    let o = with_config(&["multiplier", "blowup"], &path, &[], dir.path());
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn refused_space_exits_2_with_reason() {
    let dir = tempfile::tempdir().unwrap();
    let o = with_config(&["wavefront", "estimate"], &config("wavefront_l1.json"), &[], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("refused") && err.contains("psi(D) f not in L1_loc"));
}

#[test]
fn deterministic_runs_are_byte_identical() {
    for (cmd, cfg) in [
        (&["multiplier", "blowup"][..], "hilbert_blowup.json"),
        (&["witness", "lemma"][..], "default2d.json"),
        (&["wavefront", "estimate"][..], "wavefront_delta.json"),
    ] {
        let runs: Vec<Vec<u8>> = (0..2)
            .map(|_| {
                let dir = tempfile::tempdir().unwrap();
                let o = with_config(cmd, &config(cfg), &["--deterministic"], dir.path());
                assert_eq!(o.status.code(), Some(0), "{cfg}");
                let csv = files_with_ext(dir.path(), "csv");
                std::fs::read(&csv[0]).unwrap()
            })
            .collect();
        assert_eq!(runs[0], runs[1], "{cfg}");
    }
}

#[test]
fn emit_plot_writes_gnuplot_script() {
    let dir = tempfile::tempdir().unwrap();
    let o = with_config(&["multiplier", "blowup"], &config("hilbert_blowup.json"), &["--emit-plot"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let gp = files_with_ext(dir.path(), "gp");
    assert_eq!(gp.len(), 1);
    let script = std::fs::read_to_string(&gp[0]).unwrap();
    assert!(script.contains("set datafile separator ','"));
}

#[test]
fn apply_writes_field_with_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let o = with_config(&["multiplier", "apply"], &config("hilbert_apply.json"), &[], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let bin = files_with_ext(dir.path(), "bin");
    assert_eq!(bin.len(), 1);
    let field = conewave::io::read_field(&bin[0]).unwrap();
    assert_eq!(field.size, 16384);
}
