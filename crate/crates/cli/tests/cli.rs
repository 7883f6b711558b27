use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;
use tempfile::TempDir;
use volterra_cli::io::{read_morphism, read_series, read_signal};
use volterra_cli::{run, EXIT_CONTRACT, EXIT_OK, EXIT_USAGE};
use volterra_core::signal::max_abs_diff;

struct Out {
    code: i32,
    stdout: String,
    stderr: String,
}

fn volterra(args: &[&str]) -> Out {
    let (mut o, mut e) = (Vec::new(), Vec::new());
    let code = run(std::iter::once("volterra").chain(args.iter().copied()), &mut o, &mut e);
    Out { code, stdout: String::from_utf8(o).unwrap(), stderr: String::from_utf8(e).unwrap() }
}

fn ok(args: &[&str]) -> String {
    let out = volterra(args);
    assert_eq!(out.code, EXIT_OK, "{args:?}: {}", out.stderr);
    out.stdout
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn help_and_usage_errors() {
    let help = volterra(&["--help"]);
    assert_eq!(help.code, EXIT_OK);
    assert!(help.stdout.contains("compose"));
    assert_eq!(volterra(&["frobnicate"]).code, EXIT_USAGE);
    assert_eq!(volterra(&["tfd", "--in", "x.csv", "--method", "nope"]).code, EXIT_USAGE);
    let missing = volterra(&["info", "--series", "/nonexistent/a.vk"]);
    assert_eq!(missing.code, EXIT_CONTRACT);
    assert!(missing.stderr.starts_with("error:"));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_volterra");
    let st = Command::new(bin).args(["lambdas", "--k", "6", "--lambda3", "0.4"]).output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_CONTRACT));
    let st = Command::new(bin).arg("--version").output().unwrap();
    assert_eq!(st.status.code(), Some(EXIT_OK));
    assert_eq!(Command::new(bin).output().unwrap().status.code(), Some(EXIT_USAGE));
}

#[test]
fn elementary_and_info() {
    let dir = tempfile::tempdir().unwrap();
    let p = path(&dir, "poly.vk");
    ok(&["elementary", "--kind", "polynomial", "--coeffs", "0.5,-1,2", "--out", s(&p)]);
    let info = json(&["info", "--series", s(&p)]);
    assert_eq!(info["orders"], serde_json::json!([0, 1, 2]));
    assert_eq!(info["constant"], serde_json::json!([0.5, 0.0]));
    assert_eq!(info["terms"][2]["symmetric"], Value::Bool(true));

    let d = path(&dir, "delay.vk");
    ok(&["elementary", "--kind", "delay", "--n", "2", "--memory", "4", "--out", s(&d)]);
    assert_eq!(read_series(&d).unwrap().memory(), 4);
    assert_eq!(volterra(&["elementary", "--kind", "polynomial", "--out", s(&p)]).code, EXIT_USAGE);
}

#[test]
fn eval_methods_agree() {
    let dir = tempfile::tempdir().unwrap();
    let v = path(&dir, "v.vk");
    let x = path(&dir, "x.csv");
    ok(&["random", "--seed", "3", "--max-order", "3", "--memory", "3", "--out", s(&v)]);
    ok(&["chirp", "--coeffs", "0,0.4,0.01", "--length", "12", "--out", s(&x)]);
    let mut outs = Vec::new();
    for m in ["time", "freq", "oracle"] {
        let y = path(&dir, &format!("y_{m}.csv"));
        ok(&["eval", "--series", s(&v), "--signal", s(&x), "--method", m, "--out", s(&y)]);
        outs.push(read_signal(&y).unwrap());
    }
    for y in &outs[1..] {
        assert!(max_abs_diff(y.samples(), outs[0].samples()) < 1e-10);
    }
    // no --out: CSV on stdout
    let text = ok(&["eval", "--series", s(&v), "--signal", s(&x)]);
    assert_eq!(text.lines().count(), 12);
}

#[test]
fn compose_reports_truncation_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let a = path(&dir, "a.vk");
    let out = path(&dir, "o.vk");
    ok(&["random", "--seed", "1", "--max-order", "2", "--memory", "2", "--no-constant", "--out", s(&a)]);
    let bind = format!("A={}", s(&a));
    let summary = json(&["compose", "--expr", "A <| A <| A", "--bind", &bind, "--out", s(&out), "--cap", "3"]);
    assert_eq!(summary["expression"], "A <| A <| A");
    let t = summary["truncations"].as_array().unwrap();
    assert!(!t.is_empty() && t.iter().all(|x| x["cap"] == 3));
    assert_eq!(read_series(&out).unwrap().max_order(), 3);

    let summary = json(&["compose", "--expr", "Id <| A", "--bind", &bind, "--out", s(&out)]);
    assert!(summary["truncations"].as_array().unwrap().is_empty());

    let bad = volterra(&["compose", "--expr", "A +", "--bind", &bind, "--out", s(&out)]);
    assert_eq!(bad.code, EXIT_CONTRACT);
    assert!(bad.stderr.contains("byte 3"), "{}", bad.stderr);
    assert_eq!(volterra(&["compose", "--expr", "A + Z", "--bind", &bind, "--out", s(&out)]).code, EXIT_CONTRACT);
    assert_eq!(volterra(&["compose", "--expr", "A", "--bind", "A", "--out", s(&out)]).code, EXIT_USAGE);
}

#[test]
fn catalog_then_morph() {
    let dir = tempfile::tempdir().unwrap();
    let v = path(&dir, "v.vk");
    let m = path(&dir, "m.vm");
    let w = path(&dir, "w.vk");
    let img = path(&dir, "img.vk");
    ok(&["random", "--seed", "9", "--max-order", "2", "--memory", "3", "--out", s(&v)]);
    for kind in ["trivial", "autoconvolution", "identity", "translation", "sampling", "smoothing"] {
        ok(&[
            "catalog",
            "--kind",
            kind,
            "--source",
            s(&v),
            "--length",
            "8",
            "--morphism-out",
            s(&m),
            "--target-out",
            s(&w),
        ]);
        let rep = json(&["morph", "--morphism", s(&m), "--source", s(&v), "--target", s(&w), "--check-naturality"]);
        assert_eq!(rep["valid"], Value::Bool(true), "{kind}");
        assert!(rep["naturality_residual"].as_f64().unwrap() <= 1e-9, "{kind}");
    }
    assert_eq!(read_morphism(&m).unwrap().length(), 8);
    ok(&["morph", "--morphism", s(&m), "--source", s(&v), "--target", s(&w), "--out", s(&img)]);
    assert_eq!(read_series(&img).unwrap().orders(), read_series(&v).unwrap().orders());

    // a target with different orders does not fit
    let other = path(&dir, "other.vk");
    ok(&["elementary", "--kind", "delay", "--memory", "2", "--out", s(&other)]);
    let bad = volterra(&["morph", "--morphism", s(&m), "--source", s(&v), "--target", s(&other)]);
    assert_eq!(bad.code, EXIT_CONTRACT);
    let rep: Value = serde_json::from_str(&bad.stdout).unwrap();
    assert_eq!(rep["valid"], Value::Bool(false));
}

#[test]
fn tfd_methods_write_grids() {
    let dir = tempfile::tempdir().unwrap();
    let x = path(&dir, "x.csv");
    let g = path(&dir, "g.csv");
    let pgm = path(&dir, "g.pgm");
    // IF 0.1 + 0.2 t / 64 cycles per sample
    ok(&["chirp", "--coeffs", "0,0.6283185307179586,0.004908738521234052", "--length", "64", "--out", s(&x)]);
    let rep = json(&["tfd", "--in", s(&x), "--method", "wvd", "--out", s(&g), "--pgm", s(&pgm), "--part", "abs"]);
    assert_eq!(rep["times"], 64);
    assert_eq!(rep["columns"], 32);
    assert_eq!(std::fs::read_to_string(&g).unwrap().lines().count(), 64);
    let bytes = std::fs::read(&pgm).unwrap();
    assert!(bytes.starts_with(b"P5\n32 64\n255\n"));
    assert_eq!(bytes.len(), b"P5\n32 64\n255\n".len() + 64 * 32);

    for args in [
        vec!["--method", "cohen", "--phi", "spectrogram", "--sigma", "3"],
        vec!["--method", "cohen", "--phi", "rihaczek"],
        vec!["--method", "pwvd", "--k", "4"],
        vec!["--method", "pwvd", "--k", "6", "--lambda3", "0.62"],
        vec!["--method", "howvd", "--k", "3", "--lag-step", "4"],
    ] {
        let mut full = vec!["tfd", "--in", s(&x), "--analytic"];
        full.extend(&args);
        let csv = ok(&full);
        assert_eq!(csv.lines().count(), 64, "{args:?}");
    }
    let howvd = json(&["tfd", "--in", s(&x), "--method", "howvd", "--k", "3", "--lag-step", "4", "--out", s(&g)]);
    assert_eq!(howvd["columns"], 16 * 16);
    assert_eq!(volterra(&["tfd", "--in", s(&x), "--method", "howvd", "--k", "3"]).code, EXIT_CONTRACT);
    assert_eq!(volterra(&["tfd", "--in", s(&x), "--method", "pwvd", "--k", "6"]).code, EXIT_CONTRACT);
}

#[test]
fn lambdas_report() {
    let rep = json(&["lambdas", "--k", "6", "--lambda3", "0.62"]);
    assert_eq!(rep["passes"], Value::Bool(true));
    assert_eq!(rep["concentrates"], Value::Bool(true));
    assert_eq!(rep["interference_terms"], 62);
    let l1 = rep["lambdas"][0].as_f64().unwrap();
    assert!((l1 - 0.7528).abs() < 1e-3);
    let four = json(&["lambdas", "--k", "4", "--p", "3"]);
    assert_eq!(four["passes"], Value::Bool(true));
    assert_eq!(four["concentrates"], Value::Bool(false));
    assert_eq!(volterra(&["lambdas", "--k", "6", "--lambda3", "0.4"]).code, EXIT_CONTRACT);
}
