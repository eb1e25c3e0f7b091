use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use lsbwave::run_with;
use tempfile::TempDir;

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn call(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let argv = std::iter::once("lsbwave").chain(args.iter().copied());
    let code = run_with(argv, &mut out, &mut err);
    (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
}

const FREE_BOX: &str = r#"{"domains": [
    {"kind": "translation", "bounds": [0, 4], "cells": 4, "profile": {"type": "constant", "value": 0}}
], "leads": {"left": 0, "right": 0}}"#;

const CLS: &str = r#"{"domains": [
    {"kind": "inversion", "bounds": [0, 2], "profile": {"type": "gaussian", "height": 1.2, "center": 0.6, "width": 0.3}},
    {"kind": "translation", "bounds": [2, 6], "cells": 5, "profile": {"type": "cosine", "amplitude": 0.5, "period": 0.8, "phase": 0.2, "offset": 0.3}},
    {"kind": "none", "bounds": [6, 7], "profile": {"type": "linear", "intercept": -2.0, "slope": 0.4}}
], "leads": {"left": 0, "right": 0.1}}"#;

fn rows(csv: &str) -> Vec<Vec<f64>> {
    csv.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap_or(f64::NAN)).collect()).collect()
}

#[test]
fn free_box_transmits_fully() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "box.json", FREE_BOX);
    let (code, out, err) = call(&["scatter", "--config", cfg.to_str().unwrap(), "--energy", "0.5"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("energy,T,R,re_t,im_t,re_r,im_r\n"));
    let r = rows(&out);
    assert_eq!(r.len(), 1);
    assert!((r[0][1] - 1.0).abs() < 1e-8 && r[0][2] < 1e-8, "{out}");
}

#[test]
fn scatter_matches_oracle_and_conserves_flux() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "cls.json", CLS);
    let cfg = cfg.to_str().unwrap();
    let (c1, lsb, e1) = call(&["scatter", "--config", cfg, "--energies", "0.4:2.5:7"]);
    let (c2, direct, e2) = call(&["oracle", "--config", cfg, "--energies", "0.4:2.5:7"]);
    assert_eq!((c1, c2), (0, 0), "{e1}{e2}");
    for (a, b) in rows(&lsb).iter().zip(rows(&direct)) {
        assert!((a[1] + a[2] - 1.0).abs() < 1e-8);
        assert!((a[1] - b[1]).abs() < 1e-6 && (a[2] - b[2]).abs() < 1e-6, "{a:?} vs {b:?}");
    }
    let (_, other_ref, _) = call(&["scatter", "--config", cfg, "--energies", "0.4:2.5:7", "--ref-domain", "3"]);
    for (a, b) in rows(&lsb).iter().zip(rows(&other_ref)) {
        assert!((a[1] - b[1]).abs() < 1e-9);
    }
}

#[test]
fn output_is_deterministic_across_thread_counts() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "cls.json", CLS);
    let run = |threads: &str, out: &str| {
        let out = dir.path().join(out);
        let status = Command::new(env!("CARGO_BIN_EXE_lsbwave"))
            .args(["scatter", "--config", cfg.to_str().unwrap(), "--energies", "0.3:3:24", "--out"])
            .arg(&out)
            .env("LSBWAVE_THREADS", threads)
            .status()
            .unwrap();
        assert!(status.success());
        fs::read(out).unwrap()
    };
    let one = run("1", "a.csv");
    assert_eq!(one, run("4", "b.csv"));
    assert_eq!(one, run("4", "c.csv"));
    assert_eq!(String::from_utf8(one).unwrap().lines().count(), 25);
}

#[test]
fn validate_rejects_perturbed_samples() {
    let dir = TempDir::new().unwrap();
    let xs: Vec<f64> = (0..=40).map(|j| j as f64 * 0.1).collect();
    let mut vs: Vec<f64> = xs.iter().map(|x| (x - 2.0f64).powi(2)).collect();
    let doc = |v: &[f64]| {
        serde_json::json!({"domains": [{"kind": "inversion", "bounds": [0.0, 4.0], "span": "domain",
            "profile": {"type": "samples", "x": xs, "v": v}}]})
        .to_string()
    };
    let good = write(dir.path(), "sym.json", &doc(&vs));
    let (code, out, _) = call(&["validate", "--config", good.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert!(out.contains(",true"));

    vs[7] += 0.1;
    let bad = write(dir.path(), "asym.json", &doc(&vs));
    let (code, out, err) = call(&["validate", "--config", bad.to_str().unwrap()]);
    assert_eq!(code, 1);
    let dev: f64 = out.lines().nth(1).unwrap().split(',').nth(2).unwrap().parse().unwrap();
    assert!(dev >= 0.1 - 1e-12, "{out}");
    assert!(err.contains("validate") && err.contains("domain 1"), "{err}");

    // other commands refuse the potential outright
    let (code, _, err) = call(&["scatter", "--config", bad.to_str().unwrap(), "--energy", "1"]);
    assert_eq!(code, 1);
    assert!(err.contains("scatter"), "{err}");
}

#[test]
fn exit_codes_for_input_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "box.json", FREE_BOX);
    let cfg = cfg.to_str().unwrap();
    assert_eq!(call(&["scatter", "--config", cfg, "--bogus"]).0, 1);
    assert_eq!(call(&["frobnicate"]).0, 1);
    assert_eq!(call(&["scatter", "--config", cfg]).0, 1);
    assert_eq!(call(&["scatter", "--config", cfg, "--energy", "0.5", "--tol", "0"]).0, 1);
    assert_eq!(call(&["scatter", "--config", cfg, "--energy", "0.5", "--ref-domain", "4"]).0, 1);
    let (code, _, err) = call(&["scatter", "--config", cfg, "--energy", "-0.5"]);
    assert_eq!(code, 1);
    assert!(err.contains("E=-0.5"), "{err}");
    let broken = write(dir.path(), "broken.json", r#"{"domains": [{"kind": "inversion"}]}"#);
    assert_eq!(call(&["scatter", "--config", broken.to_str().unwrap(), "--energy", "1"]).0, 1);
    assert_eq!(call(&["scatter", "--config", "/nonexistent.json", "--energy", "1"]).0, 1);
    assert_eq!(call(&["--help"]).0, 0);
}

#[test]
fn wrapped_config_supplies_defaults() {
    let dir = TempDir::new().unwrap();
    write(dir.path(), "box.json", FREE_BOX);
    let run = write(dir.path(), "run.json", r#"{"potential": "box.json", "energies": "0.5:1.5:3", "bc": "dirichlet"}"#);
    let (code, out, err) = call(&["scatter", "--config", run.to_str().unwrap()]);
    assert_eq!(code, 0, "{err}");
    assert_eq!(rows(&out).len(), 3);
    // flags win over file defaults
    let (_, out, _) = call(&["scatter", "--config", run.to_str().unwrap(), "--energy", "2"]);
    let r = rows(&out);
    assert_eq!(r.len(), 1);
    assert_eq!(r[0][0], 2.0);
}

#[test]
fn particle_in_a_box() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "box.json", r#"{"domains": [
        {"kind": "inversion", "bounds": [0, 1], "profile": {"type": "constant", "value": 0}}]}"#);
    let (code, out, err) = call(&["bound", "--config", cfg.to_str().unwrap(), "--energies", "1:50:400", "--bc", "dirichlet"]);
    assert_eq!(code, 0, "{err}");
    let r = rows(&out);
    assert_eq!(r.len(), 3, "{out}");
    for (n, row) in r.iter().enumerate() {
        let exact = ((n + 1) as f64 * std::f64::consts::PI).powi(2) / 2.0;
        assert!((row[1] - exact).abs() <= 1e-8 * exact, "{row:?}");
        assert_eq!(row[2], n as f64);
    }
    assert_eq!(call(&["bound", "--config", cfg.to_str().unwrap(), "--energy", "1"]).0, 1);
}

#[test]
fn invariants_basis_field_and_design() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "cls.json", CLS);
    let cfg = cfg.to_str().unwrap();
    let (code, out, err) = call(&["invariants", "--config", cfg, "--energy", "1.1", "--pairs", "50"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("domain,m,n,re_q,im_q,spread\n"));
    let r = rows(&out);
    assert_eq!(r.len(), 8);
    assert!(r.iter().all(|row| row[5] <= 1e-7), "{out}");
    assert_eq!(call(&["invariants", "--config", cfg, "--energy", "1.1", "--domain", "3"]).0, 1);

    let (code, out, _) = call(&["basis", "--config", cfg, "--energy", "1.1", "--points", "11"]);
    assert_eq!(code, 0);
    assert!(out.starts_with("x,re_xi1,im_xi1,re_xi2,im_xi2\n"));
    assert_eq!(rows(&out).len(), 11);

    let field = dir.path().join("field.csv");
    let (code, _, _) =
        call(&["scatter", "--config", cfg, "--energy", "1.1", "--field", field.to_str().unwrap(), "--points", "21"]);
    assert_eq!(code, 0);
    let text = fs::read_to_string(&field).unwrap();
    assert!(text.starts_with("x,re_psi,im_psi,abs2_psi\n"));
    for row in rows(&text) {
        assert!((row[1].powi(2) + row[2].powi(2) - row[3]).abs() < 1e-9);
    }
    assert_eq!(call(&["scatter", "--config", cfg, "--energies", "1:2:2", "--field", "x.csv"]).0, 1);

    let (code, out, _) = call(&["design", "--config", cfg, "--energy", "1.1"]);
    assert_eq!(code, 0);
    assert_eq!(rows(&out)[0].len(), 9);
}

#[test]
fn general_check_on_log_periodic_profile() {
    let dir = TempDir::new().unwrap();
    let cfg = write(dir.path(), "log.json", r#"{"domains": [
        {"kind": "none", "bounds": [1, 4], "profile": {"type": "logcosine", "amplitude": 0.4, "ratio": 2, "offset": 0.2}}]}"#);
    let cfg = cfg.to_str().unwrap();
    let (code, out, err) = call(&["general-check", "--config", cfg, "--energy", "1.5", "--transform", "scale:2", "--domain", "1:2"]);
    assert_eq!(code, 0, "{err}");
    let r = rows(&out);
    assert_eq!(out.lines().nth(1).unwrap().split(',').nth(1), Some("false"));
    assert!(r[0][2] <= 1e-6, "{out}");

    let (code, _, err) = call(&["general-check", "--config", cfg, "--energy", "1.5", "--transform", "scale:1.5", "--domain", "1:2"]);
    assert_eq!(code, 1, "{err}");
    let (code, out, _) = call(&[
        "general-check", "--config", cfg, "--energy", "1.5", "--transform", "scale:1.5", "--domain", "1:2", "--allow-broken",
    ]);
    assert_eq!(code, 0);
    assert!(rows(&out)[0][4] > 1e-3);
}

#[test]
fn bench_reports_one_row_per_size() {
    let (code, out, err) = call(&["bench", "--cells", "16,256", "--repeats", "1"]);
    assert_eq!(code, 0, "{err}");
    assert!(out.starts_with("cells,lsb_seconds,direct_seconds,lsb_steps,direct_steps,T_lsb,T_direct\n"));
    let r = rows(&out);
    assert_eq!(r.len(), 2);
    assert_eq!(r[0][3], r[1][3], "LSB integrates one cell regardless of size");
    assert!(r[1][4] > 10.0 * r[0][4]);
    for row in &r {
        assert!((row[5] - row[6]).abs() < 1e-6);
    }
    assert_eq!(call(&["bench", "--cells", "16,x"]).0, 1);
}
