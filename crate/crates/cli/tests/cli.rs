use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use tempfile::TempDir;

const TINY: &str = r#"{
  "problem": { "kind": "convdiff2d", "nx": 10, "ny": 10, "nt": 8 },
  "train_mus": [[0.03, 0.33], [0.03, 0.35], [0.05, 0.33], [0.05, 0.35]],
  "target_mu": [0.04, 0.34],
  "test_mus": { "grid": { "mu1": [0.03, 0.05, 2], "mu2": [0.33, 0.35, 2] } },
  "n_s": [2, 4],
  "n_t": { "start": 1, "stop": 2 },
  "timing_repeats": 3
}"#;

fn strom(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_strom"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> PathBuf {
    let p = dir.join("config.json");
    fs::write(&p, text).unwrap();
    p
}

fn run_ok(args: &[&str]) -> Output {
    let out = strom(args);
    assert!(
        out.status.success(),
        "{args:?} failed:\n{}\n{}",
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

/// Data rows of a report CSV, keyed by header name.
fn read_rows(path: &Path) -> Vec<Vec<(String, String)>> {
    let text = fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    lines
        .map(|l| header.iter().cloned().zip(l.split(',').map(String::from)).collect())
        .collect()
}

fn field<'a>(row: &'a [(String, String)], name: &str) -> &'a str {
    &row.iter().find(|(k, _)| k == name).unwrap().1
}

fn untimed(row: &[(String, String)]) -> Vec<(String, String)> {
    row.iter()
        .filter(|(k, _)| !matches!(k.as_str(), "fom_time_s" | "rom_online_time_s" | "speedup"))
        .cloned()
        .collect()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn train_is_byte_reproducible() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), TINY);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    run_ok(&["--config", s(&cfg), "--out", s(&a), "--seed", "3", "train"]);
    run_ok(&["--config", s(&cfg), "--out", s(&b), "--seed", "3", "train"]);
    for f in ["basis.json", "phi_s.csv", "phi_t.csv", "singular_values.csv"] {
        let x = fs::read(a.join("basis").join(f)).unwrap();
        let y = fs::read(b.join("basis").join(f)).unwrap();
        assert!(x == y, "{f} differs between runs");
    }
    let header: serde_json::Value = serde_json::from_slice(&fs::read(a.join("basis/basis.json")).unwrap()).unwrap();
    assert_eq!(header["N_s"], 81);
    assert_eq!(header["n_s"], 4);
    assert_eq!(header["n_t"], 2);
    let manifest: serde_json::Value =
        serde_json::from_slice(&fs::read(a.join("training_manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["fom_times_s"].as_array().unwrap().len(), 4);
}

#[test]
fn single_training_parameter_gives_degenerate_bundle() {
    let tmp = TempDir::new().unwrap();
    let text = TINY
        .replace(
            "[[0.03, 0.33], [0.03, 0.35], [0.05, 0.33], [0.05, 0.35]]",
            "[[0.04, 0.34]]",
        )
        .replace(r#"{ "start": 1, "stop": 2 }"#, "1");
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("o");
    run_ok(&["--config", s(&cfg), "--out", s(&out), "train"]);
    let phi_t = fs::read_to_string(out.join("basis/phi_t.csv")).unwrap();
    assert!(phi_t.lines().all(|l| l.split(',').count() == 1));
}

#[test]
fn temporal_rank_is_rejected_before_any_run() {
    let tmp = TempDir::new().unwrap();
    let text = TINY.replace(r#"{ "start": 1, "stop": 2 }"#, "5");
    let cfg = write_config(tmp.path(), &text);
    let out = strom(&["--config", s(&cfg), "--out", s(&tmp.path().join("o")), "train"]);
    assert!(!out.status.success());
    assert!(!tmp.path().join("o").exists());
}

#[test]
fn upstream_errors_name_the_parameter() {
    let tmp = TempDir::new().unwrap();
    // This parameter sits on a grid node of the diffusion reaction term.
    let text = TINY
        .replace("convdiff2d", "diffusion2d")
        .replace("[[0.03, 0.33], [0.03, 0.35], [0.05, 0.33], [0.05, 0.35]]", "[[-0.9, -0.9], [0.5, 0.5]]");
    let cfg = write_config(tmp.path(), &text);
    let out = strom(&["--config", s(&cfg), "--out", s(&tmp.path().join("o")), "train"]);
    assert!(!out.status.success());
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("(0.5, 0.5)"), "{err}");
}

#[test]
fn predict_matches_degenerate_sweep_and_prefers_training_points() {
    let tmp = TempDir::new().unwrap();
    // Full temporal rank and enough spatial modes that truncation does not
    // mask the advantage of a training point.
    let text = TINY
        .replace(
            r#"{ "grid": { "mu1": [0.03, 0.05, 2], "mu2": [0.33, 0.35, 2] } }"#,
            r#"{ "grid": { "mu1": [0.04, 0.04, 1], "mu2": [0.34, 0.34, 1] } }"#,
        )
        .replace(r#"{ "start": 1, "stop": 2 }"#, "4")
        .replace("[2, 4]", "12");
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("o");
    run_ok(&["--config", s(&cfg), "--out", s(&out), "train"]);
    run_ok(&["--config", s(&cfg), "--out", s(&out), "predict", "--n-s", "12", "--n-t", "4"]);
    let predicted = read_rows(&out.join("predict/report.csv"));
    assert_eq!(predicted.len(), 2);
    for f in ["fom_final.csv", "galerkin_final.csv", "pg_final.csv"] {
        let grid = fs::read_to_string(out.join("predict").join(f)).unwrap();
        assert_eq!(grid.lines().count(), 9);
    }

    run_ok(&["--config", s(&cfg), "--out", s(&out), "sweep", "--n-s", "12", "--n-t", "4"]);
    let swept = read_rows(&out.join("sweep.csv"));
    assert_eq!(swept.len(), 2);
    for (p, q) in predicted.iter().zip(&swept) {
        assert_eq!(untimed(p), untimed(q));
    }

    let at_train = tmp.path().join("t");
    run_ok(&[
        "--config",
        s(&cfg),
        "--out",
        s(&out),
        "predict",
        "--mu",
        "0.03,0.33",
        "--n-s",
        "12",
        "--n-t",
        "4",
    ]);
    fs::rename(out.join("predict"), &at_train).unwrap();
    let train_rows = read_rows(&at_train.join("report.csv"));
    for (t, c) in train_rows.iter().zip(&predicted) {
        let et: f64 = field(t, "relative_error").parse().unwrap();
        let ec: f64 = field(c, "relative_error").parse().unwrap();
        assert!(et < ec, "training point error {et} not below centroid {ec}");
    }
}

#[test]
fn sweep_rows_are_reproducible_and_pg_minimizes_residual() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), TINY);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for o in [&a, &b] {
        run_ok(&["--config", s(&cfg), "--out", s(o), "train"]);
    }
    run_ok(&["--config", s(&cfg), "--out", s(&a), "--jobs", "1", "sweep", "--total"]);
    run_ok(&["--config", s(&cfg), "--out", s(&b), "--jobs", "3", "sweep"]);
    let (ra, rb) = (read_rows(&a.join("sweep.csv")), read_rows(&b.join("sweep.csv")));
    assert_eq!(ra.len(), 4 * 4 * 2);
    assert_eq!(ra.iter().map(|r| untimed(r)).collect::<Vec<_>>(), rb.iter().map(|r| untimed(r)).collect::<Vec<_>>());
    for pair in ra.chunks(2) {
        assert_eq!(field(&pair[0], "flavor"), "galerkin");
        assert_eq!(field(&pair[1], "flavor"), "pg");
        let g: f64 = field(&pair[0], "st_residual_norm").parse().unwrap();
        let p: f64 = field(&pair[1], "st_residual_norm").parse().unwrap();
        assert!(p <= g * (1.0 + 1e-12));
    }
    let summary: serde_json::Value =
        serde_json::from_slice(&fs::read(a.join("sweep_summary.json")).unwrap()).unwrap();
    assert_eq!(summary["failures"], 0);
    assert_eq!(summary["total"].as_array().unwrap().len(), 8);
}

#[test]
fn sweep_records_failed_cells_and_continues() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), TINY);
    let out = tmp.path().join("o");
    run_ok(&["--config", s(&cfg), "--out", s(&out), "train"]);
    let res = strom(&["--config", s(&cfg), "--out", s(&out), "sweep", "--n-s", "2,9", "--n-t", "1"]);
    assert_eq!(res.status.code(), Some(1));
    assert_eq!(read_rows(&out.join("sweep.csv")).len(), 4 * 2);
    let failed = read_rows(&out.join("sweep_failures.csv"));
    assert_eq!(failed.len(), 4 * 2);
    assert!(failed.iter().all(|r| field(r, "n_s") == "9"));
}

#[test]
fn predict_rejects_mismatched_bundle() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), TINY);
    let out = tmp.path().join("o");
    run_ok(&["--config", s(&cfg), "--out", s(&out), "train"]);
    let sub = tmp.path().join("other");
    fs::create_dir(&sub).unwrap();
    let other = write_config(&sub, &TINY.replace("\"nt\": 8", "\"nt\": 9"));
    let res = strom(&["--config", s(&other), "--out", s(&out), "predict"]);
    assert_eq!(res.status.code(), Some(2));
}

#[test]
fn verify_passes_fails_on_mutation_and_warns_when_empty() {
    let ok = run_ok(&["verify", "--meshes", "4", "--time-steps", "3"]);
    let stdout = String::from_utf8_lossy(&ok.stdout);
    assert!(stdout.starts_with("check\tcase\tvalue\ttolerance\tstatus"));
    assert!(stdout.contains("PASS") && !stdout.contains("FAIL\n"));

    let flipped = strom(&["verify", "--meshes", "4", "--time-steps", "3", "--inject-flip", "1,0"]);
    assert_eq!(flipped.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&flipped.stdout).contains("FAIL"));

    let empty = run_ok(&["verify", "--meshes", ""]);
    assert!(String::from_utf8_lossy(&empty.stderr).contains("empty"));
}

#[test]
fn bound_study_rows_satisfy_definition() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    run_ok(&["--out", s(&out), "bound-study", "--nx", "8", "--nt", "1,3,6"]);
    let rows = read_rows(&out.join("bound_study.csv"));
    assert_eq!(rows.len(), 3);
    for r in &rows {
        let nt: f64 = field(r, "N_t").parse().unwrap();
        let inv: f64 = field(r, "inv_norm").parse().unwrap();
        let eta: f64 = field(r, "eta").parse().unwrap();
        assert_eq!(eta, nt.sqrt() * inv);
        assert_eq!(field(r, "converged"), "true");
    }
}

#[test]
fn complexity_study_writes_rows_and_slopes() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("o");
    run_ok(&[
        "--out",
        s(&out),
        "complexity-study",
        "--meshes",
        "6,8,10",
        "--nt",
        "4",
        "--repeats",
        "3",
    ]);
    assert_eq!(read_rows(&out.join("complexity.csv")).len(), 6);
    let slopes: serde_json::Value =
        serde_json::from_slice(&fs::read(out.join("complexity_slopes.json")).unwrap()).unwrap();
    assert_eq!(slopes.as_array().unwrap().len(), 2);
}
