//! End-to-end runs of the binary against committed golden outputs.
//! Set `UPDATE_GOLDEN=1` to rewrite the golden files after an intended
//! change.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_v2v-fading"))
        .args(args)
        .args(["--log-level", "warn"])
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> Output {
    let out = cli(args);
    assert_eq!(out.status.code(), Some(0), "{args:?}\n{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn assert_golden(produced: &Path, name: &str) {
    let got = std::fs::read_to_string(produced).unwrap();
    let path = golden(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::write(&path, &got).unwrap();
        return;
    }
    let want = std::fs::read_to_string(&path).unwrap_or_else(|_| panic!("missing golden file {name}"));
    assert!(got == want, "{name} differs from golden output");
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn full_pipeline_matches_golden_files() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let config = golden("config.json");
    let cfg = s(&config);

    ok(&["synth", "--config", cfg, "--out", s(&d.join("campaign.csv")), "--raw-dir", s(&d.join("raw")), "--report", s(&d.join("synth.json"))]);
    assert_golden(&d.join("campaign.csv"), "campaign.csv");
    assert_golden(&d.join("synth.json"), "synth.json");

    let raw = d.join("raw/r1");
    ok(&[
        "fuse",
        "--config", cfg,
        "--gps-tx", s(&raw.join("gps_tx.csv")),
        "--gps-rx", s(&raw.join("gps_rx.csv")),
        "--uwb", s(&raw.join("uwb.csv")),
        "--rf", s(&raw.join("rf.csv")),
        "--out", s(&d.join("processed.csv")),
        "--run-id", "r1",
    ]);
    assert_golden(&d.join("processed.csv"), "processed.csv");

    let campaign = d.join("campaign.csv");
    ok(&["fit", "--config", cfg, "--data", s(&campaign), "--family", "dsds", "--d-break", "35", "--out", s(&d.join("fit.json"))]);
    assert_golden(&d.join("fit.json"), "fit.json");

    let out = ok(&["compare", "--config", cfg, "--data", s(&campaign), "--sweep", "15:5:100", "--out", s(&d.join("bic.csv"))]);
    assert_golden(&d.join("bic.csv"), "bic.csv");
    let table = String::from_utf8(out.stdout).unwrap();
    assert!(table.starts_with("rank family"), "{table}");

    let fit = d.join("fit.json");
    ok(&["autocorr", "--config", cfg, "--data", s(&campaign), "--fit", s(&fit), "--domain", "time", "--max-lag", "3", "--out", s(&d.join("acf.csv"))]);
    assert_golden(&d.join("acf.csv"), "acf.csv");
    ok(&["autocorr", "--config", cfg, "--data", s(&campaign), "--fit", s(&fit), "--domain", "time", "--max-lag", "3", "--buckets", "--out", s(&d.join("buckets.csv"))]);
    assert_golden(&d.join("buckets.csv"), "buckets.csv");

    ok(&["sigma-bins", "--config", cfg, "--data", s(&campaign), "--fit", s(&fit), "--bins", "0:35,35:200,200:1000", "--out", s(&d.join("sigma_bins.csv"))]);
    assert_golden(&d.join("sigma_bins.csv"), "sigma_bins.csv");
}

#[test]
fn commands_are_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = golden("config.json");
    for name in ["a.csv", "b.csv"] {
        ok(&["synth", "--config", s(&cfg), "--seed", "5", "--out", s(&dir.path().join(name))]);
    }
    let a = std::fs::read(dir.path().join("a.csv")).unwrap();
    assert_eq!(a, std::fs::read(dir.path().join("b.csv")).unwrap());
    ok(&["synth", "--config", s(&cfg), "--seed", "6", "--out", s(&dir.path().join("c.csv"))]);
    assert_ne!(a, std::fs::read(dir.path().join("c.csv")).unwrap());
}

#[test]
fn invalid_rows_exit_with_code_2() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("bad.csv");
    std::fs::write(
        &data,
        "run_id,t_s,d_m,path_loss_db,censored,link,v_tx_mps,v_rx_mps\na,0,10,70,false,LOS,0,0\na,1,0,70,false,LOS,0,0\n",
    )
    .unwrap();
    let out = cli(&["fit", "--data", s(&data), "--family", "ss", "--out", s(&dir.path().join("f.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 3"));

    let out = cli(&["fit", "--data", s(&data), "--family", "dsds", "--out", s(&dir.path().join("f.json"))]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_input_exits_with_code_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = cli(&["fit", "--data", s(&dir.path().join("nope.csv")), "--family", "ss", "--out", s(&dir.path().join("f.json"))]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn per_class_needs_labels() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("u.csv");
    let mut text = String::from("run_id,t_s,d_m,path_loss_db,censored,link,v_tx_mps,v_rx_mps\n");
    for i in 0..20 {
        text.push_str(&format!("a,{i},{},{},,UNKNOWN,0,0\n", 10 + i, 70 + i));
    }
    std::fs::write(&data, text).unwrap();
    let out = cli(&["fit", "--data", s(&data), "--family", "per_class", "--out", s(&dir.path().join("f.json"))]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("UNKNOWN"));
}
