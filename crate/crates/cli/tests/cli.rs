use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

const DEMO: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/fixtures/demo");

fn hydrobal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hydrobal"))
        .args(args)
        .output()
        .expect("spawn hydrobal")
}

fn copy_demo(dir: &Path) -> PathBuf {
    for e in fs::read_dir(DEMO).unwrap() {
        let e = e.unwrap();
        fs::copy(e.path(), dir.join(e.file_name())).unwrap();
    }
    dir.join("config.toml")
}

fn files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<_> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (
                e.file_name().to_string_lossy().into_owned(),
                fs::read(e.path()).unwrap(),
            )
        })
        .collect();
    v.sort();
    v
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn demo_run_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    let out = hydrobal(&["--out", s(&a), "run"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("scenario"), "{stdout}");
    assert!(hydrobal(&["--out", s(&b), "run"]).status.success());
    let fa = files(&a);
    assert_eq!(fa, files(&b));
    for name in [
        "scenarios.csv",
        "commitment.csv",
        "mc_plant.csv",
        "mc_portfolio.csv",
        "delta.csv",
        "report.txt",
    ] {
        assert!(fa.iter().any(|(n, _)| n == name), "missing {name}");
    }
}

#[test]
fn config_file_run_writes_next_to_config() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = copy_demo(tmp.path());
    let out = hydrobal(&["--config", s(&cfg), "day-ahead"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(tmp.path().join("out/commitment.csv")).unwrap();
    let rows: Vec<&str> = text.lines().skip(1).collect();
    // two plants and the wind farm
    assert_eq!(rows.len(), 24 * 3);
    assert!(
        rows.iter()
            .filter(|r| r.split(',').nth(1) == Some("wind"))
            .count()
            == 24
    );
}

#[test]
fn validate_succeeds_without_writing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = copy_demo(tmp.path());
    let out = hydrobal(&["--config", s(&cfg), "validate"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn missing_inflow_file_is_io_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = copy_demo(tmp.path());
    fs::remove_file(tmp.path().join("inflow_late.csv")).unwrap();
    let out = hydrobal(&["--config", s(&cfg), "run"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("inflow_late.csv"));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn empty_price_file_is_validation_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = copy_demo(tmp.path());
    fs::write(tmp.path().join("spot.csv"), "step,value\n").unwrap();
    let out = hydrobal(&["--config", s(&cfg), "run"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!tmp.path().join("out").exists());
}

#[test]
fn seeded_instance_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hydrobal(&["--seed", "7", "--out", s(tmp.path()), "run"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(tmp.path().join("scenarios.csv").exists());
}

#[test]
fn mps_dump_writes_models() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hydrobal(&["--mps-dump", "--out", s(tmp.path()), "reforecast"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    for name in ["day_ahead.mps", "reforecast.mps"] {
        let text = fs::read_to_string(tmp.path().join(name)).unwrap();
        assert!(text.starts_with("NAME"), "{name}");
        assert!(text.trim_end().ends_with("ENDATA"));
    }
    assert!(!tmp.path().join("rebalance_plant.mps").exists());
}

#[test]
fn portfolio_rebalance_writes_marginal_costs() {
    let tmp = tempfile::tempdir().unwrap();
    let out = hydrobal(&["--out", s(tmp.path()), "rebalance", "--mode", "portfolio"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(tmp.path().join("mc_portfolio.csv")).unwrap();
    assert_eq!(text.lines().next(), Some("step,entity,mc_eur_mwh"));
    assert_eq!(text.lines().count(), 1 + 24);
}
