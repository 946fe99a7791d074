use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const SMALL: &str = r#"
[geometry]
cells = [{ id = 0, ue_angle_deg = 0.0 }, { id = 1, ue_angle_deg = 200.0 }]

[sweep]
as_grid_deg = [10.0, 30.0]
m_grid = [4]
precoders = ["ebf"]
engines = ["analytic", "mc"]

[monte_carlo]
n_realizations = 2000
batches = 10
"#;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_spreadrate"));
    c.env_remove("SPREADRATE_WORKERS").env("RUST_LOG", "info");
    c
}

fn write_config(dir: &Path, text: &str) -> std::path::PathBuf {
    let p = dir.join("scenario.toml");
    fs::write(&p, text).unwrap();
    p
}

fn simulate(dir: &Path, extra: &[&str]) -> Output {
    let cfg = write_config(dir, SMALL);
    bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.join("out"))
        .args(extra)
        .output()
        .unwrap()
}

#[test]
fn simulate_writes_the_three_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = simulate(tmp.path(), &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    for f in ["rates.csv", "powers.csv", "extrema.csv"] {
        assert!(tmp.path().join("out").join(f).is_file(), "{f} missing");
    }
    let rates = fs::read_to_string(tmp.path().join("out/rates.csv")).unwrap();
    let data: Vec<&str> = rates.lines().filter(|l| !l.starts_with('#')).collect();
    // header plus 2 AS points x 2 engines
    assert_eq!(data.len(), 5, "{rates}");
}

#[test]
fn engines_flag_and_seed_override_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out = simulate(tmp.path(), &["--engines", "analytic", "--seed", "9"]);
    assert!(out.status.success());
    let rates = fs::read_to_string(tmp.path().join("out/rates.csv")).unwrap();
    assert!(!rates.contains(",monte-carlo,"));
    assert!(rates.contains("seed = 9"));
}

#[test]
fn worker_flag_beats_environment() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), SMALL);
    let run = |env: Option<&str>, flag: Option<&str>| {
        let mut c = bin();
        c.args(["simulate", "--config"]).arg(&cfg).arg("--out").arg(tmp.path().join("o"));
        if let Some(v) = env {
            c.env("SPREADRATE_WORKERS", v);
        }
        if let Some(v) = flag {
            c.args(["--workers", v]);
        }
        String::from_utf8(c.output().unwrap().stderr).unwrap()
    };
    assert!(run(Some("2"), None).contains("2 workers"));
    assert!(run(Some("2"), Some("3")).contains("3 workers"));
}

#[test]
fn invalid_config_exits_with_2() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), &SMALL.replace("[10.0, 30.0]", "[30.0, 10.0]"));
    let out = bin()
        .args(["simulate", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("strictly increasing"));

    let missing = bin()
        .args(["simulate", "--config", "/nonexistent/x.toml", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(missing.status.code(), Some(2));
}

#[test]
fn bundled_config_parses() {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/two_cell.toml");
    spreadrate::runner::ScenarioConfig::from_path(&path).unwrap();
}

#[test]
fn report_checks_landmarks() {
    let tmp = tempfile::tempdir().unwrap();
    let out = bin().args(["report", "fig4", "--out"]).arg(tmp.path()).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("[PASS]") && !stdout.contains("[FAIL]"), "{stdout}");
    assert!(tmp.path().join("fig4/hardening.csv").is_file());

    let bad = bin().args(["report", "fig11", "--out"]).arg(tmp.path()).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn failed_landmark_exits_with_3() {
    // the small-spread intercell bound of the fig6 preset is not met by the model
    let tmp = tempfile::tempdir().unwrap();
    let out = bin()
        .args(["report", "fig6", "--realizations", "1000", "--out"])
        .arg(tmp.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("[FAIL] fig6 EBF M=10: intercell"), "{stdout}");
    assert!(stdout.contains("[PASS] fig6 EBF M=10: self-interference"), "{stdout}");
}
