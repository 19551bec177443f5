use std::fs;
use std::process::Command;

fn evshock() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_evshock"));
    c.env_remove("RUST_BACKTRACE");
    c
}

const CONFIG: &str = r#"
[[experiment]]
id = "moving-shock"
variant = "FV1"
grids = [20, 40, 80]

[[experiment]]
id = "stationary-shock"
variant = "DG1"
degree = 2
grids = [10, 20]
"#;

#[test]
fn run_then_rates_then_snapshot() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let out = dir.path().join("out");

    let st = evshock()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--experiment", "moving-shock", "--out"])
        .arg(&out)
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let table = fs::read_to_string(out.join("results.csv")).unwrap();
    assert_eq!(table.lines().count(), 4);
    assert!(table.lines().skip(1).all(|l| l.starts_with("moving-shock,FV1,1,")));
    assert!(out.join("summary.json").exists());

    let st = evshock()
        .args(["rates", "--in"])
        .arg(out.join("results.csv"))
        .output()
        .unwrap();
    assert!(st.status.success());
    let text = String::from_utf8(st.stdout).unwrap();
    assert_eq!(text.lines().count(), 4);
    // FV1 on the moving shock converges at about half order
    let last: f64 = text
        .lines()
        .last()
        .unwrap()
        .split_whitespace()
        .nth(4)
        .unwrap()
        .parse()
        .unwrap();
    assert!((0.3..0.7).contains(&last), "{text}");

    let snaps = dir.path().join("snaps");
    let st = evshock()
        .args(["snapshot", "--config"])
        .arg(&cfg)
        .args(["--n", "16", "--time", "0.25", "--per-cell", "2", "--out"])
        .arg(&snaps)
        .output()
        .unwrap();
    assert!(st.status.success(), "{}", String::from_utf8_lossy(&st.stderr));
    let s = fs::read_to_string(snaps.join("snapshot_stationary-shock_DG1_n16.csv")).unwrap();
    assert_eq!(s.lines().count(), 1 + 33);
    assert!(snaps.join("snapshot_moving-shock_FV1_n16.csv").exists());
}

#[test]
fn bad_config_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(
        &cfg,
        "[[experiment]]\nid = \"moving-shock\"\nvariant = \"FV1\"\nalpha = 3\n",
    )
    .unwrap();
    let st = evshock().args(["run", "--config"]).arg(&cfg).output().unwrap();
    assert!(!st.status.success());
    let err = String::from_utf8_lossy(&st.stderr);
    assert!(err.contains("line 4"), "{err}");
}

#[test]
fn unknown_experiment_id_is_rejected() {
    let st = evshock()
        .args(["run", "--config", "x.toml", "--experiment", "nope"])
        .output()
        .unwrap();
    assert!(!st.status.success());
}

#[test]
fn empty_selection_fails() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    fs::write(&cfg, CONFIG).unwrap();
    let st = evshock()
        .args(["run", "--config"])
        .arg(&cfg)
        .args(["--experiment", "two-shock"])
        .output()
        .unwrap();
    assert!(!st.status.success());
    assert!(String::from_utf8_lossy(&st.stderr).contains("no experiments selected"));
}
