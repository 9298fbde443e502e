use std::process::Command;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_bandit-lab"));
    c.env("BANDIT_LAB_THREADS", "2");
    c
}

#[test]
fn oracle_sweep_and_slope() {
    let dir = std::env::temp_dir().join(format!("bandit-lab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let cfg = dir.join("config.json");
    std::fs::write(&cfg, r#"{"budget": 2, "grid_m": 51, "delta": 0.04}"#).unwrap();

    let table = dir.join("table.json");
    let out = bin()
        .args(["oracle", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(&table)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).starts_with("V*_δ(0,1,2) = "));

    let csv = dir.join("sweep.csv");
    let out = bin()
        .args([
            "sweep",
            "--axis",
            "n",
            "--values",
            "300,900,2700",
            "--runs",
            "2",
            "--algo",
            "ucb-pvi-hf",
            "--config",
        ])
        .arg(&cfg)
        .arg("--out")
        .arg(&csv)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert_eq!(std::fs::read_to_string(&csv).unwrap().lines().count(), 7);

    let out = bin().args(["slope", "--in"]).arg(&csv).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(String::from_utf8_lossy(&out.stdout).contains("slope "));

    let out = bin()
        .args(["run", "--algo", "sl", "--n", "100", "--config"])
        .arg(&cfg)
        .arg("--table")
        .arg(&table)
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8_lossy(&out.stdout).lines().count(), 2);
}

#[test]
fn bad_thread_setting_is_reported() {
    let out = bin()
        .env("BANDIT_LAB_THREADS", "zero")
        .args(["slope", "--in", "/nonexistent.csv"])
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("BANDIT_LAB_THREADS"));
}
