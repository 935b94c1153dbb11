use std::process::Command;

fn repeater(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_repeater"))
        .args(args)
        .env_remove("REPEATER_CONFIG_DIR")
        .output()
        .unwrap()
}

#[test]
fn usage_errors_exit_2() {
    assert_eq!(repeater(&["one-shot", "--bogus"]).status.code(), Some(2));
    assert_eq!(repeater(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        repeater(&["one-shot", "--set", "link.p=1"]).status.code(),
        Some(2)
    );
    let out = repeater(&["one-shot", "--set", "node.alpha=7"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("node.alpha"));
    assert_eq!(
        repeater(&["one-shot", "--config", "/nonexistent/x.cfg"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn runtime_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("missing").join("out.csv");
    let r = repeater(&["one-shot", "--out", out.to_str().unwrap()]);
    assert_eq!(r.status.code(), Some(1));
}

#[test]
fn one_shot_writes_report_and_summary() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("one.csv");
    let r = repeater(&[
        "one-shot",
        "--trials",
        "1e5",
        "--seed",
        "7",
        "--engine",
        "both",
        "--json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        r.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
    let stdout = String::from_utf8(r.stdout).unwrap();
    assert!(stdout.contains("fidelity_analytic") && stdout.contains("fidelity_sim"));
    let csv = std::fs::read_to_string(&out).unwrap();
    assert_eq!(csv.lines().count(), 2);
    let json: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.with_extension("json")).unwrap())
            .unwrap();
    assert_eq!(json["rows"].as_array().unwrap().len(), 1);
}

#[test]
fn config_dir_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("short.cfg"),
        "chain.links = 2\nchain.total_length_km = 40\n",
    )
    .unwrap();
    let r = Command::new(env!("CARGO_BIN_EXE_repeater"))
        .args(["one-shot", "--config", "short.cfg"])
        .env("REPEATER_CONFIG_DIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(
        r.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
    let text = String::from_utf8(r.stdout).unwrap();
    let row = text.lines().nth(1).unwrap();
    assert!(row.contains(",2,40,"), "{row}");
}

#[test]
fn sweep_with_both_engines_to_stdout() {
    let r = repeater(&[
        "sweep-lambda",
        "--engine",
        "both",
        "--trials",
        "5000",
        "--set",
        "sweep.links=2",
        "--set",
        "chain.total_length_km=40",
        "--set",
        "workload.lambda_grid=100,1000",
    ]);
    assert_eq!(
        r.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&r.stderr)
    );
    let text = String::from_utf8(r.stdout).unwrap();
    assert_eq!(text.lines().count(), 1 + 4);
    for line in text.lines().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert!(!cells[6].is_empty() && !cells[7].is_empty(), "{line}");
    }
}
