use std::path::PathBuf;
use std::process::{Command, Output};

fn qpattern(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpattern"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn falcon() -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../devices/falcon27.json")
        .display()
        .to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(qpattern(&[]).status.code(), Some(1));
    assert_eq!(qpattern(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(qpattern(&["collisions"]).status.code(), Some(1));
    assert_eq!(qpattern(&["--help"]).status.code(), Some(0));
}

#[test]
fn data_errors_exit_two() {
    let o = qpattern(&["collisions", "--device", "/nonexistent/device.json"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).starts_with("error:"));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{ not json").unwrap();
    let o = qpattern(&["map", "--in", bad.to_str().unwrap(), "--format", "csv"]);
    assert_eq!(o.status.code(), Some(2));
    let o = qpattern(&["circuit", "--device", &falcon(), "--pattern", "nonsense", "--tau", "1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn too_large_cluster_exits_three() {
    let o = qpattern(&["circuit", "--device", &falcon(), "--pattern", "blank_plus", "--tau", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"device": "{}", "patterns": ["blank_plus"], "tau_grid_us": [1.0], "shots": 10, "seed": 0, "output_dir": "out"}}"#,
            falcon()
        ),
    )
    .unwrap();
    let o = qpattern(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn collisions_lists_flagged_triplets() {
    let o = qpattern(&["collisions", "--device", &falcon()]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("type1 (24,25,22) 7.8"), "{text}");
    assert!(text.contains("type2 (2,3,5) 0.3"), "{text}");
}

#[test]
fn run_then_analyze_and_render() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("suite.json");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"device": "{}", "patterns": ["blank_one", "checkerboard_one.A"], "tau_grid_us": [5.0, 40.0, 75.0], "shots": 200, "seed": 9, "output_dir": "out"}}"#,
            falcon()
        ),
    )
    .unwrap();
    let o = qpattern(&["--sequential", "run", "--config", cfg.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = dir.path().join("out");
    for f in ["counts.txt", "analysis.json", "manifest.json"] {
        assert!(out.join(f).exists(), "{f}");
    }

    let map = out.join("maps/blank_one_checkerboard_one.A.json");
    let o = qpattern(&["map", "--in", map.to_str().unwrap(), "--format", "csv"]);
    assert!(o.status.success());
    let csv = stdout(&o);
    assert_eq!(csv.lines().next(), Some("qubit,x,y,delta_f,compared"));
    assert_eq!(csv.lines().count(), 28);
    let svg = dir.path().join("map.svg");
    let o = qpattern(&["map", "--in", map.to_str().unwrap(), "--format", "svg", "--out", svg.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&svg).unwrap().contains("<svg"));

    let report = dir.path().join("replay.json");
    let o = qpattern(&[
        "analyze",
        "--counts",
        out.join("counts.txt").to_str().unwrap(),
        "--device",
        &falcon(),
        "--out",
        report.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(
        std::fs::read_to_string(&report).unwrap().trim_end(),
        std::fs::read_to_string(out.join("analysis.json")).unwrap().trim_end()
    );
}

#[test]
fn ghz_study_prints_one_row_per_length() {
    let o = qpattern(&[
        "ghz-study", "--device", &falcon(), "--lengths", "2..4", "--samples", "3", "--shots", "200", "--tau", "5",
    ]);
    assert!(o.status.success());
    let rows: Vec<String> = stdout(&o).lines().filter(|l| !l.starts_with('#')).map(String::from).collect();
    assert_eq!(rows.len(), 3);
    assert!(rows[0].starts_with("2 3 "));
}

#[test]
fn circuit_text_lists_gates() {
    let o = qpattern(&["circuit", "--device", &falcon(), "--pattern", "checkerboard_one.A", "--tau", "2"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("X"));
    assert!(text.contains("MEASURE"));
}
