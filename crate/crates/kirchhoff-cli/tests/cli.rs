use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kirchhoff")).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("kirchhoff-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn config_prints_the_triplet() {
    let o = run(&["config", "--m", "2", "--p", "3"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("alpha = (2,5,7,12)"), "{text}");
    assert!(text.contains("detA = 16428"));
}

#[test]
fn bad_input_exits_with_one() {
    assert_eq!(run(&["config", "--m", "3", "--p", "3"]).status.code(), Some(1));
    assert_eq!(run(&["bogus"]).status.code(), Some(1));
    assert_eq!(run(&["config", "--tol", "-1"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = scratch("toml");
    let file = dir.join("run.toml");
    std::fs::write(&file, "m = 2\np = 3\nslow-time = 0.5\n").unwrap();
    let o = run(&["config", "--config", file.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("detA = 16428"));
    let o = run(&["config", "--config", file.to_str().unwrap(), "--p", "25"]);
    assert!(stdout(&o).contains("alpha = (2,27,29,56)"), "{}", stdout(&o));
    std::fs::write(&file, "m = 2\nunknown = 1\n").unwrap();
    assert_eq!(run(&["config", "--config", file.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn simulate_effective_writes_a_series() {
    let dir = scratch("eff");
    let o = run(&["simulate-effective", "--m", "2", "--p", "3", "--slow-time", "5", "--out", dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = std::fs::read_to_string(dir.join("effective.csv")).unwrap();
    assert!(csv.lines().count() > 10);
}

#[test]
fn melnikov_reports_a0() {
    let o = run(&["melnikov"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("0.1456559"), "{text}");
}
