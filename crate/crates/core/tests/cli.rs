use std::fs;

use storl::cli::run_with;

fn args<'a>(dir: &'a str, extra: &[&'a str]) -> Vec<&'a str> {
    let mut v = vec!["storl", "--out-dir", dir];
    v.extend_from_slice(extra);
    v
}

#[test]
fn unknown_task_and_bad_flags_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(run_with(args(d, &["--task", "nowhere", "plan"])), 1);
    assert_eq!(run_with(args(d, &["--task", "umaze", "fly"])), 1);
    assert_eq!(run_with(args(d, &["--task", "umaze", "--iterations", "many", "train"])), 1);
}

#[test]
fn missing_inputs_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(run_with(args(d, &["--task", "fourroom", "augment"])), 1);
    assert_eq!(run_with(args(d, &["--task", "fourroom", "eval"])), 1);
}

#[test]
fn plan_then_data_then_augment() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let base = ["--task", "fourroom", "--dataset-size", "10"];
    for cmd in ["plan", "gen-data", "augment"] {
        let mut a = base.to_vec();
        a.push(cmd);
        assert_eq!(run_with(args(d, &a)), 0, "{cmd}");
    }
    let names: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    for want in ["fourroom.schedule.toml", "fourroom.seed0.dataset.csv", "fourroom.seed0.shaped.csv"] {
        assert!(names.iter().any(|n| n == want), "{want} missing from {names:?}");
    }
}

#[test]
fn live_planner_without_endpoint_exits_one() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(run_with(args(d, &["--task", "umaze", "--planner-mode", "live", "plan"])), 1);
}

#[test]
fn schedule_for_another_task_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let sched = dir.path().join("shared.schedule.toml");
    let s = sched.to_str().unwrap();
    assert_eq!(run_with(args(d, &["--task", "umaze", "--schedule", s, "plan"])), 0);
    assert_eq!(run_with(args(d, &["--task", "medium", "--dataset-size", "4", "gen-data"])), 0);
    assert_eq!(run_with(args(d, &["--task", "medium", "--schedule", s, "augment"])), 1);
}
