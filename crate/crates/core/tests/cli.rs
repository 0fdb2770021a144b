use std::path::PathBuf;
use std::process::{Command, Output};

fn qgelab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qgelab"))
        .args(args)
        .output()
        .unwrap()
}

fn tmp(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join(name)
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn csv_report_replays_identically() {
    let path = tmp("kostlan.csv");
    let p = path.to_str().unwrap();
    let run = qgelab(&[
        "kostlan", "--n", "2", "--trials", "400", "--seed", "3", "--out", p,
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let text = std::fs::read_to_string(&path).unwrap();
    let mut lines = text.lines();
    assert!(lines.next().unwrap().starts_with("# config={"));
    assert_eq!(
        lines.next().unwrap(),
        "name,n,ks_distance,p_value,threshold,verdict"
    );
    assert!(lines.count() > 3);

    let replay = qgelab(&["replay", p]);
    assert_eq!(replay.status.code(), Some(0), "{}", stderr(&replay));
    assert!(stderr(&replay).contains("replay: identical"));
}

#[test]
fn json_report_replays_identically() {
    let path = tmp("angles.json");
    let p = path.to_str().unwrap();
    let run = qgelab(&[
        "angles", "--n", "3", "--trials", "200", "--format", "json", "--out", p,
    ]);
    assert_eq!(run.status.code(), Some(0), "{}", stderr(&run));
    let v: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert!(v["excluded"].is_u64());
    assert_eq!(v["config"]["command"], "angles");

    let replay = qgelab(&["replay", p]);
    assert!(
        stderr(&replay).contains("replay: identical"),
        "{}",
        stderr(&replay)
    );
}

#[test]
fn stdout_output_is_thread_count_independent() {
    let args = [
        "kostlan",
        "--ensemble",
        "truncated",
        "--trunc-n",
        "2",
        "--n",
        "2",
        "--trials",
        "300",
    ];
    let one = Command::new(env!("CARGO_BIN_EXE_qgelab"))
        .args(args)
        .env("QGELAB_THREADS", "1")
        .output()
        .unwrap();
    let four = Command::new(env!("CARGO_BIN_EXE_qgelab"))
        .args(args)
        .env("QGELAB_THREADS", "4")
        .output()
        .unwrap();
    assert_eq!(one.status.code(), Some(0), "{}", stderr(&one));
    let strip = |o: &Output| {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .filter(|l| !l.starts_with('#'))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_eq!(strip(&one), strip(&four));
}

#[test]
fn failing_threshold_sets_exit_code() {
    let run = qgelab(&[
        "kostlan",
        "--n",
        "2",
        "--trials",
        "300",
        "--threshold",
        "sum=1e-9",
    ]);
    assert_eq!(run.status.code(), Some(1), "{}", stderr(&run));
    assert!(stderr(&run).contains("FAIL"));
}

#[test]
fn bad_arguments_exit_with_2() {
    let run = qgelab(&["highpowers", "--n", "3", "--m", "4", "--trials", "10"]);
    assert_eq!(run.status.code(), Some(2));
    assert!(stderr(&run).contains("error"));
    let run = qgelab(&["kostlan", "--threshold", "novalue"]);
    assert_eq!(run.status.code(), Some(2));
    let run = qgelab(&["replay", tmp("missing.csv").to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(2));
}
