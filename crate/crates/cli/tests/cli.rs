//! End-to-end runs of the `dynsub` binary.

use std::path::Path;
use std::process::{Command, Output};

fn dynsub(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dynsub")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn run_prints_csv_and_writes_sidecar() {
    let out = dynsub(&["run", "--algorithm", "ladder", "--k", "1", "--objective", "modular:1,2,3,4"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("t,op,ground,value,opt,ratio,q_round,q_total"));
    for line in lines {
        assert_eq!(line.split(',').nth(5), Some("1"), "{line}");
    }

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "algorithm = card\nk = 2\nopt = auto\nobjective = modular:5,1,4\n").unwrap();
    let report = dir.path().join("out.json");
    let out = dynsub(&["run", "--config", p(&cfg), "--set", "epsilon=0.5", "--out", p(&report), "--format", "json"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let records: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(records.as_array().unwrap().len(), 3);
    let sidecar = std::fs::read_to_string(dir.path().join("out.json.config")).unwrap();
    assert!(sidecar.contains("epsilon = 0.5"));
    assert!(sidecar.contains("algorithm = card"));
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&dynsub(&["run", "--k", "x"])), 1);
    assert_eq!(code(&dynsub(&["frobnicate"])), 1);
    assert_eq!(code(&dynsub(&["run", "--algorithm", "card"])), 1);
    assert_eq!(code(&dynsub(&["run", "--set", "nonsense"])), 1);
    assert_eq!(code(&dynsub(&["run", "--config", "/nonexistent/run.cfg"])), 1);
    assert_eq!(code(&dynsub(&["--help"])), 0);
    assert_eq!(code(&dynsub(&["--version"])), 0);
}

#[test]
fn deletions_into_insertion_only_algorithm_fail_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    let stream = dir.path().join("s.txt");
    std::fs::write(&stream, "stream v1\nI 0\nD 0\n").unwrap();
    let arg = format!("file:{}", p(&stream));
    let out = dynsub(&["run", "--algorithm", "ladder", "--k", "1", "--objective", "modular:1", "--stream", &arg]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("insertion-only"));
}

#[test]
fn generated_bipartite_instance_verifies_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let stream = dir.path().join("b.txt");
    let out = dynsub(&["gen-stream", "--family", "bipartite", "--m", "2", "--seed", "9", "--out", p(&stream)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&stream).unwrap();
    assert!(text.starts_with("stream v1\n"));
    assert_eq!(text.lines().count(), 1 + 144);
    let desc = dir.path().join("b.txt.instance.json");

    let out = dynsub(&["verify-hard", "--instance", p(&desc), "--trials", "500", "--samples", "2000"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));
    assert!(stdout(&out).lines().all(|l| l.starts_with("PASS ")));

    let objective = format!("hard:{}", p(&desc));
    let file = format!("file:{}", p(&stream));
    let out = dynsub(&[
        "run", "--algorithm", "offline-greedy", "--k", "25", "--objective", &objective, "--stream", &file,
        "--set", "opt_mode=greedy-bound", "--checkpoint", "at-end",
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 2);
}

#[test]
fn generated_tree_instance_verifies() {
    let dir = tempfile::tempdir().unwrap();
    let stream = dir.path().join("t.txt");
    let desc = dir.path().join("tree.json");
    let out = dynsub(&[
        "gen-stream", "--family", "tree", "--arities", "3,2,1", "--k", "3", "--explore", "2", "--seed", "1",
        "--out", p(&stream), "--descriptor", p(&desc),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let out = dynsub(&["verify-hard", "--instance", p(&desc), "--trials", "300", "--samples", "20000"]);
    assert_eq!(code(&out), 0, "{}", stdout(&out));

    let out = dynsub(&["gen-stream", "--family", "tree", "--preset-n", "16", "--levels", "2", "--k", "2", "--out", p(&stream)]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(code(&dynsub(&["gen-stream", "--family", "tree", "--out", p(&stream)])), 1);
    assert_eq!(code(&dynsub(&["gen-stream", "--family", "ring", "--out", p(&stream)])), 1);
}

#[test]
fn invariant_failures_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let stream = dir.path().join("b.txt");
    assert_eq!(code(&dynsub(&["gen-stream", "--family", "bipartite", "--m", "1", "--out", p(&stream)])), 0);
    let desc = dir.path().join("b.txt.instance.json");
    let original: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&desc).unwrap()).unwrap();

    let mut shrunk = original.clone();
    shrunk["eps"] = serde_json::json!(0.02);
    let path = dir.path().join("shrunk.json");
    std::fs::write(&path, shrunk.to_string()).unwrap();
    let out = dynsub(&["verify-hard", "--instance", p(&path), "--trials", "1000", "--samples", "1000"]);
    assert_eq!(code(&out), 2);
    assert!(stdout(&out).contains("FAIL matched-pair-value"));

    let mut invalid = original;
    invalid["eps2"] = serde_json::json!(0.95);
    invalid["phi_alpha"] = serde_json::json!(5.0);
    let path = dir.path().join("invalid.json");
    std::fs::write(&path, invalid.to_string()).unwrap();
    assert_eq!(code(&dynsub(&["verify-hard", "--instance", p(&path)])), 1);

    let out = dynsub(&["run", "--algorithm", "ladder", "--k", "1", "--objective", "modular:1,2", "--set", "opt_mode=known:0"]);
    assert_eq!(code(&out), 2);
    assert!(String::from_utf8_lossy(&out.stderr).contains("invariant"));
}

#[test]
fn bench_sweeps_in_parallel() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("bench");
    let out = dynsub(&[
        "bench", "--algorithm", "ladder", "--objective", "modular:1,2,3,4,5", "--sweep", "k=1,2,3",
        "--out-dir", p(&out_dir),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = stdout(&out);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows[0], "k,rounds,value,min_ratio,q_total,q_per_round");
    assert_eq!(rows.len(), 4);
    assert!(rows[1].starts_with("1,5,5,"));
    for k in 1..=3 {
        assert!(out_dir.join(format!("k={k}.csv")).exists());
        assert!(out_dir.join(format!("k={k}.csv.config")).exists());
    }
    assert_eq!(code(&dynsub(&["bench", "--algorithm", "ladder", "--objective", "modular:1", "--sweep", "k"])), 1);
}
