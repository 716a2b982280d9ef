use std::path::PathBuf;
use std::process::{Command, Output};

fn abgame(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_abgame"))
        .args(args)
        .env_remove("ABGAME_OUT")
        .output()
        .unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn scratch_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("abgame-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

#[test]
fn solve_prints_exact_values() {
    let o = abgame(&["solve", "--pegs", "2", "--colors", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("ab(2,5) = 4 (exact"), "{}", stdout(&o));

    let o = abgame(&["solve", "--pegs", "3", "--colors", "3", "--variant", "abb"]);
    assert!(stdout(&o).starts_with("abb(3,3) = 4 (exact"));

    let o = abgame(&["--format", "csv", "solve", "--pegs", "2", "--colors", "6", "--variant", "ab-fixed", "--opening", "3"]);
    let text = stdout(&o);
    let row = text.lines().nth(1).unwrap();
    assert!(row.starts_with("2,6,ab-fixed,3,"), "{row}");
}

#[test]
fn small_budget_reports_a_lower_bound() {
    let o = abgame(&["solve", "--pegs", "3", "--colors", "6", "--budget", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains(">= 2 (lower-bound-only"));
}

#[test]
fn exit_codes() {
    let bad = abgame(&["solve", "--pegs", "5", "--colors", "3"]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = abgame(&["solve", "--pegs", "2", "--colors", "5", "--opening", "2"]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = abgame(&["--workers", "0", "solve", "--pegs", "2", "--colors", "5"]);
    assert_eq!(bad.status.code(), Some(2));
    let starved = abgame(&["solve", "--pegs", "4", "--colors", "8", "--max-nodes", "10"]);
    assert_eq!(starved.status.code(), Some(3));
}

#[test]
fn table_rows() {
    let o = abgame(&["--format", "csv", "table", "--pegs", "2", "--colors", "2-7"]);
    assert_eq!(o.status.code(), Some(0));
    let values: Vec<String> = stdout(&o).lines().skip(1).map(|l| l.rsplit(',').next().unwrap().to_string()).collect();
    assert_eq!(values, ["2", "3", "3", "4", "4", "5"]);

    let o = abgame(&["table", "--pegs", "2-4", "--equal"]);
    let text = stdout(&o);
    assert!(text.lines().any(|l| l.starts_with("ab(p,p)") && l.ends_with("2   4   5")), "{text}");
}

#[test]
fn lower_and_upper_pipelines() {
    let o = abgame(&["lower", "--pegs", "3", "--r", "5", "--q", "5"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("abb(3,c) >= c+1 for c >= 5"));

    let o = abgame(&["upper", "--pegs", "2", "--colors", "5", "--q", "5", "--x", "3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("abb(2,c) <= c for c >= 5"));

    // one question short of the truth cannot be verified
    let o = abgame(&["upper", "--pegs", "2", "--colors", "5", "--q", "4", "--x", "3", "--mode", "fixed"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn manifest_and_reruns_are_reproducible() {
    let args = |dir: &PathBuf, workers: &str| -> Vec<String> {
        ["--out", dir.to_str().unwrap(), "--workers", workers, "solve", "--pegs", "3", "--colors", "6"]
            .map(String::from)
            .to_vec()
    };
    let a = scratch_dir("a");
    let b = scratch_dir("b");
    let run = |v: Vec<String>| abgame(&v.iter().map(String::as_str).collect::<Vec<_>>());
    let oa = run(args(&a, "1"));
    let ob = run(args(&b, "2"));
    assert_eq!(oa.status.code(), Some(0));
    assert_eq!(stdout(&oa), stdout(&ob));
    let tree_a = std::fs::read(a.join("tree.json")).unwrap();
    assert_eq!(tree_a, std::fs::read(b.join("tree.json")).unwrap());

    let manifest: serde_json::Value =
        serde_json::from_slice(&std::fs::read(a.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["command"], "solve");
    assert_eq!(manifest["parameters"]["pegs"], 3);
    assert!(manifest["nodes"].as_u64().unwrap() > 0);

    let again = run(args(&a, "1"));
    assert_eq!(stdout(&again), stdout(&oa));
    assert_eq!(std::fs::read(a.join("tree.json")).unwrap(), tree_a);
    let _ = std::fs::remove_dir_all(&a);
    let _ = std::fs::remove_dir_all(&b);
}
