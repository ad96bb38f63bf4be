use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn tml(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tml")).args(args).current_dir(dir).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn generated_files_validate_and_classify() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    for (time, class) in [("cone", "big-bang"), ("set-cone", "future-developed")] {
        let o = tml(&["gen", "--model", "graph", "--time", time, "--s", "2", "--n", "5", "--seed", "9", "-o", "g.json"], p);
        assert!(o.status.success(), "{}", stderr(&o));
        assert_eq!(tml(&["validate", "g.json"], p).status.code(), Some(0));
        let o = tml(&["classify", "g.json"], p);
        assert!(stdout(&o).contains(&format!("class: {class}")), "{}", stdout(&o));
    }
}

#[test]
fn untimed_files_classify_with_zero_time() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    tml(&["gen", "--model", "euclidean", "--dim", "3", "--n", "2", "--seed", "1", "-o", "e.json"], p);
    let o = tml(&["classify", "e.json"], p);
    assert!(o.status.success());
    assert!(stdout(&o).contains("class: future-developed"));
}

#[test]
fn invalid_file_names_the_entry_pair() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    fs::write(p.join("bad.json"), r#"{"name": "q", "labels": ["a", "b"], "d": [[0, 1], [2, 0]]}"#).unwrap();
    let o = tml(&["validate", "bad.json"], p);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("d[0][1] != d[1][0]"), "{}", stderr(&o));

    fs::write(p.join("broken.json"), "{").unwrap();
    assert_eq!(tml(&["validate", "broken.json"], p).status.code(), Some(1));
    assert_eq!(tml(&["validate", "missing.json"], p).status.code(), Some(1));
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    assert_eq!(tml(&["dist", "--kind", "nope", "a", "b"], p).status.code(), Some(2));
    let o = tml(&["campaign", "--suite", "order", "--trials", "1", "--nmax", "9", "--seed", "0", "--out", "r.csv"], p);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn dist_reports_interval_and_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let two = r#"{"name": "two", "labels": ["a", "b"], "d": [[0, 1], [1, 0]], "tau": [0, 1]}"#;
    fs::write(p.join("two.json"), two).unwrap();
    fs::write(p.join("pt.json"), r#"{"name": "pt", "labels": ["p"], "d": [[0]], "tau": [0]}"#).unwrap();

    let o = tml(&["dist", "--kind", "tau-h", "two.json", "pt.json", "--json"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["upper"], 1.0);
    assert_eq!(v["exact"], true);
    assert_eq!(v["certificate"], serde_json::json!([["a", "p"], ["b", "p"]]));

    let o = tml(&["dist", "--kind", "bb-gh", "two.json", "pt.json"], p);
    let text = stdout(&o);
    assert!(text.contains("lower: 0.5") && text.contains("upper: 1"), "{text}");
    assert!(text.contains("exact: false"));

    let o = tml(&["dist", "--kind", "pt-gh", "--base-a", "b", "two.json", "pt.json"], p);
    assert!(stdout(&o).contains("basepoints: (b, p)"));
    let o = tml(&["dist", "--kind", "pt-gh", "--base-a", "zz", "two.json", "pt.json"], p);
    assert_eq!(o.status.code(), Some(2));

    let o = tml(&["dist", "--kind", "tau-h", "--local-search", "50", "two.json", "pt.json"], p);
    assert!(stdout(&o).contains("upper: 1"));
}

#[test]
fn campaign_writes_report_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let o = tml(&["campaign", "--suite", "bb", "--trials", "3", "--nmax", "3", "--seed", "4", "--out", "r.csv"], p);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("bb: 3/3 pass"));
    let csv = fs::read_to_string(p.join("r.csv")).unwrap();
    assert_eq!(csv.lines().count(), 4);
    assert!(csv.lines().nth(1).unwrap().contains("worked-example"));

    let o = tml(
        &["campaign", "--suite", "fd", "--trials", "2", "--nmax", "3", "--seed", "4", "--out", "r.jsonl", "--format", "jsonl"],
        p,
    );
    assert!(o.status.success());
    let jsonl = fs::read_to_string(p.join("r.jsonl")).unwrap();
    assert_eq!(jsonl.lines().count(), 2);
}

#[test]
fn too_small_budget_is_an_assertion_failure() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["campaign", "--suite", "order", "--trials", "5", "--nmax", "4", "--seed", "1", "--budget", "1", "--out", "r.csv"];
    let o = tml(&args, dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("budget"));
}

#[test]
fn sequence_table() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    tml(&["gen", "--model", "euclidean", "--time", "cone", "--n", "3", "--seed", "2", "-o", "base.json"], p);
    for family in ["perturb-geometric", "collapse-time", "refine-bb-cone"] {
        let o = tml(
            &["sequence", "--family", family, "--base", "base.json", "--length", "4", "--rate", "0.5", "--seed", "1", "--out", "s.csv", "--kinds", "gh,tau-h"],
            p,
        );
        assert!(o.status.success(), "{family}: {}", stderr(&o));
        let table = fs::read_to_string(p.join("s.csv")).unwrap();
        assert_eq!(table.lines().count(), 5);
        assert!(table.starts_with("j,n,class,declared_class,gh_lower"));
    }
    let o = tml(&["sequence", "--family", "perturb-geometric", "--base", "base.json", "--length", "3", "--rate", "1.5", "--seed", "1", "--out", "s.csv"], p);
    assert_eq!(o.status.code(), Some(2));
}
