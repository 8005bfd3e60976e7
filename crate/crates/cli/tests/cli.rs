use std::path::PathBuf;
use std::process::{Command, Output};

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../core/corpus").join(format!("{name}.pl"))
}

fn termpred(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_termpred"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn analyze(file: &PathBuf, rest: &[&str]) -> Output {
    let mut args = vec!["analyze", file.to_str().unwrap()];
    args.extend_from_slice(rest);
    termpred(&args)
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).expect("valid JSON")
}

fn scratch(src: &str) -> tempfile::NamedTempFile {
    let f = tempfile::Builder::new().suffix(".pl").tempfile().unwrap();
    std::fs::write(f.path(), src).unwrap();
    f
}

#[test]
fn subset1_is_predicted_non_terminating() {
    let out = analyze(&corpus("p4"), &["--query", "subset1(o,i)"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verdict: predicted-non-terminating"));
}

#[test]
fn negation_goal_terminates() {
    let out = analyze(&corpus("p0"), &["--goal", "p"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("verdict: terminating\n"));
}

#[test]
fn flounder_exits_2() {
    let f = scratch("p(X) :- \\+ q(Y).\nq(a).\n");
    let out = analyze(&f.path().to_path_buf(), &["--query", "p(i)"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("floundering"));
}

#[test]
fn parse_error_exits_2() {
    let f = scratch("p(X :- q.\n");
    let out = analyze(&f.path().to_path_buf(), &["--query", "p(i)"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
}

#[test]
fn goal_rejects_input_modes() {
    let out = analyze(&corpus("p1"), &["--goal", "p(i)"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn exactly_one_target() {
    assert_eq!(analyze(&corpus("p1"), &[]).status.code(), Some(2));
    let both = analyze(&corpus("p1"), &["--query", "p(i)", "--all-modes"]);
    assert_eq!(both.status.code(), Some(2));
}

#[test]
fn resource_limit_exits_3() {
    let out = analyze(&corpus("p3"), &["--query", "mult(i,o,o)", "--max-nodes", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("verdict: resource-exceeded"));
}

#[test]
fn text_and_json_agree() {
    for (prog, q) in [("p1", "p(i)"), ("p2", "append(o,i,o)"), ("p6", "f(i)"), ("p0", "p")] {
        let text = analyze(&corpus(prog), &["--query", q]);
        let js = analyze(&corpus(prog), &["--query", q, "--format", "json"]);
        let v = json(&js);
        let verdict = v["verdict"].as_str().unwrap();
        assert!(stdout(&text).contains(&format!("verdict: {verdict}\n")), "{prog} {q}");
        for key in ["query", "r", "pruning", "nodeCount", "elapsedMs", "witness", "cuts", "prunes"] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
    }
}

#[test]
fn options_reach_the_predictor() {
    let out = analyze(&corpus("p6"), &["--query", "f(i)", "--pruning", "none", "-r", "3", "--format", "json"]);
    let v = json(&out);
    assert_eq!(v["pruning"], "none");
    assert_eq!(v["cuts"].as_array().unwrap().len(), 20);
    let out = analyze(&corpus("p1"), &["--query", "p(i)", "-r", "4", "--format", "json"]);
    assert_eq!(json(&out)["r"], 4);
}

#[test]
fn trace_writes_dot_and_json() {
    let dir = tempfile::tempdir().unwrap();
    let dot = dir.path().join("p1.dot");
    let out = analyze(&corpus("p1"), &["--query", "p(i)", "--trace", dot.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&dot).unwrap();
    assert!(text.starts_with("digraph"));
    assert!(text.contains("cut C_2"));

    let js = dir.path().join("p1.json");
    analyze(&corpus("p1"), &["--query", "p(i)", "--trace", js.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&js).unwrap()).unwrap();
    assert_eq!(v["status"], "exhausted");
    assert_eq!(v["nodes"][4]["cuts"][0], "C_2");
}

#[test]
fn all_modes_table_tags_inferred_entries() {
    let out = analyze(&corpus("p2"), &["--all-modes"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("append(o,i,o)"));
    assert!(text.contains("inferred from"));
    assert_eq!(text.lines().count(), 1 + 7);

    let v = json(&analyze(&corpus("p2"), &["--all-modes", "--format", "json"]));
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 7);
    let row = rows.iter().find(|r| r["query"] == "append(o,i,o)").unwrap();
    assert_eq!(row["result"]["kind"], "computed");
    assert_eq!(row["result"]["verdict"], "predicted-non-terminating");
    assert!(rows.iter().any(|r| r["result"]["kind"] == "inferred"));
}
