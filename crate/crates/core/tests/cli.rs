use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dagram(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dagram")).args(args).env("DAGRAM_LOG", "off").output().unwrap()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("data").join(name).display().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn roundtrip_succeeds_on_the_bundled_corpus() {
    let o = dagram(&["roundtrip", "--corpus", &data("corpus.penman")]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("F1=1.000"));
}

#[test]
fn eval_against_itself_is_perfect() {
    let corpus = data("corpus.penman");
    let o = dagram(&["eval", "--pred", &corpus, "--gold", &corpus, "--restarts", "4", "--seed", "3", "--fine-grained"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    assert!(out.contains("\nF1=1.000\n"), "{out}");
    assert!(out.contains("nouns.F1=1.000"));
}

#[test]
fn extract_then_stats() {
    let dir = tempfile::tempdir().unwrap();
    let grammar = dir.path().join("g.txt");
    let o = dagram(&["extract", "--corpus", &data("corpus.penman"), "--out", s(&grammar)]);
    assert_eq!(o.status.code(), Some(0));
    let o = dagram(&["stats", s(&grammar)]);
    let lines: Vec<String> = stdout(&o).lines().map(str::to_string).collect();
    assert_eq!(lines[0].split_whitespace().collect::<Vec<_>>(), ["#inst.", "#frags", "avg.", "rank"]);
    assert_eq!(lines[1].split_whitespace().next(), Some("239"));

    let a = dagram(&["sample", "--grammar", s(&grammar), "--seed", "5", "--count", "3", "--depth-cap", "6"]);
    let b = dagram(&["sample", "--grammar", s(&grammar), "--seed", "5", "--count", "3", "--depth-cap", "6"]);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    assert!(!a.stdout.is_empty());
}

#[test]
fn convert_both_ways() {
    let dir = tempfile::tempdir().unwrap();
    let graphs = dir.path().join("c.penman");
    let clauses = dir.path().join("c.clauses");
    assert_eq!(dagram(&["convert", "--to-graph", "--input", &data("corpus.clauses"), "--out", s(&graphs)]).status.code(), Some(0));
    assert_eq!(dagram(&["convert", "--to-boxes", "--input", s(&graphs), "--out", s(&clauses)]).status.code(), Some(0));
    let text = std::fs::read_to_string(&clauses).unwrap();
    assert!(text.contains("OP IMP"));
    assert_eq!(dagram(&["convert", "--input", s(&graphs)]).status.code(), Some(1));
}

#[test]
fn train_then_parse() {
    let dir = tempfile::tempdir().unwrap();
    let model: PathBuf = dir.path().join("m.json");
    let config = dir.path().join("run.toml");
    let run = format!(
        "corpus = {:?}\nmodel = {:?}\n\n[train]\nepochs = 2\nseed = 4\n\n[train.dims]\nword = 8\npretrained = 4\nfeature = 4\nhidden = 8\nfragment = 8\n",
        data("toy.corpus"),
        s(&model)
    );
    std::fs::write(&config, run).unwrap();
    let o = dagram(&["train", "--config", s(&config)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("epochs=2"));

    let parsed = dir.path().join("p.penman");
    let o = dagram(&["parse", "--model", s(&model), "--input", &data("toy.corpus"), "--out", s(&parsed)]);
    assert_eq!(o.status.code(), Some(0));
    let o = dagram(&["eval", "--pred", s(&parsed), "--gold", s(&parsed)]);
    assert!(stdout(&o).contains("pairs=20\n"));
}

#[test]
fn exit_codes() {
    assert_eq!(dagram(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(dagram(&["eval", "--pred", "x"]).status.code(), Some(1));
    assert_eq!(dagram(&["--help"]).status.code(), Some(0));
    assert_eq!(dagram(&["stats", "/definitely/not/here"]).status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "corpus = \"a\"\nmodel = \"b\"\nlearning_rate = 1\n").unwrap();
    assert_eq!(dagram(&["train", "--config", s(&bad)]).status.code(), Some(2));

    let cyclic = dir.path().join("cyclic.penman");
    std::fs::write(&cyclic, "(x1/a :R (x2/b :R x1))\n").unwrap();
    let o = dagram(&["roundtrip", "--corpus", s(&cyclic)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cycle"));
}

#[test]
fn lengths_must_agree() {
    let dir = tempfile::tempdir().unwrap();
    let one = dir.path().join("one.penman");
    std::fs::write(&one, "(x1/a)\n").unwrap();
    assert_eq!(dagram(&["eval", "--pred", s(&one), "--gold", &data("corpus.penman")]).status.code(), Some(2));
}
