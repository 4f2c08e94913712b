use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use edt_miner_core::rules::{parse_rule_text, ConjunctiveRule, RuleSet, RULESET_VERSION};
use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_edt-miner");

fn run(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .output()
        .expect("spawn edt-miner")
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

/// Generates a log and mines it; returns the output directory.
fn generate_and_mine(dir: &Path, approach: &str, seed: &str) {
    let log = dir.join("log.xes");
    ok(&[
        "generate",
        "--n",
        "2000",
        "--seed",
        seed,
        "--out",
        p(&log),
        "--ground-truth",
        p(&dir.join("gt.json")),
    ]);
    ok(&[
        "mine",
        "--log",
        p(&log),
        "--result-attr",
        "result",
        "--target-class",
        "OK",
        "--approach",
        approach,
        "--split",
        "0.9",
        "--alias",
        "ranges=range",
        "--alias",
        "measured_values=meas",
        "--out-dir",
        p(&dir.join(approach)),
    ]);
}

fn fixture_rules(dir: &Path, class: &str, text: &str) -> String {
    let rs = RuleSet {
        version: RULESET_VERSION,
        approach: "edt".into(),
        class: class.into(),
        eq_epsilon: 0.0,
        rules: vec![ConjunctiveRule {
            conditions: parse_rule_text(text).unwrap(),
            class: class.into(),
            support: 1,
            covered: 1,
            training_accuracy: 1.0,
            leaf: 0,
        }],
        dominant: Some(0),
        warnings: Vec::new(),
    };
    let path = dir.join("rules.json");
    fs::write(&path, rs.to_json()).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn generate_is_byte_deterministic() {
    let dir = TempDir::new().unwrap();
    let a = dir.path().join("a.xes");
    let b = dir.path().join("b.xes");
    for out in [&a, &b] {
        ok(&["generate", "--n", "300", "--seed", "5", "--out", p(out)]);
    }
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert!(dir.path().join("a.xes.manifest.json").exists());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = TempDir::new().unwrap();
    let log = dir.path().join("log.xes");
    assert_eq!(
        run(&["generate", "--n", "0", "--out", p(&log)])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(run(&["frobnicate"]).status.code(), Some(2));
    assert_eq!(
        run(&["render", "--tree", p(&dir.path().join("none.json"))])
            .status
            .code(),
        Some(2)
    );

    ok(&["generate", "--n", "50", "--out", p(&log)]);
    let unknown = run(&[
        "mine",
        "--log",
        p(&log),
        "--result-attr",
        "result",
        "--target-class",
        "OK",
        "--approach",
        "forest",
        "--out-dir",
        p(&dir.path().join("m")),
    ]);
    assert_eq!(unknown.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&unknown.stderr).contains("bdt, edt"));
}

#[test]
fn domain_errors_exit_with_one() {
    let dir = TempDir::new().unwrap();
    let log = dir.path().join("log.xes");
    ok(&["generate", "--n", "50", "--out", p(&log)]);
    let out = run(&[
        "mine",
        "--log",
        p(&log),
        "--result-attr",
        "result",
        "--target-class",
        "OK",
        "--out-dir",
        p(&dir.path().join("m")),
    ]);
    assert!(out.status.success());
    let missing = run(&[
        "mine",
        "--log",
        p(&log),
        "--result-attr",
        "verdict",
        "--target-class",
        "OK",
        "--out-dir",
        p(&dir.path().join("m2")),
    ]);
    assert_eq!(missing.status.code(), Some(1));
}

#[test]
fn synthetic_rows_match_the_results_table() {
    let dir = TempDir::new().unwrap();
    generate_and_mine(dir.path(), "edt", "7");
    generate_and_mine(dir.path(), "bdt", "7");
    let gt = dir.path().join("gt.json");
    for (approach, label, row) in [
        ("edt", "EDT, Synthetic", "EDT, Synthetic  100%  1  1  1"),
        ("bdt", "BDT, Synthetic", "  0  0  U"),
    ] {
        let mined = dir.path().join(approach);
        let stdout = ok(&[
            "evaluate",
            "--rules",
            p(&mined.join("rules.json")),
            "--ground-truth",
            p(&gt),
            "--test-table",
            p(&mined.join("test.csv")),
            "--label",
            label,
        ]);
        let lines: Vec<&str> = stdout.lines().collect();
        assert_eq!(lines[0], "Rule  Accuracy  Recall  Precision  F1 Measure");
        assert!(
            lines[1].starts_with(label) && lines[1].ends_with(row),
            "{}",
            lines[1]
        );
    }
    let report = fs::read_to_string(dir.path().join("edt/report.txt")).unwrap();
    assert!(report.starts_with("Rule EDT:\nWHEN "));
    assert!(dir.path().join("edt/manifest.json").exists());
}

#[test]
fn mined_outputs_are_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    generate_and_mine(a.path(), "edt", "21");
    generate_and_mine(b.path(), "edt", "21");
    for f in [
        "rules.json",
        "tree.json",
        "report.txt",
        "train.csv",
        "test.csv",
    ] {
        assert_eq!(
            fs::read(a.path().join("edt").join(f)).unwrap(),
            fs::read(b.path().join("edt").join(f)).unwrap(),
            "{f}"
        );
    }
}

#[test]
fn render_formats() {
    let dir = TempDir::new().unwrap();
    generate_and_mine(dir.path(), "edt", "2");
    let tree = dir.path().join("edt/tree.json");
    let ascii = ok(&["render", "--tree", p(&tree)]);
    assert!(ascii.contains("├── ") && ascii.contains("(n="));
    let dot = ok(&["render", "--tree", p(&tree), "--format", "dot"]);
    assert!(dot.starts_with("digraph tree {") && dot.trim_end().ends_with('}'));
    assert_eq!(
        run(&["render", "--tree", p(&tree), "--format", "svg"])
            .status
            .code(),
        Some(2)
    );
    let out = dir.path().join("tree.dot");
    ok(&[
        "render",
        "--tree",
        p(&tree),
        "--format",
        "dot",
        "--out",
        p(&out),
    ]);
    assert_eq!(fs::read_to_string(&out).unwrap(), dot);
}

#[test]
fn bpic2017_rule_scores_one_seventh() {
    let dir = TempDir::new().unwrap();
    let rules = fixture_rules(
        dir.path(),
        "1",
        "WHEN $NumberOfTerms<=CreditScore = false$ AND $Selected<=CreditScore = true$ AND \
         \\colorbox{yellow}{$RequestedAmount<=OfferedAmount = true$} AND \
         $FirstWithdrawalAmount<=CreditScore = false$ AND $MonthlyCost>=NumberOfTerms = true$ AND \
         $MonthlyCost<=FirstWithdrawalAmount = true$  AND $FirstWithdrawalAmount>=OfferedAmount = true$ THEN $Y=1$",
    );
    let gt = dir.path().join("gt.json");
    fs::write(
        &gt,
        r#"{"target_class":"1","conditions":[{"lhs":"OfferedAmount","op":">=","rhs":"RequestedAmount"}]}"#,
    )
    .unwrap();
    let stdout = ok(&[
        "evaluate",
        "--rules",
        &rules,
        "--ground-truth",
        p(&gt),
        "--label",
        "EDT, BPIC2017",
    ]);
    assert_eq!(
        stdout.lines().nth(1).unwrap(),
        "EDT, BPIC2017  -  1  0.14  0.25"
    );
}

#[test]
fn csv_input_is_accepted() {
    let dir = TempDir::new().unwrap();
    let log = dir.path().join("log.xes");
    let csv = dir.path().join("cases.csv");
    ok(&[
        "generate",
        "--n",
        "400",
        "--seed",
        "3",
        "--out",
        p(&log),
        "--csv",
        p(&csv),
    ]);
    let text = fs::read_to_string(&csv).unwrap().replace(',', ";");
    let semi = dir.path().join("cases_semi.csv");
    fs::write(&semi, text).unwrap();
    let out = dir.path().join("m");
    ok(&[
        "mine",
        "--log",
        p(&semi),
        "--format",
        "csv",
        "--delimiter",
        ";",
        "--id-key",
        "__case_id",
        "--result-attr",
        "__label",
        "--target-class",
        "OK",
        "--out-dir",
        p(&out),
    ]);
    assert!(fs::read_to_string(out.join("report.txt"))
        .unwrap()
        .contains("approach: edt"));
}

#[test]
fn toml_config_is_read_and_checked() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("gen.toml");
    let log = dir.path().join("log.xes");
    fs::write(&cfg, "n_instances = 12\nseed = 3\n").unwrap();
    let stdout = ok(&["generate", "--config", p(&cfg), "--out", p(&log)]);
    assert!(stdout.starts_with("wrote 12 traces"));
    let stdout = ok(&[
        "generate",
        "--config",
        p(&cfg),
        "--n",
        "20",
        "--out",
        p(&log),
    ]);
    assert!(stdout.starts_with("wrote 20 traces"));

    fs::write(&cfg, "n_instance = 12\n").unwrap();
    let typo = run(&["generate", "--config", p(&cfg), "--out", p(&log)]);
    assert_eq!(typo.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&typo.stderr).contains("unknown field"));
}
