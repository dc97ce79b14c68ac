mod common;

use std::path::Path;
use std::process::{Command, Output};

use delegation::benchmarks::offline_opt;
use delegation::instance::{instance_to_json, load};
use delegation::rational::int;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_delegation"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let o = run(dir, args);
    assert_eq!(o.status.code(), Some(0), "{args:?}: {}", stderr(&o));
    stdout(&o)
}

fn line<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).map(str::trim))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn gen_families() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["gen", "--family", "table1", "--out", "t.json"]);
    assert_eq!(offline_opt(&load(p.join("t.json")).unwrap()), int(5));

    let text = ok(p, &["gen", "--family", "thm2", "--n", "2"]);
    let thm2 = delegation::instance::instance_from_json(&text).unwrap();
    assert_eq!(thm2.shape(), vec![4, 4]);
    assert_eq!(thm2.rounds[0], thm2.rounds[1]);

    ok(
        p,
        &[
            "gen", "--family", "random", "--n", "3", "--seed", "7", "--out", "a.json",
        ],
    );
    ok(
        p,
        &[
            "gen", "--family", "random", "--n", "3", "--seed", "7", "--out", "b.json",
        ],
    );
    assert_eq!(
        std::fs::read(p.join("a.json")).unwrap(),
        std::fs::read(p.join("b.json")).unwrap()
    );
}

#[test]
fn gen_bad_parameter_names_it() {
    let d = tempfile::tempdir().unwrap();
    let o = run(d.path(), &["gen", "--family", "thm2", "--n", "1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(
        stderr(&o).contains("BadParam") && stderr(&o).contains(" n:"),
        "{}",
        stderr(&o)
    );
    let o = run(d.path(), &["gen", "--family", "nope"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("family"));
    assert_eq!(run(d.path(), &["gen"]).status.code(), Some(2));
}

#[test]
fn solve_traces() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["gen", "--family", "table1", "--out", "t.json"]);
    ok(
        p,
        &["solve", "--instance", "t.json", "--algo", "beta", "--out", "beta.json"],
    );
    let t = load(p.join("t.json")).unwrap();
    let beta =
        delegation::dynamics::scheme_from_json(&std::fs::read_to_string(p.join("beta.json")).unwrap(), &t).unwrap();
    assert_eq!(beta.scheme.to_deterministic().unwrap().describe(), "{2} {1}");
    let plan: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(p.join("beta.plan.json")).unwrap()).unwrap();
    assert_eq!(plan["algo"], "beta");
    assert_eq!(plan["guarantee"], "1/4");

    let obl = ok(p, &["solve", "--instance", "t.json", "--algo", "oblivious"]);
    let obl = delegation::dynamics::scheme_from_json(&obl, &t).unwrap();
    assert_eq!(obl.scheme.to_deterministic().unwrap().describe(), "{2} {}");
    assert!(obl_is_oblivious(&obl.scheme));

    let o = run(p, &["solve", "--instance", "t.json", "--algo", "interval-k"]);
    assert_eq!(o.status.code(), Some(2));
    let o = run(p, &["solve", "--instance", "t.json", "--algo", "magic"]);
    assert_eq!(o.status.code(), Some(2));
}

fn obl_is_oblivious(s: &delegation::dynamics::ActionScheme) -> bool {
    s.provenance == delegation::dynamics::Provenance::Oblivious
}

#[test]
fn solve_precondition_exit_3() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let (high, _) = common::high_expectation(1);
    std::fs::write(p.join("h.json"), instance_to_json(&high)).unwrap();
    let o = run(p, &["solve", "--instance", "h.json", "--algo", "algo-low"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("HighExpectationGroup"));
    ok(p, &["gen", "--family", "zero-lb", "--n", "3", "--out", "z.json"]);
    let o = run(p, &["solve", "--instance", "z.json", "--algo", "binning"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("ZeroAgentUtility"));
}

#[test]
fn eval_reports() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["gen", "--family", "table1", "--out", "t.json"]);
    std::fs::write(p.join("opt.json"), r#"{"accept": [[2], [1]]}"#).unwrap();
    let out = ok(
        p,
        &["eval", "--instance", "t.json", "--scheme", "opt.json", "--csv", "r.csv"],
    );
    assert_eq!(line(&out, "principal_value"), "17/4 (4.25)");
    assert_eq!(line(&out, "ratio_offline"), "17/20 (0.85)");
    let csv = std::fs::read_to_string(p.join("r.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().starts_with("opt.json,17/4,"));

    std::fs::write(p.join("r2.json"), r#"{"accept": [[], [1, 2]]}"#).unwrap();
    let out = ok(
        p,
        &["eval", "--instance", "t.json", "--scheme", "r2.json", "--info", "semi"],
    );
    assert_eq!(line(&out, "principal_value"), "4 (4)");

    std::fs::write(p.join("zero.json"), r#"{"accept": [[], []]}"#).unwrap();
    let out = ok(p, &["eval", "--instance", "t.json", "--scheme", "zero.json"]);
    assert_eq!(line(&out, "principal_value"), "0 (0)");
    assert_eq!(line(&out, "agent_value"), "0 (0)");
    assert_eq!(line(&out, "ratio_online"), "0 (0)");

    let o = run(
        p,
        &["eval", "--instance", "t.json", "--scheme", "opt.json", "--info", "semi"],
    );
    assert_eq!(o.status.code(), Some(4));
    assert!(stderr(&o).contains("IndistinguishableMismatch") && stderr(&o).contains("round 2"));

    let o = run(
        p,
        &[
            "eval",
            "--instance",
            "t.json",
            "--scheme",
            "opt.json",
            "--info",
            "oblivious",
        ],
    );
    assert_eq!(o.status.code(), Some(4));

    let out = ok(
        p,
        &[
            "eval",
            "--instance",
            "t.json",
            "--scheme",
            "opt.json",
            "--lookahead",
            "1",
        ],
    );
    assert!(out.contains("principal_value"));
    let o = run(
        p,
        &[
            "eval",
            "--instance",
            "t.json",
            "--scheme",
            "opt.json",
            "--lookahead",
            "2",
        ],
    );
    assert_eq!(o.status.code(), Some(2));

    std::fs::write(p.join("bad.json"), r#"{"accept": [[3], []]}"#).unwrap();
    assert_eq!(
        run(p, &["eval", "--instance", "t.json", "--scheme", "bad.json"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn oracle_outputs() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    ok(p, &["gen", "--family", "table1", "--out", "t.json"]);
    let out = ok(p, &["oracle", "--instance", "t.json"]);
    assert!(out.starts_with("searched 16 schemes"));
    assert_eq!(line(&out, "value"), "17/4 (4.25)");
    assert_eq!(line(&out, "best"), "{2} {1}");

    ok(p, &["gen", "--family", "thm2", "--n", "2", "--out", "t2.json"]);
    let out = ok(p, &["oracle", "--instance", "t2.json", "--prune-zero-b"]);
    assert_eq!(line(&out, "value"), "5/8 (0.625)");

    ok(p, &["gen", "--family", "thm2", "--n", "4", "--out", "t4.json"]);
    let o = run(p, &["oracle", "--instance", "t4.json"]);
    assert_eq!(o.status.code(), Some(5));
    assert!(stderr(&o).contains("2^32"));
}

#[test]
fn bench_binning_guarantee_on_100_seeds() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    let seeds: Vec<String> = (0..100).map(|s| s.to_string()).collect();
    let config = format!(
        r#"{{"families": [{{"family": "random", "grid": {{"n": [4], "positive_agent": [true]}}, "seeds": [{}]}}],
            "schemes": ["binning"], "output": "out.csv"}}"#,
        seeds.join(",")
    );
    std::fs::write(p.join("c.json"), config).unwrap();
    ok(p, &["bench", "--config", "c.json", "--jobs", "4"]);
    let csv = std::fs::read_to_string(p.join("out.csv")).unwrap();
    let mut rows = csv.lines();
    assert_eq!(
        rows.next().unwrap(),
        "family,params,seed,scheme,principal_value,agent_value,offline_opt,online_opt,ratio_offline,ratio_online,guarantee_bound,guarantee_met"
    );
    let rows: Vec<&str> = rows.collect();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r.ends_with(",true")));
}

#[test]
fn bench_empty_schemes_and_errors() {
    let d = tempfile::tempdir().unwrap();
    let p = d.path();
    std::fs::write(
        p.join("c.json"),
        r#"{"families": [{"family": "table1"}], "schemes": []}"#,
    )
    .unwrap();
    let out = ok(p, &["bench", "--config", "c.json"]);
    assert_eq!(out.lines().nth(1).unwrap(), "table1,,,benchmark,,,5,5,,,,");

    std::fs::write(p.join("bad.json"), r#"{"families": [{"family": "random"}]}"#).unwrap();
    assert_eq!(run(p, &["bench", "--config", "bad.json"]).status.code(), Some(2));
    std::fs::write(p.join("bad2.json"), r#"{"families": [], "schemes": ["nope"]}"#).unwrap();
    assert_eq!(run(p, &["bench", "--config", "bad2.json"]).status.code(), Some(2));

    std::fs::write(
        p.join("partial.json"),
        r#"{"families": [{"family": "thm2", "grid": {"n": [2, 1]}}]}"#,
    )
    .unwrap();
    let o = run(p, &["bench", "--config", "partial.json", "--out", "partial.csv"]);
    assert_eq!(o.status.code(), Some(2));
    let csv = std::fs::read_to_string(p.join("partial.csv")).unwrap();
    let last = csv.lines().last().unwrap();
    assert!(last.starts_with("#status,error(BadParam)"), "{csv}");
}
