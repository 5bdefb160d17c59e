use std::path::PathBuf;
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data").join(name)
}

fn stackroute(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_stackroute")).args(args).output().unwrap()
}

fn field(stdout: &[u8], key: &str) -> String {
    let text = String::from_utf8_lossy(stdout);
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}: ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
        .to_string()
}

fn num(stdout: &[u8], key: &str) -> f64 {
    field(stdout, key).split_whitespace().next().unwrap().parse().unwrap()
}

#[test]
fn play_pigou() {
    let out = stackroute(&["play", "--instance", data("pigou.json").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!((num(&out.stdout, "optimal cost") - 0.75).abs() < 2e-2);
    assert!((num(&out.stdout, "induced cost") - 0.8125).abs() < 2e-2);
    assert!((num(&out.stdout, "empirical poa") - 1.083).abs() < 2e-2);
    assert!(field(&out.stdout, "poa bound").ends_with("(A_lambda+)"));
}

#[test]
fn play_alpha_override_changes_result() {
    let path = data("pigou.json");
    let base = stackroute(&["play", "--instance", path.to_str().unwrap()]);
    let more = stackroute(&["play", "--instance", path.to_str().unwrap(), "--alpha", "0.9"]);
    assert_eq!(field(&more.stdout, "alpha"), "0.9");
    assert!(num(&more.stdout, "empirical poa") < num(&base.stdout, "empirical poa"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let instance = data("braess.json");
    let mut files = Vec::new();
    for i in 0..2 {
        let csv = dir.path().join(format!("play{i}.csv"));
        let out = stackroute(&["play", "--instance", instance.to_str().unwrap(), "--out", csv.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0));
        files.push((out.stdout, std::fs::read(&csv).unwrap()));
    }
    assert_eq!(files[0], files[1]);
    let csv = String::from_utf8(files[0].1.clone()).unwrap();
    assert!(csv.starts_with("link,fa_opt,fh_opt,s,t,gamma,beta,alpha_star\n"));
    assert_eq!(csv.lines().count(), 6);
}

#[test]
fn bound_reports_region_and_value() {
    let out = stackroute(&["bound", "--alpha", "0.5", "--mu", "1"]);
    assert_eq!(out.status.code(), Some(0));
    let expect = (1.0 + 0.5f64.sqrt()).powi(2) / (1.0 + 2.0 * 0.5f64.sqrt());
    assert!((num(&out.stdout, "bound") - expect).abs() < 1e-11);
    assert_eq!(field(&out.stdout, "region"), "A_lambda+");

    let vacuous = stackroute(&["bound", "--alpha", "0.05", "--mu", "0.1"]);
    assert_eq!(field(&vacuous.stdout, "region"), "A0");
    assert_eq!(field(&vacuous.stdout, "bound"), "inf");
}

#[test]
fn verify_small_batch() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("report.csv");
    let out = stackroute(&["verify", "--count", "20", "--seed", "5", "--out", report.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(field(&out.stdout, "instances"), "20");
    assert_eq!(field(&out.stdout, "fail"), "0");
    let csv = std::fs::read_to_string(report).unwrap();
    assert_eq!(csv.lines().next(), Some("seed,alpha,mu,poa_emp,poa_bound,region,margin,certified,status"));
    assert_eq!(csv.lines().count(), 21);
    assert!(csv.lines().nth(1).unwrap().starts_with("5,"));
}

#[test]
fn curves_to_stdout() {
    let out = stackroute(&["curves", "--kind", "omega-vs-lambda", "--alpha", "0.4", "--mu", "0.5"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("series,x,y\n"));
    assert!(text.lines().any(|l| l.starts_with("omega mu=0.5,")));
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"nodes":["o","d"],"links":[{"id":"x","tail":"o","head":"d","a":2,"h":1,"b":0}],"od_pairs":[{"origin":"o","destination":"d","demand":1,"alpha":0.5}]}"#).unwrap();
    let out = stackroute(&["validate", "--instance", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));

    assert_eq!(stackroute(&["play", "--instance", "/no/such/file.json"]).status.code(), Some(1));
    assert_eq!(stackroute(&["bound", "--alpha", "0.5"]).status.code(), Some(64));
    assert_eq!(stackroute(&["nonsense"]).status.code(), Some(64));

    let starved = stackroute(&["play", "--instance", data("braess.json").to_str().unwrap(), "--max-iter", "1"]);
    assert_eq!(starved.status.code(), Some(2));
}
