mod common;

use std::process::{Command, Output};

use beta_approx::expansion::{count_prefixes, min_gap, BetaContext};
use beta_approx::real::{decimal_string, parse_decimal, precision_for_depth};
use common::*;
use serde_json::Value;

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_beta-approx")).args(args).output().expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

#[test]
fn certify_cubic() {
    let v = json(&run(&["certify", "x^3-2x-2"]));
    assert_eq!(v["polynomial"], "x^3-2x-2");
    let beta: f64 = v["beta"].as_str().unwrap().parse().unwrap();
    assert!((beta - 1.769292).abs() < 1e-6);
    assert_eq!(v["conjugates"].as_array().unwrap().len(), 2);
    assert_eq!(v["precision_bits"], 256);
}

#[test]
fn certify_rejection_exits_two() {
    let out = run(&["certify", "x^2-x-1"]);
    assert_eq!(out.status.code(), Some(2));
    let v: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["code"], "BAD_NORM");
    assert!(stderr(&out).contains("BAD_NORM"));
}

#[test]
fn certify_csv() {
    let out = run(&["certify", "[-2,0,1]", "--output", "csv"]);
    let text = stdout(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("polynomial,beta,k2,density_bound,precision_bits"));
    assert!(lines.next().unwrap().starts_with("x^2-2,1.41421356"));
}

#[test]
fn parse_errors_are_domain_errors() {
    assert_eq!(run(&["certify", "2x^2-1"]).status.code(), Some(2));
    assert_eq!(run(&["roots", "x^2+"]).status.code(), Some(2));
}

#[test]
fn roots_listing() {
    let v = json(&run(&["roots", "x^3-2x-2", "--precision", "128"]));
    let roots = v["roots"].as_array().unwrap();
    assert_eq!(roots.len(), 3);
    assert_eq!(roots[0]["im"], "0");
    assert_eq!(roots[1]["re"], roots[2]["re"]);
}

#[test]
fn mingap_matches_brute_force_and_library() {
    let v = json(&run(&["mingap", "--beta-poly", "x^2-2", "--x", "0.7", "--n", "10"]));
    assert_eq!(v["digits"], "0010110010");

    let ctx = garsia_context("x^2-2");
    let x = parse_decimal("0.7", PREC).unwrap();
    let sums = all_level_sums(&ctx, 10);
    let oracle = brute_min_gap(&ctx, &sums, &x);
    let printed = parse_decimal(v["gap"].as_str().unwrap(), PREC).unwrap();
    assert!((printed - &oracle).abs() < 1e-70);
    // The printed value is exactly the library value.
    let lib = min_gap(&x, 10, &ctx).unwrap();
    assert_eq!(v["gap"], decimal_string(&lib.gap));
}

#[test]
fn prefix_count_examples() {
    let v = json(&run(&["prefixes", "count", "--beta", "1.5", "--x", "0", "--n", "5"]));
    assert_eq!(v["count"], 1);

    let v = json(&run(&["prefixes", "count", "--beta-poly", "x^2-2", "--x", "1.1", "--n", "16"]));
    let ctx = BetaContext::sqrt2();
    let expected = count_prefixes(&parse_decimal("1.1", PREC).unwrap(), 16, &ctx).unwrap();
    assert_eq!(v["count"], expected);
}

#[test]
fn prefix_list_and_x_equals_c() {
    let v = json(&run(&["prefixes", "list", "--beta-poly", "x^2-2", "--x", "c", "--n", "6"]));
    let entries = v["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 1);
    assert_eq!(entries[0]["digits"], "111111");

    let csv = stdout(&run(&["prefixes", "list", "--beta", "1.5", "--x", "0.9", "--n", "6", "--output", "csv"]));
    assert!(csv.starts_with("digits,final_value,gap\n"));
}

#[test]
fn budget_overflow_exits_three() {
    let out = run(&["prefixes", "count", "--beta", "1.2", "--x", "2.5", "--n", "40", "--budget", "1000"]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn domain_errors_exit_two() {
    assert_eq!(run(&["mingap", "--beta", "2.5", "--x", "0.1", "--n", "3"]).status.code(), Some(2));
    assert_eq!(run(&["mingap", "--beta", "1.5", "--x", "7", "--n", "3"]).status.code(), Some(2));
    assert_eq!(run(&["psi", "eval", "--psi", "cubic:2", "--n", "3"]).status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["frobnicate"][..],
        &["mingap", "--x", "0.1", "--n", "3"],
        &["mingap", "--beta", "1.5", "--x", "0.1"],
        &["expand", "greedy", "--beta", "1.5", "--beta", "1.6", "--x", "0.1", "--n", "3"],
        &["hits", "--beta", "1.5", "--psi", "geometric:2", "--cap-k2", "auto", "--x", "0.1", "--n-lo", "1", "--n-hi", "3"],
        &["--output", "xml", "certify", "x^2-2"],
    ] {
        let out = run(args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!stderr(&out).is_empty());
        assert!(out.stdout.is_empty());
    }
}

#[test]
fn help_exits_zero() {
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("certify"));
}

#[test]
fn non_garsia_polynomial_falls_back_with_warning() {
    let out = run(&["expand", "greedy", "--beta-poly", "x^2-x-1", "--x", "1", "--n", "6"]);
    let v = json(&out);
    assert_eq!(v["digits"], "110000");
    assert!(stderr(&out).contains("warning"));
}

#[test]
fn expand_modes() {
    let greedy = json(&run(&["expand", "greedy", "--beta", "1.5", "--x", "1", "--n", "8"]));
    let lazy = json(&run(&["expand", "lazy", "--beta", "1.5", "--x", "1", "--n", "8"]));
    assert_eq!(greedy["mode"], "GREEDY");
    assert!(greedy["digits"].as_str().unwrap() >= lazy["digits"].as_str().unwrap());

    let v = json(&run(&[
        "expand", "construct", "--beta-poly", "x^2-2", "--psi", "geometric:2", "--x", "0.7", "--depth", "30",
        "--milestones", "2",
    ]));
    assert_eq!(v["digits"].as_str().unwrap().len(), 30);
    assert!(!v["milestones"].as_array().unwrap().is_empty());
}

#[test]
fn hits_json_and_csv() {
    let args = ["hits", "--beta-poly", "x^2-2", "--psi", "geometric:2", "--x", "0.7", "--n-lo", "1", "--n-hi", "12"];
    let v = json(&run(&args));
    let levels: Vec<u64> = v.as_array().unwrap().iter().map(|h| h["n"].as_u64().unwrap()).collect();
    assert_eq!(levels, vec![2, 5, 9, 10, 11, 12]);

    let mut with_csv = args.to_vec();
    with_csv.extend(["--output", "csv"]);
    let text = stdout(&run(&with_csv));
    assert!(text.starts_with("n,gap,psi_n,hit\n"));
    assert_eq!(text.lines().count(), 13);
}

#[test]
fn psi_utilities() {
    let v = json(&run(&["psi", "eval", "--psi", "geometric:2", "--scale", "4", "--n", "3"]));
    assert_eq!(v["value"], "0.03125");
    assert_eq!(v["psi"]["transforms"][0]["scale"], 4);

    let v = json(&run(&["psi", "decay", "--psi", "geometric:2", "--m", "5"]));
    assert_eq!(v["c_m"], "32");

    let v = json(&run(&["psi", "sum", "--psi", "geometric:2", "--cap-k2", "auto", "--beta-poly", "x^2-2", "--n", "10"]));
    let value: f64 = v["value"].as_str().unwrap().parse().unwrap();
    assert!((value - 10.0 * (2f64.sqrt() - 1.0)).abs() < 1e-12);
    assert_eq!(v["behaviour"], "DIVERGENT_LOOKING");

    let v = json(&run(&["psi", "sum", "--psi", "geometric:4", "--n", "40"]));
    assert_eq!(v["behaviour"], "CONVERGENT_LOOKING");
}

#[test]
fn unique_verdicts() {
    let v = json(&run(&["unique", "--beta", "1.5", "--x", "c", "--n", "64"]));
    assert_eq!(v["status"], "UNIQUE_TO_DEPTH");
    let v = json(&run(&["unique", "--beta", "1.5", "--x", "1", "--n", "64"]));
    assert_eq!(v["status"], "BRANCHES_AT");
}

#[test]
fn coverage_reports_echo_seed_and_contrast() {
    let v = json(&run(&[
        "coverage", "--beta-poly", "x^2-2", "--psi", "constant:3", "--n-lo", "3", "--n-hi", "6", "--samples", "50",
        "--seed", "17",
    ]));
    assert_eq!(v["seed"], 17);
    assert_eq!(v["hit_fraction"], 1.0);

    let v = json(&run(&[
        "coverage", "--beta", "1.618", "--beta-poly", "x^2-2", "--psi", "geometric:2", "--n-lo", "12", "--n-hi", "20",
        "--samples", "60",
    ]));
    let summary = v["summary"].as_array().unwrap();
    assert_eq!(summary.len(), 2);
    assert_eq!(summary[0]["beta_label"], "x^2-2");

    let text = stdout(&run(&[
        "coverage", "--beta", "1.5", "--psi", "geometric:2", "--n-lo", "4", "--n-hi", "8", "--samples", "20",
        "--plot-data",
    ]));
    assert!(text.starts_with("n,hit_rate\n"));
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn density_commands() {
    let v = json(&run(&["density", "prefix", "--beta-poly", "x^2-2", "--n", "12", "--grid", "50"]));
    assert_eq!(v["method"], "PREFIX_COUNT");
    assert_eq!(v["values"].as_array().unwrap().len(), 50);

    let text = stdout(&run(&["density", "mc", "--beta", "1.5", "--samples", "20000", "--bins", "10", "--output", "csv"]));
    assert!(text.starts_with("x,value\n"));
    assert_eq!(text.lines().count(), 11);

    let v = json(&run(&["density", "compare", "--beta-poly", "x^2-2", "--n", "14", "--samples", "200000"]));
    assert!(v["l1"].as_f64().unwrap() < 0.1);
}

#[test]
fn default_precision_follows_depth() {
    assert_eq!(precision_for_depth(10), 256);
    assert_eq!(precision_for_depth(300), 364);
    let v = json(&run(&["mingap", "--beta", "1.95", "--x", "0.3", "--n", "300"]));
    assert_eq!(v["digits"].as_str().unwrap().len(), 300);
    let gap: f64 = v["gap"].as_str().unwrap().parse().unwrap();
    assert!(gap > 0.0 && gap < 1e-80);
}
