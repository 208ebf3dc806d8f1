use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ltlsynth::formats::{product::parse_product, sfsc::parse_sfsc};

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ltlsynth"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

const CASE1: [&str; 6] = ["--grid-rows", "2", "--builtin", "case1", "--convention", "destination"];

fn with<'a>(head: &[&'a str], tail: &[&'a str]) -> Vec<&'a str> {
    let mut v = head.to_vec();
    v.extend_from_slice(&CASE1);
    v.push("--prune");
    v.extend_from_slice(tail);
    v
}

#[test]
fn validate_reports_and_sets_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let ok = run(dir.path(), &["validate", "--grid-rows", "1", "--builtin", "case2"]);
    assert_eq!(ok.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&ok.stdout).contains("0 violation(s)"));

    let bad = "states a b\nactions go\nobservations o\nap p\ntransition\na go a 0.5\nb go b 1.0\nobservation_fn\na o 1.0\nb o 1.0\ninitial\na 1.0\nlabeling\na : p\n";
    fs::write(dir.path().join("bad.pomdp"), bad).unwrap();
    let out = run(dir.path(), &["validate", "--model", "bad.pomdp"]);
    assert_eq!(out.status.code(), Some(1));

    let usage = run(dir.path(), &["validate", "--no-such-flag"]);
    assert_eq!(usage.status.code(), Some(2));
}

#[test]
fn synth_then_analyze_then_simulate() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let out = run(p, &with(&["product"], &["--out", "prod.txt"]));
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let product = parse_product(&fs::read_to_string(p.join("prod.txt")).unwrap()).unwrap();

    let out = run(
        p,
        &with(
            &["synth"],
            &["--uniform-seed", "--n-max", "3", "--report", "r.txt", "--csv", "c.csv", "--controller-out", "f.txt"],
        ),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let report = fs::read_to_string(p.join("r.txt")).unwrap();
    assert!(report.starts_with("termination "));
    let csv = fs::read_to_string(p.join("c.csv")).unwrap();
    assert!(csv.starts_with("iteration,n_istates,n_steady,value,residual,repeat_frequency\n"));
    let fsc = parse_sfsc(&fs::read_to_string(p.join("f.txt")).unwrap()).unwrap();
    assert_eq!(fsc.n_observations(), product.n_observations());
    assert!(fsc.n_istates() <= 3);

    let out = run(p, &with(&["analyze"], &["--controller", "f.txt"]));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(out.status.success());
    assert!(text.contains("feasibility_residual 0"));
    assert!(text.contains("satisfaction "));

    let sim_args = with(&["simulate"], &["--controller", "f.txt", "--traces", "50", "--goal", "6", "--forbidden", "3", "--rng-seed", "3"]);
    let a = run(p, &sim_args);
    let b = run(p, &sim_args);
    assert!(a.status.success());
    assert!(String::from_utf8_lossy(&a.stdout).starts_with("traces 50\n"));
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn missing_files_are_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = run(dir.path(), &with(&["analyze"], &["--controller", "absent.txt"]));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("absent.txt"));
}
