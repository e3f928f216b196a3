use mclass_cli::document::{InputDescriptor, ReportDocument};
use sha2::{Digest, Sha256};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mclass")).args(args).output().unwrap()
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

fn stdout(args: &[&str]) -> String {
    String::from_utf8(run(args).stdout).unwrap()
}

fn column(path: &Path, lo: f64) -> Vec<f64> {
    let text = fs::read_to_string(path).unwrap();
    text.lines()
        .skip(1)
        .map(|l| l.split(',').map(|v| v.parse::<f64>().unwrap()).collect::<Vec<_>>())
        .filter(|r| r[0] >= lo)
        .map(|r| r[1])
        .collect()
}

#[test]
fn usage_errors_exit_one() {
    for args in [
        &["classify"][..],
        &["classify", "--fn", "no_such_function"],
        &["classify", "--fn", "power_tail", "--param", "alpha"],
        &["classify", "--fn", "power_tail", "--param", "gamma=1"],
        &["classify", "--fn", "pareto_tail", "--param", "alpha=-1"],
        &["frobnicate"],
        &["simulate", "--fn", "pareto_tail", "--reps", "2000"],
    ] {
        assert_eq!(code(args), 1, "{}", args.join(" "));
    }
    assert_eq!(code(&["--help"]), 0);
    assert_eq!(code(&["--version"]), 0);
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let neg = dir.path().join("neg.csv");
    fs::write(&neg, "x,value\n10,1\n20,-2\n").unwrap();
    assert_eq!(code(&["classify", "--data", neg.to_str().unwrap()]), 2);
    assert_eq!(code(&["classify", "--data", dir.path().join("missing.csv").to_str().unwrap()]), 2);
    // not a tail, so no distribution to simulate from
    assert_eq!(code(&["simulate", "--fn", "ramp", "--seed", "1"]), 2);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let plots = blocker.join("sub");
    assert_eq!(code(&["classify", "--fn", "power_tail", "--plots", plots.to_str().unwrap()]), 2);
}

#[test]
fn undecided_exits_three() {
    assert_eq!(code(&["classify", "--fn", "x_pow_sin_x"]), 0);
    assert_eq!(code(&["classify", "--fn", "oset_tower", "--param", "c=1.5", "--param", "alpha=1"]), 3);
}

#[test]
fn valid_table_is_hashed() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.csv");
    let mut text = String::from("x,value\n");
    for k in 0..200 {
        let x = 10f64.powf(1.0 + 7.0 * k as f64 / 199.0);
        text.push_str(&format!("{x},{}\n", x.powf(-1.5)));
    }
    fs::write(&path, &text).unwrap();
    let out = run(&["classify", "--data", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let doc = ReportDocument::from_json(&String::from_utf8(out.stdout).unwrap()).unwrap();
    match doc.input {
        InputDescriptor::File { sha256, .. } => assert_eq!(sha256, hex::encode(Sha256::digest(text.as_bytes()))),
        other => panic!("{other:?}"),
    }
    assert!(doc.class.agrees_with(&mclass::ClassLabel::M { rho: -1.5 }, 0.05), "{}", doc.class);
}

#[test]
fn out_file_matches_stdout() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("doc.json");
    let args = ["report", "--fn", "exp_neg", "--param", "p=1"];
    let printed = stdout(&args);
    let mut with_out = args.to_vec();
    with_out.extend(["--out", path.to_str().unwrap()]);
    let o = run(&with_out);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    assert_eq!(fs::read_to_string(&path).unwrap(), printed);
    let doc = ReportDocument::from_json(&printed).unwrap();
    assert!(doc.conditions.iter().any(|c| c.condition.to_string() == "REP-INF" && c.passed));
}

#[test]
fn classify_is_byte_identical() {
    let args = ["classify", "--fn", "log_perturbed_power"];
    assert_eq!(stdout(&args), stdout(&args));
}

#[test]
fn unknown_fields_are_rejected() {
    let text = stdout(&["classify", "--fn", "peter_paul"]);
    let doc = ReportDocument::from_json(&text).unwrap();
    assert_eq!(doc.schema_version, "1");
    let tampered = text.replacen("{", "{\n  \"extra\": 1,", 1);
    assert!(ReportDocument::from_json(&tampered).is_err());
}

#[test]
fn report_with_tauberian_check() {
    let text = stdout(&["report", "--fn", "power_tail", "--param", "alpha=1", "--tauberian"]);
    let doc = ReportDocument::from_json(&text).unwrap();
    let t = doc.conditions.iter().find(|c| c.condition.to_string() == "TAUBERIAN").unwrap();
    assert!(t.passed, "{t:?}");
}

#[test]
fn simulate_peter_paul_witness() {
    let text = stdout(&["simulate", "--fn", "peter_paul", "--subsequences"]);
    let doc = ReportDocument::from_json(&text).unwrap();
    let w = doc.evt.unwrap().witness.unwrap();
    assert!(w.ks_exact.iter().all(|k| *k >= 0.05), "{:?}", w.ks_exact);
}

#[test]
fn plot_data() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path();
    let plot = |name: &str, extra: &[&str]| {
        let sub = p.join(name);
        let mut args = vec!["classify", "--fn", name, "--plots", sub.to_str().unwrap()];
        args.extend(extra);
        run(&args);
        sub
    };

    let power = plot("power_tail", &["--param", "alpha=-2"]);
    assert!(column(&power.join("orders.csv"), 0.0).iter().all(|v| (v + 2.0).abs() < 1e-12));
    for f in ["orders.csv", "kappa_trace.csv", "ratio.csv"] {
        let text = fs::read_to_string(power.join(f)).unwrap();
        assert!(!text.contains('\r') && text.ends_with('\n') && text.lines().count() > 2, "{f}");
    }

    // sawtooth between -1 and -n/(n+1) on each dyadic block
    let pp = plot("peter_paul", &[]);
    for (x, v) in fs::read_to_string(pp.join("orders.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| {
            let r: Vec<f64> = l.split(',').map(|s| s.parse().unwrap()).collect();
            (r[0], r[1])
        })
    {
        let n = x.log2().floor();
        assert!(v >= -1.0 - 1e-12 && v <= -n / (n + 1.0) + 1e-12, "x {x}: {v}");
    }

    let oset = plot("oset_geometric", &[]);
    let late = column(&oset.join("orders.csv"), 1e3);
    let (lo, hi) = late.iter().fold((f64::MAX, f64::MIN), |(a, b), v| (a.min(*v), b.max(*v)));
    assert!((lo - 0.5).abs() < 0.05 && (hi - 1.0).abs() < 0.05, "{lo} {hi}");
}
