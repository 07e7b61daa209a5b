//! End-to-end tests of the `lambert` binary: output shapes, exit-code
//! contract (0 success, 1 identity violation, 2 usage/config error),
//! determinism, and the partition-cache round trip.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lambert"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn deriv_matrix_csv_matches_reference_block() {
    let o = run(&["matrix", "--kind", "deriv", "--t", "1", "--N", "12", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().map(str::trim).collect();
    assert_eq!(lines.len(), 12);
    assert_eq!(lines[0], "1,0,0,0,0,0,0,0,0,0,0,0");
    assert_eq!(lines[3], "-1,2,-3,4,0,0,0,0,0,0,0,0");
    assert_eq!(lines[11], "3,2,12,12,-5,12,7,0,0,-10,-11,12");
}

#[test]
fn deriv_inverse_csv_exact_rationals() {
    let o = run(&["matrix", "--kind", "deriv-inv", "--t", "1", "--N", "12", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines[1].split(',').next(), Some("-1/2"));
    assert_eq!(
        lines[11],
        "13/4,8/3,7/4,5/4,13/12,3/4,7/12,5/12,1/4,1/6,1/12,1/12"
    );
}

#[test]
fn tdiv_matrix_matches_printed_display() {
    let o = run(&["matrix", "--kind", "tdiv", "--N", "6", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(
        stdout(&o),
        "1,0,0,0,0,0\n1,1,0,0,0,0\n1,0,1,0,0,0\n1,1,0,1,0,0\n1,0,0,0,1,0\n1,1,1,0,0,1\n"
    );
}

#[test]
fn singular_inverse_names_the_precondition_and_exits_2() {
    let o = run(&["matrix", "--kind", "hadamard-inv", "--f", "mu", "--N", "8"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("f~(2) = 0"), "stderr: {}", stderr(&o));
}

#[test]
fn matrix_json_shape() {
    let o = run(&["matrix", "--kind", "base", "--N", "4", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["start"], 1);
    assert_eq!(v["dim"], 4);
    assert_eq!(v["rows"][0][0], "1");
    assert_eq!(v["rows"][2][0], "-1"); // s_{3,1}
    assert_eq!(v["rows"][0][1], "0"); // above the diagonal
}

#[test]
fn verify_suites_pass_and_report_json() {
    let o = run(&["verify", "--suite", "hadamard", "--f", "id", "--N", "16", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["all_pass"], true);

    let o = run(&["verify", "--suite", "derivatives", "--t", "2", "--N", "12"]);
    assert_eq!(o.status.code(), Some(0));

    let o = run(&["verify", "--suite", "all", "--N", "10", "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(&o));
}

#[test]
fn verify_failure_exits_1_with_counterexample() {
    // f = mu has a vanishing divisor sum, so the hadamard suite's
    // inverse checks fail (reported as data, exit code 1)
    let o = run(&["verify", "--suite", "hadamard", "--f", "mu", "--N", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL"));
    assert!(stdout(&o).contains("f~(2)"));
}

#[test]
fn zeta_usage_and_report() {
    let o = run(&["zeta", "--s", "1", "--N", "5"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("diverges"));

    let o = run(&["zeta", "--variant", "deriv-t1", "--s", "3", "--N", "50", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let lines: Vec<&str> = out.lines().collect();
    assert_eq!(lines.len(), 51); // header + 50 rows
    assert_eq!(lines[0], "n,term,partial_sum,abs_error");
    assert!(lines[1].starts_with("1,1,1,"));
    assert!(lines[2].starts_with("2,1/8,9/8,")); // exact rational terms
}

#[test]
fn exotic_and_omega_tables_match() {
    let o = run(&["exotic", "--kind", "totient", "--upto", "60", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).lines().skip(1).all(|l| l.ends_with(",true")));

    let o = run(&["exotic", "--kind", "von-mangoldt", "--upto", "30", "--precision", "128"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("max abs deviation"));
    assert!(stdout(&o).contains("all rows match: yes"));

    let o = run(&["exotic", "--kind", "nope", "--upto", "5"]);
    assert_eq!(o.status.code(), Some(2));

    let o = run(&["omega", "--upto", "200", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).lines().count(), 201);
}

#[test]
fn derivative_report() {
    let o = run(&["derivative", "--t", "2", "--a", "phi", "--N", "15", "--format", "json"]);
    assert_eq!(o.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["theorem"]["all_pass"], true);
    assert_eq!(v["A_t"].as_array().unwrap().len(), 15);
    // t=1, a=delta1: the Lambert coefficients are Euler's totient
    let o = run(&["derivative", "--t", "1", "--a", "delta1", "--N", "10", "--format", "csv"]);
    let out = stdout(&o);
    assert!(out.lines().any(|l| l == "10,10,4")); // A_1(10)=10, phi(10)=4
}

#[test]
fn output_is_byte_deterministic() {
    let args = ["verify", "--suite", "base", "--N", "14", "--format", "json"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    assert_eq!(a.status.code(), b.status.code());
}

#[test]
fn unknown_function_exits_2() {
    let o = run(&["matrix", "--kind", "hadamard", "--f", "bogus", "--N", "6"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("unknown arithmetic function"));
}

#[test]
fn out_flag_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("m.csv");
    let o = run(&[
        "matrix", "--kind", "tdiv", "--N", "4", "--format", "csv",
        "--out", path.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).is_empty());
    let content = std::fs::read_to_string(&path).unwrap();
    assert_eq!(content.lines().count(), 4);
}

#[test]
fn partition_cache_roundtrip() {
    let dir = tempfile::tempdir().unwrap();
    let cache = dir.path();
    let run_cached = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_lambert"))
            .env("LAMBERT_CACHE_DIR", cache)
            .args(args)
            .output()
            .expect("binary runs")
    };
    let first = run_cached(&["omega", "--upto", "40", "--format", "csv"]);
    assert_eq!(first.status.code(), Some(0));
    let bin = cache.join("partitions.bin");
    assert!(bin.exists());
    let size_after_first = std::fs::metadata(&bin).unwrap().len();
    assert!(size_after_first > 8);

    // second run must load the cache, produce identical output, and
    // leave a valid (possibly grown) cache behind
    let second = run_cached(&["omega", "--upto", "40", "--format", "csv"]);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(first.stdout, second.stdout);

    // a corrupt cache is ignored with a warning, not a crash
    std::fs::write(&bin, b"garbage").unwrap();
    let third = run_cached(&["omega", "--upto", "10", "--format", "csv"]);
    assert_eq!(third.status.code(), Some(0));
    assert!(stderr(&third).contains("partition cache"));
}

#[test]
fn verify_on_build_runs_suites() {
    let o = run(&["--verify-on-build", "matrix", "--kind", "base", "--N", "4", "--format", "csv"]);
    assert_eq!(o.status.code(), Some(0), "stderr: {}", stderr(&o));
    assert!(stdout(&o).lines().count() == 4);
}
