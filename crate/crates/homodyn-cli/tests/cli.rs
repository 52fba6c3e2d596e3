//! End-to-end checks of the binary: output shape, worked examples,
//! determinism, and exit codes.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_homodyn"))
        .args(args)
        .output()
        .expect("spawn homodyn")
}

fn stdout_lines(out: &Output) -> Vec<String> {
    String::from_utf8(out.stdout.clone())
        .unwrap()
        .lines()
        .map(|l| l.to_string())
        .collect()
}

/// one header row, then exactly one #config row, then data
fn check_shape(lines: &[String]) {
    assert!(lines.len() >= 2, "{lines:?}");
    assert!(!lines[0].starts_with('#'), "header first: {lines:?}");
    assert!(lines[1].starts_with("#config: "), "{lines:?}");
    for l in &lines[2..] {
        assert!(!l.starts_with('#'), "stray comment: {l}");
    }
}

#[test]
fn jordan_example() {
    let out = run(&["jordan", "--matrix", "2,1,1,1"]);
    assert!(out.status.success());
    let lines = stdout_lines(&out);
    check_shape(&lines);
    assert_eq!(lines[0], "component,e11,e12,e21,e22");
    assert_eq!(lines.len(), 5);
    let row = |l: &String| l.split(',').map(|s| s.to_string()).collect::<Vec<_>>();
    let unip = row(&lines[2]);
    let hyp = row(&lines[3]);
    let ell = row(&lines[4]);
    assert_eq!(unip[0], "unip");
    assert_eq!(hyp[0], "hyp");
    assert_eq!(ell[0], "ell");
    // [[2,1],[1,1]] is hyperbolic: unip and ell are the identity
    let vals = |r: &[String]| {
        r[1..]
            .iter()
            .map(|s| s.parse::<f64>().unwrap())
            .collect::<Vec<_>>()
    };
    assert_eq!(vals(&unip), vec![1.0, 0.0, 0.0, 1.0]);
    assert_eq!(vals(&ell), vec![1.0, 0.0, 0.0, 1.0]);
    assert_eq!(vals(&hyp), vec![2.0, 1.0, 1.0, 1.0]);
}

#[test]
fn entropy_rate_example() {
    let out = run(&[
        "entropy", "rate", "--system", "bernoulli", "--p", "0.5", "--kmax", "7",
    ]);
    assert!(out.status.success());
    let lines = stdout_lines(&out);
    check_shape(&lines);
    assert_eq!(lines[0], "k,e,rate");
    assert_eq!(lines.len(), 2 + 7);
    let last: Vec<&str> = lines.last().unwrap().split(',').collect();
    assert_eq!(last[0], "7");
    let rate: f64 = last[2].parse().unwrap();
    assert!((rate - std::f64::consts::LN_2).abs() < 1e-12);
}

#[test]
fn signature_example() {
    let out = run(&["qform", "signature", "--form", "1,0,0,1,0,-1"]);
    assert!(out.status.success());
    let lines = stdout_lines(&out);
    check_shape(&lines);
    assert_eq!(lines[0], "p,q,zero");
    assert_eq!(lines[2], "2,1,0");
}

#[test]
fn deterministic_bytes() {
    let args = [
        "qform", "ratio", "--form", "1,0,0,0,1,0,0,1,0,-sqrt2", "--a", "-1", "--b", "1",
        "--radii", "5,10", "--mc", "20000", "--seed", "11",
    ];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);

    let args = ["flow", "orbit", "--kind", "horocycle", "--tmax", "2", "--dt", "0.01"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn out_flag_matches_stdout() {
    let dir = std::env::temp_dir().join("homodyn_cli_test");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("gap.csv");
    let to_stdout = run(&["qform", "gap", "--rmax", "30"]);
    let to_file = run(&[
        "qform", "gap", "--rmax", "30", "--out", path.to_str().unwrap(),
    ]);
    assert!(to_stdout.status.success() && to_file.status.success());
    assert!(to_file.stdout.is_empty());
    assert_eq!(std::fs::read(&path).unwrap(), to_stdout.stdout);
}

#[test]
fn shapes_across_subcommands() {
    for args in [
        vec!["flow", "nondiv", "--kind", "horocycle", "--tmax", "5", "--dt", "0.01", "--height", "10"],
        vec!["torus", "closure", "--v", "sqrt2,1,0", "--height", "50"],
        vec!["torus", "average", "--v", "sqrt2,1", "--mode", "1,-1", "--tmax", "50", "--dt", "0.01"],
        vec!["shear", "table", "--q", "1,0.00000001,0,1"],
        vec!["shear", "extension", "--coeffs", "0,0,1", "--k", "0", "--len", "1", "--delta", "0.1"],
        vec!["shear", "joint", "--r1", "0.3", "--r2", "-0.3"],
        vec!["entropy", "partition", "--weights", "0.5,0.25,0.25"],
        vec!["entropy", "stretch", "--factors", "2:1,0.5:1"],
        vec!["entropy", "translation", "--algebra", "sl2", "--matrix", "2,0,0,0.5"],
        vec!["qform", "search", "--form", "1,-sqrt2/2,0,0,0,sqrt3", "--r", "0.5", "--eps", "0.01", "--nbox", "200"],
        vec!["qform", "count", "--form", "1,0,0,1,0,-sqrt2", "--a", "-1", "--b", "1", "--radius", "10"],
        vec!["stilde", "--algebra", "sl2", "--a", "1,0,0", "--u", "0,1,0"],
    ] {
        let out = run(&args);
        assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
        check_shape(&stdout_lines(&out));
    }
}

#[test]
fn exit_codes() {
    // unknown flag: usage on stderr, exit 2
    let out = run(&["jordan", "--matrix", "1,0,0,1", "--frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());
    assert!(out.stdout.is_empty());

    // validation failures: exit 2
    for args in [
        vec!["jordan", "--matrix", "1,2,3"],
        vec!["entropy", "rate", "--system", "baker", "--p", "0.5", "--kmax", "3"],
        vec!["qform", "signature", "--form", "1,2"],
        vec!["entropy", "rate", "--system", "bernoulli", "--p", "1.5", "--kmax", "3"],
        // rational form: the counting hypothesis rejects it up front
        vec![
            "qform", "ratio", "--form", "1,0,0,0,1,0,0,1,0,-1", "--a", "-1", "--b", "1",
            "--radii", "5,10", "--mc", "20000",
        ],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }

    // numerical failures: exit 3
    for args in [
        // zero displacement never reaches the threshold
        vec!["shear", "table", "--q", "1,0,0,1", "--l", "1"],
        // past the exact-cylinder backend cap
        vec!["entropy", "rate", "--system", "bernoulli", "--p", "0.5", "--kmax", "61"],
    ] {
        let out = run(&args);
        assert_eq!(out.status.code(), Some(3), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }

    // help exits 0
    let out = run(&["--help"]);
    assert_eq!(out.status.code(), Some(0));
}
