use std::path::PathBuf;
use std::process::Command;

use cyclat::cli::{run, EXIT_FALSE, EXIT_OK, EXIT_PRECONDITION, EXIT_USAGE};
use cyclat::graphkit::{build_spielberg, to_dot, GraphSpecInput};
use cyclat::presentation::SearchOptions;
use cyclat::zmod::{build, ModSpec};

fn golden(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Compares with a golden file; `CYCLAT_BLESS=1` rewrites it.
fn check_golden(name: &str, actual: &str) {
    let path = golden(name);
    if std::env::var_os("CYCLAT_BLESS").is_some() {
        std::fs::write(&path, actual).unwrap();
    }
    let expected = std::fs::read_to_string(&path).unwrap();
    assert_eq!(actual, expected, "golden mismatch for {name}");
}

fn cyclat(args: &[&str]) -> cyclat::cli::Outcome {
    run(std::iter::once("cyclat").chain(args.iter().copied()))
}

#[test]
fn ring_reports() {
    let o = cyclat(&["ring", "--p", "2"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("h = -1\n"));
    let o = cyclat(&["ring", "--p", "3"]);
    assert!(o.stdout.contains("h = -x\n"));
    assert_eq!(cyclat(&["ring", "--p", "4"]).code, EXIT_USAGE);
}

#[test]
fn module_reports() {
    let o = cyclat(&["module", "invariant-basis", "cyclicR(2,1)"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.starts_with("rank 4 basis: 1 orbit(s) + 2 fixed"));
    assert_eq!(cyclat(&["module", "check-noncyc", "triv(5)"]).code, EXIT_OK);
    let bad = cyclat(&["module", "build", "cyclicR(2"]);
    assert_eq!(bad.code, EXIT_USAGE);
    assert!(bad.stderr.contains("parse error"));
    assert_eq!(cyclat(&["module", "frobnicate", "triv(2)"]).code, EXIT_USAGE);
}

#[test]
fn spec_file_argument() {
    let dir = std::env::temp_dir().join(format!("cyclat-spec-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("m.spec");
    std::fs::write(&path, "# R/(3) plus a trivial Z/2\ncyclicR(3,1)\n+ triv(2)\n").unwrap();
    let o = cyclat(&["module", "build", path.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("order 18"));
}

#[test]
fn inclusion_reports() {
    let o = cyclat(&["inclusion", "check", "cyclicR(2,2)", "--sub", "t"]);
    assert_eq!(o.code, EXIT_FALSE);
    let o = cyclat(&["inclusion", "witness", "cyclicR(2,2)", "--sub", "t"]);
    assert_eq!(o.code, EXIT_FALSE);
    assert!(o.stdout.contains("lambda = s"));
    for sub in ["all", "zero"] {
        assert_eq!(cyclat(&["inclusion", "check", "cyclicR(2,2)", "--sub", sub]).code, EXIT_OK);
    }
    assert_eq!(cyclat(&["inclusion", "diagram", "cyclicR(2,2)", "--sub", "t"]).code, EXIT_FALSE);
    assert_eq!(cyclat(&["inclusion", "diagram", "cyclicR(2,1)+triv(2)", "--gens", "(1,0,0)"]).code, EXIT_OK);
    assert_eq!(cyclat(&["inclusion", "check", "triv(2)", "--gens", "(1,2)"]).code, EXIT_USAGE);
}

#[test]
fn graph_reports() {
    let o = cyclat(&["graph", "ktheory", "strand", "4", "--p", "3"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.contains("(0, Z^3)"));
    let o = cyclat(&["graph", "verify", "spielberg", "cyclic(5,4)"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stdout.starts_with("K0 = Z/5, K1 = 0, map OK"));
    let o = cyclat(&["graph", "dot", "strand", "1", "--depth", "2"]);
    assert_eq!(o.stdout.matches("label=").count(), 3);
    assert_eq!(cyclat(&["graph", "ktheory", "strand", "2", "--depth", "1"]).code, EXIT_USAGE);
    assert_eq!(cyclat(&["graph", "build", "strand", "3", "--cycled-from", "1", "--delete", "1"]).code, EXIT_PRECONDITION);
}

#[test]
fn tampered_input_is_a_precondition_failure() {
    let m = build(&ModSpec::parse("cyclic(5,4)").unwrap(), 2).unwrap();
    let mut inp = GraphSpecInput::from_module(&m, &SearchOptions::default()).unwrap();
    let dup = inp.b[0].clone();
    inp.b.push(dup);
    let dir = std::env::temp_dir().join(format!("cyclat-input-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("tampered.json");
    std::fs::write(&path, serde_json::to_string(&inp).unwrap()).unwrap();
    let o = cyclat(&["graph", "verify", "realization", "--input", path.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_PRECONDITION, "{}", o.stderr);
    inp.b.pop();
    std::fs::write(&path, serde_json::to_string(&inp).unwrap()).unwrap();
    let o = cyclat(&["graph", "verify", "realization", "--input", path.to_str().unwrap()]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
}

#[test]
fn structured_goldens() {
    let o = cyclat(&["--format", "structured", "module", "invariant-basis", "cyclicR(2,1)"]);
    check_golden("invariant_basis_cyclicR_2_1.json", &o.stdout);
    let o = cyclat(&["--format", "structured", "inclusion", "check", "cyclicR(2,2)", "--sub", "t"]);
    check_golden("inclusion_check_r4_t.json", &o.stdout);
}

#[test]
fn dot_golden_for_trivial_z2() {
    let m = build(&ModSpec::TrivCyclic(2), 2).unwrap();
    let inp = GraphSpecInput::from_module(&m, &SearchOptions::default()).unwrap();
    let g = build_spielberg(&inp).unwrap();
    let dot = to_dot(&g, 1).unwrap();
    assert_eq!(dot, to_dot(&g, 1).unwrap());
    check_golden("realization_z2_depth1.dot", &dot);
}

#[test]
fn same_seed_same_bytes() {
    let args = ["--seed", "7", "--format", "structured", "module", "invariant-basis", "cyclic(5,4)+cyclicR(2,1)"];
    assert_eq!(cyclat(&args), cyclat(&args));
}

#[test]
fn binary_exit_codes() {
    let bin = env!("CARGO_BIN_EXE_cyclat");
    let code = |args: &[&str]| Command::new(bin).args(args).output().unwrap().status.code();
    assert_eq!(code(&["ring", "--p", "5"]), Some(EXIT_OK));
    assert_eq!(code(&["ring", "--p", "9"]), Some(EXIT_USAGE));
    assert_eq!(code(&["inclusion", "check", "cyclicR(2,2)", "--sub", "t"]), Some(EXIT_FALSE));
    assert_eq!(code(&["--help"]), Some(EXIT_OK));
}
