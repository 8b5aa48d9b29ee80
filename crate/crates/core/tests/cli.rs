use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn corpus(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("corpus").join(name)
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tconvex")).args(args).output().expect("binary runs")
}

fn report(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

#[test]
fn cells_of_a_square_bound() {
    let out = run(&["cells", "x^2 < t"]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    let cells = r["result"]["cells"].as_array().unwrap();
    assert_eq!(cells.len(), 1);
    assert_eq!(cells[0]["kind"], "interval");
    assert_eq!(r["verdict"], "pass");
}

#[test]
fn scaling_is_not_a_risometry() {
    let out = run(&["--quiet", "risometry", "2*x", "O"]);
    assert_eq!(code(&out), 1);
    let r = report(&out);
    assert_eq!(r["verdict"], "violation");
    assert_eq!(r["result"]["violating_pair"].as_array().unwrap().len(), 2);
}

#[test]
fn translation_plus_small_term_is_a_risometry() {
    let out = run(&["--quiet", "--pairs", "2000", "risometry", "x + 1; y + t*x^2", "O"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stdout));
}

#[test]
fn jp_check_holds_on_a_product() {
    let path = corpus("jp_product.json");
    let out = run(&["--quiet", "--samples", "30", "--pairs", "300", "jp-check", path.to_str().unwrap()]);
    assert_eq!(code(&out), 0);
    let r = report(&out);
    let pieces = r["result"]["pieces"].as_array().unwrap();
    let held: Vec<&Value> = pieces.iter().filter(|p| p["verdict"] == "holds").collect();
    assert!(!held.is_empty());
    for p in held {
        let m = p["min_margin"].as_str().unwrap();
        assert!(m == "+inf" || !m.starts_with('-') && m != "0", "margin {m}");
    }
}

#[test]
fn malformed_candidate_reports_path_and_position() {
    let path = corpus("malformed.json");
    let out = run(&["--quiet", "tstrat-verify", path.to_str().unwrap()]);
    assert_eq!(code(&out), 2);
    let err = report(&out)["error"].as_str().unwrap().to_string();
    assert!(err.contains("malformed.json") && err.contains("line 3 column 33"), "{err}");
}

#[test]
fn bad_formula_reports_position() {
    let out = run(&["--quiet", "cells", "x^2 <* t"]);
    assert_eq!(code(&out), 2);
    assert!(report(&out)["error"].as_str().unwrap().contains("position 5"));
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&["no-such-command"])), 2);
    assert_eq!(code(&run(&["--samples", "0", "cells", "x > 0"])), 2);
    assert_eq!(code(&run(&["whitney", "f.json", "--upper", "1", "--lower", "0", "--at", "1,a"])), 2);
}

#[test]
fn empty_corpus_filter() {
    let out = run(&["--quiet", "corpus", "--filter", "no-such-scenario"]);
    assert_eq!(code(&out), 0);
    assert_eq!(report(&out)["result"]["rows"], serde_json::json!([]));
}

#[test]
fn reports_echo_the_config() {
    let out = run(&["--quiet", "--seed", "7", "--truncation", "9/2", "eval", "t^(1/2) + 1"]);
    let cfg = &report(&out)["config"];
    assert_eq!(cfg["seed"], 7);
    assert_eq!(cfg["truncation"], "9/2");
    assert_eq!(cfg["pairs"], 10_000);
    assert_eq!(report(&out)["result"]["rv"], "1·t^0@RV");
}

#[test]
fn identical_runs_give_identical_reports() {
    let path = corpus("cross_without_origin.json");
    let args = ["--quiet", "--json", "tstrat-verify", path.to_str().unwrap()];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(code(&a), 1);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn whitney_cusp_fails_b_at_the_origin() {
    let path = corpus("whitney_cusp.json");
    let out = run(&["--quiet", "whitney", path.to_str().unwrap(), "--upper", "2", "--lower", "1", "--at", "0,0,0"]);
    assert_eq!(code(&out), 1);
    let r = &report(&out)["result"];
    assert_eq!(r["a_holds"], true);
    assert_eq!(r["b_holds"], false);
    assert!(r["b_witness"]["params"].is_array());
}

#[test]
fn tangent_cone_of_the_cusp_is_a_half_line() {
    let out = run(&["--quiet", "tangent-cone", "y^2 - x^3 = 0", "--at", "0,0"]);
    assert_eq!(code(&out), 0);
    let cone = report(&out)["result"]["cone"].clone();
    assert_eq!(cone.as_array().unwrap().len(), 2, "{cone}");
}
