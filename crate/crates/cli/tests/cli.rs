use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    let mut p = PathBuf::from(env!("CARGO_MANIFEST_DIR"));
    p.push("../../data");
    p.push(name);
    p.display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_padic-tree")).args(args).output().expect("spawn")
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json on stdout")
}

#[test]
fn neighbors_and_envelope() {
    let o = run(&["tree", "--neighbors", "V(0;0)"]);
    assert_eq!(o.status.code(), Some(0));
    let v = json(&o);
    assert_eq!(v["command"], "tree");
    assert_eq!(v["config"]["p"], 3);
    assert_eq!(v["result"]["neighbors"]["count"], 4);
}

#[test]
fn input_errors_exit_two() {
    for args in [
        &["tree", "--neighbors", "W(0;0)"][..],
        &["--depth", "1", "tree", "--neighbors", "V(0;0)"],
        &["--prec", "4", "--depth", "8", "tree", "--neighbors", "V(0;0)"],
        &["integrate", "--measure", "tate", "--divisor", "/nonexistent.json"],
        &["periods", "--group", "/nonexistent.json"],
    ] {
        let o = run(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert_eq!(json(&o)["error"]["kind"], "input", "{args:?}");
        assert!(!o.stderr.is_empty());
    }
    // mismatched prime between flags and package
    let g = data("tate_group.json");
    assert_eq!(run(&["--p", "5", "periods", "--group", &g]).status.code(), Some(2));
}

#[test]
fn integrate_tate() {
    let d = data("divisor.json");
    let v = json(&run(&["integrate", "--measure", "tate", "--divisor", &d]));
    let r = &v["result"];
    assert_eq!(r["ord_certified"], true);
    assert_eq!(r["ord"], r["ord_from_divisor"]);
    let v2 = json(&run(&["--depth", "2", "integrate", "--measure", "tate", "--divisor", &d]));
    assert_eq!(v2["result"]["ord_certified"], false);
}

#[test]
fn periods_of_tate_package() {
    let v = json(&run(&["periods", "--group", &data("tate_group.json")]));
    let r = &v["result"];
    assert_eq!(r["genus"], 1);
    assert_eq!(r["ord_q"][0][0], "2");
    assert_eq!(r["ord_symmetric"], true);
}

#[test]
fn indefinite_closes_for_both_models() {
    let (t1, t3) = (data("tau1.json"), data("tau3.json"));
    for (eig, model) in [("tate_eigendata.json", "lift"), ("tate_nu_eigendata.json", "nu")] {
        let o = run(&["indefinite", "--eigendata", &data(eig), "--tau1", &t1, "--tau2", &t3, "--model", model]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let r = &json(&o)["result"];
        assert_eq!(r["residual_vanishes"], true, "{model}");
        assert_eq!(r["ord"], "-2");
        assert!(r["certified_mod"].as_i64().unwrap() >= 4);
    }
}

#[test]
fn check_suite_passes() {
    let o = run(&["check", "--suite", "all"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
}

#[test]
fn output_is_deterministic() {
    let args = ["--seed", "7", "check", "--suite", "embedding"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.stdout, b.stdout);
    let l1 = run(&["lift", "--eigendata", &data("tate_eigendata.json")]);
    let l2 = run(&["lift", "--eigendata", &data("tate_eigendata.json")]);
    assert_eq!(l1.stdout, l2.stdout);
}

#[test]
fn out_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("padic-tree-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let f = dir.join("o.json");
    let a = run(&["tree", "--path", "V(0;0)", "V(2;4)"]);
    let b = run(&["--out", f.to_str().unwrap(), "tree", "--path", "V(0;0)", "V(2;4)"]);
    assert!(b.stdout.is_empty());
    let fb: Value = serde_json::from_str(&std::fs::read_to_string(&f).unwrap()).unwrap();
    let mut va = json(&a);
    let mut fb = fb;
    va["config"]["out"] = Value::Null;
    fb["config"]["out"] = Value::Null;
    assert_eq!(va, fb);
    assert_eq!(va["result"]["path"]["length"], 2);
    std::fs::remove_dir_all(&dir).ok();
}
