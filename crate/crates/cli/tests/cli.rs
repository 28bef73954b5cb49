use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn chainsat(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_chainsat"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

const UNSAT: &str = "p cnf 2 4\n1 2 0\n1 -2 0\n-1 2 0\n-1 -2 0\n";

#[test]
fn solve_sat_reports_verified_model() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(
        dir.path(),
        "sat.cnf",
        "c tiny\np cnf 3 2\n1 2 3 0\n-1 -2 0\n",
    );
    for mode in ["full", "br", "dls", "oracle"] {
        let o = chainsat(&["solve", &f, "--mode", mode]);
        assert_eq!(o.status.code(), Some(10), "{mode}");
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["schema"], 1);
        assert_eq!(v["verdict"], "SAT");
        let model: Vec<i64> = v["model"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x.as_i64().unwrap())
            .collect();
        assert!(model.iter().any(|&l| [1, 2, 3].contains(&l)));
        assert!(model.contains(&-1) || model.contains(&-2));
    }
}

#[test]
fn solve_unsat_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "unsat.cnf", UNSAT);
    for mode in ["oracle", "full", "dls"] {
        let o = chainsat(&["solve", &f, "--mode", mode]);
        assert_eq!(o.status.code(), Some(20), "{mode}");
        let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
        assert_eq!(v["verdict"], "UNSAT");
        assert!(v["assignment"].is_null());
    }
}

#[test]
fn dls_mode_covers_full_cube() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.cnf", "p cnf 6 2\n1 2 3 0\n-4 5 6 0\n");
    let o = chainsat(&["solve", &f, "--mode", "dls"]);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["path"], "DLS");
    assert_eq!(v["stats"]["space"], "cube(6)");
}

#[test]
fn trace_flag_adds_trace() {
    let dir = tempfile::tempdir().unwrap();
    let g = chainsat(&["gen", "--k", "3", "--n", "12", "--m", "50", "--seed", "3"]);
    let f = write(dir.path(), "g.cnf", &stdout(&g));
    let plain: Value =
        serde_json::from_str(&stdout(&chainsat(&["solve", &f, "--mode", "br"]))).unwrap();
    let traced: Value = serde_json::from_str(&stdout(&chainsat(&[
        "solve", &f, "--mode", "br", "--trace",
    ])))
    .unwrap();
    assert!(plain.get("trace").is_none());
    let n = traced["trace"].as_array().map_or(0, Vec::len) as u64;
    assert_eq!(n, traced["stats"]["branchings"].as_u64().unwrap());
}

#[test]
fn parse_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "bad.cnf", "p cnf 2 1\n1 x 0\n");
    let o = chainsat(&["solve", &f]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("error"));
    assert_eq!(
        chainsat(&["solve", "/nonexistent.cnf"]).status.code(),
        Some(1)
    );
    assert_eq!(
        chainsat(&["solve", &f, "--c", "0.5"]).status.code(),
        Some(1)
    );
}

#[test]
fn gen_is_deterministic() {
    let args = ["gen", "--k", "3", "--n", "20", "--m", "85", "--seed", "42"];
    let a = chainsat(&args);
    assert_eq!(a.stdout, chainsat(&args).stdout);
    assert!(stdout(&a).starts_with("p cnf 20 85\n"));
    assert_eq!(stdout(&a).lines().count(), 86);
    let empty = chainsat(&["gen", "--k", "3", "--n", "5", "--m", "0"]);
    assert_eq!(stdout(&empty).trim(), "p cnf 5 0");
    assert_eq!(
        chainsat(&["gen", "--k", "4", "--n", "3", "--m", "1"])
            .status
            .code(),
        Some(1)
    );
}

#[test]
fn gen_writes_file() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("out.cnf");
    let o = chainsat(&[
        "gen",
        "--k",
        "4",
        "--n",
        "9",
        "--m",
        "7",
        "--seed",
        "1",
        "--out",
        p.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(p).unwrap().starts_with("p cnf 9 7"));
}

#[test]
fn bounds_table() {
    let o = chainsat(&["bounds"]);
    let rows: Vec<Vec<String>> = stdout(&o)
        .lines()
        .skip(1)
        .map(|l| l.split('\t').map(String::from).collect())
        .collect();
    let got: Vec<(&str, &str)> = rows
        .iter()
        .map(|r| (r[0].as_str(), r[1].as_str()))
        .collect();
    assert_eq!(
        got,
        [
            ("3", "1.32793"),
            ("4", "1.49857"),
            ("5", "1.59946"),
            ("6", "1.66646")
        ]
    );
    assert_eq!(chainsat(&["bounds", "--kmax", "99"]).status.code(), Some(1));
}

#[test]
fn chain_table_exact() {
    let o = chainsat(&["chain-table", "--exact"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let first = out.lines().nth(1).unwrap();
    let cols: Vec<&str> = first.split('\t').collect();
    assert_eq!((cols[0], cols[1], cols[5]), ("1", "*", "3/7"));
    assert!(cols[6].starts_with("0.98586"));
    assert_eq!(out.lines().count(), 39);
}

#[test]
fn cover_commands() {
    let o = chainsat(&["cover", "--cube", "10", "--rho", "1/3"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("coverage\texhaustive\t1024 checked\t0 missed"));

    let o = chainsat(&["cover", "--zeta", "*", "--nu", "2"]);
    let out = stdout(&o);
    assert!(
        out.contains("ell\t4") && out.contains("words\t49") && out.contains("0 missed"),
        "{out}"
    );

    assert_eq!(
        chainsat(&["cover", "--cube", "4", "--rho", "1/2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(chainsat(&["cover", "--cube", "4"]).status.code(), Some(1));
}

#[test]
fn check_agrees_with_oracle_in_parallel() {
    let o = chainsat(&[
        "--threads",
        "4",
        "check",
        "--k",
        "4",
        "--n",
        "11",
        "--m",
        "100",
        "--seeds",
        "60",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    assert!(stdout(&o).starts_with("agree\t60/60"));
}
