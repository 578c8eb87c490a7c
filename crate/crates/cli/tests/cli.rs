use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use lotforge::num::{int, parse_rational, Rational};
use serde_json::Value;

fn lotforge(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lotforge"))
        .args(args)
        .env_remove("LOTFORGE_TRACE")
        .output()
        .expect("binary runs")
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("lotforge-cli-{}-{name}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn exact(v: &Value) -> Rational {
    parse_rational(v["exact"].as_str().unwrap()).unwrap()
}

fn solve_report(instance: &Path, schedule: &Path) -> Value {
    let out = lotforge(&["solve", p(instance), "-o", p(schedule)]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn gap_instance_costs_one() {
    let dir = scratch("gap");
    let inst = dir.join("gap.json");
    let sched = dir.join("gap.sched.json");
    assert!(lotforge(&["generate", "--family", "kc-gap", "--R", "1000", "-o", p(&inst)]).status.success());
    let report = solve_report(&inst, &sched);
    assert_eq!(exact(&report["alg_cost"]["total"]), int(1));
    assert!(exact(&report["ratio_vs_lp"]) <= int(10));
    assert_eq!(lotforge(&["verify", p(&inst), p(&sched)]).status.code(), Some(0));
}

#[test]
fn single_period_costs_its_order() {
    let dir = scratch("single");
    let inst = dir.join("one.json");
    let sched = dir.join("one.sched.json");
    assert!(lotforge(&["generate", "--T", "1", "--N", "1", "--seed", "3", "-o", p(&inst)]).status.success());
    let json: Value = serde_json::from_str(&std::fs::read_to_string(&inst).unwrap()).unwrap();
    let k1 = parse_rational(json["K"][0].as_str().unwrap()).unwrap();
    let report = solve_report(&inst, &sched);
    assert_eq!(exact(&report["alg_cost"]["total"]), k1);
}

#[test]
fn seed_five_report_is_consistent_and_verifies() {
    let dir = scratch("seed5");
    let inst = dir.join("s5.json");
    let sched = dir.join("s5.sched.json");
    assert!(lotforge(&["generate", "--seed", "5", "--T", "6", "--N", "4", "-o", p(&inst)]).status.success());
    let report = solve_report(&inst, &sched);
    let cost = &report["alg_cost"];
    let total = exact(&cost["total"]);
    assert_eq!(exact(&cost["ordering"]) + exact(&cost["holding"]), total);
    let lp = exact(&report["lp_value"]);
    assert_eq!(exact(&report["ratio_vs_lp"]), &total / &lp);
    assert!(report["wall_time_ms"].is_null());
    assert_eq!(lotforge(&["verify", p(&inst), p(&sched)]).status.code(), Some(0));

    let text = std::fs::read_to_string(&sched).unwrap();
    let mut tampered: Value = serde_json::from_str(&text).unwrap();
    let qty = parse_rational(tampered["assignment"][0]["qty"].as_str().unwrap()).unwrap();
    tampered["assignment"][0]["qty"] = Value::String(lotforge::num::format_rational(&(qty + int(1))));
    let bad = dir.join("bad_qty.json");
    std::fs::write(&bad, tampered.to_string()).unwrap();
    let out = lotforge(&["verify", p(&inst), p(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(!out.stderr.is_empty());

    let mut tampered: Value = serde_json::from_str(&text).unwrap();
    tampered["costs"]["total"] = Value::String("0/1".into());
    let bad = dir.join("bad_cost.json");
    std::fs::write(&bad, tampered.to_string()).unwrap();
    let out = lotforge(&["verify", p(&inst), p(&bad)]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("total cost field"));
}

#[test]
fn bench_with_oracle_is_deterministic_and_within_ten() {
    let args = ["bench", "--seeds", "1..10", "--T", "6", "--N", "4", "--oracle"];
    let first = lotforge(&args);
    assert!(first.status.success(), "{}", String::from_utf8_lossy(&first.stderr));
    let second = lotforge(&args);
    assert_eq!(first.stdout, second.stdout);
    let csv = String::from_utf8(first.stdout).unwrap();
    let mut lines = csv.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let col = header.iter().position(|h| *h == "ratio_vs_opt").unwrap();
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 10);
    for (k, row) in rows.iter().enumerate() {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields.len(), header.len());
        assert_eq!(fields[0], format!("seed-{}", k + 1));
        if !fields[col].is_empty() {
            assert!(parse_rational(fields[col]).unwrap() <= int(10));
        }
    }
}

#[test]
fn empty_seed_range_prints_only_the_header() {
    let out = lotforge(&["bench", "--seeds", "5..4"]);
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap().lines().count(), 1);
}

#[test]
fn exit_codes() {
    assert_eq!(lotforge(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(lotforge(&["solve", "/nonexistent/instance.json"]).status.code(), Some(1));
    assert_eq!(lotforge(&["bench", "--seeds", "1..2", "--T", "15", "--oracle"]).status.code(), Some(1));
    assert_eq!(lotforge(&["--help"]).status.code(), Some(0));

    let dir = scratch("cap");
    let inst = dir.join("gap.json");
    assert!(lotforge(&["generate", "--family", "kc-gap", "-o", p(&inst)]).status.success());
    let out = lotforge(&["solve", p(&inst), "--max-rounds", "1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn trace_goes_to_stderr() {
    let dir = scratch("trace");
    let inst = dir.join("gap.json");
    assert!(lotforge(&["generate", "--family", "kc-gap", "-o", p(&inst)]).status.success());
    let out = Command::new(env!("CARGO_BIN_EXE_lotforge"))
        .args(["solve", p(&inst)])
        .env("LOTFORGE_TRACE", "1")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("cut S1={1} S2={2} I={0}"));
    let quiet = lotforge(&["solve", p(&inst)]);
    assert!(quiet.stderr.is_empty());
    assert_eq!(quiet.stdout, out.stdout);
}
