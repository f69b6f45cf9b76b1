use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn autobid(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_autobid")).args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name).display().to_string()
}

fn tmp(name: &str) -> PathBuf {
    Path::new(env!("CARGO_TARGET_TMPDIR")).join(format!("cli-{}-{name}", std::process::id()))
}

fn read_json(p: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(p).unwrap()).unwrap()
}

#[test]
fn bounds_reports_closed_forms_and_tightness() {
    let out = tmp("bounds.json");
    let o = autobid(&["bounds", "--types", "0,1", "--budgeted", "--json", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("tight: true"));
    let v = read_json(&out);
    assert!((v["rmp_upper"].as_f64().unwrap() - 2.1885).abs() < 5e-4);
    assert_eq!(v["lower"]["name"], "budget_commontype");

    let o = autobid(&["bounds", "--types", "0,1", "--eta", "0.3", "--budget-free", "--json", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    let v = read_json(&out);
    let q = v["closed_form"].as_array().unwrap().iter().find(|c| c[0] == "Q(eta)").unwrap()[1].as_f64().unwrap();
    assert!((v["rmp_upper"].as_f64().unwrap() - q).abs() < 1e-4);
}

#[test]
fn curves_write_csv() {
    let o = autobid(&["curves", "--which", "fig1a", "--points", "11"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next().unwrap(), "x,value,curve");
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() >= 11);
    let last_p = rows.iter().find(|r| r.starts_with("1,") && r.ends_with(",P")).unwrap();
    let v: f64 = last_p.split(',').nth(1).unwrap().parse().unwrap();
    assert!(v > 2.0 && v < 2.2);
    assert_eq!(code(&autobid(&["curves", "--which", "nope"])), 1);
}

#[test]
fn verify_construction_exit_codes() {
    let o = autobid(&["verify-construction", "--name", "reserve_valuemax", "--param", "eta=0.6"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("true"));
    let out = tmp("constructions.json");
    let o = autobid(&["verify-construction", "--json", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert_eq!(read_json(&out).as_array().unwrap().len(), 7);
    // out-of-domain parameter
    let o = autobid(&["verify-construction", "--name", "budget_commontype", "--param", "t=0.5"]);
    assert_eq!(code(&o), 1);
    let o = autobid(&["verify-construction", "--name", "budget_commontype", "--param", "t"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn saved_construction_files_verify_again() {
    let (i, p) = (tmp("hy_inst.json"), tmp("hy_prof.json"));
    let o = autobid(&[
        "verify-construction",
        "--name",
        "budgetfree_hybrid",
        "--save-instance",
        i.to_str().unwrap(),
        "--save-profile",
        p.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let o = autobid(&["verify-profile", "--instance", i.to_str().unwrap(), "--profile", p.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn verify_profile_verdicts() {
    let inst = data("universal_budget_instance.json");
    let good = data("universal_budget_profile.json");
    let o = autobid(&["verify-profile", "--instance", &inst, "--profile", &good]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).contains("Verified"));
    // the budgeted agent can only be certified by the constrained mixture stage
    let o = autobid(&["verify-profile", "--instance", &inst, "--profile", &good, "--pure-only"]);
    assert_eq!(code(&o), 3, "{}", stdout(&o));
    let o = autobid(&["verify-profile", "--instance", &inst, "--profile", &data("universal_budget_overpay_profile.json")]);
    assert_eq!(code(&o), 2, "{}", stdout(&o));
    let o = autobid(&["verify-profile", "--instance", &inst, "--profile", &good, "--class", "mne"]);
    assert_eq!(code(&o), 0);
    // the CE check needs finite support; this profile is a product of pure bids
    let o = autobid(&["verify-profile", "--instance", &inst, "--profile", &good, "--class", "ce"]);
    assert_eq!(code(&o), 1);
    let fin = tmp("ub_finite.json");
    std::fs::write(&fin, r#"{"kind": "finite", "atoms": [{"bids": [[0.0, 1.0], [0.0, 1.0]], "prob": 1.0}]}"#).unwrap();
    let o = autobid(&["verify-profile", "--instance", &inst, "--profile", fin.to_str().unwrap(), "--class", "ce"]);
    assert!([0, 3].contains(&code(&o)), "{}", stdout(&o));
}

#[test]
fn verify_profile_json_and_input_errors() {
    let out = tmp("commontype.json");
    let o = autobid(&[
        "verify-profile",
        "--instance",
        &data("budget_commontype_instance.json"),
        "--profile",
        &data("budget_commontype_profile.json"),
        "--json",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v = read_json(&out);
    assert_eq!(v["verdict"], "verified");
    assert!((v["ratio"].as_f64().unwrap() - 2.1885).abs() < 5e-4);
    let o = autobid(&["verify-profile", "--instance", "/nonexistent.json", "--profile", &data("budget_commontype_profile.json")]);
    assert_eq!(code(&o), 1);
    // a profile for the wrong number of agents or items
    let bad = tmp("one_agent.json");
    std::fs::write(&bad, r#"{"kind": "finite", "atoms": [{"bids": [[0.5]], "prob": 1.0}]}"#).unwrap();
    let o = autobid(&["verify-profile", "--instance", &data("budget_commontype_instance.json"), "--profile", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn proxy_preserves_opt() {
    let out = tmp("proxy.json");
    let o = autobid(&[
        "proxy",
        "--instance",
        &data("universal_budget_instance.json"),
        "--profile",
        &data("universal_budget_profile.json"),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let err = String::from_utf8_lossy(&o.stderr);
    let nums: Vec<f64> = err.split_whitespace().filter_map(|w| w.parse().ok()).take(2).collect();
    assert_eq!(nums.len(), 2, "{err}");
    assert!((nums[0] - nums[1]).abs() <= 1e-12);
    let proxy = autobid_poa::auction::Instance::from_json(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(!proxy.budgeted());
}

#[test]
fn learn_writes_summary_and_log() {
    let (json, log) = (tmp("learn.json"), tmp("learn.csv"));
    let o = autobid(&["learn", "--rounds", "2000", "--seed", "3", "--json", json.to_str().unwrap(), "--log", log.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = read_json(&json);
    assert_eq!(v["rounds"], 2000);
    assert_eq!(v["window_rounds"], 500);
    assert_eq!(std::fs::read_to_string(&log).unwrap().lines().count(), 2001);
    let again = tmp("learn2.json");
    autobid(&["learn", "--rounds", "2000", "--seed", "3", "--json", again.to_str().unwrap()]);
    assert_eq!(read_json(&again), v);
    let o = autobid(&["learn", "--values", "1,0.52", "--rounds", "10"]);
    assert_eq!(code(&o), 1);
    let o = autobid(&["learn", "--rounds", "500", "--algorithm", "epsilon-greedy"]);
    assert_eq!(code(&o), 0);
}

#[test]
fn brute_poa_small_run() {
    let out = tmp("probe.json");
    let o = autobid(&["brute-poa", "--types", "0,1", "--budgeted", "--samples", "20", "--json", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let v = read_json(&out);
    assert_eq!(v["samples"], 20);
    assert_eq!(v["within_bound"], true);
    assert!(v["worst_ratio"].as_f64().unwrap() <= v["bound"].as_f64().unwrap() + 0.02);
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(code(&autobid(&[])), 1);
    assert_eq!(code(&autobid(&["frobnicate"])), 1);
    assert_eq!(code(&autobid(&["bounds"])), 1);
    assert_eq!(code(&autobid(&["bounds", "--types", "0,1", "--budgeted", "--budget-free"])), 1);
    assert_eq!(code(&autobid(&["bounds", "--types", "1.5"])), 1);
    assert_eq!(code(&autobid(&["--help"])), 0);
    assert_eq!(code(&autobid(&["--version"])), 0);
}
