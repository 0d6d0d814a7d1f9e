use std::process::{Command, Output};

use serde_json::Value;

fn spectra(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spectra"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = spectra(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid json")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn moments_of_the_free_group() {
    let v = json(&[
        "moments", "--group", "free:2", "--set", "a,A,b,B", "--nmax", "3",
    ]);
    assert_eq!(v["schema"], "spectra/1");
    assert_eq!(v["config"]["params"]["nmax"], 3);
    let taus: Vec<&str> = v["result"]["rows"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["tau"].as_str().unwrap())
        .collect();
    assert_eq!(taus, ["1/4", "7/64", "29/512"]);
}

#[test]
fn moments_agree_across_engines() {
    let radial = json(&["moments", "--nmax", "4", "--engine", "radial"]);
    let dense = json(&["moments", "--nmax", "4", "--engine", "dense"]);
    assert_eq!(radial["result"]["rows"], dense["result"]["rows"]);
}

#[test]
fn moments_of_z2() {
    let v = json(&[
        "moments", "--group", "zd:2", "--set", "a,A,b,B", "--nmax", "2",
    ]);
    assert_eq!(v["result"]["rows"][0]["tau"], "1/4");
}

#[test]
fn asymmetric_set_is_rejected() {
    let out = spectra(&["moments", "--group", "free:2", "--set", "a,b"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("set not symmetric: missing A"));
}

#[test]
fn bad_arguments_exit_with_validation_status() {
    assert_eq!(spectra(&["frobnicate"]).status.code(), Some(3));
    assert_eq!(spectra(&["moments", "--nmax", "x"]).status.code(), Some(3));
    assert_eq!(
        spectra(&["moments", "--group", "free:0"]).status.code(),
        Some(3)
    );
    let out = spectra(&["moments", "--group", "fpc:2,x"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("position 6"));
    assert_eq!(spectra(&["--help"]).status.code(), Some(0));
}

#[test]
fn guard_violations_are_validation_errors() {
    let out = spectra(&[
        "extract", "--k", "8", "--engine", "dense", "--guard", "1000",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("guard"));
}

#[test]
fn extract_k2() {
    let v = json(&[
        "extract", "--group", "free:2", "--set", "a,A,b,B", "--k", "2",
    ]);
    let c = &v["result"]["rows"][0];
    assert_eq!(c["corollary3_ok"], true);
    assert_eq!(c["b_l1"], "13/16");
    assert_eq!(c["s_k_size"], "13");
    assert_eq!(v["result"]["all_ok"], true);
}

#[test]
fn extract_k60_radial() {
    let v = json(&["extract", "--k", "60", "--engine", "radial"]);
    let c = &v["result"]["rows"][0];
    assert!((c["theorem1_rhs"].as_f64().unwrap() - 0.0594).abs() < 5e-5);
    assert_eq!(c["consistency_ok"], true);
}

#[test]
fn extract_k1_returns_sigma() {
    let v = json(&["extract", "--k", "1", "--engine", "dense"]);
    let words = &v["result"]["rows"][0]["s_k"]["words"];
    assert_eq!(*words, serde_json::json!(["a", "A", "b", "B"]));
    let v = json(&["extract", "--k", "1", "--engine", "radial"]);
    assert_eq!(
        v["result"]["rows"][0]["s_k"]["distances"],
        serde_json::json!([1])
    );
}

#[test]
fn extract_on_a_free_product() {
    let v = json(&["extract", "--group", "fpc:2,3", "--k", "2,4", "--augment"]);
    let rows = v["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[1]["k"], 4);
    assert_eq!(rows[0]["rhs_certified"], false);
    assert!(rows[0]["augment"]["bound"].is_number());
}

#[test]
fn reproduce_table() {
    let v = json(&["reproduce", "--ks", "20:120:20"]);
    let rows = v["result"]["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 6);
    let k40 = &rows[1];
    assert_eq!(k40["k"], 40);
    assert!((k40["theorem1_rhs"].as_f64().unwrap() - 0.704).abs() < 1e-3);
    let first = rows.iter().find(|r| r["chain_holds"] == true).unwrap();
    assert_eq!(v["result"]["smallest_k"], first["k"]);
    let k = first["k"].as_u64().unwrap();
    assert!((80..=100).contains(&k));
    assert!(rows.iter().all(|r| r["certificate_ok"] == true));
}

#[test]
fn reproduce_empty_range() {
    let out = spectra(&["reproduce", "--ks", "", "--format", "csv"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("k,s_k_size"));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn epsilon_chain_for_f2() {
    let v = json(&["epsilon", "--ks", "1:140"]);
    assert!((v["result"]["epsilon"].as_f64().unwrap() - 0.05188).abs() < 1e-5);
    assert_eq!(v["result"]["smallest_k"], 86);
}

#[test]
fn epsilon_needs_an_upper_radius() {
    let out = spectra(&["epsilon", "--group", "fpc:2,3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("lower bound"));
}

#[test]
fn sharpness_table() {
    let v = json(&["sharpness", "--n", "10,100,1000"]);
    assert_eq!(v["result"]["ratios_decreasing"], true);
    let r = v["result"]["rows"][1]["ratio"].as_f64().unwrap();
    assert!((r - 1.0 / (1.0 + 100f64.ln())).abs() < 1e-12);
}

#[test]
fn gamma_of_f2() {
    let v = json(&["gamma"]);
    let g = v["result"]["rows"][0]["value"].as_f64().unwrap();
    assert!((g - 2.0 * (4.0 * 3f64.sqrt() / 2.0).sqrt()).abs() < 1e-9);
}

#[test]
fn walk_frequency_matches_exact_value() {
    let args = [
        "walk", "--group", "free:2", "--steps", "4", "--trials", "100000", "--seed", "42",
    ];
    let a = spectra(&args);
    let b = spectra(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    let v: Value = serde_json::from_slice(&a.stdout).unwrap();
    let row = &v["result"]["rows"][0];
    assert_eq!(row["exact"], "7/64");
    assert_eq!(row["seed"], 42);
    let p = 7.0 / 64.0;
    let sd = (p * (1.0 - p) / 1e5f64).sqrt();
    assert!((row["frequency"].as_f64().unwrap() - p).abs() <= 3.0 * sd);
}

#[test]
fn walk_single_trial() {
    let v = json(&["walk", "--steps", "2", "--trials", "1"]);
    let f = v["result"]["rows"][0]["frequency"].as_f64().unwrap();
    assert!(f == 0.0 || f == 1.0);
}

#[test]
fn walk_rejects_odd_steps() {
    let out = spectra(&["walk", "--steps", "3"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stderr(&out).contains("steps must be even"));
}

#[test]
fn csv_and_json_carry_the_same_values() {
    let v = json(&["moments", "--nmax", "4"]);
    let out = spectra(&["moments", "--nmax", "4", "--format", "csv"]);
    let mut reader = csv::ReaderBuilder::new().from_reader(out.stdout.as_slice());
    for (record, row) in reader
        .records()
        .zip(v["result"]["rows"].as_array().unwrap())
    {
        let record = record.unwrap();
        assert_eq!(
            record[0].parse::<u64>().unwrap(),
            row["n"].as_u64().unwrap()
        );
        assert_eq!(&record[1], row["tau"].as_str().unwrap());
        assert_eq!(
            record[2].parse::<f64>().unwrap(),
            row["root"].as_f64().unwrap()
        );
        match row["ratio"].as_f64() {
            Some(r) => assert_eq!(record[3].parse::<f64>().unwrap(), r),
            None => assert!(record[3].is_empty()),
        }
    }
}

#[test]
fn out_flag_writes_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("walk.json");
    let out = spectra(&["walk", "--out", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(v["command"], "walk");
}
