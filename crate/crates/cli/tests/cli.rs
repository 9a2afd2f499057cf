use std::process::{Command, Output};

use serde_json::Value;

fn cycmass(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cycmass"))
        .args(args)
        .env_remove("CYCMASS_JOBS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut a = args.to_vec();
    a.extend(["--format", "json"]);
    let o = cycmass(&a);
    let v = serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("{e}: {}", stdout(&o)));
    (v, o.status.code().unwrap())
}

#[test]
fn legendre_sweep_is_equal_at_every_prime() {
    let (v, code) = json(&["verify", "2:1,1,1,1", "--p-range", "5..97", "--jobs", "2"]);
    assert_eq!(code, 0);
    let reports = v.as_array().unwrap();
    let summary = reports.last().unwrap();
    assert_eq!(summary["all_accepted"], true);
    let rows = summary["reports"].as_array().unwrap();
    assert_eq!(rows.len(), 23);
    assert!(rows.iter().all(|r| r["verdict"] == "equal"));
}

#[test]
fn septic_family_at_29() {
    let (v, code) = json(&["verify", "7:2,4,4,4", "-p", "29"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "equal");
    assert_eq!(v["lhs"], "8/21");
    assert_eq!(v["rhs"], "8/21");
    assert_eq!(v["seed"], cycmass::factor::DEFAULT_SEED);
}

#[test]
fn hyperelliptic_linearized_at_7() {
    let (v, code) = json(&["verify", "hyperelliptic", "--h", "1,0,1,0,0,0,0,1", "-p", "7"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "equal");
    assert_eq!(v["rhs"], "9/2");
}

#[test]
fn symmetric_h_is_rejected_with_usage_error() {
    let o = cycmass(&["verify", "hyperelliptic", "--h", "1,1,0,0,0,0,0,1", "-p", "7"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("symmetry"));
}

#[test]
fn interior_only_needs_opt_in() {
    assert_eq!(cycmass(&["verify", "3:1,1,2,2", "-p", "5"]).status.code(), Some(1));
    let o = cycmass(&["verify", "3:1,1,2,2", "-p", "5", "--allow-interior-only"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn marked_label_does_not_change_the_mass() {
    for m in ["1", "2", "3", "4"] {
        let (v, code) = json(&["verify", "2:1,1,1,1", "-p", "13", "--marked-label", m]);
        assert_eq!(code, 0);
        assert_eq!(v["lhs"], "1/2");
    }
}

#[test]
fn moonen_table_at_11() {
    let o = cycmass(&["moonen", "-p", "11", "--format", "tsv"]);
    assert!(o.status.success());
    let out = stdout(&o);
    let row = out.lines().find(|l| l.starts_with("M[11]\t")).unwrap();
    assert!(row.ends_with("\t2/15"), "{row}");
    assert_eq!(out.lines().count(), 15);
}

#[test]
fn iko_case_b_at_7() {
    let (v, code) = json(&["iko", "caseB", "-p", "7"]);
    assert_eq!(code, 0);
    assert_eq!(v["count"], 1);
    assert_eq!(v["mass"], "1/6");
}

#[test]
fn iko_second_case_at_13() {
    let (v, code) = json(&["iko", "caseSecond", "-p", "13"]);
    assert_eq!(code, 0);
    assert_eq!(v["count"], 2);
}

#[test]
fn invariants_of_examples() {
    let (v, _) = json(&["invariants", "3:1,1,2,2", "-p", "7"]);
    assert_eq!(v["genus"], 2);
    assert_eq!(v["delta"], 8);
    assert_eq!(v["mass_closed_form"], "(p-1)/36");
    assert_eq!(v["mass_rhs"], "1/6");
    let (v, _) = json(&["invariants", "5:1,1,1,2"]);
    assert_eq!(v["genus"], 4);
    assert_eq!(v["signature"], serde_json::json!([2, 1, 1, 0]));
}

#[test]
fn oracle_check_passes() {
    let o = cycmass(&["oracle-check", "5:1,3,3,3", "-p", "11", "--samples", "3", "--full-expansion-oracle"]);
    assert!(o.status.success(), "{}", stdout(&o));
    assert!(stdout(&o).contains("0 mismatches"));
}

#[test]
fn out_dir_gets_one_file_per_report_and_a_summary() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let o = cycmass(&["verify", "2:1,1,1,1", "--p-range", "5..13", "--format", "json", "--out-dir", d]);
    assert!(o.status.success());
    let mut names: Vec<String> = std::fs::read_dir(d)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    assert_eq!(names, ["2-1-1-1-1_p11.json", "2-1-1-1-1_p13.json", "2-1-1-1-1_p5.json", "2-1-1-1-1_p7.json", "2-1-1-1-1_summary.json"]);
}

#[test]
fn bad_input_is_a_usage_error() {
    assert_eq!(cycmass(&["verify", "2:1,1,1,1", "-p", "9"]).status.code(), Some(2));
    assert_eq!(cycmass(&["verify", "2:1,1,1", "-p", "7"]).status.code(), Some(2));
    assert_eq!(cycmass(&["verify", "2:1,1,1,1", "--p-range", "5-9"]).status.code(), Some(2));
}
