use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn ntlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ntlab")).args(args).output().expect("run ntlab")
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("json on stdout")
}

#[test]
fn points_csv_lists_every_point() {
    let out = ntlab(&["points", "--p", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# alpha: "));
    assert!(text.contains("# seed: null"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).collect();
    assert_eq!(rows[0], "x_coeffs,y_coeffs");
    assert_eq!(rows.len() - 1, 243);
}

#[test]
fn sweep_reports_the_histogram() {
    let out = ntlab(&["sweep", "--p", "2", "--m", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let first = text.split("\n}\n").next().unwrap().to_string() + "\n}";
    let doc: Value = serde_json::from_str(&first).unwrap();
    assert_eq!(doc["meta"]["q"], 4);
    assert_eq!(doc["data"]["swept"], 63 * 64 * 64);
    assert_eq!(doc["data"]["violation_tuples"], 0);
    assert!(doc["meta"]["moduli"]["fq_over_fp"].is_array());
}

#[test]
fn out_dir_is_byte_identical_across_runs() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let path = d.path().to_str().unwrap();
        let out = ntlab(&["sweep", "--p", "5", "--sample", "300", "--seed", "11", "--out", path, "--jobs", "3"]);
        assert_eq!(out.status.code(), Some(0));
    }
    let mut names: Vec<_> = fs::read_dir(dirs[0].path()).unwrap().map(|e| e.unwrap().file_name()).collect();
    names.sort();
    assert_eq!(names.len(), 2);
    for n in &names {
        let a = fs::read(dirs[0].path().join(n)).unwrap();
        let b = fs::read(dirs[1].path().join(n)).unwrap();
        assert_eq!(a, b);
    }
    let summary: Value =
        serde_json::from_slice(&fs::read(dirs[0].path().join("sweep-q5-d2-summary.json")).unwrap()).unwrap();
    assert_eq!(summary["meta"]["seed"], 11);
    assert_eq!(summary["data"]["swept"], 300 * 125);
}

#[test]
fn sweep_detail_lists_every_line() {
    let out = ntlab(&["sweep", "--p", "2", "--degree", "1", "--detail", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let detail = text.split("# artifact: sweep-q2-d1-detail\n").nth(1).unwrap();
    let rows: Vec<&str> = detail.lines().collect();
    assert_eq!(rows[0], "A,B,n_points,eta,residue");
    assert_eq!(rows.len() - 1, 7 * 8);
}

#[test]
fn weights_at_q2() {
    let out = ntlab(&["weights", "--p", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    assert_eq!(doc["data"]["min_distance"], 24);
    assert_eq!(doc["data"]["hamming_agrees"], true);
    assert_eq!(doc["data"]["audit"]["words"], 4096);
}

#[test]
fn classify_q2_reports_without_a_finding() {
    let out = ntlab(&["classify", "--p", "2", "--format", "csv"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.contains("# artifact: classify-q2-records"));
}

#[test]
fn classify_q3_sample_flags_the_interval_finding() {
    let out = ntlab(&["classify", "--p", "3", "--sample", "400", "--seed", "1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(String::from_utf8_lossy(&out.stderr).contains("finding"));
}

#[test]
fn exit_codes() {
    assert_eq!(ntlab(&["points", "--p", "6"]).status.code(), Some(2));
    assert_eq!(ntlab(&["sweep", "--p", "2", "--degree", "4"]).status.code(), Some(2));
    assert_eq!(ntlab(&["bogus"]).status.code(), Some(2));
    assert_eq!(ntlab(&["sweep", "--p", "11"]).status.code(), Some(3));
    assert_eq!(ntlab(&["classify", "--p", "5"]).status.code(), Some(3));
    assert_eq!(ntlab(&["weights", "--p", "11"]).status.code(), Some(3));
    assert_eq!(ntlab(&["check-conjecture", "--q-min", "5", "--q-max", "4"]).status.code(), Some(2));
}

#[test]
fn check_conjecture_small_range() {
    let out = ntlab(&["check-conjecture", "--q-max", "4"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = json(&out);
    let qs: Vec<u64> = doc["data"]["results"].as_array().unwrap().iter().map(|r| r["q"].as_u64().unwrap()).collect();
    assert_eq!(qs, vec![2, 3, 4]);
}
