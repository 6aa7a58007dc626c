use std::collections::{HashMap, HashSet};
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn dimerlab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dimerlab"))
        .arg("--out")
        .arg(out)
        .args(args)
        .output()
        .expect("binary runs")
}

fn manifest(out: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(out.join("manifest.json")).unwrap()).unwrap()
}

fn checksums(out: &Path) -> HashMap<String, String> {
    manifest(out)["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| (o["path"].as_str().unwrap().to_string(), o["sha256"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn samples_are_perfect_matchings_with_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let run = dimerlab(dir.path(), &["sample", "--n", "4", "--a", "1", "--seed", "7", "--count", "3"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));

    let mut reader = csv::Reader::from_path(dir.path().join("samples.csv")).unwrap();
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["sample", "seed", "stream", "white_x1", "white_x2", "black_x1", "black_x2", "weight"]
    );
    let mut per_sample: HashMap<i64, Vec<((i64, i64), (i64, i64))>> = HashMap::new();
    for record in reader.records() {
        let r = record.unwrap();
        let v: Vec<i64> = (0..7).map(|i| r[i].parse().unwrap()).collect();
        assert_eq!(v[1], 7);
        per_sample.entry(v[0]).or_default().push(((v[3], v[4]), (v[5], v[6])));
    }
    assert_eq!(per_sample.len(), 3);
    for dimers in per_sample.values() {
        // n(n + 1) = 20 dimers covering each vertex once, all nearest neighbours.
        assert_eq!(dimers.len(), 20);
        let whites: HashSet<_> = dimers.iter().map(|d| d.0).collect();
        let blacks: HashSet<_> = dimers.iter().map(|d| d.1).collect();
        assert_eq!((whites.len(), blacks.len()), (20, 20));
        assert!(dimers
            .iter()
            .all(|(w, b)| (w.0 - b.0).abs() == 1 && (w.1 - b.1).abs() == 1));
    }

    let m = manifest(dir.path());
    assert_eq!(m["subcommand"], "sample");
    assert_eq!(m["seeds"], serde_json::json!([7]));
    let sums = checksums(dir.path());
    assert_eq!(sums["samples.csv"].len(), 64);
}

#[test]
fn reruns_reproduce_checksums() {
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    for dir in [&a, &b] {
        let run = dimerlab(dir.path(), &["geometry", "analyze", "--n", "16", "--gamma", "0.3", "--seed", "11"]);
        assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    }
    let (sa, sb) = (checksums(a.path()), checksums(b.path()));
    assert_eq!(sa.len(), 3);
    assert_eq!(sa, sb);
    let different = tempfile::tempdir().unwrap();
    dimerlab(different.path(), &["geometry", "analyze", "--n", "16", "--gamma", "0.3", "--seed", "12"]);
    assert_ne!(checksums(different.path())["dimers.csv"], sa["dimers.csv"]);
}

#[test]
fn verify_writes_table_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bessel.json");
    fs::write(&config, r#"{"campaign": "bessel-limit", "ladder": [64, 256], "nu": 1.0, "offsets": [0, 2]}"#).unwrap();
    let run = dimerlab(
        dir.path(),
        &["verify", "bessel-limit", "--config", config.to_str().unwrap()],
    );
    assert_eq!(run.status.code(), Some(0), "{}", String::from_utf8_lossy(&run.stderr));
    assert!(String::from_utf8_lossy(&run.stdout).starts_with("PASS"));

    let table = fs::read_to_string(dir.path().join("table.csv")).unwrap();
    let mut lines = table.lines();
    assert_eq!(lines.next(), Some("n,nu,p,q,finite,limit,abs_error"));
    assert_eq!(lines.count(), 8);
    let verdict: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("verdict.json")).unwrap()).unwrap();
    assert_eq!(verdict["campaign"], "bessel-limit");
    assert_eq!(verdict["passed"], true);
    assert_eq!(verdict["config"]["ladder"], serde_json::json!([64, 256]));
    let sums = checksums(dir.path());
    assert!(sums.contains_key("table.csv") && sums.contains_key("verdict.json"));
}

#[test]
fn failed_criterion_exits_with_one() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("ekl.json");
    // At this ladder the small-weight leading term stays off by a constant factor.
    fs::write(&config, r#"{"campaign": "ekl-asymptotics", "ladder": [200, 800]}"#).unwrap();
    let run = dimerlab(dir.path(), &["verify", "ekl-asymptotics", "--config", config.to_str().unwrap()]);
    assert_eq!(run.status.code(), Some(1));
    let verdict: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("verdict.json")).unwrap()).unwrap();
    assert_eq!(verdict["passed"], false);
    assert!(dir.path().join("manifest.json").exists());
}

#[test]
fn usage_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let unknown = dimerlab(dir.path(), &["sample", "--n", "4", "--frobnicate"]);
    assert_eq!(unknown.status.code(), Some(2));
    let bad_order = dimerlab(dir.path(), &["sample", "--n", "6"]);
    assert_eq!(bad_order.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&bad_order.stderr).contains("n = 6"));
    let bad_weight = dimerlab(dir.path(), &["lattice", "dump", "--n", "4", "--a", "-1"]);
    assert_eq!(bad_weight.status.code(), Some(2));
    let bad_vertex = dimerlab(dir.path(), &["kernel", "entry", "--n", "8", "--a", "0.5", "--white", "4,4", "--black", "4,5"]);
    assert_eq!(bad_vertex.status.code(), Some(2));
    let unknown_campaign = dimerlab(dir.path(), &["verify", "everything"]);
    assert_eq!(unknown_campaign.status.code(), Some(2));
    let over_cap = dimerlab(dir.path(), &["oracle", "kinv", "--n", "32", "--a", "0.5"]);
    assert_eq!(over_cap.status.code(), Some(2));
}

#[test]
fn csv_floats_carry_seventeen_digits() {
    let dir = tempfile::tempdir().unwrap();
    let run = dimerlab(dir.path(), &["oracle", "kinv", "--n", "4", "--a", "0.3"]);
    assert!(run.status.success());
    let text = fs::read_to_string(dir.path().join("kinv.csv")).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("white_x1,white_x2,black_x1,black_x2,re,im"));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 20 * 20);
    for row in rows {
        for field in row.split(',').skip(4) {
            let mantissa = field.split('e').next().unwrap();
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{field}");
            field.parse::<f64>().unwrap();
        }
    }
}

#[test]
fn kernel_entry_matches_the_oracle() {
    let dir = tempfile::tempdir().unwrap();
    assert!(dimerlab(dir.path(), &["oracle", "kinv", "--n", "8", "--a", "0.5"]).status.success());
    let mut reader = csv::Reader::from_path(dir.path().join("kinv.csv")).unwrap();
    let expected: f64 = reader
        .records()
        .map(|r| r.unwrap())
        .find(|r| &r[0] == "3" && &r[1] == "4" && &r[2] == "4" && &r[3] == "5")
        .map(|r| r[4].parse().unwrap())
        .unwrap();

    let run = dimerlab(dir.path(), &["kernel", "entry", "--n", "8", "--a", "0.5", "--white", "3,4", "--black", "4,5"]);
    assert!(run.status.success());
    let entry: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("entry.json")).unwrap()).unwrap();
    let value = entry["value"]["re"].as_f64().unwrap();
    assert!((value - expected).abs() < 1e-10, "{value} vs {expected}");
}

#[test]
fn airy_subcommands() {
    let dir = tempfile::tempdir().unwrap();
    assert!(dimerlab(dir.path(), &["airy", "kernel", "--t", "0", "--x", "0", "--t2", "0", "--y", "0"])
        .status
        .success());
    let k: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("airy_kernel.json")).unwrap()).unwrap();
    // Ai'(0)^2
    let ai_prime = -0.258_819_403_792_806_8_f64;
    assert!((k["value"].as_f64().unwrap() - ai_prime * ai_prime).abs() < 1e-9);

    let run = dimerlab(dir.path(), &["airy", "fdd", "--times", "-0.5,0.5", "--levels", "1,1"]);
    assert!(run.status.success(), "{}", String::from_utf8_lossy(&run.stderr));
    let fdd: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("fdd.json")).unwrap()).unwrap();
    let p = fdd["result"]["value"].as_f64().unwrap();
    assert!(p > 0.5 && p < 1.0);
    let mismatched = dimerlab(dir.path(), &["airy", "fdd", "--times", "0,1", "--levels", "1"]);
    assert_eq!(mismatched.status.code(), Some(2));
}
