use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use mils_core::exact::brute_force_opt;
use mils_core::Instance;
use serde_json::Value;

fn root() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn mtsp51() -> PathBuf {
    root().join("data/instances/mtsp51.tsp")
}

fn mils(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mils"))
        .args(args)
        .env("MILS_THREADS", "2")
        .output()
        .expect("spawn mils")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn gen(dir: &Path, n: usize, seed: u64) -> PathBuf {
    let path = dir.join(format!("rand-n{n}-s{seed}.tsp"));
    let out = mils(&[
        "gen",
        "--n",
        &n.to_string(),
        "--width",
        "100",
        "--seed",
        &seed.to_string(),
        "--out",
        path.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    path
}

fn schema() -> jsonschema::JSONSchema {
    let text = fs::read_to_string(root().join("data/summary.schema.json")).unwrap();
    let schema: Value = serde_json::from_str(&text).unwrap();
    jsonschema::JSONSchema::compile(&schema).expect("schema compiles")
}

#[test]
fn solve_reports_gap_and_matches_schema() {
    let dir = tempfile::tempdir().unwrap();
    let sol = dir.path().join("best.sol");
    let trace = dir.path().join("trace.csv");
    let out = mils(&[
        "solve",
        mtsp51().to_str().unwrap(),
        "--m",
        "3",
        "--iterations",
        "300",
        "--out",
        sol.to_str().unwrap(),
        "--trace",
        trace.to_str().unwrap(),
    ]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let summary: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(schema().is_valid(&summary));
    assert_eq!(summary["name"], "mtsp51");
    assert_eq!(summary["n"], 50);
    assert_eq!(summary["iterations"], 300);
    let best = summary["best"].as_f64().unwrap();
    let gap = summary["gap_to_bks"].as_f64().unwrap();
    assert!((gap - 100.0 * (best - 159.57) / 159.57).abs() < 1e-9);

    let trace = fs::read_to_string(trace).unwrap();
    assert_eq!(trace.lines().count(), 301);
    let check = mils(&["validate", mtsp51().to_str().unwrap(), sol.to_str().unwrap()]);
    assert!(check.status.success(), "{}", stdout(&check));
}

#[test]
fn zero_iterations_is_a_valid_run() {
    let out = mils(&["solve", mtsp51().to_str().unwrap(), "--m", "5", "--iterations", "0"]);
    assert!(out.status.success());
    let summary: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(schema().is_valid(&summary));
    assert_eq!(summary["iterations"], 0);
    assert!(summary["best"].as_f64().unwrap() > 0.0);
}

#[test]
fn unknown_instance_has_no_gap() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), 12, 3);
    let out = mils(&["solve", inst.to_str().unwrap(), "--m", "2", "--runs", "3", "--iterations", "50"]);
    assert!(out.status.success());
    let summary: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert!(schema().is_valid(&summary));
    assert!(summary.get("gap_to_bks").is_none());
    assert!(summary["avg"].as_f64().unwrap() >= summary["best"].as_f64().unwrap());
    assert_eq!(summary["iterations"], 150);
}

#[test]
fn solve_is_deterministic() {
    let run = || {
        let out = mils(&["solve", mtsp51().to_str().unwrap(), "--m", "3", "--iterations", "200", "--seed", "7"]);
        let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
        v["best"].as_f64().unwrap()
    };
    assert_eq!(run(), run());
}

#[test]
fn usage_errors_exit_2() {
    let out = mils(&["solve", "/no/such/file.tsp", "--m", "3"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not found"));
    let out = mils(&["solve", mtsp51().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = mils(&["solve", mtsp51().to_str().unwrap(), "--m", "51"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mils(&["solve", mtsp51().to_str().unwrap(), "--m", "3", "--budget", "hours:2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = mils(&["solve", mtsp51().to_str().unwrap(), "--m", "3", "--epsilon", "3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn validate_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), 6, 1);
    let broken = dir.path().join("broken.sol");
    fs::write(&broken, "x 2 10\n1 2 3\n3 4 5\n").unwrap();
    let out = mils(&["validate", inst.to_str().unwrap(), broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("duplicate city 3"), "{text}");
    assert!(text.contains("missing city 6"), "{text}");

    let wrong_obj = dir.path().join("obj.sol");
    fs::write(&wrong_obj, "x 2 1\n1 2 3\n4 5 6\n").unwrap();
    let out = mils(&["validate", inst.to_str().unwrap(), wrong_obj.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));

    let out = mils(&["validate", inst.to_str().unwrap(), "/no/such.sol"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn export_lp_header() {
    let dir = tempfile::tempdir().unwrap();
    let inst = gen(dir.path(), 5, 2);
    let lp = dir.path().join("model.lp");
    let out = mils(&["export-lp", inst.to_str().unwrap(), "--m", "2", "--out", lp.to_str().unwrap()]);
    assert!(out.status.success());
    let text = fs::read_to_string(lp).unwrap();
    let body: Vec<&str> = text.lines().filter(|l| !l.starts_with('\\')).collect();
    assert_eq!(body[0], "Minimize");
    assert_eq!(body[1].trim(), "obj: C");
    assert!(text.trim_end().ends_with("End"));
}

#[test]
fn gen_is_deterministic() {
    let a = mils(&["gen", "--n", "20", "--seed", "4"]);
    let b = mils(&["gen", "--n", "20", "--seed", "4"]);
    let c = mils(&["gen", "--n", "20", "--seed", "5"]);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
    let inst = Instance::parse_tsplib(&stdout(&a)).unwrap();
    assert_eq!(inst.num_cities(), 20);
}

fn bench_rows(csv: &str) -> Vec<Vec<String>> {
    csv.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn bench_table() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), 8, 11);
    let b = gen(dir.path(), 9, 12);
    let c = gen(dir.path(), 7, 13);
    let manifest = dir.path().join("manifest.txt");
    fs::write(
        &manifest,
        format!(
            "# tiny\n{} 2\n{} 3\n{} 2\n",
            a.file_name().unwrap().to_str().unwrap(),
            b.display(),
            c.display()
        ),
    )
    .unwrap();
    let run = || {
        let out = mils(&["bench", manifest.to_str().unwrap(), "--runs", "2", "--iterations", "3000", "--seed", "5"]);
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        bench_rows(&stdout(&out))
    };
    let first = run();
    assert_eq!(first[0], ["name", "m", "bks", "best", "avg", "gap_pct", "time_ms"]);
    assert_eq!(first.len(), 4);
    for row in &first[1..] {
        let best: f64 = row[3].parse().unwrap();
        let avg: f64 = row[4].parse().unwrap();
        assert!(avg >= best);
        assert!(row[2].is_empty() && row[5].is_empty());
    }
    let (opt, _) = brute_force_opt(&Instance::from_file(&a, None).unwrap(), 2).unwrap();
    assert!((first[1][3].parse::<f64>().unwrap() - opt).abs() < 1e-6);

    let second = run();
    let strip = |rows: &[Vec<String>]| -> Vec<Vec<String>> {
        rows.iter().map(|r| r[..6].to_vec()).collect()
    };
    assert_eq!(strip(&first), strip(&second));
}

#[test]
fn bench_marks_failed_rows() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), 8, 1);
    let manifest = dir.path().join("manifest.txt");
    fs::write(&manifest, format!("{} 2\nmissing.tsp 2\n{} 9\n", a.display(), a.display())).unwrap();
    let out = mils(&["bench", manifest.to_str().unwrap(), "--iterations", "20"]);
    assert_eq!(out.status.code(), Some(1));
    let rows = bench_rows(&stdout(&out));
    assert_eq!(rows.len(), 4);
    assert_ne!(rows[1][3], "FAILED");
    assert_eq!(rows[2][3], "FAILED");
    assert_eq!(rows[3][3], "FAILED");
}

#[test]
fn bks_override() {
    let dir = tempfile::tempdir().unwrap();
    let bks = dir.path().join("bks.csv");
    fs::write(&bks, "instance,m,bks\nmtsp51,3,100\n").unwrap();
    let out = mils(&[
        "solve",
        mtsp51().to_str().unwrap(),
        "--m",
        "3",
        "--iterations",
        "0",
        "--bks",
        bks.to_str().unwrap(),
    ]);
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["bks"], 100.0);
}
