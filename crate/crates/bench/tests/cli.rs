use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use benders_bench::{read_summary, read_trace};

fn bench(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_benders-bench"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("run benders-bench")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn generate(dir: &Path, which: &str, extra: &[&str]) -> PathBuf {
    let out = dir.to_str().unwrap();
    let mut args = vec!["generate", which, "--out", out];
    args.extend_from_slice(extra);
    let o = bench(&args);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    PathBuf::from(stdout(&o).trim())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn generate_solve_verify() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "case_b", &[]);
    let out = dir.path().join("run");
    let o = bench(&["solve", p(&inst), "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let summary = read_summary(&out.join("summary.json")).unwrap();
    let trace = read_trace(&out.join("trace.csv")).unwrap();
    assert_eq!(summary.engine, "stabilised");
    assert_eq!(summary.iterations, trace.len());
    assert!(summary.gap <= 1e-3);
    let o = bench(&["verify", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn no_timing_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "case_c", &["--periods", "12"]);
    let mut bytes = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        let o = bench(&["solve", p(&inst), "--algorithm", "adaptive", "--no-timing", "--out", p(&out)]);
        assert!(o.status.success());
        bytes.push((
            std::fs::read(out.join("trace.csv")).unwrap(),
            std::fs::read(out.join("summary.json")).unwrap(),
        ));
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn malformed_instance_exits_3_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"name\": \"x\",\n  oops\n}").unwrap();
    let out = dir.path().join("run");
    let o = bench(&["solve", p(&bad), "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));
    assert!(!out.exists());
}

#[test]
fn iteration_limit_exits_6_and_keeps_the_trace() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "case_b", &[]);
    let out = dir.path().join("run");
    let o = bench(&["solve", p(&inst), "--algorithm", "standard", "--iter-limit", "2", "--out", p(&out)]);
    assert_eq!(o.status.code(), Some(6));
    assert_eq!(read_trace(&out.join("trace.csv")).unwrap().len(), 2);
}

#[test]
fn bad_arguments_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "case_a", &["--periods", "6"]);
    assert_eq!(bench(&["solve", p(&inst), "--eps", "-1"]).status.code(), Some(2));
    assert_eq!(bench(&["solve", p(&inst), "--algorithm", "simplex"]).status.code(), Some(2));
    assert_eq!(bench(&["compare", p(&inst), "--algorithm", "standard"]).status.code(), Some(2));
}

#[test]
fn verify_of_a_missing_path_exits_3() {
    assert_eq!(bench(&["verify", "/nonexistent/trace/dir"]).status.code(), Some(3));
}

#[test]
fn compare_on_a_tree_saves_exact_solves() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "synthetic_tree", &["--periods", "12", "--stages", "2"]);
    let out = dir.path().join("cmp");
    let o = bench(&["compare", p(&inst), "--no-timing", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let mut rows = csv::Reader::from_path(out.join("compare.csv")).unwrap();
    let headers = rows.headers().unwrap().clone();
    let col = |name: &str| headers.iter().position(|h| h == name).unwrap();
    let records: Vec<csv::StringRecord> = rows.records().map(Result::unwrap).collect();
    assert_eq!(records.len(), 3);
    let get = |engine: &str, name: &str| -> String {
        records.iter().find(|r| &r[col("engine")] == engine).unwrap()[col(name)].to_string()
    };
    let evals = |engine: &str| get(engine, "evaluations").parse::<usize>().unwrap();
    assert!(evals("adaptive") < evals("standard"));
    assert!(evals("stabilised") < evals("standard"));
    for engine in ["standard", "adaptive", "stabilised"] {
        assert_eq!(get(engine, "status"), "converged");
    }
    let o = bench(&["verify", p(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
}

#[test]
fn case_a_standard_closes_the_gap() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "case_a", &[]);
    let out = dir.path().join("run");
    let o = bench(&["solve", p(&inst), "--algorithm", "standard", "--eps", "0.0001", "--out", p(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let s = read_summary(&out.join("summary.json")).unwrap();
    assert!(s.upper_bound - s.lower_bound <= 1e-6 * s.upper_bound.abs().max(1.0));
    let json = dir.path().join("vss.json");
    let o = bench(&["vss", p(&inst), "--out", p(&json)]);
    assert!(o.status.success());
    let report: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(json).unwrap()).unwrap();
    assert_eq!(report["vss"].as_f64(), Some(0.0));
    assert!((report["stochastic_optimum"].as_f64().unwrap() - s.upper_bound).abs() <= 1e-6 * s.upper_bound);
}

#[test]
fn default_synthetic_tree_loads_with_13_nodes() {
    let dir = tempfile::tempdir().unwrap();
    let inst = generate(dir.path(), "synthetic_tree", &[]);
    let loaded = benders_power::load_instance(&inst).unwrap();
    let model = benders_power::build_model(&loaded).unwrap();
    assert_eq!(model.problem.node_count(), 13);
}
