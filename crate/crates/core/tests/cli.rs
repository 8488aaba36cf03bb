use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use qpolar::code::{initial_info_set, CodeFile, Precoder, QuantumCode};
use qpolar::ga::{GaConfig, Optimizer};
use qpolar::montecarlo::parse_csv;

fn qpolar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qpolar"))
        .args(args)
        .env_remove("QPOLAR_THREADS")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("codes").join(name)
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn strip_seconds(csv: &str) -> Vec<String> {
    csv.lines()
        .map(|l| l.rsplit_once(',').map_or(l, |(head, _)| head).to_string())
        .collect()
}

#[test]
fn construct_then_validate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    let o = qpolar(&["construct", "--n", "6", "--p", "0.05", "-o", s(&path)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = qpolar(&["validate", s(&path)]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("PASS N=64 K=33 logical=2"));
}

#[test]
fn construct_smallest_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("c.json");
    assert!(qpolar(&["construct", "--n", "1", "--p", "0.1", "-o", s(&path)]).status.success());
    let file = CodeFile::load(&path).unwrap();
    assert_eq!(file.info_set, vec![0, 1]);
    assert_eq!(qpolar(&["validate", s(&path)]).status.code(), Some(0));
}

#[test]
fn construct_unwritable_path() {
    let o = qpolar(&["construct", "--n", "3", "--p", "0.1", "-o", "/nonexistent-dir/c.json"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("/nonexistent-dir/c.json"));
}

#[test]
fn validate_reports_violations() {
    let dir = tempfile::tempdir().unwrap();
    let frozen = dir.path().join("frozen.json");
    std::fs::write(&frozen, r#"{"n_exp": 2, "info_set": [0, 3], "precoder_offdiag": [], "meta": {}}"#).unwrap();
    let o = qpolar(&["validate", s(&frozen)]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("pair (1, 2)"), "{}", stdout(&o));

    let orphan = dir.path().join("orphan.json");
    std::fs::write(&orphan, r#"{"n_exp": 3, "info_set": [1, 3, 5, 6, 7], "precoder_offdiag": [[1, 2]], "meta": {}}"#).unwrap();
    let o = qpolar(&["validate", "--json", s(&orphan)]);
    assert_eq!(o.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["valid"], false);
    let kinds: Vec<&serde_json::Value> = v["violations"]["violations"].as_array().unwrap().iter().collect();
    assert!(kinds
        .iter()
        .any(|k| k["kind"] == "mirror_missing" && k["entry"] == serde_json::json!([1, 2])));
}

#[test]
fn validate_malformed_names_field() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.json");
    std::fs::write(&path, r#"{"n_exp": 3, "info_set": [1, "x"], "precoder_offdiag": [], "meta": {}}"#).unwrap();
    let o = qpolar(&["validate", s(&path)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("info_set"), "{}", stderr(&o));
}

#[test]
fn simulate_noiseless_and_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let code = dir.path().join("c.json");
    let csv = dir.path().join("out.csv");
    qpolar(&["construct", "--n", "4", "--p", "0.1", "-o", s(&code)]);
    let o = qpolar(&["simulate", s(&code), "--p", "0,0.1", "-L", "2", "--trials", "500", "--seed", "3", "-o", s(&csv)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(stdout(&o).is_empty());
    let points = parse_csv(&text).unwrap();
    assert_eq!(points.len(), 2);
    assert_eq!(points[0].failures, 0);
    assert_eq!(qpolar::montecarlo::to_csv(&points), text);
}

#[test]
fn simulate_is_deterministic_across_thread_counts() {
    let code = bundled("n64_k2_t100.json");
    let run = |threads: &str| {
        let o = qpolar(&[
            "simulate", s(&code), "--p", "0.05,0.08", "-L", "4", "--trials", "3000", "--seed", "11", "--threads", threads,
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
        strip_seconds(&stdout(&o))
    };
    let one = run("1");
    assert_eq!(one, run("1"));
    assert_eq!(one, run("8"));
}

#[test]
fn simulate_json_embeds_code() {
    let code = bundled("n64_k2_t100.json");
    let o = qpolar(&["simulate", s(&code), "--p", "0.05", "--trials", "100", "--json"]);
    assert!(o.status.success());
    let report: qpolar::montecarlo::SimulationReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(report.code, CodeFile::load(&code).unwrap());
    assert_eq!(report.points[0].trials, 100);
}

#[test]
fn simulate_refuses_invalid_code() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("frozen.json");
    std::fs::write(&path, r#"{"n_exp": 2, "info_set": [0, 3], "precoder_offdiag": [], "meta": {}}"#).unwrap();
    let o = qpolar(&["simulate", s(&path), "--p", "0.1", "--trials", "10"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("pair (1, 2)"));
}

#[test]
fn gatecount_reports() {
    let o = qpolar(&["gatecount", "--json", s(&bundled("n64_k2_t100.json"))]);
    assert!(o.status.success());
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["encoder_extra_gates"], 36);
    assert_eq!(v["precoder_nnz"], 100);
    assert_eq!(v["surface_code_reference"], 4704);
    assert_eq!(v["total_gates"], 2 * v["stab_nnz"].as_u64().unwrap());

    let dir = tempfile::tempdir().unwrap();
    let plain = dir.path().join("c.json");
    qpolar(&["construct", "--n", "5", "--p", "0.1", "-o", s(&plain)]);
    let o = qpolar(&["gatecount", s(&plain)]);
    let text = stdout(&o);
    assert!(text.contains("delta vs unprecoded       +0"), "{text}");
    assert!(text.contains("4704"));
}

fn small_config(dir: &Path, body: &str) -> PathBuf {
    let path = dir.join("ga.json");
    std::fs::write(&path, body).unwrap();
    path
}

#[test]
fn optimize_without_outer_iterations_is_phase_two_refinement() {
    let dir = tempfile::tempdir().unwrap();
    let body = r#"{"version": 1, "n_exp": 4, "p": 0.08, "list_size": 2, "population_size": 1,
        "offspring_count": 4, "outer_iters": 0, "generations": 2, "fitness_trials": 300, "seed": 5,
        "t_flip_rate": 0.1}"#;
    let cfg_path = small_config(dir.path(), body);
    let out = dir.path().join("best.json");
    let log = dir.path().join("log.jsonl");
    let o = qpolar(&["optimize", s(&cfg_path), "-o", s(&out), "--log", s(&log)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(qpolar(&["validate", s(&out)]).status.code(), Some(0));
    assert!(std::fs::read_to_string(&log).unwrap().lines().count() >= 4);

    let cfg = GaConfig::parse(body).unwrap();
    let seed = initial_info_set(4, 0.08).unwrap();
    let mut opt = Optimizer::new(cfg, seed.clone()).unwrap();
    let sets = opt.set_ga(&seed, &Precoder::identity(16)).unwrap();
    assert_eq!(sets.len(), 1);
    let (t, _) = opt.t_ga(&sets[0].0, &Precoder::identity(16), None).unwrap();
    let expected = QuantumCode::new(sets[0].0.clone(), t).unwrap();
    assert_eq!(CodeFile::load(&out).unwrap().to_code().unwrap(), expected);
}

#[test]
fn optimize_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = small_config(
        dir.path(),
        r#"{"version": 1, "n_exp": 4, "p": 0.08, "list_size": 2, "population_size": 1,
        "offspring_count": 4, "outer_iters": 0, "fitness_trials": 300, "seed": 5, "colour": 3}"#,
    );
    let o = qpolar(&["optimize", s(&cfg), "-o", s(&dir.path().join("x.json"))]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("colour"));

    let cfg = small_config(
        dir.path(),
        r#"{"version": 1, "n_exp": 3, "p": 0.08, "list_size": 2, "population_size": 1,
        "offspring_count": 4, "outer_iters": 0, "fitness_trials": 300, "seed": 5,
        "forced_frozen": [0, 7]}"#,
    );
    let o = qpolar(&["optimize", s(&cfg), "-o", s(&dir.path().join("x.json"))]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
}

#[test]
fn optimize_uses_seed_code_relative_to_config() {
    let dir = tempfile::tempdir().unwrap();
    qpolar(&["construct", "--n", "3", "--p", "0.1", "-o", s(&dir.path().join("seed.json"))]);
    let cfg = small_config(
        dir.path(),
        r#"{"version": 1, "n_exp": 3, "p": 0.1, "list_size": 2, "population_size": 2,
        "offspring_count": 2, "outer_iters": 2, "generations": 1, "fitness_trials": 200, "seed": 9,
        "seed_code": "seed.json"}"#,
    );
    let out = dir.path().join("best.json");
    let o = qpolar(&["optimize", s(&cfg), "-o", s(&out)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(qpolar(&["validate", s(&out)]).status.code(), Some(0));
}

#[test]
fn usage_errors() {
    assert_eq!(qpolar(&[]).status.code(), Some(2));
    assert_eq!(qpolar(&["simulate", "x.json"]).status.code(), Some(2));
    assert_eq!(qpolar(&["construct", "--n", "0", "--p", "0.1", "-o", "/tmp/x"]).status.code(), Some(2));
    assert_eq!(qpolar(&["--help"]).status.code(), Some(0));
}
