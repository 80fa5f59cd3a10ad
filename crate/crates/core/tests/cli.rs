use std::path::Path;
use std::process::{Command, Output};

use switchmd::bench::{RunReport, SweepAggregate};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_switchmd"))
}

fn configs() -> &'static Path {
    Path::new(concat!(env!("CARGO_MANIFEST_DIR"), "/configs"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.json");
    std::fs::write(&p, text).unwrap();
    p.display().to_string()
}

const P1: &str = r#"{
  "schema_version": 1,
  "instance": {"kind": "linear_max", "setup": "entropy", "c": [1, 0], "constraints": [[-1, 0]], "offsets": [0.4]},
  "solver": "adaptive_md",
  "params": {"epsilon": 0.05}
}"#;

#[test]
fn p1_run_within_bound() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), P1);
    let out = dir.path().join("out");
    let o = run(&["run", "--config", &cfg, "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("report.json")).unwrap();
    let r: RunReport = serde_json::from_str(&text).unwrap();
    assert!(r.iterations <= 555);
    assert_eq!(r.theoretical_bound, Some(555));
    assert!(r.within_bound);
    assert!(!out.join("trace.csv").exists());
    // Every scalar survives the round trip bit for bit.
    assert_eq!(serde_json::to_string_pretty(&r).unwrap(), text);
}

#[test]
fn trace_flag_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), P1);
    let out = dir.path().join("out");
    let o = run(&["run", "--config", &cfg, "--out-dir", out.to_str().unwrap(), "--trace"]);
    assert_eq!(o.status.code(), Some(0));
    let csv = std::fs::read_to_string(out.join("trace.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iter,step_kind,M_k,h_k,f_val,g_val,active_index"));
    let rows: Vec<&str> = lines.collect();
    assert!(!rows.is_empty());
    for row in rows {
        let cols: Vec<&str> = row.split(',').collect();
        assert_eq!(cols.len(), 7);
        match cols[1] {
            "productive" => assert_eq!(cols[6], ""),
            "nonproductive" => assert_eq!(cols[6], "0"),
            other => panic!("step kind {other}"),
        }
    }
}

#[test]
fn sigma_out_of_range_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{
      "schema_version": 1,
      "instance": {"kind": "quadratic_simplex", "setup": "euclidean", "a": [[1, 0], [0, 1]], "constraints": [[-1, -1]]},
      "solver": "fixed_smd",
      "params": {"epsilon": 0.1, "sigma": 0.7}
    }"#;
    let cfg = write_config(dir.path(), text);
    let o = run(&["run", "--config", &cfg, "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("sigma out of (0,0.5)"));
}

#[test]
fn malformed_json_reports_position() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "{\n  \"schema_version\": 1,\n  \"solver\": adaptive_md\n}");
    let o = run(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 3"), "{err}");

    let cfg = write_config(dir.path(), &P1.replace("\"solver\"", "\"solvr\""));
    let o = run(&["run", "--config", &cfg]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown field `solvr`"));
}

#[test]
fn guard_below_bound_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), &P1.replace("\"epsilon\": 0.05", "\"epsilon\": 0.05, \"max_iterations_guard\": 10"));
    assert_eq!(run(&["run", "--config", &cfg]).status.code(), Some(1));
}

#[test]
fn seed_override_changes_stochastic_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = configs().join("quadratic_smd.json");
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    for (out, seed) in [(&a, "1"), (&b, "2")] {
        let o = run(&["run", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap(), "--seed", seed, "--trace"]);
        assert_eq!(o.status.code(), Some(0));
    }
    let ra: RunReport = serde_json::from_str(&std::fs::read_to_string(a.join("report.json")).unwrap()).unwrap();
    assert_eq!(ra.config.seed, 1);
    assert_ne!(std::fs::read(a.join("trace.csv")).unwrap(), std::fs::read(b.join("trace.csv")).unwrap());
}

#[test]
fn sweep_writes_replicates_and_aggregate() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let cfg = configs().join("quadratic_smd.json");
    let o = run(&["sweep", "--config", cfg.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let agg: SweepAggregate = serde_json::from_str(&std::fs::read_to_string(out.join("aggregate.json")).unwrap()).unwrap();
    assert_eq!(agg.n_seeds, 20);
    assert!(agg.all_within_bound);
    for i in 0..20 {
        assert!(out.join(format!("replicate_{i}/report.json")).exists());
    }
}

#[test]
fn shipped_configs_parse() {
    for entry in std::fs::read_dir(configs()).unwrap() {
        let p = entry.unwrap().path();
        let cfg = switchmd::bench::ExperimentConfig::load(&p).unwrap();
        cfg.instance.build().unwrap_or_else(|e| panic!("{}: {e}", p.display()));
    }
}

#[test]
fn verify_green_and_fault_injection() {
    let o = run(&["verify"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("SKIP restarted_smd_deviation_entropy"));

    let o = run(&["verify", "--inject-fault", "corrupt-bregman"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("lemma1_inequality"));
}
