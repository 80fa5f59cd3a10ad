//! Running an experiment from a JSON description without touching disk.

use switchmd::bench::{execute, ExperimentConfig};

const CONFIG: &str = r#"{
  "schema_version": 1,
  "instance": {
    "kind": "quadratic_simplex",
    "setup": "euclidean",
    "a": [[2.0, 0.5, 0.0], [0.5, 1.0, 0.0], [0.0, 0.0, 3.0]],
    "constraints": [[1.0, -1.0, 0.0]]
  },
  "solver": "fixed_smd",
  "params": { "epsilon": 0.1, "sigma": 0.1 },
  "seed": 5
}"#;

fn main() -> switchmd::Result<()> {
    let cfg = ExperimentConfig::from_json(CONFIG)?;
    for replicate in 0..3 {
        let (report, _) = execute(&cfg, replicate, false)?;
        println!(
            "replicate {replicate}: {} iterations, f {:?}, g {:?}",
            report.iterations, report.f_bar, report.g_bar
        );
    }
    Ok(())
}
