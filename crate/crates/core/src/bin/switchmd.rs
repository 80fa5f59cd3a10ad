use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use switchmd::bench::{self, ExperimentConfig, RunOptions};
use switchmd::verify::{verify_suite, Fault, SuiteOptions};

#[derive(Parser)]
#[command(version, about = "Switching mirror descent experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = "out")]
    out_dir: PathBuf,
    /// Overrides the seed in the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Writes the per-iteration trace CSV.
    #[arg(long)]
    trace: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum FaultArg {
    CorruptBregman,
}

#[derive(Subcommand)]
enum Command {
    /// Run one solver configuration.
    Run(Common),
    /// Run `n_seeds` replicates and write an aggregate report.
    Sweep(Common),
    /// Run the invariant and oracle battery.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, hide = true)]
        inject_fault: Option<FaultArg>,
    },
}

fn load(c: &Common) -> Result<(ExperimentConfig, RunOptions), ExitCode> {
    match ExperimentConfig::load(&c.config) {
        Ok(cfg) => Ok((cfg, RunOptions { out_dir: c.out_dir.clone(), seed: c.seed, trace: c.trace })),
        Err(e) => {
            eprintln!("error: {e}");
            Err(ExitCode::from(1))
        }
    }
}

fn main() -> ExitCode {
    match Cli::parse().command {
        Command::Run(c) => {
            let (cfg, opts) = match load(&c) {
                Ok(v) => v,
                Err(code) => return code,
            };
            match bench::run(&cfg, &opts) {
                Ok(r) => {
                    println!(
                        "iterations {} (bound {}), f_bar {}, g_bar {}",
                        r.iterations,
                        r.theoretical_bound.map_or("-".into(), |b| b.to_string()),
                        r.f_bar.map_or("-".into(), |v| v.to_string()),
                        r.g_bar.map_or("-".into(), |v| v.to_string()),
                    );
                    if r.guarantee_violated {
                        eprintln!("guarantee violated");
                        ExitCode::from(2)
                    } else {
                        ExitCode::SUCCESS
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Sweep(c) => {
            let (cfg, opts) = match load(&c) {
                Ok(v) => v,
                Err(code) => return code,
            };
            match bench::sweep(&cfg, &opts) {
                Ok(a) => {
                    println!(
                        "{} replicates, failures {}, max iterations {}",
                        a.n_seeds,
                        a.failures.map_or("-".into(), |f| f.to_string()),
                        a.max_iterations
                    );
                    if a.passed {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(2)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Verify { seed, inject_fault } => {
            let fault = inject_fault.map(|FaultArg::CorruptBregman| Fault::CorruptBregman);
            let report = verify_suite(&SuiteOptions { seed, fault, ..SuiteOptions::default() });
            print!("{report}");
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                eprintln!("failing: {}", report.failing().join(", "));
                ExitCode::from(2)
            }
        }
    }
}
