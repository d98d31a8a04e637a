use agm_harness::commands::*;
use agm_harness::runlog::export_csv;
use agm_harness::{ExperimentConfig, HarnessError, Result};
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

/// Autoregressive ground-state solver: training, exact oracles and sweeps.
#[derive(Parser)]
#[command(name = "agm", version)]
struct Cli {
    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides `train.seed` and `search_seed`.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Overrides `output.run_dir`.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train the model by VMC.
    Train,
    /// Dense ground state of a small system.
    Ed,
    /// Learn the exact ground state by interaction screening.
    ExactLearn,
    /// Random search over the learning-rate schedule.
    Hyperopt,
    /// Train over disorder realizations.
    DisorderSweep,
    /// Convert a run log to CSV (stdout, or `<out>/log.csv`).
    ExportCsv {
        /// `log.jsonl` or a run directory.
        log: PathBuf,
    },
}

fn load(cli: &Cli) -> Result<ExperimentConfig> {
    let path = cli.config.as_deref().ok_or_else(|| HarnessError::config("--config", "this command needs a config file"))?;
    Ok(ExperimentConfig::load(path)?.with_overrides(cli.seed, cli.out.as_deref()))
}

fn print(value: &impl serde::Serialize) {
    println!("{}", serde_json::to_string_pretty(value).expect("serializable"));
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::Train => {
            let res = cmd_train(&load(cli)?)?;
            print(&res.footer);
        }
        Command::Ed => print(&cmd_ed(&load(cli)?)?),
        Command::ExactLearn => {
            let r = cmd_exact_learn(&load(cli)?)?;
            println!("max conditional error {:e}, {} floored weights", r.max_conditional_error, r.floored_weights);
            for o in &r.aggregate {
                println!("order {:>2}: max |coef| {:.3e}  l1 {:.3e}", o.order, o.max_abs, o.l1);
            }
        }
        Command::Hyperopt => {
            let r = cmd_hyperopt(&load(cli)?)?;
            print(r.best_trial());
        }
        Command::DisorderSweep => print(&cmd_disorder_sweep(&load(cli)?)?.rows),
        Command::ExportCsv { log } => {
            let csv = export_csv(log)?;
            match &cli.out {
                Some(dir) => {
                    std::fs::create_dir_all(dir).map_err(|e| HarnessError::Io { path: dir.clone(), source: e })?;
                    let path = Path::new(dir).join("log.csv");
                    std::fs::write(&path, csv).map_err(|e| HarnessError::Io { path, source: e })?;
                }
                None => print!("{csv}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
