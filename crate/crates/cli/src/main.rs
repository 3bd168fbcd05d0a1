use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rclab::harness::{
    builtins, describe, emit_plot_data, fmt_value, ingest_csv, lookup, output_root, run_experiment,
    run_sweep, write_report, ExperimentConfig, IngestSpec, SweepConfig,
};
use rclab::Error;

#[derive(Parser)]
#[command(
    name = "rclab",
    version,
    about = "Reservoir-computing transfer experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Target {
    /// Registered experiment id (see `rclab list`).
    id: Option<String>,
    /// Experiment config file; overrides the id.
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write its CSV artifacts.
    Run {
        #[command(flatten)]
        target: Target,
        /// Master seed; seeds run from here upwards.
        #[arg(long)]
        seed: Option<u64>,
        /// Number of seeds.
        #[arg(long)]
        seeds: Option<usize>,
        /// Output root (default `$RCLAB_OUT` or `./results`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// List registered experiments.
    List,
    /// Print the setup of an experiment.
    Describe {
        #[command(flatten)]
        target: Target,
    },
    /// Grid-search reservoir hyperparameters.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Filter and normalize a measured pendulum CSV.
    Ingest {
        #[arg(long)]
        config: PathBuf,
        /// Output CSV file (default `<out root>/ingested.csv`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Convert a finished run's CSVs into gnuplot columns.
    EmitPlotData {
        id: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write every registered experiment config as TOML.
    ExportConfigs {
        #[arg(long, default_value = "configs")]
        dir: PathBuf,
    },
}

enum Outcome {
    Pass,
    Fail,
}

fn resolve(target: &Target) -> Result<ExperimentConfig, Error> {
    match (&target.config, &target.id) {
        (Some(path), _) => ExperimentConfig::load(path),
        (None, Some(id)) => lookup(id),
        (None, None) => Err(Error::Config("give an experiment id or --config".into())),
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Error> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::Io {
            path: dir.to_path_buf(),
            source: e,
        })?;
    }
    std::fs::write(path, text).map_err(|e| Error::Io {
        path: path.to_path_buf(),
        source: e,
    })
}

fn execute(cmd: Command) -> Result<Outcome, Error> {
    match cmd {
        Command::Run {
            target,
            seed,
            seeds,
            out,
        } => {
            let mut cfg = resolve(&target)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            if let Some(n) = seeds {
                cfg.n_seeds = n;
            }
            let report = run_experiment(&cfg)?;
            let root = output_root(out.as_deref());
            write_report(&report, &root)?;
            for c in &report.checks {
                println!(
                    "{} {}: {} {} {} (median {})",
                    if c.passed { "PASS" } else { "FAIL" },
                    report.id,
                    c.check.metric,
                    c.check.op.symbol(),
                    c.check.value,
                    fmt_value(c.value)
                );
            }
            println!("artifacts in {}", root.join(&report.id).display());
            Ok(if report.passed() {
                Outcome::Pass
            } else {
                Outcome::Fail
            })
        }
        Command::List => {
            for cfg in builtins() {
                println!("{:<6} {}", cfg.id, cfg.description);
            }
            Ok(Outcome::Pass)
        }
        Command::Describe { target } => {
            print!("{}", describe(&resolve(&target)?));
            Ok(Outcome::Pass)
        }
        Command::Sweep { config, seed, out } => {
            let mut cfg = SweepConfig::load(&config)?;
            if let Some(s) = seed {
                cfg.master_seed = s;
            }
            let (best, table) = run_sweep(&cfg)?;
            let path = output_root(out.as_deref()).join(&cfg.id).join("scores.csv");
            write_file(&path, &table.to_csv())?;
            println!(
                "best (p, eta, alpha, sigma, lambda) = ({}, {}, {}, {}, {:e})",
                best.p, best.eta, best.alpha, best.sigma, best.lambda
            );
            println!("scores in {}", path.display());
            Ok(Outcome::Pass)
        }
        Command::Ingest { config, out } => {
            let traj = ingest_csv(&IngestSpec::load(&config)?)?;
            let path = out.unwrap_or_else(|| output_root(None).join("ingested.csv"));
            let mut csv = String::from("t,theta,omega\n");
            for i in 0..traj.len() {
                let r = traj.row(i);
                csv.push_str(&format!(
                    "{},{},{}\n",
                    fmt_value(traj.time(i)),
                    fmt_value(r[0]),
                    fmt_value(r[1])
                ));
            }
            write_file(&path, &csv)?;
            println!("{} rows written to {}", traj.len(), path.display());
            Ok(Outcome::Pass)
        }
        Command::EmitPlotData { id, out } => {
            for p in emit_plot_data(&output_root(out.as_deref()), &id)? {
                println!("{}", p.display());
            }
            Ok(Outcome::Pass)
        }
        Command::ExportConfigs { dir } => {
            for cfg in builtins() {
                let path = dir.join(format!("{}.toml", cfg.id));
                write_file(&path, &cfg.to_toml()?)?;
                println!("{}", path.display());
            }
            Ok(Outcome::Pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.command) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
