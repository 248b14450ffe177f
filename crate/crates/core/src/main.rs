use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use diffgrid::harness::{compare_experiments, export_csv, run_experiment, ExperimentConfig};
use diffgrid::topology;

#[derive(Parser)]
#[command(name = "diffgrid", about = "Distributed state estimation simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment config and export its averaged trace as CSV.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Override the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Output CSV path (overrides the config's `output`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several algorithms under one config and write a combined CSV
    /// plus a plot script.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated algorithm tags, e.g. atc,mcse,desta,dsita.
        #[arg(long, value_delimiter = ',')]
        algorithms: Vec<String>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Bus whose phase angle gap is exported.
        #[arg(long, default_value_t = 5)]
        gap_bus: usize,
    },
    /// Show a built-in topology preset.
    Preset {
        name: String,
        /// Print the preset document to stdout.
        #[arg(long)]
        print: bool,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<(), String> {
    match cli.command {
        Command::Run { config, seed, out } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| format!("cannot read {}: {e}", config.display()))?;
            let mut cfg = ExperimentConfig::from_toml(&text).map_err(|e| e.to_string())?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            let out = out
                .or_else(|| cfg.output.clone().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("trace.csv"));
            let bundle = run_experiment(&cfg).map_err(|e| e.to_string())?;
            export_csv(&bundle, &cfg.gap_buses, &out).map_err(|e| e.to_string())?;
            println!(
                "{}: {} runs x {} iterations in {:.2?} -> {}",
                bundle.label,
                cfg.runs,
                cfg.iterations,
                bundle.duration,
                out.display()
            );
            Ok(())
        }
        Command::Compare {
            config,
            algorithms,
            seed,
            out,
            gap_bus,
        } => {
            let text = std::fs::read_to_string(&config)
                .map_err(|e| format!("cannot read {}: {e}", config.display()))?;
            let mut base = ExperimentConfig::from_toml(&text).map_err(|e| e.to_string())?;
            if let Some(seed) = seed {
                base.seed = seed;
            }
            let algorithms = if algorithms.is_empty() {
                vec![
                    "atc".to_string(),
                    "mcse".to_string(),
                    "desta".to_string(),
                    "dsita".to_string(),
                ]
            } else {
                algorithms
            };
            let cfgs: Vec<ExperimentConfig> = algorithms
                .iter()
                .map(|alg| {
                    let mut c = base.clone();
                    c.algorithm = alg.clone();
                    c
                })
                .collect();
            let out = out
                .or_else(|| base.output.clone().map(PathBuf::from))
                .unwrap_or_else(|| PathBuf::from("compare.csv"));
            let bundles =
                compare_experiments(&cfgs, gap_bus, &out).map_err(|e| e.to_string())?;
            for b in &bundles {
                println!("{}: done in {:.2?}", b.label, b.duration);
            }
            println!("wrote {} and plot script", out.display());
            Ok(())
        }
        Command::Preset { name, print } => {
            let t = diffgrid::Topology64::preset(&name).map_err(|e| e.to_string())?;
            if print {
                match name.as_str() {
                    "ieee14" => print!("{}", topology::IEEE14_CONFIG),
                    _ => unreachable!("preset resolved above"),
                }
            } else {
                println!(
                    "{}: {} buses, {} branches",
                    name,
                    t.num_buses(),
                    t.branches().len()
                );
            }
            Ok(())
        }
    }
}
