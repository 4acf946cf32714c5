use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use mapfilt_cli::commands::{self, CommandError};
use mapfilt_cli::PipelineConfig;

/// Spectrum-preserving all-pass filters for releasing confidential time series.
#[derive(Debug, Parser)]
#[command(name = "mapfilt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Seed for simulation and optimizer restarts.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = "out")]
    out: PathBuf,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate replicates of a model file.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Model JSON with `ar`, `ma`, `sigma`, `arch`.
        #[arg(long)]
        model: PathBuf,
        /// Series length per replicate.
        #[arg(long)]
        length: Option<usize>,
        /// Number of replicates.
        #[arg(long)]
        reps: Option<usize>,
        /// Also privatize each replicate and summarize privacy and utility.
        #[arg(long)]
        privatize: bool,
    },
    /// Privatize the leading channels of a series CSV.
    Privatize {
        #[command(flatten)]
        common: Common,
        /// Input series CSV (`time,<names>`).
        #[arg(long)]
        input: PathBuf,
        /// Number of confidential leading channels.
        #[arg(long)]
        nx: Option<usize>,
        /// Cepstral order.
        #[arg(long)]
        order: Option<usize>,
        /// Number of optimizer restarts (0 keeps the identity filter).
        #[arg(long)]
        restarts: Option<usize>,
        /// Record optimizer wall time in the report.
        #[arg(long)]
        timings: bool,
    },
    /// Pivot a QWI export into a series CSV.
    QwiIngest {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: PathBuf,
        /// County names, in output column order.
        #[arg(long, value_delimiter = ',', required = true)]
        counties: Vec<String>,
        /// Measure column, e.g. `Emp`.
        #[arg(long, default_value = "Emp")]
        measure: String,
    },
    /// Compare the second-order structure of two series CSVs.
    Evaluate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        original: PathBuf,
        #[arg(long)]
        privatized: PathBuf,
        /// Maximum lag; defaults to the configured report lag.
        #[arg(long)]
        lag: Option<usize>,
    },
}

fn load_config(common: &Common) -> Result<PipelineConfig, CommandError> {
    let mut cfg = match &common.config {
        Some(path) => PipelineConfig::load(path)?,
        None => PipelineConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.optimizer.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), CommandError> {
    match cli.command {
        Command::Simulate {
            common,
            model,
            length,
            reps,
            privatize,
        } => {
            let mut cfg = load_config(&common)?;
            cfg.length = length.unwrap_or(cfg.length);
            cfg.reps = reps.unwrap_or(cfg.reps);
            let seed = cfg.optimizer.seed;
            let manifest = commands::simulate(&model, &cfg, seed, &common.out, privatize)?;
            if let Some(p) = manifest.privacy {
                println!("privacy: min {:.4} max {:.4} mean {:.4}", p.min, p.max, p.mean);
            }
            println!(
                "wrote {} replicates to {}",
                manifest.replicates.len(),
                common.out.display()
            );
        }
        Command::Privatize {
            common,
            input,
            nx,
            order,
            restarts,
            timings,
        } => {
            let mut cfg = load_config(&common)?;
            cfg.nx = nx.unwrap_or(cfg.nx);
            cfg.order = order.unwrap_or(cfg.order);
            cfg.optimizer.restarts = restarts.unwrap_or(cfg.optimizer.restarts);
            cfg.timings |= timings;
            let run = commands::privatize_file(&input, &cfg, &common.out)?;
            let r = &run.report.report;
            println!(
                "privacy {:.6}  rum {:.6}  smap error {:.3e}",
                r.privacy, r.rum, r.smap_error
            );
        }
        Command::QwiIngest {
            common,
            input,
            counties,
            measure,
        } => {
            let table = commands::qwi_ingest(&input, &counties, &measure, &common.out)?;
            println!("{} quarters x {} counties", table.series.len(), table.series.dim());
        }
        Command::Evaluate {
            common,
            original,
            privatized,
            lag,
        } => {
            let cfg = load_config(&common)?;
            let m = commands::evaluate(&original, &privatized, lag.unwrap_or(cfg.report_lag), &common.out)?;
            println!("rum {:.6}  nfd {:.6}", m.rum, m.nfd);
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
