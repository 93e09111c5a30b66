use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kdvgeo_harness::compare::unique_labels;
use kdvgeo_harness::{compare, run, run_convergence_study, HarnessError, RunConfig};

#[derive(Parser)]
#[command(name = "kdvgeo", version, about = "Invariant-preserving KdV integrators")]
struct Cli {
    /// Log every step
    #[arg(long, global = true)]
    verbose: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate one configuration
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; defaults to `output.dir` from the config
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Observed convergence orders over a list of step sizes
    Converge {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        steps: Vec<f64>,
        #[arg(long = "ref")]
        reference: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run several schemes on the same problem and tabulate their drifts
    Compare {
        #[arg(long, value_delimiter = ',', required = true)]
        configs: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
}

fn out_dir(cli: Option<PathBuf>, cfg: &RunConfig) -> Result<PathBuf, HarnessError> {
    cli.or_else(|| cfg.output_dir.clone())
        .ok_or_else(|| HarnessError::Config("no output directory: pass --out or set output.dir".into()))
}

fn label_of(path: &Path) -> String {
    path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default()
}

fn execute(cli: Cli) -> Result<(), HarnessError> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = RunConfig::from_file(&config)?;
            let dir = out_dir(out, &cfg)?;
            let report = run(&cfg, &dir)?;
            print!("{}", report.report_text(&cfg));
        }
        Command::Converge { config, steps, reference, out } => {
            let cfg = RunConfig::from_file(&config)?;
            let dir = out_dir(out, &cfg)?;
            let table = run_convergence_study(&cfg, &steps, reference, &dir)?;
            print!("{}", table.to_csv());
        }
        Command::Compare { configs, out } => {
            let raw: Vec<String> = configs.iter().map(|p| label_of(p)).collect();
            let mut members = Vec::with_capacity(configs.len());
            for (label, path) in unique_labels(&raw).into_iter().zip(&configs) {
                members.push((label, RunConfig::from_file(path)?));
            }
            let report = compare(members)?;
            report.write(&out)?;
            print!("{}", report.summary_csv());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.verbose { "debug" } else { "warn" };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("kdvgeo: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
