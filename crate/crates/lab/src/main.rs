use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use ma_lab::config::{parse_config, Experiment, ExperimentConfig};
use ma_lab::error::LabError;
use ma_lab::report::ExperimentReport;
use ma_lab::runner;

#[derive(Parser)]
#[command(name = "ma-lab", version, about = "Monge-Ampere and linearized Monge-Ampere experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    /// Experiment configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory; overrides MA_LAB_OUT and the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Grid spacing, repeatable; replaces the configured spacings.
    #[arg(long, global = true)]
    spacing: Vec<f64>,
    /// Worker threads for parallel sweeps.
    #[arg(long, global = true)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    SolveMa,
    SolveLma,
    Sections,
    Cover,
    Maximal,
    Goodsets,
    Barrier,
    /// Stability sweeps: the configured one, or all of them.
    Stability {
        /// Run only this stability experiment.
        #[arg(long)]
        only: Option<String>,
    },
    /// Every experiment listed in the configuration's suite.
    Suite,
}

fn load(common: &Common, default: Experiment) -> Result<ExperimentConfig, LabError> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
                path: path.clone(),
                source,
            })?;
            parse_config(&text)?
        }
        None => ExperimentConfig::new(default),
    };
    if !common.spacing.is_empty() {
        if let Some(h) = common.spacing.iter().find(|h| !(**h > 0.0)) {
            return Err(LabError::Usage(format!("--spacing must be positive, got {h}")));
        }
        cfg.spacings = common.spacing.clone();
    }
    Ok(cfg)
}

fn configure(cli: &Cli) -> Result<ExperimentConfig, LabError> {
    let fixed = match &cli.command {
        Command::SolveMa => Some(Experiment::SolveMa),
        Command::SolveLma => Some(Experiment::SolveLma),
        Command::Sections => Some(Experiment::Sections),
        Command::Cover => Some(Experiment::Cover),
        Command::Maximal => Some(Experiment::Maximal),
        Command::Goodsets => Some(Experiment::GoodSets),
        Command::Barrier => Some(Experiment::Barrier),
        Command::Stability { .. } | Command::Suite => None,
    };
    let mut cfg = load(&cli.common, fixed.unwrap_or(Experiment::Suite))?;
    match &cli.command {
        Command::Suite => cfg.experiment = Experiment::Suite,
        Command::Stability { only } => {
            if let Some(name) = only {
                let e = Experiment::from_name(name)
                    .filter(|e| e.is_stability())
                    .ok_or_else(|| LabError::Usage(format!("`{name}` is not a stability experiment")))?;
                cfg.experiment = e;
            } else if !cfg.experiment.is_stability() {
                cfg.experiment = Experiment::Suite;
                cfg.suite = Experiment::runnable().into_iter().filter(|e| e.is_stability()).collect();
            }
        }
        _ => cfg.experiment = fixed.expect("module subcommands name an experiment"),
    }
    Ok(cfg)
}

fn print_report(r: &ExperimentReport) {
    let status = if r.passed() { "pass" } else { "FAIL" };
    println!(
        "{}: {status} ({} assertions, {:.1} s)",
        r.id,
        r.assertions.len(),
        r.wall_time_s
    );
    for a in r.failures() {
        let rel = serde_json::to_value(a.relation).expect("relations serialize");
        eprintln!(
            "  failed: {}: {:e} {} {:e} (tolerance {:e})",
            a.name,
            a.lhs,
            rel.as_str().unwrap_or("?"),
            a.rhs,
            a.tolerance
        );
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.common.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    }
    let result = configure(&cli).and_then(|cfg| {
        let out = runner::output_dir(cli.common.out.as_deref(), &cfg);
        runner::run(&cfg, &out).map(|r| (r, out))
    });
    match result {
        Ok((reports, out)) => {
            for r in &reports {
                print_report(r);
            }
            println!("artifacts in {}", out.display());
            ExitCode::from(runner::exit_status(&reports) as u8)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
