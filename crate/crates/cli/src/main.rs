mod oracle;
mod output;

use anaconda_core::scenario::{preset_ids, preset_source, run_experiment, Experiment, ExperimentOptions, TrialOptions};
use anaconda_core::Error;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

const DEFAULT_OUT_DIR: &str = "anaconda-out";

#[derive(Parser)]
#[command(name = "anaconda", version, about = "Multi-camera coverage with learned coordination neighborhoods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
pub struct Source {
    /// Experiment file (TOML).
    #[arg(conflicts_with = "preset", required_unless_present = "preset")]
    pub config: Option<PathBuf>,
    /// Use a shipped experiment instead of a file.
    #[arg(long)]
    pub preset: Option<String>,
    /// Replace a config value, e.g. `trials=1` or `cameras.alpha=3`.
    #[arg(long = "override", value_name = "KEY=VALUE", num_args = 1.., action = clap::ArgAction::Append)]
    pub overrides: Vec<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment and write CSVs, summary.json and manifest.json.
    Run {
        #[command(flatten)]
        source: Source,
        /// Output directory.
        #[arg(short, long, env = "ANACONDA_OUT_DIR", default_value = DEFAULT_OUT_DIR)]
        out: PathBuf,
        /// Worker threads for trials; 0 uses every core.
        #[arg(long, default_value_t = 0)]
        jobs: usize,
        /// Skip bound reports.
        #[arg(long)]
        no_bounds: bool,
    },
    /// List the shipped experiments.
    Presets {
        /// Print the TOML of one preset.
        #[arg(long, value_name = "ID")]
        show: Option<String>,
    },
    /// Check an experiment file without running it.
    Validate {
        #[command(flatten)]
        source: Source,
    },
    /// Exhaustive checks and brute-force optima on a small instance.
    Oracle(oracle::OracleArgs),
}

/// A failure and the exit status it maps to.
pub struct Failure {
    code: u8,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config { .. } | Error::InfiniteRounds => 2,
            Error::Connectivity(_) | Error::Capacity { .. } => 3,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

pub struct Loaded {
    pub experiment: Experiment,
    pub source: String,
    pub overrides: Vec<String>,
}

pub fn load(source: &Source) -> Result<Loaded, Failure> {
    let (text, name) = match (&source.config, &source.preset) {
        (Some(path), _) => (
            std::fs::read_to_string(path).map_err(|e| Failure::new(2, format!("{}: {e}", path.display())))?,
            path.display().to_string(),
        ),
        (None, Some(id)) => (
            preset_source(id)
                .ok_or_else(|| Failure::new(2, format!("unknown preset `{id}`; try `anaconda presets`")))?
                .to_string(),
            format!("preset:{id}"),
        ),
        (None, None) => return Err(Failure::new(2, "give a config file or --preset")),
    };
    let experiment = Experiment::parse(&text, &source.overrides).map_err(|e| {
        let mut f = Failure::from(e);
        f.message = format!("{name}: {}", f.message);
        f
    })?;
    Ok(Loaded {
        experiment,
        source: name,
        overrides: source.overrides.clone(),
    })
}

fn cmd_run(source: &Source, out: &Path, jobs: usize, no_bounds: bool) -> Result<(), Failure> {
    let loaded = load(source)?;
    let started = Instant::now();
    let options = ExperimentOptions {
        jobs,
        trial: TrialOptions {
            bounds: !no_bounds,
            ..TrialOptions::default()
        },
    };
    let result = run_experiment(&loaded.experiment, &options)?;
    let written = output::write_all(out, &loaded, &result, started)
        .map_err(|e| Failure::new(1, format!("writing {}: {e}", out.display())))?;
    output::print_table(&result);
    println!("wrote {} files to {}", written, out.display());
    Ok(())
}

fn cmd_presets(show: Option<&str>) -> Result<(), Failure> {
    if let Some(id) = show {
        let src = preset_source(id).ok_or_else(|| Failure::new(2, format!("unknown preset `{id}`")))?;
        print!("{src}");
        return Ok(());
    }
    for id in preset_ids() {
        let e = anaconda_core::scenario::preset(id)?;
        println!("{id}\t{}", e.variants[0].config.description);
    }
    Ok(())
}

fn cmd_validate(source: &Source) -> Result<(), Failure> {
    let loaded = load(source)?;
    let e = &loaded.experiment;
    let jobs: usize = e
        .variants
        .iter()
        .map(|v| v.config.algorithms.len() * v.config.trials as usize)
        .sum();
    println!(
        "ok: {} ({} variants, {} trial runs, digest {})",
        e.name,
        e.variants.len(),
        jobs,
        output::config_digest(e)
    );
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match &cli.command {
        Command::Run {
            source,
            out,
            jobs,
            no_bounds,
        } => cmd_run(source, out, *jobs, *no_bounds),
        Command::Presets { show } => cmd_presets(show.as_deref()),
        Command::Validate { source } => cmd_validate(source),
        Command::Oracle(args) => oracle::run(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
