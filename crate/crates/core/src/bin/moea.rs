use std::fs::{self, File};
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use moea_core::harness::{
    compare, compute_metrics, provider_for, run_with, ConfigError, RunConfig, RunError, RunLog, RunMetrics, Variant,
};

#[derive(Parser)]
#[command(name = "moea", version, about = "Search for safety-violating scenarios")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one search and write log.jsonl and metrics.json into --out.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's variant.
        #[arg(long, value_enum)]
        variant: Option<Variant>,
        /// Overrides the config's master seed.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Recompute metrics from a run log and print them as JSON.
    Metrics {
        #[arg(long)]
        log: PathBuf,
    },
    /// Compare metric files; writes a markdown table and a cumulative CSV.
    Compare {
        #[arg(required = true, num_args = 2..)]
        metrics: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check a config file and print its digests.
    ValidateConfig { config: PathBuf },
}

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_PROVIDER: u8 = 3;
const EXIT_MALFORMED_LOG: u8 = 4;

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl std::fmt::Display) -> Self {
        Self {
            code,
            message: message.to_string(),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::new(EXIT_FAILURE, e)
    }
}

impl From<ConfigError> for Failure {
    fn from(e: ConfigError) -> Self {
        Failure::new(EXIT_CONFIG, e)
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        let code = match e {
            RunError::Config(_) => EXIT_CONFIG,
            RunError::Provider(_) | RunError::Prompt(_) => EXIT_PROVIDER,
            RunError::Metrics(_) => EXIT_MALFORMED_LOG,
            _ => EXIT_FAILURE,
        };
        Failure::new(code, e)
    }
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<(), Failure> {
    let text = serde_json::to_string_pretty(value).map_err(|e| Failure::new(EXIT_FAILURE, e))?;
    fs::write(path, text + "\n")?;
    Ok(())
}

fn cmd_run(config: &Path, variant: Option<Variant>, seed: Option<u64>, out: &Path) -> Result<(), Failure> {
    let mut config = RunConfig::load(config)?;
    if let Some(v) = variant {
        config.variant = v;
    }
    if let Some(s) = seed {
        config.master_seed = s;
    }
    config.validate()?;
    let provider = provider_for(&config)?;
    fs::create_dir_all(out)?;
    let log_path = out.join("log.jsonl");
    let mut sink = BufWriter::new(File::create(&log_path)?);
    let (metrics, _) = run_with(&config, provider.as_ref(), Some(&mut sink))?;
    drop(sink);
    write_json(&out.join("metrics.json"), &metrics)?;
    println!(
        "{} seed {}: {} evaluations, {} violations, {} types -> {}",
        metrics.variant,
        metrics.master_seed,
        metrics.solutions_generated,
        metrics.violations_found,
        metrics.types_detected,
        out.display()
    );
    Ok(())
}

fn cmd_metrics(log: &Path) -> Result<(), Failure> {
    let file = File::open(log)?;
    let log = RunLog::read(BufReader::new(file)).map_err(|e| Failure::new(EXIT_MALFORMED_LOG, e))?;
    let metrics = compute_metrics(&log).map_err(|e| Failure::new(EXIT_MALFORMED_LOG, e))?;
    let text = serde_json::to_string_pretty(&metrics).map_err(|e| Failure::new(EXIT_FAILURE, e))?;
    println!("{text}");
    Ok(())
}

fn cmd_compare(files: &[PathBuf], out: &Path) -> Result<(), Failure> {
    let metrics = files
        .iter()
        .map(|p| {
            let text = fs::read_to_string(p)?;
            serde_json::from_str::<RunMetrics>(&text)
                .map_err(|e| Failure::new(EXIT_FAILURE, format!("{}: {e}", p.display())))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let report = compare(&metrics).map_err(|e| Failure::new(EXIT_FAILURE, e))?;
    if let Some(dir) = out.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir)?;
    }
    fs::write(out, report.render())?;
    let csv = out.with_extension("csv");
    fs::write(&csv, &report.cumulative_csv)?;
    print!("{}", report.render());
    eprintln!("wrote {} and {}", out.display(), csv.display());
    Ok(())
}

fn cmd_validate(config: &Path) -> Result<(), Failure> {
    let config = RunConfig::load(config)?;
    println!("ok");
    println!("config_digest {}", config.config_digest());
    println!("world_digest {}", config.world_digest());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            config,
            variant,
            seed,
            out,
        } => cmd_run(config, *variant, *seed, out),
        Command::Metrics { log } => cmd_metrics(log),
        Command::Compare { metrics, out } => cmd_compare(metrics, out),
        Command::ValidateConfig { config } => cmd_validate(config),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
