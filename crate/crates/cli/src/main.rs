use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use stochres_core::runner::{run_experiment, RunConfig};
use stochres_core::{Error, ErrorKind};

/// Runs capacity experiments on stochastic bit reservoirs.
///
/// Exit codes: 0 success, 2 configuration error, 3 numeric check failure,
/// 4 I/O failure.
#[derive(Parser)]
#[command(name = "stochres", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run whatever experiment the config file names.
    Run(Opts),
    /// Noise-to-signal spectrum and IPC of one reservoir, three ways.
    Ipc(Opts),
    /// IPC against register size for the noisy shift register.
    ScanN(Opts),
    /// Exponential- and polynomial-tailed switching signal families.
    Switching(Opts),
    /// Tail classification of bump shapes and planted signals.
    Tails(Opts),
    /// Rank and capacity of the power-of-two product basis.
    PowerBasis(Opts),
    /// All-zero probabilities and detection sample sizes.
    Learnability(Opts),
    /// Brute-force fat-shattering witness for the switching class.
    FatShatter(Opts),
    /// Unitary-pair embedding checks.
    EmbedCheck(Opts),
}

#[derive(Args)]
struct Opts {
    /// JSON run config.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Root seed; overrides the config.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory; overrides the config.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Worker threads; results do not depend on it.
    #[arg(long)]
    threads: Option<usize>,
}

fn exit_code(e: &Error) -> u8 {
    match e.kind() {
        ErrorKind::Config => 2,
        ErrorKind::Numeric => 3,
        ErrorKind::Io => 4,
    }
}

fn run(name: Option<&str>, opts: Opts) -> Result<bool, Error> {
    let mut cfg = match &opts.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::new(name.ok_or_else(|| Error::ConfigValidation("`run` needs --config".into()))?),
    };
    if let Some(name) = name {
        if cfg.experiment != name {
            return Err(Error::ConfigValidation(format!("config is for `{}`, not `{name}`", cfg.experiment)));
        }
    }
    if let Some(seed) = opts.seed {
        cfg.seed = seed;
    }
    if opts.threads.is_some() {
        cfg.threads = opts.threads;
    }
    let manifest = run_experiment(&cfg, opts.out_dir.as_deref())?;
    for f in &manifest.files {
        println!("{}  {}", f.sha256, f.path);
    }
    println!("config {}  {} ms", manifest.config_hash, manifest.runtime_ms);
    Ok(manifest.checks_passed)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let (name, opts) = match cli.command {
        Command::Run(o) => (None, o),
        Command::Ipc(o) => (Some("ipc"), o),
        Command::ScanN(o) => (Some("scan-n"), o),
        Command::Switching(o) => (Some("switching"), o),
        Command::Tails(o) => (Some("tails"), o),
        Command::PowerBasis(o) => (Some("power-basis"), o),
        Command::Learnability(o) => (Some("learnability"), o),
        Command::FatShatter(o) => (Some("fat-shatter"), o),
        Command::EmbedCheck(o) => (Some("embed-check"), o),
    };
    match run(name, opts) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("numeric self-checks failed");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
