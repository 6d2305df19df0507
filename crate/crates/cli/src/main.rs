//! `pspin`: runs the Parisi solver, the fluctuation constants and the Monte
//! Carlo checks from a JSON configuration file.

mod commands;
mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use commands::{Checks, Flags};
use config::{RunConfig, Threads};
use output::Sink;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Scope(String),
    Numerical(String),
    Io(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid configuration: {m}"),
            CliError::Scope(m) => write!(f, "outside theorem scope: {m}"),
            CliError::Numerical(m) => write!(f, "numerical failure: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<pspin_core::Error> for CliError {
    fn from(e: pspin_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else if let pspin_core::Error::ScopeViolation(m) = e {
            CliError::Scope(m)
        } else {
            CliError::Config(e.to_string())
        }
    }
}

#[derive(Parser)]
#[command(
    name = "pspin",
    version,
    about = "Fluctuation constants and finite-size checks for mixed p-spin glasses"
)]
struct Cli {
    /// Run configuration (JSON). Omitted keys take their defaults.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Master seed, overriding the configuration.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output directory, overriding the configuration.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads, overriding the configuration.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Exit with status 3 when a built-in acceptance check fails.
    #[arg(long, global = true)]
    check: bool,

    /// Also write SVG plots of the produced curves.
    #[arg(long, global = true)]
    svg: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the Parisi recursion for a given or optimized measure.
    Parisi {
        /// Minimize the Parisi functional instead of using `measure.atoms`.
        #[arg(long)]
        optimize: bool,
    },
    /// Compute d, the curve u_t and nu.
    Constants,
    /// Estimate Var(f_N) over the size ladder.
    Variance,
    /// Interpolation curve and the variance identity.
    Lemma2,
    /// Overlap histograms and tail masses of coupled systems.
    Chaos,
    /// Normalized free energy samples with KS and Stein reports.
    Clt,
    /// Tilted coupled free energy against the Guerra bound.
    Guerra,
}

fn resolve(cli: &Cli) -> Result<RunConfig, CliError> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(o) = &cli.out {
        cfg.out = o.clone();
    }
    match cli.threads {
        Some(0) => return Err(CliError::Config("--threads must be at least 1".into())),
        Some(n) => cfg.threads = Threads::Count(n),
        None => {}
    }
    Ok(cfg)
}

fn run(cli: &Cli) -> Result<Checks, CliError> {
    let cfg = resolve(cli)?;
    if let Threads::Count(n) = cfg.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    }
    let mut sink = Sink::new(&cfg)?;
    sink.resolved_config(&cfg)?;
    let mut flags = Flags {
        svg: cli.svg,
        ..Flags::default()
    };
    let checks = match cli.command {
        Command::Parisi { optimize } => {
            flags.optimize = optimize;
            commands::parisi(&cfg, flags, &mut sink)
        }
        Command::Constants => commands::constants_cmd(&cfg, flags, &mut sink),
        Command::Variance => commands::variance(&cfg, flags, &mut sink),
        Command::Lemma2 => commands::lemma2(&cfg, flags, &mut sink),
        Command::Chaos => commands::chaos(&cfg, flags, &mut sink),
        Command::Clt => commands::clt(&cfg, flags, &mut sink),
        Command::Guerra => commands::guerra(&cfg, flags, &mut sink),
    }?;
    for p in sink.written() {
        eprintln!("wrote {}", p.display());
    }
    Ok(checks)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(checks) => {
            for (name, pass) in &checks.0 {
                eprintln!("{} {name}", if *pass { "PASS" } else { "FAIL" });
            }
            if cli.check && !checks.all_pass() {
                ExitCode::from(3)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
