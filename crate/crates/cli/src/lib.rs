//! Command-line experiment runner for the loop-model simulator.

pub mod commands;
pub mod config;
pub mod error;
pub mod grid;
pub mod output;

use std::path::PathBuf;

use clap::Parser;

use crate::config::ExperimentConfig;
use crate::error::{invalid, CliError, CliResult};
use crate::output::{ResultSink, RunResult};

/// Environment variable that overrides `--workers`.
pub const THREADS_ENV: &str = "LOOPCODE_THREADS";

#[derive(Debug, Parser)]
#[command(name = "loopcode", version, about = "Monte Carlo experiments on the heralded-dephasing loop model")]
pub struct Cli {
    /// cmi, memory, punctured, decoder, sweep, collapse or oracle.
    pub command: Option<String>,
    /// Flat key=value configuration file; flags override its entries.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Write the effective configuration here before running.
    #[arg(long)]
    pub save_config: Option<PathBuf>,
    /// Value, comma list or start:stop:step grid.
    #[arg(long)]
    pub p: Option<String>,
    #[arg(long)]
    pub q: Option<String>,
    /// `key=grid` pairs, e.g. `--grid p=0:1:0.05 q=0:1:0.05`.
    #[arg(long, num_args = 1.., value_name = "KEY=GRID")]
    pub grid: Vec<String>,
    /// Comma-separated odd lattice sizes.
    #[arg(long = "L", value_name = "SIZES")]
    pub sizes: Option<String>,
    #[arg(long)]
    pub geometry: Option<String>,
    #[arg(long)]
    pub r: Option<String>,
    #[arg(long = "d-ac", alias = "d")]
    pub d_ac: Option<String>,
    /// Separations for the markov preset.
    #[arg(long)]
    pub r_grid: Option<String>,
    #[arg(long)]
    pub gamma: Option<String>,
    /// Comma-separated tile sizes for the quasi-local decoder.
    #[arg(long)]
    pub tile: Option<String>,
    /// Buffer fraction of each tile.
    #[arg(long)]
    pub a: Option<String>,
    #[arg(long)]
    pub samples: Option<String>,
    #[arg(long)]
    pub seed: Option<String>,
    #[arg(long)]
    pub workers: Option<String>,
    /// Results file, appended to; stdout when absent.
    #[arg(long)]
    pub output: Option<String>,
    #[arg(long)]
    pub format: Option<String>,
    /// q0-crossover, percolation or markov.
    #[arg(long)]
    pub preset: Option<String>,
    /// Result files read by `collapse`.
    #[arg(long, num_args = 1..)]
    pub input: Vec<String>,
    /// Observable collapsed by `collapse`.
    #[arg(long)]
    pub observable: Option<String>,
}

impl Cli {
    /// Merges the config file, the positional command and the flags.
    pub fn to_config(&self) -> CliResult<ExperimentConfig> {
        let mut cfg = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path).map_err(|e| invalid(format!("{}: {e}", path.display())))?;
                ExperimentConfig::from_config_str(&text)?
            }
            None => ExperimentConfig::default(),
        };
        match &self.command {
            Some(c) => cfg.set("command", c)?,
            None if self.config.is_none() => return Err(invalid("no command given")),
            None => {}
        }
        let flags = [
            ("p", &self.p),
            ("q", &self.q),
            ("L", &self.sizes),
            ("geometry", &self.geometry),
            ("r", &self.r),
            ("d_ac", &self.d_ac),
            ("r_grid", &self.r_grid),
            ("gamma", &self.gamma),
            ("tile", &self.tile),
            ("a", &self.a),
            ("samples", &self.samples),
            ("seed", &self.seed),
            ("workers", &self.workers),
            ("output", &self.output),
            ("format", &self.format),
            ("preset", &self.preset),
            ("observable", &self.observable),
        ];
        for (key, value) in flags {
            if let Some(v) = value {
                cfg.set(key, v)?;
            }
        }
        for g in &self.grid {
            let (k, v) = g.split_once('=').ok_or_else(|| invalid(format!("--grid expects key=grid, got {g:?}")))?;
            if !matches!(k, "p" | "q") {
                return Err(invalid(format!("--grid supports p and q, got {k:?}")));
            }
            cfg.set(k, v)?;
        }
        if !self.input.is_empty() {
            cfg.set("input", &self.input.join(","))?;
        }
        Ok(cfg)
    }
}

/// Worker count after the environment override.
pub fn effective_workers(cfg: &ExperimentConfig) -> CliResult<usize> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n >= 1 => Ok(n),
            _ => Err(invalid(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
        },
        Err(_) => Ok(cfg.workers),
    }
}

/// Validates and runs one experiment on its own thread pool.
pub fn run_config(cfg: &ExperimentConfig) -> CliResult<Vec<RunResult>> {
    cfg.validate()?;
    let workers = effective_workers(cfg)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Fault(format!("thread pool: {e}")))?;
    let mut sink = ResultSink::open(cfg.output.as_deref(), cfg.format)?;
    pool.install(|| commands::execute(cfg, &mut sink))
}

/// Entry point shared by the binary and the tests; returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let result = cli.to_config().and_then(|cfg| {
        if let Some(path) = &cli.save_config {
            cfg.validate()?;
            std::fs::write(path, cfg.to_config_string())
                .map_err(|source| CliError::Io { path: path.clone(), source })?;
        }
        run_config(&cfg)
    });
    match result {
        Ok(_) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
