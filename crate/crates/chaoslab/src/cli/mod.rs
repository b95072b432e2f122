//! Command-line front end: `run`, `list` and `cache`.

pub mod config;
pub mod experiments;
pub mod report;

use std::ffi::OsString;
use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::kacsphere::{cache, table::DEFAULT_DU};

use config::{parse_ns, DensityChoice, ExperimentConfig, Format, PartialConfig};
use experiments::{Experiment, EXPERIMENTS};
use report::{csv_string, write_outputs, Summary};

#[derive(Debug, Parser)]
#[command(name = "chaoslab", version, about = "Numerical experiments on quantitative propagation of chaos")]
pub struct Cli {
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and check its acceptance criterion.
    Run(RunArgs),
    /// List experiments with their anchors.
    List,
    /// Manage the partition-function cache.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CacheAction {
    /// Precompute partition tables.
    Build {
        /// Density to tabulate; all analytic densities when omitted.
        #[arg(long)]
        density: Option<DensityChoice>,
        #[arg(long, default_value_t = 1024)]
        max_n: usize,
    },
    /// Delete every cached table.
    Clear,
}

#[derive(Debug, Args)]
pub struct RunArgs {
    pub name: String,
    /// TOML configuration file; command-line flags take precedence.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub density: Option<DensityChoice>,
    /// Comma-separated particle numbers, e.g. 16,32,64.
    #[arg(long, value_parser = parse_ns)]
    pub ns: Option<Vec<usize>>,
    #[arg(long)]
    pub mc_reps: Option<usize>,
    #[arg(long)]
    pub reference_size: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub k: Option<f64>,
    /// Output path stem; `.csv` and `.json` are appended.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

impl RunArgs {
    fn overrides(&self) -> PartialConfig {
        PartialConfig {
            experiment: None,
            density: self.density.clone(),
            ns: self.ns.clone(),
            mc_reps: self.mc_reps,
            reference_size: self.reference_size,
            seed: self.seed,
            s: self.s,
            k: self.k,
            output: self.output.clone(),
            format: self.format,
        }
    }
}

/// Resolves defaults, then the TOML file, then the flags.
pub fn resolve_config(exp: &Experiment, args: &RunArgs) -> Result<ExperimentConfig> {
    let file = match &args.config {
        Some(p) => PartialConfig::from_toml_file(p)?,
        None => PartialConfig::default(),
    };
    if let Some(name) = file.experiment.as_deref().filter(|n| *n != exp.name) {
        return Err(Error::Config(format!("config file is for `{name}`, not `{}`", exp.name)));
    }
    ExperimentConfig::resolve(file.overlay(args.overrides()), &(exp.defaults)())
}

/// Runs one experiment end to end: outputs written, summary returned.
pub fn run_experiment(exp: &Experiment, cfg: &ExperimentConfig) -> Result<(Summary, String)> {
    let start = Instant::now();
    let rec = experiments::execute(exp, cfg)?;
    let csv = csv_string(&rec.rows)?;
    let summary = Summary {
        experiment: exp.name.to_string(),
        criterion: exp.criterion,
        anchor: exp.anchor.to_string(),
        passed: rec.passed(),
        checks: rec.checks,
        fits: rec.fits,
        rows: rec.rows,
        wall_clock_seconds: start.elapsed().as_secs_f64(),
        config: cfg.clone(),
    };
    write_outputs(&cfg.output, &csv, &summary)?;
    Ok((summary, csv))
}

fn run(args: RunArgs) -> i32 {
    let exp = match experiments::find(&args.name) {
        Ok(e) => e,
        Err(e) => {
            eprintln!("error: {e}; try `chaoslab list`");
            return 2;
        }
    };
    let cfg = match resolve_config(exp, &args) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let (summary, csv) = match run_experiment(exp, &cfg) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("criterion {} ({}) errored: {e}", exp.criterion, exp.name);
            return 1;
        }
    };
    match cfg.format {
        Format::Csv => print!("{csv}"),
        Format::Json => println!("{}", summary.to_json()),
    }
    for c in &summary.checks {
        eprintln!("[{}] {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail);
    }
    if summary.passed {
        eprintln!("criterion {} ({}) passed in {:.2} s", exp.criterion, exp.name, summary.wall_clock_seconds);
        0
    } else {
        let failed: Vec<&str> = summary.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        let err = Error::Assertion { criterion: format!("{} ({})", exp.criterion, exp.name), detail: failed.join("; ") };
        eprintln!("{err}");
        1
    }
}

pub fn list_lines() -> Vec<String> {
    EXPERIMENTS.iter().map(|e| format!("{:>2}  {} → {}  {}", e.criterion, e.name, e.anchor, e.summary)).collect()
}

fn cache_command(action: CacheAction) -> Result<()> {
    let dir = cache::cache_dir();
    match action {
        CacheAction::Build { density, max_n } => {
            let choices = match density {
                Some(d) => vec![d],
                None => vec![DensityChoice::Gaussian, DensityChoice::Uniform, DensityChoice::Bimodal],
            };
            for c in choices {
                let f = c.analytic()?;
                let t0 = Instant::now();
                cache::load_or_build(&f, max_n, DEFAULT_DU, &dir)?;
                println!("{c}: max_n = {max_n} ready in {:.2} s", t0.elapsed().as_secs_f64());
            }
            println!("cache directory: {}", dir.display());
        }
        CacheAction::Clear => {
            let removed = cache::clear(&dir)?;
            println!("removed {removed} table(s) from {}", dir.display());
        }
    }
    Ok(())
}

/// Entry point; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    if let Some(t) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            eprintln!("warning: --threads ignored: {e}");
        }
    }
    match cli.command {
        Command::Run(args) => run(args),
        Command::List => {
            for l in list_lines() {
                println!("{l}");
            }
            0
        }
        Command::Cache { action } => match cache_command(action) {
            Ok(()) => 0,
            Err(e) => {
                eprintln!("error: {e}");
                1
            }
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn list_has_every_anchor() {
        let lines = list_lines();
        assert_eq!(lines.len(), 9);
        assert!(lines.iter().any(|l| l.contains("poincare-rate → estim:Poincaré2")));
        assert!(lines.iter().any(|l| l.contains("entropy-chaos → ineq:EntropCvgce1")));
    }

    #[test]
    fn unknown_experiment_exits_2() {
        assert_eq!(main_with_args(["chaoslab", "run", "no-such-thing"]), 2);
        assert_eq!(main_with_args(["chaoslab", "bogus"]), 2);
        assert_eq!(main_with_args(["chaoslab", "list"]), 0);
    }
}
