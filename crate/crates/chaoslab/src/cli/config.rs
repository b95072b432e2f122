//! Experiment configuration: TOML file, then command-line overrides, then per-experiment defaults.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::base::density::Density;
use crate::base::grid::GridDensity;
use crate::base::rng::DEFAULT_SEED;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum DensityChoice {
    Gaussian,
    Uniform,
    Bimodal,
    /// JSON file `{"half_width": L, "values": [...]}` on the grid −L + m·2L/M.
    Custom(PathBuf),
}

impl FromStr for DensityChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gaussian" => Ok(Self::Gaussian),
            "uniform" => Ok(Self::Uniform),
            "bimodal" => Ok(Self::Bimodal),
            _ => match s.strip_prefix("custom:") {
                Some(p) if !p.is_empty() => Ok(Self::Custom(PathBuf::from(p))),
                _ => Err(Error::Config(format!(
                    "unknown density `{s}`; expected gaussian, uniform, bimodal or custom:<grid.json>"
                ))),
            },
        }
    }
}

impl TryFrom<String> for DensityChoice {
    type Error = Error;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<DensityChoice> for String {
    fn from(d: DensityChoice) -> String {
        d.to_string()
    }
}

impl fmt::Display for DensityChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Gaussian => write!(f, "gaussian"),
            Self::Uniform => write!(f, "uniform"),
            Self::Bimodal => write!(f, "bimodal"),
            Self::Custom(p) => write!(f, "custom:{}", p.display()),
        }
    }
}

impl DensityChoice {
    /// The analytic density; `bimodal` is the reference symmetric mixture.
    pub fn analytic(&self) -> Result<Density> {
        match self {
            Self::Gaussian => Ok(Density::standard_gaussian()),
            Self::Uniform => Ok(Density::uniform_standard()),
            Self::Bimodal => Ok(Density::bimodal()),
            Self::Custom(_) => Err(Error::Config("this experiment needs an analytic density".into())),
        }
    }

    pub fn load_grid(path: &Path) -> Result<GridDensity> {
        #[derive(Deserialize)]
        struct GridFile {
            half_width: f64,
            values: Vec<f64>,
        }
        let text = std::fs::read_to_string(path)?;
        let g: GridFile =
            serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
        GridDensity::new(g.half_width, g.values)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

/// Every field optional: the shape of both the TOML file and the command-line overrides.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PartialConfig {
    pub experiment: Option<String>,
    pub density: Option<DensityChoice>,
    pub ns: Option<Vec<usize>>,
    pub mc_reps: Option<usize>,
    pub reference_size: Option<usize>,
    pub seed: Option<u64>,
    pub s: Option<f64>,
    pub k: Option<f64>,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
}

impl PartialConfig {
    pub fn from_toml_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Fields set in `over` replace those in `self`.
    pub fn overlay(self, over: PartialConfig) -> Self {
        Self {
            experiment: over.experiment.or(self.experiment),
            density: over.density.or(self.density),
            ns: over.ns.or(self.ns),
            mc_reps: over.mc_reps.or(self.mc_reps),
            reference_size: over.reference_size.or(self.reference_size),
            seed: over.seed.or(self.seed),
            s: over.s.or(self.s),
            k: over.k.or(self.k),
            output: over.output.or(self.output),
            format: over.format.or(self.format),
        }
    }
}

/// Fully resolved configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: String,
    /// `None` selects the experiment's standard density set.
    pub density: Option<DensityChoice>,
    pub ns: Vec<usize>,
    pub mc_reps: usize,
    pub reference_size: usize,
    pub seed: u64,
    pub s: f64,
    pub k: f64,
    pub output: PathBuf,
    pub format: Format,
}

impl ExperimentConfig {
    /// Fills unset fields from `defaults` and validates the result.
    pub fn resolve(p: PartialConfig, defaults: &ExperimentConfig) -> Result<Self> {
        let c = Self {
            experiment: p.experiment.unwrap_or_else(|| defaults.experiment.clone()),
            density: p.density.or_else(|| defaults.density.clone()),
            ns: p.ns.unwrap_or_else(|| defaults.ns.clone()),
            mc_reps: p.mc_reps.unwrap_or(defaults.mc_reps),
            reference_size: p.reference_size.unwrap_or(defaults.reference_size),
            seed: p.seed.unwrap_or(defaults.seed),
            s: p.s.unwrap_or(defaults.s),
            k: p.k.unwrap_or(defaults.k),
            output: p.output.unwrap_or_else(|| defaults.output.clone()),
            format: p.format.unwrap_or(defaults.format),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn validate(&self) -> Result<()> {
        if self.ns.is_empty() || self.ns.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config(format!("ns must be nonempty and strictly increasing, got {:?}", self.ns)));
        }
        if self.mc_reps == 0 || self.reference_size == 0 {
            return Err(Error::Config("mc_reps and reference_size must be positive".into()));
        }
        if !(self.s.is_finite() && self.k.is_finite()) {
            return Err(Error::Config("s and k must be finite".into()));
        }
        Ok(())
    }

    pub fn base(experiment: &str) -> Self {
        Self {
            experiment: experiment.to_string(),
            density: None,
            ns: vec![16, 32, 64, 128, 256, 512],
            mc_reps: 200,
            reference_size: 1,
            seed: DEFAULT_SEED,
            s: 1.0,
            k: 4.0,
            output: PathBuf::from("chaoslab-out").join(experiment),
            format: Format::Csv,
        }
    }
}

/// Parses `16,32,64`.
pub fn parse_ns(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',').map(|t| t.trim().parse::<usize>().map_err(|e| format!("`{t}`: {e}"))).collect()
}
