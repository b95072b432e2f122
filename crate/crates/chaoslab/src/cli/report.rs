//! Result rows, assertions and fits of one experiment, with CSV and JSON writers.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::base::rate::RateReport;
use crate::error::{Error, Result};

use super::config::ExperimentConfig;

pub const CSV_HEADER: [&str; 6] = ["experiment", "N", "quantity", "value", "stderr", "meta"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub experiment: String,
    #[serde(rename = "N")]
    pub n: usize,
    pub quantity: String,
    pub value: f64,
    pub stderr: f64,
    pub meta: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Fit {
    pub name: String,
    pub slope: f64,
    pub intercept: f64,
    pub slope_ci: (f64, f64),
    /// Accepted slope window, when the fit is asserted.
    pub window: Option<(f64, f64)>,
}

/// Collects the output of one experiment.
#[derive(Debug, Clone, Default)]
pub struct Recorder {
    pub experiment: String,
    pub rows: Vec<Row>,
    pub checks: Vec<Check>,
    pub fits: Vec<Fit>,
}

impl Recorder {
    pub fn new(experiment: &str) -> Self {
        Self { experiment: experiment.to_string(), ..Default::default() }
    }

    pub fn row(&mut self, n: usize, quantity: &str, value: f64, stderr: f64, meta: &str) {
        self.rows.push(Row {
            experiment: self.experiment.clone(),
            n,
            quantity: quantity.to_string(),
            value,
            stderr,
            meta: meta.to_string(),
        });
    }

    pub fn check(&mut self, name: &str, passed: bool, detail: impl Into<String>) {
        self.checks.push(Check { name: name.to_string(), passed, detail: detail.into() });
    }

    pub fn fit(&mut self, name: &str, r: &RateReport, window: Option<(f64, f64)>) {
        self.fits.push(Fit {
            name: name.to_string(),
            slope: r.fitted_slope,
            intercept: r.fitted_intercept,
            slope_ci: r.slope_ci,
            window,
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }
}

pub fn csv_string(rows: &[Row]) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(csv_err)?;
    for r in rows {
        w.write_record([
            r.experiment.clone(),
            r.n.to_string(),
            r.quantity.clone(),
            format!("{:e}", r.value),
            format!("{:e}", r.stderr),
            r.meta.clone(),
        ])
        .map_err(csv_err)?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Config(format!("csv: {e}")))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

fn csv_err(e: csv::Error) -> Error {
    Error::Config(format!("csv: {e}"))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Summary {
    pub experiment: String,
    pub criterion: usize,
    pub anchor: String,
    pub passed: bool,
    pub checks: Vec<Check>,
    pub fits: Vec<Fit>,
    pub rows: Vec<Row>,
    pub wall_clock_seconds: f64,
    pub config: ExperimentConfig,
}

impl Summary {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summaries serialize")
    }
}

/// Writes `<output>.csv` and `<output>.json`.
pub fn write_outputs(output: &Path, csv: &str, summary: &Summary) -> Result<()> {
    if let Some(dir) = output.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    std::fs::write(output.with_extension("csv"), csv)?;
    std::fs::write(output.with_extension("json"), summary.to_json())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_quotes_commas() {
        let mut r = Recorder::new("demo");
        r.row(8, "value", 0.125, 0.0, "a=1,b=2");
        let s = csv_string(&r.rows).unwrap();
        let mut lines = s.lines();
        assert_eq!(lines.next(), Some("experiment,N,quantity,value,stderr,meta"));
        assert_eq!(lines.next(), Some("demo,8,value,1.25e-1,0e0,\"a=1,b=2\""));
    }
}
