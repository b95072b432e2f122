use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Log-log least-squares fit of a convergence curve.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateReport {
    pub ns: Vec<usize>,
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub fitted_slope: f64,
    pub fitted_intercept: f64,
    pub slope_ci: (f64, f64),
}

impl RateReport {
    pub fn slope_in(&self, lo: f64, hi: f64) -> bool {
        self.fitted_slope > lo && self.fitted_slope < hi
    }
}

/// Fits log(value) = intercept + slope·log(N) with a 95% Student-t interval on the slope.
pub fn loglog_fit(ns: &[usize], values: &[f64]) -> Result<RateReport> {
    loglog_fit_with_stderr(ns, values, &vec![0.0; values.len()])
}

pub fn loglog_fit_with_stderr(ns: &[usize], values: &[f64], stderrs: &[f64]) -> Result<RateReport> {
    if ns.len() != values.len() || ns.len() != stderrs.len() {
        return Err(Error::DimensionMismatch { expected: ns.len(), got: values.len() });
    }
    if ns.len() < 4 {
        return Err(Error::InvalidArgument(format!("need at least 4 points, got {}", ns.len())));
    }
    if ns.windows(2).any(|w| w[0] >= w[1]) || ns[0] == 0 {
        return Err(Error::InvalidArgument("ns must be positive and strictly increasing".into()));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(Error::InvalidArgument(format!("cannot take the log of value {v}")));
    }
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = x.iter().zip(&y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let dof = n - 2.0;
    let se = (rss / dof / sxx).sqrt();
    let t = StudentsT::new(0.0, 1.0, dof)
        .map_err(|e| Error::InvalidArgument(e.to_string()))?
        .inverse_cdf(0.975);
    Ok(RateReport {
        ns: ns.to_vec(),
        values: values.to_vec(),
        stderrs: stderrs.to_vec(),
        fitted_slope: slope,
        fitted_intercept: intercept,
        slope_ci: (slope - t * se, slope + t * se),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::rng;
    use rand::Rng;

    #[test]
    fn exact_inverse_law() {
        let ns = [4, 8, 16, 32, 64];
        let v: Vec<f64> = ns.iter().map(|&n| 1.0 / n as f64).collect();
        let r = loglog_fit(&ns, &v).unwrap();
        assert!((r.fitted_slope + 1.0).abs() < 1e-10);
        assert!(r.slope_ci.0 <= r.fitted_slope && r.fitted_slope <= r.slope_ci.1);
    }

    #[test]
    fn exact_root_law_intercept() {
        let ns = [2, 3, 5, 7, 11];
        let v: Vec<f64> = ns.iter().map(|&n| 3.0 / (n as f64).sqrt()).collect();
        let r = loglog_fit(&ns, &v).unwrap();
        assert!((r.fitted_slope + 0.5).abs() < 1e-12);
        assert!((r.fitted_intercept - 3f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn noisy_root_law() {
        let mut g = rng::seeded(5);
        let ns: Vec<usize> = (2..12).map(|k| 1 << k).collect();
        let v: Vec<f64> = ns
            .iter()
            .map(|&n| (n as f64).powf(-0.5) * (1.0 + 0.1 * (2.0 * g.random::<f64>() - 1.0)))
            .collect();
        let r = loglog_fit(&ns, &v).unwrap();
        assert!(r.slope_in(-0.6, -0.4), "{}", r.fitted_slope);
    }

    #[test]
    fn rejects_nonpositive() {
        assert!(loglog_fit(&[1, 2, 3, 4], &[1.0, 0.0, 1.0, 1.0]).is_err());
        assert!(loglog_fit(&[1, 2, 3], &[1.0, 1.0, 1.0]).is_err());
    }
}
