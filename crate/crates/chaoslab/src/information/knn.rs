//! Kozachenko–Leonenko nearest-neighbour estimate of ∫ f log f.

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{digamma, ln_gamma};

use crate::error::{Error, Result};

use super::{InfoMethod, InfoValue};

pub const MIN_SAMPLES: usize = 50;
const FOLDS: usize = 10;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KnnEstimate {
    pub value: InfoValue,
    /// Delete-a-fold jackknife standard error.
    pub stderr: f64,
    pub duplicates_removed: usize,
}

/// Estimate from `samples` laid out as consecutive points of dimension `dim`.
///
/// Exact duplicates carry zero neighbour distance and are dropped first; the number dropped
/// is reported. The value is divided by `dim`.
pub fn entropy_knn(samples: &[f64], dim: usize) -> Result<KnnEstimate> {
    if dim == 0 || !samples.len().is_multiple_of(dim) {
        return Err(Error::DimensionMismatch { expected: dim, got: samples.len() });
    }
    let mut pts: Vec<&[f64]> = samples.chunks(dim).collect();
    if pts.iter().any(|p| p.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidArgument("samples must be finite".into()));
    }
    let total = pts.len();
    pts.sort_by(|a, b| a.iter().zip(*b).map(|(x, y)| x.total_cmp(y)).find(|o| o.is_ne()).unwrap_or(std::cmp::Ordering::Equal));
    pts.dedup();
    let duplicates_removed = total - pts.len();
    if pts.len() < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!(
            "{} distinct samples after removing {duplicates_removed} duplicates; need {MIN_SAMPLES}",
            pts.len()
        )));
    }
    // folds interleave along the sorted order
    let full = kl_estimate(&pts, dim);
    let mut leave_out = Vec::with_capacity(FOLDS);
    for k in 0..FOLDS {
        let sub: Vec<&[f64]> = pts.iter().enumerate().filter(|(i, _)| i % FOLDS != k).map(|(_, p)| *p).collect();
        leave_out.push(kl_estimate(&sub, dim));
    }
    let mean = leave_out.iter().sum::<f64>() / FOLDS as f64;
    let var = leave_out.iter().map(|v| (v - mean).powi(2)).sum::<f64>() * (FOLDS - 1) as f64 / FOLDS as f64;
    Ok(KnnEstimate {
        value: InfoValue::finite(full / dim as f64, InfoMethod::KnnEstimator, dim),
        stderr: var.sqrt() / dim as f64,
        duplicates_removed,
    })
}

/// Unnormalized estimate over distinct points sorted lexicographically.
fn kl_estimate(pts: &[&[f64]], dim: usize) -> f64 {
    let n = pts.len();
    let d = dim as f64;
    let log_ball = 0.5 * d * std::f64::consts::PI.ln() - ln_gamma(0.5 * d + 1.0);
    let sum_log: f64 = (0..n).map(|i| nearest_distance(pts, i).ln()).sum();
    -(digamma(n as f64) - digamma(1.0) + log_ball + d * sum_log / n as f64)
}

/// Euclidean distance to the nearest other point; `pts` sorted by first coordinate.
fn nearest_distance(pts: &[&[f64]], i: usize) -> f64 {
    let p = pts[i];
    let dist2 = |q: &[f64]| p.iter().zip(q).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
    let mut best = f64::INFINITY;
    for q in pts[i + 1..].iter() {
        let dx = q[0] - p[0];
        if dx * dx >= best {
            break;
        }
        best = best.min(dist2(q));
    }
    for q in pts[..i].iter().rev() {
        let dx = p[0] - q[0];
        if dx * dx >= best {
            break;
        }
        best = best.min(dist2(q));
    }
    best.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::rng::seeded;
    use rand_distr::{Distribution, StandardNormal};

    #[test]
    fn gaussian_sample_estimate() {
        let mut rng = seeded(7);
        let xs: Vec<f64> = (0..20_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let e = entropy_knn(&xs, 1).unwrap();
        let exact = -1.418_938_533_204_672_7;
        assert!((e.value.value - exact).abs() < 4.0 * e.stderr + 0.01, "{:?}", e);
        assert_eq!(e.duplicates_removed, 0);
    }

    #[test]
    fn two_dimensional_gaussian() {
        let mut rng = seeded(8);
        let xs: Vec<f64> = (0..2 * 20_000).map(|_| StandardNormal.sample(&mut rng)).collect();
        let e = entropy_knn(&xs, 2).unwrap();
        assert!((e.value.value + 1.418_938_5).abs() < 0.03, "{:?}", e);
    }

    #[test]
    fn repeated_point_is_rejected() {
        let xs = vec![0.5; 1000];
        assert!(entropy_knn(&xs, 1).is_err());
        let mut ys: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        ys.extend_from_slice(&[0.0, 0.0, 0.5]);
        assert_eq!(entropy_knn(&ys, 1).unwrap().duplicates_removed, 3);
    }
}
