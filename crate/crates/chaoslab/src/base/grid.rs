use serde::{Deserialize, Serialize};

use crate::base::density::Density;
use crate::error::{Error, Result};

/// Density values on the uniform grid x_m = −L + m·h, m = 0..M, with h = 2L/M.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridDensity {
    half_width: f64,
    values: Vec<f64>,
}

impl GridDensity {
    pub fn new(half_width: f64, values: Vec<f64>) -> Result<Self> {
        if !(half_width > 0.0 && half_width.is_finite()) {
            return Err(Error::InvalidArgument(format!("half width must be positive, got {half_width}")));
        }
        if !values.len().is_power_of_two() || values.len() < 4 {
            return Err(Error::InvalidArgument(format!("grid size {} is not a power of two ≥ 4", values.len())));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("grid values must be finite".into()));
        }
        Ok(Self { half_width, values })
    }

    /// Point samples of `d`, normalized to unit mass.
    pub fn sample_density(d: &Density, half_width: f64, n_points: usize) -> Result<Self> {
        let h = 2.0 * half_width / n_points as f64;
        let values = (0..n_points).map(|m| d.pdf(-half_width + m as f64 * h)).collect();
        Self::new(half_width, values)?.normalized()
    }

    /// Grid version of `d` whose discrete mean is 0 and discrete variance is 1.
    ///
    /// The continuous density is resampled as x ↦ a·f(a·x + b), with (a, b) adjusted until
    /// the lattice moments are exact to the requested tolerance.
    pub fn standardized_from(d: &Density, half_width: f64, n_points: usize) -> Result<Self> {
        let h = 2.0 * half_width / n_points as f64;
        let (mut a, mut b) = (1.0f64, 0.0f64);
        let mut last = None;
        for _ in 0..30 {
            // exact cell masses keep the moments continuous in (a, b), even for jumps
            let values: Vec<f64> = (0..n_points)
                .map(|m| {
                    let x = -half_width + m as f64 * h;
                    cell_mass(d, a * (x - 0.5 * h) + b, a * (x + 0.5 * h) + b) / h
                })
                .collect();
            let g = Self::new(half_width, values)?.normalized()?;
            let (mu, var) = (g.mean(), g.variance());
            let done = mu.abs() <= 1e-12 && (var - 1.0).abs() <= 1e-12;
            last = Some(g);
            if done {
                break;
            }
            // the lattice law approximates (X − b)/a; correct both parameters
            b += a * mu;
            a *= var.sqrt();
        }
        last.ok_or_else(|| Error::InvalidArgument("standardization failed".into()))
    }

    pub fn half_width(&self) -> f64 {
        self.half_width
    }

    pub fn n_points(&self) -> usize {
        self.values.len()
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.values.len() as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn node(&self, m: usize) -> f64 {
        -self.half_width + m as f64 * self.spacing()
    }

    pub fn mass(&self) -> f64 {
        self.spacing() * self.values.iter().sum::<f64>()
    }

    pub fn mean(&self) -> f64 {
        let h = self.spacing();
        h * self.values.iter().enumerate().map(|(m, v)| self.node(m) * v).sum::<f64>() / self.mass()
    }

    pub fn variance(&self) -> f64 {
        let h = self.spacing();
        let mu = self.mean();
        h * self
            .values
            .iter()
            .enumerate()
            .map(|(m, v)| (self.node(m) - mu).powi(2) * v)
            .sum::<f64>()
            / self.mass()
    }

    pub fn normalized(mut self) -> Result<Self> {
        let mass = self.mass();
        if !(mass > 0.0 && mass.is_finite()) {
            return Err(Error::InvalidArgument(format!("grid mass {mass} cannot be normalized")));
        }
        self.values.iter_mut().for_each(|v| *v /= mass);
        Ok(self)
    }

    /// Cubic Lagrange interpolation; zero outside the grid.
    pub fn interpolate(&self, x: f64) -> f64 {
        let h = self.spacing();
        let t = (x + self.half_width) / h;
        let m = self.values.len();
        if t < 0.0 || t > (m - 1) as f64 {
            return 0.0;
        }
        let i = (t.floor() as isize).clamp(1, m as isize - 3) as usize;
        let s = t - i as f64;
        let (p0, p1, p2, p3) = (self.values[i - 1], self.values[i], self.values[i + 1], self.values[i + 2]);
        let l0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
        let l1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
        let l2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
        let l3 = (s + 1.0) * s * (s - 1.0) / 6.0;
        l0 * p0 + l1 * p1 + l2 * p2 + l3 * p3
    }
}

fn cell_mass(d: &Density, lo: f64, hi: f64) -> f64 {
    if lo > d.mean() {
        (d.sf(lo) - d.sf(hi)).max(0.0)
    } else {
        (d.cdf(hi) - d.cdf(lo)).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_power_of_two() {
        assert!(GridDensity::new(1.0, vec![0.0; 6]).is_err());
        assert!(GridDensity::new(1.0, vec![0.0; 8]).is_ok());
    }

    #[test]
    fn standardized_uniform_moments() {
        let g = GridDensity::standardized_from(&Density::uniform_standard(), 12.0, 1 << 12).unwrap();
        assert!((g.mass() - 1.0).abs() < 1e-12);
        assert!(g.mean().abs() < 1e-10);
        assert!((g.variance() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn interpolation_is_exact_on_cubics() {
        let vals: Vec<f64> = (0..64).map(|m| {
            let x = -4.0 + m as f64 * 0.125;
            x * x * x - 2.0 * x
        })
        .collect();
        let g = GridDensity::new(4.0, vals).unwrap();
        for x in [-3.3, 0.01, 2.77] {
            assert!((g.interpolate(x) - (x * x * x - 2.0 * x)).abs() < 1e-10);
        }
    }
}
