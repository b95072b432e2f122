//! Densities on a product grid of ℝ^j, for small j.

use crate::error::{Error, Result};

use super::ZERO_DENSITY;

/// Values on the grid (−L + m h)^j, m = 0..M, stored with the last axis fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridNd {
    dims: usize,
    half_width: f64,
    side: usize,
    values: Vec<f64>,
}

impl GridNd {
    pub fn new(dims: usize, half_width: f64, side: usize, values: Vec<f64>) -> Result<Self> {
        if dims == 0 || dims > 3 {
            return Err(Error::InvalidArgument(format!("product grids support 1 ≤ j ≤ 3, got {dims}")));
        }
        let len = side.checked_pow(dims as u32).unwrap_or(usize::MAX);
        if values.len() != len {
            return Err(Error::DimensionMismatch { expected: len, got: values.len() });
        }
        if side < 3 || !(half_width > 0.0) {
            return Err(Error::InvalidArgument("grid needs at least 3 nodes per axis and positive width".into()));
        }
        Ok(Self { dims, half_width, side, values })
    }

    /// Fills the grid with `f` evaluated at each node.
    pub fn from_fn<F: Fn(&[f64]) -> f64>(dims: usize, half_width: f64, side: usize, f: F) -> Result<Self> {
        let h = 2.0 * half_width / side as f64;
        let len = side.pow(dims as u32);
        let mut x = vec![0.0; dims];
        let values = (0..len)
            .map(|idx| {
                let mut r = idx;
                for a in (0..dims).rev() {
                    x[a] = -half_width + (r % side) as f64 * h;
                    r /= side;
                }
                f(&x)
            })
            .collect();
        Self::new(dims, half_width, side, values)
    }

    pub fn dims(&self) -> usize {
        self.dims
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_width / self.side as f64
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn mass(&self) -> f64 {
        self.values.iter().sum::<f64>() * self.spacing().powi(self.dims as i32)
    }

    pub fn normalized(mut self) -> Result<Self> {
        let m = self.mass();
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::InvalidArgument(format!("grid mass {m} cannot be normalized")));
        }
        self.values.iter_mut().for_each(|v| *v /= m);
        Ok(self)
    }

    /// Marginal on the first `k` axes.
    pub fn marginal(&self, k: usize) -> Result<Self> {
        if k == 0 || k > self.dims {
            return Err(Error::InvalidArgument(format!("cannot take a {k}-marginal of a {}-grid", self.dims)));
        }
        let inner = self.side.pow((self.dims - k) as u32);
        let w = self.spacing().powi((self.dims - k) as i32);
        let values = self.values.chunks(inner).map(|c| w * c.iter().sum::<f64>()).collect();
        Self::new(k, self.half_width, self.side, values)
    }

    /// Unnormalized h^j Σ F log F.
    pub fn entropy_raw(&self) -> f64 {
        self.spacing().powi(self.dims as i32)
            * self.values.iter().filter(|&&v| v > 0.0).map(|v| v * v.ln()).sum::<f64>()
    }

    /// Unnormalized Σ_axes h^j Σ (∂F)²/F by central differences.
    pub fn fisher_raw(&self) -> f64 {
        let h = self.spacing();
        let n = self.side;
        let mut total = 0.0;
        for axis in 0..self.dims {
            let stride = n.pow((self.dims - 1 - axis) as u32);
            for (idx, &v) in self.values.iter().enumerate() {
                if v < ZERO_DENSITY {
                    continue;
                }
                let pos = (idx / stride) % n;
                let d = if pos == 0 {
                    (self.values[idx + stride] - v) / h
                } else if pos == n - 1 {
                    (v - self.values[idx - stride]) / h
                } else {
                    (self.values[idx + stride] - self.values[idx - stride]) / (2.0 * h)
                };
                total += d * d / v;
            }
        }
        total * h.powi(self.dims as i32)
    }

    pub fn entropy(&self) -> f64 {
        self.entropy_raw() / self.dims as f64
    }

    pub fn fisher(&self) -> f64 {
        self.fisher_raw() / self.dims as f64
    }
}

/// Both sides of I₂(F) ≥ I₁(F₁) + I₁(F₁) for a symmetric density on a 2-D grid.
pub fn fisher_superadditivity(f: &GridNd) -> Result<(f64, f64)> {
    if f.dims != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: f.dims });
    }
    let n = f.side;
    for a in 0..n {
        for b in 0..a {
            let (x, y) = (f.values[a * n + b], f.values[b * n + a]);
            if (x - y).abs() > 1e-12 * x.abs().max(1.0) {
                return Err(Error::Asymmetric(format!("grid value at ({a},{b}) differs from its swap")));
            }
        }
    }
    let m = f.marginal(1)?;
    Ok((f.fisher_raw(), 2.0 * m.fisher_raw()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gauss2(rho: f64) -> GridNd {
        let det = 1.0 - rho * rho;
        GridNd::from_fn(2, 8.0, 256, |x| {
            let q = (x[0] * x[0] - 2.0 * rho * x[0] * x[1] + x[1] * x[1]) / det;
            (-0.5 * q).exp() / (2.0 * std::f64::consts::PI * det.sqrt())
        })
        .unwrap()
    }

    #[test]
    fn product_gaussian_values() {
        let g = gauss2(0.0).normalized().unwrap();
        assert!((g.fisher() - 1.0).abs() < 1e-3);
        assert!((g.entropy() + 1.418_938_533).abs() < 1e-6);
        let (l, r) = fisher_superadditivity(&g).unwrap();
        assert!((l - r).abs() < 1e-3);
    }

    #[test]
    fn correlated_gaussian_is_strictly_superadditive() {
        // I₂ = 2/(1−ρ²), marginals are standard
        let g = gauss2(0.5).normalized().unwrap();
        let (l, r) = fisher_superadditivity(&g).unwrap();
        assert!((l - 2.0 / 0.75).abs() < 1e-2 && (r - 2.0).abs() < 1e-2 && l > r);
    }
}
