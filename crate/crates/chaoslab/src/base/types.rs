use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Coordinate tolerance used when merging atoms.
pub const MERGE_TOL: f64 = 1e-12;

/// One N-particle state: N points of ℝ^d stored contiguously.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    dim: usize,
    coords: Vec<f64>,
}

impl Configuration {
    pub fn new(dim: usize, coords: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidArgument("dimension must be positive".into()));
        }
        if coords.is_empty() || !coords.len().is_multiple_of(dim) {
            return Err(Error::DimensionMismatch {
                expected: dim * (coords.len() / dim).max(1),
                got: coords.len(),
            });
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument("configuration has non-finite coordinates".into()));
        }
        Ok(Self { dim, coords })
    }

    /// One-dimensional configuration.
    pub fn from_line(coords: Vec<f64>) -> Result<Self> {
        Self::new(1, coords)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n_particles(&self) -> usize {
        self.coords.len() / self.dim
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn particle(&self, i: usize) -> &[f64] {
        &self.coords[i * self.dim..(i + 1) * self.dim]
    }

    pub(crate) fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: other.dim });
        }
        if self.coords.len() != other.coords.len() {
            return Err(Error::DimensionMismatch {
                expected: self.n_particles(),
                got: other.n_particles(),
            });
        }
        Ok(())
    }
}

/// Finitely many weighted atoms in (ℝ^d)^j.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteMeasure {
    base_dim: usize,
    block: usize,
    points: Vec<f64>,
    weights: Vec<f64>,
}

impl DiscreteMeasure {
    /// Builds a measure on (ℝ^base_dim)^block; atoms within [`MERGE_TOL`] are merged.
    pub fn new(base_dim: usize, block: usize, points: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        let width = base_dim * block;
        if width == 0 {
            return Err(Error::InvalidArgument("atom dimension must be positive".into()));
        }
        if points.len() != weights.len() * width {
            return Err(Error::DimensionMismatch { expected: weights.len() * width, got: points.len() });
        }
        if weights.is_empty() {
            return Err(Error::InvalidArgument("measure needs at least one atom".into()));
        }
        if weights.iter().any(|w| !(w.is_finite() && *w >= 0.0)) {
            return Err(Error::InvalidArgument("weights must be finite and nonnegative".into()));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::InvalidArgument("atom points must be finite".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::WeightSum { sum });
        }
        Ok(Self::merged(base_dim, block, points, weights))
    }

    /// Like [`DiscreteMeasure::new`] but rescales the weights to unit mass first.
    pub fn normalized(base_dim: usize, block: usize, points: Vec<f64>, mut weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum > 0.0 && sum.is_finite()) {
            return Err(Error::WeightSum { sum });
        }
        weights.iter_mut().for_each(|w| *w /= sum);
        let s2: f64 = weights.iter().sum();
        if let Some(w) = weights.iter_mut().max_by(|a, b| a.total_cmp(b)) {
            *w += 1.0 - s2;
        }
        Self::new(base_dim, block, points, weights)
    }

    /// Uniform measure on the given atoms of ℝ^1.
    pub fn uniform_line(points: &[f64]) -> Result<Self> {
        let n = points.len();
        Self::normalized(1, 1, points.to_vec(), vec![1.0; n])
    }

    /// Point mass in (ℝ^d)^j.
    pub fn dirac(base_dim: usize, point: Vec<f64>) -> Result<Self> {
        let block = point.len() / base_dim.max(1);
        Self::new(base_dim, block, point, vec![1.0])
    }

    fn merged(base_dim: usize, block: usize, points: Vec<f64>, weights: Vec<f64>) -> Self {
        let width = base_dim * block;
        let n = weights.len();
        let mut order: Vec<usize> = (0..n).collect();
        let key = |i: usize| &points[i * width..(i + 1) * width];
        order.sort_by(|&a, &b| {
            key(a)
                .iter()
                .zip(key(b))
                .map(|(x, y)| x.total_cmp(y))
                .find(|o| o.is_ne())
                .unwrap_or(std::cmp::Ordering::Equal)
        });
        let mut out_p: Vec<f64> = Vec::with_capacity(points.len());
        let mut out_w: Vec<f64> = Vec::with_capacity(n);
        for &i in &order {
            if weights[i] == 0.0 {
                continue;
            }
            let p = key(i);
            let m = out_w.len();
            if m > 0 {
                let last = &out_p[(m - 1) * width..m * width];
                if last.iter().zip(p).all(|(a, b)| (a - b).abs() <= MERGE_TOL) {
                    out_w[m - 1] += weights[i];
                    continue;
                }
            }
            out_p.extend_from_slice(p);
            out_w.push(weights[i]);
        }
        if out_w.is_empty() {
            out_p.extend_from_slice(key(0));
            out_w.push(1.0);
        }
        Self { base_dim, block, points: out_p, weights: out_w }
    }

    pub fn base_dim(&self) -> usize {
        self.base_dim
    }

    /// Number of E-factors j.
    pub fn block(&self) -> usize {
        self.block
    }

    /// Length of one atom vector, j·d.
    pub fn width(&self) -> usize {
        self.base_dim * self.block
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn atom(&self, i: usize) -> &[f64] {
        let w = self.width();
        &self.points[i * w..(i + 1) * w]
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Product measure self ⊗ other on E^{j+j'}.
    pub fn product(&self, other: &Self) -> Result<Self> {
        if self.base_dim != other.base_dim {
            return Err(Error::DimensionMismatch { expected: self.base_dim, got: other.base_dim });
        }
        let mut pts = Vec::with_capacity(self.len() * other.len() * (self.width() + other.width()));
        let mut ws = Vec::with_capacity(self.len() * other.len());
        for a in 0..self.len() {
            for b in 0..other.len() {
                pts.extend_from_slice(self.atom(a));
                pts.extend_from_slice(other.atom(b));
                ws.push(self.weights[a] * other.weights[b]);
            }
        }
        Self::normalized(self.base_dim, self.block + other.block, pts, ws)
    }

    /// N-fold tensor power, refusing more than `limit` atoms.
    pub fn tensor_power(&self, n: usize, limit: usize) -> Result<Self> {
        let size = (self.len() as f64).powi(n as i32);
        if size > limit as f64 {
            return Err(Error::TooLarge { what: "tensor power", size: size.min(usize::MAX as f64) as usize, limit });
        }
        let mut acc = self.clone();
        for _ in 1..n {
            acc = acc.product(self)?;
        }
        Ok(acc)
    }

    /// Marginal on the first `j` factors.
    pub fn marginal(&self, j: usize) -> Result<Self> {
        if j == 0 || j > self.block {
            return Err(Error::InvalidArgument(format!("marginal order {j} outside 1..={}", self.block)));
        }
        let keep = j * self.base_dim;
        let mut pts = Vec::with_capacity(self.len() * keep);
        for i in 0..self.len() {
            pts.extend_from_slice(&self.atom(i)[..keep]);
        }
        Self::normalized(self.base_dim, j, pts, self.weights.clone())
    }

    /// Moment ∫⟨x⟩^k with ⟨x⟩ = (1+|x|²)^{1/2}, |x| the Euclidean norm of the whole atom.
    pub fn bracket_moment(&self, k: f64) -> f64 {
        (0..self.len())
            .map(|i| {
                let r2: f64 = self.atom(i).iter().map(|x| x * x).sum();
                self.weights[i] * (1.0 + r2).powf(0.5 * k)
            })
            .sum()
    }
}

/// Empirical measure of a configuration grouped into consecutive blocks of `group` particles.
///
/// `group = 1` yields μ^N_X. For `group = j > 1` the atoms are the ⌊N/j⌋ disjoint blocks
/// (x_1..x_j), (x_{j+1}..x_{2j}), … each with equal weight.
pub fn make_empirical(x: &Configuration, group: usize) -> Result<DiscreteMeasure> {
    let n = x.n_particles();
    if group == 0 || group > n {
        return Err(Error::DimensionMismatch { expected: n, got: group });
    }
    let blocks = n / group;
    let width = group * x.dim();
    let pts = x.coords()[..blocks * width].to_vec();
    let m = blocks;
    let w = 1.0 / m as f64;
    let mut weights = vec![w; m];
    // make the sum exact to the last bit before merging
    let s: f64 = weights.iter().sum();
    weights[0] += 1.0 - s;
    DiscreteMeasure::new(x.dim(), group, pts, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empirical_three_points() {
        let x = Configuration::from_line(vec![0.0, 1.0, 2.0]).unwrap();
        let mu = make_empirical(&x, 1).unwrap();
        assert_eq!(mu.len(), 3);
        for w in mu.weights() {
            assert!((w - 1.0 / 3.0).abs() < 1e-15);
        }
    }

    #[test]
    fn empirical_single_particle_is_dirac() {
        let x = Configuration::from_line(vec![5.0]).unwrap();
        let mu = make_empirical(&x, 1).unwrap();
        assert_eq!(mu.len(), 1);
        assert_eq!(mu.atom(0), &[5.0]);
        assert_eq!(mu.weights(), &[1.0]);
    }

    #[test]
    fn empirical_merges_equal_atoms() {
        let x = Configuration::from_line(vec![0.0, 0.0, 1.0, 1.0]).unwrap();
        let mu = make_empirical(&x, 1).unwrap();
        assert_eq!(mu.len(), 2);
        // direct count: two of four coordinates sit at each location
        let count0 = x.coords().iter().filter(|&&c| c == 0.0).count() as f64 / 4.0;
        assert!((mu.weights()[0] - count0).abs() < 1e-15);
        assert!((mu.weights()[1] - 0.5).abs() < 1e-15);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        assert!(matches!(Configuration::new(2, vec![1.0, 2.0, 3.0]), Err(Error::DimensionMismatch { .. })));
        let x = Configuration::from_line(vec![0.0, 1.0]).unwrap();
        assert!(make_empirical(&x, 3).is_err());
    }

    #[test]
    fn block_grouping() {
        let x = Configuration::from_line(vec![0.0, 1.0, 2.0, 3.0, 4.0]).unwrap();
        let mu = make_empirical(&x, 2).unwrap();
        assert_eq!(mu.block(), 2);
        assert_eq!(mu.len(), 2);
        assert_eq!(mu.atom(1), &[2.0, 3.0]);
    }

    #[test]
    fn weight_sum_is_checked() {
        assert!(matches!(
            DiscreteMeasure::new(1, 1, vec![0.0, 1.0], vec![0.5, 0.6]),
            Err(Error::WeightSum { .. })
        ));
    }

    #[test]
    fn marginal_of_product() {
        let f = DiscreteMeasure::normalized(1, 1, vec![0.0, 1.0], vec![0.3, 0.7]).unwrap();
        let g = DiscreteMeasure::normalized(1, 1, vec![5.0, 6.0, 7.0], vec![1.0, 1.0, 2.0]).unwrap();
        let fg = f.product(&g).unwrap();
        assert_eq!(fg.len(), 6);
        let m = fg.marginal(1).unwrap();
        assert_eq!(m.len(), 2);
        assert!((m.weights()[0] - 0.3).abs() < 1e-15);
    }
}
