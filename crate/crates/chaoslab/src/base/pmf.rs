use std::collections::BTreeMap;

use rand::Rng;

use crate::base::types::DiscreteMeasure;
use crate::error::{Error, Result};

pub const MAX_TABLE: usize = 1_000_000;

/// Probability table on S^N for a finite alphabet S ⊂ ℝ, invariant under coordinate permutations.
///
/// Entry `idx` stores the mass of the tuple whose base-|S| digits (most significant first)
/// index the alphabet.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetricPmf {
    alphabet: Vec<f64>,
    n: usize,
    probs: Vec<f64>,
}

fn table_size(s: usize, n: usize) -> Result<usize> {
    let size = (s as f64).powi(n as i32);
    if size > MAX_TABLE as f64 {
        return Err(Error::TooLarge { what: "probability table", size: size.min(1e18) as usize, limit: MAX_TABLE });
    }
    Ok(s.pow(n as u32))
}

impl SymmetricPmf {
    pub fn new(alphabet: Vec<f64>, n: usize, probs: Vec<f64>) -> Result<Self> {
        if alphabet.is_empty() || n == 0 {
            return Err(Error::InvalidArgument("alphabet and N must be nonempty".into()));
        }
        let size = table_size(alphabet.len(), n)?;
        if probs.len() != size {
            return Err(Error::DimensionMismatch { expected: size, got: probs.len() });
        }
        if probs.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return Err(Error::InvalidArgument("probabilities must be finite and nonnegative".into()));
        }
        let sum: f64 = probs.iter().sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::WeightSum { sum });
        }
        let pmf = Self { alphabet, n, probs };
        pmf.check_symmetric()?;
        Ok(pmf)
    }

    /// Symmetric table with an independent uniform random mass on each permutation orbit.
    pub fn random<R: Rng + ?Sized>(alphabet: Vec<f64>, n: usize, rng: &mut R) -> Result<Self> {
        let s = alphabet.len();
        let size = table_size(s, n)?;
        let mut orbit_weight: BTreeMap<Vec<usize>, f64> = BTreeMap::new();
        let mut orbit_size: BTreeMap<Vec<usize>, usize> = BTreeMap::new();
        let mut keys = Vec::with_capacity(size);
        for idx in 0..size {
            let mut d = digits(idx, s, n);
            d.sort_unstable();
            *orbit_size.entry(d.clone()).or_insert(0) += 1;
            keys.push(d);
        }
        for k in orbit_size.keys() {
            orbit_weight.insert(k.clone(), rng.random::<f64>());
        }
        let total: f64 = orbit_weight.values().sum();
        let probs = keys
            .iter()
            .map(|k| orbit_weight[k] / (total * orbit_size[k] as f64))
            .collect();
        Self::renormalized(alphabet, n, probs)
    }

    /// The product law p^{⊗N}.
    pub fn product(alphabet: Vec<f64>, p: &[f64], n: usize) -> Result<Self> {
        let s = alphabet.len();
        if p.len() != s {
            return Err(Error::DimensionMismatch { expected: s, got: p.len() });
        }
        let size = table_size(s, n)?;
        let probs = (0..size)
            .map(|idx| digits(idx, s, n).iter().map(|&d| p[d]).product())
            .collect();
        Self::renormalized(alphabet, n, probs)
    }

    fn renormalized(alphabet: Vec<f64>, n: usize, mut probs: Vec<f64>) -> Result<Self> {
        let sum: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= sum);
        let pmf = Self { alphabet, n, probs };
        pmf.check_symmetric()?;
        Ok(pmf)
    }

    /// Verifies invariance under every adjacent transposition, which generate all permutations.
    pub fn check_symmetric(&self) -> Result<()> {
        let s = self.alphabet.len();
        for idx in 0..self.probs.len() {
            let d = digits(idx, s, self.n);
            for i in 0..self.n.saturating_sub(1) {
                if d[i] == d[i + 1] {
                    continue;
                }
                let mut e = d.clone();
                e.swap(i, i + 1);
                let jdx = index(&e, s);
                let (a, b) = (self.probs[idx], self.probs[jdx]);
                if (a - b).abs() > 1e-12 * a.max(b).max(1e-300) && (a - b).abs() > 1e-15 {
                    return Err(Error::Asymmetric(format!(
                        "mass {a} at {d:?} differs from {b} after swapping coordinates {i},{}",
                        i + 1
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn alphabet(&self) -> &[f64] {
        &self.alphabet
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn digits(&self, idx: usize) -> Vec<usize> {
        digits(idx, self.alphabet.len(), self.n)
    }

    /// Table of the marginal on the first `j` coordinates, indexed like an S^j table.
    pub fn marginal_table(&self, j: usize) -> Result<Vec<f64>> {
        if j == 0 || j > self.n {
            return Err(Error::InvalidArgument(format!("marginal order {j} outside 1..={}", self.n)));
        }
        let s = self.alphabet.len();
        let rest = s.pow((self.n - j) as u32);
        let mut out = vec![0.0; s.pow(j as u32)];
        for (idx, p) in self.probs.iter().enumerate() {
            out[idx / rest] += p;
        }
        Ok(out)
    }

    /// The whole law as a measure on E^N.
    pub fn to_measure(&self) -> Result<DiscreteMeasure> {
        self.table_measure(&self.probs, self.n)
    }

    /// The j-marginal as a measure on E^j.
    pub fn marginal_measure(&self, j: usize) -> Result<DiscreteMeasure> {
        let t = self.marginal_table(j)?;
        self.table_measure(&t, j)
    }

    /// Measure on E^j from a table over S^j.
    pub fn table_measure(&self, table: &[f64], j: usize) -> Result<DiscreteMeasure> {
        let s = self.alphabet.len();
        let mut pts = Vec::with_capacity(table.len() * j);
        for idx in 0..table.len() {
            pts.extend(digits(idx, s, j).iter().map(|&d| self.alphabet[d]));
        }
        DiscreteMeasure::normalized(1, j, pts, table.to_vec())
    }

    /// Total mass of each permutation orbit keyed by its sorted digit tuple.
    pub fn orbit_masses(&self) -> BTreeMap<Vec<usize>, f64> {
        let mut out = BTreeMap::new();
        for (idx, p) in self.probs.iter().enumerate() {
            let mut d = self.digits(idx);
            d.sort_unstable();
            *out.entry(d).or_insert(0.0) += p;
        }
        out
    }
}

pub fn digits(mut idx: usize, s: usize, n: usize) -> Vec<usize> {
    let mut d = vec![0; n];
    for k in (0..n).rev() {
        d[k] = idx % s;
        idx /= s;
    }
    d
}

pub fn index(d: &[usize], s: usize) -> usize {
    d.iter().fold(0, |acc, &x| acc * s + x)
}
