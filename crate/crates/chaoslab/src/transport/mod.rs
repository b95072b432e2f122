//! Exact optimal transport for bounded and quadratic costs on E^j and on configurations.

pub mod assignment;
pub mod line;
pub mod simplex;

use serde::{Deserialize, Serialize};

use crate::base::types::{Configuration, DiscreteMeasure};
use crate::error::{Error, Result};

/// Atom-count product above which the dense LP is refused.
pub const MAX_LP_ARCS: usize = 4_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostKind {
    /// (1/j) Σ min(|x_i − y_i|, T)
    BoundedL1,
    /// (1/j) Σ |x_i − y_i|²
    NormalizedL2Sq,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostSpec {
    pub kind: CostKind,
    pub truncation: f64,
}

impl Default for CostSpec {
    fn default() -> Self {
        Self::bounded()
    }
}

impl CostSpec {
    pub fn bounded() -> Self {
        Self { kind: CostKind::BoundedL1, truncation: 1.0 }
    }

    pub fn quadratic() -> Self {
        Self { kind: CostKind::NormalizedL2Sq, truncation: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.truncation > 0.0) {
            return Err(Error::InvalidArgument(format!("truncation must be positive, got {}", self.truncation)));
        }
        Ok(())
    }

    /// Cost between two points of (ℝ^d)^j given as flat vectors.
    pub fn cost(&self, x: &[f64], y: &[f64], base_dim: usize) -> f64 {
        let j = x.len() / base_dim;
        let mut total = 0.0;
        for i in 0..j {
            let r2: f64 = x[i * base_dim..(i + 1) * base_dim]
                .iter()
                .zip(&y[i * base_dim..(i + 1) * base_dim])
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            total += match self.kind {
                CostKind::BoundedL1 => r2.sqrt().min(self.truncation),
                CostKind::NormalizedL2Sq => r2,
            };
        }
        total / j as f64
    }
}

/// Bounded distance d_E(x, y) = min(|x − y|, 1) between two points of ℝ^d.
pub fn d_e(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt().min(1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TransportPlan {
    pub n_sources: usize,
    pub n_targets: usize,
    pub flows: Vec<(usize, usize, f64)>,
    pub cost: f64,
}

/// Normalized coordinatewise cost between two configurations.
pub fn cost_config(x: &Configuration, y: &Configuration, spec: CostSpec) -> Result<f64> {
    x.check_same_shape(y)?;
    spec.validate()?;
    Ok(spec.cost(x.coords(), y.coords(), x.dim()))
}

/// The permutation semi-distance w₁(X, Y) = min_σ (1/N) Σ d_E(x_i, y_σ(i)) and an optimal σ.
pub fn w1_config(x: &Configuration, y: &Configuration) -> Result<(f64, Vec<usize>)> {
    x.check_same_shape(y)?;
    let n = x.n_particles();
    if n == 1 {
        return Ok((d_e(x.particle(0), y.particle(0)), vec![0]));
    }
    let mut cost = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            cost.push(d_e(x.particle(i), y.particle(j)));
        }
    }
    let (total, sigma) = assignment::solve(n, &cost);
    Ok((total / n as f64, sigma))
}

fn check_pair(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<()> {
    if mu.base_dim() != nu.base_dim() || mu.block() != nu.block() {
        return Err(Error::DimensionMismatch { expected: mu.width(), got: nu.width() });
    }
    Ok(())
}

fn cost_matrix(mu: &DiscreteMeasure, nu: &DiscreteMeasure, spec: CostSpec) -> Vec<f64> {
    let mut cost = Vec::with_capacity(mu.len() * nu.len());
    for a in 0..mu.len() {
        for b in 0..nu.len() {
            cost.push(spec.cost(mu.atom(a), nu.atom(b), mu.base_dim()));
        }
    }
    cost
}

fn uniform_weights(m: &DiscreteMeasure) -> bool {
    let w0 = 1.0 / m.len() as f64;
    m.weights().iter().all(|w| (w - w0).abs() <= 1e-12 * w0)
}

/// Exact optimal plan; W₁ for the bounded cost, W₂² for the quadratic one.
///
/// Equal-size uniform measures go to the assignment solver; everything else to the
/// network simplex.
pub fn w1_discrete(mu: &DiscreteMeasure, nu: &DiscreteMeasure, spec: CostSpec) -> Result<TransportPlan> {
    check_pair(mu, nu)?;
    spec.validate()?;
    let (m, n) = (mu.len(), nu.len());
    if m.saturating_mul(n) > MAX_LP_ARCS {
        return Err(Error::TooLarge { what: "transport problem", size: m.saturating_mul(n), limit: MAX_LP_ARCS });
    }
    let cost = cost_matrix(mu, nu, spec);
    if m == n && uniform_weights(mu) && uniform_weights(nu) {
        let (total, sigma) = assignment::solve(n, &cost);
        let w = 1.0 / n as f64;
        return Ok(TransportPlan {
            n_sources: m,
            n_targets: n,
            flows: sigma.iter().enumerate().map(|(i, &j)| (i, j, w)).collect(),
            cost: total * w,
        });
    }
    lp_plan(mu, nu, &cost)
}

/// Same optimum through the general LP only (used as an oracle).
pub fn w1_lp(mu: &DiscreteMeasure, nu: &DiscreteMeasure, spec: CostSpec) -> Result<TransportPlan> {
    check_pair(mu, nu)?;
    spec.validate()?;
    let (m, n) = (mu.len(), nu.len());
    if m.saturating_mul(n) > MAX_LP_ARCS {
        return Err(Error::TooLarge { what: "transport problem", size: m.saturating_mul(n), limit: MAX_LP_ARCS });
    }
    let cost = cost_matrix(mu, nu, spec);
    lp_plan(mu, nu, &cost)
}

fn lp_plan(mu: &DiscreteMeasure, nu: &DiscreteMeasure, cost: &[f64]) -> Result<TransportPlan> {
    let sol = simplex::solve(mu.weights(), nu.weights(), cost)?;
    let n = nu.len();
    let total = sol.flows.iter().map(|&(i, j, f)| f * cost[i * n + j]).sum();
    Ok(TransportPlan { n_sources: mu.len(), n_targets: n, flows: sol.flows, cost: total })
}

/// Exact W₁ for the bounded cost on E = ℝ, in O(n log n).
pub fn w1_line(mu: &DiscreteMeasure, nu: &DiscreteMeasure, truncation: f64) -> Result<f64> {
    check_pair(mu, nu)?;
    if mu.width() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: mu.width() });
    }
    let a: Vec<(f64, f64)> = mu.points().iter().copied().zip(mu.weights().iter().copied()).collect();
    let b: Vec<(f64, f64)> = nu.points().iter().copied().zip(nu.weights().iter().copied()).collect();
    Ok(line::w1_truncated(&a, &b, truncation))
}

/// W₂ with the untruncated Euclidean cost on E = ℝ.
pub fn w2_line(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> Result<f64> {
    check_pair(mu, nu)?;
    if mu.width() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, got: mu.width() });
    }
    let a: Vec<(f64, f64)> = mu.points().iter().copied().zip(mu.weights().iter().copied()).collect();
    let b: Vec<(f64, f64)> = nu.points().iter().copied().zip(nu.weights().iter().copied()).collect();
    Ok(line::w2_squared(&a, &b).sqrt())
}

/// Kantorovich–Rubinstein lower bound ∫φ d(μ−ν) for a witness φ that is 1-Lipschitz for the
/// bounded cost; the Lipschitz property is verified on all pairs of atoms.
pub fn w1_dual_lower_bound<F: Fn(&[f64]) -> f64>(
    mu: &DiscreteMeasure,
    nu: &DiscreteMeasure,
    witness: F,
) -> Result<f64> {
    check_pair(mu, nu)?;
    let spec = CostSpec::bounded();
    let atoms: Vec<&[f64]> = (0..mu.len()).map(|i| mu.atom(i)).chain((0..nu.len()).map(|i| nu.atom(i))).collect();
    let vals: Vec<f64> = atoms.iter().map(|a| witness(a)).collect();
    for i in 0..atoms.len() {
        for j in i + 1..atoms.len() {
            let dist = spec.cost(atoms[i], atoms[j], mu.base_dim());
            let gap = (vals[i] - vals[j]).abs();
            if gap > dist + 1e-12 {
                return Err(Error::LipschitzViolation { gap, dist });
            }
        }
    }
    let a: f64 = mu.weights().iter().zip(&vals[..mu.len()]).map(|(w, v)| w * v).sum();
    let b: f64 = nu.weights().iter().zip(&vals[mu.len()..]).map(|(w, v)| w * v).sum();
    Ok(a - b)
}

/// Both sides of W₁(f^{⊗N}, g^{⊗N}) = W₁(f, g), computed by independent LPs.
pub fn tensorization_check(f: &DiscreteMeasure, g: &DiscreteMeasure, n: usize) -> Result<(f64, f64)> {
    const LIMIT: usize = 100_000;
    let fp = f.tensor_power(n, LIMIT)?;
    let gp = g.tensor_power(n, LIMIT)?;
    let lhs = w1_lp(&fp, &gp, CostSpec::bounded())?.cost;
    let rhs = w1_lp(f, g, CostSpec::bounded())?.cost;
    Ok((lhs, rhs))
}

/// Both sides of 2·W₁(f⊗h, g⊗h) = W₁(f, g).
pub fn shift_tensorization_check(f: &DiscreteMeasure, g: &DiscreteMeasure, h: &DiscreteMeasure) -> Result<(f64, f64)> {
    let fh = f.product(h)?;
    let gh = g.product(h)?;
    let lhs = 2.0 * w1_lp(&fh, &gh, CostSpec::bounded())?.cost;
    let rhs = w1_lp(f, g, CostSpec::bounded())?.cost;
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::rng;
    use rand::Rng;

    fn line(xs: &[f64]) -> Configuration {
        Configuration::from_line(xs.to_vec()).unwrap()
    }

    #[test]
    fn cost_config_examples() {
        assert_eq!(cost_config(&line(&[1.0, 2.0]), &line(&[1.0, 2.0]), CostSpec::bounded()).unwrap(), 0.0);
        let v = cost_config(&line(&[0.0, 0.0]), &line(&[0.5, 3.0]), CostSpec::bounded()).unwrap();
        assert!((v - 0.75).abs() < 1e-15);
        let q = cost_config(&line(&[0.0]), &line(&[2.0]), CostSpec::quadratic()).unwrap();
        assert_eq!(q, 4.0);
        assert!(cost_config(&line(&[0.0]), &line(&[0.0, 1.0]), CostSpec::bounded()).is_err());
    }

    #[test]
    fn w1_config_examples() {
        let (c, s) = w1_config(&line(&[0.0, 1.0]), &line(&[1.0, 0.0])).unwrap();
        assert_eq!(c, 0.0);
        assert_eq!(s, vec![1, 0]);
        let (c, _) = w1_config(&line(&[0.0, 0.0]), &line(&[1.0, 2.0])).unwrap();
        assert!((c - 1.0).abs() < 1e-15);
        let (c, s) = w1_config(&line(&[0.2]), &line(&[0.5])).unwrap();
        assert!((c - 0.3).abs() < 1e-15);
        assert_eq!(s, vec![0]);
    }

    #[test]
    fn discrete_examples() {
        let d0 = DiscreteMeasure::dirac(1, vec![0.0]).unwrap();
        let da = DiscreteMeasure::dirac(1, vec![0.4]).unwrap();
        let db = DiscreteMeasure::dirac(1, vec![3.0]).unwrap();
        assert!((w1_discrete(&d0, &da, CostSpec::bounded()).unwrap().cost - 0.4).abs() < 1e-15);
        assert!((w1_discrete(&d0, &db, CostSpec::bounded()).unwrap().cost - 1.0).abs() < 1e-15);
        assert_eq!(w1_discrete(&da, &da, CostSpec::bounded()).unwrap().cost, 0.0);
    }

    #[test]
    fn dual_witness() {
        let d0 = DiscreteMeasure::dirac(1, vec![0.0]).unwrap();
        let dh = DiscreteMeasure::dirac(1, vec![0.5]).unwrap();
        let v = w1_dual_lower_bound(&dh, &d0, |x| x[0].min(1.0)).unwrap();
        assert!((v - 0.5).abs() < 1e-15);
        assert_eq!(w1_dual_lower_bound(&dh, &d0, |_| 0.0).unwrap(), 0.0);
        assert!(w1_dual_lower_bound(&dh, &d0, |x| 3.0 * x[0]).is_err());
    }

    #[test]
    fn tensorization_examples() {
        let f = DiscreteMeasure::dirac(1, vec![0.0]).unwrap();
        let g = DiscreteMeasure::dirac(1, vec![0.3]).unwrap();
        let (l, r) = tensorization_check(&f, &g, 3).unwrap();
        assert!((l - 0.3).abs() < 1e-12 && (r - 0.3).abs() < 1e-12);
        let (l, r) = tensorization_check(&f, &f, 2).unwrap();
        assert_eq!((l, r), (0.0, 0.0));
    }

    #[test]
    fn tensor_power_blowup_reported() {
        let f = DiscreteMeasure::uniform_line(&[0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]).unwrap();
        assert!(matches!(tensorization_check(&f, &f, 6), Err(Error::TooLarge { .. })));
    }

    #[test]
    fn plan_marginals_and_cost() {
        let mut r = rng::seeded(8);
        for _ in 0..30 {
            let mu = DiscreteMeasure::normalized(1, 1, (0..6).map(|_| r.random::<f64>() * 2.0).collect(), (0..6).map(|_| r.random::<f64>()).collect()).unwrap();
            let nu = DiscreteMeasure::normalized(1, 1, (0..4).map(|_| r.random::<f64>() * 2.0).collect(), (0..4).map(|_| r.random::<f64>()).collect()).unwrap();
            let plan = w1_discrete(&mu, &nu, CostSpec::bounded()).unwrap();
            let mut rows = vec![0.0; mu.len()];
            let mut cols = vec![0.0; nu.len()];
            let mut c = 0.0;
            for &(i, j, f) in &plan.flows {
                assert!(f >= 0.0);
                rows[i] += f;
                cols[j] += f;
                c += f * CostSpec::bounded().cost(mu.atom(i), nu.atom(j), 1);
            }
            for (a, b) in rows.iter().zip(mu.weights()) {
                assert!((a - b).abs() < 1e-10);
            }
            for (a, b) in cols.iter().zip(nu.weights()) {
                assert!((a - b).abs() < 1e-10);
            }
            assert!((c - plan.cost).abs() < 1e-10);
            let fast = w1_line(&mu, &nu, 1.0).unwrap();
            assert!((fast - plan.cost).abs() < 1e-10);
        }
    }
}
