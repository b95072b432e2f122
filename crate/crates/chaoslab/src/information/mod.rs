//! Entropy H = ∫ f log f (normalized by the number of variables) and Fisher information.

pub mod grid;
pub mod knn;

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::base::density::Density;
use crate::base::grid::GridDensity;
use crate::base::quadrature::composite_rule;
use crate::base::types::DiscreteMeasure;
use crate::error::{Error, Result};

pub use grid::GridNd;
pub use knn::{entropy_knn, KnnEstimate};

/// Density cutoff below which integrands are treated as zero.
pub const ZERO_DENSITY: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InfoMethod {
    Analytic,
    Quadrature,
    KnnEstimator,
    ScorePlugin,
    Grid,
    Discrete,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InfoValue {
    /// Value in nats divided by `j`; +∞ when the functional diverges.
    pub value: f64,
    pub method: InfoMethod,
    pub j: usize,
}

impl InfoValue {
    pub fn finite(value: f64, method: InfoMethod, j: usize) -> Self {
        Self { value, method, j }
    }

    pub fn infinite(method: InfoMethod, j: usize) -> Self {
        Self { value: f64::INFINITY, method, j }
    }

    pub fn is_infinite(&self) -> bool {
        self.value == f64::INFINITY
    }
}

/// ∫ f log f by adaptive quadrature.
pub fn entropy(f: &Density) -> Result<InfoValue> {
    let v = f.integrate(
        |x| {
            let p = f.pdf(x);
            if p <= 0.0 {
                0.0
            } else {
                p * f.log_pdf(x)
            }
        },
        1e-13,
        1e-13,
    )?;
    Ok(InfoValue::finite(v, InfoMethod::Quadrature, 1))
}

/// Closed form of ∫ f log f where one exists.
pub fn entropy_closed_form(f: &Density) -> Option<f64> {
    match f {
        Density::Gaussian { sd, .. } => Some(-0.5 * (2.0 * std::f64::consts::PI * std::f64::consts::E * sd * sd).ln()),
        Density::Uniform { lo, hi } => Some(-(hi - lo).ln()),
        Density::Mixture { .. } => None,
    }
}

/// Riemann sum h Σ g log g over a grid.
pub fn grid_entropy(g: &GridDensity) -> InfoValue {
    let h = g.spacing();
    let v = h * g.values().iter().filter(|&&p| p > 0.0).map(|p| p * p.ln()).sum::<f64>();
    InfoValue::finite(v, InfoMethod::Grid, 1)
}

/// ∫ f log(f/g); +∞ when f charges a set where g vanishes.
pub fn relative_entropy(f: &Density, g: &Density) -> Result<InfoValue> {
    let (lo, hi) = f.support();
    for i in 0..=2000 {
        let x = lo + (hi - lo) * i as f64 / 2000.0;
        if f.pdf(x) > 0.0 && g.pdf(x) == 0.0 {
            return Ok(InfoValue::infinite(InfoMethod::Quadrature, 1));
        }
    }
    let v = f.integrate(
        |x| {
            let p = f.pdf(x);
            if p <= 0.0 {
                0.0
            } else {
                p * (f.log_pdf(x) - g.log_pdf(x))
            }
        },
        1e-13,
        1e-12,
    )?;
    if !v.is_finite() {
        return Ok(InfoValue::infinite(InfoMethod::Quadrature, 1));
    }
    Ok(InfoValue::finite(v.max(0.0), InfoMethod::Quadrature, 1))
}

/// Σ p log(p/q) on atoms, normalized by the number of variables.
pub fn relative_entropy_discrete(p: &DiscreteMeasure, q: &DiscreteMeasure) -> Result<InfoValue> {
    if p.width() != q.width() {
        return Err(Error::DimensionMismatch { expected: p.width(), got: q.width() });
    }
    let mut total = 0.0;
    for a in 0..p.len() {
        let pa = p.weights()[a];
        if pa == 0.0 {
            continue;
        }
        let found = (0..q.len()).find(|&b| p.atom(a).iter().zip(q.atom(b)).all(|(x, y)| (x - y).abs() <= 1e-12));
        match found {
            Some(b) if q.weights()[b] > 0.0 => total += pa * (pa / q.weights()[b]).ln(),
            _ => return Ok(InfoValue::infinite(InfoMethod::Discrete, p.block())),
        }
    }
    Ok(InfoValue::finite(total.max(0.0) / p.block() as f64, InfoMethod::Discrete, p.block()))
}

/// Unnormalized Shannon form Σ p log p of a discrete measure.
pub fn discrete_entropy(m: &DiscreteMeasure) -> f64 {
    m.weights().iter().filter(|&&w| w > 0.0).map(|w| w * w.ln()).sum()
}

/// ∫ (f')²/f; +∞ for densities that are not weakly differentiable on ℝ.
pub fn fisher(f: &Density) -> Result<InfoValue> {
    if !f.is_smooth() {
        return Ok(InfoValue::infinite(InfoMethod::Analytic, 1));
    }
    let v = f.integrate(
        |x| {
            let p = f.pdf(x);
            if p < ZERO_DENSITY {
                0.0
            } else {
                let s = f.score(x);
                s * s * p
            }
        },
        1e-13,
        1e-13,
    )?;
    Ok(InfoValue::finite(v, InfoMethod::Quadrature, 1))
}

/// ∫ |(log f)' − (log g)'|² f.
pub fn relative_fisher(f: &Density, g: &Density) -> Result<InfoValue> {
    if !f.is_smooth() || !g.is_smooth() {
        return Ok(InfoValue::infinite(InfoMethod::Analytic, 1));
    }
    let v = f.integrate(
        |x| {
            let p = f.pdf(x);
            if p < ZERO_DENSITY {
                0.0
            } else {
                (f.score(x) - g.score(x)).powi(2) * p
            }
        },
        1e-13,
        1e-12,
    )?;
    Ok(InfoValue::finite(v, InfoMethod::Quadrature, 1))
}

/// Grid Fisher information with central differences (one-sided at the grid ends).
///
/// Flags +∞ when the value grows by a factor ≥ 3 over two halvings of the spacing, the
/// signature of a jump (the difference quotient then scales like 1/h).
pub fn grid_fisher(g: &GridDensity) -> InfoValue {
    let h = g.spacing();
    let fine = grid_fisher_raw(g.values(), h, 1);
    let coarse = grid_fisher_raw(g.values(), h, 4);
    if coarse > 0.0 && fine / coarse >= 3.0 {
        return InfoValue::infinite(InfoMethod::Grid, 1);
    }
    InfoValue::finite(fine, InfoMethod::Grid, 1)
}

pub(crate) fn grid_fisher_raw(values: &[f64], h: f64, stride: usize) -> f64 {
    let v: Vec<f64> = values.iter().step_by(stride).copied().collect();
    let h = h * stride as f64;
    let n = v.len();
    let mut total = 0.0;
    for i in 0..n {
        if v[i] < ZERO_DENSITY {
            continue;
        }
        let d = if i == 0 {
            (v[1] - v[0]) / h
        } else if i == n - 1 {
            (v[n - 1] - v[n - 2]) / h
        } else {
            (v[i + 1] - v[i - 1]) / (2.0 * h)
        };
        total += d * d / v[i];
    }
    total * h
}

/// ∫ (−ψ²/4 − ψ') f for a field ψ given with its derivative as `psi(v) = (ψ(v), ψ'(v))`.
pub fn fisher_dual_lower_bound<P: Fn(f64) -> (f64, f64)>(f: &Density, psi: P) -> Result<f64> {
    f.integrate(
        |x| {
            let (p, dp) = psi(x);
            (-0.25 * p * p - dp) * f.pdf(x)
        },
        1e-13,
        1e-12,
    )
}

/// Supremum of the dual functional over ψ = Σ c_k φ_k with Gaussian bumps φ_k.
///
/// The objective −¼cᵀAc − bᵀc with A_kl = ∫φ_kφ_l f and b_k = ∫φ_k' f is maximized at
/// c = −2A⁻¹b with value bᵀA⁻¹b.
pub fn fisher_dual_rich(f: &Density, n_basis: usize) -> Result<f64> {
    let (lo, hi) = f.support();
    let (lo, hi) = (lo.max(-12.0), hi.min(12.0));
    let step = (hi - lo) / (n_basis - 1) as f64;
    let centers: Vec<f64> = (0..n_basis).map(|k| lo + k as f64 * step).collect();
    let width = 1.2 * step;
    let (xs, ws) = composite_rule(lo - 2.0, hi + 2.0, 400, 16);
    let mut a = DMatrix::<f64>::zeros(n_basis, n_basis);
    let mut b = DVector::<f64>::zeros(n_basis);
    let mut phi = vec![0.0; n_basis];
    for (x, w) in xs.iter().zip(&ws) {
        let p = f.pdf(*x);
        if p == 0.0 {
            continue;
        }
        for k in 0..n_basis {
            let z = (x - centers[k]) / width;
            phi[k] = (-0.5 * z * z).exp();
            b[k] += w * p * (-z / width) * phi[k];
        }
        for k in 0..n_basis {
            for l in k..n_basis {
                a[(k, l)] += w * p * phi[k] * phi[l];
            }
        }
    }
    for k in 0..n_basis {
        for l in 0..k {
            a[(k, l)] = a[(l, k)];
        }
        a[(k, k)] += 1e-12;
    }
    let chol = a
        .cholesky()
        .ok_or_else(|| Error::InvalidArgument("dual Gram matrix is not positive definite".into()))?;
    let sol = chol.solve(&b);
    Ok(b.dot(&sol))
}

/// Lower bound log c_k − M_k(f) on ∫ f log f, with c_k the normalizer of e^{−|v|^k} on ℝ.
pub fn moment_entropy_floor(f: &Density, k: f64) -> Result<f64> {
    let ln_ck = -(2.0f64.ln() + statrs::function::gamma::ln_gamma(1.0 + 1.0 / k));
    let mk = f.integrate(|x| x.abs().powf(k) * f.pdf(x), 1e-13, 1e-12)?;
    Ok(ln_ck - mk)
}

/// W₂ between two densities on ℝ via the monotone rearrangement.
pub fn w2_densities(f: &Density, g: &Density) -> Result<f64> {
    if let (Density::Gaussian { mean: m1, sd: s1 }, Density::Gaussian { mean: m2, sd: s2 }) = (f, g) {
        return Ok(((m1 - m2).powi(2) + (s1 - s2).powi(2)).sqrt());
    }
    let med = f.quantile(0.5);
    let w2 = f.integrate(
        |x| {
            let p = f.pdf(x);
            if p == 0.0 {
                return 0.0;
            }
            let t = if x <= med { g.quantile(f.cdf(x)) } else { g.upper_quantile(f.sf(x)) };
            (x - t).powi(2) * p
        },
        1e-12,
        1e-10,
    )?;
    Ok(w2.sqrt())
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HwiReport {
    pub lhs: f64,
    pub rhs: f64,
    pub w2: f64,
    pub fisher: f64,
    pub c_e: f64,
    pub holds: bool,
    /// I(f) = +∞ makes the inequality empty.
    pub vacuous: bool,
}

/// H(f) − H(g) ≤ C_E W₂(f, g) √I(f) on E = ℝ.
pub fn hwi_check(f: &Density, g: &Density, c_e: f64) -> Result<HwiReport> {
    for d in [f, g] {
        if matches!(d, Density::Uniform { .. }) {
            return Err(Error::InvalidArgument("HWI check runs on E = ℝ; interval supports are rejected".into()));
        }
    }
    let lhs = entropy(f)?.value - entropy(g)?.value;
    let fi = fisher(f)?;
    let w2 = w2_densities(f, g)?;
    if fi.is_infinite() {
        return Ok(HwiReport { lhs, rhs: f64::INFINITY, w2, fisher: f64::INFINITY, c_e, holds: true, vacuous: true });
    }
    let rhs = c_e * w2 * fi.value.sqrt();
    Ok(HwiReport { lhs, rhs, w2, fisher: fi.value, c_e, holds: lhs <= rhs + 1e-6, vacuous: false })
}

fn bits(x: &[f64]) -> Vec<u64> {
    x.iter().map(|v| v.to_bits()).collect()
}

/// Checks invariance of a measure on E^n under adjacent swaps of its E-factors.
pub fn check_exchangeable(m: &DiscreteMeasure) -> Result<()> {
    let d = m.base_dim();
    let n = m.block();
    let index: HashMap<Vec<u64>, usize> = (0..m.len()).map(|a| (bits(m.atom(a)), a)).collect();
    for a in 0..m.len() {
        let atom = m.atom(a);
        for i in 0..n.saturating_sub(1) {
            let mut swapped = atom.to_vec();
            for k in 0..d {
                swapped.swap(i * d + k, (i + 1) * d + k);
            }
            let wa = m.weights()[a];
            let wb = index.get(&bits(&swapped)).map(|&b| m.weights()[b]).unwrap_or(0.0);
            if (wa - wb).abs() > 1e-12 {
                return Err(Error::Asymmetric(format!("atom {atom:?} has weight {wa}, its swap has {wb}")));
            }
        }
    }
    Ok(())
}

/// Both sides of H_{i+j}(F) ≥ H_i(F_i) + H_j(F_j) (unnormalized Shannon forms).
pub fn superadditivity_check(f: &DiscreteMeasure, i: usize, j: usize) -> Result<(f64, f64)> {
    if f.block() != i + j || i == 0 || j == 0 {
        return Err(Error::DimensionMismatch { expected: i + j, got: f.block() });
    }
    check_exchangeable(f)?;
    let lhs = discrete_entropy(f);
    let rhs = discrete_entropy(&f.marginal(i)?) + discrete_entropy(&f.marginal(j)?);
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_entropy_and_fisher() {
        let g = Density::standard_gaussian();
        let h = entropy(&g).unwrap();
        assert!((h.value + 1.418_938_533_204_672_7).abs() < 1e-8);
        assert!((fisher(&g).unwrap().value - 1.0).abs() < 1e-8);
        let g4 = Density::gaussian(0.0, 2.0).unwrap();
        assert!((fisher(&g4).unwrap().value - 0.25).abs() < 1e-9);
    }

    #[test]
    fn uniform_entropies() {
        let u = Density::uniform(0.0, 1.0).unwrap();
        assert!(entropy(&u).unwrap().value.abs() < 1e-12);
        let us = Density::uniform_standard();
        assert!((entropy(&us).unwrap().value + (2.0 * 3f64.sqrt()).ln()).abs() < 1e-10);
        assert!(fisher(&u).unwrap().is_infinite());
    }

    #[test]
    fn relative_entropy_of_shift() {
        let g = Density::standard_gaussian();
        let m = 0.8;
        let v = relative_entropy(&g.shifted(m), &g).unwrap().value;
        assert!((v - m * m / 2.0).abs() < 1e-10);
        assert!(relative_entropy(&g, &g).unwrap().value.abs() < 1e-12);
        assert!(relative_entropy(&g, &Density::uniform(-1.0, 1.0).unwrap()).unwrap().is_infinite());
    }

    #[test]
    fn dual_bound_with_cutoff_field() {
        let g = Density::standard_gaussian();
        // χ smooth, ≡ 1 on [−8, 8], vanishing beyond ±10
        let chi = |v: f64| -> (f64, f64) {
            let a = v.abs();
            if a <= 8.0 {
                (1.0, 0.0)
            } else if a >= 10.0 {
                (0.0, 0.0)
            } else {
                let t = (a - 8.0) / 2.0;
                let c = 0.5 * (1.0 + (std::f64::consts::PI * t).cos());
                let dc = -0.25 * std::f64::consts::PI * (std::f64::consts::PI * t).sin() * v.signum();
                (c, dc)
            }
        };
        let v = fisher_dual_lower_bound(&g, |v| {
            let (c, dc) = chi(v);
            (-2.0 * v * c, -2.0 * c - 2.0 * v * dc)
        })
        .unwrap();
        assert!((0.999..=1.0 + 1e-9).contains(&v), "{v}");
        assert_eq!(fisher_dual_lower_bound(&g, |_| (0.0, 0.0)).unwrap(), 0.0);
    }

    #[test]
    fn rich_dual_family_is_tight() {
        for d in [Density::standard_gaussian(), Density::bimodal()] {
            let i = fisher(&d).unwrap().value;
            let r = fisher_dual_rich(&d, 48).unwrap();
            assert!(r <= i + 1e-8 && r >= 0.99 * i, "{r} vs {i}");
        }
    }

    #[test]
    fn grid_fisher_flags_indicator() {
        let n = 1 << 12;
        let l = 2.0;
        let h = 2.0 * l / n as f64;
        let vals: Vec<f64> = (0..n).map(|m| {
            let x = -l + m as f64 * h;
            if (0.0..1.0).contains(&x) { 1.0 } else { 0.0 }
        })
        .collect();
        let g = GridDensity::new(l, vals).unwrap().normalized().unwrap();
        assert!(grid_fisher(&g).is_infinite());
        let gg = GridDensity::sample_density(&Density::standard_gaussian(), 12.0, 1 << 12).unwrap();
        let v = grid_fisher(&gg);
        assert!((v.value - 1.0).abs() < 1e-4);
    }

    #[test]
    fn hwi_examples() {
        let g = Density::standard_gaussian();
        let r = hwi_check(&g, &g, 1.0).unwrap();
        assert!(r.lhs.abs() < 1e-12 && r.rhs.abs() < 1e-12);
        let r = hwi_check(&g, &g.shifted(0.5), 1.0).unwrap();
        assert!(r.lhs.abs() < 1e-10 && (r.rhs - 0.5).abs() < 1e-9 && r.holds);
        assert!(hwi_check(&Density::uniform_standard(), &g, 1.0).is_err());
    }

    #[test]
    fn w2_quantile_path_matches_gaussian_closed_form() {
        let f = Density::mixture(vec![crate::base::density::Component { weight: 1.0, mean: 0.3, sd: 1.4 }]).unwrap();
        let g = Density::gaussian(-0.2, 0.7).unwrap();
        let w = w2_densities(&f, &g).unwrap();
        let exact = (0.25f64 + 0.49).sqrt();
        assert!((w - exact).abs() < 1e-7, "{w} vs {exact}");
    }

    #[test]
    fn superadditivity_examples() {
        // F = f ⊗ f
        let f = DiscreteMeasure::normalized(1, 1, vec![0.0, 1.0], vec![0.3, 0.7]).unwrap();
        let ff = f.product(&f).unwrap();
        let (l, r) = superadditivity_check(&ff, 1, 1).unwrap();
        assert!((l - r).abs() < 1e-14);
        // perfectly correlated pair on {0,1}²: H₂ = −log 2, H₁ + H₁ = −2 log 2
        let c = DiscreteMeasure::new(1, 2, vec![0.0, 0.0, 1.0, 1.0], vec![0.5, 0.5]).unwrap();
        let (l, r) = superadditivity_check(&c, 1, 1).unwrap();
        assert!((l + 2f64.ln()).abs() < 1e-14 && (r + 2.0 * 2f64.ln()).abs() < 1e-14);
        assert!(l > r);
        let asym = DiscreteMeasure::new(1, 2, vec![0.0, 1.0, 1.0, 1.0], vec![0.5, 0.5]).unwrap();
        assert!(matches!(superadditivity_check(&asym, 1, 1), Err(Error::Asymmetric(_))));
    }

    #[test]
    fn moment_floor() {
        for d in [Density::standard_gaussian(), Density::bimodal(), Density::uniform_standard()] {
            let h = entropy(&d).unwrap().value;
            let floor = moment_entropy_floor(&d, 2.0).unwrap();
            assert!(h >= floor, "{h} < {floor}");
        }
        // c₂ = 1/√π
        let g = Density::standard_gaussian();
        let floor = moment_entropy_floor(&g, 2.0).unwrap();
        assert!((floor - (-0.5 * std::f64::consts::PI.ln() - 1.0)).abs() < 1e-10);
    }
}
