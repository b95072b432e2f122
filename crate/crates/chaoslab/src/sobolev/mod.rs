//! Negative Sobolev distance through the radial kernel
//! Φ_s(z) = ∫ e^{−iz·ξ} ⟨ξ⟩^{−2s} dξ = π^{d/2}/Γ(s) ∫_0^∞ t^{s−1−d/2} e^{−t−|z|²/(4t)} dt.

pub mod oracle;

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::base::quadrature;
use crate::base::types::DiscreteMeasure;
use crate::error::{Error, Result};
use crate::transport::{self, CostSpec};

pub const TABLE_POINTS: usize = 4096;
pub const TABLE_RADIUS: f64 = 64.0;

/// Constant C(1) used for the W₁–H^{-s} comparison on the line.
pub const BRIDGE_CONSTANT_D1: f64 = 15.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HsKernel {
    s: f64,
    dim: usize,
    radii: Vec<f64>,
    values: Vec<f64>,
    phi0: f64,
    lipschitz: Option<f64>,
    tail_valid: bool,
}

fn log_prefactor(s: f64, d: f64) -> f64 {
    0.5 * d * PI.ln() - ln_gamma(s)
}

/// ∫_0^∞ t^{a−1} e^{−t−r²/(4t)} dt for r > 0, integrated in u = log t.
fn bessel_integral(a: f64, r: f64) -> Result<f64> {
    let q = 0.25 * r * r;
    let integrand = |u: f64| (a * u - u.exp() - q * (-u).exp()).exp();
    // stationary point of the exponent: e^{2u} − a e^u − q = 0
    let peak = (0.5 * (a + (a * a + 4.0 * q).sqrt())).max(1e-300).ln();
    let lo = (q / 800.0).max(1e-300).ln().min(peak - 5.0);
    let hi = (2.0 * r + 800.0).ln().max(peak + 5.0);
    let mut breaks = vec![lo, peak - 2.0, peak, peak + 2.0, hi];
    breaks.retain(|b| *b >= lo && *b <= hi);
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();
    quadrature::integrate_pieces(&integrand, &breaks, 0.0, 1e-13)
}

impl HsKernel {
    pub fn new(s: f64, dim: usize) -> Result<Self> {
        let d = dim as f64;
        if dim == 0 || !(s > 0.5 * d) {
            return Err(Error::InvalidArgument(format!("need s > d/2, got s = {s}, d = {dim}")));
        }
        let lp = log_prefactor(s, d);
        let phi0 = (lp + ln_gamma(s - 0.5 * d)).exp();
        let n = TABLE_POINTS;
        let radii: Vec<f64> = (0..n).map(|i| TABLE_RADIUS * (i as f64 / (n - 1) as f64).powi(2)).collect();
        let mut values = Vec::with_capacity(n);
        let mut slopes = Vec::with_capacity(n);
        let lipschitz_finite = s >= 0.5 * (d + 1.0);
        for &r in &radii {
            if r == 0.0 {
                values.push(phi0);
                continue;
            }
            values.push(lp.exp() * bessel_integral(s - 0.5 * d, r)?);
            if lipschitz_finite {
                slopes.push(0.5 * r * lp.exp() * bessel_integral(s - 1.0 - 0.5 * d, r)?);
            }
        }
        let lipschitz = if lipschitz_finite {
            // limit of |Φ'| at the origin: nonzero only in the borderline case
            let at_zero = if (s - 0.5 * (d + 1.0)).abs() < 1e-12 {
                (0.5 * (d + 1.0) * PI.ln() - ln_gamma(0.5 * (d + 1.0))).exp()
            } else {
                0.0
            };
            Some(slopes.iter().cloned().fold(at_zero, f64::max) * (1.0 + 1e-9))
        } else {
            None
        };
        let mut k = Self { s, dim, radii, values, phi0, lipschitz, tail_valid: true };
        // the decay model must reproduce the last table interval before it is trusted
        let (r1, r2) = (k.radii[n - 2], k.radii[n - 1]);
        let predicted = k.values[n - 2] * (r2 / r1).powf(s - 0.5 * (d + 1.0)) * (-(r2 - r1)).exp();
        k.tail_valid = ((predicted - k.values[n - 1]) / k.values[n - 1]).abs() < 1e-3;
        Ok(k)
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn phi0(&self) -> f64 {
        self.phi0
    }

    /// Global Lipschitz constant of Φ_s; `None` when Φ_s has an infinite slope at the origin.
    pub fn lipschitz_bound(&self) -> Option<f64> {
        self.lipschitz
    }

    pub fn table(&self) -> (&[f64], &[f64]) {
        (&self.radii, &self.values)
    }

    /// Φ_s as a function of the radius |z|.
    pub fn phi_radial(&self, r: f64) -> Result<f64> {
        let r = r.abs();
        let n = self.radii.len();
        if r == 0.0 {
            return Ok(self.phi0);
        }
        if r > TABLE_RADIUS {
            if !self.tail_valid {
                return Err(Error::Kernel(format!("|z| = {r} beyond the table and the decay fit is not valid")));
            }
            let rm = TABLE_RADIUS;
            let d = self.dim as f64;
            return Ok(self.values[n - 1] * (r / rm).powf(self.s - 0.5 * (d + 1.0)) * (-(r - rm)).exp());
        }
        let t = (r / TABLE_RADIUS).sqrt() * (n - 1) as f64;
        let i = (t.floor() as usize).clamp(1, n - 3);
        let xs = &self.radii[i - 1..i + 3];
        let ys = &self.values[i - 1..i + 3];
        let mut v = 0.0;
        for a in 0..4 {
            let mut l = 1.0;
            for b in 0..4 {
                if a != b {
                    l *= (r - xs[b]) / (xs[a] - xs[b]);
                }
            }
            v += l * ys[a];
        }
        Ok(v)
    }

    pub fn phi(&self, z: &[f64]) -> Result<f64> {
        if z.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: z.len() });
        }
        self.phi_radial(z.iter().map(|x| x * x).sum::<f64>().sqrt())
    }
}

/// Kernel value Φ_s(z).
pub fn phi_s(z: &[f64], kernel: &HsKernel) -> Result<f64> {
    kernel.phi(z)
}

/// ‖μ − ν‖²_{H^{-s}} = Σ_{a,b} w_a w_b Φ_s(z_a − z_b) with signed weights of μ − ν.
pub fn hs_dist_sq(mu: &DiscreteMeasure, nu: &DiscreteMeasure, kernel: &HsKernel) -> Result<f64> {
    let d = kernel.dim();
    for m in [mu, nu] {
        if m.width() != d {
            return Err(Error::DimensionMismatch { expected: d, got: m.width() });
        }
    }
    let (pts, ws) = signed_atoms(mu, nu);
    let n = ws.len();
    let mut total = 0.0;
    for a in 0..n {
        total += ws[a] * ws[a] * kernel.phi0();
        for b in a + 1..n {
            let r2: f64 = (0..d).map(|k| (pts[a * d + k] - pts[b * d + k]).powi(2)).sum();
            total += 2.0 * ws[a] * ws[b] * kernel.phi_radial(r2.sqrt())?;
        }
    }
    if total < -1e-9 {
        return Err(Error::Kernel(format!("squared distance {total} is negative beyond roundoff")));
    }
    Ok(total.max(0.0))
}

/// Atoms of μ and ν in one list with weights w_μ and −w_ν; coincident atoms are merged.
pub(crate) fn signed_atoms(mu: &DiscreteMeasure, nu: &DiscreteMeasure) -> (Vec<f64>, Vec<f64>) {
    let d = mu.width();
    let mut pts: Vec<f64> = Vec::with_capacity((mu.len() + nu.len()) * d);
    let mut ws: Vec<f64> = Vec::with_capacity(mu.len() + nu.len());
    pts.extend_from_slice(mu.points());
    ws.extend_from_slice(mu.weights());
    'outer: for b in 0..nu.len() {
        let q = nu.atom(b);
        if let Some(a) = (0..mu.len()).find(|&a| mu.atom(a).iter().zip(q).all(|(x, y)| (x - y).abs() <= 1e-12)) {
            ws[a] -= nu.weights()[b];
            continue 'outer;
        }
        pts.extend_from_slice(q);
        ws.push(-nu.weights()[b]);
    }
    (pts, ws)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BridgeReport {
    pub w1: f64,
    pub hs: f64,
    pub moment: f64,
    /// C(d)[1+((s−1)/2)^{(s−1)/2}] ℳ_k^{d/(d+2ks)} ‖μ−ν‖^{2k/(d+2ks)}
    pub bound: f64,
    pub holds: bool,
    /// √(2 max(Lip Φ_s, 2Φ_s(0)) W₁), an upper bound on the H^{-s} distance when Φ_s is Lipschitz.
    pub reverse_bound: Option<f64>,
}

impl BridgeReport {
    pub fn slack(&self) -> f64 {
        self.bound - self.w1
    }
}

/// Measures W₁ and ‖μ−ν‖_{H^{-s}} and evaluates the moment bound relating them.
pub fn hs_w1_bridge_check(mu: &DiscreteMeasure, nu: &DiscreteMeasure, k: f64, kernel: &HsKernel) -> Result<BridgeReport> {
    let s = kernel.s();
    if kernel.dim() != 1 {
        return Err(Error::InvalidArgument("the explicit comparison constant is available for d = 1 only".into()));
    }
    if !(s >= 1.0 && k > 0.0) {
        return Err(Error::InvalidArgument(format!("need s ≥ 1 and k > 0, got s = {s}, k = {k}")));
    }
    let w1 = if mu.width() == 1 {
        transport::w1_line(mu, nu, 1.0)?
    } else {
        transport::w1_discrete(mu, nu, CostSpec::bounded())?.cost
    };
    let hs = hs_dist_sq(mu, nu, kernel)?.sqrt();
    let d = 1.0;
    let moment = mu.bracket_moment(k) + nu.bracket_moment(k);
    let c = BRIDGE_CONSTANT_D1 * (1.0 + (0.5 * (s - 1.0)).powf(0.5 * (s - 1.0)));
    let bound = c * moment.powf(d / (d + 2.0 * k * s)) * hs.powf(2.0 * k / (d + 2.0 * k * s));
    let reverse_bound = kernel
        .lipschitz_bound()
        .map(|l| (2.0 * l.max(2.0 * kernel.phi0()) * w1).sqrt());
    Ok(BridgeReport { w1, hs, moment, bound, holds: w1 <= bound + 1e-12, reverse_bound })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_kernel_for_s_one() {
        let k = HsKernel::new(1.0, 1).unwrap();
        assert!((k.phi0() - PI).abs() < 1e-12);
        for i in 0..=400 {
            let z = 20.0 * i as f64 / 400.0 + 0.013;
            let v = k.phi(&[z]).unwrap();
            assert!((v - PI * (-z).exp()).abs() < 1e-9, "z={z}");
            assert_eq!(v, k.phi(&[-z]).unwrap());
        }
        assert!((k.lipschitz_bound().unwrap() - PI).abs() < 1e-6);
    }

    #[test]
    fn s_two_value_at_origin() {
        let k = HsKernel::new(2.0, 1).unwrap();
        assert!((k.phi0() - PI / 2.0).abs() < 1e-12);
        // Φ₂(r) = (π/2)(1 + r) e^{−r}
        for z in [0.1, 1.0, 5.0, 30.0, 70.0] {
            let exact = 0.5 * PI * (1.0 + z) * (-z).exp();
            assert!((k.phi(&[z]).unwrap() - exact).abs() < 1e-9 * exact.max(1e-3));
        }
    }

    #[test]
    fn rejects_small_s() {
        assert!(HsKernel::new(0.5, 1).is_err());
        assert!(HsKernel::new(0.6, 1).unwrap().lipschitz_bound().is_none());
    }

    #[test]
    fn table_bounded_by_origin_value() {
        let k = HsKernel::new(0.75, 1).unwrap();
        let (_, v) = k.table();
        assert!(v.iter().all(|x| *x <= k.phi0() + 1e-12));
    }

    #[test]
    fn two_dirac_formula() {
        let k = HsKernel::new(1.5, 1).unwrap();
        let d0 = DiscreteMeasure::dirac(1, vec![0.0]).unwrap();
        let dz = DiscreteMeasure::dirac(1, vec![0.7]).unwrap();
        let v = hs_dist_sq(&d0, &dz, &k).unwrap();
        let hand = 2.0 * (k.phi0() - k.phi(&[0.7]).unwrap());
        assert!((v - hand).abs() < 1e-14);
        assert_eq!(hs_dist_sq(&d0, &d0, &k).unwrap(), 0.0);
    }

    #[test]
    fn bridge_on_close_diracs() {
        let k = HsKernel::new(1.0, 1).unwrap();
        let d0 = DiscreteMeasure::dirac(1, vec![0.0]).unwrap();
        let d1 = DiscreteMeasure::dirac(1, vec![0.1]).unwrap();
        let r = hs_w1_bridge_check(&d0, &d1, 2.0, &k).unwrap();
        assert!(r.holds && r.slack() > 0.0);
        assert!((r.w1 - 0.1).abs() < 1e-14);
        let same = hs_w1_bridge_check(&d0, &d0, 2.0, &k).unwrap();
        assert_eq!((same.w1, same.bound), (0.0, 0.0));
    }
}
