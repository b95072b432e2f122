//! Analytic one-dimensional densities.

use std::f64::consts::{PI, SQRT_2};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use statrs::function::erf::{erfc, erfc_inv};

use crate::base::quadrature;
use crate::error::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;

/// Truncation used for quadrature over sub-Gaussian supports, in standard deviations.
pub const TAIL_SDS: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Density {
    Gaussian { mean: f64, sd: f64 },
    Uniform { lo: f64, hi: f64 },
    Mixture { components: Vec<Component> },
}

fn norm_logpdf(x: f64, m: f64, s: f64) -> f64 {
    let z = (x - m) / s;
    -0.5 * z * z - s.ln() - LN_SQRT_2PI
}

fn norm_cdf(x: f64, m: f64, s: f64) -> f64 {
    0.5 * erfc(-(x - m) / (s * SQRT_2))
}

fn norm_sf(x: f64, m: f64, s: f64) -> f64 {
    0.5 * erfc((x - m) / (s * SQRT_2))
}

fn gaussian_raw_moment(k: u32, m: f64, s: f64) -> f64 {
    let (mut a, mut b) = (1.0, m);
    if k == 0 {
        return 1.0;
    }
    for j in 2..=k {
        let c = m * b + (j - 1) as f64 * s * s * a;
        a = b;
        b = c;
    }
    b
}

impl Density {
    pub fn standard_gaussian() -> Self {
        Density::Gaussian { mean: 0.0, sd: 1.0 }
    }

    pub fn gaussian(mean: f64, sd: f64) -> Result<Self> {
        if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
            return Err(Error::InvalidArgument(format!("gaussian needs finite mean and sd > 0, got ({mean}, {sd})")));
        }
        Ok(Density::Gaussian { mean, sd })
    }

    pub fn uniform(lo: f64, hi: f64) -> Result<Self> {
        if !(lo < hi && lo.is_finite() && hi.is_finite()) {
            return Err(Error::InvalidArgument(format!("uniform needs lo < hi, got [{lo}, {hi}]")));
        }
        Ok(Density::Uniform { lo, hi })
    }

    /// Uniform law with mean 0 and variance 1.
    pub fn uniform_standard() -> Self {
        let a = 3f64.sqrt();
        Density::Uniform { lo: -a, hi: a }
    }

    pub fn mixture(components: Vec<Component>) -> Result<Self> {
        if components.is_empty() {
            return Err(Error::InvalidArgument("mixture needs at least one component".into()));
        }
        let total: f64 = components.iter().map(|c| c.weight).sum();
        if components.iter().any(|c| !(c.weight > 0.0 && c.sd > 0.0 && c.mean.is_finite())) || !(total > 0.0) {
            return Err(Error::InvalidArgument("mixture components need positive weights and sds".into()));
        }
        Ok(Density::Mixture {
            components: components
                .into_iter()
                .map(|c| Component { weight: c.weight / total, ..c })
                .collect(),
        })
    }

    /// ½N(−a,s²)+½N(a,s²) rescaled to unit variance.
    pub fn symmetric_bimodal(a: f64, s: f64) -> Result<Self> {
        let scale = (a * a + s * s).sqrt();
        Self::mixture(vec![
            Component { weight: 0.5, mean: -a / scale, sd: s / scale },
            Component { weight: 0.5, mean: a / scale, sd: s / scale },
        ])
    }

    /// The reference bimodal density: a = 1, s = 0.5 before rescaling.
    pub fn bimodal() -> Self {
        Self::symmetric_bimodal(1.0, 0.5).expect("valid constants")
    }

    /// Centered, unit-variance two-bump density with mass `p` on the right bump and bump width `width`.
    pub fn two_point_like(p: f64, width: f64) -> Result<Self> {
        if !(p > 0.0 && p < 1.0 && width > 0.0 && width < 1.0) {
            return Err(Error::InvalidArgument("two_point_like needs 0<p<1 and 0<width<1".into()));
        }
        let q = 1.0 - p;
        let c = (1.0 - width * width).sqrt();
        Self::mixture(vec![
            Component { weight: p, mean: (q / p).sqrt() * c, sd: width },
            Component { weight: q, mean: -(p / q).sqrt() * c, sd: width },
        ])
    }

    /// Translate by `m`.
    pub fn shifted(&self, m: f64) -> Self {
        match self {
            Density::Gaussian { mean, sd } => Density::Gaussian { mean: mean + m, sd: *sd },
            Density::Uniform { lo, hi } => Density::Uniform { lo: lo + m, hi: hi + m },
            Density::Mixture { components } => Density::Mixture {
                components: components.iter().map(|c| Component { mean: c.mean + m, ..*c }).collect(),
            },
        }
    }

    /// Stable identifier used in cache keys and reports.
    pub fn id(&self) -> String {
        match self {
            Density::Gaussian { mean, sd } => format!("gaussian({mean:.17e},{sd:.17e})"),
            Density::Uniform { lo, hi } => format!("uniform({lo:.17e},{hi:.17e})"),
            Density::Mixture { components } => {
                let parts: Vec<String> = components
                    .iter()
                    .map(|c| format!("{:.17e}:{:.17e}:{:.17e}", c.weight, c.mean, c.sd))
                    .collect();
                format!("mixture({})", parts.join(";"))
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        match self {
            Density::Uniform { lo, hi } => {
                if x >= *lo && x <= *hi {
                    1.0 / (hi - lo)
                } else {
                    0.0
                }
            }
            _ => self.log_pdf(x).exp(),
        }
    }

    pub fn log_pdf(&self, x: f64) -> f64 {
        match self {
            Density::Gaussian { mean, sd } => norm_logpdf(x, *mean, *sd),
            Density::Uniform { lo, hi } => {
                if x >= *lo && x <= *hi {
                    -(hi - lo).ln()
                } else {
                    f64::NEG_INFINITY
                }
            }
            Density::Mixture { components } => {
                let mut mx = f64::NEG_INFINITY;
                for c in components {
                    mx = mx.max(c.weight.ln() + norm_logpdf(x, c.mean, c.sd));
                }
                let s: f64 = components
                    .iter()
                    .map(|c| (c.weight.ln() + norm_logpdf(x, c.mean, c.sd) - mx).exp())
                    .sum();
                mx + s.ln()
            }
        }
    }

    /// d/dx log pdf.
    pub fn score(&self, x: f64) -> f64 {
        match self {
            Density::Gaussian { mean, sd } => -(x - mean) / (sd * sd),
            Density::Uniform { .. } => 0.0,
            Density::Mixture { components } => {
                let logs: Vec<f64> = components
                    .iter()
                    .map(|c| c.weight.ln() + norm_logpdf(x, c.mean, c.sd))
                    .collect();
                let mx = logs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
                let (mut num, mut den) = (0.0, 0.0);
                for (c, l) in components.iter().zip(&logs) {
                    let w = (l - mx).exp();
                    num += w * (-(x - c.mean) / (c.sd * c.sd));
                    den += w;
                }
                num / den
            }
        }
    }

    pub fn cdf(&self, x: f64) -> f64 {
        match self {
            Density::Gaussian { mean, sd } => norm_cdf(x, *mean, *sd),
            Density::Uniform { lo, hi } => ((x - lo) / (hi - lo)).clamp(0.0, 1.0),
            Density::Mixture { components } => components.iter().map(|c| c.weight * norm_cdf(x, c.mean, c.sd)).sum(),
        }
    }

    /// Survival function 1 − cdf, accurate in the upper tail.
    pub fn sf(&self, x: f64) -> f64 {
        match self {
            Density::Gaussian { mean, sd } => norm_sf(x, *mean, *sd),
            Density::Uniform { lo, hi } => ((hi - x) / (hi - lo)).clamp(0.0, 1.0),
            Density::Mixture { components } => components.iter().map(|c| c.weight * norm_sf(x, c.mean, c.sd)).sum(),
        }
    }

    /// Lower quantile: x with cdf(x) = p.
    pub fn quantile(&self, p: f64) -> f64 {
        match self {
            Density::Gaussian { mean, sd } => mean - sd * SQRT_2 * erfc_inv(2.0 * p),
            Density::Uniform { lo, hi } => lo + p.clamp(0.0, 1.0) * (hi - lo),
            Density::Mixture { .. } => self.bisect(|x| self.cdf(x) - p),
        }
    }

    /// Upper quantile: x with sf(x) = q.
    pub fn upper_quantile(&self, q: f64) -> f64 {
        match self {
            Density::Gaussian { mean, sd } => mean + sd * SQRT_2 * erfc_inv(2.0 * q),
            Density::Uniform { lo, hi } => hi - q.clamp(0.0, 1.0) * (hi - lo),
            Density::Mixture { .. } => self.bisect(|x| q - self.sf(x)),
        }
    }

    fn bisect<F: Fn(f64) -> f64>(&self, g: F) -> f64 {
        let (mut a, mut b) = self.bracket(40.0);
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            if g(m) < 0.0 {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    fn bracket(&self, sds: f64) -> (f64, f64) {
        match self {
            Density::Gaussian { mean, sd } => (mean - sds * sd, mean + sds * sd),
            Density::Uniform { lo, hi } => (*lo, *hi),
            Density::Mixture { components } => {
                let lo = components.iter().map(|c| c.mean - sds * c.sd).fold(f64::INFINITY, f64::min);
                let hi = components.iter().map(|c| c.mean + sds * c.sd).fold(f64::NEG_INFINITY, f64::max);
                (lo, hi)
            }
        }
    }

    /// Effective support; sub-Gaussian tails are truncated at ±12 component sds.
    pub fn support(&self) -> (f64, f64) {
        self.bracket(TAIL_SDS)
    }

    /// Sorted quadrature breakpoints covering the support.
    pub fn breakpoints(&self) -> Vec<f64> {
        let (lo, hi) = self.support();
        let mut b = vec![lo, hi];
        if let Density::Mixture { components } = self {
            for c in components {
                for k in [-3.0, 0.0, 3.0] {
                    let x = c.mean + k * c.sd;
                    if x > lo && x < hi {
                        b.push(x);
                    }
                }
            }
        } else if let Density::Gaussian { mean, sd } = self {
            b.extend([mean - 3.0 * sd, *mean, mean + 3.0 * sd]);
        }
        b.sort_by(|a, b| a.total_cmp(b));
        b.dedup_by(|a, b| (*a - *b).abs() < 1e-12);
        b
    }

    /// Whether the density is weakly differentiable on ℝ.
    pub fn is_smooth(&self) -> bool {
        !matches!(self, Density::Uniform { .. })
    }

    /// Raw moment E[v^k] in closed form.
    pub fn raw_moment(&self, k: u32) -> f64 {
        match self {
            Density::Gaussian { mean, sd } => gaussian_raw_moment(k, *mean, *sd),
            Density::Uniform { lo, hi } => {
                let kp = (k + 1) as i32;
                (hi.powi(kp) - lo.powi(kp)) / ((k + 1) as f64 * (hi - lo))
            }
            Density::Mixture { components } => components
                .iter()
                .map(|c| c.weight * gaussian_raw_moment(k, c.mean, c.sd))
                .sum(),
        }
    }

    pub fn mean(&self) -> f64 {
        self.raw_moment(1)
    }

    pub fn variance(&self) -> f64 {
        let m = self.mean();
        self.raw_moment(2) - m * m
    }

    /// ∫⟨v⟩^k f with ⟨v⟩ = √(1+v²), by quadrature.
    pub fn bracket_moment(&self, k: f64) -> Result<f64> {
        self.integrate(|v| (1.0 + v * v).powf(0.5 * k) * self.pdf(v), 1e-12, 1e-12)
    }

    /// ∫ φ f over the effective support.
    pub fn integrate<F: Fn(f64) -> f64>(&self, phi: F, abs_tol: f64, rel_tol: f64) -> Result<f64> {
        quadrature::integrate_pieces(&phi, &self.breakpoints(), abs_tol, rel_tol)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Density::Gaussian { mean, sd } => mean + sd * rng.sample::<f64, _>(StandardNormal),
            Density::Uniform { lo, hi } => lo + (hi - lo) * rng.random::<f64>(),
            Density::Mixture { components } => {
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut pick = components.len() - 1;
                for (i, c) in components.iter().enumerate() {
                    acc += c.weight;
                    if u < acc {
                        pick = i;
                        break;
                    }
                }
                let c = components[pick];
                c.mean + c.sd * rng.sample::<f64, _>(StandardNormal)
            }
        }
    }

    pub fn sample_n<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.sample(rng)).collect()
    }
}

/// Standard Gaussian density.
pub fn gamma_pdf(v: f64) -> f64 {
    (-0.5 * v * v).exp() / (2.0 * PI).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::rng;

    fn shipped() -> Vec<Density> {
        vec![
            Density::standard_gaussian(),
            Density::uniform_standard(),
            Density::bimodal(),
            Density::two_point_like(0.25, 0.5).unwrap(),
        ]
    }

    #[test]
    fn shipped_densities_are_normalized() {
        for d in shipped() {
            let (lo, hi) = d.support();
            let mass = quadrature::integrate_pieces(&|x| d.pdf(x), &d.breakpoints(), 1e-12, 0.0).unwrap();
            assert!((mass - 1.0).abs() < 1e-8, "{d:?}: {mass}");
            assert!(lo < hi);
        }
    }

    #[test]
    fn shipped_densities_are_standardized() {
        for d in shipped() {
            assert!(d.mean().abs() < 1e-12, "{d:?}");
            assert!((d.variance() - 1.0).abs() < 1e-12, "{d:?}");
            let m2 = d.integrate(|v| v * v * d.pdf(v), 1e-12, 0.0).unwrap();
            assert!((m2 - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn score_matches_finite_difference() {
        for d in shipped() {
            let (lo, hi) = d.support();
            for i in 1..200 {
                let x = lo + (hi - lo) * i as f64 / 200.0;
                if d.pdf(x) <= 1e-10 {
                    continue;
                }
                let h = 1e-5;
                if let Density::Uniform { lo, hi } = d {
                    if (x - lo).abs() < 2.0 * h || (x - hi).abs() < 2.0 * h {
                        continue;
                    }
                }
                let fd = (d.log_pdf(x + h) - d.log_pdf(x - h)) / (2.0 * h);
                let s = d.score(x);
                assert!((fd - s).abs() <= 1e-5 * s.abs().max(1.0), "{d:?} at {x}: {fd} vs {s}");
            }
        }
    }

    #[test]
    fn quantiles_invert_cdf() {
        for d in shipped() {
            for p in [1e-9, 0.01, 0.3, 0.5, 0.77, 0.999] {
                let x = d.quantile(p);
                assert!((d.cdf(x) - p).abs() < 1e-10 * p.max(1e-3) * 1e3, "{d:?} p={p}");
                let y = d.upper_quantile(p);
                assert!((d.sf(y) - p).abs() < 1e-10 * p.max(1e-3) * 1e3);
            }
        }
    }

    #[test]
    fn raw_moments_match_quadrature() {
        let d = Density::bimodal();
        for k in 0..7 {
            let q = d.integrate(|v| v.powi(k as i32) * d.pdf(v), 1e-13, 0.0).unwrap();
            assert!((q - d.raw_moment(k)).abs() < 1e-9, "k={k}");
        }
        let u = Density::uniform_standard();
        assert!((u.raw_moment(4) - 9.0 / 5.0).abs() < 1e-12);
    }

    #[test]
    fn sampler_moments() {
        let d = Density::bimodal();
        let mut r = rng::seeded(11);
        let xs = d.sample_n(200_000, &mut r);
        let m2: f64 = xs.iter().map(|x| x * x).sum::<f64>() / xs.len() as f64;
        assert!((m2 - 1.0).abs() < 0.02);
    }
}
