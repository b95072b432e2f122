//! The Kac sphere KS_N = {V ∈ ℝ^N : |V|² = N}, its uniform law σ^N and conditioned products F^N.

pub mod cache;
pub mod table;

use std::f64::consts::PI;
use std::sync::atomic::{AtomicUsize, Ordering};

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::base::density::Density;
use crate::base::quadrature;
use crate::base::rng::stream;
use crate::error::{Error, Result};
use crate::information::relative_entropy;

pub use table::PartitionTable;

const SPHERE_TOL: f64 = 1e-9;
const SAMPLER_GRID: usize = 2049;
const DRAWS_PER_STREAM: usize = 256;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SphereConfig {
    coords: Vec<f64>,
}

impl SphereConfig {
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        let n = coords.len();
        if n < 5 {
            return Err(Error::InvalidArgument(format!("Kac sphere needs N ≥ 5, got {n}")));
        }
        let r2: f64 = coords.iter().map(|v| v * v).sum();
        if (r2 - n as f64).abs() > SPHERE_TOL * n as f64 {
            return Err(Error::InvalidArgument(format!("|V|² = {r2} is off the sphere of radius √{n}")));
        }
        Ok(Self { coords })
    }

    pub fn n(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn into_coords(self) -> Vec<f64> {
        self.coords
    }
}

fn check_n(n: usize) -> Result<()> {
    if n < 5 {
        return Err(Error::InvalidArgument(format!("Kac sphere needs N ≥ 5, got {n}")));
    }
    Ok(())
}

/// Draws from σ^N by projecting standard Gaussian vectors radially onto KS_N.
pub fn sample_sigma<R: Rng + ?Sized>(n: usize, count: usize, rng: &mut R) -> Result<Vec<SphereConfig>> {
    check_n(n)?;
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
        out.push(SphereConfig { coords: project(&g) });
    }
    Ok(out)
}

/// P(V) = √N V/|V|.
pub fn project(v: &[f64]) -> Vec<f64> {
    let scale = (v.len() as f64).sqrt() / v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| x * scale).collect()
}

/// log of the ℓ-marginal density of σ^N at V.
pub fn sigma_marginal_log_pdf(n: usize, ell: usize, v: &[f64]) -> Result<f64> {
    if ell == 0 || ell >= n {
        return Err(Error::InvalidArgument(format!("marginal order ℓ = {ell} must satisfy 1 ≤ ℓ ≤ N−1 = {}", n - 1)));
    }
    if v.len() != ell {
        return Err(Error::DimensionMismatch { expected: ell, got: v.len() });
    }
    let (nf, lf) = (n as f64, ell as f64);
    let x = 1.0 - v.iter().map(|a| a * a).sum::<f64>() / nf;
    if x <= 0.0 {
        return Ok(f64::NEG_INFINITY);
    }
    // |S^{N−ℓ−1}| / (N^{ℓ/2} |S^{N−1}|) = Γ(N/2) / (Γ((N−ℓ)/2) (πN)^{ℓ/2})
    let log_ratio = ln_gamma(0.5 * nf) - ln_gamma(0.5 * (nf - lf)) - 0.5 * lf * (PI * nf).ln();
    Ok(0.5 * (nf - lf - 2.0) * x.ln() + log_ratio)
}

pub fn sigma_marginal_pdf(n: usize, ell: usize, v: &[f64]) -> Result<f64> {
    Ok(sigma_marginal_log_pdf(n, ell, v)?.exp())
}

fn check_table(table: &PartitionTable, n: usize) -> Result<()> {
    check_n(n)?;
    if n > table.max_n() {
        return Err(Error::InvalidArgument(format!("table covers N ≤ {}, asked for {n}", table.max_n())));
    }
    Ok(())
}

/// log θ_{N,ℓ}(V); −∞ off the ball |V|² < N.
pub fn log_theta(n: usize, v: &[f64], table: &PartitionTable) -> Result<f64> {
    check_table(table, n)?;
    let ell = v.len();
    if !(1..=2).contains(&ell) {
        return Err(Error::InvalidArgument(format!("θ is provided for ℓ ≤ 2, got {ell}")));
    }
    let r2: f64 = v.iter().map(|a| a * a).sum();
    let nf = n as f64;
    if r2 >= nf {
        return Ok(f64::NEG_INFINITY);
    }
    let zp = table.log_z_prime(n - ell, (nf - r2).sqrt())?;
    let zn = table.log_z_prime(n, nf.sqrt())?;
    Ok(0.5 * ell as f64 * (2.0 * PI).ln() + 0.5 * r2 + zp - zn + sigma_marginal_log_pdf(n, ell, v)?)
}

/// θ_{N,ℓ}(V), with F^N_ℓ = f^{⊗ℓ} θ_{N,ℓ}.
pub fn theta(n: usize, v: &[f64], table: &PartitionTable) -> Result<f64> {
    Ok(log_theta(n, v, table)?.exp())
}

/// Density of the first coordinate of F^N.
pub fn conditioned_marginal_pdf(n: usize, v: f64, table: &PartitionTable) -> Result<f64> {
    let f = table.density();
    let lf = f.log_pdf(v);
    if lf == f64::NEG_INFINITY {
        return Ok(0.0);
    }
    Ok((lf + log_theta(n, &[v], table)?).exp())
}

fn interval(f: &Density, n: usize) -> (f64, f64) {
    let (lo, hi) = f.support();
    let r = (n as f64).sqrt();
    (lo.max(-r), hi.min(r))
}

fn breaks_in(f: &Density, lo: f64, hi: f64) -> Vec<f64> {
    let mut b = vec![lo];
    b.extend(f.breakpoints().into_iter().filter(|&x| x > lo && x < hi));
    b.push(hi);
    b.sort_by(f64::total_cmp);
    b.dedup();
    b
}

/// Tabulated inverse CDF over a grid, density assumed piecewise linear.
struct GridSampler {
    xs: Vec<f64>,
    cdf: Vec<f64>,
}

impl GridSampler {
    fn from_log_weights(xs: Vec<f64>, logw: &[f64]) -> Option<Self> {
        let top = logw.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if top == f64::NEG_INFINITY {
            return None;
        }
        let w: Vec<f64> = logw.iter().map(|l| (l - top).exp()).collect();
        let mut cdf = vec![0.0; xs.len()];
        for i in 1..xs.len() {
            cdf[i] = cdf[i - 1] + 0.5 * (w[i] + w[i - 1]) * (xs[i] - xs[i - 1]);
        }
        (cdf[xs.len() - 1] > 0.0).then_some(Self { xs, cdf })
    }

    fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let target = rng.random::<f64>() * self.cdf[self.cdf.len() - 1];
        let i = self.cdf.partition_point(|&c| c < target).clamp(1, self.xs.len() - 1);
        let span = self.cdf[i] - self.cdf[i - 1];
        let s = if span > 0.0 { (target - self.cdf[i - 1]) / span } else { 0.5 };
        self.xs[i - 1] + s * (self.xs[i] - self.xs[i - 1])
    }
}

/// Conditional law of the next coordinate given remaining radius² `r2` and `m` coordinates left.
fn step_sampler(table: &PartitionTable, m: usize, r2: f64) -> Result<Option<GridSampler>> {
    let f = table.density();
    let (lo, hi) = f.support();
    let r = r2.sqrt();
    let (a, b) = (lo.max(-r), hi.min(r));
    if !(b > a) {
        return Ok(None);
    }
    let xs: Vec<f64> = (0..SAMPLER_GRID).map(|i| a + (b - a) * i as f64 / (SAMPLER_GRID - 1) as f64).collect();
    let logw = xs
        .iter()
        .map(|&v| Ok(f.log_pdf(v) + table.log_h(m - 1, r2 - v * v)?))
        .collect::<Result<Vec<f64>>>()?;
    Ok(GridSampler::from_log_weights(xs, &logw))
}

fn circle_angle<R: Rng + ?Sized>(f: &Density, r: f64, rng: &mut R) -> Option<f64> {
    let xs: Vec<f64> = (0..SAMPLER_GRID).map(|i| 2.0 * PI * i as f64 / (SAMPLER_GRID - 1) as f64).collect();
    let logw: Vec<f64> = xs.iter().map(|&p| f.log_pdf(r * p.cos()) + f.log_pdf(r * p.sin())).collect();
    GridSampler::from_log_weights(xs, &logw).map(|s| s.draw(rng))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ConditionedDraws {
    pub draws: Vec<SphereConfig>,
    /// Draws discarded because the remaining radius vanished before the last two coordinates.
    pub resampled: usize,
}

/// Sequential sampler for F^N: each coordinate is drawn from f(v) h^{*(m−1)}(R² − v²) on a grid,
/// and the final pair from the angle density ∝ f(r cos φ) f(r sin φ).
pub fn sample_conditioned<R: Rng + ?Sized>(
    n: usize,
    count: usize,
    table: &PartitionTable,
    rng: &mut R,
) -> Result<ConditionedDraws> {
    check_table(table, n)?;
    let first = step_sampler(table, n, n as f64)?
        .ok_or_else(|| Error::Solver("conditional law of v₁ vanishes on the grid".into()))?;
    let seed: u64 = rng.random();
    let resampled = AtomicUsize::new(0);
    let chunks = count.div_ceil(DRAWS_PER_STREAM);
    let parts = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = stream(seed, c as u64);
            let want = DRAWS_PER_STREAM.min(count - c * DRAWS_PER_STREAM);
            let mut out = Vec::with_capacity(want);
            while out.len() < want {
                match draw_one(n, table, &first, &mut rng)? {
                    Some(v) => out.push(SphereConfig { coords: v }),
                    None => {
                        resampled.fetch_add(1, Ordering::Relaxed);
                    }
                }
            }
            Ok(out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ConditionedDraws { draws: parts.into_iter().flatten().collect(), resampled: resampled.into_inner() })
}

fn draw_one<R: Rng + ?Sized>(n: usize, table: &PartitionTable, first: &GridSampler, rng: &mut R) -> Result<Option<Vec<f64>>> {
    let f = table.density();
    let mut v = Vec::with_capacity(n);
    let mut r2 = n as f64;
    for i in 0..n - 2 {
        let x = if i == 0 {
            first.draw(rng)
        } else {
            match step_sampler(table, n - i, r2)? {
                Some(s) => s.draw(rng),
                None => return Ok(None),
            }
        };
        r2 -= x * x;
        if r2 <= 0.0 {
            return Ok(None);
        }
        v.push(x);
    }
    let r = r2.sqrt();
    match circle_angle(f, r, rng) {
        Some(phi) => {
            v.push(r * phi.cos());
            v.push(r * phi.sin());
            Ok(Some(v))
        }
        None => Ok(None),
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EntropyChaosGap {
    /// ∫ log(f/γ) F^N_1 − N^{-1} log Z′_N(√N).
    pub sphere_entropy: f64,
    /// H(f|γ).
    pub reference: f64,
    pub signed: f64,
    pub gap: f64,
}

/// |H(F^N|σ^N) − H(f|γ)| with the sphere entropy taken from its marginal identity.
pub fn entropy_chaos_gap(n: usize, table: &PartitionTable) -> Result<EntropyChaosGap> {
    check_table(table, n)?;
    let f = table.density();
    let g = Density::standard_gaussian();
    let (lo, hi) = interval(f, n);
    let integrand = |v: f64| {
        let lf = f.log_pdf(v);
        if lf == f64::NEG_INFINITY {
            return 0.0;
        }
        let lt = log_theta(n, &[v], table).unwrap_or(f64::NEG_INFINITY);
        (lf - g.log_pdf(v)) * (lf + lt).exp()
    };
    let main = quadrature::integrate_pieces(&integrand, &breaks_in(f, lo, hi), 1e-13, 1e-11)?;
    let sphere_entropy = main - table.log_z_prime(n, (n as f64).sqrt())? / n as f64;
    let reference = relative_entropy(f, &g)?.value;
    let signed = sphere_entropy - reference;
    Ok(EntropyChaosGap { sphere_entropy, reference, signed, gap: signed.abs() })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FisherChaosTerms {
    /// ∫ |f′/f + v|² F^N_1.
    pub main: f64,
    /// Monte Carlo mean of N^{-2} (V·∇ log(f/γ)^{⊗N})² over F^N draws.
    pub correction: f64,
    pub correction_stderr: f64,
}

impl FisherChaosTerms {
    /// Approximation of I(F^N|σ^N) / N.
    pub fn sphere_fisher(&self) -> f64 {
        self.main - self.correction
    }
}

/// Both pieces of the tangential Fisher information of F^N relative to σ^N.
pub fn fisher_chaos_terms(n: usize, table: &PartitionTable, samples: &[SphereConfig]) -> Result<FisherChaosTerms> {
    check_table(table, n)?;
    let f = table.density();
    if !f.is_smooth() {
        return Err(Error::Hypothesis("∫ f′²/f ⟨v⟩² must be finite; the density is not smooth".into()));
    }
    let weighted = f.integrate(|v| (f.score(v)).powi(2) * (1.0 + v * v) * f.pdf(v), 1e-12, 1e-10)?;
    if !weighted.is_finite() {
        return Err(Error::Hypothesis("∫ f′²/f ⟨v⟩² is infinite".into()));
    }
    let (lo, hi) = interval(f, n);
    let integrand = |v: f64| {
        let lf = f.log_pdf(v);
        if lf == f64::NEG_INFINITY {
            return 0.0;
        }
        let lt = log_theta(n, &[v], table).unwrap_or(f64::NEG_INFINITY);
        (f.score(v) + v).powi(2) * (lf + lt).exp()
    };
    let main = quadrature::integrate_pieces(&integrand, &breaks_in(f, lo, hi), 1e-13, 1e-11)?;
    let nf = n as f64;
    let terms: Vec<f64> = samples
        .iter()
        .map(|s| {
            if s.n() != n {
                return Err(Error::DimensionMismatch { expected: n, got: s.n() });
            }
            let dot: f64 = s.coords().iter().map(|&v| v * (f.score(v) + v)).sum();
            Ok(dot * dot / (nf * nf))
        })
        .collect::<Result<_>>()?;
    let (correction, correction_stderr) = mean_stderr(&terms);
    Ok(FisherChaosTerms { main, correction, correction_stderr })
}

pub(crate) fn mean_stderr(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    if x.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let m = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (m, f64::NAN);
    }
    let v = x.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// ‖σ^N_1 − γ‖_{L¹} by quadrature.
pub fn sigma_marginal_l1_to_gaussian(n: usize) -> Result<f64> {
    check_n(n)?;
    let g = Density::standard_gaussian();
    let r = (n as f64).sqrt();
    let inside = |v: f64| (sigma_marginal_pdf(n, 1, &[v]).unwrap_or(0.0) - g.pdf(v)).abs();
    let mut breaks: Vec<f64> = vec![-r, -3.0, -1.0, 0.0, 1.0, 3.0, r];
    breaks.retain(|x| x.abs() <= r);
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    let core = quadrature::integrate_pieces(&inside, &breaks, 1e-14, 1e-11)?;
    Ok(core + 2.0 * g.sf(r))
}

/// ‖F^N_1 − f‖_{L¹} = ∫ |θ_{N,1} − 1| f.
pub fn conditioned_marginal_l1(n: usize, table: &PartitionTable) -> Result<f64> {
    check_table(table, n)?;
    let f = table.density();
    let (lo, hi) = interval(f, n);
    let integrand = |v: f64| {
        let p = f.pdf(v);
        if p == 0.0 {
            return 0.0;
        }
        (theta(n, &[v], table).unwrap_or(0.0) - 1.0).abs() * p
    };
    let inside = quadrature::integrate_pieces(&integrand, &breaks_in(f, lo, hi), 1e-14, 1e-11)?;
    let outside = f.cdf(lo) + f.sf(hi);
    Ok(inside + outside)
}

/// sup_{|v| ≤ N^{1/8}} |θ_{N,1}(v) − 1| over a uniform grid of `points` nodes.
pub fn theta_bulk_deviation(n: usize, table: &PartitionTable, points: usize) -> Result<f64> {
    let b = (n as f64).powf(0.125);
    let mut sup = 0.0f64;
    for i in 0..points {
        let v = -b + 2.0 * b * i as f64 / (points - 1) as f64;
        sup = sup.max((theta(n, &[v], table)? - 1.0).abs());
    }
    Ok(sup)
}

/// sup of θ_{N,ℓ} over a grid of the ball |V| < √N (ℓ = 1 or 2).
pub fn theta_sup(n: usize, ell: usize, table: &PartitionTable, points: usize) -> Result<f64> {
    let r = (n as f64).sqrt();
    let node = |i: usize| -r + 2.0 * r * (i as f64 + 0.5) / points as f64;
    let mut sup = 0.0f64;
    match ell {
        1 => {
            for i in 0..points {
                sup = sup.max(theta(n, &[node(i)], table)?);
            }
        }
        2 => {
            for i in 0..points {
                for j in 0..points {
                    sup = sup.max(theta(n, &[node(i), node(j)], table)?);
                }
            }
        }
        _ => return Err(Error::InvalidArgument(format!("θ is provided for ℓ ≤ 2, got {ell}"))),
    }
    Ok(sup)
}

/// Monte Carlo mean of d_{E^N}(P(V), V) over V ~ γ^{⊗N}, an upper bound on W₁(σ^N, γ^{⊗N}).
pub fn radial_projection_cost<R: Rng + ?Sized>(n: usize, draws: usize, rng: &mut R) -> Result<(f64, f64)> {
    check_n(n)?;
    let costs: Vec<f64> = (0..draws)
        .map(|_| {
            let g: Vec<f64> = (0..n).map(|_| rng.sample(StandardNormal)).collect();
            let p = project(&g);
            p.iter().zip(&g).map(|(a, b)| (a - b).abs().min(1.0)).sum::<f64>() / n as f64
        })
        .collect();
    Ok(mean_stderr(&costs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::rng::seeded;

    #[test]
    fn sphere_draws_lie_on_sphere() {
        let mut rng = seeded(1);
        let d = sample_sigma(12, 200, &mut rng).unwrap();
        for s in &d {
            let r2: f64 = s.coords().iter().map(|v| v * v).sum();
            assert!((r2 - 12.0).abs() < 1e-9 * 12.0);
        }
        assert!(sample_sigma(4, 1, &mut rng).is_err());
    }

    #[test]
    fn disk_marginal_is_uniform() {
        let p = sigma_marginal_pdf(4, 2, &[0.3, -1.1]).unwrap();
        assert!((p - 1.0 / (4.0 * PI)).abs() < 1e-14);
        assert_eq!(sigma_marginal_pdf(10, 1, &[3.3]).unwrap(), 0.0);
        assert!(sigma_marginal_pdf(10, 10, &[0.0; 10]).is_err());
    }

    #[test]
    fn marginals_integrate_to_one() {
        for (n, ell) in [(10usize, 1usize), (50, 1)] {
            let r = (n as f64).sqrt();
            let m = quadrature::integrate(&|v: f64| sigma_marginal_pdf(n, ell, &[v]).unwrap(), -r, r, 1e-13, 1e-12).unwrap();
            assert!((m - 1.0).abs() < 1e-6);
        }
        // ℓ = 2 in polar coordinates
        let n = 10;
        let r = (n as f64).sqrt();
        let m = quadrature::integrate(&|rho: f64| 2.0 * PI * rho * sigma_marginal_pdf(n, 2, &[rho, 0.0]).unwrap(), 0.0, r, 1e-13, 1e-12)
            .unwrap();
        assert!((m - 1.0).abs() < 1e-6);
    }

    #[test]
    fn disintegration_consistency() {
        let n = 10;
        let r = (n as f64).sqrt();
        for v1 in [0.0, 0.7, -2.1] {
            let w = (r * r - v1 * v1).sqrt();
            let m = quadrature::integrate(&|v2: f64| sigma_marginal_pdf(n, 2, &[v1, v2]).unwrap(), -w, w, 1e-14, 1e-12).unwrap();
            assert!((m - sigma_marginal_pdf(n, 1, &[v1]).unwrap()).abs() < 1e-6);
        }
    }

    #[test]
    fn diaconis_freedman_bound() {
        for n in [8usize, 16, 64, 256] {
            let l1 = sigma_marginal_l1_to_gaussian(n).unwrap();
            assert!(l1 <= 8.0 / (n as f64 - 4.0), "N={n}: {l1}");
        }
    }

    #[test]
    fn gaussian_theta_is_marginal_ratio() {
        let t = PartitionTable::build(&Density::standard_gaussian(), 40).unwrap();
        let g = Density::standard_gaussian();
        for v in [0.0, 0.9, -2.5] {
            let th = theta(40, &[v], &t).unwrap();
            let expect = sigma_marginal_pdf(40, 1, &[v]).unwrap() / g.pdf(v);
            assert!((th / expect - 1.0).abs() < 2e-3);
        }
        let gap = entropy_chaos_gap(40, &t).unwrap();
        assert!(gap.gap < 1e-6, "{gap:?}");
    }

    #[test]
    fn radial_cost_shrinks() {
        let mut rng = seeded(3);
        let (a, _) = radial_projection_cost(16, 4000, &mut rng).unwrap();
        let (b, _) = radial_projection_cost(256, 4000, &mut rng).unwrap();
        assert!(b < a / 3.0);
    }

    #[test]
    fn conditioned_sampler_stays_on_sphere() {
        let t = PartitionTable::build(&Density::bimodal(), 16).unwrap();
        let mut rng = seeded(5);
        let d = sample_conditioned(16, 300, &t, &mut rng).unwrap();
        assert_eq!(d.draws.len(), 300);
        for s in &d.draws {
            assert!(SphereConfig::new(s.coords().to_vec()).is_ok());
        }
    }
}
