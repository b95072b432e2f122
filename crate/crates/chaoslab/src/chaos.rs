//! Chaos quantifiers Ω_j, Ω_N, Ω_∞ and exact probes of their relations on finite alphabets.

use std::sync::Arc;

use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::base::density::{Component, Density};
use crate::base::pmf::{digits, SymmetricPmf};
use crate::base::quadrature;
use crate::base::rng::{stream, LabRng};
use crate::base::types::{Configuration, DiscreteMeasure};
use crate::error::{Error, Result};
use crate::kacsphere::{self, PartitionTable};
use crate::transport::{self, line, simplex, CostSpec};

/// Stream index reserved for reference discretizations.
const REFERENCE_STREAM: u64 = u64::MAX;
/// Offset separating the independent second draw of `omega_n` from the first.
const INDEPENDENT_OFFSET: u64 = 1 << 62;
const BATCHES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Quantifier {
    OmegaJ { j: usize },
    OmegaN,
    OmegaInf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChaosEstimate {
    pub quantifier: Quantifier,
    pub n: usize,
    pub mc_reps: usize,
    pub value: f64,
    pub stderr: f64,
    pub reference_size: usize,
    /// The estimator bounds the quantity from above rather than estimating it.
    pub upper_bound: bool,
}

/// An exchangeable law G^N on ℝ^N that can be sampled.
pub trait ParticleSampler: Sync {
    fn n(&self) -> usize;

    fn draw(&self, rng: &mut LabRng) -> Vec<f64>;

    /// The first `j` coordinates of one draw.
    fn draw_prefix(&self, j: usize, rng: &mut LabRng) -> Vec<f64> {
        let mut v = self.draw(rng);
        v.truncate(j);
        v
    }
}

/// f^{⊗N}.
#[derive(Debug, Clone)]
pub struct ProductSampler {
    pub f: Density,
    pub n: usize,
}

impl ParticleSampler for ProductSampler {
    fn n(&self) -> usize {
        self.n
    }

    fn draw(&self, rng: &mut LabRng) -> Vec<f64> {
        self.f.sample_n(self.n, rng)
    }

    fn draw_prefix(&self, j: usize, rng: &mut LabRng) -> Vec<f64> {
        self.f.sample_n(j.min(self.n), rng)
    }
}

/// σ^N by radial projection; consumes the generator exactly like `ProductSampler` with f = γ.
#[derive(Debug, Clone, Copy)]
pub struct SigmaSampler {
    pub n: usize,
}

impl ParticleSampler for SigmaSampler {
    fn n(&self) -> usize {
        self.n
    }

    fn draw(&self, rng: &mut LabRng) -> Vec<f64> {
        let g: Vec<f64> = (0..self.n).map(|_| rng.sample(StandardNormal)).collect();
        kacsphere::project(&g)
    }
}

/// Σ αᵢ fᵢ^{⊗N}: pick an atom, then draw i.i.d. coordinates from it.
#[derive(Debug, Clone)]
pub struct MixtureSampler {
    pub atoms: Vec<(f64, Density)>,
    pub n: usize,
}

impl MixtureSampler {
    fn pick(&self, rng: &mut LabRng) -> &Density {
        let u: f64 = rng.random();
        let mut acc = 0.0;
        for (a, f) in &self.atoms {
            acc += a;
            if u < acc {
                return f;
            }
        }
        &self.atoms[self.atoms.len() - 1].1
    }
}

impl ParticleSampler for MixtureSampler {
    fn n(&self) -> usize {
        self.n
    }

    fn draw(&self, rng: &mut LabRng) -> Vec<f64> {
        self.pick(rng).clone().sample_n(self.n, rng)
    }

    fn draw_prefix(&self, j: usize, rng: &mut LabRng) -> Vec<f64> {
        self.pick(rng).clone().sample_n(j.min(self.n), rng)
    }
}

/// Deterministic configuration of the N midpoint quantiles of f.
#[derive(Debug, Clone)]
pub struct QuantileSampler {
    pub f: Density,
    pub n: usize,
}

impl ParticleSampler for QuantileSampler {
    fn n(&self) -> usize {
        self.n
    }

    fn draw(&self, _rng: &mut LabRng) -> Vec<f64> {
        (0..self.n).map(|i| self.f.quantile((i as f64 + 0.5) / self.n as f64)).collect()
    }
}

/// Conditioned product F^N on the Kac sphere.
#[derive(Debug, Clone)]
pub struct ConditionedSampler {
    pub table: Arc<PartitionTable>,
    pub n: usize,
}

impl ParticleSampler for ConditionedSampler {
    fn n(&self) -> usize {
        self.n
    }

    fn draw(&self, rng: &mut LabRng) -> Vec<f64> {
        let d = kacsphere::sample_conditioned(self.n, 1, &self.table, rng).expect("table covers N");
        d.draws.into_iter().next().expect("one draw").into_coords()
    }
}

fn mean_stderr(x: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let m = x.iter().sum::<f64>() / n;
    if x.len() < 2 {
        return (m, 0.0);
    }
    let v = x.iter().map(|a| (a - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

/// Exact W₁ for d_E between two uniform point clouds on ℝ.
fn w1_clouds(x: &[f64], y: &[f64]) -> f64 {
    let a: Vec<(f64, f64)> = x.iter().map(|&v| (v, 1.0 / x.len() as f64)).collect();
    let b: Vec<(f64, f64)> = y.iter().map(|&v| (v, 1.0 / y.len() as f64)).collect();
    line::w1_truncated(&a, &b, 1.0)
}

fn check_reps(mc_reps: usize) -> Result<()> {
    if mc_reps == 0 {
        return Err(Error::InvalidArgument("mc_reps must be positive".into()));
    }
    Ok(())
}

/// Ω_∞(G^N; f) = E W₁(μ^N_X, f), with f replaced by a size-M sample drawn from a fixed stream.
pub fn omega_inf<S: ParticleSampler>(
    sampler: &S,
    f: &Density,
    mc_reps: usize,
    m: usize,
    rng: &mut LabRng,
) -> Result<ChaosEstimate> {
    check_reps(mc_reps)?;
    if m == 0 {
        return Err(Error::InvalidArgument("reference size must be positive".into()));
    }
    let master: u64 = rng.random();
    let reference = f.sample_n(m, &mut stream(master, REFERENCE_STREAM));
    let costs: Vec<f64> = (0..mc_reps as u64)
        .into_par_iter()
        .map(|r| w1_clouds(&sampler.draw(&mut stream(master, r)), &reference))
        .collect();
    let (value, stderr) = mean_stderr(&costs);
    Ok(ChaosEstimate {
        quantifier: Quantifier::OmegaInf,
        n: sampler.n(),
        mc_reps,
        value,
        stderr,
        reference_size: m,
        upper_bound: false,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// X and Y read the same random stream (for σ^N against γ^{⊗N} this is the radial projection).
    Synchronous,
    Independent,
}

/// Upper bound on Ω_N(G^N; f) = W₁(G^N, f^{⊗N}) = 𝒲₁(Ĝ^N, F̂^N): the mean of w₁(X, Y) under a
/// coupling of X ~ G^N and Y ~ f^{⊗N}.
pub fn omega_n<S: ParticleSampler>(
    sampler: &S,
    f: &Density,
    mc_reps: usize,
    coupling: Coupling,
    rng: &mut LabRng,
) -> Result<ChaosEstimate> {
    check_reps(mc_reps)?;
    let n = sampler.n();
    let master: u64 = rng.random();
    let costs: Vec<f64> = (0..mc_reps as u64)
        .into_par_iter()
        .map(|r| {
            let x = sampler.draw(&mut stream(master, r));
            let y_stream = match coupling {
                Coupling::Synchronous => r,
                Coupling::Independent => r + INDEPENDENT_OFFSET,
            };
            let y = f.sample_n(n, &mut stream(master, y_stream));
            // for uniform clouds of equal size the optimal plan is a permutation, so this is w₁(X, Y)
            w1_clouds(&x, &y)
        })
        .collect();
    let (value, stderr) = mean_stderr(&costs);
    Ok(ChaosEstimate {
        quantifier: Quantifier::OmegaN,
        n,
        mc_reps,
        value,
        stderr,
        reference_size: n,
        upper_bound: true,
    })
}

/// Same as [`w1_config`](transport::w1_config) on configurations in ℝ^d, used for d > 1.
pub fn coupled_cost(x: &Configuration, y: &Configuration) -> Result<f64> {
    Ok(transport::w1_config(x, y)?.0)
}

fn pooled_w1(x: &[f64], y: &[f64], j: usize) -> Result<f64> {
    if j == 1 {
        return Ok(w1_clouds(x, y));
    }
    let mu = DiscreteMeasure::normalized(1, j, x.to_vec(), vec![1.0; x.len() / j])?;
    let nu = DiscreteMeasure::normalized(1, j, y.to_vec(), vec![1.0; y.len() / j])?;
    Ok(transport::w1_discrete(&mu, &nu, CostSpec::bounded())?.cost)
}

/// Ω_j(G^N; f) = W₁(G^N_j, f^{⊗j}) between the pooled first-j blocks of `mc_reps` draws and
/// `m` reference draws of f^{⊗j}.
///
/// The stderr is half the spread of four disjoint quarter-size replicas.
pub fn omega_j<S: ParticleSampler>(
    sampler: &S,
    f: &Density,
    j: usize,
    mc_reps: usize,
    m: usize,
    rng: &mut LabRng,
) -> Result<ChaosEstimate> {
    check_reps(mc_reps)?;
    let n = sampler.n();
    if j == 0 || j > n {
        return Err(Error::InvalidArgument(format!("need 1 ≤ j ≤ N, got j = {j}, N = {n}")));
    }
    if m == 0 {
        return Err(Error::InvalidArgument("reference size must be positive".into()));
    }
    let master: u64 = rng.random();
    let x: Vec<f64> = (0..mc_reps as u64)
        .into_par_iter()
        .flat_map_iter(|r| sampler.draw_prefix(j, &mut stream(master, r)))
        .collect();
    let y = f.sample_n(m * j, &mut stream(master, REFERENCE_STREAM));
    let value = pooled_w1(&x, &y, j)?;
    let stderr = if mc_reps >= 2 * BATCHES && m >= 2 * BATCHES {
        let (bx, by) = (mc_reps / BATCHES, m / BATCHES);
        let vals = (0..BATCHES)
            .map(|b| pooled_w1(&x[b * bx * j..(b + 1) * bx * j], &y[b * by * j..(b + 1) * by * j], j))
            .collect::<Result<Vec<_>>>()?;
        mean_stderr(&vals).1
    } else {
        0.0
    };
    Ok(ChaosEstimate {
        quantifier: Quantifier::OmegaJ { j },
        n,
        mc_reps,
        value,
        stderr,
        reference_size: m,
        upper_bound: false,
    })
}

/// ‖σ^N_j − γ^{⊗j}‖_{L¹}/2 for j ≤ 2 by quadrature, an upper bound on Ω_j(σ^N; γ).
pub fn omega_j_sigma_quadrature(n: usize, j: usize) -> Result<ChaosEstimate> {
    let value = match j {
        1 => 0.5 * kacsphere::sigma_marginal_l1_to_gaussian(n)?,
        2 => {
            if n < 5 {
                return Err(Error::InvalidArgument(format!("Kac sphere needs N ≥ 5, got {n}")));
            }
            let r = (n as f64).sqrt();
            let radial = |rho: f64| {
                let s = kacsphere::sigma_marginal_pdf(n, 2, &[rho, 0.0]).unwrap_or(0.0);
                let g = (-0.5 * rho * rho).exp() / (2.0 * std::f64::consts::PI);
                2.0 * std::f64::consts::PI * rho * (s - g).abs()
            };
            let mut breaks = vec![0.0, 1.0, 2.0, 4.0, r];
            breaks.retain(|&b| b <= r);
            breaks.dedup();
            let inside = quadrature::integrate_pieces(&radial, &breaks, 1e-14, 1e-11)?;
            0.5 * (inside + (-0.5 * r * r).exp())
        }
        _ => return Err(Error::InvalidArgument(format!("quadrature path covers j ≤ 2, got {j}"))),
    };
    Ok(ChaosEstimate {
        quantifier: Quantifier::OmegaJ { j },
        n,
        mc_reps: 0,
        value,
        stderr: 0.0,
        reference_size: 0,
        upper_bound: true,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrunbaumReport {
    /// ‖G^N_j − Ĝ^N_j‖_TV as the total mass of the signed difference.
    pub tv: f64,
    pub bound: f64,
    pub holds: bool,
}

/// Exact comparison of the j-marginal of a symmetric table with the j-th moment measure of its
/// empirical pushforward, ∫ (μ^N_X)^{⊗j} G^N(dX).
pub fn grunbaum_exact(pmf: &SymmetricPmf, j: usize) -> Result<GrunbaumReport> {
    pmf.check_symmetric()?;
    let (s, n) = (pmf.alphabet().len(), pmf.n());
    if j == 0 || j > n {
        return Err(Error::InvalidArgument(format!("need 1 ≤ j ≤ N, got j = {j}, N = {n}")));
    }
    let exact = pmf.marginal_table(j)?;
    let size = s.pow(j as u32);
    let mut moment = vec![0.0; size];
    for (orbit, mass) in pmf.orbit_masses() {
        if mass == 0.0 {
            continue;
        }
        let mut freq = vec![0.0; s];
        for d in orbit {
            freq[d] += 1.0 / n as f64;
        }
        for (idx, slot) in moment.iter_mut().enumerate() {
            *slot += mass * digits(idx, s, j).iter().map(|&d| freq[d]).product::<f64>();
        }
    }
    let tv: f64 = exact.iter().zip(&moment).map(|(a, b)| (a - b).abs()).sum();
    let bound = 2.0 * (j * (j - 1)) as f64 / n as f64;
    Ok(GrunbaumReport { tv, bound, holds: tv <= bound + 1e-12 })
}

/// Both sides of W₁(F^N, G^N) = 𝒲₁(F̂^N, Ĝ^N): the full transport LP on S^N with cost d_{E^N}
/// and the LP on permutation orbits with cost w₁ between sorted representatives.
pub fn pushforward_identity_exact(f: &SymmetricPmf, g: &SymmetricPmf) -> Result<(f64, f64)> {
    if f.alphabet() != g.alphabet() || f.n() != g.n() {
        return Err(Error::InvalidArgument("both tables must share the alphabet and N".into()));
    }
    f.check_symmetric()?;
    g.check_symmetric()?;
    let states = f.probs().len();
    if states > 10_000 {
        return Err(Error::TooLarge { what: "state space", size: states, limit: 10_000 });
    }
    let support = |p: &SymmetricPmf| -> (Vec<usize>, Vec<f64>) {
        p.probs().iter().enumerate().filter(|(_, w)| **w > 0.0).map(|(i, w)| (i, *w)).unzip()
    };
    let (fi, fw) = support(f);
    let (gi, gw) = support(g);
    if fi.len().saturating_mul(gi.len()) > transport::MAX_LP_ARCS {
        return Err(Error::TooLarge {
            what: "transport problem",
            size: fi.len() * gi.len(),
            limit: transport::MAX_LP_ARCS,
        });
    }
    let point = |p: &SymmetricPmf, idx: usize| -> Vec<f64> { p.digits(idx).iter().map(|&d| p.alphabet()[d]).collect() };
    let spec = CostSpec::bounded();
    let fpts: Vec<Vec<f64>> = fi.iter().map(|&i| point(f, i)).collect();
    let gpts: Vec<Vec<f64>> = gi.iter().map(|&i| point(g, i)).collect();
    let cost: Vec<f64> = fpts.iter().flat_map(|x| gpts.iter().map(|y| spec.cost(x, y, 1))).collect();
    let lhs = lp_value(&fw, &gw, &cost)?;

    let orbits = |p: &SymmetricPmf| -> Vec<(Vec<f64>, f64)> {
        p.orbit_masses()
            .into_iter()
            .filter(|(_, w)| *w > 0.0)
            .map(|(d, w)| (d.iter().map(|&k| p.alphabet()[k]).collect(), w))
            .collect()
    };
    let (fo, go) = (orbits(f), orbits(g));
    let mut ocost = Vec::with_capacity(fo.len() * go.len());
    for (x, _) in &fo {
        let cx = Configuration::from_line(x.clone())?;
        for (y, _) in &go {
            ocost.push(transport::w1_config(&cx, &Configuration::from_line(y.clone())?)?.0);
        }
    }
    let ow: Vec<f64> = fo.iter().map(|o| o.1).collect();
    let ov: Vec<f64> = go.iter().map(|o| o.1).collect();
    let rhs = lp_value(&ow, &ov, &ocost)?;
    Ok((lhs, rhs))
}

fn lp_value(a: &[f64], b: &[f64], cost: &[f64]) -> Result<f64> {
    let sol = simplex::solve(a, b, cost)?;
    Ok(sol.flows.iter().map(|&(i, j, w)| w * cost[i * b.len() + j]).sum())
}

/// ½g + ½h for Gaussian or Gaussian-mixture atoms.
pub fn equal_mixture(g: &Density, h: &Density) -> Result<Density> {
    let comps = |d: &Density| -> Result<Vec<Component>> {
        match d {
            Density::Gaussian { mean, sd } => Ok(vec![Component { weight: 0.5, mean: *mean, sd: *sd }]),
            Density::Mixture { components } => {
                Ok(components.iter().map(|c| Component { weight: 0.5 * c.weight, ..*c }).collect())
            }
            Density::Uniform { .. } => {
                Err(Error::InvalidArgument("the counterexample needs Gaussian or mixture atoms".into()))
            }
        }
    };
    let mut all = comps(g)?;
    all.extend(comps(h)?);
    Density::mixture(all)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CounterexampleReport {
    /// The reference f = ½(g + h).
    pub reference: Density,
    pub ns: Vec<usize>,
    pub omega1: Vec<ChaosEstimate>,
    pub omega2: Vec<ChaosEstimate>,
    /// Ω̂₂ / Ω̂₁ at the N closest to 256.
    pub ratio_at_256: f64,
    pub ratio_holds: bool,
}

/// Ω₁ and Ω₂ of G^N = ½g^{⊗N} + ½h^{⊗N} against f = ½(g + h).
///
/// Ω₁ pools `reps1` draws and uses the exact line solver; Ω₂ pools `reps2` draws and an
/// equal-size reference through the assignment solver.
pub fn omega1_counterexample(
    g: &Density,
    h: &Density,
    ns: &[usize],
    reps1: usize,
    reps2: usize,
    rng: &mut LabRng,
) -> Result<CounterexampleReport> {
    if g == h {
        return Err(Error::InvalidArgument("the two atoms must differ".into()));
    }
    if ns.is_empty() || ns.iter().any(|&n| n < 2) {
        return Err(Error::InvalidArgument("need a nonempty list of N ≥ 2".into()));
    }
    let reference = equal_mixture(g, h)?;
    let mut omega1 = Vec::with_capacity(ns.len());
    let mut omega2 = Vec::with_capacity(ns.len());
    for &n in ns {
        let sampler = MixtureSampler { atoms: vec![(0.5, g.clone()), (0.5, h.clone())], n };
        omega1.push(omega_j(&sampler, &reference, 1, reps1, reps1, rng)?);
        omega2.push(omega_j(&sampler, &reference, 2, reps2, reps2, rng)?);
    }
    let k = (0..ns.len()).min_by_key(|&i| ns[i].abs_diff(256)).expect("nonempty");
    let ratio_at_256 = omega2[k].value / omega1[k].value;
    Ok(CounterexampleReport {
        reference,
        ns: ns.to_vec(),
        omega1,
        omega2,
        ratio_at_256,
        ratio_holds: ratio_at_256 > 5.0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::rng::seeded;

    #[test]
    fn synchronous_product_coupling_is_zero() {
        let s = ProductSampler { f: Density::bimodal(), n: 20 };
        let e = omega_n(&s, &Density::bimodal(), 30, Coupling::Synchronous, &mut seeded(3)).unwrap();
        assert_eq!(e.value, 0.0);
        assert!(e.upper_bound);
        let ind = omega_n(&s, &Density::bimodal(), 30, Coupling::Independent, &mut seeded(3)).unwrap();
        assert!(ind.value > 0.05 && ind.value <= 1.0);
    }

    #[test]
    fn independent_coupling_matches_omega_inf_scale() {
        let g = Density::standard_gaussian();
        let s = ProductSampler { f: g.clone(), n: 64 };
        let on = omega_n(&s, &g, 100, Coupling::Independent, &mut seeded(4)).unwrap().value;
        let oi = omega_inf(&s, &g, 100, 4096, &mut seeded(5)).unwrap().value;
        let r = on / (2.0 * oi);
        assert!(r > 1.0 / 3.0 && r < 3.0, "{on} vs {oi}");
    }

    #[test]
    fn sigma_coupling_is_the_radial_projection() {
        let s = SigmaSampler { n: 64 };
        let e = omega_n(&s, &Density::standard_gaussian(), 50, Coupling::Synchronous, &mut seeded(9)).unwrap();
        let (r, _) = kacsphere::radial_projection_cost(64, 2000, &mut seeded(10)).unwrap();
        assert!(e.value <= 1.5 * r && e.value > 0.5 * r, "{} vs {r}", e.value);
    }

    #[test]
    fn quantile_sampler_has_a_small_constant_value() {
        let g = Density::standard_gaussian();
        let s = QuantileSampler { f: g.clone(), n: 256 };
        let e = omega_inf(&s, &g, 4, 4096, &mut seeded(1)).unwrap();
        assert_eq!(e.stderr, 0.0);
        assert!(e.value < 0.05);
    }

    #[test]
    fn sigma_quadrature_bounds() {
        for n in [8, 32, 128] {
            let e2 = omega_j_sigma_quadrature(n, 2).unwrap();
            assert!(e2.value <= 5.0 / (n as f64 - 5.0), "N={n}: {}", e2.value);
            let e1 = omega_j_sigma_quadrature(n, 1).unwrap();
            assert!(e1.value <= e2.value + 1e-12);
        }
        assert!(omega_j_sigma_quadrature(16, 3).is_err());
    }

    #[test]
    fn first_marginals_agree_exactly() {
        let mut rng = seeded(11);
        for _ in 0..20 {
            let p = SymmetricPmf::random(vec![0.0, 0.5, 2.0], 4, &mut rng).unwrap();
            let r = grunbaum_exact(&p, 1).unwrap();
            assert!(r.tv < 1e-14);
            assert!(grunbaum_exact(&p, 2).unwrap().holds);
        }
    }

    #[test]
    fn product_table_pushforward_equals_base_distance() {
        let a = vec![0.0, 0.4, 1.7];
        let f = SymmetricPmf::product(a.clone(), &[0.2, 0.5, 0.3], 3).unwrap();
        let g = SymmetricPmf::product(a.clone(), &[0.6, 0.1, 0.3], 3).unwrap();
        let (lhs, rhs) = pushforward_identity_exact(&f, &g).unwrap();
        let base = transport::w1_line(
            &DiscreteMeasure::new(1, 1, a.clone(), vec![0.2, 0.5, 0.3]).unwrap(),
            &DiscreteMeasure::new(1, 1, a, vec![0.6, 0.1, 0.3]).unwrap(),
            1.0,
        )
        .unwrap();
        assert!((lhs - base).abs() < 1e-9 && (rhs - base).abs() < 1e-9, "{lhs} {rhs} {base}");
        let (z1, z2) = pushforward_identity_exact(&f, &f).unwrap();
        assert!(z1.abs() < 1e-12 && z2.abs() < 1e-12);
    }

    #[test]
    fn equal_atoms_are_rejected_and_close_atoms_give_small_values() {
        let g = Density::standard_gaussian();
        assert!(omega1_counterexample(&g, &g, &[32], 256, 64, &mut seeded(1)).is_err());
        let r = omega1_counterexample(&g, &g.shifted(1e-3), &[32], 4096, 128, &mut seeded(1)).unwrap();
        assert!(r.omega1[0].value < 0.05 && r.omega2[0].value < 0.2);
    }

    #[test]
    fn j_larger_than_n_is_rejected() {
        let s = ProductSampler { f: Density::standard_gaussian(), n: 3 };
        assert!(omega_j(&s, &Density::standard_gaussian(), 4, 10, 10, &mut seeded(0)).is_err());
    }
}
