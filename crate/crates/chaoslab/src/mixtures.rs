//! Finite De Finetti mixtures π = Σ αᵢ δ_{fᵢ}, their marginals π_j = Σ αᵢ fᵢ^{⊗j} and the
//! level-3 functionals ℋ(π) = Σ αᵢ H(fᵢ), ℐ(π) = Σ αᵢ I(fᵢ).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::base::density::Density;
use crate::base::quadrature;
use crate::base::rate::{loglog_fit_with_stderr, RateReport};
use crate::base::rng::{stream, LabRng};
use crate::chaos::MixtureSampler;
use crate::error::{Error, Result};
use crate::information::{self, GridNd};
use crate::sobolev::HsKernel;

pub const ENTROPY_BATCHES: usize = 20;
const GRID_SIDE_1D: usize = 4096;
const GRID_SIDE_2D: usize = 400;
const POTENTIAL_SPACING: f64 = 0.01;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    atoms: Vec<(f64, Density)>,
}

impl Mixture {
    pub fn new(atoms: Vec<(f64, Density)>) -> Result<Self> {
        if atoms.is_empty() {
            return Err(Error::InvalidArgument("a mixture needs at least one atom".into()));
        }
        if atoms.iter().any(|(a, _)| !(*a > 0.0 && *a <= 1.0)) {
            return Err(Error::InvalidArgument("atom weights must lie in (0, 1]".into()));
        }
        let sum: f64 = atoms.iter().map(|a| a.0).sum();
        if (sum - 1.0).abs() > 1e-12 {
            return Err(Error::WeightSum { sum });
        }
        for i in 0..atoms.len() {
            for k in i + 1..atoms.len() {
                if atoms[i].1 == atoms[k].1 {
                    return Err(Error::InvalidArgument(format!("atoms {i} and {k} coincide")));
                }
            }
        }
        Ok(Self { atoms })
    }

    pub fn single(f: Density) -> Self {
        Self { atoms: vec![(1.0, f)] }
    }

    pub fn atoms(&self) -> &[(f64, Density)] {
        &self.atoms
    }

    /// θπ + (1−θ)π′ for mixtures with disjoint atom sets.
    pub fn combine(&self, theta: f64, other: &Mixture) -> Result<Self> {
        if !(theta > 0.0 && theta < 1.0) {
            return Err(Error::InvalidArgument(format!("θ must lie in (0, 1), got {theta}")));
        }
        let mut atoms: Vec<(f64, Density)> = self.atoms.iter().map(|(a, f)| (theta * a, f.clone())).collect();
        atoms.extend(other.atoms.iter().map(|(a, f)| ((1.0 - theta) * a, f.clone())));
        let sum: f64 = atoms.iter().map(|a| a.0).sum();
        atoms.iter_mut().for_each(|a| a.0 /= sum);
        Self::new(atoms)
    }

    /// log π_j(v) = log Σ αᵢ Π_k fᵢ(v_k), by log-sum-exp.
    pub fn log_marginal_pdf(&self, v: &[f64]) -> f64 {
        let terms: Vec<f64> = self
            .atoms
            .iter()
            .map(|(a, f)| a.ln() + v.iter().map(|&x| f.log_pdf(x)).sum::<f64>())
            .collect();
        log_sum_exp(&terms)
    }

    pub fn sampler(&self, j: usize) -> MixtureSampler {
        MixtureSampler { atoms: self.atoms.clone(), n: j }
    }

    fn span(&self) -> (f64, f64) {
        self.atoms.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), (_, f)| {
            let (a, b) = f.support();
            (lo.min(a), hi.max(b))
        })
    }
}

fn log_sum_exp(terms: &[f64]) -> f64 {
    let m = terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + terms.iter().map(|t| (t - m).exp()).sum::<f64>().ln()
}

/// π_j as a grid density for j ≤ 2, or as a two-stage sampler.
#[derive(Debug, Clone)]
pub enum MarginalLaw {
    Grid(GridNd),
    Sampler(MixtureSampler),
}

pub fn mixture_marginal(pi: &Mixture, j: usize) -> Result<MarginalLaw> {
    let (lo, hi) = pi.span();
    let half_width = lo.abs().max(hi.abs());
    let density = |v: &[f64]| pi.log_marginal_pdf(v).exp();
    match j {
        0 => Err(Error::InvalidArgument("j must be at least 1".into())),
        1 => Ok(MarginalLaw::Grid(GridNd::from_fn(1, half_width, GRID_SIDE_1D, density)?)),
        2 => Ok(MarginalLaw::Grid(GridNd::from_fn(2, half_width, GRID_SIDE_2D, density)?)),
        _ => Ok(MarginalLaw::Sampler(pi.sampler(j))),
    }
}

/// ℋ(π) = Σ αᵢ H(fᵢ).
pub fn level3_entropy(pi: &Mixture) -> Result<f64> {
    let mut total = 0.0;
    for (a, f) in &pi.atoms {
        total += a * information::entropy(f)?.value;
    }
    Ok(total)
}

/// ℐ(π) = Σ αᵢ I(fᵢ); +∞ as soon as one atom has infinite Fisher information.
pub fn level3_fisher(pi: &Mixture) -> Result<f64> {
    let mut total = 0.0;
    for (a, f) in &pi.atoms {
        let i = information::fisher(f)?;
        if i.is_infinite() {
            return Ok(f64::INFINITY);
        }
        total += a * i.value;
    }
    Ok(total)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarginalEntropyCurve {
    pub js: Vec<usize>,
    /// H(π_j), normalized by j.
    pub entropies: Vec<f64>,
    pub stderrs: Vec<f64>,
    pub level3: f64,
    /// ℋ(π) − H(π_j).
    pub gaps: Vec<f64>,
    pub monotone: bool,
    pub below_level3: bool,
    /// Log-log fit of the gaps against j.
    pub report: RateReport,
}

/// H(π_j) for each j in `js` by Monte Carlo over `ENTROPY_BATCHES` batches of `per_batch` draws.
///
/// Each draw picks an atom I and V ~ f_I^{⊗j}; the estimator averages
/// (1/j)[log f_I^{⊗j}(V) − log π_j(V)], whose mean is ℋ(π) − H(π_j), and the atom entropies
/// come from quadrature.
pub fn marginal_entropy_curve(pi: &Mixture, js: &[usize], per_batch: usize, rng: &mut LabRng) -> Result<MarginalEntropyCurve> {
    if js.is_empty() || js.contains(&0) {
        return Err(Error::InvalidArgument("js must be a nonempty list of positive integers".into()));
    }
    if per_batch == 0 {
        return Err(Error::InvalidArgument("per_batch must be positive".into()));
    }
    let level3 = level3_entropy(pi)?;
    let master: u64 = rng.random();
    let mut gaps = Vec::with_capacity(js.len());
    let mut stderrs = Vec::with_capacity(js.len());
    for (t, &j) in js.iter().enumerate() {
        let batch_means: Vec<f64> = (0..ENTROPY_BATCHES as u64)
            .into_par_iter()
            .map(|b| {
                let mut r = stream(master, (t as u64) << 32 | b);
                let mut acc = 0.0;
                for _ in 0..per_batch {
                    let f = pick(pi, &mut r);
                    let v = f.sample_n(j, &mut r);
                    let own: f64 = v.iter().map(|&x| f.log_pdf(x)).sum();
                    acc += own - pi.log_marginal_pdf(&v);
                }
                acc / (per_batch * j) as f64
            })
            .collect();
        let m = batch_means.iter().sum::<f64>() / ENTROPY_BATCHES as f64;
        let var = batch_means.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (ENTROPY_BATCHES - 1) as f64;
        gaps.push(m);
        stderrs.push((var / ENTROPY_BATCHES as f64).sqrt());
    }
    let entropies: Vec<f64> = gaps.iter().map(|g| level3 - g).collect();
    let mut order: Vec<usize> = (0..js.len()).collect();
    order.sort_by_key(|&i| js[i]);
    let monotone = order.windows(2).all(|w| {
        let (a, b) = (w[0], w[1]);
        entropies[b] >= entropies[a] - 3.0 * (stderrs[a].powi(2) + stderrs[b].powi(2)).sqrt()
    });
    let below_level3 = entropies.iter().zip(&stderrs).all(|(h, s)| *h <= level3 + 3.0 * s);
    let report = if pi.atoms.len() > 1 {
        loglog_fit_with_stderr(js, &gaps, &stderrs)?
    } else {
        // a single atom has zero gap; the fit is reported flat
        RateReport {
            ns: js.to_vec(),
            values: gaps.clone(),
            stderrs: stderrs.clone(),
            fitted_slope: 0.0,
            fitted_intercept: f64::NEG_INFINITY,
            slope_ci: (0.0, 0.0),
        }
    };
    Ok(MarginalEntropyCurve { js: js.to_vec(), entropies, stderrs, level3, gaps, monotone, below_level3, report })
}

fn pick<'a>(pi: &'a Mixture, rng: &mut LabRng) -> &'a Density {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (a, f) in &pi.atoms {
        acc += a;
        if u < acc {
            return f;
        }
    }
    &pi.atoms[pi.atoms.len() - 1].1
}

/// U(x) = ∫ Φ_s(x − y) ρ(y) dy on a uniform grid, with the constant ∫∫ Φ_s(y − y′) ρ ρ.
struct Potential {
    lo: f64,
    h: f64,
    values: Vec<f64>,
    self_energy: f64,
}

impl Potential {
    fn new(rho: &Density, kernel: &HsKernel, lo: f64, hi: f64) -> Result<Self> {
        let n = ((hi - lo) / POTENTIAL_SPACING).ceil() as usize + 1;
        let h = (hi - lo) / (n - 1) as f64;
        let values = (0..n)
            .into_par_iter()
            .map(|i| {
                let x = lo + i as f64 * h;
                let mut breaks = rho.breakpoints();
                let (a, b) = (breaks[0], breaks[breaks.len() - 1]);
                if x > a && x < b {
                    breaks.push(x);
                }
                breaks.sort_by(f64::total_cmp);
                breaks.dedup();
                let g = |y: f64| kernel.phi_radial(x - y).unwrap_or(0.0) * rho.pdf(y);
                quadrature::integrate_pieces(&g, &breaks, 1e-14, 1e-12)
            })
            .collect::<Result<Vec<_>>>()?;
        let mut p = Self { lo, h, values, self_energy: 0.0 };
        p.self_energy = rho.integrate(|y| p.eval(y) * rho.pdf(y), 1e-14, 1e-12)?;
        Ok(p)
    }

    fn eval(&self, x: f64) -> f64 {
        let n = self.values.len();
        let t = (x - self.lo) / self.h;
        let i = (t.floor() as isize).clamp(1, n as isize - 3) as usize;
        let mut v = 0.0;
        for a in 0..4 {
            let xa = (i + a - 1) as f64;
            let mut l = 1.0;
            for b in 0..4 {
                if a != b {
                    let xb = (i + b - 1) as f64;
                    l *= (t - xb) / (xa - xb);
                }
            }
            v += l * self.values[i + a - 1];
        }
        v
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CauchyProbe {
    pub ns: Vec<usize>,
    /// Monte Carlo means of ‖μ^N_X − ρ‖²_{H^{-s}}.
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
    /// 2Φ_s(0)/N.
    pub bounds: Vec<f64>,
    pub violations: usize,
    pub report: RateReport,
}

/// E‖μ^N_X − ρ‖²_{H^{-s}} for ρ ~ π and X ~ ρ^{⊗N}, the diagonal coupling of π̂^N and π.
pub fn definetti_cauchy_probe(pi: &Mixture, ns: &[usize], s: f64, mc_reps: usize, rng: &mut LabRng) -> Result<CauchyProbe> {
    if !(s > 0.5) {
        return Err(Error::InvalidArgument(format!("need s > 1/2 on the line, got {s}")));
    }
    if ns.is_empty() || ns.contains(&0) || mc_reps < 2 {
        return Err(Error::InvalidArgument("need nonempty positive ns and mc_reps ≥ 2".into()));
    }
    let kernel = HsKernel::new(s, 1)?;
    let (lo, hi) = pi.span();
    let potentials = pi
        .atoms
        .iter()
        .map(|(_, f)| Potential::new(f, &kernel, lo - 1.0, hi + 1.0))
        .collect::<Result<Vec<_>>>()?;
    let master: u64 = rng.random();
    let mut values = Vec::with_capacity(ns.len());
    let mut stderrs = Vec::with_capacity(ns.len());
    for (t, &n) in ns.iter().enumerate() {
        let draws = (0..mc_reps as u64)
            .into_par_iter()
            .map(|r| {
                let mut g = stream(master, (t as u64) << 32 | r);
                let u: f64 = g.random();
                let mut acc = 0.0;
                let mut k = pi.atoms.len() - 1;
                for (i, (a, _)) in pi.atoms.iter().enumerate() {
                    acc += a;
                    if u < acc {
                        k = i;
                        break;
                    }
                }
                let x = pi.atoms[k].1.sample_n(n, &mut g);
                let pot = &potentials[k];
                let mut pair = n as f64 * kernel.phi0();
                for a in 0..n {
                    for b in a + 1..n {
                        pair += 2.0 * kernel.phi_radial(x[a] - x[b])?;
                    }
                }
                let cross: f64 = x.iter().map(|&v| pot.eval(v)).sum();
                let nf = n as f64;
                Ok(pair / (nf * nf) - 2.0 * cross / nf + pot.self_energy)
            })
            .collect::<Result<Vec<f64>>>()?;
        let m = draws.iter().sum::<f64>() / mc_reps as f64;
        let var = draws.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (mc_reps - 1) as f64;
        values.push(m);
        stderrs.push((var / mc_reps as f64).sqrt());
    }
    let bounds: Vec<f64> = ns.iter().map(|&n| 2.0 * kernel.phi0() / n as f64).collect();
    let violations = values.iter().zip(&stderrs).zip(&bounds).filter(|((v, s), b)| **v > **b + 3.0 * **s).count();
    let report = loglog_fit_with_stderr(ns, &values, &stderrs)?;
    Ok(CauchyProbe { ns: ns.to_vec(), values, stderrs, bounds, violations, report })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::rng::seeded;

    fn two_atoms(a: f64) -> Mixture {
        let g = Density::standard_gaussian();
        Mixture::new(vec![(0.5, g.shifted(-a)), (0.5, g.shifted(a))]).unwrap()
    }

    #[test]
    fn validation() {
        let g = Density::standard_gaussian();
        assert!(Mixture::new(vec![(0.5, g.clone()), (0.5, g.clone())]).is_err());
        assert!(matches!(Mixture::new(vec![(0.6, g.clone()), (0.5, g.shifted(1.0))]), Err(Error::WeightSum { .. })));
        assert!(Mixture::new(vec![]).is_err());
    }

    #[test]
    fn level3_values() {
        let h = level3_entropy(&Mixture::single(Density::standard_gaussian())).unwrap();
        assert!((h + 1.418_938_533_204_672_7).abs() < 1e-9);
        let pi = two_atoms(1.0);
        assert!((level3_entropy(&pi).unwrap() - h).abs() < 1e-9);
        assert!((level3_fisher(&pi).unwrap() - 1.0).abs() < 1e-9);
        let u = Mixture::single(Density::uniform_standard());
        assert_eq!(level3_fisher(&u).unwrap(), f64::INFINITY);
    }

    #[test]
    fn marginals_are_consistent() {
        let pi = two_atoms(1.0);
        let (MarginalLaw::Grid(p1), MarginalLaw::Grid(p2)) =
            (mixture_marginal(&pi, 1).unwrap(), mixture_marginal(&pi, 2).unwrap())
        else {
            panic!("grid marginals expected");
        };
        assert!((p1.mass() - 1.0).abs() < 1e-6);
        let m = p2.marginal(1).unwrap();
        // p2 has a coarser axis; compare at its own nodes
        let bimodal = Density::mixture(vec![
            crate::base::density::Component { weight: 0.5, mean: -1.0, sd: 1.0 },
            crate::base::density::Component { weight: 0.5, mean: 1.0, sd: 1.0 },
        ])
        .unwrap();
        let h = m.spacing();
        for (i, v) in m.values().iter().enumerate() {
            let x = -13.0 + i as f64 * h;
            assert!((v - bimodal.pdf(x)).abs() < 1e-6);
        }
        assert!(matches!(mixture_marginal(&pi, 3).unwrap(), MarginalLaw::Sampler(_)));
    }

    #[test]
    fn fisher_is_monotone_along_marginals() {
        let pi = two_atoms(1.5);
        let (MarginalLaw::Grid(p1), MarginalLaw::Grid(p2)) =
            (mixture_marginal(&pi, 1).unwrap(), mixture_marginal(&pi, 2).unwrap())
        else {
            panic!("grid marginals expected");
        };
        let (i1, i2) = (p1.fisher(), p2.fisher());
        assert!(i1 <= i2 + 1e-6 && i2 <= level3_fisher(&pi).unwrap() + 1e-6, "{i1} {i2}");
    }

    #[test]
    fn single_atom_curve_is_flat() {
        let pi = Mixture::single(Density::bimodal());
        let c = marginal_entropy_curve(&pi, &[1, 4, 16], 200, &mut seeded(2)).unwrap();
        assert!(c.gaps.iter().all(|g| g.abs() < 1e-12));
        assert!(c.monotone && c.below_level3);
    }

    #[test]
    fn single_atom_probe_matches_exact_law() {
        let g = Density::standard_gaussian();
        let k = HsKernel::new(1.0, 1).unwrap();
        // v − v′ ~ N(0, 2)
        let d2 = Density::gaussian(0.0, 2f64.sqrt()).unwrap();
        let e = d2.integrate(|z| k.phi_radial(z).unwrap() * d2.pdf(z), 1e-14, 1e-12).unwrap();
        let p = definetti_cauchy_probe(&Mixture::single(g), &[4, 8, 16, 32], 1.0, 4000, &mut seeded(8)).unwrap();
        for (i, &n) in p.ns.iter().enumerate() {
            let exact = (k.phi0() - e) / n as f64;
            assert!((p.values[i] - exact).abs() < 4.0 * p.stderrs[i], "N={n}: {} vs {exact}", p.values[i]);
        }
    }
}
