//! The experiment registry: one named experiment per acceptance criterion.

use std::f64::consts::PI;
use std::time::Instant;

use rand::Rng;

use crate::base::density::Density;
use crate::base::pmf::SymmetricPmf;
use crate::base::rate::{loglog_fit, loglog_fit_with_stderr};
use crate::base::rng::{seeded, LabRng};
use crate::base::types::{Configuration, DiscreteMeasure};
use crate::chaos::{self, Coupling, SigmaSampler};
use crate::clt;
use crate::error::{Error, Result};
use crate::information::{self, GridNd};
use crate::kacsphere::{self, cache, table::DEFAULT_DU, PartitionTable};
use crate::mixtures::{self, MarginalLaw, Mixture};
use crate::sobolev::{self, oracle::hs_dist_sq_fourier, HsKernel};
use crate::transport;

use super::config::{DensityChoice, ExperimentConfig};
use super::report::Recorder;

pub type RunFn = fn(&ExperimentConfig, &mut Recorder) -> Result<()>;

pub struct Experiment {
    pub name: &'static str,
    pub anchor: &'static str,
    pub criterion: usize,
    pub summary: &'static str,
    pub defaults: fn() -> ExperimentConfig,
    pub run: RunFn,
}

pub static EXPERIMENTS: [Experiment; 9] = [
    Experiment {
        name: "identities",
        anchor: "prop:equivW1-2",
        criterion: 1,
        summary: "exact tensorization, pushforward, assignment and marginal identities",
        defaults: identities_defaults,
        run: identities,
    },
    Experiment {
        name: "kernel-oracles",
        anchor: "eq:H-s",
        criterion: 2,
        summary: "H^{-s} kernel and distance against closed forms and Fourier quadrature; W₁/W₂ comparisons",
        defaults: kernel_defaults,
        run: kernel_oracles,
    },
    Experiment {
        name: "poincare-rate",
        anchor: "estim:Poincaré2",
        criterion: 3,
        summary: "uniform law on the Kac sphere against γ^{⊗N}: L¹ bound and radial-projection rate",
        defaults: poincare_defaults,
        run: poincare_rate,
    },
    Experiment {
        name: "clt-rate",
        anchor: "estim:localTCL2",
        criterion: 4,
        summary: "local CLT sup-norm error of renormalized convolution powers",
        defaults: clt_defaults,
        run: clt_rate,
    },
    Experiment {
        name: "conditioned-products",
        anchor: "eq:ChaosEstimFN",
        criterion: 5,
        summary: "first marginal of the conditioned product against f",
        defaults: sphere_defaults,
        run: conditioned_products,
    },
    Experiment {
        name: "entropy-chaos",
        anchor: "ineq:EntropCvgce1",
        criterion: 6,
        summary: "|H(F^N|σ^N) − H(f|γ)| from the partition-function identity",
        defaults: sphere_defaults,
        run: entropy_chaos,
    },
    Experiment {
        name: "information",
        anchor: "ineq-HWI",
        criterion: 7,
        summary: "entropy and Fisher closed forms, tensorization, superadditivity, HWI, k-NN",
        defaults: information_defaults,
        run: information_suite,
    },
    Experiment {
        name: "omega1-counterexample",
        anchor: "Th:EquivChaos",
        criterion: 8,
        summary: "½g^{⊗N}+½h^{⊗N}: Ω₁ vanishes while Ω₂ stays away from 0",
        defaults: counterexample_defaults,
        run: omega1_counterexample,
    },
    Experiment {
        name: "mixtures",
        anchor: "eq:Rob&Ruelle",
        criterion: 9,
        summary: "level-3 entropy, marginal entropy curve and the De Finetti Cauchy probe",
        defaults: mixtures_defaults,
        run: mixtures_suite,
    },
];

pub fn find(name: &str) -> Result<&'static Experiment> {
    EXPERIMENTS.iter().find(|e| e.name == name).ok_or_else(|| Error::UnknownExperiment(name.to_string()))
}

/// Runs `exp` under `cfg`, collecting rows, fits and checks.
pub fn execute(exp: &Experiment, cfg: &ExperimentConfig) -> Result<Recorder> {
    let mut rec = Recorder::new(exp.name);
    (exp.run)(cfg, &mut rec)?;
    Ok(rec)
}

fn powers_of_two(lo: usize, hi: usize) -> Vec<usize> {
    (0..).map(|k| lo << k).take_while(|&n| n <= hi).collect()
}

fn cached_table(f: &Density, max_n: usize) -> Result<PartitionTable> {
    cache::load_or_build(f, max_n, DEFAULT_DU, &cache::cache_dir())
}

fn random_line_measure(rng: &mut LabRng, atoms: usize, lo: f64, hi: f64) -> Result<DiscreteMeasure> {
    let pts: Vec<f64> = (0..atoms).map(|_| rng.random_range(lo..hi)).collect();
    let w: Vec<f64> = (0..atoms).map(|_| rng.random_range(0.05..1.0)).collect();
    DiscreteMeasure::normalized(1, 1, pts, w)
}

fn flag(ok: bool) -> &'static str {
    if ok {
        "pass"
    } else {
        "fail"
    }
}

// 1 ──────────────────────────────────────────────────────────────────────────

fn identities_defaults() -> ExperimentConfig {
    ExperimentConfig { ns: vec![2, 3, 4], mc_reps: 200, ..ExperimentConfig::base("identities") }
}

/// min over all permutations, by Heap's algorithm.
fn w1_config_bruteforce(x: &Configuration, y: &Configuration) -> f64 {
    let n = x.n_particles();
    let mut perm: Vec<usize> = (0..n).collect();
    let cost = |p: &[usize]| (0..n).map(|i| transport::d_e(x.particle(i), y.particle(p[i]))).sum::<f64>() / n as f64;
    let mut best = cost(&perm);
    let mut c = vec![0usize; n];
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.min(cost(&perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    best
}

fn identities(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<()> {
    const TOL: f64 = 1e-9;
    let mut rng = seeded(cfg.seed);

    let mut worst = 0.0f64;
    for &n in &cfg.ns {
        let mut at_n = 0.0f64;
        for _ in 0..10 {
            let f = random_line_measure(&mut rng, 3, 0.0, 2.0)?;
            let g = random_line_measure(&mut rng, 3, 0.0, 2.0)?;
            let (l, r) = transport::tensorization_check(&f, &g, n)?;
            at_n = at_n.max((l - r).abs());
        }
        rec.row(n, "tensorization_max_abs_diff", at_n, 0.0, "pairs=10");
        worst = worst.max(at_n);
    }
    rec.check("tensorization W1(f^N,g^N) = W1(f,g)", worst <= TOL, format!("max |lhs−rhs| = {worst:e}"));

    let mut worst = 0.0f64;
    for _ in 0..20 {
        let f = random_line_measure(&mut rng, 3, 0.0, 2.0)?;
        let g = random_line_measure(&mut rng, 3, 0.0, 2.0)?;
        let h = random_line_measure(&mut rng, 3, 0.0, 2.0)?;
        let (l, r) = transport::shift_tensorization_check(&f, &g, &h)?;
        worst = worst.max((l - r).abs());
    }
    rec.row(2, "shift_tensorization_max_abs_diff", worst, 0.0, "triples=20");
    rec.check("2 W1(f⊗h,g⊗h) = W1(f,g)", worst <= TOL, format!("max |lhs−rhs| = {worst:e}"));

    let mut worst = 0.0f64;
    for (s, n) in [(2usize, 3usize), (2, 10), (3, 6), (4, 5), (6, 4), (10, 3)] {
        let alphabet: Vec<f64> = (0..s).map(|i| 0.45 * i as f64).collect();
        let f = SymmetricPmf::random(alphabet.clone(), n, &mut rng)?;
        let g = SymmetricPmf::random(alphabet, n, &mut rng)?;
        let (l, r) = chaos::pushforward_identity_exact(&f, &g)?;
        let (z1, z2) = chaos::pushforward_identity_exact(&f, &f)?;
        let d = (l - r).abs().max(z1.abs()).max(z2.abs());
        rec.row(n, "pushforward_abs_diff", (l - r).abs(), 0.0, &format!("S={s};states={}", s.pow(n as u32)));
        worst = worst.max(d);
    }
    rec.check("pushforward W1(F,G) = W1(F^,G^)", worst <= TOL, format!("max |lhs−rhs| = {worst:e}"));

    let mut worst = 0.0f64;
    for n in 1..=7 {
        for t in 0..10 {
            let dim = 1 + t % 2;
            let x = Configuration::new(dim, (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect())?;
            let y = Configuration::new(dim, (0..n * dim).map(|_| rng.random_range(-1.0..1.0)).collect())?;
            let fast = transport::w1_config(&x, &y)?.0;
            worst = worst.max((fast - w1_config_bruteforce(&x, &y)).abs());
        }
    }
    rec.row(7, "w1_config_vs_bruteforce_max_abs_diff", worst, 0.0, "N=1..7;configs=70");
    rec.check("w1_config equals brute force (N ≤ 7)", worst <= TOL, format!("max diff = {worst:e}"));

    let mut first = 0.0f64;
    let mut violations = 0;
    let mut worst_ratio = 0.0f64;
    for t in 0..cfg.mc_reps {
        let s = 2 + t % 2;
        let n = 2 + t % 5;
        let alphabet: Vec<f64> = (0..s).map(|i| i as f64).collect();
        let p = SymmetricPmf::random(alphabet, n, &mut rng)?;
        first = first.max(chaos::grunbaum_exact(&p, 1)?.tv);
        for j in 2..=n.min(3) {
            let r = chaos::grunbaum_exact(&p, j)?;
            worst_ratio = worst_ratio.max(r.tv / r.bound);
            if !r.holds {
                violations += 1;
            }
        }
    }
    rec.row(1, "grunbaum_j1_max_tv", first, 0.0, &format!("pmfs={}", cfg.mc_reps));
    rec.row(2, "grunbaum_max_tv_over_bound", worst_ratio, 0.0, &format!("pmfs={};j=2..3", cfg.mc_reps));
    rec.check("Grunbaum j=1 marginals equal", first <= TOL, format!("max tv = {first:e}"));
    rec.check(
        "Grunbaum tv ≤ 2j(j−1)/N",
        violations == 0,
        format!("{violations} violations over {} pmfs; max tv/bound = {worst_ratio:.4}", cfg.mc_reps),
    );
    Ok(())
}

// 2 ──────────────────────────────────────────────────────────────────────────

fn kernel_defaults() -> ExperimentConfig {
    ExperimentConfig { ns: vec![50], mc_reps: 500, ..ExperimentConfig::base("kernel-oracles") }
}

fn kernel_oracles(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<()> {
    let mut rng = seeded(cfg.seed);
    let k1 = HsKernel::new(1.0, 1)?;
    let mut worst = 0.0f64;
    for i in 0..=4000 {
        let z = -20.0 + 40.0 * i as f64 / 4000.0;
        worst = worst.max((sobolev::phi_s(&[z], &k1)? - PI * (-z.abs()).exp()).abs());
    }
    rec.row(1, "phi1_max_abs_err", worst, 0.0, "|z|<=20;points=4001");
    rec.check("Φ₁(z) = π e^{−|z|} on |z| ≤ 20", worst <= 1e-6, format!("max error {worst:e}"));

    let kernel = HsKernel::new(cfg.s, 1)?;
    let pairs = cfg.ns[0];
    let g = Density::standard_gaussian();
    let mut worst = 0.0f64;
    for _ in 0..pairs {
        let (a, b) = (rng.random_range(3..12), rng.random_range(3..12));
        let mu = DiscreteMeasure::uniform_line(&g.sample_n(a, &mut rng))?;
        let nu = DiscreteMeasure::uniform_line(&g.sample_n(b, &mut rng))?;
        let direct = sobolev::hs_dist_sq(&mu, &nu, &kernel)?;
        let fourier = hs_dist_sq_fourier(&mu, &nu, cfg.s)?;
        worst = worst.max((direct - fourier).abs() / fourier);
    }
    rec.row(pairs, "hs_dist_sq_max_rel_err", worst, 0.0, &format!("s={}", cfg.s));
    rec.check("hs_dist_sq matches Fourier quadrature", worst <= 1e-4, format!("max relative error {worst:e} over {pairs} pairs"));

    let k = cfg.k;
    let (mut v12, mut vint) = (0, 0);
    let mut worst_ratio = 0.0f64;
    for _ in 0..cfg.mc_reps {
        let (a, b) = (rng.random_range(2..10), rng.random_range(2..10));
        let mu = random_line_measure(&mut rng, a, -3.0, 3.0)?;
        let nu = random_line_measure(&mut rng, b, -3.0, 3.0)?;
        let w1 = transport::w1_line(&mu, &nu, 1.0)?;
        let w2 = transport::w2_line(&mu, &nu)?;
        if w1 > w2 + 1e-12 {
            v12 += 1;
        }
        let m = mu.bracket_moment(k) + nu.bracket_moment(k);
        let bound = 2f64.powf(1.5) * m.powf(1.0 / k) * w1.powf(0.5 - 1.0 / k);
        if w2 > bound + 1e-12 {
            vint += 1;
        }
        if bound > 0.0 {
            worst_ratio = worst_ratio.max(w2 / bound);
        }
    }
    rec.row(cfg.mc_reps, "w1_le_w2_violations", v12 as f64, 0.0, "");
    rec.row(cfg.mc_reps, "moment_interpolation_violations", vint as f64, 0.0, &format!("k={k};max_ratio={worst_ratio:.4}"));
    rec.check("W₁ ≤ W₂", v12 == 0, format!("{v12} violations over {} pairs", cfg.mc_reps));
    rec.check(
        "W₂ ≤ 2^{3/2} M_k^{1/k} W₁^{1/2−1/k}",
        vint == 0,
        format!("{vint} violations over {} pairs; max W₂/bound = {worst_ratio:.4}", cfg.mc_reps),
    );
    Ok(())
}

// 3 ──────────────────────────────────────────────────────────────────────────

fn poincare_defaults() -> ExperimentConfig {
    ExperimentConfig { ns: powers_of_two(16, 512), mc_reps: 200, ..ExperimentConfig::base("poincare-rate") }
}

fn poincare_rate(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<()> {
    let start = Instant::now();
    let mut violations = 0;
    for n in 8..=256usize {
        let l1 = kacsphere::sigma_marginal_l1_to_gaussian(n)?;
        let bound = 8.0 / (n as f64 - 4.0);
        if l1 > bound {
            violations += 1;
        }
        if n.is_power_of_two() {
            rec.row(n, "sigma1_gamma_l1", l1, 0.0, &format!("bound={bound:e}"));
        }
    }
    rec.check("‖σ^N_1 − γ‖_L¹ ≤ 8/(N−4), N = 8..256", violations == 0, format!("{violations} violations"));

    let mut rng = seeded(cfg.seed);
    let g = Density::standard_gaussian();
    let (mut values, mut errs) = (Vec::new(), Vec::new());
    for &n in &cfg.ns {
        let e = chaos::omega_n(&SigmaSampler { n }, &g, cfg.mc_reps, Coupling::Synchronous, &mut rng)?;
        rec.row(n, "omega_N_radial_projection", e.value, e.stderr, "upper_bound");
        let q = chaos::omega_j_sigma_quadrature(n, 2)?;
        rec.row(n, "omega_2_quadrature", q.value, 0.0, &format!("bound={:e}", 5.0 / (n as f64 - 5.0)));
        values.push(e.value);
        errs.push(e.stderr);
    }
    let fit = loglog_fit_with_stderr(&cfg.ns, &values, &errs)?;
    rec.fit("omega_N_radial_projection", &fit, Some((-0.65, -0.35)));
    rec.check(
        "radial-projection slope in (−0.65, −0.35)",
        fit.slope_in(-0.65, -0.35),
        format!("slope {:.4}", fit.fitted_slope),
    );
    let secs = start.elapsed().as_secs_f64();
    rec.check("runtime ≤ 3 min", secs <= 180.0, format!("{secs:.1} s"));
    Ok(())
}

// 4 ──────────────────────────────────────────────────────────────────────────

fn clt_defaults() -> ExperimentConfig {
    ExperimentConfig { ns: powers_of_two(4, 512), ..ExperimentConfig::base("clt-rate") }
}

/// The "bimodal" base of the CLT suite: skewed, centered, two narrow bumps.
pub fn clt_bimodal() -> Density {
    Density::two_point_like(0.25, 0.5).expect("valid constants")
}

fn clt_rate(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<()> {
    let choices = match &cfg.density {
        Some(c) => vec![c.clone()],
        None => vec![DensityChoice::Uniform, DensityChoice::Bimodal],
    };
    for choice in &choices {
        let (base, oracle_base) = match choice {
            DensityChoice::Gaussian => (clt::standard_base(&Density::standard_gaussian())?, None),
            DensityChoice::Uniform => {
                let b = clt::standard_base(&Density::uniform_standard())?;
                (b.clone(), Some(b))
            }
            DensityChoice::Bimodal => (
                clt::standard_base(&clt_bimodal())?,
                Some(crate::base::grid::GridDensity::standardized_from(&clt_bimodal(), clt::DEFAULT_HALF_WIDTH, 1024)?),
            ),
            DensityChoice::Custom(p) => (DensityChoice::load_grid(p)?, None),
        };
        let run = clt::clt_run(&base, &cfg.ns)?;
        let label = choice.to_string();
        for (i, &n) in run.ns.iter().enumerate() {
            rec.row(n, "sup_error", run.sup_errors[i], 0.0, &format!("base={label}"));
        }
        if matches!(choice, DensityChoice::Gaussian) {
            continue;
        }
        rec.fit(&format!("sup_error[{label}]"), &run.report, Some((-0.65, -0.35)));
        rec.check(
            &format!("sup-error slope in (−0.65, −0.35) for {label}"),
            run.report.slope_in(-0.65, -0.35),
            format!("slope {:.4}", run.report.fitted_slope),
        );
        if let Some(ob) = oracle_base {
            let mut worst = 0.0f64;
            for n in [2, 3] {
                let a = clt::iterate_clt(&ob, n)?;
                let b = clt::oracle::real_space_power(&ob, n)?;
                let d = a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
                rec.row(n, "real_vs_fourier_max_abs_diff", d, 0.0, &format!("base={label};M={}", ob.n_points()));
                worst = worst.max(d);
            }
            rec.check(
                &format!("real-space and Fourier powers agree for {label}"),
                worst <= 1e-6,
                format!("max difference {worst:e}"),
            );
        }
    }
    let gauss = clt::clt_run(&clt::standard_base(&Density::standard_gaussian())?, &cfg.ns)?;
    let worst = gauss.sup_errors.iter().cloned().fold(0.0, f64::max);
    for (i, &n) in gauss.ns.iter().enumerate() {
        rec.row(n, "sup_error", gauss.sup_errors[i], 0.0, "base=gaussian");
    }
    rec.check("Gaussian base sup-error ≤ 1e-5", worst <= 1e-5, format!("max {worst:e}"));
    if cfg.density.is_none() {
        let sym = clt::clt_run(&clt::standard_base(&Density::bimodal())?, &cfg.ns)?;
        for (i, &n) in sym.ns.iter().enumerate() {
            rec.row(n, "sup_error", sym.sup_errors[i], 0.0, "base=symmetric-bimodal;reported");
        }
        rec.fit("sup_error[symmetric-bimodal]", &sym.report, None);
    }
    Ok(())
}

// 5, 6 ───────────────────────────────────────────────────────────────────────

fn sphere_defaults() -> ExperimentConfig {
    ExperimentConfig { ns: powers_of_two(32, 1024), ..ExperimentConfig::base("conditioned-products") }
}

fn sphere_density(cfg: &ExperimentConfig) -> Result<Density> {
    cfg.density.clone().unwrap_or(DensityChoice::Bimodal).analytic()
}

fn conditioned_products(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<()> {
    let f = sphere_density(cfg)?;
    let max_n = *cfg.ns.last().expect("validated");
    let table = cached_table(&f, max_n)?;
    let mut values = Vec::new();
    for &n in &cfg.ns {
        let l1 = kacsphere::conditioned_marginal_l1(n, &table)?;
        rec.row(n, "theta1_minus_1_f_l1", l1, 0.0, &format!("density={}", f.id()));
        rec.row(n, "theta1_bulk_sup_dev", kacsphere::theta_bulk_deviation(n, &table, 201)?, 0.0, "|v|<=N^(1/8)");
        values.push(l1);
    }
    let fit = loglog_fit(&cfg.ns, &values)?;
    rec.fit("theta1_minus_1_f_l1", &fit, Some((f64::NEG_INFINITY, -0.4)));
    rec.check("‖(θ_{N,1}−1)f‖_L¹ slope ≤ −0.4", fit.fitted_slope <= -0.4, format!("slope {:.4}", fit.fitted_slope));

    let g = Density::standard_gaussian();
    let gt = cached_table(&g, max_n)?;
    let mut worst = 0.0f64;
    for &n in &cfg.ns {
        let r = 4.0;
        let mut at_n = 0.0f64;
        for i in 0..=240 {
            let v = -r + 2.0 * r * i as f64 / 240.0;
            let th = kacsphere::theta(n, &[v], &gt)?;
            let ratio = kacsphere::sigma_marginal_pdf(n, 1, &[v])? / g.pdf(v);
            at_n = at_n.max((th / ratio - 1.0).abs());
        }
        rec.row(n, "gaussian_theta_vs_sigma_ratio", at_n, 0.0, "|v|<=4");
        worst = worst.max(at_n);
    }
    rec.check("f = γ: θ = σ^N_1/γ to 1e-3", worst <= 1e-3, format!("max relative deviation {worst:e}"));
    Ok(())
}

fn entropy_chaos(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<()> {
    let f = sphere_density(cfg)?;
    let max_n = *cfg.ns.last().expect("validated");
    let table = cached_table(&f, max_n)?;
    let mut values = Vec::new();
    for &n in &cfg.ns {
        let gap = kacsphere::entropy_chaos_gap(n, &table)?;
        rec.row(n, "entropy_chaos_gap", gap.gap, 0.0, &format!("density={};signed={:e}", f.id(), gap.signed));
        values.push(gap.gap);
    }
    let fit = loglog_fit(&cfg.ns, &values)?;
    rec.fit("entropy_chaos_gap", &fit, Some((-0.65, -0.35)));
    rec.check("entropy gap slope in (−0.65, −0.35)", fit.slope_in(-0.65, -0.35), format!("slope {:.4}", fit.fitted_slope));

    let gt = cached_table(&Density::standard_gaussian(), max_n)?;
    let mut worst = 0.0f64;
    for &n in &cfg.ns {
        let gap = kacsphere::entropy_chaos_gap(n, &gt)?.gap;
        rec.row(n, "entropy_chaos_gap", gap, 0.0, "density=gaussian");
        worst = worst.max(gap);
    }
    rec.check("f = γ gives gap ≤ 1e-6", worst <= 1e-6, format!("max gap {worst:e}"));
    Ok(())
}

// 7 ──────────────────────────────────────────────────────────────────────────

fn information_defaults() -> ExperimentConfig {
    ExperimentConfig { ns: vec![1, 2, 3], mc_reps: 1000, reference_size: 100_000, ..ExperimentConfig::base("information") }
}

fn information_suite(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<()> {
    const H_GAMMA: f64 = -1.418939;
    let mut rng = seeded(cfg.seed);
    let g = Density::standard_gaussian();
    let h = information::entropy(&g)?.value;
    let i = information::fisher(&g)?.value;
    rec.row(1, "entropy_gaussian", h, 0.0, "quadrature");
    rec.row(1, "fisher_gaussian", i, 0.0, "quadrature");
    rec.check("H(γ) = −1.418939", (h - H_GAMMA).abs() <= 1e-6, format!("{h:.9}"));
    rec.check("I(γ) = 1", (i - 1.0).abs() <= 1e-6, format!("{i:.9}"));

    let mut worst = 0.0f64;
    for f in [g.clone(), Density::bimodal()] {
        let one = GridNd::from_fn(1, 12.0, 256, |x| f.pdf(x[0]))?.normalized()?;
        for &j in cfg.ns.iter().filter(|&&j| (2..=3).contains(&j)) {
            let side = if j == 2 { 256 } else { 64 };
            let base = if j == 2 { one.clone() } else { GridNd::from_fn(1, 12.0, side, |x| f.pdf(x[0]))?.normalized()? };
            let prod = GridNd::from_fn(j, 12.0, side, |x| x.iter().map(|&v| f.pdf(v)).product())?.normalized()?;
            let dh = (prod.entropy() - base.entropy()).abs();
            let di = (prod.fisher() - base.fisher()).abs();
            rec.row(j, "tensorization_entropy_abs_diff", dh, 0.0, &format!("density={}", f.id()));
            rec.row(j, "tensorization_fisher_abs_diff", di, 0.0, &format!("density={}", f.id()));
            worst = worst.max(dh).max(di);
        }
    }
    rec.check("H(f^{⊗j}) = H(f) and I(f^{⊗j}) = I(f)", worst <= 1e-6, format!("max difference {worst:e}"));

    let mut violations = 0;
    for _ in 0..cfg.mc_reps {
        let alphabet: Vec<f64> = (0..3).map(|k| k as f64 * 0.5).collect();
        let m = SymmetricPmf::random(alphabet, 2, &mut rng)?.to_measure()?;
        let (lhs, rhs) = information::superadditivity_check(&m, 1, 1)?;
        if lhs < rhs - 1e-12 {
            violations += 1;
        }
    }
    rec.row(2, "superadditivity_violations", violations as f64, 0.0, &format!("pairs={}", cfg.mc_reps));
    rec.check("entropy superadditivity", violations == 0, format!("{violations} violations over {} pairs", cfg.mc_reps));

    let mut violations = 0;
    for _ in 0..50 {
        let f = Density::gaussian(rng.random_range(-2.0..2.0), rng.random_range(0.3..3.0))?;
        let q = Density::gaussian(rng.random_range(-2.0..2.0), rng.random_range(0.3..3.0))?;
        if !information::hwi_check(&f, &q, 1.0)?.holds {
            violations += 1;
        }
    }
    rec.row(1, "hwi_violations", violations as f64, 0.0, "pairs=50;C_E=1");
    rec.check("HWI on Gaussian pairs", violations == 0, format!("{violations} violations over 50 pairs"));

    let samples = g.sample_n(cfg.reference_size, &mut rng);
    let knn = information::entropy_knn(&samples, 1)?;
    let closed = information::entropy_closed_form(&g).expect("Gaussian closed form");
    rec.row(cfg.reference_size, "knn_entropy_gaussian", knn.value.value, knn.stderr, "k=1");
    rec.check(
        "k-NN entropy within 0.05",
        (knn.value.value - closed).abs() <= 0.05,
        format!("{:.5} vs {closed:.5}", knn.value.value),
    );
    Ok(())
}

// 8 ──────────────────────────────────────────────────────────────────────────

fn counterexample_defaults() -> ExperimentConfig {
    ExperimentConfig {
        ns: powers_of_two(32, 512),
        mc_reps: 65_536,
        reference_size: 512,
        ..ExperimentConfig::base("omega1-counterexample")
    }
}

fn omega1_counterexample(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<()> {
    let mut rng = seeded(cfg.seed);
    let g = Density::standard_gaussian();
    let h = g.shifted(2.0);
    let r = chaos::omega1_counterexample(&g, &h, &cfg.ns, cfg.mc_reps, cfg.reference_size, &mut rng)?;
    for (a, b) in r.omega1.iter().zip(&r.omega2) {
        rec.row(a.n, "omega_1", a.value, a.stderr, &format!("pooled={}", a.mc_reps));
        rec.row(b.n, "omega_2", b.value, b.stderr, &format!("pooled={}", b.mc_reps));
    }
    let max1 = r.omega1.iter().map(|e| e.value).fold(0.0, f64::max);
    let min2 = r.omega2.iter().map(|e| e.value).fold(f64::INFINITY, f64::min);
    rec.check("Ω̂₁ ≤ 0.02 for all N", max1 <= 0.02, format!("max Ω̂₁ = {max1:.5}"));
    rec.check("Ω̂₂ ≥ 0.05 for all N", min2 >= 0.05, format!("min Ω̂₂ = {min2:.5}"));
    rec.check("Ω̂₂ > 5 Ω̂₁ at N = 256", r.ratio_holds, format!("ratio {:.2}", r.ratio_at_256));
    Ok(())
}

// 9 ──────────────────────────────────────────────────────────────────────────

fn mixtures_defaults() -> ExperimentConfig {
    ExperimentConfig { ns: powers_of_two(8, 512), mc_reps: 200, ..ExperimentConfig::base("mixtures") }
}

pub const ENTROPY_JS: [usize; 7] = [1, 2, 4, 8, 16, 32, 64];
const ENTROPY_DRAWS_PER_BATCH: usize = 1000;

fn mixtures_suite(cfg: &ExperimentConfig, rec: &mut Recorder) -> Result<()> {
    let mut rng = seeded(cfg.seed);
    let g = Density::standard_gaussian();
    let pi = Mixture::new(vec![(0.5, g.shifted(-1.0)), (0.5, g.shifted(1.0))])?;
    let pi2 = Mixture::new(vec![(0.25, Density::gaussian(0.0, 2.0)?), (0.75, Density::bimodal())])?;
    let theta = 0.3;
    let lhs = mixtures::level3_entropy(&pi.combine(theta, &pi2)?)?;
    let rhs = theta * mixtures::level3_entropy(&pi)? + (1.0 - theta) * mixtures::level3_entropy(&pi2)?;
    rec.row(1, "level3_affinity_abs_diff", (lhs - rhs).abs(), 0.0, "theta=0.3");
    rec.check("ℋ is affine", (lhs - rhs).abs() <= 1e-12, format!("|difference| = {:e}", (lhs - rhs).abs()));

    if let (MarginalLaw::Grid(p1), MarginalLaw::Grid(p2)) = (mixtures::mixture_marginal(&pi, 1)?, mixtures::mixture_marginal(&pi, 2)?) {
        rec.row(1, "fisher_marginal", p1.fisher(), 0.0, "grid");
        rec.row(2, "fisher_marginal", p2.fisher(), 0.0, "grid");
        rec.row(0, "level3_fisher", mixtures::level3_fisher(&pi)?, 0.0, "");
    }

    let sep = Mixture::new(vec![(0.5, g.shifted(-3.0)), (0.5, g.shifted(3.0))])?;
    let curve = mixtures::marginal_entropy_curve(&sep, &ENTROPY_JS, ENTROPY_DRAWS_PER_BATCH, &mut rng)?;
    for (t, &j) in curve.js.iter().enumerate() {
        rec.row(j, "marginal_entropy", curve.entropies[t], curve.stderrs[t], &format!("level3={:e}", curve.level3));
        rec.row(j, "entropy_gap", curve.gaps[t], curve.stderrs[t], "");
    }
    rec.check("H(π_j) nondecreasing within 3 stderr", curve.monotone, flag(curve.monotone));
    rec.check("H(π_j) ≤ ℋ(π) within 3 stderr", curve.below_level3, flag(curve.below_level3));
    rec.fit("entropy_gap", &curve.report, Some((-1.2, -0.8)));
    rec.check(
        "gap exponent in (−1.2, −0.8)",
        curve.report.slope_in(-1.2, -0.8),
        format!("slope {:.4}", curve.report.fitted_slope),
    );

    let probe = mixtures::definetti_cauchy_probe(&sep, &cfg.ns, cfg.s, cfg.mc_reps, &mut rng)?;
    for (t, &n) in probe.ns.iter().enumerate() {
        rec.row(n, "hs_sq_distance", probe.values[t], probe.stderrs[t], &format!("bound={:e};s={}", probe.bounds[t], cfg.s));
    }
    rec.fit("hs_sq_distance", &probe.report, Some((-1.1, -0.9)));
    rec.check(
        "Cauchy probe slope in (−1.1, −0.9)",
        probe.report.slope_in(-1.1, -0.9),
        format!("slope {:.4}", probe.report.fitted_slope),
    );
    rec.check("2Φ_s(0)/N never violated", probe.violations == 0, format!("{} violations", probe.violations));
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn registry_is_one_to_one() {
        let mut crit: Vec<usize> = EXPERIMENTS.iter().map(|e| e.criterion).collect();
        crit.sort_unstable();
        assert_eq!(crit, (1..=9).collect::<Vec<_>>());
        for e in &EXPERIMENTS {
            assert_eq!(find(e.name).unwrap().name, e.name);
            assert!((e.defaults)().validate().is_ok());
        }
        assert!(matches!(find("nope"), Err(Error::UnknownExperiment(_))));
    }

    #[test]
    fn bruteforce_agrees_on_a_small_case() {
        let x = Configuration::from_line(vec![0.0, 0.2, 3.0]).unwrap();
        let y = Configuration::from_line(vec![3.1, 0.1, 0.25]).unwrap();
        assert!((w1_config_bruteforce(&x, &y) - (0.1 + 0.05 + 0.1) / 3.0).abs() < 1e-12);
    }
}
