//! The bimodal mixture ½N(−a, s²) + ½N(a, s²) has Σ v_i² / s² ~ noncentral χ²_k(kλ) with
//! λ = a²/s², which gives an exact reference for the tabulated partition functions.

use chaoslab::base::density::Density;
use chaoslab::kacsphere::table::log_chi2;
use chaoslab::kacsphere::{self, PartitionTable};
use statrs::function::gamma::ln_gamma;

fn log_sum_exp(xs: &[f64]) -> f64 {
    let m = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    m + xs.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// log of the noncentral χ² density by its Poisson mixture.
fn log_ncx2(k: usize, x: f64, nc: f64) -> f64 {
    let half = 0.5 * nc;
    let top = (half + 60.0 * half.sqrt() + 400.0 + x) as usize;
    let terms: Vec<f64> = (0..top)
        .map(|j| {
            let jf = j as f64;
            -half + jf * half.ln() - ln_gamma(jf + 1.0) + log_chi2(k + 2 * j, x)
        })
        .collect();
    log_sum_exp(&terms)
}

fn bimodal_params() -> (f64, f64) {
    let sc = 1.25f64.sqrt();
    (1.0 / sc, 0.5 / sc)
}

fn exact_log_zp(k: usize, u: f64) -> f64 {
    let (a, s) = bimodal_params();
    let lam = a * a / (s * s);
    log_ncx2(k, u / (s * s), k as f64 * lam) - 2.0 * s.ln() - log_chi2(k, u)
}

#[test]
fn bimodal_table_matches_noncentral_chi2() {
    let f = Density::bimodal();
    let t = PartitionTable::build(&f, 256).unwrap();
    let sig = t.sigma();
    for k in [5usize, 8, 33, 128, 256] {
        let kf = k as f64;
        let centre = t.log_z_prime(k, kf.sqrt()).unwrap();
        let centre_exact = exact_log_zp(k, kf);
        assert!((centre - centre_exact).abs() < 1e-3, "k={k}: {centre} vs {centre_exact}");
        for z in [-2.0, -1.0, 0.5, 2.0] {
            let u = kf + z * kf.sqrt() * sig;
            if u <= 0.5 {
                continue;
            }
            let got = t.log_z_prime(k, u.sqrt()).unwrap() - centre;
            let want = exact_log_zp(k, u) - centre_exact;
            assert!((got - want).abs() < 1e-4, "k={k} u={u}: {got} vs {want}");
        }
    }
}

#[test]
fn theta_equals_ratio_of_sum_laws() {
    // f^{⊗ℓ}θ_{N,ℓ}(V) = f^{⊗ℓ}(V) h^{*(N−ℓ)}(N − |V|²)/h^{*N}(N)
    let f = Density::bimodal();
    let t = PartitionTable::build(&f, 64).unwrap();
    let (a, s) = bimodal_params();
    let lam = a * a / (s * s);
    let log_h = |k: usize, u: f64| log_ncx2(k, u / (s * s), k as f64 * lam) - 2.0 * s.ln();
    for n in [16usize, 64] {
        for v in [0.0, 0.8, -1.7] {
            let th = kacsphere::theta(n, &[v], &t).unwrap();
            let exact = (log_h(n - 1, n as f64 - v * v) - log_h(n, n as f64)).exp();
            assert!((th / exact - 1.0).abs() < 1e-4, "N={n} v={v}: {th} vs {exact}");
        }
        let v2 = [0.4, -1.1];
        let th = kacsphere::theta(n, &v2, &t).unwrap();
        let r2 = v2[0] * v2[0] + v2[1] * v2[1];
        let exact = (log_h(n - 2, n as f64 - r2) - log_h(n, n as f64)).exp();
        assert!((th / exact - 1.0).abs() < 1e-4, "N={n} ℓ=2: {th} vs {exact}");
    }
}

#[test]
fn conditioned_marginal_has_unit_mass() {
    let f = Density::bimodal();
    let t = PartitionTable::build(&f, 64).unwrap();
    for n in [8usize, 64] {
        let r = (n as f64).sqrt();
        let m = chaoslab::base::quadrature::integrate(
            &|v: f64| kacsphere::conditioned_marginal_pdf(n, v, &t).unwrap(),
            -r,
            r,
            1e-12,
            1e-10,
        )
        .unwrap();
        assert!((m - 1.0).abs() < 1e-4, "N={n}: mass {m}");
    }
}
