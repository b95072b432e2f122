//! Tabulated laws h^{*k} of Σ_{i≤k} v_i² and the partition functions Z′_k(r).
//!
//! Z′_k(r) = h^{*k}(r²)/χ²_k(r²), so Z′ ≡ 1 for the Gaussian. Values are stored as log Z′_k on
//! a per-k stride of the u = r² grid.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::base::density::Density;
use crate::base::quadrature::composite_rule;
use crate::error::{Error, Result};

/// Spacing of the u grid.
pub const DEFAULT_DU: f64 = 1.0 / 16.0;
/// Points of the angular trapezoid rule used for h^{*2}.
const CIRCLE_POINTS: usize = 2048;
/// Below this fraction of a row's peak, h^{*k} is treated as numerically zero.
const RELATIVE_FLOOR: f64 = 1e-12;
/// Odd rows up to this k are computed directly rather than by convolution.
const DIRECT_ODD_ROWS: usize = 9;
/// Gregory end weights replacing the trapezoid's 1/2, 1, 1.
const GREGORY: [f64; 3] = [3.0 / 8.0, 7.0 / 6.0, 23.0 / 24.0];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    /// Node spacing in units of the base `du`.
    pub stride: usize,
    /// log Z′_k at u = i·stride·du; −∞ where the table carries no information.
    pub log_zp: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTable {
    pub(crate) density: Density,
    pub(crate) max_n: usize,
    pub(crate) du: f64,
    pub(crate) e: f64,
    pub(crate) sigma: f64,
    /// Rows for k = 2..=max_n.
    pub(crate) rows: Vec<TableRow>,
}

/// log of the χ²_k density at u.
pub fn log_chi2(k: usize, u: f64) -> f64 {
    let h = 0.5 * k as f64;
    (h - 1.0) * u.ln() - 0.5 * u - h * std::f64::consts::LN_2 - ln_gamma(h)
}

fn check_hypotheses(f: &Density) -> Result<(f64, f64)> {
    let m1 = f.integrate(|v| v * f.pdf(v), 1e-14, 1e-12)?;
    let e = f.integrate(|v| v * v * f.pdf(v), 1e-14, 1e-12)?;
    let m4 = f.integrate(|v| v.powi(4) * f.pdf(v), 1e-14, 1e-12)?;
    let m6 = f.integrate(|v| v.powi(6) * f.pdf(v), 1e-14, 1e-12)?;
    let mut failed = Vec::new();
    if m1.abs() > 1e-8 {
        failed.push(format!("∫v f = {m1:e} ≠ 0"));
    }
    if (e - 1.0).abs() > 1e-6 {
        failed.push(format!("∫v² f = {e} ≠ 1"));
    }
    if !m6.is_finite() {
        failed.push("sixth moment is infinite".to_string());
    }
    if !failed.is_empty() {
        return Err(Error::Hypothesis(failed.join("; ")));
    }
    let sigma2 = m4 - 2.0 * e * e + e * e;
    Ok((e, sigma2.max(0.0).sqrt()))
}

impl PartitionTable {
    /// Builds rows k = 2..=max_n by repeated FFT convolution with h^{*2}.
    pub fn build(f: &Density, max_n: usize) -> Result<Self> {
        Self::build_with(f, max_n, DEFAULT_DU)
    }

    pub fn build_with(f: &Density, max_n: usize, du: f64) -> Result<Self> {
        if max_n < 5 {
            return Err(Error::InvalidArgument(format!("max_N must be ≥ 5, got {max_n}")));
        }
        if !(du > 0.0 && du <= 0.25) {
            return Err(Error::InvalidArgument(format!("u spacing must lie in (0, 1/4], got {du}")));
        }
        let (e, sigma) = check_hypotheses(f)?;
        let umax = umax_for(max_n, sigma);
        let n = (umax / du).ceil() as usize + 1;
        let (lo, hi) = f.support();
        let reach = lo.abs().max(hi.abs());

        // h^{*2}(u) = ½∫ f(√u cos φ) f(√u sin φ) dφ
        let n2 = ((2.0 * reach * reach / du).ceil() as usize + 1).min(n);
        let mut h2 = vec![0.0; n];
        let dphi = 2.0 * std::f64::consts::PI / CIRCLE_POINTS as f64;
        let trig: Vec<(f64, f64)> = (0..CIRCLE_POINTS).map(|j| (j as f64 * dphi).sin_cos()).collect();
        for (m, slot) in h2.iter_mut().enumerate().take(n2) {
            let r = (m as f64 * du).sqrt();
            let s: f64 = trig.iter().map(|&(sn, cs)| f.pdf(r * cs) * f.pdf(r * sn)).sum();
            *slot = 0.5 * s * dphi;
        }
        normalize(&mut h2, du);

        let conv = Convolver::new(&h2, du);
        let mut rows = Vec::with_capacity(max_n - 1);
        rows.push(make_row(&h2, 2, du, sigma));
        let mut even = h2.clone();
        let mut odd = add_one_square(f, &even, du, 3.0 * reach * reach);
        rows.push(make_row(&odd, 3, du, sigma));
        for k in 4..=max_n {
            if k % 2 == 0 {
                even = conv.apply(&even);
                normalize(&mut even, du);
            } else if k <= DIRECT_ODD_ROWS {
                // odd laws behave like u^{k/2−1} at 0; early rows are built without end corrections
                odd = add_one_square(f, &even, du, k as f64 * reach * reach);
            } else {
                odd = conv.apply(&odd);
                normalize(&mut odd, du);
            }
            rows.push(make_row(if k % 2 == 0 { &even } else { &odd }, k, du, sigma));
        }
        Ok(Self { density: f.clone(), max_n, du, e, sigma, rows })
    }

    pub fn density(&self) -> &Density {
        &self.density
    }

    pub fn max_n(&self) -> usize {
        self.max_n
    }

    pub fn du(&self) -> f64 {
        self.du
    }

    /// ∫ v² f.
    pub fn energy(&self) -> f64 {
        self.e
    }

    /// Σ = (∫ (v² − E)² f)^{1/2}.
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn rows(&self) -> &[TableRow] {
        &self.rows
    }

    /// log Z′_k(r); −∞ where the tabulated law is below its noise floor.
    pub fn log_z_prime(&self, k: usize, r: f64) -> Result<f64> {
        if k == 0 || k > self.max_n {
            return Err(Error::InvalidArgument(format!("Z′_{k} is outside the table (max_N = {})", self.max_n)));
        }
        if k == 1 {
            // Z′_1(r) = (f(r) + f(−r)) / (2γ(r))
            let f = &self.density;
            let g = Density::standard_gaussian();
            let a = f.log_pdf(r).max(f.log_pdf(-r));
            let b = f.log_pdf(r).min(f.log_pdf(-r));
            return Ok(a + (b - a).exp().ln_1p() - std::f64::consts::LN_2 - g.log_pdf(r));
        }
        Ok(self.interp(k, r * r))
    }

    /// Z′_k at the natural radius √(kE).
    pub fn z_prime_at_mean(&self, k: usize) -> Result<f64> {
        Ok(self.log_z_prime(k, (k as f64 * self.e).sqrt())?.exp())
    }

    /// log h^{*k}(u).
    pub fn log_h(&self, k: usize, u: f64) -> Result<f64> {
        if u <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        Ok(self.log_z_prime(k, u.sqrt())? + log_chi2(k, u))
    }

    fn interp(&self, k: usize, u: f64) -> f64 {
        let row = &self.rows[k - 2];
        let h = row.stride as f64 * self.du;
        let t = u / h;
        let len = row.log_zp.len();
        if !(t >= 0.0) || t > (len - 1) as f64 {
            return f64::NEG_INFINITY;
        }
        let v = &row.log_zp;
        let i = (t.floor() as usize).min(len - 2);
        let s = t - i as f64;
        if i >= 1 && i + 2 < len && v[i - 1..=i + 2].iter().all(|x| x.is_finite()) {
            let (p0, p1, p2, p3) = (v[i - 1], v[i], v[i + 1], v[i + 2]);
            let l0 = -s * (s - 1.0) * (s - 2.0) / 6.0;
            let l1 = (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0;
            let l2 = -(s + 1.0) * s * (s - 2.0) / 2.0;
            let l3 = (s + 1.0) * s * (s - 1.0) / 6.0;
            return l0 * p0 + l1 * p1 + l2 * p2 + l3 * p3;
        }
        if v[i].is_finite() && v[i + 1].is_finite() {
            return (1.0 - s) * v[i] + s * v[i + 1];
        }
        f64::NEG_INFINITY
    }
}

pub(crate) fn umax_for(k: usize, sigma: f64) -> f64 {
    k as f64 + 20.0 * (k as f64).sqrt() * sigma.max(0.5) + 40.0
}

fn stride_for(k: usize, sigma: f64, du: f64) -> usize {
    (((k as f64).sqrt() * sigma.max(0.5) / 40.0) / du).round().max(1.0) as usize
}

fn make_row(h: &[f64], k: usize, du: f64, sigma: f64) -> TableRow {
    let stride = stride_for(k, sigma, du);
    let last = ((umax_for(k, sigma) / du).ceil() as usize).min(h.len() - 1);
    let peak = h.iter().cloned().fold(0.0, f64::max);
    let log_zp = (0..=last / stride)
        .map(|i| {
            let m = i * stride;
            let u = m as f64 * du;
            if m == 0 || !(h[m] > RELATIVE_FLOOR * peak) {
                f64::NEG_INFINITY
            } else {
                h[m].ln() - log_chi2(k, u)
            }
        })
        .collect();
    TableRow { stride, log_zp }
}

/// Law of u + x² with u ~ `h` (on the grid) and x ~ f, by quadrature in x:
/// ∫_0^{√u} (f(x) + f(−x)) h(u − x²) dx.
fn add_one_square(f: &Density, h: &[f64], du: f64, reach2: f64) -> Vec<f64> {
    let n = h.len();
    let top_m = ((reach2 / du).ceil() as usize + 1).min(n);
    let (lo, hi) = f.support();
    let reach = reach2.sqrt().min(lo.abs().max(hi.abs()));
    let mut out = vec![0.0; n];
    for (i, slot) in out[1..top_m].iter_mut().enumerate() {
        let u = (i + 1) as f64 * du;
        let top = u.sqrt().min(reach);
        let panels = ((top / 0.25).ceil() as usize).max(1);
        let (xs, ws) = composite_rule(0.0, top, panels, 16);
        *slot = xs
            .iter()
            .zip(&ws)
            .map(|(x, w)| w * (f.pdf(*x) + f.pdf(-x)) * interp_grid(h, du, u - x * x))
            .sum();
    }
    out
}

fn gregory_sum(v: &[f64]) -> f64 {
    let n = v.len();
    let mut s: f64 = v.iter().sum();
    if n >= 6 {
        for (i, w) in GREGORY.iter().enumerate() {
            s += (w - 1.0) * (v[i] + v[n - 1 - i]);
        }
    }
    s
}

fn normalize(v: &mut [f64], du: f64) {
    let mass = gregory_sum(v) * du;
    v.iter_mut().for_each(|x| *x /= mass);
}

fn interp_grid(v: &[f64], du: f64, u: f64) -> f64 {
    let t = u / du;
    if t < 0.0 {
        return 0.0;
    }
    if t > (v.len() - 1) as f64 {
        return 0.0;
    }
    // cubic stencil, shifted inward at the ends
    let i = (t.floor() as usize).clamp(1, v.len() - 3);
    let s = t - i as f64;
    let (p0, p1, p2, p3) = (v[i - 1], v[i], v[i + 1], v[i + 2]);
    -s * (s - 1.0) * (s - 2.0) / 6.0 * p0 + (s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0 * p1
        - (s + 1.0) * s * (s - 2.0) / 2.0 * p2
        + (s + 1.0) * s * (s - 1.0) / 6.0 * p3
}

/// 4-point Gauss–Legendre nodes and weights on [0, 1].
const GL4: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_93),
    (0.330_009_478_207_571_87, 0.326_072_577_431_273_07),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_07),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_93),
];

/// Linear convolution with a fixed kernel on [0, u_max], Gregory-corrected at both ends.
struct Convolver {
    kernel: Vec<f64>,
    kernel_hat: Vec<Complex<f64>>,
    forward: Arc<dyn rustfft::Fft<f64>>,
    inverse: Arc<dyn rustfft::Fft<f64>>,
    du: f64,
}

impl Convolver {
    fn new(kernel: &[f64], du: f64) -> Self {
        let p = (2 * kernel.len()).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(p);
        let inverse = planner.plan_fft_inverse(p);
        let mut kernel_hat: Vec<Complex<f64>> = kernel.iter().map(|&x| Complex::new(x, 0.0)).collect();
        kernel_hat.resize(p, Complex::new(0.0, 0.0));
        forward.process(&mut kernel_hat);
        Self { kernel: kernel.to_vec(), kernel_hat, forward, inverse, du }
    }

    /// ∫_0^{u_m} a(x) b(u_m − x) dx on interpolated values, for the first few nodes.
    fn short_range(&self, b: &[f64], m: usize) -> f64 {
        let u = m as f64 * self.du;
        let mut s = 0.0;
        for j in 0..m {
            for (x, w) in GL4 {
                let x = (j as f64 + x) * self.du;
                s += w * interp_grid(&self.kernel, self.du, x) * interp_grid(b, self.du, u - x);
            }
        }
        s * self.du
    }

    fn apply(&self, b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let p = self.kernel_hat.len();
        let mut buf: Vec<Complex<f64>> = b.iter().map(|&x| Complex::new(x, 0.0)).collect();
        buf.resize(p, Complex::new(0.0, 0.0));
        self.forward.process(&mut buf);
        buf.iter_mut().zip(&self.kernel_hat).for_each(|(x, k)| *x *= k);
        self.inverse.process(&mut buf);
        let a = &self.kernel;
        let mut c: Vec<f64> = buf[..n].iter().map(|z| z.re / p as f64).collect();
        for m in 0..n {
            if m >= 6 {
                for (i, w) in GREGORY.iter().enumerate() {
                    c[m] += (w - 1.0) * (a[i] * b[m - i] + a[m - i] * b[i]);
                }
                c[m] *= self.du;
            } else {
                c[m] = self.short_range(b, m);
            }
            c[m] = c[m].max(0.0);
        }
        c
    }
}
