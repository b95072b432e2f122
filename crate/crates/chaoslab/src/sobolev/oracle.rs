//! Frequency-side evaluation of ‖μ − ν‖²_{H^{-s}} = ∫ |μ̂ − ν̂|² ⟨ξ⟩^{−2s} dξ on the line.
//!
//! Independent of the kernel table: Gauss–Legendre panels up to a cutoff Ξ, then the tail
//! Σ_{a,b} w_a w_b · 2∫_Ξ^∞ cos(δ_ab ξ)(1+ξ²)^{−s} dξ handled pair by pair.

use crate::base::quadrature::{self, composite_rule};
use crate::base::types::DiscreteMeasure;
use crate::error::{Error, Result};

use super::signed_atoms;

const CUTOFF: f64 = 400.0;

fn weight(s: f64, xi: f64) -> f64 {
    (1.0 + xi * xi).powf(-s)
}

/// 2∫_X^∞ cos(δξ)(1+ξ²)^{−s} dξ.
fn tail(s: f64, delta: f64, x: f64) -> Result<f64> {
    if delta == 0.0 {
        // substitute ξ = X/t
        let f = |t: f64| if t <= 0.0 { 0.0 } else { weight(s, x / t) * x / (t * t) };
        return Ok(2.0 * quadrature::integrate(&f, 0.0, 1.0, 1e-18, 1e-13)?);
    }
    // far enough out that the asymptotic expansion is accurate
    let x2 = x.max(30.0 / delta);
    let mut near = 0.0;
    if x2 > x {
        let f = |xi: f64| (delta * xi).cos() * weight(s, xi);
        let mut breaks = vec![x];
        let mut b = x;
        while b < x2 {
            b = (b * 2.0).min(x2);
            breaks.push(b);
        }
        near = quadrature::integrate_pieces(&f, &breaks, 1e-18, 1e-12)?;
    }
    // repeated integration by parts at X2
    let g = weight(s, x2);
    let one = 1.0 + x2 * x2;
    let g1 = -2.0 * s * x2 * one.powf(-s - 1.0);
    let g2 = -2.0 * s * one.powf(-s - 1.0) + 4.0 * s * (s + 1.0) * x2 * x2 * one.powf(-s - 2.0);
    let (sn, cs) = (delta * x2).sin_cos();
    let far = -sn * g / delta - cs * g1 / (delta * delta) + sn * g2 / delta.powi(3);
    Ok(2.0 * (near + far))
}

/// Fourier-quadrature value of the squared H^{-s} distance for measures on ℝ.
pub fn hs_dist_sq_fourier(mu: &DiscreteMeasure, nu: &DiscreteMeasure, s: f64) -> Result<f64> {
    if mu.width() != 1 || nu.width() != 1 {
        return Err(Error::InvalidArgument("the Fourier oracle handles measures on the line only".into()));
    }
    if !(s > 0.5) {
        return Err(Error::InvalidArgument(format!("need s > 1/2, got {s}")));
    }
    let (z, w) = signed_atoms(mu, nu);
    let span = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - z.iter().cloned().fold(f64::INFINITY, f64::min);
    let panel = (0.5f64).min(1.0 / span.max(1e-9));
    let panels = (CUTOFF / panel).ceil() as usize;
    let (xs, ws) = composite_rule(0.0, CUTOFF, panels, 16);
    let mut main = 0.0;
    for (xi, qw) in xs.iter().zip(&ws) {
        let (mut re, mut im) = (0.0, 0.0);
        for (za, wa) in z.iter().zip(&w) {
            let (sn, cs) = (xi * za).sin_cos();
            re += wa * cs;
            im += wa * sn;
        }
        main += qw * (re * re + im * im) * weight(s, *xi);
    }
    main *= 2.0;
    let mut tails = 0.0;
    let diag = tail(s, 0.0, CUTOFF)?;
    for a in 0..z.len() {
        tails += w[a] * w[a] * diag;
        for b in a + 1..z.len() {
            tails += 2.0 * w[a] * w[b] * tail(s, (z[a] - z[b]).abs(), CUTOFF)?;
        }
    }
    Ok(main + tails)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn two_diracs_s_one() {
        let d0 = DiscreteMeasure::dirac(1, vec![0.0]).unwrap();
        let dz = DiscreteMeasure::dirac(1, vec![0.37]).unwrap();
        let v = hs_dist_sq_fourier(&d0, &dz, 1.0).unwrap();
        let exact = 2.0 * PI * (1.0 - (-0.37f64).exp());
        assert!((v - exact).abs() < 1e-9 * exact, "{v} vs {exact}");
    }

    #[test]
    fn tiny_separation() {
        let d0 = DiscreteMeasure::dirac(1, vec![0.0]).unwrap();
        let dz = DiscreteMeasure::dirac(1, vec![1e-4]).unwrap();
        let v = hs_dist_sq_fourier(&d0, &dz, 1.0).unwrap();
        let exact = 2.0 * PI * (1.0 - (-1e-4f64).exp());
        assert!((v - exact).abs() < 1e-7 * exact, "{v} vs {exact}");
    }
}
