//! Exact W₁ on the real line for the truncated cost min(|x−y|, T).
//!
//! The truncated distance is the shortest-path metric of the sorted atoms joined in a
//! path, plus one hub joined to every atom by an edge of length T/2. Optimal transport
//! becomes a min-cost flow on that graph. Writing H_k for the cumulative flow into the
//! hub up to atom k and D_k for the cumulative signed mass, the cost is
//! Σ_k gap_k |D_k − H_k| + (T/2) Σ_k |H_k − H_{k−1}| with H_0 = H_K = 0, a chain of
//! convex piecewise-linear steps minimized exactly by slope trick.

use std::cmp::Ordering;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy)]
struct Key(f64);

impl PartialEq for Key {
    fn eq(&self, other: &Self) -> bool {
        self.0.total_cmp(&other.0) == Ordering::Equal
    }
}
impl Eq for Key {}
impl PartialOrd for Key {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Key {
    fn cmp(&self, other: &Self) -> Ordering {
        self.0.total_cmp(&other.0)
    }
}

/// Convex piecewise-linear function f(x) = min + Σ_L q(p−x)_+ + Σ_R q(x−p)_+.
struct SlopeFn {
    min: f64,
    left: BTreeMap<Key, f64>,
    right: BTreeMap<Key, f64>,
    left_total: f64,
    right_total: f64,
}

fn insert(map: &mut BTreeMap<Key, f64>, p: f64, w: f64) {
    *map.entry(Key(p)).or_insert(0.0) += w;
}

impl SlopeFn {
    fn abs_at_zero(c: f64) -> Self {
        let mut s = Self {
            min: 0.0,
            left: BTreeMap::new(),
            right: BTreeMap::new(),
            left_total: c,
            right_total: c,
        };
        insert(&mut s.left, 0.0, c);
        insert(&mut s.right, 0.0, c);
        s
    }

    /// f ← f + w (x − a)_+
    fn add_right_ramp(&mut self, a: f64, w: f64) {
        insert(&mut self.left, a, w);
        self.left_total += w;
        let mut rem = w;
        while rem > 0.0 {
            let (k, q) = match self.left.iter().next_back() {
                Some((k, q)) => (*k, *q),
                None => break,
            };
            let t = q.min(rem);
            self.min += t * (k.0 - a);
            if t >= q {
                self.left.remove(&k);
            } else {
                *self.left.get_mut(&k).expect("present") -= t;
            }
            self.left_total -= t;
            insert(&mut self.right, k.0, t);
            self.right_total += t;
            rem -= t;
        }
    }

    /// f ← f + w (a − x)_+
    fn add_left_ramp(&mut self, a: f64, w: f64) {
        insert(&mut self.right, a, w);
        self.right_total += w;
        let mut rem = w;
        while rem > 0.0 {
            let (k, q) = match self.right.iter().next() {
                Some((k, q)) => (*k, *q),
                None => break,
            };
            let t = q.min(rem);
            self.min += t * (a - k.0);
            if t >= q {
                self.right.remove(&k);
            } else {
                *self.right.get_mut(&k).expect("present") -= t;
            }
            self.right_total -= t;
            insert(&mut self.left, k.0, t);
            self.left_total += t;
            rem -= t;
        }
    }

    /// f ← inf_y f(y) + c|x − y|, i.e. clamp all slopes to [−c, c].
    fn inf_convolve_abs(&mut self, c: f64) {
        while self.left_total > c {
            let (k, q) = match self.left.iter().next() {
                Some((k, q)) => (*k, *q),
                None => break,
            };
            let excess = self.left_total - c;
            if q <= excess {
                self.left.remove(&k);
                self.left_total -= q;
            } else {
                *self.left.get_mut(&k).expect("present") -= excess;
                self.left_total = c;
            }
        }
        while self.right_total > c {
            let (k, q) = match self.right.iter().next_back() {
                Some((k, q)) => (*k, *q),
                None => break,
            };
            let excess = self.right_total - c;
            if q <= excess {
                self.right.remove(&k);
                self.right_total -= q;
            } else {
                *self.right.get_mut(&k).expect("present") -= excess;
                self.right_total = c;
            }
        }
    }

    fn eval(&self, x: f64) -> f64 {
        let l: f64 = self.left.iter().filter(|(k, _)| k.0 > x).map(|(k, q)| q * (k.0 - x)).sum();
        let r: f64 = self.right.iter().filter(|(k, _)| k.0 < x).map(|(k, q)| q * (x - k.0)).sum();
        self.min + l + r
    }
}

/// Exact min over couplings of ∫ min(|x−y|, T) between two weighted atom lists on ℝ.
///
/// Both lists are `(position, weight)`; each must carry the same total mass.
pub fn w1_truncated(mu: &[(f64, f64)], nu: &[(f64, f64)], truncation: f64) -> f64 {
    let mut ev: Vec<(f64, f64)> = Vec::with_capacity(mu.len() + nu.len());
    ev.extend(mu.iter().copied());
    ev.extend(nu.iter().map(|&(x, w)| (x, -w)));
    ev.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut xs: Vec<f64> = Vec::with_capacity(ev.len());
    let mut ss: Vec<f64> = Vec::with_capacity(ev.len());
    for (x, w) in ev {
        match xs.last() {
            Some(&last) if x - last <= 1e-12 => *ss.last_mut().expect("nonempty") += w,
            _ => {
                xs.push(x);
                ss.push(w);
            }
        }
    }
    let k = xs.len();
    if k < 2 {
        return 0.0;
    }
    if !truncation.is_finite() {
        let mut d = 0.0;
        let mut total = 0.0;
        for i in 0..k - 1 {
            d += ss[i];
            total += (xs[i + 1] - xs[i]) * d.abs();
        }
        return total;
    }
    let c = 0.5 * truncation;
    let mut f = SlopeFn::abs_at_zero(c);
    let mut d = 0.0;
    for i in 0..k - 1 {
        if i > 0 {
            f.inf_convolve_abs(c);
        }
        d += ss[i];
        let g = xs[i + 1] - xs[i];
        f.add_right_ramp(d, g);
        f.add_left_ramp(d, g);
    }
    f.inf_convolve_abs(c);
    f.eval(0.0).max(0.0)
}

/// Untruncated W₂² between two weighted atom lists on ℝ via the monotone coupling.
pub fn w2_squared(mu: &[(f64, f64)], nu: &[(f64, f64)]) -> f64 {
    let mut a = mu.to_vec();
    let mut b = nu.to_vec();
    a.sort_by(|p, q| p.0.total_cmp(&q.0));
    b.sort_by(|p, q| p.0.total_cmp(&q.0));
    let (mut i, mut j) = (0usize, 0usize);
    let (mut ra, mut rb) = (a[0].1, b[0].1);
    let mut total = 0.0;
    loop {
        let t = ra.min(rb);
        total += t * (a[i].0 - b[j].0).powi(2);
        ra -= t;
        rb -= t;
        if ra <= 1e-15 {
            i += 1;
            if i == a.len() {
                break;
            }
            ra += a[i].1;
        }
        if rb <= 1e-15 {
            j += 1;
            if j == b.len() {
                break;
            }
            rb += b[j].1;
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::base::rng;
    use crate::transport::simplex;
    use rand::Rng;

    fn lp(mu: &[(f64, f64)], nu: &[(f64, f64)], t: f64) -> f64 {
        let a: Vec<f64> = mu.iter().map(|p| p.1).collect();
        let b: Vec<f64> = nu.iter().map(|p| p.1).collect();
        let mut cost = Vec::new();
        for p in mu {
            for q in nu {
                cost.push((p.0 - q.0).abs().min(t));
            }
        }
        simplex::solve(&a, &b, &cost).unwrap().cost
    }

    fn random_atoms(r: &mut impl Rng, n: usize, spread: f64) -> Vec<(f64, f64)> {
        let mut v: Vec<(f64, f64)> = (0..n).map(|_| (spread * r.random::<f64>(), r.random::<f64>() + 0.01)).collect();
        let s: f64 = v.iter().map(|p| p.1).sum();
        v.iter_mut().for_each(|p| p.1 /= s);
        v
    }

    #[test]
    fn matches_lp_on_random_instances() {
        let mut r = rng::seeded(99);
        for trial in 0..300 {
            let n = r.random_range(1..12);
            let m = r.random_range(1..12);
            let spread = [0.5, 2.0, 6.0][trial % 3];
            let mu = random_atoms(&mut r, n, spread);
            let nu = random_atoms(&mut r, m, spread);
            let t = [1.0, 0.3, 2.5][trial % 3];
            let a = w1_truncated(&mu, &nu, t);
            let b = lp(&mu, &nu, t);
            assert!((a - b).abs() < 1e-10, "trial {trial}: {a} vs {b}");
        }
    }

    #[test]
    fn dirac_pairs() {
        assert!((w1_truncated(&[(0.0, 1.0)], &[(0.4, 1.0)], 1.0) - 0.4).abs() < 1e-15);
        assert!((w1_truncated(&[(0.0, 1.0)], &[(7.0, 1.0)], 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn large_truncation_is_plain_w1() {
        let mut r = rng::seeded(4);
        let mu = random_atoms(&mut r, 30, 3.0);
        let nu = random_atoms(&mut r, 20, 3.0);
        let a = w1_truncated(&mu, &nu, 100.0);
        let b = w1_truncated(&mu, &nu, f64::INFINITY);
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn w2_of_shift() {
        let mu = [(0.0, 0.5), (1.0, 0.5)];
        let nu = [(0.5, 0.5), (1.5, 0.5)];
        assert!((w2_squared(&mu, &nu) - 0.25).abs() < 1e-15);
    }
}
