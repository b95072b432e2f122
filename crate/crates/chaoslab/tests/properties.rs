//! Structural invariants checked on random inputs.

use chaoslab::base::density::Density;
use chaoslab::base::pmf::SymmetricPmf;
use chaoslab::base::rng::seeded;
use chaoslab::base::types::{Configuration, DiscreteMeasure};
use chaoslab::chaos::{self, Coupling, ProductSampler};
use chaoslab::cli::config::{parse_ns, DensityChoice};
use chaoslab::mixtures::{level3_entropy, Mixture};
use chaoslab::sobolev::{hs_dist_sq, HsKernel};
use chaoslab::transport::{self, CostSpec};
use proptest::prelude::*;

fn line_measure() -> impl Strategy<Value = DiscreteMeasure> {
    prop::collection::vec((-3.0f64..3.0, 0.05f64..1.0), 1..8).prop_map(|atoms| {
        let (p, w): (Vec<f64>, Vec<f64>) = atoms.into_iter().unzip();
        DiscreteMeasure::normalized(1, 1, p, w).unwrap()
    })
}

fn line_config(n: usize) -> impl Strategy<Value = Configuration> {
    prop::collection::vec(-2.0f64..2.0, n).prop_map(|c| Configuration::from_line(c).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn truncated_w1_is_a_metric(a in line_measure(), b in line_measure(), c in line_measure()) {
        let ab = transport::w1_line(&a, &b, 1.0).unwrap();
        let ba = transport::w1_line(&b, &a, 1.0).unwrap();
        let ac = transport::w1_line(&a, &c, 1.0).unwrap();
        let cb = transport::w1_line(&c, &b, 1.0).unwrap();
        prop_assert!((ab - ba).abs() < 1e-12);
        prop_assert!(transport::w1_line(&a, &a, 1.0).unwrap().abs() < 1e-12);
        prop_assert!((0.0..=1.0 + 1e-12).contains(&ab));
        prop_assert!(ab <= ac + cb + 1e-12);
    }

    #[test]
    fn line_solver_matches_lp(a in line_measure(), b in line_measure()) {
        let fast = transport::w1_line(&a, &b, 1.0).unwrap();
        let lp = transport::w1_lp(&a, &b, CostSpec::bounded()).unwrap().cost;
        prop_assert!((fast - lp).abs() < 1e-9, "{fast} vs {lp}");
    }

    #[test]
    fn w1_dominated_by_w2(a in line_measure(), b in line_measure()) {
        prop_assert!(transport::w1_line(&a, &b, 1.0).unwrap() <= transport::w2_line(&a, &b).unwrap() + 1e-12);
    }

    #[test]
    fn config_distance_ignores_labels((x, y) in (2usize..9).prop_flat_map(|n| (line_config(n), line_config(n)))) {
        let (d, sigma) = transport::w1_config(&x, &y).unwrap();
        let mut rev = x.coords().to_vec();
        rev.reverse();
        let xr = Configuration::from_line(rev).unwrap();
        prop_assert!((d - transport::w1_config(&xr, &y).unwrap().0).abs() < 1e-12);
        prop_assert!((d - transport::w1_config(&y, &x).unwrap().0).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&d));
        let mut seen = sigma.clone();
        seen.sort_unstable();
        prop_assert_eq!(seen, (0..x.n_particles()).collect::<Vec<_>>());
    }

    #[test]
    fn grunbaum_bounds_hold(seed in any::<u64>(), s in 2usize..4, n in 2usize..6) {
        let alphabet: Vec<f64> = (0..s).map(|i| i as f64).collect();
        let p = SymmetricPmf::random(alphabet, n, &mut seeded(seed)).unwrap();
        prop_assert!(chaos::grunbaum_exact(&p, 1).unwrap().tv < 1e-12);
        let r = chaos::grunbaum_exact(&p, 2).unwrap();
        prop_assert!(r.holds, "{r:?}");
    }

    #[test]
    fn hs_distance_is_symmetric_and_nonnegative(a in line_measure(), b in line_measure(), s in 0.6f64..2.0) {
        let k = HsKernel::new(s, 1).unwrap();
        let ab = hs_dist_sq(&a, &b, &k).unwrap();
        let ba = hs_dist_sq(&b, &a, &k).unwrap();
        prop_assert!(ab >= -1e-10);
        prop_assert!((ab - ba).abs() <= 1e-9 * (1.0 + ab));
        prop_assert!(hs_dist_sq(&a, &a, &k).unwrap().abs() < 1e-9);
    }

    #[test]
    fn chaos_estimates_lie_in_unit_interval(seed in any::<u64>(), n in 2usize..40) {
        let f = Density::standard_gaussian();
        let sampler = ProductSampler { f: f.clone(), n };
        let mut rng = seeded(seed);
        let inf = chaos::omega_inf(&sampler, &f, 8, 16, &mut rng).unwrap();
        let on = chaos::omega_n(&sampler, &f, 8, Coupling::Independent, &mut rng).unwrap();
        let sync = chaos::omega_n(&sampler, &f, 8, Coupling::Synchronous, &mut rng).unwrap();
        for v in [inf.value, on.value] {
            prop_assert!((0.0..=1.0).contains(&v));
        }
        prop_assert!(sync.value.abs() < 1e-12);
    }

    #[test]
    fn level3_entropy_is_affine(theta in 0.05f64..0.95, m1 in -3.0f64..3.0, sd in 0.5f64..2.0) {
        let p = Mixture::single(Density::gaussian(m1, sd).unwrap());
        let q = Mixture::single(Density::gaussian(m1 + 5.0, 1.0).unwrap());
        let lhs = level3_entropy(&p.combine(theta, &q).unwrap()).unwrap();
        let rhs = theta * level3_entropy(&p).unwrap() + (1.0 - theta) * level3_entropy(&q).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10);
    }

    #[test]
    fn ns_and_density_round_trip(ns in prop::collection::vec(1usize..100_000, 1..10), which in 0usize..4) {
        let text: Vec<String> = ns.iter().map(|n| n.to_string()).collect();
        prop_assert_eq!(parse_ns(&text.join(",")).unwrap(), ns);
        let d = [DensityChoice::Gaussian, DensityChoice::Uniform, DensityChoice::Bimodal,
            DensityChoice::Custom("grid.json".into())][which].clone();
        prop_assert_eq!(d.to_string().parse::<DensityChoice>().unwrap(), d);
    }
}
