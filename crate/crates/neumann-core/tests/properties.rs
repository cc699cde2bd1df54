use neumann_core::exponents::{c_from_lambda, classify_region, lambda_from_c};
use neumann_core::green::{kappa_shift, signed_pow, Green};
use neumann_core::{DomainMode, ExponentPair, RadialGrid, Region};
use proptest::prelude::*;

fn grid(dim: usize) -> RadialGrid {
    let mode = if dim == 1 { DomainMode::Interval } else { DomainMode::Ball };
    RadialGrid::new(dim, 48, mode).unwrap()
}

fn data(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_identities(p in 0.05f64..20.0, q in 0.05f64..20.0) {
        let e = ExponentPair::new(p, q, 1).unwrap();
        let (a, b, g) = (e.alpha().unwrap(), e.beta(), e.gamma());
        let (g1, g2) = (e.gamma1().unwrap(), e.gamma2().unwrap());
        prop_assert!((g1 + g2 - 1.0).abs() < 1e-14);
        prop_assert!((g1 * a - g).abs() < 1e-12 * g && (g2 * b - g).abs() < 1e-12 * g);
        prop_assert!((1.0 / a + 1.0 / b - 1.0 / g).abs() < 1e-12 / g);
        prop_assert!(a > 1.0 && b > 1.0);
    }

    #[test]
    fn level_round_trip(p in 0.1f64..6.0, q in 0.1f64..6.0, lam in 0.05f64..20.0) {
        prop_assume!((p * q - 1.0).abs() > 0.05);
        let e = ExponentPair::new(p, q, 1).unwrap();
        let c = c_from_lambda(&e, lam).unwrap();
        prop_assume!(c.is_normal());
        let back = lambda_from_c(&e, c).unwrap();
        prop_assert!((back / lam - 1.0).abs() < 1e-10);
    }

    #[test]
    fn region_is_symmetric(p in 0.01f64..10.0, q in 0.01f64..10.0, dim in 1usize..9) {
        let e = ExponentPair::new(p, q, dim).unwrap();
        let r = classify_region(&e);
        prop_assert_eq!(r, classify_region(&e.swapped().unwrap()));
        if dim <= 2 && (p * q - 1.0).abs() > 1e-9 {
            prop_assert_eq!(r, Region::Subcritical);
        }
    }

    #[test]
    fn green_is_self_adjoint(dim in 1usize..5, a in data(49), b in data(49)) {
        let g = grid(dim);
        let (a, b) = (g.project_mean_zero(&a), g.project_mean_zero(&b));
        let k = Green::new(&g).unwrap();
        let ab = g.integrate(&a.iter().zip(k.solve(&b).unwrap()).map(|(x, y)| x * y).collect::<Vec<_>>());
        let ba = g.integrate(&b.iter().zip(k.solve(&a).unwrap()).map(|(x, y)| x * y).collect::<Vec<_>>());
        let scale = g.lp_norm(&a, 2.0).unwrap() * g.lp_norm(&b, 2.0).unwrap();
        prop_assert!((ab - ba).abs() <= 1e-10 * scale);
        // K is positive on mean-zero data
        let aa = g.integrate(&a.iter().zip(k.solve(&a).unwrap()).map(|(x, y)| x * y).collect::<Vec<_>>());
        prop_assert!(aa >= -1e-14);
    }

    #[test]
    fn kappa_is_translation_equivariant(u in data(49), shift in -2.0f64..2.0, t in 0.2f64..4.0) {
        let g = grid(1);
        let k = kappa_shift(&g, &u, t).unwrap();
        let moved: Vec<f64> = u.iter().map(|x| x + shift).collect();
        let k2 = kappa_shift(&g, &moved, t).unwrap();
        prop_assert!((k2 - (k - shift)).abs() < 1e-8);
        let m = g.integrate(&u.iter().map(|x| signed_pow(x + k, t)).collect::<Vec<_>>());
        let scale = g.integrate(&u.iter().map(|x| (x + k).abs().powf(t)).collect::<Vec<_>>()).max(1e-300);
        prop_assert!(m.abs() <= 1e-9 * scale);
    }

    #[test]
    fn lp_norms_are_homogeneous(u in data(49), s in 1.0f64..6.0, lam in -5.0f64..5.0) {
        let g = grid(2);
        let scaled: Vec<f64> = u.iter().map(|x| lam * x).collect();
        let n = g.lp_norm(&u, s).unwrap();
        prop_assert!((g.lp_norm(&scaled, s).unwrap() - lam.abs() * n).abs() <= 1e-12 * (1.0 + lam.abs() * n));
    }
}
