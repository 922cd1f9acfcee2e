use fkss::grid::{
    bessel_potential_norm, frac_laplacian, leray_project, lp_norm, parseval_energy, random_bandlimited, sobolev_norm,
    transform, ScalarField, TorusGrid, VectorField,
};
use proptest::prelude::*;

fn grid() -> impl Strategy<Value = TorusGrid> {
    (1usize..=3, prop_oneof![Just(8usize), Just(16)], 0.5f64..20.0)
        .prop_filter("keep 3-D small", |(d, n, _)| *d < 3 || *n == 8)
        .prop_map(|(d, n, l)| TorusGrid::new(d, n, l).unwrap())
}

fn field(g: TorusGrid, seed: u64) -> ScalarField {
    random_bandlimited(g, seed, g.n() / 2 - 1, 1.0).unwrap()
}

fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn parseval(g in grid(), seed in any::<u64>()) {
        let f = field(g, seed);
        let l2 = lp_norm(&f, 2.0).unwrap();
        let e = parseval_energy(&transform(&f));
        prop_assert!((l2 * l2 - e).abs() <= 1e-12 * e);
    }

    #[test]
    fn homogeneous_and_bessel_norms_are_equivalent(g in grid(), seed in any::<u64>(), mu in 0.0f64..=2.0) {
        let f = field(g, seed);
        let a = lp_norm(&f, 2.0).unwrap() + sobolev_norm(&f, mu, 2.0).unwrap();
        let b = bessel_potential_norm(&f, mu, 2.0).unwrap();
        prop_assert!(a <= 2.0 * b * (1.0 + 1e-12) && b <= 2.0 * a * (1.0 + 1e-12), "{a} vs {b}");
    }

    #[test]
    fn leray_is_a_contraction_and_idempotent(g in grid(), seed in any::<u64>()) {
        let comps = (0..g.d()).map(|j| field(g, seed.wrapping_add(j as u64))).collect();
        let v = VectorField::new(comps).unwrap();
        let pv = leray_project(&v);
        let ppv = leray_project(&pv);
        let norm = |w: &VectorField| lp_norm(&w.magnitude(), 2.0).unwrap();
        prop_assert!(norm(&pv) <= norm(&v) * (1.0 + 1e-12));
        for (a, b) in pv.components().iter().zip(ppv.components()) {
            prop_assert!(max_diff(a, b) <= 1e-13 * v.max_abs().max(1.0));
        }
    }

    #[test]
    fn fractional_laplacian_commutes_with_shifts(
        g in grid(), seed in any::<u64>(), alpha in 0.1f64..=2.0, shift in prop::array::uniform3(-9isize..9),
    ) {
        let f = field(g, seed);
        let a = frac_laplacian(&f.shifted(shift), alpha).unwrap();
        let b = frac_laplacian(&f, alpha).unwrap().shifted(shift);
        let scale = b.max_abs().max(1.0);
        prop_assert!(max_diff(&a, &b) <= 1e-12 * scale);
    }
}
