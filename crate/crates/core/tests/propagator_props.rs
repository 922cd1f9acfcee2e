use fkss::grid::{lp_norm, random_bandlimited, FracParams, TorusGrid};
use fkss::propagator::{
    apply_ml, duhamel_weight, radial_classes, scalar_subordination, symbol, MLKind, PropagatorTable,
};
use fkss::specfun::EvalPolicy;
use proptest::prelude::*;

fn setup() -> impl Strategy<Value = (TorusGrid, FracParams)> {
    (1usize..=2, 1.0f64..10.0, 1.01f64..=2.0, 0.05f64..=1.0, 0.0f64..2.0).prop_map(|(d, l, a, b, g)| {
        (TorusGrid::new(d, 16, l).unwrap(), FracParams::new(a, b, g).unwrap())
    })
}

/// Multiplier per distinct `|k|²`, in increasing `|k|²`.
fn per_class(t: &PropagatorTable) -> Vec<f64> {
    let (keys, class) = radial_classes(&t.grid);
    let mut out = vec![f64::NAN; keys.len()];
    for (i, c) in class.iter().enumerate() {
        out[*c] = t.e_beta[i];
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn multipliers_decrease_in_frequency_and_time((g, p) in setup(), t in 1e-3f64..3.0, dt in 1e-3f64..1.0) {
        let pol = EvalPolicy::default();
        let a = PropagatorTable::build(g, p, t, &pol).unwrap();
        let b = PropagatorTable::build(g, p, t + dt, &pol).unwrap();
        let ca = per_class(&a);
        for w in ca.windows(2) {
            prop_assert!(w[1] <= w[0]);
        }
        for (x, y) in a.e_beta.iter().zip(&b.e_beta) {
            prop_assert!(*y <= *x);
            prop_assert!(*x <= 1.0 && *x > 0.0);
        }
    }

    #[test]
    fn propagator_contracts_in_l2((g, p) in setup(), t in 0.0f64..3.0, seed in any::<u64>()) {
        let f = random_bandlimited(g, seed, 5, 1.0).unwrap();
        let h = apply_ml(&f, &p, t, MLKind::EBeta, &EvalPolicy::default()).unwrap();
        prop_assert!(lp_norm(&h, 2.0).unwrap() <= lp_norm(&f, 2.0).unwrap() * (1.0 + 1e-12));
    }

    #[test]
    fn classical_order_is_the_semigroup(l in 1.0f64..10.0, alpha in 1.01f64..=2.0, gamma in 0.0f64..2.0, t in 0.0f64..2.0) {
        let g = TorusGrid::new(2, 16, l).unwrap();
        let p = FracParams::new(alpha, 1.0, gamma).unwrap();
        let tab = PropagatorTable::build(g, p, t, &EvalPolicy::default()).unwrap();
        for i in 0..g.len() {
            let exact = (-t * symbol(&g, g.k_sq(i), alpha, gamma)).exp();
            prop_assert!((tab.e_beta[i] - exact).abs() <= 1e-12);
        }
    }

    #[test]
    fn weights_telescope(beta in 0.05f64..=1.0, lam in 0.0f64..50.0, cuts in prop::collection::vec(0.01f64..1.0, 1..8)) {
        let pol = EvalPolicy::default();
        let mut knots = vec![0.0];
        for c in &cuts {
            knots.push(knots.last().unwrap() + c);
        }
        let total = *knots.last().unwrap();
        let sum: f64 = knots.windows(2).map(|w| duhamel_weight(w[0], w[1], lam, beta, &pol).unwrap()).sum();
        let whole = duhamel_weight(0.0, total, lam, beta, &pol).unwrap();
        prop_assert!((sum - whole).abs() <= 1e-12 * whole.abs().max(1.0));
    }

    #[test]
    fn scalar_subordination_holds(beta in 0.1f64..0.95, lam in 0.01f64..20.0, t in 0.01f64..3.0) {
        let (quad, ml) = scalar_subordination(beta, lam, t, &EvalPolicy::default()).unwrap();
        prop_assert!((quad - ml).abs() <= 1e-6, "{quad} vs {ml}");
    }
}
