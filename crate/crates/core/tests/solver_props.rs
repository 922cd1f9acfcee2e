use std::f64::consts::PI;

use fkss::grid::{random_bandlimited, transform, FracParams, ScalarField, TorusGrid, VectorField};
use fkss::propagator::{symbol, PropagatorTable};
use fkss::solver::{read_restart, run, write_restart, Solver, SolverConfig, SystemState};
use proptest::prelude::*;

fn grid() -> TorusGrid {
    TorusGrid::new(2, 16, 2.0 * PI).unwrap()
}

fn params() -> impl Strategy<Value = FracParams> {
    (1.1f64..=2.0, 0.3f64..=1.0, 0.0f64..1.0).prop_map(|(a, b, g)| FracParams::new(a, b, g).unwrap())
}

fn state(seed: u64, amp: f64) -> SystemState {
    let g = grid();
    let n = random_bandlimited(g, seed, 3, amp).unwrap().add(&ScalarField::constant(g, 1.0)).unwrap();
    let v = random_bandlimited(g, seed ^ 0x5a5a, 3, amp).unwrap();
    let psi = random_bandlimited(g, seed ^ 0xa5a5, 3, amp).unwrap();
    let u = fkss::grid::leray_project(&VectorField::new(vec![psi.clone(), psi.shifted([3, 1, 0])]).unwrap());
    SystemState::new(n, v, u).unwrap()
}

fn config(p: FracParams, dt: f64, steps: usize) -> SolverConfig {
    let mut c = SolverConfig::new(grid(), p, dt, steps);
    c.phi = ScalarField::from_fn(grid(), |x| 0.2 * x[0].cos());
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn density_mass_is_conserved_and_flow_stays_solenoidal(p in params(), seed in any::<u64>(), dt in 0.002f64..0.02) {
        let out = run(&config(p, dt, 12), state(seed, 0.4)).unwrap();
        prop_assert!(out.blowup.is_none());
        prop_assert!(out.diagnostics.mass_n_drift() <= 1e-11, "drift {}", out.diagnostics.mass_n_drift());
        prop_assert!(out.diagnostics.max_div_residual() <= 1e-10);
    }

    #[test]
    fn source_free_attractant_evolves_by_the_multiplier(p in params(), seed in any::<u64>(), dt in 0.001f64..0.2) {
        let g = grid();
        let v0 = random_bandlimited(g, seed, 7, 1.0).unwrap();
        let init = SystemState::new(ScalarField::zeros(g), v0.clone(), VectorField::zeros(g)).unwrap();
        let mut s = Solver::new(config(p, dt, 5), init).unwrap();
        let v0_hat = transform(&v0);
        for k in 1..=5 {
            s.step().unwrap();
            let t = k as f64 * dt;
            let tab = PropagatorTable::build(g, p, t, &Default::default()).unwrap();
            let got = transform(&s.state().v);
            for i in 0..g.len() {
                let want = v0_hat.coeffs()[i] * tab.e_beta[i];
                let scale = v0_hat.coeffs()[i].norm().max(1e-3);
                prop_assert!((got.coeffs()[i] - want).norm() <= 1e-12 * scale,
                    "mode {i} (lambda {}) step {k}", symbol(&g, g.k_sq(i), p.alpha, p.gamma));
            }
        }
    }

    #[test]
    fn restart_at_any_step_is_bitwise(p in params(), seed in any::<u64>(), split in 1usize..8) {
        let cfg = config(p, 0.01, 8);
        let init = state(seed, 0.3);
        let mut whole = Solver::new(cfg.clone(), init.clone()).unwrap();
        for _ in 0..8 {
            whole.step().unwrap();
        }
        let mut first = Solver::new(cfg.clone(), init).unwrap();
        for _ in 0..split {
            first.step().unwrap();
        }
        let mut bytes = Vec::new();
        write_restart(&mut bytes, &first).unwrap();
        let mut second = Solver::resume(cfg, read_restart(bytes.as_slice()).unwrap()).unwrap();
        prop_assert_eq!(second.steps_done(), split);
        for _ in split..8 {
            second.step().unwrap();
        }
        prop_assert_eq!(second.state(), whole.state());
    }
}
