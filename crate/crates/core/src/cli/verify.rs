//! Property suites behind `fkss verify`.

use std::f64::consts::PI;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::grid::{FracParams, ScalarField, TorusGrid, VectorField};
use crate::kernel::{decay_bound_check, eval_kernel, eval_kernel_at_time, kernel_normalization, kernel_smoothing_check, KernelTable};
use crate::propagator::{duhamel_weight, geometric_times, measure_smoothing_exponent, scalar_subordination, scaling_identity_check};
use crate::quad::{integrate, QuadOptions};
use crate::solver::{run, temporal_order_study, verify_v_mass, SolverConfig, SystemState};
use crate::specfun::{mainardi_moment, mittag_leffler, EvalPolicy, MLOrder};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Suite {
    Specfun,
    Kernel,
    Propagator,
    Solver,
    All,
}

/// Outcome of one property check.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub measured: f64,
    /// Human-readable acceptance condition, e.g. `<= 1e-12`.
    pub criterion: String,
    pub passed: bool,
    pub note: Option<String>,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "{tag} {}: measured {:e}, required {}", self.name, self.measured, self.criterion)?;
        if let Some(n) = &self.note {
            write!(f, " ({n})")?;
        }
        Ok(())
    }
}

fn at_most(name: &str, tol: f64, measured: Result<f64, String>) -> Check {
    match measured {
        Ok(m) => Check {
            name: name.into(),
            measured: m,
            criterion: format!("<= {tol:e}"),
            passed: m <= tol,
            note: None,
        },
        Err(e) => Check {
            name: name.into(),
            measured: f64::NAN,
            criterion: format!("<= {tol:e}"),
            passed: false,
            note: Some(e),
        },
    }
}

fn within(name: &str, lo: f64, hi: f64, measured: Result<f64, String>) -> Check {
    let mut c = at_most(name, hi, measured);
    c.criterion = format!("in [{lo}, {hi}]");
    c.passed = c.measured >= lo && c.measured <= hi;
    c
}

fn s<E: ToString>(e: E) -> String {
    e.to_string()
}

pub fn run_suite(suite: Suite) -> Vec<Check> {
    match suite {
        Suite::Specfun => specfun_suite(),
        Suite::Kernel => kernel_suite(),
        Suite::Propagator => propagator_suite(),
        Suite::Solver => solver_suite(),
        Suite::All => [specfun_suite(), kernel_suite(), propagator_suite(), solver_suite()].concat(),
    }
}

fn specfun_suite() -> Vec<Check> {
    let p = EvalPolicy::default();
    let mut out = Vec::new();

    out.push(at_most(
        "specfun/exponential-limit",
        1e-12,
        (|| {
            let o = MLOrder::new(1.0, 1.0).map_err(s)?;
            (0..=300).try_fold(0.0f64, |m, i| {
                let x = 0.1 * i as f64;
                Ok(m.max((mittag_leffler(o, -x, &p).map_err(s)? - (-x).exp()).abs()))
            })
        })(),
    ));

    out.push(at_most(
        "specfun/second-parameter-two",
        1e-12,
        (|| {
            let o = MLOrder::new(1.0, 2.0).map_err(s)?;
            (1..=300).try_fold(0.0f64, |m, i| {
                let z = -0.1 * i as f64;
                Ok(m.max((mittag_leffler(o, z, &p).map_err(s)? - z.exp_m1() / z).abs()))
            })
        })(),
    ));

    out.push(at_most(
        "specfun/recurrence",
        1e-11,
        (|| {
            let mut m = 0.0f64;
            for i in 1..=10 {
                let beta = 0.1 * i as f64;
                let e1 = MLOrder::classical(beta).map_err(s)?;
                let e2 = MLOrder::new(beta, beta + 1.0).map_err(s)?;
                for j in 0..=20 {
                    let z = -2.5 * j as f64;
                    let lhs = mittag_leffler(e1, z, &p).map_err(s)?;
                    let rhs = 1.0 + z * mittag_leffler(e2, z, &p).map_err(s)?;
                    m = m.max((lhs - rhs).abs());
                }
            }
            Ok(m)
        })(),
    ));

    out.push(at_most(
        "specfun/continuity-at-beta-one",
        1e-5,
        (|| {
            let o = MLOrder::classical(1.0 - 1e-7).map_err(s)?;
            let loose = EvalPolicy {
                target_rel_err: 1e-9,
                ..p
            };
            (0..=100).try_fold(0.0f64, |m, i| {
                let x = 0.1 * i as f64;
                Ok(m.max((mittag_leffler(o, -x, &loose).map_err(s)? - (-x).exp()).abs()))
            })
        })(),
    ));

    out.push(at_most(
        "specfun/mainardi-moments",
        1e-6,
        (|| {
            let mut m = 0.0f64;
            for beta in [0.3, 0.5, 0.7, 0.9] {
                for r in [0.0, 1.0, 2.0, 3.5] {
                    m = m.max(mainardi_moment(beta, r).map_err(s)?.rel_discrepancy());
                }
            }
            Ok(m)
        })(),
    ));
    out
}

fn kernel_suite() -> Vec<Check> {
    let mut out = Vec::new();
    for alpha in [1.2, 1.5, 1.8] {
        out.push(at_most(
            &format!("kernel/normalization alpha={alpha}"),
            1e-8,
            kernel_normalization(alpha).map(|(v, _)| (v - 1.0).abs()).map_err(s),
        ));
        out.push(at_most(
            &format!("kernel/decay-tail-slope alpha={alpha}"),
            0.05,
            decay_bound_check(alpha, 1, 50.0).map(|c| c.tail_slope).map_err(s),
        ));
    }

    let mut excess = 0.0f64;
    let res: Result<(), String> = (|| {
        for alpha in [1.3, 2.0] {
            for t in [0.5, 2.0] {
                for x in [0.0, 0.7, 3.0] {
                    let direct = eval_kernel_at_time(alpha, 1, t, x).map_err(s)?;
                    let c = t.powf(-1.0 / alpha);
                    let scaled = eval_kernel(alpha, 1, c * x).map_err(s)?;
                    let diff = (direct.value - c * scaled.value).abs();
                    let budget = 2.0 * (direct.abs_err + c * scaled.abs_err);
                    excess = excess.max(diff / budget);
                }
            }
        }
        Ok(())
    })();
    out.push(at_most(
        "kernel/self-similarity (difference over twice the quadrature error)",
        1.0,
        res.map(|_| excess),
    ));

    out.push(at_most(
        "kernel/smoothing-slope alpha=2 q=1 p=inf (relative error)",
        0.15,
        (|| {
            let table = KernelTable::uniform(2.0, 1, 0.01, 40.0).map_err(s)?;
            let times: Vec<f64> = (0..8).map(|i| 0.25 * 100f64.powf(i as f64 / 7.0)).collect();
            Ok(kernel_smoothing_check(&table, 1.0, f64::INFINITY, &times).map_err(s)?.rel_slope_err())
        })(),
    ));
    out
}

fn propagator_suite() -> Vec<Check> {
    let p = EvalPolicy::default();
    let mut out = Vec::new();

    out.push(at_most(
        "propagator/scaling-identity (100 random tuples)",
        1e-12,
        (|| {
            let mut rng = ChaCha8Rng::seed_from_u64(20);
            let mut m = 0.0f64;
            for _ in 0..100 {
                let alpha = rng.gen_range(1.05..=2.0);
                let beta = rng.gen_range(0.1..1.0);
                let lam = rng.gen_range(0.5..2.0);
                let t = rng.gen_range(0.01..2.0);
                let xi = rng.gen_range(0.0..5.0);
                m = m.max(scaling_identity_check(alpha, beta, lam, t, xi, &p).map_err(s)?);
            }
            Ok(m)
        })(),
    ));

    out.push(at_most(
        "propagator/scalar-subordination",
        1e-6,
        (|| {
            let mut m = 0.0f64;
            for beta in [0.3, 0.6, 0.9] {
                for lam in [0.1, 1.0, 10.0] {
                    for t in [0.1, 1.0] {
                        let (a, b) = scalar_subordination(beta, lam, t, &p).map_err(s)?;
                        m = m.max((a - b).abs());
                    }
                }
            }
            Ok(m)
        })(),
    ));

    out.push(at_most(
        "propagator/duhamel-weight-vs-quadrature (relative)",
        1e-10,
        (|| {
            let mut m = 0.0f64;
            for beta in [0.4, 0.8] {
                for lam in [0.0, 1.0, 30.0] {
                    for (a, b) in [(0.0, 0.1), (0.3, 0.4), (1.0, 2.0)] {
                        let w = duhamel_weight(a, b, lam, beta, &p).map_err(s)?;
                        let o = MLOrder::new(beta, beta).map_err(s)?;
                        let mut err = None;
                        let q = integrate(
                            |u| match mittag_leffler(o, -lam * u, &p) {
                                Ok(v) => v,
                                Err(e) => {
                                    err = Some(e.to_string());
                                    f64::NAN
                                }
                            },
                            a.powf(beta),
                            b.powf(beta),
                            QuadOptions::new(1e-15, 1e-14),
                        );
                        if let Some(e) = err {
                            return Err(e);
                        }
                        m = m.max((w - q.value / beta).abs() / w.abs());
                    }
                }
            }
            Ok(m)
        })(),
    ));

    out.push(at_most(
        "propagator/periodic-smoothing-slope alpha=2 beta=0.9 q=1 p=inf (relative error)",
        0.15,
        (|| {
            let g = TorusGrid::new(1, 4096, 2.0 * PI).map_err(s)?;
            let params = FracParams::new(2.0, 0.9, 0.0).map_err(s)?;
            let w = 0.01;
            let f = ScalarField::from_fn(g, |x| (-(x[0] - PI).powi(2) / (2.0 * w * w)).exp());
            let times = geometric_times(2e-3, 0.05, 8);
            let fit = measure_smoothing_exponent(&f, &params, 1.0, f64::INFINITY, &times, &p).map_err(s)?;
            Ok(((fit.slope - fit.predicted) / fit.predicted).abs())
        })(),
    ));
    out
}

/// The small-data problem used by the solver suite: 16² grid, Gaussian
/// density, proportional attractant, shear flow and a cosine potential.
pub fn preset_problem(beta: f64, dt: f64, steps: usize) -> Result<(SolverConfig, SystemState), String> {
    let g = TorusGrid::new(2, 16, 2.0 * PI).map_err(s)?;
    let params = FracParams::new(1.8, beta, 0.5).map_err(s)?;
    let mut cfg = SolverConfig::new(g, params, dt, steps);
    cfg.phi = ScalarField::from_fn(g, |x| 0.3 * x[0].cos());
    let blob = |amp: f64| {
        ScalarField::from_fn(g, move |x| {
            let r2 = (x[0] - PI).powi(2) + (x[1] - PI).powi(2);
            amp * (-r2 / 0.72).exp()
        })
    };
    let u = VectorField::new(vec![
        ScalarField::from_fn(g, |x| 0.25 * x[1].sin()),
        ScalarField::from_fn(g, |x| 0.25 * x[0].sin()),
    ])
    .map_err(s)?;
    let state = SystemState::new(blob(0.5), blob(0.25), u).map_err(s)?;
    Ok((cfg, state))
}

fn solver_suite() -> Vec<Check> {
    let mut out = Vec::new();
    let base = (|| {
        let (cfg, init) = preset_problem(0.8, 0.01, 40)?;
        let res = run(&cfg, init.clone()).map_err(s)?;
        Ok::<_, String>((cfg, init, res))
    })();
    match base {
        Ok((cfg, init, res)) => {
            out.push(at_most("solver/mass-drift (relative)", 1e-12, Ok(res.diagnostics.mass_n_drift())));
            out.push(at_most("solver/divergence-residual", 1e-10, Ok(res.diagnostics.max_div_residual())));
            out.push(at_most(
                "solver/attractant-mass-closed-form",
                1e-10,
                verify_v_mass(&res.diagnostics, init.n.integral(), init.v.integral(), &cfg.params, &cfg.policy)
                    .map(|c| c.max_abs_err)
                    .map_err(s),
            ));
            out.push(at_most(
                "solver/no-blowup-stop",
                0.0,
                Ok(if res.blowup.is_some() { 1.0 } else { 0.0 }),
            ));
        }
        Err(e) => out.push(at_most("solver/preset-run", 0.0, Err(e))),
    }
    for beta in [0.6, 1.0] {
        let study = (|| {
            let (cfg, init) = preset_problem(beta, 0.02, 10)?;
            temporal_order_study(&cfg, &init, 8, 3).map_err(s)
        })();
        match study {
            Ok(st) => {
                for (i, o) in st.orders.iter().enumerate() {
                    out.push(within(
                        &format!("solver/temporal-order beta={beta} level {i}"),
                        0.8,
                        1.2,
                        Ok(*o),
                    ));
                }
            }
            Err(e) => out.push(within(&format!("solver/temporal-order beta={beta}"), 0.8, 1.2, Err(e))),
        }
    }
    out
}
