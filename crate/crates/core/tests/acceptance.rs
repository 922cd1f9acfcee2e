//! Acceptance criteria 1 to 11. Each test prints one `PASS`/`FAIL` line with
//! the measured quantities next to the pinned tolerances.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use fkss::admissibility::{check, ExponentTuple, Rule};
use fkss::grid::{
    divergence_spectral, gradient_spectral, inverse_transform, leray_project_spectral, random_bandlimited, transform,
    FracParams, ScalarField, SpectralField, TorusGrid, VectorField,
};
use fkss::kernel::{decay_bound_check, eval_kernel, eval_kernel_at_time, kernel_normalization, kernel_smoothing_check, KernelTable};
use fkss::propagator::{scalar_subordination, scaling_identity_check};
use fkss::solver::{
    picard_solve, read_restart, run, temporal_order_study, verify_v_mass, write_restart, PicardConfig, Solver,
    SolverConfig, SystemState,
};
use fkss::specfun::{gamma_fn, mainardi_moment, mittag_leffler, EvalPolicy, MLOrder};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Writes straight to the process stdout so the verdict lines are visible
/// even when the harness captures test output.
fn report(criterion: u32, passed: bool, detail: &str) {
    let tag = if passed { "PASS" } else { "FAIL" };
    let mut out = std::io::stdout().lock();
    let _ = writeln!(out, "criterion {criterion:>2}: {tag}  {detail}");
    let _ = out.flush();
}

fn ml(beta: f64, gamma: f64, z: f64) -> f64 {
    mittag_leffler(MLOrder::new(beta, gamma).unwrap(), z, &EvalPolicy::default()).unwrap()
}

fn max_diff(a: &ScalarField, b: &ScalarField) -> f64 {
    a.values().iter().zip(b.values()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn state_diff(a: &SystemState, b: &SystemState) -> f64 {
    let mut m = max_diff(&a.n, &b.n).max(max_diff(&a.v, &b.v));
    for (x, y) in a.u.components().iter().zip(b.u.components()) {
        m = m.max(max_diff(x, y));
    }
    m
}

fn blob(g: TorusGrid, amp: f64, width: f64) -> ScalarField {
    let c = 0.5 * g.length();
    ScalarField::from_fn(g, |x| {
        let r2: f64 = (0..g.d()).map(|j| (x[j] - c).powi(2)).sum();
        amp * (-r2 / (2.0 * width * width)).exp()
    })
}

fn shear(g: TorusGrid, amp: f64) -> VectorField {
    let w = 2.0 * PI / g.length();
    VectorField::new(vec![
        ScalarField::from_fn(g, |x| amp * (w * x[1]).sin()),
        ScalarField::from_fn(g, |x| amp * (w * x[0]).sin()),
    ])
    .unwrap()
}

fn smooth_problem(n: usize, alpha: f64, beta: f64, gamma: f64, dt: f64, steps: usize, amp: f64) -> (SolverConfig, SystemState) {
    let g = TorusGrid::new(2, n, 2.0 * PI).unwrap();
    let mut cfg = SolverConfig::new(g, FracParams::new(alpha, beta, gamma).unwrap(), dt, steps);
    cfg.phi = ScalarField::from_fn(g, |x| 0.3 * x[0].cos());
    let s = SystemState::new(blob(g, amp, 0.6), blob(g, 0.5 * amp, 0.6), shear(g, 0.5 * amp)).unwrap();
    (cfg, s)
}

#[test]
fn criterion_01_special_functions() {
    let start = Instant::now();
    let exp_err = (0..=3000)
        .map(|i| {
            let x = 0.01 * i as f64;
            (ml(1.0, 1.0, -x) - (-x).exp()).abs()
        })
        .fold(0.0, f64::max);

    let mut rec_err = 0.0f64;
    for i in 1..=20 {
        let beta = 0.05 * i as f64;
        for j in 0..50 {
            let z = -50.0 * j as f64 / 49.0;
            let lhs = ml(beta, 1.0, z);
            let shifted = z * ml(beta, beta + 1.0, z);
            let scale = lhs.abs().max(1.0).max(shifted.abs());
            rec_err = rec_err.max((lhs - 1.0 - shifted).abs() / scale);
        }
    }

    let mut moment_err = 0.0f64;
    for beta in [0.3, 0.5, 0.7, 0.9] {
        for r in [0.0, 1.0, 2.0, 3.5] {
            let m = mainardi_moment(beta, r).unwrap();
            let closed = gamma_fn(1.0 + r).unwrap() / gamma_fn(1.0 + beta * r).unwrap();
            moment_err = moment_err.max(((m.quadrature - closed) / closed).abs());
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = exp_err <= 1e-12 && rec_err <= 1e-11 && moment_err <= 1e-6 && secs < 10.0;
    report(
        1,
        ok,
        &format!(
            "exp limit {exp_err:.2e} (<= 1e-12), recurrence {rec_err:.2e} over 1000 points (<= 1e-11), \
             Mainardi moments {moment_err:.2e} (<= 1e-6), {secs:.2} s (< 10 s)"
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_02_subordination() {
    let start = Instant::now();
    let pol = EvalPolicy::default();
    let mut worst = 0.0f64;
    for beta in [0.1, 0.3, 0.5, 0.7, 0.9] {
        for lam in [0.01, 0.1, 1.0, 10.0, 100.0] {
            for t in [0.01, 0.1, 0.5, 1.0, 2.0] {
                let (quad, e) = scalar_subordination(beta, lam, t, &pol).unwrap();
                worst = worst.max((quad - e).abs());
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst <= 1e-6 && secs < 30.0;
    report(2, ok, &format!("max |quadrature - E_beta| {worst:.2e} on 125 points (<= 1e-6), {secs:.2} s (< 30 s)"));
    assert!(ok);
}

#[test]
fn criterion_03_kernel_decay() {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for alpha in [1.2, 1.5, 1.8] {
        let c = decay_bound_check(alpha, 1, 50.0).unwrap();
        let (norm, _) = kernel_normalization(alpha).unwrap();
        let good = c.sup.is_finite() && c.tail_slope <= 0.05 && (norm - 1.0).abs() <= 1e-8;
        ok &= good;
        detail.push(format!(
            "alpha {alpha}: sup {:.3}, slope {:.3}, |int K - 1| {:.1e}",
            c.sup,
            c.tail_slope,
            (norm - 1.0).abs()
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    report(3, ok, &format!("{} (slope <= 0.05, mass 1e-8), {secs:.2} s (< 60 s)", detail.join("; ")));
    assert!(ok);
}

#[test]
fn criterion_04_smoothing_exponents() {
    let start = Instant::now();
    let t2: Vec<f64> = (0..8).map(|i| 0.25 * 100f64.powf(i as f64 / 7.0)).collect();
    let t15: Vec<f64> = (0..8).map(|i| 0.5f64.powf(1.5) * 10f64.powf(1.5 * i as f64 / 7.0)).collect();
    let tab2 = KernelTable::uniform(2.0, 1, 0.01, 40.0).unwrap();
    let tab15 = KernelTable::uniform(1.5, 1, 0.01, 40.0).unwrap();
    let cases = [
        (&tab2, 1.0, f64::INFINITY, &t2, "(2, 1, inf)"),
        (&tab15, 1.0, 2.0, &t15, "(1.5, 1, 2)"),
        (&tab15, 1.0, f64::INFINITY, &t15, "(1.5, 1, inf)"),
    ];
    let mut ok = true;
    let mut detail = Vec::new();
    for (tab, q, p, times, name) in cases {
        let e = kernel_smoothing_check(tab, q, p, times).unwrap();
        ok &= e.rel_slope_err() <= 0.15;
        detail.push(format!("{name}: slope {:.4} vs {:.4} ({:.1}%)", e.slope, e.predicted, 100.0 * e.rel_slope_err()));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 60.0;
    report(4, ok, &format!("{} (within 15%), {secs:.2} s (< 60 s)", detail.join("; ")));
    assert!(ok);
}

#[test]
fn criterion_05_mass_conservation() {
    let start = Instant::now();
    let g = TorusGrid::new(2, 64, 2.0 * PI).unwrap();
    let mut results = Vec::new();
    for gamma in [0.5, 0.0] {
        let mut cfg = SolverConfig::new(g, FracParams::new(1.8, 0.8, gamma).unwrap(), 0.005, 200);
        cfg.phi = ScalarField::from_fn(g, |x| 0.3 * x[0].cos());
        let n0 = blob(g, 1.0, 0.5).add(&random_bandlimited(g, 5, 6, 0.1).unwrap()).unwrap();
        let v0 = blob(g, 0.2, 0.5);
        let s0 = SystemState::new(n0, v0, shear(g, 0.3)).unwrap();
        let out = run(&cfg, s0.clone()).unwrap();
        assert!(out.blowup.is_none());
        assert_eq!(out.solver.steps_done(), 200);
        let chk = verify_v_mass(&out.diagnostics, s0.n.integral(), s0.v.integral(), &cfg.params, &cfg.policy).unwrap();
        results.push((gamma, out.diagnostics.mass_n_drift(), chk));
    }
    let secs = start.elapsed().as_secs_f64();
    let (_, drift_a, chk_a) = results[0];
    let (_, drift_b, chk_b) = results[1];
    let ok = drift_a <= 1e-11 && drift_b <= 1e-11 && chk_a.max_abs_err <= 1e-9 && chk_b.max_abs_err <= 1e-9 && secs < 300.0;
    report(
        5,
        ok,
        &format!(
            "64^2, 200 steps: mass drift {drift_a:.2e} / {drift_b:.2e} (<= 1e-11); v mean vs closed form \
             gamma=0.5 {:.2e}, gamma=0 {:.2e} (<= 1e-9); 1/(gamma Gamma(beta)) variant off by {:.2e}; {secs:.1} s (< 300 s)",
            chk_a.max_abs_err,
            chk_b.max_abs_err,
            chk_a.alt_formula_max_abs_err.unwrap_or(f64::NAN),
        ),
    );
    assert!(ok);
}

/// Classical exponential Euler, written against the grid primitives only:
/// factors and products are truncated to the kept modes, fluxes in
/// divergence form, velocity projected after every step.
struct Etd1 {
    grid: TorusGrid,
    alpha: f64,
    gamma: f64,
    dt: f64,
    keep: f64,
    grad_phi: Vec<ScalarField>,
}

impl Etd1 {
    fn cut(&self, s: &SpectralField) -> SpectralField {
        let mut out = s.clone();
        out.truncate(self.keep);
        out
    }

    fn product(&self, a: &ScalarField, b: &ScalarField) -> SpectralField {
        self.cut(&transform(&a.mul(b).unwrap()))
    }

    fn step(&self, n: &SpectralField, v: &SpectralField, u: &[SpectralField]) -> (SpectralField, SpectralField, Vec<SpectralField>) {
        let g = self.grid;
        let d = g.d();
        let nt = self.cut(n);
        let np = inverse_transform(&nt);
        let vp = inverse_transform(&self.cut(v));
        let gv: Vec<ScalarField> = gradient_spectral(&self.cut(v)).iter().map(inverse_transform).collect();
        let up: Vec<ScalarField> = u.iter().map(|c| inverse_transform(&self.cut(c))).collect();
        let flux_n: Vec<SpectralField> = (0..d)
            .map(|a| {
                let mut s = self.product(&up[a], &np);
                s.add_assign(&self.product(&np, &gv[a]));
                s
            })
            .collect();
        let flux_v: Vec<SpectralField> = (0..d).map(|a| self.product(&up[a], &vp)).collect();
        let fn_hat = divergence_spectral(&flux_n).map_real_multiplier(|_| -1.0);
        let div_uv = divergence_spectral(&flux_v);
        let mut fv_hat = nt.clone();
        for (c, e) in fv_hat.coeffs_mut().iter_mut().zip(div_uv.coeffs()) {
            *c -= e;
        }
        let force: Vec<SpectralField> = (0..d)
            .map(|a| {
                let row: Vec<SpectralField> = (0..d).map(|b| self.product(&up[a], &up[b])).collect();
                let mut f = divergence_spectral(&row);
                f.add_assign(&self.product(&np, &self.grad_phi[a]));
                f
            })
            .collect();
        let fu_hat: Vec<SpectralField> = leray_project_spectral(&force).iter().map(|f| f.map_real_multiplier(|_| -1.0)).collect();

        let phi1 = |lam: f64| if lam == 0.0 { self.dt } else { -(-lam * self.dt).exp_m1() / lam };
        let lam = |i: usize| g.xi_norm(i).powf(self.alpha);
        let advance = |x: &SpectralField, f: &SpectralField, shift: f64| {
            let mut out = x.clone();
            for (i, c) in out.coeffs_mut().iter_mut().enumerate() {
                let l = lam(i) + shift;
                *c = *c * (-l * self.dt).exp() + f.coeffs()[i] * phi1(l);
            }
            out
        };
        let n1 = advance(n, &fn_hat, 0.0);
        let v1 = advance(v, &fv_hat, self.gamma);
        let u1: Vec<SpectralField> = u.iter().zip(&fu_hat).map(|(x, f)| advance(x, f, 0.0)).collect();
        (n1, v1, leray_project_spectral(&u1))
    }
}

#[test]
fn criterion_06_classical_regression() {
    let start = Instant::now();
    let (cfg, s0) = smooth_problem(32, 2.0, 1.0, 0.3, 0.01, 50, 0.6);
    let phi_hat = {
        let mut s = transform(&cfg.phi);
        s.truncate(cfg.dealias);
        s
    };
    let etd = Etd1 {
        grid: cfg.grid,
        alpha: 2.0,
        gamma: 0.3,
        dt: cfg.dt,
        keep: cfg.dealias,
        grad_phi: gradient_spectral(&phi_hat).iter().map(inverse_transform).collect(),
    };
    let mut n = transform(&s0.n);
    let mut v = transform(&s0.v);
    let mut u: Vec<SpectralField> = s0.u.components().iter().map(transform).collect();
    let mut solver = Solver::new(cfg.clone(), s0).unwrap();
    let mut worst = 0.0f64;
    for k in 1..=50 {
        let (n1, v1, u1) = etd.step(&n, &v, &u);
        n = n1;
        v = v1;
        u = u1;
        solver.step().unwrap();
        let reference = SystemState {
            t: k as f64 * cfg.dt,
            n: inverse_transform(&n),
            v: inverse_transform(&v),
            u: VectorField::new(u.iter().map(inverse_transform).collect()).unwrap(),
        };
        worst = worst.max(state_diff(solver.state(), &reference));
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = worst <= 1e-12 && secs < 60.0;
    report(6, ok, &format!("32^2, 50 steps: max per-step deviation from ETD1 {worst:.2e} (<= 1e-12), {secs:.2} s (< 60 s)"));
    assert!(ok);
}

#[test]
fn criterion_07_temporal_order() {
    let start = Instant::now();
    let mut ok = true;
    let mut detail = Vec::new();
    for beta in [0.6, 1.0] {
        let (cfg, s0) = smooth_problem(32, 1.8, beta, 0.5, 0.025, 8, 0.5);
        let st = temporal_order_study(&cfg, &s0, 8, 3).unwrap();
        ok &= st.orders.iter().all(|o| (0.8..=1.2).contains(o));
        detail.push(format!(
            "beta {beta}: errors {:?}, orders {:?}",
            st.errors.iter().map(|e| format!("{e:.2e}")).collect::<Vec<_>>(),
            st.orders.iter().map(|o| format!("{o:.3}")).collect::<Vec<_>>()
        ));
    }
    let secs = start.elapsed().as_secs_f64();
    ok &= secs < 300.0;
    report(7, ok, &format!("{} (orders in [0.8, 1.2]), {secs:.1} s (< 300 s)", detail.join("; ")));
    assert!(ok);
}

#[test]
fn criterion_08_picard_contraction() {
    let start = Instant::now();
    let (mut cfg, s0) = smooth_problem(16, 1.8, 0.8, 0.5, 0.01, 10, 0.2);
    cfg.picard = PicardConfig {
        enabled: true,
        max_iters: 60,
        tol: 1e-10,
    };
    let small = picard_solve(&s0, 0.1, 10, &cfg).unwrap();
    let mut marcher = Solver::new(cfg.clone(), s0.clone()).unwrap();
    let mut agree = 0.0f64;
    for k in 1..=10 {
        marcher.step().unwrap();
        agree = agree.max(state_diff(marcher.state(), &small.trajectory[k]));
    }
    let max_ratio = small.ratios.iter().copied().fold(0.0, f64::max);
    let big = picard_solve(&s0.scaled(100.0), 0.1, 10, &cfg).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let ok = small.converged
        && max_ratio < 1.0
        && agree <= 10.0 * cfg.picard.tol
        && big.failure.is_some()
        && !big.converged
        && secs < 120.0;
    report(
        8,
        ok,
        &format!(
            "small data: {} iterations, max ratio {max_ratio:.3} (< 1), marcher gap {agree:.2e} (<= 1e-9); \
             x100 data: failure report {:?}; {secs:.2} s (< 120 s)",
            small.iterations,
            big.failure.as_ref().map(|f| f.reason.as_str()),
        ),
    );
    assert!(ok);
}

#[test]
fn criterion_09_self_similarity() {
    let start = Instant::now();
    let pol = EvalPolicy::default();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut scaling = 0.0f64;
    for _ in 0..100 {
        let alpha = rng.gen_range(1.01..=2.0);
        let beta = rng.gen_range(0.05..1.0);
        let lam = rng.gen_range(0.2..5.0);
        let t = rng.gen_range(0.01..3.0);
        let xi = rng.gen_range(0.0..6.0);
        scaling = scaling.max(scaling_identity_check(alpha, beta, lam, t, xi, &pol).unwrap());
    }
    let mut excess = 0.0f64;
    for alpha in [1.2, 1.5, 1.8, 2.0] {
        for t in [0.3, 1.7] {
            for x in [0.0, 0.5, 2.0, 7.0] {
                let direct = eval_kernel_at_time(alpha, 1, t, x).unwrap();
                let c = t.powf(-1.0 / alpha);
                let unit = eval_kernel(alpha, 1, c * x).unwrap();
                let budget = 2.0 * (direct.abs_err + c * unit.abs_err);
                excess = excess.max((direct.value - c * unit.value).abs() / budget);
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    let ok = scaling <= 1e-12 && excess <= 1.0 && secs < 30.0;
    report(
        9,
        ok,
        &format!(
            "scaling identity {scaling:.2e} over 100 tuples (<= 1e-12); kernel rescaling gap / (2 x quadrature error) \
             {excess:.3} (<= 1); {secs:.2} s (< 30 s)"
        ),
    );
    assert!(ok);
}

struct Example {
    rule: Rule,
    tuple: ExponentTuple,
    stated: Option<bool>,
    /// Verdict from evaluating the inequalities by hand.
    derived: Option<bool>,
    /// Case label stated for the example, if any.
    stated_case: Option<&'static str>,
    /// Labels that must not appear in the computed case path.
    excluded_prefix: Option<&'static str>,
}

fn tup(d: u32, alpha: f64, beta: f64, mu: f64, q: f64, p: f64, r: f64) -> ExponentTuple {
    ExponentTuple { d, alpha, beta, mu, p, q, r }
}

#[test]
fn criterion_10_admissibility() {
    let start = Instant::now();
    let ex = |rule, tuple, stated, derived, stated_case, excluded_prefix| Example {
        rule,
        tuple,
        stated,
        derived,
        stated_case,
        excluded_prefix,
    };
    let examples = vec![
        ex(Rule::Theorem1, tup(2, 2.0, 0.5, 0.0, 2.0, 3.0, 3.0), Some(true), Some(true), Some("Theorem1.(1)"), None),
        ex(Rule::Theorem1, tup(2, 2.0, 0.5, 0.0, 0.5, 3.0, 3.0), Some(false), Some(false), None, None),
        ex(Rule::Theorem1, tup(3, 1.5, 0.9, 0.0, 7.0, 7.0, 7.0), Some(true), Some(true), Some("Theorem1.(2)"), None),
        ex(Rule::Assumption1, tup(2, 1.4, 0.5, 0.0, 6.0, 6.0, 6.0), Some(true), Some(true), Some("Assumption1.(II)"), None),
        ex(Rule::Assumption1, tup(2, 2.0, 0.9, 0.0, 1.5, 3.0, 3.0), Some(true), Some(true), Some("Assumption1.(I)"), None),
        ex(Rule::Assumption1, tup(2, 2.0, 0.5, 0.0, 100.0, 2.5, 100.0), Some(true), Some(true), Some("Assumption1.(III)"), None),
        // p < qd/(d − (α−1−μ)q) = 3/1.25 = 2.4 fails for p = 3.
        ex(Rule::Theorem3, tup(2, 2.0, 0.5, 0.5, 1.5, 3.0, 3.0), Some(true), Some(false), Some("Theorem3.(1)"), None),
        ex(Rule::Theorem3, tup(2, 1.5, 0.5, 1.0, 4.0, 4.0, 4.0), Some(false), Some(false), None, None),
        ex(Rule::Theorem3, tup(3, 1.8, 0.7, 2.0, 9.0, 9.0, 9.0), Some(false), Some(false), None, None),
        // p < qd/(d − (α−1−μ)q) = 10/3 fails for p = 4.
        ex(Rule::Theorem3, tup(2, 2.0, 0.5, 1.2, 5.0, 4.0, 5.0), Some(true), Some(false), Some("Theorem3.(4)"), None),
        ex(Rule::Assumption2, tup(2, 1.2, 0.5, 0.1, 8.0, 12.0, 12.0), Some(true), Some(true), Some("Assumption2.I.(i).(2)"), None),
        ex(Rule::Assumption2, tup(2, 1.6, 0.5, 0.0, 8.0, 8.0, 8.0), None, None, None, Some("Assumption2.II.")),
        ex(Rule::Assumption2, tup(2, 1.3, 0.9, 0.29, 3.0, 25.0, 25.0), None, None, None, Some("Assumption2.I.")),
    ];
    let mut reproduced = 0;
    let mut stated_total = 0;
    let mut lines = Vec::new();
    for e in &examples {
        let rep = check(e.rule, &e.tuple).unwrap();
        if let Some(d) = e.derived {
            assert_eq!(rep.satisfied, d, "{:?} {:?}", e.rule, e.tuple);
        }
        if let Some(prefix) = e.excluded_prefix {
            assert!(rep.case_path.iter().all(|c| !c.starts_with(prefix)), "{prefix} fired for {:?}", e.tuple);
        }
        if let Some(s) = e.stated {
            stated_total += 1;
            if rep.satisfied == s {
                reproduced += 1;
            }
            let case_note = match (e.stated_case, rep.first_case()) {
                (Some(sc), Some(c)) if sc != c => format!(", stated case {sc}, computed {c}"),
                _ => String::new(),
            };
            if rep.satisfied != s || !case_note.is_empty() {
                lines.push(format!(
                    "    {} {:?}: stated {}, computed {}{}",
                    e.rule,
                    (e.tuple.d, e.tuple.alpha, e.tuple.beta, e.tuple.mu, e.tuple.q, e.tuple.p, e.tuple.r),
                    s,
                    rep.satisfied,
                    case_note
                ));
            }
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let mut fired = 0usize;
    let mut empty_fired = 0usize;
    for _ in 0..10_000 {
        let exp = |rng: &mut ChaCha8Rng| if rng.gen_bool(0.05) { f64::INFINITY } else { rng.gen_range(1.0..40.0) };
        let t = ExponentTuple {
            d: rng.gen_range(2..=4),
            alpha: rng.gen_range(1.001..=2.0),
            beta: rng.gen_range(0.01..0.999),
            mu: if rng.gen_bool(0.2) { 0.0 } else { rng.gen_range(0.0..2.5) },
            p: exp(&mut rng),
            q: exp(&mut rng),
            r: exp(&mut rng),
        };
        for rule in Rule::ALL {
            for m in check(rule, &t).unwrap().matches {
                fired += 1;
                if m.constraints.iter().any(|c| !c.interval_nonempty()) {
                    empty_fired += 1;
                }
            }
        }
    }
    assert_eq!(empty_fired, 0);
    let secs = start.elapsed().as_secs_f64();
    assert!(secs < 10.0);

    let ok = reproduced == stated_total && empty_fired == 0;
    report(
        10,
        ok,
        &format!(
            "stated verdicts reproduced {reproduced}/{stated_total}; every computed verdict matches the hand-evaluated \
             inequalities; random scan: {fired} firings over 10^4 tuples, {empty_fired} with an empty interval; {secs:.2} s (< 10 s)"
        ),
    );
    let mut out = std::io::stdout().lock();
    for l in &lines {
        let _ = writeln!(out, "{l}");
    }
}

#[test]
fn criterion_11_determinism() {
    let start = Instant::now();
    let (cfg, s0) = smooth_problem(32, 1.7, 0.75, 0.4, 0.01, 20, 0.5);
    let csv = |s: SystemState| {
        let out = run(&cfg, s).unwrap();
        let mut bytes = Vec::new();
        out.diagnostics.write_csv(&mut bytes).unwrap();
        (bytes, out.solver.state().clone())
    };
    let (a, final_a) = csv(s0.clone());
    let (b, _) = csv(s0.clone());
    let identical_csv = a == b;

    let mut first = Solver::new(cfg.clone(), s0).unwrap();
    for _ in 0..7 {
        first.step().unwrap();
    }
    let mut bytes = Vec::new();
    write_restart(&mut bytes, &first).unwrap();
    let mut resumed = Solver::resume(cfg.clone(), read_restart(bytes.as_slice()).unwrap()).unwrap();
    for _ in 7..20 {
        resumed.step().unwrap();
    }
    let bitwise = resumed.state() == &final_a;
    let secs = start.elapsed().as_secs_f64();
    let ok = identical_csv && bitwise;
    report(
        11,
        ok,
        &format!(
            "restart after 7 of 20 steps bitwise equal: {bitwise}; repeated runs give identical diagnostics CSV: \
             {identical_csv} ({} bytes); {secs:.2} s",
            a.len()
        ),
    );
    assert!(ok);
}
