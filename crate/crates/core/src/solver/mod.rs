//! Mild-solution time integration of the coupled density / attractant /
//! velocity system on the torus.
//!
//! Each unknown `X ∈ {n, v, u}` is advanced mode by mode with
//! `X̂(t_{k+1}) = E_β(−t_{k+1}^β λ) X̂₀ + Σ_{j≤k} W_{k−j}(λ) F̂_j`, where
//! `W_m(λ) = ∫_{m·dt}^{(m+1)·dt} s^{β−1} E_{β,β}(−λ s^β) ds` and `F̂_j` is the
//! nonlinearity frozen on step `j`. The whole history is kept because the
//! memory kernel never forgets.

mod diagnostics;
mod picard;
mod restart;

use num_complex::Complex64;
use rayon::prelude::*;
use thiserror::Error;

use crate::grid::{
    divergence_residual, divergence_spectral, gradient_spectral, inverse_transform, leray_project_spectral,
    transform, FracParams, GridError, ScalarField, SpectralField, TorusGrid, VectorField,
};
use crate::propagator::{radial_classes, symbol, weight_table};
use crate::specfun::{mittag_leffler, EvalPolicy, MLOrder, SpecfunError};

pub use diagnostics::{
    blowup_monitor, decay_estimate_check, synthetic_diagnostics, verify_v_mass, weight_exponent, DecaySup, DiagRecord, Diagnostics,
    NormedField, VMassCheck,
};
pub use picard::{picard_solve, ContractionFailure, PicardOutcome};
pub use restart::{load_restart, read_restart, save_restart, write_restart, RestartData};

/// Largest admissible relative divergence of the velocity.
pub const DIV_TOL: f64 = 1e-10;

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Specfun(#[from] SpecfunError),
    #[error("blow-up at t = {t} (step {step}): {reason}")]
    Blowup { t: f64, step: usize, reason: String },
    #[error("restart format error: {0}")]
    Format(String),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
}

/// Settings of the fixed-point mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PicardConfig {
    pub enabled: bool,
    pub max_iters: usize,
    pub tol: f64,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            enabled: false,
            max_iters: 50,
            tol: 1e-10,
        }
    }
}

/// Lebesgue exponents used for `‖n‖_q`, `‖∇v‖_r` and `‖u‖_p`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NormExponents {
    pub q: f64,
    pub r: f64,
    pub p: f64,
}

impl Default for NormExponents {
    fn default() -> Self {
        Self { q: 2.0, r: 2.0, p: 2.0 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub grid: TorusGrid,
    pub params: FracParams,
    pub dt: f64,
    pub n_steps: usize,
    /// External potential; its gradient enters the force `n∇φ`.
    pub phi: ScalarField,
    /// Fraction of the spectrum kept in nonlinear products.
    pub dealias: f64,
    pub blowup_threshold: f64,
    pub picard: PicardConfig,
    pub exponents: NormExponents,
    /// Orders of the homogeneous Sobolev norms recorded in the diagnostics.
    pub sobolev_mu: Vec<f64>,
    /// Diagnostics cadence in steps.
    pub diag_every: usize,
    /// Snapshot cadence in steps; 0 disables snapshots.
    pub snapshot_every: usize,
    pub policy: EvalPolicy,
}

impl SolverConfig {
    pub fn new(grid: TorusGrid, params: FracParams, dt: f64, n_steps: usize) -> Self {
        Self {
            grid,
            params,
            dt,
            n_steps,
            phi: ScalarField::zeros(grid),
            dealias: 2.0 / 3.0,
            blowup_threshold: 1e8,
            picard: PicardConfig::default(),
            exponents: NormExponents::default(),
            sobolev_mu: Vec::new(),
            diag_every: 1,
            snapshot_every: 0,
            policy: EvalPolicy::default(),
        }
    }

    pub fn final_time(&self) -> f64 {
        self.dt * self.n_steps as f64
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        self.params.validate()?;
        let mut errs = Vec::new();
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            errs.push(format!("dt must be positive, got {}", self.dt));
        }
        if self.phi.grid() != &self.grid {
            errs.push("phi lives on a different grid".to_string());
        }
        if !self.phi.is_finite() {
            errs.push("phi has non-finite samples".to_string());
        }
        if !(self.dealias > 0.0 && self.dealias <= 1.0) {
            errs.push(format!("dealias must lie in (0, 1], got {}", self.dealias));
        }
        if self.blowup_threshold.is_nan() || self.blowup_threshold < 0.0 {
            errs.push(format!("blowup_threshold must be nonnegative, got {}", self.blowup_threshold));
        }
        for (name, e) in [("q", self.exponents.q), ("r", self.exponents.r), ("p", self.exponents.p)] {
            if !(e >= 1.0) {
                errs.push(format!("norm exponent {name} must be at least 1, got {e}"));
            }
        }
        if self.sobolev_mu.iter().any(|m| !(*m >= 0.0 && m.is_finite())) {
            errs.push("sobolev orders must be finite and nonnegative".to_string());
        }
        if self.diag_every == 0 {
            errs.push("diagnostics cadence must be at least 1".to_string());
        }
        if self.picard.enabled && !(self.picard.tol > 0.0 && self.picard.max_iters > 0) {
            errs.push("picard needs tol > 0 and max_iters > 0".to_string());
        }
        if errs.is_empty() {
            Ok(())
        } else {
            Err(SolverError::Config(errs.join("; ")))
        }
    }
}

/// `(n, v, u)` at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub t: f64,
    pub n: ScalarField,
    pub v: ScalarField,
    pub u: VectorField,
}

impl SystemState {
    /// Initial state at `t = 0`; `u` must be divergence-free.
    pub fn new(n: ScalarField, v: ScalarField, u: VectorField) -> Result<Self, SolverError> {
        let g = *n.grid();
        if v.grid() != &g || u.grid() != &g {
            return Err(GridError::GridMismatch.into());
        }
        let s = Self { t: 0.0, n, v, u };
        if !s.is_finite() {
            return Err(SolverError::Config("initial state has non-finite samples".into()));
        }
        let res = divergence_residual(&s.u);
        if res > DIV_TOL {
            return Err(SolverError::Config(format!(
                "initial velocity is not divergence-free (relative residual {res:e})"
            )));
        }
        Ok(s)
    }

    pub fn zeros(grid: TorusGrid) -> Self {
        Self {
            t: 0.0,
            n: ScalarField::zeros(grid),
            v: ScalarField::zeros(grid),
            u: VectorField::zeros(grid),
        }
    }

    pub fn grid(&self) -> &TorusGrid {
        self.n.grid()
    }

    pub fn is_finite(&self) -> bool {
        self.n.is_finite() && self.v.is_finite() && self.u.is_finite()
    }

    /// Same state with every field multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            t: self.t,
            n: self.n.scaled(c),
            v: self.v.scaled(c),
            u: self.u.scaled(c),
        }
    }
}

/// Spectral nonlinear terms of one step, truncated to the dealiased modes.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearTerms {
    pub fn_hat: SpectralField,
    pub fv_hat: SpectralField,
    pub fu_hat: Vec<SpectralField>,
}

impl NonlinearTerms {
    pub fn to_physical(&self) -> (ScalarField, ScalarField, VectorField) {
        let u = VectorField::new(self.fu_hat.iter().map(inverse_transform).collect())
            .expect("components share a grid");
        (inverse_transform(&self.fn_hat), inverse_transform(&self.fv_hat), u)
    }
}

/// Spectral copy of a state.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct SpecState {
    pub n: SpectralField,
    pub v: SpectralField,
    pub u: Vec<SpectralField>,
}

impl SpecState {
    pub fn from_state(s: &SystemState) -> Self {
        Self {
            n: transform(&s.n),
            v: transform(&s.v),
            u: s.u.components().iter().map(transform).collect(),
        }
    }

    pub fn to_state(&self, t: f64) -> SystemState {
        SystemState {
            t,
            n: inverse_transform(&self.n),
            v: inverse_transform(&self.v),
            u: VectorField::new(self.u.iter().map(inverse_transform).collect()).expect("components share a grid"),
        }
    }
}

fn truncated(s: &SpectralField, fraction: f64) -> SpectralField {
    let mut out = s.clone();
    out.truncate(fraction);
    out
}

/// Nonlinear terms from spectral data. Factors are truncated before the
/// products are formed and the products again afterwards.
///
/// `Fn = −∇·(un + n∇v)`, `Fv = n − ∇·(uv)`, `Fu = −P[∇·(u⊗u) + n∇φ]`.
/// With `∇·u = 0` the divergence forms equal the advective ones, and they
/// make the zero modes of `Fn` and of the transport part of `Fv` vanish.
fn terms_from_spectra(
    n_hat: &SpectralField,
    v_hat: &SpectralField,
    u_hat: &[SpectralField],
    grad_phi: &[ScalarField],
    dealias: f64,
) -> NonlinearTerms {
    let g = *n_hat.grid();
    let d = g.d();
    let n_t = truncated(n_hat, dealias);
    let v_t = truncated(v_hat, dealias);
    let n = inverse_transform(&n_t);
    let v = inverse_transform(&v_t);
    let grad_v: Vec<ScalarField> = gradient_spectral(&v_t).iter().map(inverse_transform).collect();
    let u: Vec<ScalarField> = u_hat.iter().map(|c| inverse_transform(&truncated(c, dealias))).collect();
    let prod = |f: &dyn Fn(usize) -> f64| -> SpectralField {
        let vals: Vec<f64> = (0..g.len()).map(f).collect();
        let mut s = transform(&ScalarField::new(g, vals).expect("sized to the grid"));
        s.truncate(dealias);
        s
    };
    let (nv, vv) = (n.values(), v.values());
    let flux_n: Vec<SpectralField> = (0..d)
        .map(|a| {
            let (ua, ga) = (u[a].values(), grad_v[a].values());
            prod(&|i| ua[i] * nv[i] + nv[i] * ga[i])
        })
        .collect();
    let flux_v: Vec<SpectralField> = (0..d)
        .map(|a| {
            let ua = u[a].values();
            prod(&|i| ua[i] * vv[i])
        })
        .collect();
    let mut fn_hat = divergence_spectral(&flux_n);
    fn_hat.coeffs_mut().iter_mut().for_each(|c| *c = -*c);
    let div_uv = divergence_spectral(&flux_v);
    let mut fv_hat = n_t.clone();
    for (c, e) in fv_hat.coeffs_mut().iter_mut().zip(div_uv.coeffs()) {
        *c -= e;
    }
    let mut force: Vec<SpectralField> = Vec::with_capacity(d);
    for a in 0..d {
        let ua = u[a].values();
        let row: Vec<SpectralField> = (0..d)
            .map(|b| {
                let ub = u[b].values();
                prod(&|i| ua[i] * ub[i])
            })
            .collect();
        let mut fa = divergence_spectral(&row);
        let pa = grad_phi[a].values();
        fa.add_assign(&prod(&|i| nv[i] * pa[i]));
        force.push(fa);
    }
    let mut fu_hat = leray_project_spectral(&force);
    for f in &mut fu_hat {
        f.coeffs_mut().iter_mut().for_each(|c| *c = -*c);
    }
    NonlinearTerms { fn_hat, fv_hat, fu_hat }
}

fn grad_phi_of(cfg: &SolverConfig) -> Vec<ScalarField> {
    let phi_hat = truncated(&transform(&cfg.phi), cfg.dealias);
    gradient_spectral(&phi_hat).iter().map(inverse_transform).collect()
}

/// `(Fn, Fv, Fu)` at a state, as spectral fields.
pub fn nonlinear_terms(s: &SystemState, cfg: &SolverConfig) -> Result<NonlinearTerms, SolverError> {
    if s.grid() != &cfg.grid {
        return Err(GridError::GridMismatch.into());
    }
    let spec = SpecState::from_state(s);
    Ok(terms_from_spectra(&spec.n, &spec.v, &spec.u, &grad_phi_of(cfg), cfg.dealias))
}

/// One stored history entry: the nonlinearity frozen on `[t, t + dt]`.
#[derive(Debug, Clone, PartialEq)]
pub struct HistoryEntry {
    pub t: f64,
    pub terms: NonlinearTerms,
}

/// Append-only record of the nonlinear terms of every completed step.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    entries: Vec<HistoryEntry>,
}

impl History {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[HistoryEntry] {
        &self.entries
    }

    pub(crate) fn push(&mut self, e: HistoryEntry) {
        self.entries.push(e);
    }
}

/// Precomputed spectral bookkeeping shared by the marcher and the Picard map.
#[derive(Debug, Clone)]
pub(crate) struct Tables {
    grid: TorusGrid,
    params: FracParams,
    dt: f64,
    policy: EvalPolicy,
    /// `|k|²` of every class and the class of every spectral index.
    keys: Vec<i64>,
    class: Vec<usize>,
    /// Spectral indices surviving dealiasing, with their class.
    kept: Vec<usize>,
    kept_class: Vec<usize>,
    /// Step weights per class for `λ = |ξ|^α` and `λ = |ξ|^α + γ`.
    w_nu: Vec<Vec<f64>>,
    w_v: Vec<Vec<f64>>,
    count: usize,
}

impl Tables {
    pub fn new(cfg: &SolverConfig, count: usize) -> Result<Self, SolverError> {
        let grid = cfg.grid;
        let (keys, class) = radial_classes(&grid);
        let kept: Vec<usize> = (0..grid.len()).filter(|&i| grid.keeps_mode(i, cfg.dealias)).collect();
        let mut t = Self {
            grid,
            params: cfg.params,
            dt: cfg.dt,
            policy: cfg.policy,
            kept_class: kept.iter().map(|&i| class[i]).collect(),
            keys,
            class,
            kept,
            w_nu: Vec::new(),
            w_v: Vec::new(),
            count: 0,
        };
        t.ensure_weights(count.max(1))?;
        Ok(t)
    }

    /// Makes `W_m` available for `m < count`.
    fn ensure_weights(&mut self, count: usize) -> Result<(), SolverError> {
        if count <= self.count {
            return Ok(());
        }
        let count = count.max(2 * self.count);
        let mut used = vec![false; self.keys.len()];
        for &c in &self.kept_class {
            used[c] = true;
        }
        let (alpha, beta, gamma) = (self.params.alpha, self.params.beta, self.params.gamma);
        let (grid, dt, policy) = (self.grid, self.dt, self.policy);
        let tables: Vec<(Vec<f64>, Vec<f64>)> = self
            .keys
            .par_iter()
            .zip(used.par_iter())
            .map(|(&k2, &u)| {
                if !u {
                    return Ok((Vec::new(), Vec::new()));
                }
                let lam = symbol(&grid, k2, alpha, 0.0);
                Ok((
                    weight_table(lam, beta, dt, count, &policy)?,
                    weight_table(lam + gamma, beta, dt, count, &policy)?,
                ))
            })
            .collect::<Result<_, SpecfunError>>()?;
        (self.w_nu, self.w_v) = tables.into_iter().unzip();
        self.count = count;
        Ok(())
    }

    /// `E_β(−t^β λ)` per class for both symbols.
    fn ml_multipliers(&self, t: f64) -> Result<(Vec<f64>, Vec<f64>), SolverError> {
        let order = MLOrder::classical(self.params.beta)?;
        let tb = t.powf(self.params.beta);
        let (alpha, gamma) = (self.params.alpha, self.params.gamma);
        let pairs: Vec<(f64, f64)> = self
            .keys
            .par_iter()
            .map(|&k2| {
                let lam = symbol(&self.grid, k2, alpha, 0.0);
                Ok((
                    mittag_leffler(order, -tb * lam, &self.policy)?,
                    mittag_leffler(order, -tb * (lam + gamma), &self.policy)?,
                ))
            })
            .collect::<Result<_, SpecfunError>>()?;
        Ok(pairs.into_iter().unzip())
    }

    /// Linear part `E_β(−t^β λ) X̂₀` for every unknown.
    pub fn linear_part(&self, init: &SpecState, t: f64) -> Result<SpecState, SolverError> {
        if t == 0.0 {
            return Ok(init.clone());
        }
        let (m_nu, m_v) = self.ml_multipliers(t)?;
        let cls = &self.class;
        Ok(SpecState {
            n: init.n.map_real_multiplier(|i| m_nu[cls[i]]),
            v: init.v.map_real_multiplier(|i| m_v[cls[i]]),
            u: init.u.iter().map(|c| c.map_real_multiplier(|i| m_nu[cls[i]])).collect(),
        })
    }

    /// State at step `k` from the linear part and `terms[j]`, `j < k`.
    pub fn advance(&mut self, init: &SpecState, terms: &[&NonlinearTerms], k: usize) -> Result<SpecState, SolverError> {
        debug_assert!(terms.len() >= k);
        self.ensure_weights(k)?;
        let mut out = self.linear_part(init, k as f64 * self.dt)?;
        if k == 0 {
            return Ok(out);
        }
        let d = self.grid.d();
        let (w_nu, w_v) = (&self.w_nu, &self.w_v);
        let sums: Vec<[Complex64; 5]> = self
            .kept
            .par_iter()
            .zip(self.kept_class.par_iter())
            .map(|(&i, &c)| {
                let (wn, wv) = (&w_nu[c], &w_v[c]);
                let mut acc = [Complex64::new(0.0, 0.0); 5];
                for (j, f) in terms[..k].iter().enumerate() {
                    let m = k - 1 - j;
                    acc[0] += f.fn_hat.coeffs()[i] * wn[m];
                    acc[1] += f.fv_hat.coeffs()[i] * wv[m];
                    for a in 0..d {
                        acc[2 + a] += f.fu_hat[a].coeffs()[i] * wn[m];
                    }
                }
                acc
            })
            .collect();
        for (&i, acc) in self.kept.iter().zip(&sums) {
            out.n.coeffs_mut()[i] += acc[0];
            out.v.coeffs_mut()[i] += acc[1];
            for a in 0..d {
                out.u[a].coeffs_mut()[i] += acc[2 + a];
            }
        }
        out.u = leray_project_spectral(&out.u);
        Ok(out)
    }
}

/// Step-by-step marcher holding the initial data, the current state and the
/// full history.
#[derive(Debug, Clone)]
pub struct Solver {
    cfg: SolverConfig,
    tables: Tables,
    grad_phi: Vec<ScalarField>,
    initial: SystemState,
    init: SpecState,
    spec: SpecState,
    linear: SpecState,
    state: SystemState,
    history: History,
}

impl Solver {
    pub fn new(cfg: SolverConfig, initial: SystemState) -> Result<Self, SolverError> {
        cfg.validate()?;
        if initial.grid() != &cfg.grid {
            return Err(GridError::GridMismatch.into());
        }
        if initial.t != 0.0 {
            return Err(SolverError::Config(format!("initial state must sit at t = 0, got {}", initial.t)));
        }
        let initial = SystemState::new(initial.n, initial.v, initial.u)?;
        let tables = Tables::new(&cfg, cfg.n_steps)?;
        let init = SpecState::from_state(&initial);
        Ok(Self {
            grad_phi: grad_phi_of(&cfg),
            tables,
            spec: init.clone(),
            linear: init.clone(),
            init,
            state: initial.clone(),
            initial,
            history: History::new(),
            cfg,
        })
    }

    /// Continues from saved initial data and history.
    pub fn resume(cfg: SolverConfig, data: RestartData) -> Result<Self, SolverError> {
        let mismatch = |what: &str| SolverError::Format(format!("restart {what}: mismatch with the configuration"));
        if data.grid != cfg.grid {
            return Err(mismatch("grid"));
        }
        if data.params != cfg.params {
            return Err(mismatch("parameters"));
        }
        if data.dt.to_bits() != cfg.dt.to_bits() {
            return Err(mismatch("time step"));
        }
        if data.dealias.to_bits() != cfg.dealias.to_bits() {
            return Err(mismatch("dealias fraction"));
        }
        let mut s = Self::new(cfg, data.initial)?;
        let k = data.history.len();
        for (j, e) in data.history.entries().iter().enumerate() {
            if e.t.to_bits() != (j as f64 * s.cfg.dt).to_bits() {
                return Err(SolverError::Format(format!("history entry {j} has time {}", e.t)));
            }
        }
        s.history = data.history;
        if k > 0 {
            let terms: Vec<&NonlinearTerms> = s.history.entries().iter().map(|e| &e.terms).collect();
            let spec = s.tables.advance(&s.init, &terms, k)?;
            s.linear = s.tables.linear_part(&s.init, k as f64 * s.cfg.dt)?;
            s.state = spec.to_state(k as f64 * s.cfg.dt);
            s.spec = spec;
        }
        Ok(s)
    }

    pub fn config(&self) -> &SolverConfig {
        &self.cfg
    }

    pub fn state(&self) -> &SystemState {
        &self.state
    }

    pub fn history(&self) -> &History {
        &self.history
    }

    /// Completed steps.
    pub fn steps_done(&self) -> usize {
        self.history.len()
    }

    pub fn time(&self) -> f64 {
        self.state.t
    }

    /// Nonlinear terms at the current state.
    pub fn current_terms(&self) -> NonlinearTerms {
        terms_from_spectra(&self.spec.n, &self.spec.v, &self.spec.u, &self.grad_phi, self.cfg.dealias)
    }

    /// Advances one step of size `dt`.
    pub fn step(&mut self) -> Result<&SystemState, SolverError> {
        let k = self.history.len();
        let t_k = k as f64 * self.cfg.dt;
        let terms = self.current_terms();
        self.history.push(HistoryEntry { t: t_k, terms });
        let all: Vec<&NonlinearTerms> = self.history.entries().iter().map(|e| &e.terms).collect();
        let spec = self.tables.advance(&self.init, &all, k + 1)?;
        let t = (k + 1) as f64 * self.cfg.dt;
        let state = spec.to_state(t);
        if !state.is_finite() {
            return Err(SolverError::Blowup {
                t,
                step: k + 1,
                reason: "non-finite field".into(),
            });
        }
        self.linear = self.tables.linear_part(&self.init, t)?;
        self.spec = spec;
        self.state = state;
        Ok(&self.state)
    }

    pub(crate) fn spec(&self) -> &SpecState {
        &self.spec
    }

    pub(crate) fn linear(&self) -> &SpecState {
        &self.linear
    }

    /// The initial data exactly as supplied.
    pub fn initial(&self) -> &SystemState {
        &self.initial
    }
}

/// Early stop of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct BlowupReport {
    pub step: usize,
    pub t_stop: f64,
    /// Earliest threshold crossing, or the failure time for non-finite fields.
    pub t_max_estimate: f64,
    pub reason: String,
    /// Recent `(t, ‖n‖_q, ‖∇v‖_r, ‖u‖_p)` rows leading up to the stop.
    pub table: Vec<[f64; 4]>,
}

/// Output of [`run`].
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub diagnostics: Diagnostics,
    pub snapshots: Vec<(usize, SystemState)>,
    pub blowup: Option<BlowupReport>,
    /// The marcher in its final state, history included.
    pub solver: Solver,
}

impl RunOutput {
    pub fn final_state(&self) -> &SystemState {
        self.solver.state()
    }
}

/// Executes `cfg.n_steps` steps, recording diagnostics and snapshots, and
/// stops early once a monitored norm exceeds the blow-up threshold.
pub fn run(cfg: &SolverConfig, initial: SystemState) -> Result<RunOutput, SolverError> {
    continue_run(Solver::new(cfg.clone(), initial)?)
}

/// Like [`run`], starting from wherever `solver` currently stands and
/// stepping until it has completed its configured number of steps.
pub fn continue_run(mut solver: Solver) -> Result<RunOutput, SolverError> {
    let cfg = solver.config().clone();
    let mut diag = Diagnostics::new(&cfg);
    let mut snapshots = Vec::new();
    let mut blowup = None;
    let record = |solver: &Solver, diag: &mut Diagnostics| -> Result<bool, SolverError> {
        diag.push(diagnostics::measure(solver)?);
        let last = diag.records.last().expect("just pushed");
        Ok(last.monitored().iter().any(|v| !(*v <= cfg.blowup_threshold)))
    };
    let make_report = |diag: &Diagnostics, step: usize, t_stop: f64, reason: String, t_max: Option<f64>| {
        let start = diag.records.len().saturating_sub(8);
        BlowupReport {
            step,
            t_stop,
            t_max_estimate: t_max.or_else(|| blowup_monitor(diag, cfg.blowup_threshold)).unwrap_or(t_stop),
            reason,
            table: diag.records[start..]
                .iter()
                .map(|r| [r.t, r.norm_n_q, r.norm_gradv_r, r.norm_u_p])
                .collect(),
        }
    };
    let mut k = solver.steps_done();
    if cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0 {
        snapshots.push((k, solver.state().clone()));
    }
    if record(&solver, &mut diag)? {
        blowup = Some(make_report(&diag, k, solver.time(), "threshold exceeded".into(), None));
    }
    while blowup.is_none() && k < cfg.n_steps {
        match solver.step() {
            Ok(_) => {}
            Err(SolverError::Blowup { t, step, reason }) => {
                blowup = Some(make_report(&diag, step, t, reason, Some(t)));
                break;
            }
            Err(e) => return Err(e),
        }
        k += 1;
        if cfg.snapshot_every > 0 && k % cfg.snapshot_every == 0 {
            snapshots.push((k, solver.state().clone()));
        }
        if (k % cfg.diag_every == 0 || k == cfg.n_steps) && record(&solver, &mut diag)? {
            blowup = Some(make_report(&diag, k, solver.time(), "threshold exceeded".into(), None));
        }
    }
    Ok(RunOutput {
        diagnostics: diag,
        snapshots,
        blowup,
        solver,
    })
}

/// Errors of a dt-halving study and the empirical orders between levels.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStudy {
    /// Step counts of the levels.
    pub steps: Vec<usize>,
    /// Error of each level against its own reference with a 4× smaller step.
    pub errors: Vec<f64>,
    /// `log₂(e_i / e_{i+1})`.
    pub orders: Vec<f64>,
}

/// Final-time error `‖Δn‖₂ + ‖∇Δv‖₂ + ‖Δu‖₂` of `levels` runs with
/// `base_steps·2^i` steps over `cfg.final_time()`, each measured against a
/// run with four times as many steps.
pub fn temporal_order_study(
    cfg: &SolverConfig,
    initial: &SystemState,
    base_steps: usize,
    levels: usize,
) -> Result<OrderStudy, SolverError> {
    let t_final = cfg.final_time();
    let solve = |steps: usize| -> Result<SpecState, SolverError> {
        let mut c = cfg.clone();
        c.dt = t_final / steps as f64;
        c.n_steps = steps;
        let mut s = Solver::new(c, initial.clone())?;
        for _ in 0..steps {
            s.step()?;
        }
        Ok(s.spec().clone())
    };
    let mut norm_cfg = cfg.clone();
    norm_cfg.exponents = NormExponents { q: 2.0, r: 2.0, p: 2.0 };
    let mut steps = Vec::new();
    let mut errors = Vec::new();
    for i in 0..levels {
        let k = base_steps << i;
        let coarse = solve(k)?;
        let fine = solve(4 * k)?;
        steps.push(k);
        errors.push(picard::state_distance(&coarse, &fine, &norm_cfg)?);
    }
    let orders = errors.windows(2).map(|e| (e[0] / e[1]).log2()).collect();
    Ok(OrderStudy { steps, errors, orders })
}
