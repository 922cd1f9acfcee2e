//! Mittag-Leffler solution operators as Fourier multipliers.
//!
//! The linear propagators are `E_β(−t^β(|ξ|^α + γ))` and
//! `E_{β,β}(−t^β(|ξ|^α + γ))`, applied mode by mode. Both depend on a mode only
//! through `|k|²`, so each table evaluates the special function once per
//! distinct `|k|²` and scatters the result.

use std::collections::BTreeMap;
use std::sync::{Arc, Mutex};

use indexmap::IndexMap;
use rayon::prelude::*;

use crate::grid::{inverse_transform, lp_norm, transform, FracParams, ScalarField, TorusGrid};
use crate::specfun::{a_sigma, mittag_leffler, rgamma, EvalPolicy, MLOrder, SpecfunError};

/// Which Mittag-Leffler operator to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MLKind {
    /// `E_β(−t^β(|ξ|^α+γ))`
    EBeta,
    /// `E_{β,β}(−t^β(|ξ|^α+γ))`
    EBetaBeta,
}

/// Multipliers of both operators at one time, one entry per spectral index.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorTable {
    pub grid: TorusGrid,
    pub params: FracParams,
    pub t: f64,
    pub e_beta: Vec<f64>,
    pub e_beta_beta: Vec<f64>,
}

/// Groups spectral indices by `|k|²`; returns (distinct `|k|²`, class of each index).
pub fn radial_classes(grid: &TorusGrid) -> (Vec<i64>, Vec<usize>) {
    let mut ids = BTreeMap::new();
    for i in 0..grid.len() {
        ids.entry(grid.k_sq(i)).or_insert(0usize);
    }
    let keys: Vec<i64> = ids.keys().copied().collect();
    for (n, v) in ids.values_mut().enumerate() {
        *v = n;
    }
    let class = (0..grid.len()).map(|i| ids[&grid.k_sq(i)]).collect();
    (keys, class)
}

/// `λ = |ξ|^α + γ` for an integer `|k|²`.
pub fn symbol(grid: &TorusGrid, k_sq: i64, alpha: f64, gamma: f64) -> f64 {
    if k_sq == 0 {
        gamma
    } else {
        (grid.dk() * (k_sq as f64).sqrt()).powf(alpha) + gamma
    }
}

impl PropagatorTable {
    pub fn build(
        grid: TorusGrid,
        params: FracParams,
        t: f64,
        policy: &EvalPolicy,
    ) -> Result<Self, SpecfunError> {
        params
            .validate()
            .map_err(|e| SpecfunError::Domain(e.to_string()))?;
        if !(t >= 0.0 && t.is_finite()) {
            return Err(SpecfunError::Domain(format!("time must be finite and nonnegative, got {t}")));
        }
        let beta = params.beta;
        let (keys, class) = radial_classes(&grid);
        let tb = t.powf(beta);
        let eb = MLOrder::classical(beta)?;
        let ebb = MLOrder::new(beta, beta)?;
        let per_class: Vec<(f64, f64)> = keys
            .par_iter()
            .map(|&k2| {
                let z = -tb * symbol(&grid, k2, params.alpha, params.gamma);
                Ok((mittag_leffler(eb, z, policy)?, mittag_leffler(ebb, z, policy)?))
            })
            .collect::<Result<_, SpecfunError>>()?;
        Ok(Self {
            grid,
            params,
            t,
            e_beta: class.iter().map(|&c| per_class[c].0).collect(),
            e_beta_beta: class.iter().map(|&c| per_class[c].1).collect(),
        })
    }

    pub fn multipliers(&self, kind: MLKind) -> &[f64] {
        match kind {
            MLKind::EBeta => &self.e_beta,
            MLKind::EBetaBeta => &self.e_beta_beta,
        }
    }

    pub fn apply(&self, f: &ScalarField, kind: MLKind) -> ScalarField {
        let m = self.multipliers(kind);
        inverse_transform(&transform(f).map_real_multiplier(|i| m[i]))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct TableKey {
    d: usize,
    n: usize,
    length: u64,
    alpha: u64,
    beta: u64,
    gamma: u64,
    t: u64,
}

impl TableKey {
    fn new(grid: &TorusGrid, params: &FracParams, t: f64) -> Self {
        Self {
            d: grid.d(),
            n: grid.n(),
            length: grid.length().to_bits(),
            alpha: params.alpha.to_bits(),
            beta: params.beta.to_bits(),
            gamma: params.gamma.to_bits(),
            t: t.to_bits(),
        }
    }
}

/// Thread-safe least-recently-used cache of propagator tables.
#[derive(Debug)]
pub struct PropagatorCache {
    capacity: usize,
    policy: EvalPolicy,
    entries: Mutex<IndexMap<TableKey, Arc<PropagatorTable>>>,
}

impl PropagatorCache {
    pub fn new(capacity: usize, policy: EvalPolicy) -> Self {
        Self {
            capacity: capacity.max(1),
            policy,
            entries: Mutex::new(IndexMap::new()),
        }
    }

    pub fn len(&self) -> usize {
        self.lock().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn lock(&self) -> std::sync::MutexGuard<'_, IndexMap<TableKey, Arc<PropagatorTable>>> {
        self.entries.lock().unwrap_or_else(|e| e.into_inner())
    }

    /// Returns the cached table or builds it; the entry becomes most recent.
    pub fn get(
        &self,
        grid: &TorusGrid,
        params: &FracParams,
        t: f64,
    ) -> Result<Arc<PropagatorTable>, SpecfunError> {
        let key = TableKey::new(grid, params, t);
        {
            let mut map = self.lock();
            if let Some(table) = map.shift_remove(&key) {
                map.insert(key, table.clone());
                return Ok(table);
            }
        }
        let table = Arc::new(PropagatorTable::build(*grid, *params, t, &self.policy)?);
        let mut map = self.lock();
        map.insert(key, table.clone());
        while map.len() > self.capacity {
            map.shift_remove_index(0);
        }
        Ok(table)
    }

    /// Whether a table is cached, without touching recency.
    pub fn contains(&self, grid: &TorusGrid, params: &FracParams, t: f64) -> bool {
        self.lock().contains_key(&TableKey::new(grid, params, t))
    }
}

/// Applies `E_β` or `E_{β,β}` of `−t^β((−Δ)^{α/2} + γ)` to `f`.
///
/// At `t = 0` the first is the identity and the second scales by `1/Γ(β)`.
pub fn apply_ml(
    f: &ScalarField,
    params: &FracParams,
    t: f64,
    kind: MLKind,
    policy: &EvalPolicy,
) -> Result<ScalarField, SpecfunError> {
    if t == 0.0 {
        return Ok(match kind {
            MLKind::EBeta => f.clone(),
            MLKind::EBetaBeta => f.scaled(rgamma(params.beta)),
        });
    }
    Ok(PropagatorTable::build(*f.grid(), *params, t, policy)?.apply(f, kind))
}

/// `w(s) = s^β E_{β,β+1}(−λ s^β)`, the antiderivative of `r^{β−1}E_{β,β}(−λr^β)`.
pub fn duhamel_primitive(s: f64, lam: f64, beta: f64, policy: &EvalPolicy) -> Result<f64, SpecfunError> {
    if s == 0.0 {
        return Ok(0.0);
    }
    let sb = s.powf(beta);
    Ok(sb * mittag_leffler(MLOrder::new(beta, beta + 1.0)?, -lam * sb, policy)?)
}

fn check_weight_args(a: f64, b: f64, lam: f64, beta: f64) -> Result<(), SpecfunError> {
    if !(a >= 0.0 && a < b && b.is_finite()) {
        return Err(SpecfunError::Domain(format!("need 0 <= a < b, got a = {a}, b = {b}")));
    }
    if !(lam >= 0.0 && lam.is_finite()) {
        return Err(SpecfunError::Domain(format!("lambda must be finite and nonnegative, got {lam}")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(SpecfunError::Domain(format!("beta must lie in (0, 1], got {beta}")));
    }
    Ok(())
}

/// `∫_a^b s^{β−1} E_{β,β}(−λ s^β) ds`, exactly, via the primitive.
pub fn duhamel_weight(a: f64, b: f64, lam: f64, beta: f64, policy: &EvalPolicy) -> Result<f64, SpecfunError> {
    check_weight_args(a, b, lam, beta)?;
    if beta == 1.0 {
        return Ok(exp_weight(a, b, lam));
    }
    Ok(duhamel_primitive(b, lam, beta, policy)? - duhamel_primitive(a, lam, beta, policy)?)
}

/// `∫_a^b e^{−λs} ds` without cancellation.
fn exp_weight(a: f64, b: f64, lam: f64) -> f64 {
    if lam == 0.0 {
        b - a
    } else {
        -(-lam * a).exp() * (-lam * (b - a)).exp_m1() / lam
    }
}

/// Uniform-step weights `W_m = ∫_{m·dt}^{(m+1)·dt} s^{β−1}E_{β,β}(−λs^β) ds`, `m < count`.
pub fn weight_table(
    lam: f64,
    beta: f64,
    dt: f64,
    count: usize,
    policy: &EvalPolicy,
) -> Result<Vec<f64>, SpecfunError> {
    check_weight_args(0.0, dt, lam, beta)?;
    if beta == 1.0 {
        return Ok((0..count)
            .map(|m| exp_weight(m as f64 * dt, (m + 1) as f64 * dt, lam))
            .collect());
    }
    let w: Vec<f64> = (0..=count)
        .map(|m| duhamel_primitive(m as f64 * dt, lam, beta, policy))
        .collect::<Result<_, _>>()?;
    Ok(w.windows(2).map(|p| p[1] - p[0]).collect())
}

/// `|E_β(−(λ^{α/β}t)^β (ξ/λ)^α) − E_β(−t^β ξ^α)|`: the two arguments agree
/// algebraically, so this measures evaluation consistency under rescaling.
pub fn scaling_identity_check(
    alpha: f64,
    beta: f64,
    lam_scale: f64,
    t: f64,
    xi: f64,
    policy: &EvalPolicy,
) -> Result<f64, SpecfunError> {
    if !(lam_scale > 0.0 && t > 0.0 && xi >= 0.0) {
        return Err(SpecfunError::Domain(format!(
            "need lambda > 0, t > 0, xi >= 0; got {lam_scale}, {t}, {xi}"
        )));
    }
    let order = MLOrder::classical(beta)?;
    let scaled = (lam_scale.powf(alpha / beta) * t).powf(beta) * (xi / lam_scale).powf(alpha);
    let plain = t.powf(beta) * xi.powf(alpha);
    Ok((mittag_leffler(order, -scaled, policy)? - mittag_leffler(order, -plain, policy)?).abs())
}

/// Scalar subordination: `(∫_0^∞ M_β(s)e^{−sλt^β} ds, E_β(−λt^β))`.
pub fn scalar_subordination(
    beta: f64,
    lam: f64,
    t: f64,
    policy: &EvalPolicy,
) -> Result<(f64, f64), SpecfunError> {
    let quad = a_sigma(0.0, beta, lam, t)?;
    let ml = mittag_leffler(MLOrder::classical(beta)?, -lam * t.powf(beta), policy)?;
    Ok((quad, ml))
}

/// Least-squares fit of a smoothing experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingFit {
    /// Fitted slope of `log ‖E_β(...)f‖_p` against `log t`.
    pub slope: f64,
    /// Predicted slope `−(dβ/α)(1/q − 1/p)`.
    pub predicted: f64,
    /// `sup_t t^{−predicted}·‖E_β(...)f‖_p / ‖f‖_q`.
    pub sup_constant: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
}

/// Latest time at which the lowest nonzero mode is still far from decayed:
/// `0.1·(L/2π)^{α/β}`.
pub fn small_time_limit(grid: &TorusGrid, params: &FracParams) -> f64 {
    0.1 * (1.0 / grid.dk()).powf(params.alpha / params.beta)
}

/// Fits the decay rate of `‖E_β(−t^β(−Δ)^{α/2}) f‖_p` over `times`.
///
/// The mean of `f` is removed first; `q` only enters the prediction and the
/// normalization of `sup_constant`.
pub fn measure_smoothing_exponent(
    f: &ScalarField,
    params: &FracParams,
    q: f64,
    p: f64,
    times: &[f64],
    policy: &EvalPolicy,
) -> Result<SmoothingFit, SpecfunError> {
    if times.len() < 2 || times.iter().any(|t| !(*t > 0.0)) {
        return Err(SpecfunError::Domain("need at least two positive times".into()));
    }
    let limit = small_time_limit(f.grid(), params);
    if let Some(t) = times.iter().find(|t| **t > limit) {
        return Err(SpecfunError::Domain(format!(
            "time {t} exceeds the small-time limit {limit} of this box"
        )));
    }
    let mean = f.mean();
    let g = ScalarField::new(*f.grid(), f.values().iter().map(|v| v - mean).collect())
        .map_err(|e| SpecfunError::Domain(e.to_string()))?;
    let gq = lp_norm(&g, q).map_err(|e| SpecfunError::Domain(e.to_string()))?;
    let d = f.grid().d() as f64;
    let predicted = -(d * params.beta / params.alpha) * (1.0 / q - 1.0 / p);
    let mut norms = Vec::with_capacity(times.len());
    for &t in times {
        let h = apply_ml(&g, params, t, MLKind::EBeta, policy)?;
        norms.push(lp_norm(&h, p).map_err(|e| SpecfunError::Domain(e.to_string()))?);
    }
    let xs: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    let slope = least_squares_slope(&xs, &ys)
        .ok_or_else(|| SpecfunError::Domain("degenerate fit".into()))?;
    let sup_constant = times
        .iter()
        .zip(&norms)
        .map(|(t, n)| t.powf(-predicted) * n / gq)
        .fold(0.0, f64::max);
    Ok(SmoothingFit {
        slope,
        predicted,
        sup_constant,
        times: times.to_vec(),
        norms,
    })
}

/// Slope of the least-squares line through `(x, y)`; `None` when degenerate.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    if x.len() < 2 || x.len() != y.len() {
        return None;
    }
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    if sxx == 0.0 || !sxy.is_finite() {
        return None;
    }
    Some(sxy / sxx)
}

/// Geometric grid of `count` points from `t0` to `t1`.
pub fn geometric_times(t0: f64, t1: f64, count: usize) -> Vec<f64> {
    if count < 2 {
        return vec![t0];
    }
    let r = (t1 / t0).ln() / (count - 1) as f64;
    (0..count).map(|i| t0 * (r * i as f64).exp()).collect()
}
