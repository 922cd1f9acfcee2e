//! Fixed-point iteration of the discretized Duhamel map over a whole window.

use crate::grid::{gradient_spectral, inverse_transform, lp_norm, SpectralField, VectorField};

use super::{terms_from_spectra, grad_phi_of, NonlinearTerms, SolverConfig, SolverError, SpecState, SystemState, Tables};

/// Report produced when the map stops contracting.
#[derive(Debug, Clone, PartialEq)]
pub struct ContractionFailure {
    pub iteration: usize,
    pub reason: String,
    pub ratios: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PicardOutcome {
    /// States at `t_k = k·T/K`, `k = 0..=K`, of the last iterate.
    pub trajectory: Vec<SystemState>,
    /// `d_m = max_k (‖Δn‖_q + ‖∇Δv‖_r + ‖Δu‖_p)` between successive iterates.
    pub distances: Vec<f64>,
    /// `d_{m+1}/d_m`.
    pub ratios: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub failure: Option<ContractionFailure>,
}

/// Number of consecutive non-contracting iterations that counts as failure.
const NON_CONTRACTING_LIMIT: usize = 3;

fn sub(a: &SpectralField, b: &SpectralField) -> SpectralField {
    let mut out = a.clone();
    for (x, y) in out.coeffs_mut().iter_mut().zip(b.coeffs()) {
        *x -= y;
    }
    out
}

/// `‖Δn‖_q + ‖∇Δv‖_r + ‖Δu‖_p` between two spectral states.
pub(crate) fn state_distance(a: &SpecState, b: &SpecState, cfg: &SolverConfig) -> Result<f64, SolverError> {
    let e = cfg.exponents;
    let dn = lp_norm(&inverse_transform(&sub(&a.n, &b.n)), e.q)?;
    let gv = VectorField::new(gradient_spectral(&sub(&a.v, &b.v)).iter().map(inverse_transform).collect())?;
    let du = VectorField::new(a.u.iter().zip(&b.u).map(|(x, y)| inverse_transform(&sub(x, y))).collect())?;
    Ok(dn + lp_norm(&gv.magnitude(), e.r)? + lp_norm(&du.magnitude(), e.p)?)
}

/// Iterates `traj^{(m+1)} = H[traj^{(m)}]` on `K` uniform steps of `[0, T]`,
/// where `H` evaluates the Duhamel formula with the nonlinear terms of the
/// previous iterate. The first iterate holds `s0` constant in time.
pub fn picard_solve(s0: &SystemState, t_final: f64, k_steps: usize, cfg: &SolverConfig) -> Result<PicardOutcome, SolverError> {
    if !cfg.picard.enabled {
        return Err(SolverError::Config("picard mode is not enabled".into()));
    }
    if !(t_final > 0.0 && t_final.is_finite()) || k_steps == 0 {
        return Err(SolverError::Config(format!(
            "need T > 0 and K >= 1, got T = {t_final}, K = {k_steps}"
        )));
    }
    let mut cfg = cfg.clone();
    cfg.dt = t_final / k_steps as f64;
    cfg.n_steps = k_steps;
    cfg.validate()?;
    let s0 = SystemState::new(s0.n.clone(), s0.v.clone(), s0.u.clone())?;
    if s0.grid() != &cfg.grid {
        return Err(crate::grid::GridError::GridMismatch.into());
    }
    let mut tables = Tables::new(&cfg, k_steps)?;
    let grad_phi = grad_phi_of(&cfg);
    let init = SpecState::from_state(&s0);
    let mut traj: Vec<SpecState> = vec![init.clone(); k_steps + 1];
    let mut distances = Vec::new();
    let mut ratios = Vec::new();
    let mut non_contracting = 0;
    let mut converged = false;
    let mut failure = None;
    let mut iterations = 0;
    for m in 0..cfg.picard.max_iters {
        iterations = m + 1;
        let terms: Vec<NonlinearTerms> = traj[..k_steps]
            .iter()
            .map(|s| terms_from_spectra(&s.n, &s.v, &s.u, &grad_phi, cfg.dealias))
            .collect();
        let refs: Vec<&NonlinearTerms> = terms.iter().collect();
        let mut next = Vec::with_capacity(k_steps + 1);
        next.push(init.clone());
        for k in 1..=k_steps {
            next.push(tables.advance(&init, &refs, k)?);
        }
        let mut dist = 0.0f64;
        for (a, b) in next.iter().zip(&traj) {
            let d = state_distance(a, b, &cfg)?;
            dist = if d.is_nan() { f64::NAN } else { dist.max(d) };
        }
        traj = next;
        if let Some(&prev) = distances.last() {
            let ratio = if prev == 0.0 { f64::INFINITY } else { dist / prev };
            ratios.push(ratio);
            if !(ratio < 1.0) {
                non_contracting += 1;
            } else {
                non_contracting = 0;
            }
        }
        distances.push(dist);
        if !dist.is_finite() {
            failure = Some(ContractionFailure {
                iteration: m,
                reason: "iterate became non-finite".into(),
                ratios: ratios.clone(),
            });
            break;
        }
        if dist <= cfg.picard.tol {
            converged = true;
            break;
        }
        if non_contracting >= NON_CONTRACTING_LIMIT {
            failure = Some(ContractionFailure {
                iteration: m,
                reason: format!("contraction ratio >= 1 for {NON_CONTRACTING_LIMIT} consecutive iterations"),
                ratios: ratios.clone(),
            });
            break;
        }
    }
    let trajectory = traj
        .iter()
        .enumerate()
        .map(|(k, s)| s.to_state(k as f64 * cfg.dt))
        .collect();
    Ok(PicardOutcome {
        trajectory,
        distances,
        ratios,
        iterations,
        converged,
        failure,
    })
}
