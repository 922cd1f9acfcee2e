use std::f64::consts::PI;

use super::gamma::{cos_pi, lgamma, rgamma, sin_pi};
use super::{EvalPolicy, SpecfunError};
use crate::quad::{integrate_with_breaks, CompensatedSum, QuadOptions};

const EPS: f64 = f64::EPSILON;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Parameters `(β, γ)` of the two-parameter Mittag-Leffler function.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLOrder {
    pub beta: f64,
    pub gamma: f64,
}

impl MLOrder {
    pub fn new(beta: f64, gamma: f64) -> Result<Self, SpecfunError> {
        let order = Self { beta, gamma };
        order.validate()?;
        Ok(order)
    }

    /// The one-parameter function `E_β = E_{β,1}`.
    pub fn classical(beta: f64) -> Result<Self, SpecfunError> {
        Self::new(beta, 1.0)
    }

    pub fn validate(&self) -> Result<(), SpecfunError> {
        if !(self.beta > 0.0 && self.beta <= 1.0) {
            return Err(SpecfunError::Domain(format!(
                "Mittag-Leffler order beta must lie in (0, 1], got {}",
                self.beta
            )));
        }
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(SpecfunError::Domain(format!(
                "Mittag-Leffler parameter gamma must be positive, got {}",
                self.gamma
            )));
        }
        Ok(())
    }
}

/// Which evaluation route produced a value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MLMethod {
    Exact,
    Taylor,
    Asymptotic,
    Integral,
    Recurrence,
}

/// A Mittag-Leffler value together with its estimated relative error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MLEval {
    pub value: f64,
    pub est_rel_err: f64,
    pub method: MLMethod,
}

/// `E_{β,γ}(z)` for `z ≤ 0`.
///
/// Fails with [`SpecfunError::Accuracy`] when no evaluation route reaches
/// `policy.target_rel_err`.
pub fn mittag_leffler(order: MLOrder, z: f64, policy: &EvalPolicy) -> Result<f64, SpecfunError> {
    mittag_leffler_eval(order, z, policy).map(|e| e.value)
}

/// Like [`mittag_leffler`] but also returns the error estimate and route.
pub fn mittag_leffler_eval(
    order: MLOrder,
    z: f64,
    policy: &EvalPolicy,
) -> Result<MLEval, SpecfunError> {
    order.validate()?;
    policy.validate()?;
    if z.is_nan() || z > 0.0 {
        return Err(SpecfunError::Domain(format!(
            "Mittag-Leffler argument must be a nonpositive real, got {z}"
        )));
    }
    let e = if z == f64::NEG_INFINITY {
        MLEval {
            value: 0.0,
            est_rel_err: 0.0,
            method: MLMethod::Exact,
        }
    } else {
        evaluate(order.beta, order.gamma, -z, policy)
    };
    if e.est_rel_err <= policy.target_rel_err {
        Ok(e)
    } else {
        Err(SpecfunError::Accuracy {
            value: e.value,
            achieved: e.est_rel_err,
            target: policy.target_rel_err,
        })
    }
}

/// Best-effort evaluation of `E_{β,γ}(−x)`, never failing; the estimate tells
/// the caller how far to trust it.
pub(crate) fn evaluate(beta: f64, gamma: f64, x: f64, policy: &EvalPolicy) -> MLEval {
    if x == 0.0 {
        return MLEval {
            value: rgamma(gamma),
            est_rel_err: 4.0 * EPS,
            method: MLMethod::Exact,
        };
    }
    if beta == 1.0 {
        return beta_one(gamma, x, policy);
    }
    let target = policy.target_rel_err;
    let mut best: Option<MLEval> = None;
    if x <= policy.series_cutoff {
        let t = taylor(beta, gamma, x, policy);
        if t.est_rel_err <= target {
            return t;
        }
        best = Some(t);
    }
    if x >= policy.asymptotic_cutoff {
        let a = asymptotic(beta, gamma, x, policy);
        if a.est_rel_err <= target {
            return a;
        }
        best = Some(pick(best, a));
    }
    let fallback = if gamma <= 1.0 + 0.5 * beta {
        integral(beta, gamma, x, policy)
    } else {
        recurrence_down(beta, gamma, x, policy)
    };
    pick(best, fallback)
}

fn pick(a: Option<MLEval>, b: MLEval) -> MLEval {
    match a {
        Some(a) if key(a.est_rel_err) < key(b.est_rel_err) => a,
        _ => b,
    }
}

fn key(e: f64) -> f64 {
    if e.is_nan() {
        f64::INFINITY
    } else {
        e
    }
}

fn rel_of(abs_err: f64, value: f64) -> f64 {
    if value == 0.0 || !value.is_finite() {
        f64::INFINITY
    } else {
        abs_err / value.abs()
    }
}

/// Taylor series with a cancellation-aware error estimate.
fn taylor(beta: f64, gamma: f64, x: f64, policy: &EvalPolicy) -> MLEval {
    let ln_x = x.ln();
    let mut sum = CompensatedSum::new();
    let mut round = 0.0;
    let mut prev = f64::INFINITY;
    let mut tail = f64::INFINITY;
    for j in 0..policy.max_terms {
        let jf = j as f64;
        let arg = beta * jf + gamma;
        let pw = x.powf(jf);
        let mut mag = pw * rgamma(arg);
        if !mag.is_finite() || (mag == 0.0 && pw != 0.0) {
            mag = (jf * ln_x - lgamma(arg)).exp();
        }
        sum.add(if j % 2 == 0 { mag } else { -mag });
        round += mag * EPS * (2.0 + 0.5 * arg);
        if j >= 1 && mag < prev {
            let rho = mag / prev;
            let bound = mag * rho / (1.0 - rho);
            if bound <= 0.25 * EPS * sum.value().abs() || mag == 0.0 {
                tail = bound;
                break;
            }
        }
        prev = mag;
    }
    let value = sum.value();
    MLEval {
        value,
        est_rel_err: rel_of(round + tail, value),
        method: MLMethod::Taylor,
    }
}

/// Magnitude of the exponentially small contribution from the pole of the
/// integral representation near `u = −x cos πβ`, which no power of `1/x` sees.
fn pole_contribution(beta: f64, gamma: f64, x: f64) -> f64 {
    let c = cos_pi(beta);
    if c >= 0.0 {
        return 0.0;
    }
    let ustar = -x * c;
    let e = (1.0 - gamma) / beta;
    let sb = sin_pi(beta);
    let ln_mag = -ustar.powf(1.0 / beta) + e * ustar.ln() + 2f64.ln() - beta.ln();
    if sb <= 0.0 {
        ln_mag.exp()
    } else {
        ln_mag.exp() / sb
    }
}

/// Asymptotic expansion in powers of `1/x`, truncated at the smallest term.
fn asymptotic(beta: f64, gamma: f64, x: f64, policy: &EvalPolicy) -> MLEval {
    let ln_x = x.ln();
    let inv_x = 1.0 / x;
    let mut sum = CompensatedSum::new();
    let mut round = 0.0;
    let mut xp = 1.0;
    let mut prev_env = f64::INFINITY;
    let mut trunc = f64::INFINITY;
    for k in 1..=policy.max_terms {
        let kf = k as f64;
        let a = gamma - beta * kf;
        let ln_env = -kf * ln_x
            + if a < 0.5 {
                lgamma(1.0 - a) - LN_PI
            } else {
                -lgamma(a)
            };
        let env = ln_env.exp();
        if env > prev_env {
            trunc = env;
            break;
        }
        xp *= inv_x;
        let t = xp * rgamma(a);
        sum.add(if k % 2 == 1 { t } else { -t });
        round += t.abs() * EPS * (2.0 + 0.5 * a.abs() + kf * 0.5);
        let s = sum.value().abs();
        if env <= 0.05 * EPS * s || env == 0.0 {
            trunc = env;
            break;
        }
        prev_env = env;
    }
    let value = sum.value();
    let pole = pole_contribution(beta, gamma, x);
    MLEval {
        value,
        est_rel_err: rel_of(10.0 * trunc + pole + round, value),
        method: MLMethod::Asymptotic,
    }
}

/// Real-line integral representation, valid for `γ < 1 + β`:
///
/// `E_{β,γ}(−x) = (1/πβ) ∫_0^∞ e^{−u^{1/β}} u^{(1−γ)/β} (u sin πγ + x sin π(γ−β)) / (u² + 2ux cos πβ + x²) du`,
///
/// integrated in `w = √u` to tame the endpoint singularity.
fn integral(beta: f64, gamma: f64, x: f64, policy: &EvalPolicy) -> MLEval {
    let e = (1.0 - gamma) / beta;
    let s1 = sin_pi(gamma);
    let s2 = sin_pi(gamma - beta);
    let c = cos_pi(beta);
    let sb = sin_pi(beta);
    let two_over_beta = 2.0 / beta;
    let pw = 2.0 * e + 1.0;
    let xc = x * c;
    let xs2 = (x * sb) * (x * sb);
    let f = |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        let lw = w.ln();
        let u = w * w;
        let expo = pw * lw - (two_over_beta * lw).exp();
        if expo < -745.0 {
            return 0.0;
        }
        let d = (u + xc) * (u + xc) + xs2;
        2.0 * expo.exp() * (u * s1 + x * s2) / d
    };

    let u_max = 690f64.powf(beta);
    let mut ub = vec![0.0, u_max];
    if u_max > 1.0 {
        ub.push(1.0);
    }
    if c < 0.0 {
        let ustar = -xc;
        let h = x * sb;
        for m in [-16.0, -8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0, 16.0] {
            let u = ustar + m * h;
            if u > 0.0 && u < u_max {
                ub.push(u);
            }
        }
    }
    ub.sort_by(|a, b| a.total_cmp(b));
    ub.dedup();
    let wb: Vec<f64> = ub.iter().map(|u| u.sqrt()).collect();

    let opts = QuadOptions {
        eps_abs: 1e-300,
        eps_rel: 0.05 * policy.target_rel_err,
        max_intervals: 4000,
    };
    let r = integrate_with_breaks(f, &wb, opts);
    let scale = 1.0 / (PI * beta);
    let value = r.value * scale;
    MLEval {
        value,
        est_rel_err: rel_of(r.abs_err, r.value) + 8.0 * EPS,
        method: MLMethod::Integral,
    }
}

/// `E_{β,γ}(−x) = (1/Γ(γ−β) − E_{β,γ−β}(−x)) / x`.
fn recurrence_down(beta: f64, gamma: f64, x: f64, policy: &EvalPolicy) -> MLEval {
    let lower = evaluate(beta, gamma - beta, x, policy);
    let rg = rgamma(gamma - beta);
    let value = (rg - lower.value) / x;
    let abs_err =
        (lower.est_rel_err * lower.value.abs() + 2.0 * EPS * (rg.abs() + lower.value.abs())) / x;
    MLEval {
        value,
        est_rel_err: rel_of(abs_err, value),
        method: MLMethod::Recurrence,
    }
}

fn beta_one(gamma: f64, x: f64, policy: &EvalPolicy) -> MLEval {
    if gamma == 1.0 {
        return MLEval {
            value: (-x).exp(),
            est_rel_err: 2.0 * EPS,
            method: MLMethod::Exact,
        };
    }
    if gamma == 2.0 {
        return MLEval {
            value: -(-x).exp_m1() / x,
            est_rel_err: 3.0 * EPS,
            method: MLMethod::Exact,
        };
    }
    let target = policy.target_rel_err;
    let mut best: Option<MLEval> = None;
    if x <= policy.series_cutoff {
        let t = taylor(1.0, gamma, x, policy);
        if t.est_rel_err <= target {
            return t;
        }
        best = Some(t);
    }
    if x >= policy.asymptotic_cutoff {
        let mut a = asymptotic(1.0, gamma, x, policy);
        // The e^{−x} x^{1−γ} endpoint term sits beyond every power of 1/x.
        let edge = ((1.0 - gamma) * x.ln() - x).exp();
        a.est_rel_err += rel_of(edge, a.value);
        if a.est_rel_err <= target {
            return a;
        }
        best = Some(pick(best, a));
    }
    let fallback = if gamma > 1.0 {
        beta_one_integral(gamma, x, policy)
    } else {
        let upper = beta_one(gamma + 1.0, x, policy);
        let rg = rgamma(gamma);
        let value = rg - x * upper.value;
        let abs_err = x * upper.value.abs() * upper.est_rel_err
            + 2.0 * EPS * (rg.abs() + x * upper.value.abs());
        MLEval {
            value,
            est_rel_err: rel_of(abs_err, value),
            method: MLMethod::Recurrence,
        }
    };
    pick(best, fallback)
}

/// `E_{1,γ}(−x) = (1/Γ(γ)) ∫_0^1 exp(−x(1 − w^{1/(γ−1)})) dw` for `γ > 1`.
fn beta_one_integral(gamma: f64, x: f64, policy: &EvalPolicy) -> MLEval {
    let a = 1.0 / (gamma - 1.0);
    let f = |w: f64| {
        if w <= 0.0 {
            return 0.0;
        }
        (x * (a * w.ln()).exp_m1()).exp()
    };
    let delta = 1.0 / (a * x);
    let mut b = vec![0.0, 1.0];
    for k in [64.0, 16.0, 4.0, 1.0, 0.25] {
        let w = 1.0 - k * delta;
        if w > 0.0 && w < 1.0 {
            b.push(w);
        }
    }
    b.sort_by(|p, q| p.total_cmp(q));
    b.dedup();
    let opts = QuadOptions {
        eps_abs: 1e-300,
        eps_rel: 0.05 * policy.target_rel_err,
        max_intervals: 4000,
    };
    let r = integrate_with_breaks(f, &b, opts);
    let value = r.value * rgamma(gamma);
    MLEval {
        value,
        est_rel_err: rel_of(r.abs_err, r.value) + 8.0 * EPS,
        method: MLMethod::Integral,
    }
}
