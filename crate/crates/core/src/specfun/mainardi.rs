use std::f64::consts::PI;

use super::gamma::{gamma_fn, lgamma, rgamma, sin_pi};
use super::{EvalPolicy, SpecfunError};
use crate::quad::{integrate_with_breaks, CompensatedSum, QuadOptions};

const EPS: f64 = f64::EPSILON;
const LN_PI: f64 = 1.144_729_885_849_400_2;

/// Arguments up to this value are evaluated to the policy's relative target;
/// beyond it the result carries an absolute error bound instead.
pub const MAINARDI_SAFE_BOUND: f64 = 12.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MainardiMethod {
    Exact,
    Series,
    Integral,
}

/// A Mainardi value with its absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MainardiEval {
    pub value: f64,
    pub abs_err: f64,
    pub method: MainardiMethod,
}

impl MainardiEval {
    pub fn rel_err(&self) -> f64 {
        if self.value == 0.0 {
            if self.abs_err < 1e-300 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            self.abs_err / self.value.abs()
        }
    }
}

/// Quadrature value of a Mainardi moment next to its closed form.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentResult {
    pub quadrature: f64,
    pub closed_form: f64,
    /// Quadrature error estimate including the truncated tail.
    pub abs_err: f64,
}

impl MomentResult {
    pub fn rel_discrepancy(&self) -> f64 {
        ((self.quadrature - self.closed_form) / self.closed_form).abs()
    }
}

fn check_beta(beta: f64) -> Result<(), SpecfunError> {
    if beta > 0.0 && beta < 1.0 {
        Ok(())
    } else {
        Err(SpecfunError::Domain(format!(
            "Mainardi order beta must lie in (0, 1), got {beta}"
        )))
    }
}

/// `M_β(s)` for `s ≥ 0`.
pub fn mainardi(beta: f64, s: f64, policy: &EvalPolicy) -> Result<f64, SpecfunError> {
    mainardi_eval(beta, s, policy).map(|e| e.value)
}

/// `M_β(s)` with its absolute error bound and evaluation route.
///
/// Within [`MAINARDI_SAFE_BOUND`] a result missing the relative target is an
/// accuracy error; beyond it the value is returned with its bound.
pub fn mainardi_eval(
    beta: f64,
    s: f64,
    policy: &EvalPolicy,
) -> Result<MainardiEval, SpecfunError> {
    check_beta(beta)?;
    policy.validate()?;
    if !(s >= 0.0) || s.is_infinite() {
        return Err(SpecfunError::Domain(format!(
            "Mainardi argument must be finite and nonnegative, got {s}"
        )));
    }
    let e = evaluate(beta, s, policy);
    if s <= MAINARDI_SAFE_BOUND && e.rel_err() > policy.target_rel_err {
        return Err(SpecfunError::Accuracy {
            value: e.value,
            achieved: e.rel_err(),
            target: policy.target_rel_err,
        });
    }
    Ok(e)
}

pub(crate) fn evaluate(beta: f64, s: f64, policy: &EvalPolicy) -> MainardiEval {
    if s == 0.0 {
        return MainardiEval {
            value: rgamma(1.0 - beta),
            abs_err: 4.0 * EPS * rgamma(1.0 - beta),
            method: MainardiMethod::Exact,
        };
    }
    let series = series(beta, s, policy);
    if series.rel_err() <= policy.target_rel_err {
        return series;
    }
    let integral = integral(beta, s, policy);
    if integral.rel_err() <= series.rel_err() || series.abs_err.is_nan() {
        integral
    } else {
        series
    }
}

/// Wright series `Σ (−s)^j / (j! Γ(1 − β − βj))`.
fn series(beta: f64, s: f64, policy: &EvalPolicy) -> MainardiEval {
    let ln_s = s.ln();
    let mut sum = CompensatedSum::new();
    let mut round = 0.0;
    let mut fj = 1.0;
    let mut prev_env = f64::INFINITY;
    let mut tail = f64::INFINITY;
    for j in 0..policy.max_terms {
        let jf = j as f64;
        if j > 0 {
            fj *= s / jf;
        }
        let a = 1.0 - beta * (jf + 1.0);
        let mut mag = fj * rgamma(a);
        if !mag.is_finite() {
            let ln_mag = jf * ln_s - lgamma(jf + 1.0) + sin_pi(a).abs().ln()
                + lgamma(beta * (jf + 1.0))
                - LN_PI;
            mag = sin_pi(a).signum() * ln_mag.exp();
        }
        let term = if j % 2 == 0 { mag } else { -mag };
        sum.add(term);
        round += term.abs() * EPS * (4.0 + 0.5 * jf + 0.5 * beta * (jf + 1.0));

        // |1/Γ(a)| ≤ Γ(1 − a)/π for a ≤ 0 bounds every remaining term.
        let ln_env = jf * ln_s - lgamma(jf + 1.0) + lgamma(beta * (jf + 1.0)) - LN_PI;
        let env = ln_env.exp();
        if j >= 1 && env < prev_env {
            let rho = env / prev_env;
            let bound = env * rho / (1.0 - rho);
            if bound <= 0.25 * EPS * sum.value().abs() || env == 0.0 {
                tail = bound;
                break;
            }
        }
        prev_env = env;
    }
    MainardiEval {
        value: sum.value(),
        abs_err: round + tail,
        method: MainardiMethod::Series,
    }
}

/// `ln A(φ)` with `A(φ) = (sin βφ / sin φ)^{1/(1−β)} · sin((1−β)φ) / sin βφ`.
fn ln_zolotarev_a(beta: f64, phi: f64) -> f64 {
    let sb = (beta * phi).sin();
    let s = phi.sin();
    let sc = ((1.0 - beta) * phi).sin();
    (sb.ln() - s.ln()) / (1.0 - beta) + sc.ln() - sb.ln()
}

/// Zolotarev–Kanter integral over a positive integrand:
/// `M_β(s) = s^{β/(1−β)} / ((1−β)π) ∫_0^π A(φ) exp(−s^{1/(1−β)} A(φ)) dφ`.
fn integral(beta: f64, s: f64, policy: &EvalPolicy) -> MainardiEval {
    let inv = 1.0 / (1.0 - beta);
    let c = s.powf(inv);
    // A(0⁺) = (1−β) β^{β/(1−β)} is the minimum of A.
    let a0 = (1.0 - beta) * beta.powf(beta * inv);
    let f = |phi: f64| {
        if phi <= 0.0 || phi >= PI {
            return 0.0;
        }
        let la = ln_zolotarev_a(beta, phi);
        let a = la.exp();
        let expo = la - c * (a - a0);
        if expo < -745.0 || !expo.is_finite() {
            0.0
        } else {
            expo.exp()
        }
    };
    let mut breaks = vec![0.0, PI];
    for k in 1..=14 {
        let h = PI * 0.5f64.powi(k);
        breaks.push(h);
        breaks.push(PI - h);
    }
    breaks.sort_by(|a, b| a.total_cmp(b));
    breaks.dedup();
    let opts = QuadOptions {
        eps_abs: 1e-300,
        eps_rel: 0.05 * policy.target_rel_err,
        max_intervals: 4000,
    };
    let r = integrate_with_breaks(f, &breaks, opts);
    let ln_pref = beta * inv * s.ln() - c * a0 - (1.0 - beta).ln() - LN_PI;
    let pref = ln_pref.exp();
    let value = pref * r.value;
    let abs_err = pref * r.abs_err + 4.0 * EPS * (1.0 + ln_pref.abs()) * value.abs();
    MainardiEval {
        value,
        abs_err,
        method: MainardiMethod::Integral,
    }
}

/// Upper integration limit beyond which `s^r M_β(s)` is below `e^{−60}` of
/// unit scale, from the decay `M_β(s) ≈ exp(−B s^{1/(1−β)})`.
pub fn mainardi_tail_cutoff(beta: f64, r: f64) -> f64 {
    let inv = 1.0 / (1.0 - beta);
    let b = (1.0 - beta) * beta.powf(beta * inv);
    let target = 60.0;
    let growth = (r + beta * inv + 1.0).max(0.0);
    let mut smax = (target / b).powf(1.0 - beta).max(1.0);
    for _ in 0..20 {
        let next = ((target + growth * smax.ln()) / b).powf(1.0 - beta).max(1.0);
        if (next - smax).abs() <= 1e-12 * smax {
            break;
        }
        smax = next;
    }
    smax
}

/// `∫_0^∞ s^r M_β(s) w(s) ds` by adaptive quadrature on `[0, S_max]`.
fn weighted_integral<W: Fn(f64) -> f64>(
    beta: f64,
    r: f64,
    weight: W,
) -> Result<(f64, f64), SpecfunError> {
    let policy = EvalPolicy::default();
    let smax = mainardi_tail_cutoff(beta, r);
    let mut sb = vec![0.0, smax];
    let mut x = 0.25;
    while x < smax {
        sb.push(x);
        x *= 2.0;
    }
    for extra in [0.5, 0.75, 1.25, 1.5] {
        if extra < smax {
            sb.push(extra);
        }
    }
    sb.sort_by(|a, b| a.total_cmp(b));
    sb.dedup();
    let opts = QuadOptions {
        eps_abs: 1e-15,
        eps_rel: 1e-11,
        max_intervals: 2000,
    };
    let m = |s: f64| evaluate(beta, s, &policy).value;
    let res = if r >= 0.0 {
        integrate_with_breaks(|s| s.powf(r) * m(s) * weight(s), &sb, opts)
    } else {
        // s = w^{1/(1+r)} removes the s^r endpoint singularity.
        let p = 1.0 / (1.0 + r);
        let wb: Vec<f64> = sb.iter().map(|s| s.powf(1.0 + r)).collect();
        integrate_with_breaks(
            |w| {
                let s = w.powf(p);
                p * m(s) * weight(s)
            },
            &wb,
            opts,
        )
    };
    let tail = smax.powf(r + 1.0) * m(smax).abs() * weight(smax).abs();
    let abs_err = res.abs_err + tail;
    if !res.converged && abs_err > 1e-8 * res.value.abs() {
        return Err(SpecfunError::Accuracy {
            value: res.value,
            achieved: abs_err / res.value.abs(),
            target: 1e-8,
        });
    }
    Ok((res.value, abs_err))
}

/// Moment `∫_0^∞ s^r M_β(s) ds` by quadrature, next to `Γ(1+r)/Γ(1+βr)`.
pub fn mainardi_moment(beta: f64, r: f64) -> Result<MomentResult, SpecfunError> {
    check_beta(beta)?;
    if !(r > -1.0) || r.is_infinite() {
        return Err(SpecfunError::Domain(format!(
            "moment order must exceed -1, got {r}"
        )));
    }
    let (quadrature, abs_err) = weighted_integral(beta, r, |_| 1.0)?;
    let closed_form = gamma_fn(1.0 + r)? * rgamma(1.0 + beta * r);
    Ok(MomentResult {
        quadrature,
        closed_form,
        abs_err,
    })
}

/// `A_σ(t) = ∫_0^∞ s^σ M_β(s) e^{−s t^β γ} ds`.
pub fn a_sigma(sigma: f64, beta: f64, gamma: f64, t: f64) -> Result<f64, SpecfunError> {
    check_beta(beta)?;
    if !(sigma > -1.0) || sigma.is_infinite() {
        return Err(SpecfunError::Domain(format!(
            "sigma must exceed -1, got {sigma}"
        )));
    }
    if !(gamma >= 0.0) || gamma.is_infinite() {
        return Err(SpecfunError::Domain(format!(
            "gamma must be finite and nonnegative, got {gamma}"
        )));
    }
    if !(t > 0.0) || t.is_infinite() {
        return Err(SpecfunError::Domain(format!(
            "t must be finite and positive, got {t}"
        )));
    }
    let rate = t.powf(beta) * gamma;
    let (value, _) = weighted_integral(beta, sigma, |s| (-s * rate).exp())?;
    Ok(value)
}
