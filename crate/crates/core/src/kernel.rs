//! Real-space fractional heat kernel
//! `K_t(x) = (2π)^{−d} ∫ e^{ix·ξ} e^{−t|ξ|^α} dξ` on ℝ^d, `d ∈ {1, 2}`.
//!
//! The radial integrals are oscillatory; they are split at the (approximate)
//! zeros of the oscillating factor and the panel sums are accumulated with
//! Wynn's epsilon algorithm once the argument is large. Far out in `d = 1`
//! the kernel is also available from its asymptotic series
//! `K(x) ~ (1/π) Σ_k (−1)^{k+1} Γ(αk+1)/k! · sin(παk/2) · x^{−αk−1}`.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::propagator::least_squares_slope;
use crate::quad::{integrate, integrate_with_breaks, CompensatedSum, QuadOptions, WynnEpsilon};
use crate::specfun::{gamma_fn, lgamma, mainardi, mittag_leffler, rgamma, sin_pi, EvalPolicy, MLOrder, SpecfunError};

/// Absolute accuracy promised by [`eval_kernel`] for `x ≤ 50`.
pub const KERNEL_ABS_TOL: f64 = 1e-9;

/// A kernel value with its absolute error bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub value: f64,
    pub abs_err: f64,
}

fn check_args(alpha: f64, d: usize, t: f64, x: f64) -> Result<(), SpecfunError> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(SpecfunError::Domain(format!("alpha must lie in (0, 2], got {alpha}")));
    }
    if d != 1 && d != 2 {
        return Err(SpecfunError::Domain(format!("kernel dimension must be 1 or 2, got {d}")));
    }
    if !(t > 0.0 && t.is_finite()) {
        return Err(SpecfunError::Domain(format!("time must be positive, got {t}")));
    }
    if !(x >= 0.0 && x.is_finite()) {
        return Err(SpecfunError::Domain(format!("radius must be finite and nonnegative, got {x}")));
    }
    Ok(())
}

/// `K(x) = K_1(x)`.
pub fn eval_kernel(alpha: f64, d: usize, x: f64) -> Result<KernelEval, SpecfunError> {
    eval_kernel_at_time(alpha, d, 1.0, x)
}

/// `K_t(x)` evaluated directly from its Fourier integral with `e^{−t r^α}`.
pub fn eval_kernel_at_time(alpha: f64, d: usize, t: f64, x: f64) -> Result<KernelEval, SpecfunError> {
    check_args(alpha, d, t, x)?;
    // e^{−t r^α} < 1e-18 beyond this radius.
    let r_cut = (41.5 / t).powf(1.0 / alpha);
    let res = match d {
        1 => {
            let g = |r: f64| (-t * r.powf(alpha)).exp();
            let (v, e) = oscillatory(|r| (x * r).cos() * g(r), x, 0.5, r_cut, x > 10.0, 0, 1e-17);
            KernelEval {
                value: v / PI,
                abs_err: e / PI + 1e-18,
            }
        }
        _ => {
            let g = |r: f64| r * (-t * r.powf(alpha)).exp();
            let (v, e) = oscillatory(|r| bessel_j0(x * r) * g(r), x, 0.75, r_cut, x > 10.0, 0, 1e-15);
            KernelEval {
                value: v / (2.0 * PI),
                abs_err: e / (2.0 * PI) + 1e-18,
            }
        }
    };
    if x <= 50.0 && res.abs_err > KERNEL_ABS_TOL {
        return Err(SpecfunError::Accuracy {
            value: res.value,
            achieved: res.abs_err,
            target: KERNEL_ABS_TOL,
        });
    }
    Ok(res)
}

/// `∫_0^∞ f(r) dr` for an integrand oscillating like `cos(xr − shift·π)`.
///
/// Panels end at `(k + 1 − shift)π/x`, the zeros of the oscillating factor
/// (exact for the cosine, asymptotic for `J₀`). Integration stops at `r_cut`
/// or, when `accelerate` is set, once the Wynn estimate of the panel partial
/// sums has settled. `max_panels = 0` means unlimited.
fn oscillatory(
    mut f: impl FnMut(f64) -> f64,
    x: f64,
    shift: f64,
    r_cut: f64,
    accelerate: bool,
    max_panels: usize,
    panel_tol: f64,
) -> (f64, f64) {
    let opts = QuadOptions::new(panel_tol, 1e-13);
    if x == 0.0 {
        let mut breaks = vec![0.0];
        let mut b = 0.25;
        while b < r_cut {
            breaks.push(b);
            b *= 2.0;
        }
        breaks.push(r_cut);
        let r = integrate_with_breaks(&mut f, &breaks, opts);
        return (r.value, r.abs_err);
    }
    let step = PI / x;
    let mut sum = CompensatedSum::new();
    let mut err = 0.0;
    let mut wynn = WynnEpsilon::new();
    let mut last_est = f64::NAN;
    let mut stable = 0;
    let mut a = 0.0;
    let mut k = 0usize;
    loop {
        let zero = (k as f64 + 1.0 - shift) * step;
        let b = zero.min(r_cut);
        if b > a {
            let r = integrate(&mut f, a, b, opts);
            sum.add(r.value);
            err += r.abs_err;
        }
        a = b;
        k += 1;
        if a >= r_cut {
            return (sum.value(), err);
        }
        if accelerate {
            let est = wynn.push(sum.value());
            let change = (est - last_est).abs();
            if k > 8 && change <= 1e-17 + 1e-14 * est.abs() {
                stable += 1;
                if stable >= 3 {
                    return (est, err + change.max(1e-16 * est.abs()));
                }
            } else {
                stable = 0;
            }
            last_est = est;
        }
        if max_panels > 0 && k >= max_panels {
            let tail = if accelerate { (wynn.estimate() - sum.value()).abs() } else { f64::INFINITY };
            return (if accelerate { wynn.estimate() } else { sum.value() }, err + tail);
        }
    }
}

/// Bessel function `J₀` on `z ≥ 0` (even extension for `z < 0`).
pub fn bessel_j0(z: f64) -> f64 {
    let z = z.abs();
    if z <= 25.0 {
        // Trapezoidal rule on J₀(z) = (1/2π)∫_0^{2π} cos(z sin θ) dθ; the
        // aliasing error is 2·Σ J_{mM}(z), negligible once M > z + 30.
        let m = ((z + 32.0) as usize).next_multiple_of(4);
        let mut s = CompensatedSum::new();
        for j in 0..m {
            let th = 2.0 * PI * j as f64 / m as f64;
            s.add((z * th.sin()).cos());
        }
        s.value() / m as f64
    } else {
        // Hankel expansion.
        let chi = z - 0.25 * PI;
        let mut p = 0.0;
        let mut q = 0.0;
        let mut a = 1.0;
        let mut prev = f64::INFINITY;
        for k in 0..200 {
            if k > 0 {
                let kf = k as f64;
                a *= -((2.0 * kf - 1.0).powi(2)) / (8.0 * kf * z);
            }
            if a.abs() > prev || a.abs() < 1e-18 {
                break;
            }
            prev = a.abs();
            match k % 4 {
                0 => p += a,
                1 => q += a,
                2 => p -= a,
                _ => q -= a,
            }
        }
        (2.0 / (PI * z)).sqrt() * (p * chi.cos() - q * chi.sin())
    }
}

/// Coefficient `c` of the heavy tail `K(x) ~ c·x^{−1−α}` in `d = 1`.
pub fn heavy_tail_constant(alpha: f64) -> f64 {
    alpha * sin_pi(0.5 * alpha) * gamma_fn(alpha).unwrap_or(f64::NAN) / PI
}

/// Terms of the `d = 1` asymptotic series, with `power(k) = αk + offset`;
/// summed until they stop decreasing. Returns (sum, last term magnitude).
fn tail_series(alpha: f64, x: f64, offset: f64, integrated: bool) -> (f64, f64) {
    let mut sum = 0.0;
    let mut prev = f64::INFINITY;
    let mut last = 0.0;
    let lx = x.ln();
    for k in 1..200 {
        let kf = k as f64;
        let s = sin_pi(0.5 * alpha * kf);
        let mag_log = lgamma(alpha * kf + 1.0) - lgamma(kf + 1.0) - (alpha * kf + offset) * lx;
        let mut term = mag_log.exp() / PI * s;
        if integrated {
            term /= alpha * kf;
        }
        if k % 2 == 0 {
            term = -term;
        }
        let bound = mag_log.exp() / PI;
        if bound > prev {
            break;
        }
        prev = bound;
        sum += term;
        last = bound;
        if bound < 1e-300 {
            break;
        }
    }
    (sum, last)
}

/// `K(x)` for large `x` in `d = 1` from the asymptotic series; `None` when the
/// series cannot reach `tol`.
pub fn kernel_tail_series(alpha: f64, x: f64, tol: f64) -> Option<KernelEval> {
    if alpha >= 2.0 {
        return None;
    }
    let (v, e) = tail_series(alpha, x, 1.0, false);
    (e <= tol).then_some(KernelEval { value: v, abs_err: e })
}

/// `∫_X^∞ K(x) dx` for `d = 1` from the integrated asymptotic series.
fn tail_integral(alpha: f64, x: f64) -> (f64, f64) {
    if alpha >= 2.0 {
        return (0.0, 0.0);
    }
    tail_series(alpha, x, 0.0, true)
}

/// `∫_ℝ K(x) dx` for `d = 1`: quadrature on `[0, 50]` plus the series tail.
pub fn kernel_normalization(alpha: f64) -> Result<(f64, f64), SpecfunError> {
    let x_split = 50.0;
    let mut failure = None;
    let mut inner_err = 0.0f64;
    let r = integrate_with_breaks(
        |x| match eval_kernel(alpha, 1, x) {
            Ok(k) => {
                inner_err = inner_err.max(k.abs_err);
                k.value
            }
            Err(e) => {
                failure.get_or_insert(e);
                f64::NAN
            }
        },
        &[0.0, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 32.0, x_split],
        QuadOptions::new(1e-13, 1e-13),
    );
    if let Some(e) = failure {
        return Err(e);
    }
    let (tail, tail_err) = tail_integral(alpha, x_split);
    let value = 2.0 * (r.value + tail);
    let err = 2.0 * (r.abs_err + inner_err * x_split + tail_err);
    Ok((value, err))
}

/// Sampled radial profile `K(|x|)`.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelTable {
    pub alpha: f64,
    pub d: usize,
    pub radii: Vec<f64>,
    pub values: Vec<f64>,
    pub abs_errs: Vec<f64>,
    /// Largest per-sample error bound.
    pub quad_abs_err: f64,
}

impl KernelTable {
    pub fn build(alpha: f64, d: usize, radii: Vec<f64>) -> Result<Self, SpecfunError> {
        if radii.windows(2).any(|w| !(w[1] > w[0])) || radii.first().is_some_and(|r| *r < 0.0) {
            return Err(SpecfunError::Domain("radii must be sorted, distinct and nonnegative".into()));
        }
        let evals: Vec<KernelEval> = radii
            .par_iter()
            .map(|&x| eval_kernel(alpha, d, x))
            .collect::<Result<_, _>>()?;
        let quad_abs_err = evals.iter().fold(0.0f64, |m, e| m.max(e.abs_err));
        Ok(Self {
            alpha,
            d,
            values: evals.iter().map(|e| e.value).collect(),
            abs_errs: evals.iter().map(|e| e.abs_err).collect(),
            radii,
            quad_abs_err,
        })
    }

    /// Table on `0, h, 2h, …, r_max`.
    pub fn uniform(alpha: f64, d: usize, h: f64, r_max: f64) -> Result<Self, SpecfunError> {
        let n = (r_max / h).round() as usize;
        Self::build(alpha, d, (0..=n).map(|i| i as f64 * h).collect())
    }

    /// Cubic interpolation on a uniform table; beyond the last radius the
    /// `d = 1` asymptotic series is used (`NaN` if unavailable).
    pub fn interpolate(&self, r: f64) -> f64 {
        let r = r.abs();
        let n = self.radii.len();
        let h = self.radii[1] - self.radii[0];
        let last = self.radii[n - 1];
        if r > last {
            return match kernel_tail_series(self.alpha, r, 1e-6 * heavy_tail_constant(self.alpha) * r.powf(-1.0 - self.alpha)) {
                Some(k) => k.value,
                None if self.alpha >= 2.0 => 0.0,
                None => f64::NAN,
            };
        }
        let pos = r / h;
        // Stencil i−1..i+2, mirrored across 0 (the profile is even) and
        // shifted inward at the far end.
        let i = (pos.floor() as usize).min(n - 3);
        let s = pos - i as f64;
        let at = |j: isize| -> f64 { self.values[j.unsigned_abs()] };
        let i = i as isize;
        let (p0, p1, p2, p3) = (at(i - 1), at(i), at(i + 1), at(i + 2));
        // Cubic Lagrange through the four neighbours.
        p0 * (-s * (s - 1.0) * (s - 2.0) / 6.0)
            + p1 * ((s + 1.0) * (s - 1.0) * (s - 2.0) / 2.0)
            + p2 * (-(s + 1.0) * s * (s - 2.0) / 2.0)
            + p3 * ((s + 1.0) * s * (s - 1.0) / 6.0)
    }

    /// CSV with header `radius,value,abs_err`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "radius,value,abs_err")?;
        for i in 0..self.radii.len() {
            writeln!(w, "{:?},{:?},{:?}", self.radii[i], self.values[i], self.abs_errs[i])?;
        }
        Ok(())
    }
}

/// Weighted-decay measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayCheck {
    /// `sup |K(x)|(1+x)^{d+α}` over the sample grid.
    pub sup: f64,
    pub argmax: f64,
    /// Log-log slope of the weighted values over the last decade; `−∞` when
    /// the kernel falls below quadrature resolution there.
    pub tail_slope: f64,
    pub samples: Vec<(f64, f64)>,
}

/// `|K(x)|(1+|x|)^{d+α}` on a log-spaced grid over `[0, x_max]`.
pub fn decay_bound_check(alpha: f64, d: usize, x_max: f64) -> Result<DecayCheck, SpecfunError> {
    if !(x_max > 1.0) {
        return Err(SpecfunError::Domain(format!("x_max must exceed 1, got {x_max}")));
    }
    let count = 160;
    let x0: f64 = 0.01;
    let mut xs = vec![0.0];
    let r = (x_max / x0).ln() / (count - 1) as f64;
    xs.extend((0..count).map(|i| x0 * (r * i as f64).exp()));
    let pw = d as f64 + alpha;
    let evals: Vec<KernelEval> = xs.par_iter().map(|&x| eval_kernel(alpha, d, x)).collect::<Result<_, _>>()?;
    let samples: Vec<(f64, f64)> = xs
        .iter()
        .zip(&evals)
        .map(|(x, e)| (*x, e.value.abs() * (1.0 + x).powf(pw)))
        .collect();
    let (mut sup, mut argmax) = (0.0, 0.0);
    for &(x, w) in &samples {
        if w > sup {
            sup = w;
            argmax = x;
        }
    }
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs
        .iter()
        .zip(&evals)
        .zip(&samples)
        .filter(|((x, e), _)| **x >= x_max / 10.0 && e.value.abs() > 100.0 * e.abs_err.max(1e-16))
        .map(|((x, _), (_, w))| (x.ln(), w.ln()))
        .unzip();
    let tail_slope = if lx.len() >= 3 {
        least_squares_slope(&lx, &ly).unwrap_or(f64::NAN)
    } else {
        f64::NEG_INFINITY
    };
    Ok(DecayCheck {
        sup,
        argmax,
        tail_slope,
        samples,
    })
}

/// Weighted gradient measurement `|K'(x)|(1+x)^{d+1}` from a uniform table.
#[derive(Debug, Clone, PartialEq)]
pub struct GradientCheck {
    pub sup: f64,
    pub argmax: f64,
    pub tail_slope: f64,
}

pub fn gradient_bound_check(table: &KernelTable) -> GradientCheck {
    let n = table.radii.len();
    let pw = table.d as f64 + 1.0;
    let mut pts = Vec::new();
    for i in 1..n - 1 {
        let h = table.radii[i + 1] - table.radii[i - 1];
        let dk = (table.values[i + 1] - table.values[i - 1]) / h;
        pts.push((table.radii[i], dk.abs() * (1.0 + table.radii[i]).powf(pw)));
    }
    let (mut sup, mut argmax) = (0.0, 0.0);
    for &(x, w) in &pts {
        if w > sup {
            sup = w;
            argmax = x;
        }
    }
    let x_last = table.radii[n - 1];
    let (lx, ly): (Vec<f64>, Vec<f64>) = pts
        .iter()
        .filter(|(x, w)| *x >= x_last / 10.0 && *w > 0.0)
        .map(|(x, w)| (x.ln(), w.ln()))
        .unzip();
    GradientCheck {
        sup,
        argmax,
        tail_slope: least_squares_slope(&lx, &ly).unwrap_or(f64::NAN),
    }
}

/// Result of a real-space smoothing experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingExperiment {
    pub slope: f64,
    pub predicted: f64,
    pub times: Vec<f64>,
    pub norms: Vec<f64>,
}

impl SmoothingExperiment {
    pub fn rel_slope_err(&self) -> f64 {
        if self.predicted == 0.0 {
            self.slope.abs()
        } else {
            ((self.slope - self.predicted) / self.predicted).abs()
        }
    }
}

/// Width of the test bump in [`kernel_smoothing_check`].
pub const SMOOTHING_BUMP_WIDTH: f64 = 0.05;

/// Convolves a narrow Gaussian bump with `K_t` (`d = 1`) on a real-line grid
/// and fits `log ‖K_t * f‖_p` against `log t`.
///
/// `K_t(x) = t^{−1/α} K(t^{−1/α}x)` is read from `table` (time 1). The
/// domain half-width is chosen so the neglected heavy tail carries less than
/// `1e-6` of `‖K_t * f‖_p^p`.
pub fn kernel_smoothing_check(
    table: &KernelTable,
    q: f64,
    p: f64,
    times: &[f64],
) -> Result<SmoothingExperiment, SpecfunError> {
    if table.d != 1 {
        return Err(SpecfunError::Domain("smoothing experiments are one-dimensional".into()));
    }
    if !(q >= 1.0 && p >= q) {
        return Err(SpecfunError::Domain(format!("need 1 <= q <= p, got q = {q}, p = {p}")));
    }
    let alpha = table.alpha;
    if !(1.0 / q - 1.0 / p < alpha) {
        return Err(SpecfunError::Domain("need 1/q − 1/p < α".into()));
    }
    if times.len() < 2 {
        return Err(SpecfunError::Domain("need at least two times".into()));
    }
    let sigma = SMOOTHING_BUMP_WIDTH;
    let hb = sigma / 10.0;
    let nb = 60;
    let bump: Vec<(f64, f64)> = (-nb..=nb)
        .map(|j| {
            let y = j as f64 * hb;
            (y, hb * (-0.5 * (y / sigma).powi(2)).exp() / (sigma * (2.0 * PI).sqrt()))
        })
        .collect();
    let predicted = -(1.0 / alpha) * (1.0 / q - 1.0 / p);
    let c_tail = heavy_tail_constant(alpha);
    let mut norms = Vec::with_capacity(times.len());
    for &t in times {
        let s = t.powf(1.0 / alpha);
        let kt = |x: f64| table.interpolate(x / s) / s;
        let conv = |x: f64| bump.iter().map(|(y, w)| w * kt(x - y)).sum::<f64>();
        let norm = if p.is_infinite() {
            // The profile is even and unimodal about the origin.
            conv(0.0).max(conv(hb)).max(conv(-hb))
        } else {
            // Tail of ∫|K_t*f|^p beyond R ~ 2(c t)^p R^{1−p(1+α)}/(p(1+α)−1).
            let peak = conv(0.0);
            let mass = peak.powf(p) * s;
            let e = p * (1.0 + alpha) - 1.0;
            let mut r = 20.0 * s;
            if alpha < 2.0 {
                while 2.0 * (c_tail * t).powf(p) * r.powf(-e) / e > 1e-6 * mass {
                    r *= 1.5;
                }
            }
            let mut breaks = vec![0.0];
            let mut b = 0.25 * s.max(sigma);
            while b < r {
                breaks.push(b);
                b *= 2.0;
            }
            breaks.push(r);
            let res = integrate_with_breaks(|x| conv(x).abs().powf(p), &breaks, QuadOptions::new(0.0, 1e-10));
            (2.0 * res.value).powf(1.0 / p)
        };
        if !norm.is_finite() {
            return Err(SpecfunError::Domain(format!("non-finite norm at t = {t}")));
        }
        norms.push(norm);
    }
    let lx: Vec<f64> = times.iter().map(|t| t.ln()).collect();
    let ly: Vec<f64> = norms.iter().map(|n| n.ln()).collect();
    let slope = least_squares_slope(&lx, &ly).ok_or_else(|| SpecfunError::Domain("degenerate fit".into()))?;
    Ok(SmoothingExperiment {
        slope,
        predicted,
        times: times.to_vec(),
        norms,
    })
}

/// Both sides of the subordination identity at one point (`d = 1`).
///
/// `lhs = ∫_0^∞ M_β(s) (st^β)^{−1/α} K((st^β)^{−1/α} x) ds` and
/// `rhs = (1/π)∫_0^∞ cos(xr) E_β(−t^β r^α) dr`. At `β = 1` the left side is
/// the rescaled kernel and the right side its direct Fourier integral.
pub fn subordination_check(
    beta: f64,
    alpha: f64,
    t: f64,
    x: f64,
    policy: &EvalPolicy,
) -> Result<(f64, f64), SpecfunError> {
    check_args(alpha, 1, t, x)?;
    if !(alpha > 1.0) {
        return Err(SpecfunError::Domain(format!("alpha must exceed 1 here, got {alpha}")));
    }
    if !(beta > 0.0 && beta <= 1.0) {
        return Err(SpecfunError::Domain(format!("beta must lie in (0, 1], got {beta}")));
    }
    if beta == 1.0 {
        let s = t.powf(1.0 / alpha);
        let lhs = eval_kernel(alpha, 1, x / s)?.value / s;
        let rhs = eval_kernel_at_time(alpha, 1, t, x)?.value;
        return Ok((lhs, rhs));
    }
    let lhs = subordinated_kernel(beta, alpha, t, x, policy)?;
    let rhs = ml_cosine_transform(beta, alpha, t, x, policy)?;
    Ok((lhs, rhs))
}

fn subordinated_kernel(beta: f64, alpha: f64, t: f64, x: f64, policy: &EvalPolicy) -> Result<f64, SpecfunError> {
    let tb = t.powf(beta);
    if x == 0.0 {
        // K(0)·t^{−β/α}·∫ s^{−1/α} M_β(s) ds with the moment in closed form.
        let k0 = eval_kernel(alpha, 1, 0.0)?.value;
        let r = -1.0 / alpha;
        return Ok(k0 * tb.powf(r) * gamma_fn(1.0 + r)? * rgamma(1.0 + beta * r));
    }
    let mut failure = None;
    let mut integrand = |s: f64| -> f64 {
        if s == 0.0 {
            return 0.0;
        }
        let scale = (s * tb).powf(-1.0 / alpha);
        let y = scale * x;
        let k = if y > 50.0 {
            match kernel_tail_series(alpha, y, 1e-14) {
                Some(k) => Ok(k),
                None => eval_kernel(alpha, 1, y),
            }
        } else {
            eval_kernel(alpha, 1, y)
        };
        match (k, mainardi(beta, s, policy)) {
            (Ok(k), Ok(m)) => m * scale * k.value,
            (Err(e), _) | (_, Err(e)) => {
                failure.get_or_insert(e);
                0.0
            }
        }
    };
    let s_max = crate::specfun::mainardi_tail_cutoff(beta, 0.0);
    let mut breaks = vec![0.0];
    let mut b = 1e-6;
    while b < s_max {
        breaks.push(b);
        b *= 4.0;
    }
    breaks.push(s_max);
    let r = integrate_with_breaks(&mut integrand, &breaks, QuadOptions::new(1e-12, 1e-10));
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(r.value)
}

fn ml_cosine_transform(beta: f64, alpha: f64, t: f64, x: f64, policy: &EvalPolicy) -> Result<f64, SpecfunError> {
    let tb = t.powf(beta);
    let order = MLOrder::classical(beta)?;
    let mut failure = None;
    let mut g = |r: f64| match mittag_leffler(order, -tb * r.powf(alpha), policy) {
        Ok(v) => v,
        Err(e) => {
            failure.get_or_insert(e);
            0.0
        }
    };
    let value = if x == 0.0 {
        // Quadrature to R, then the asymptotic tail
        // ∫_R^∞ E_β(−t^β r^α) dr ≈ Σ_k (−1)^{k+1} t^{−βk}/Γ(1−βk) · R^{1−αk}/(αk−1).
        let r_big = (200.0 / tb).powf(1.0 / alpha);
        let (head, _) = oscillatory(&mut g, 0.0, 0.0, r_big, false, 0, 1e-15);
        let mut tail = 0.0;
        let mut prev = f64::INFINITY;
        for k in 1..40 {
            let kf = k as f64;
            let term = rgamma(1.0 - beta * kf) * tb.powf(-kf) * r_big.powf(1.0 - alpha * kf) / (alpha * kf - 1.0);
            if term.abs() > prev {
                break;
            }
            if term != 0.0 {
                prev = term.abs();
            }
            tail += if k % 2 == 1 { term } else { -term };
        }
        head + tail
    } else {
        oscillatory(|r| (x * r).cos() * g(r), x, 0.5, f64::INFINITY, true, 20_000, 1e-15).0
    };
    if let Some(e) = failure {
        return Err(e);
    }
    Ok(value / PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_values() {
        let k = eval_kernel(2.0, 1, 0.0).unwrap();
        assert!((k.value - 1.0 / (4.0 * PI).sqrt()).abs() < 1e-12, "{k:?}");
        for x in [0.5, 3.0, 7.0] {
            let k = eval_kernel(2.0, 1, x).unwrap();
            let exact = (-x * x / 4.0f64).exp() / (4.0 * PI).sqrt();
            assert!((k.value - exact).abs() < 1e-12, "x={x}: {k:?} vs {exact}");
        }
        let k = eval_kernel(1.0, 1, 1.0).unwrap();
        assert!((k.value - 1.0 / (2.0 * PI)).abs() < 1e-10);
        let k = eval_kernel(1.5, 1, 0.0).unwrap();
        assert!((k.value - gamma_fn(5.0 / 3.0).unwrap() / PI).abs() < 1e-12);
    }

    #[test]
    fn cauchy_kernel_far_out() {
        // α = 1 is the Cauchy density 1/(π(1+x²)).
        for x in [12.0, 30.0, 50.0] {
            let k = eval_kernel(1.0, 1, x).unwrap();
            let exact = 1.0 / (PI * (1.0 + x * x));
            assert!((k.value - exact).abs() < 1e-11, "x={x}: {} vs {exact}", k.value);
        }
    }

    #[test]
    fn two_dimensional_gaussian() {
        for x in [0.0, 1.0, 4.0, 15.0] {
            let k = eval_kernel(2.0, 2, x).unwrap();
            let exact = (-x * x / 4.0f64).exp() / (4.0 * PI);
            assert!((k.value - exact).abs() < 1e-11, "x={x}: {} vs {exact}", k.value);
        }
    }

    #[test]
    fn j0_values() {
        // Reference values to 16 digits.
        let cases = [
            (0.0, 1.0),
            (1.0, 0.765_197_686_557_966_6),
            (2.404_825_557_695_773, 0.0),
            (10.0, -0.245_935_764_451_348_3),
            (30.0, -0.086_367_983_581_040_23),
            (100.0, 0.019_985_850_304_223_12),
        ];
        for (z, want) in cases {
            assert!((bessel_j0(z) - want).abs() < 1e-14, "J0({z}) = {}", bessel_j0(z));
        }
        assert!((bessel_j0(24.999) - bessel_j0(25.001)).abs() < 1e-3);
    }

    #[test]
    fn tail_series_matches_quadrature() {
        for alpha in [1.2, 1.5] {
            let x = 45.0;
            let q = eval_kernel(alpha, 1, x).unwrap().value;
            let s = kernel_tail_series(alpha, x, 1e-12).unwrap().value;
            assert!((q - s).abs() < 1e-12, "α={alpha}: {q} vs {s}");
        }
    }

    #[test]
    fn table_interpolation_is_accurate() {
        let tab = KernelTable::uniform(1.5, 1, 0.05, 5.0).unwrap();
        for x in [0.013, 0.77, 2.345, 4.96] {
            let direct = eval_kernel(1.5, 1, x).unwrap().value;
            assert!((tab.interpolate(x) - direct).abs() < 1e-7, "x={x}: {}", tab.interpolate(x) - direct);
        }
        let mut csv = Vec::new();
        tab.write_csv(&mut csv).unwrap();
        let text = String::from_utf8(csv).unwrap();
        assert!(text.starts_with("radius,value,abs_err\n0.0,"));
    }
}
