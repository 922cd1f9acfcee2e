//! Per-step measurements and the checks run on them.

use std::io::Write;

use crate::grid::{
    divergence_residual, frac_laplacian_spectral, gradient_spectral, inverse_transform, lp_norm, FracParams,
    SpectralField, VectorField,
};
use crate::propagator::least_squares_slope;
use crate::specfun::{mittag_leffler, rgamma, EvalPolicy, MLOrder};

use super::{NormExponents, SolverConfig, SolverError, SpecState, Solver};

/// The three monitored unknowns.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NormedField {
    /// `n` in `L^q`.
    N,
    /// `∇v` in `L^r`.
    GradV,
    /// `u` in `L^p`.
    U,
}

/// Time-weight exponent of the global classes:
/// `(dβ/α)((2α−2+μ)/d − 1/q)` for `n`, `(dβ/α)((α−1+μ)/d − 1/s)` for `∇v`
/// and `u` (`s = r, p`).
pub fn weight_exponent(d: usize, params: &FracParams, mu: f64, field: NormedField, exponent: f64) -> f64 {
    let (a, b) = (params.alpha, params.beta);
    let df = d as f64;
    let order = match field {
        NormedField::N => 2.0 * a - 2.0 + mu,
        NormedField::GradV | NormedField::U => a - 1.0 + mu,
    };
    df * b / a * (order / df - 1.0 / exponent)
}

/// `t^a·x`, with the value at `t = 0` taken as the limit when it exists.
fn weighted(t: f64, a: f64, x: f64) -> f64 {
    if t > 0.0 {
        t.powf(a) * x
    } else if x == 0.0 || a > 0.0 {
        0.0
    } else if a == 0.0 {
        x
    } else {
        f64::NAN
    }
}

/// One diagnostics row.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagRecord {
    pub t: f64,
    pub mass_n: f64,
    pub mass_v: f64,
    pub norm_n_q: f64,
    pub norm_gradv_r: f64,
    pub norm_u_p: f64,
    pub div_residual: f64,
    /// `‖n − E_β n₀‖_q`, `‖∇(v − E_β v₀)‖_r`, `‖u − E_β u₀‖_p`.
    pub dev_n_q: f64,
    pub dev_gradv_r: f64,
    pub dev_u_p: f64,
    /// Per configured μ: `‖(−Δ)^{μ/2}n‖_q`, `‖(−Δ)^{μ/2}∇v‖_r`, `‖(−Δ)^{μ/2}u‖_p`.
    pub sobolev: Vec<[f64; 3]>,
}

impl DiagRecord {
    /// The blow-up monitored norms.
    pub fn monitored(&self) -> [f64; 3] {
        [self.norm_n_q, self.norm_gradv_r, self.norm_u_p]
    }
}

/// Diagnostics time series of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostics {
    pub d: usize,
    pub params: FracParams,
    pub exponents: NormExponents,
    pub sobolev_mu: Vec<f64>,
    pub records: Vec<DiagRecord>,
}

fn vector_norm(components: &[SpectralField], p: f64) -> Result<f64, SolverError> {
    let v = VectorField::new(components.iter().map(inverse_transform).collect())?;
    Ok(lp_norm(&v.magnitude(), p)?)
}

fn scalar_norm(s: &SpectralField, p: f64) -> Result<f64, SolverError> {
    Ok(lp_norm(&inverse_transform(s), p)?)
}

fn diff(a: &SpectralField, b: &SpectralField) -> SpectralField {
    let mut out = a.clone();
    for (x, y) in out.coeffs_mut().iter_mut().zip(b.coeffs()) {
        *x -= y;
    }
    out
}

/// Measures the current state of `solver`.
pub(crate) fn measure(solver: &Solver) -> Result<DiagRecord, SolverError> {
    let cfg = solver.config();
    let e = cfg.exponents;
    let s = solver.state();
    let spec: &SpecState = solver.spec();
    let lin: &SpecState = solver.linear();
    let grad_v = gradient_spectral(&spec.v);
    let dev_n = diff(&spec.n, &lin.n);
    let dev_v = diff(&spec.v, &lin.v);
    let dev_u: Vec<SpectralField> = spec.u.iter().zip(&lin.u).map(|(a, b)| diff(a, b)).collect();
    let mut sobolev = Vec::with_capacity(cfg.sobolev_mu.len());
    for &mu in &cfg.sobolev_mu {
        let lap = |f: &SpectralField| frac_laplacian_spectral(f, mu);
        sobolev.push([
            scalar_norm(&lap(&spec.n), e.q)?,
            vector_norm(&grad_v.iter().map(lap).collect::<Vec<_>>(), e.r)?,
            vector_norm(&spec.u.iter().map(lap).collect::<Vec<_>>(), e.p)?,
        ]);
    }
    Ok(DiagRecord {
        t: s.t,
        mass_n: s.n.integral(),
        mass_v: s.v.integral(),
        norm_n_q: lp_norm(&s.n, e.q)?,
        norm_gradv_r: vector_norm(&grad_v, e.r)?,
        norm_u_p: lp_norm(&s.u.magnitude(), e.p)?,
        div_residual: divergence_residual(&s.u),
        dev_n_q: scalar_norm(&dev_n, e.q)?,
        dev_gradv_r: vector_norm(&gradient_spectral(&dev_v), e.r)?,
        dev_u_p: vector_norm(&dev_u, e.p)?,
        sobolev,
    })
}

impl Diagnostics {
    pub fn new(cfg: &SolverConfig) -> Self {
        Self {
            d: cfg.grid.d(),
            params: cfg.params,
            exponents: cfg.exponents,
            sobolev_mu: cfg.sobolev_mu.clone(),
            records: Vec::new(),
        }
    }

    /// Appends a record; times must increase.
    pub fn push(&mut self, r: DiagRecord) {
        if let Some(last) = self.records.last() {
            assert!(r.t > last.t, "diagnostics times must increase");
        }
        self.records.push(r);
    }

    /// Exponents of the weighted deviation columns (μ = 0).
    fn dev_weights(&self) -> [f64; 3] {
        let e = self.exponents;
        [
            weight_exponent(self.d, &self.params, 0.0, NormedField::N, e.q),
            weight_exponent(self.d, &self.params, 0.0, NormedField::GradV, e.r),
            weight_exponent(self.d, &self.params, 0.0, NormedField::U, e.p),
        ]
    }

    fn sobolev_weights(&self, mu: f64) -> [f64; 3] {
        let e = self.exponents;
        [
            weight_exponent(self.d, &self.params, mu, NormedField::N, e.q),
            weight_exponent(self.d, &self.params, mu, NormedField::GradV, e.r),
            weight_exponent(self.d, &self.params, mu, NormedField::U, e.p),
        ]
    }

    pub fn header(&self) -> Vec<String> {
        let mut h: Vec<String> = [
            "t",
            "mass_n",
            "mass_v",
            "norm_n_q",
            "norm_gradv_r",
            "norm_u_p",
            "div_residual",
            "dev_n_q",
            "dev_gradv_r",
            "dev_u_p",
            "w_dev_n_q",
            "w_dev_gradv_r",
            "w_dev_u_p",
        ]
        .iter()
        .map(|s| s.to_string())
        .collect();
        for mu in &self.sobolev_mu {
            for name in ["sob_n_q", "sob_gradv_r", "sob_u_p", "w_sob_n_q", "w_sob_gradv_r", "w_sob_u_p"] {
                h.push(format!("{name}_mu{mu:?}"));
            }
        }
        h
    }

    /// Numeric row matching [`Diagnostics::header`].
    pub fn row(&self, r: &DiagRecord) -> Vec<f64> {
        let wd = self.dev_weights();
        let mut row = vec![
            r.t,
            r.mass_n,
            r.mass_v,
            r.norm_n_q,
            r.norm_gradv_r,
            r.norm_u_p,
            r.div_residual,
            r.dev_n_q,
            r.dev_gradv_r,
            r.dev_u_p,
            weighted(r.t, wd[0], r.dev_n_q),
            weighted(r.t, wd[1], r.dev_gradv_r),
            weighted(r.t, wd[2], r.dev_u_p),
        ];
        for (mu, s) in self.sobolev_mu.iter().zip(&r.sobolev) {
            let w = self.sobolev_weights(*mu);
            row.extend_from_slice(s);
            row.extend((0..3).map(|i| weighted(r.t, w[i], s[i])));
        }
        row
    }

    /// CSV with shortest round-trip float formatting.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", self.header().join(","))?;
        for r in &self.records {
            let cells: Vec<String> = self.row(r).iter().map(|x| format!("{x:?}")).collect();
            writeln!(w, "{}", cells.join(","))?;
        }
        Ok(())
    }

    /// Largest relative change of `mass_n` from the first record.
    pub fn mass_n_drift(&self) -> f64 {
        let Some(first) = self.records.first() else {
            return 0.0;
        };
        let scale = first.mass_n.abs().max(f64::MIN_POSITIVE);
        self.records
            .iter()
            .map(|r| (r.mass_n - first.mass_n).abs() / scale)
            .fold(0.0, f64::max)
    }

    pub fn max_div_residual(&self) -> f64 {
        self.records.iter().map(|r| r.div_residual).fold(0.0, f64::max)
    }
}

/// Comparison of the recorded attractant mass with its closed forms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VMassCheck {
    /// Max discrepancy against the reference formula: `v̄₀ + t^β n̄₀/(βΓ(β))`
    /// when `γ = 0`, else `v̄₀E + n̄₀(1 − E)/γ` with `E = E_β(−γt^β)`.
    pub max_abs_err: f64,
    /// For `γ > 0`: max discrepancy against the variant with prefactor
    /// `1/(γΓ(β))` on the source term.
    pub alt_formula_max_abs_err: Option<f64>,
}

/// Checks `mass_v(t)` along the recorded trajectory.
pub fn verify_v_mass(
    diag: &Diagnostics,
    n0_mass: f64,
    v0_mass: f64,
    params: &FracParams,
    policy: &EvalPolicy,
) -> Result<VMassCheck, SolverError> {
    let (beta, gamma) = (params.beta, params.gamma);
    let mut err = 0.0f64;
    let mut alt_err = 0.0f64;
    let order = MLOrder::classical(beta)?;
    for r in &diag.records {
        let tb = r.t.powf(beta);
        if gamma == 0.0 {
            let reference = v0_mass + tb * rgamma(beta) / beta * n0_mass;
            err = err.max((r.mass_v - reference).abs());
        } else {
            let e = mittag_leffler(order, -gamma * tb, policy)?;
            let reference = v0_mass * e + n0_mass * (1.0 - e) / gamma;
            let alt = v0_mass * e + n0_mass * (1.0 - e) * rgamma(beta) / gamma;
            err = err.max((r.mass_v - reference).abs());
            alt_err = alt_err.max((r.mass_v - alt).abs());
        }
    }
    Ok(VMassCheck {
        max_abs_err: err,
        alt_formula_max_abs_err: (gamma > 0.0).then_some(alt_err),
    })
}

/// Sup and late-time trend of one weighted quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct DecaySup {
    pub name: String,
    pub sup: f64,
    /// Log-log slope over the final decade of recorded times (NaN if too few
    /// positive samples).
    pub final_decade_slope: f64,
}

/// Sups over `t > 0` of every weighted column (deviations from the linear
/// evolution and, per configured μ, the weighted Sobolev norms).
pub fn decay_estimate_check(diag: &Diagnostics) -> Vec<DecaySup> {
    let header = diag.header();
    let rows: Vec<Vec<f64>> = diag.records.iter().filter(|r| r.t > 0.0).map(|r| diag.row(r)).collect();
    let t_last = rows.last().map(|r| r[0]).unwrap_or(0.0);
    header
        .iter()
        .enumerate()
        .filter(|(_, h)| h.starts_with("w_"))
        .map(|(c, h)| {
            let sup = rows.iter().map(|r| r[c].abs()).fold(0.0, f64::max);
            let (lx, ly): (Vec<f64>, Vec<f64>) = rows
                .iter()
                .filter(|r| r[0] >= t_last / 10.0 && r[c] > 0.0)
                .map(|r| (r[0].ln(), r[c].ln()))
                .unzip();
            DecaySup {
                name: h.clone(),
                sup: if rows.iter().any(|r| r[c].is_nan()) { f64::NAN } else { sup },
                final_decade_slope: if lx.len() >= 3 {
                    least_squares_slope(&lx, &ly).unwrap_or(f64::NAN)
                } else {
                    f64::NAN
                },
            }
        })
        .collect()
}

/// Earliest time any of `‖n‖_q`, `‖∇v‖_r`, `‖u‖_p` reaches `threshold`,
/// interpolated log-linearly between the bracketing records.
pub fn blowup_monitor(diag: &Diagnostics, threshold: f64) -> Option<f64> {
    if !(threshold < f64::INFINITY) {
        return None;
    }
    let mut best: Option<f64> = None;
    for which in 0..3 {
        let mut prev: Option<(f64, f64)> = None;
        for r in &diag.records {
            let x = r.monitored()[which];
            if !(x < threshold) {
                let t = match prev {
                    Some((t0, x0)) if x.is_finite() && x0 > 0.0 && x > x0 => {
                        let s = (threshold.ln() - x0.ln()) / (x.ln() - x0.ln());
                        t0 + s.clamp(0.0, 1.0) * (r.t - t0)
                    }
                    _ => r.t,
                };
                best = Some(best.map_or(t, |b: f64| b.min(t)));
                break;
            }
            prev = Some((r.t, x));
        }
    }
    best
}

/// A `Diagnostics` carrying synthetic monitored norms, for probing the monitor.
pub fn synthetic_diagnostics(cfg: &SolverConfig, series: &[(f64, [f64; 3])]) -> Diagnostics {
    let mut d = Diagnostics::new(cfg);
    for &(t, [a, b, c]) in series {
        d.push(DiagRecord {
            t,
            mass_n: 0.0,
            mass_v: 0.0,
            norm_n_q: a,
            norm_gradv_r: b,
            norm_u_p: c,
            div_residual: 0.0,
            dev_n_q: 0.0,
            dev_gradv_r: 0.0,
            dev_u_p: 0.0,
            sobolev: vec![[0.0; 3]; cfg.sobolev_mu.len()],
        });
    }
    d
}
