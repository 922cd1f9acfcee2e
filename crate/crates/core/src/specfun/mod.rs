//! Special functions on the real ranges the solver needs.
//!
//! * [`gamma_fn`], [`rgamma`], [`lgamma`]: Gamma function and friends.
//! * [`mittag_leffler`]: two-parameter Mittag-Leffler function `E_{β,γ}(z)` for `z ≤ 0`.
//! * [`mainardi`]: the Mainardi (M-Wright) function `M_β(s)` for `s ≥ 0`,
//!   plus its moments and the subordinated Laplace integral [`a_sigma`].

mod gamma;
mod mainardi;
mod mittag_leffler;

pub use gamma::{cos_pi, gamma_fn, lgamma, rgamma, sin_pi};
pub use mainardi::{
    a_sigma, mainardi, mainardi_eval, mainardi_moment, mainardi_tail_cutoff, MainardiEval,
    MAINARDI_SAFE_BOUND,
    MainardiMethod, MomentResult,
};
pub use mittag_leffler::{mittag_leffler, mittag_leffler_eval, MLEval, MLMethod, MLOrder};

use thiserror::Error;

/// Errors raised by special-function evaluation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecfunError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("range error: result overflows (sign {sign})")]
    Range { sign: f64 },
    #[error("accuracy error: achieved error {achieved:e} exceeds target {target:e} (value {value})")]
    Accuracy {
        value: f64,
        achieved: f64,
        target: f64,
    },
    #[error("invalid evaluation policy: {0}")]
    Policy(String),
}

/// Regime thresholds and accuracy target for series/integral evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalPolicy {
    /// Taylor summation is attempted for `|z|` at or below this value.
    pub series_cutoff: f64,
    /// The asymptotic expansion is attempted for `|z|` at or above this value.
    pub asymptotic_cutoff: f64,
    pub target_rel_err: f64,
    pub max_terms: usize,
}

impl Default for EvalPolicy {
    fn default() -> Self {
        Self {
            series_cutoff: 5.0,
            asymptotic_cutoff: 30.0,
            target_rel_err: 1e-12,
            max_terms: 500,
        }
    }
}

impl EvalPolicy {
    pub fn validate(&self) -> Result<(), SpecfunError> {
        if !(self.series_cutoff >= 0.0 && self.series_cutoff < self.asymptotic_cutoff) {
            return Err(SpecfunError::Policy(format!(
                "series_cutoff ({}) must be nonnegative and below asymptotic_cutoff ({})",
                self.series_cutoff, self.asymptotic_cutoff
            )));
        }
        if !(self.target_rel_err > 0.0) {
            return Err(SpecfunError::Policy(format!(
                "target_rel_err must be positive, got {}",
                self.target_rel_err
            )));
        }
        if self.max_terms == 0 {
            return Err(SpecfunError::Policy("max_terms must be positive".into()));
        }
        Ok(())
    }
}
