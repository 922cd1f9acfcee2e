//! Exponent admissibility checks for the local and global existence theory.
//!
//! Four rule sets are available (see [`Rule`]): the two local existence
//! results (Lebesgue and fractional Sobolev settings) and the two case
//! taxonomies used for global existence. Each rule set is a list of cases;
//! a case has one or more gates on `(α, β, μ)` and one or more inequality
//! branches on `(q, p, r)`. Every combination that holds is recorded, in
//! document order.
//!
//! Conventions:
//! * a bound `a / b` whose denominator `b` is `≤ 0` evaluates to `+∞`;
//! * two computed values within `1e-12` relative are treated as equal, so a
//!   strict inequality fails at equality and a non-strict one holds;
//! * exponents may be `+∞`.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;
use thiserror::Error;

/// Relative tolerance for equality of computed bounds.
pub const EQ_REL_TOL: f64 = 1e-12;

/// Dimension, orders and Lebesgue/Sobolev exponents to be tested.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentTuple {
    pub d: u32,
    pub alpha: f64,
    pub beta: f64,
    /// Sobolev index; ignored by the Lebesgue-space rules.
    pub mu: f64,
    pub p: f64,
    pub q: f64,
    pub r: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum AdmissibilityError {
    #[error("invalid exponent tuple: {}", .0.join("; "))]
    Invalid(Vec<String>),
    #[error("unknown rule '{0}' (expected theorem1, assumption1, theorem3 or assumption2)")]
    UnknownRule(String),
}

impl ExponentTuple {
    /// Checks the structural invariants. Exponents in `(0, 1)` are accepted
    /// here and reported as violations by the checkers instead.
    pub fn validate(&self) -> Result<(), AdmissibilityError> {
        let mut broken = Vec::new();
        if self.d < 2 {
            broken.push(format!("d must be at least 2, got {}", self.d));
        }
        if !(self.alpha > 1.0 && self.alpha <= 2.0) {
            broken.push(format!("alpha must lie in (1, 2], got {}", self.alpha));
        }
        if !(self.beta > 0.0 && self.beta < 1.0) {
            broken.push(format!("beta must lie in (0, 1), got {}", self.beta));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            broken.push(format!("mu must be finite and nonnegative, got {}", self.mu));
        }
        for (name, v) in [("p", self.p), ("q", self.q), ("r", self.r)] {
            if !(v > 0.0) {
                broken.push(format!("{name} must be positive (or +inf), got {v}"));
            }
        }
        if broken.is_empty() {
            Ok(())
        } else {
            Err(AdmissibilityError::Invalid(broken))
        }
    }

    fn df(&self) -> f64 {
        self.d as f64
    }
}

/// The rule set to check against.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Rule {
    /// Local existence in Lebesgue spaces, conditions (1)–(2).
    Theorem1,
    /// Global existence in Lebesgue spaces, cases (I)–(V).
    Assumption1,
    /// Local existence in fractional Sobolev spaces, conditions (1)–(4).
    Theorem3,
    /// Global existence in fractional Sobolev spaces, cases (I)–(X).
    Assumption2,
}

impl Rule {
    pub const ALL: [Rule; 4] = [
        Rule::Theorem1,
        Rule::Assumption1,
        Rule::Theorem3,
        Rule::Assumption2,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Rule::Theorem1 => "Theorem1",
            Rule::Assumption1 => "Assumption1",
            Rule::Theorem3 => "Theorem3",
            Rule::Assumption2 => "Assumption2",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = AdmissibilityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "theorem1" => Ok(Rule::Theorem1),
            "assumption1" => Ok(Rule::Assumption1),
            "theorem3" => Ok(Rule::Theorem3),
            "assumption2" => Ok(Rule::Assumption2),
            _ => Err(AdmissibilityError::UnknownRule(s.to_string())),
        }
    }
}

/// One interval constraint `lo <(=) var <(=) hi`, evaluated.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintRecord {
    pub var: &'static str,
    pub value: f64,
    pub lo: f64,
    pub lo_text: &'static str,
    pub lo_inclusive: bool,
    pub hi: f64,
    pub hi_text: &'static str,
    pub hi_inclusive: bool,
    pub holds: bool,
}

impl ConstraintRecord {
    /// Whether the admissible interval itself is nonempty.
    pub fn interval_nonempty(&self) -> bool {
        if self.lo_inclusive && self.hi_inclusive {
            le(self.lo, self.hi)
        } else {
            lt(self.lo, self.hi)
        }
    }

    fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let lo_ok = if self.lo_inclusive {
            le(self.lo, self.value)
        } else {
            lt(self.lo, self.value)
        };
        let hi_ok = if self.hi_inclusive {
            le(self.value, self.hi)
        } else {
            lt(self.value, self.hi)
        };
        if !lo_ok {
            let op = if self.lo_inclusive { ">=" } else { ">" };
            out.push(format!(
                "{} {op} {} fails ({} vs {})",
                self.var, self.lo_text, self.value, self.lo
            ));
        }
        if !hi_ok {
            let op = if self.hi_inclusive { "<=" } else { "<" };
            out.push(format!(
                "{} {op} {} fails ({} vs {})",
                self.var, self.hi_text, self.value, self.hi
            ));
        }
        out
    }
}

/// A gate/branch combination that held, with its evaluated constraints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseMatch {
    pub label: String,
    pub constraints: Vec<ConstraintRecord>,
}

/// Outcome of checking one rule set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdmissibilityReport {
    pub satisfied: bool,
    pub rule: Rule,
    /// Labels of every case that held, in document order; the first is the
    /// reported case.
    pub case_path: Vec<String>,
    /// Failed inequalities with their evaluated sides; empty when satisfied.
    pub violated_inequalities: Vec<String>,
    pub matches: Vec<CaseMatch>,
}

impl AdmissibilityReport {
    /// The first case that held.
    pub fn first_case(&self) -> Option<&str> {
        self.case_path.first().map(String::as_str)
    }

    /// Compact JSON object with keys `satisfied`, `rule`, `case_path`, `violated`.
    pub fn to_json(&self) -> serde_json::Value {
        serde_json::json!({
            "satisfied": self.satisfied,
            "rule": self.rule.name(),
            "case_path": self.case_path,
            "violated": self.violated_inequalities,
        })
    }

    /// Line-oriented rendering.
    pub fn to_text(&self) -> String {
        let mut s = format!("rule: {}\nsatisfied: {}\n", self.rule, self.satisfied);
        if self.case_path.is_empty() {
            s.push_str("case_path: (none)\n");
        } else {
            s.push_str(&format!("case_path: {}\n", self.case_path.join(", ")));
        }
        for v in &self.violated_inequalities {
            s.push_str(&format!("violated: {v}\n"));
        }
        s
    }
}

// ---------------------------------------------------------------------------
// Comparison helpers

fn approx_eq(a: f64, b: f64) -> bool {
    if a == b {
        return true;
    }
    a.is_finite() && b.is_finite() && (a - b).abs() <= EQ_REL_TOL * a.abs().max(b.abs())
}

fn lt(a: f64, b: f64) -> bool {
    a < b && !approx_eq(a, b)
}

fn le(a: f64, b: f64) -> bool {
    a < b || approx_eq(a, b)
}

/// `num / (a - b)`, or `+∞` when the denominator is nonpositive.
fn frac(num: f64, a: f64, b: f64) -> f64 {
    let den = a - b;
    if den.is_nan() || den <= 0.0 || approx_eq(a, b) {
        f64::INFINITY
    } else {
        num / den
    }
}

// ---------------------------------------------------------------------------
// Bounds

#[derive(Clone, Copy)]
struct Bound {
    text: &'static str,
    eval: fn(&ExponentTuple) -> f64,
}

macro_rules! bound {
    ($name:ident, $text:expr, |$t:ident| $body:expr) => {
        const $name: Bound = Bound {
            text: $text,
            eval: {
                fn f($t: &ExponentTuple) -> f64 {
                    $body
                }
                f
            },
        };
    };
}

bound!(ZERO, "0", |_t| 0.0);
bound!(ONE, "1", |_t| 1.0);
bound!(INF, "∞", |_t| f64::INFINITY);
bound!(A54, "5/4", |_t| 1.25);
bound!(A43, "4/3", |_t| 4.0 / 3.0);
bound!(A32, "3/2", |_t| 1.5);
bound!(A2, "2", |_t| 2.0);
bound!(Q, "q", |t| t.q);

bound!(G5, "α/(5α−5)", |t| t.alpha / (5.0 * t.alpha - 5.0));
bound!(G4, "α/(4α−4)", |t| t.alpha / (4.0 * t.alpha - 4.0));
bound!(G3, "α/(3α−3)", |t| t.alpha / (3.0 * t.alpha - 3.0));

bound!(AM1, "α−1", |t| t.alpha - 1.0);
bound!(AM2, "2α−2", |t| 2.0 * t.alpha - 2.0);
bound!(M3, "α/β−(3α−3)", |t| t.alpha / t.beta - (3.0 * t.alpha - 3.0));
bound!(M2, "α/(2β)−(α−1)/2", |t| t.alpha / (2.0 * t.beta)
    - 0.5 * (t.alpha - 1.0));
bound!(M2B, "α/(2β)−(α−1)", |t| t.alpha / (2.0 * t.beta) - (t.alpha - 1.0));
bound!(M2C, "α/β−(2α−2)", |t| t.alpha / t.beta - (2.0 * t.alpha - 2.0));
bound!(M3C, "α/(3β)+(α−1)/3", |t| t.alpha / (3.0 * t.beta)
    + (t.alpha - 1.0) / 3.0);
bound!(M3B, "α/(3β)", |t| t.alpha / (3.0 * t.beta));

bound!(D1, "d/(α−1)", |t| frac(t.df(), t.alpha - 1.0, 0.0));
bound!(D2, "d/(2α−2)", |t| frac(t.df(), 2.0 * t.alpha - 2.0, 0.0));
bound!(D2M, "d/(2α−2−μ)", |t| frac(t.df(), 2.0 * t.alpha - 2.0, t.mu));
bound!(D1M, "d/(α−1−μ)", |t| frac(t.df(), t.alpha - 1.0, t.mu));
bound!(PQ0, "qd/(d−(α−1)q)", |t| frac(
    t.q * t.df(),
    t.df(),
    (t.alpha - 1.0) * t.q
));
bound!(PQM, "qd/(d−(α−1−μ)q)", |t| frac(
    t.q * t.df(),
    t.df(),
    (t.alpha - 1.0 - t.mu) * t.q
));

fn s_coef(t: &ExponentTuple, mu: f64) -> (f64, f64) {
    ((3.0 * t.alpha - 3.0 + mu) * t.beta, t.alpha)
}

fn sq(t: &ExponentTuple, mu: f64, scale: f64) -> f64 {
    let (a, b) = s_coef(t, mu);
    frac(scale * t.df() * t.beta, a, b)
}

fn rq(t: &ExponentTuple, mu: f64) -> f64 {
    let db = t.df() * t.beta;
    if t.q.is_infinite() {
        // Limit q → ∞ of dβq / (Sq − dβ).
        return sq(t, mu, 1.0);
    }
    let (a, b) = s_coef(t, mu);
    frac(db * t.q, a * t.q, b * t.q + db)
}

bound!(SQ, "dβ/((3α−3+μ)β−α)", |t| sq(t, t.mu, 1.0));
bound!(S2Q, "2dβ/((3α−3+μ)β−α)", |t| sq(t, t.mu, 2.0));
bound!(RQ, "dβq/((3α−3+μ)βq−αq−dβ)", |t| rq(t, t.mu));
bound!(SQ0, "dβ/((3α−3)β−α)", |t| sq(t, 0.0, 1.0));
bound!(S2Q0, "2dβ/((3α−3)β−α)", |t| sq(t, 0.0, 2.0));
bound!(RQ0, "dβq/(((3α−3)β−α)q−dβ)", |t| rq(t, 0.0));
bound!(T4, "2dβ/((4α−4)β−α)", |t| frac(
    2.0 * t.df() * t.beta,
    (4.0 * t.alpha - 4.0) * t.beta,
    t.alpha
));
bound!(T4M, "2dβ/((4α−4+μ)β−α)", |t| frac(
    2.0 * t.df() * t.beta,
    (4.0 * t.alpha - 4.0 + t.mu) * t.beta,
    t.alpha
));

// ---------------------------------------------------------------------------
// Case tables

#[derive(Clone, Copy)]
enum Var {
    Alpha,
    Beta,
    Mu,
    Q,
    P,
    R,
}

impl Var {
    fn name(self) -> &'static str {
        match self {
            Var::Alpha => "α",
            Var::Beta => "β",
            Var::Mu => "μ",
            Var::Q => "q",
            Var::P => "p",
            Var::R => "r",
        }
    }

    fn get(self, t: &ExponentTuple) -> f64 {
        match self {
            Var::Alpha => t.alpha,
            Var::Beta => t.beta,
            Var::Mu => t.mu,
            Var::Q => t.q,
            Var::P => t.p,
            Var::R => t.r,
        }
    }
}

#[derive(Clone, Copy)]
struct Constraint {
    var: Var,
    lo: Bound,
    lo_incl: bool,
    hi: Bound,
    hi_incl: bool,
}

impl Constraint {
    fn eval(&self, t: &ExponentTuple) -> ConstraintRecord {
        let value = self.var.get(t);
        let lo = (self.lo.eval)(t);
        let hi = (self.hi.eval)(t);
        let lo_ok = if self.lo_incl { le(lo, value) } else { lt(lo, value) };
        let hi_ok = if self.hi_incl { le(value, hi) } else { lt(value, hi) };
        ConstraintRecord {
            var: self.var.name(),
            value,
            lo,
            lo_text: self.lo.text,
            lo_inclusive: self.lo_incl,
            hi,
            hi_text: self.hi.text,
            hi_inclusive: self.hi_incl,
            holds: lo_ok && hi_ok,
        }
    }
}

// Interval shorthands: o = open end, c = closed end.
fn oo(var: Var, lo: Bound, hi: Bound) -> Constraint {
    Constraint { var, lo, lo_incl: false, hi, hi_incl: false }
}
fn oc(var: Var, lo: Bound, hi: Bound) -> Constraint {
    Constraint { var, lo, lo_incl: false, hi, hi_incl: true }
}
fn co(var: Var, lo: Bound, hi: Bound) -> Constraint {
    Constraint { var, lo, lo_incl: true, hi, hi_incl: false }
}
fn cc(var: Var, lo: Bound, hi: Bound) -> Constraint {
    Constraint { var, lo, lo_incl: true, hi, hi_incl: true }
}

struct Part {
    name: Option<&'static str>,
    constraints: Vec<Constraint>,
}

struct Case {
    name: &'static str,
    gates: Vec<Part>,
    branches: Vec<Part>,
}

fn part(name: &'static str, constraints: Vec<Constraint>) -> Part {
    Part { name: Some(name), constraints }
}

fn anon(constraints: Vec<Constraint>) -> Part {
    Part { name: None, constraints }
}

use Var::{Alpha, Beta, Mu, P, Q as Qv, R};

fn gate(name: &'static str, a: Constraint, b: Constraint, m: Constraint) -> Part {
    part(name, vec![a, b, m])
}

fn qpr(q: Constraint, p: Constraint, r: Constraint) -> Vec<Constraint> {
    vec![q, p, r]
}

fn theorem1_cases() -> Vec<Case> {
    vec![
        Case {
            name: "(1)",
            gates: vec![anon(vec![])],
            branches: vec![anon(qpr(
                oc(Qv, D2, D1),
                oo(P, D1, PQ0),
                oo(R, D1, PQ0),
            ))],
        },
        Case {
            name: "(2)",
            gates: vec![anon(vec![])],
            branches: vec![anon(qpr(oo(Qv, D1, INF), oo(P, D1, INF), co(R, Q, INF)))],
        },
    ]
}

fn assumption1_cases() -> Vec<Case> {
    let high = || anon(qpr(oo(Qv, D1, INF), oo(P, D1, INF), co(R, Q, INF)));
    vec![
        Case {
            name: "(I)",
            gates: vec![anon(vec![oc(Alpha, ONE, A2), oo(Beta, ZERO, ONE)])],
            branches: vec![anon(qpr(oc(Qv, D2, D1), oo(P, D1, PQ0), oo(R, D1, PQ0)))],
        },
        Case {
            name: "(II)",
            gates: vec![anon(vec![oc(Alpha, ONE, A32), oo(Beta, ZERO, ONE)])],
            branches: vec![high()],
        },
        Case {
            name: "(III)",
            gates: vec![anon(vec![oc(Alpha, A32, A2), oc(Beta, ZERO, G3)])],
            branches: vec![high()],
        },
        Case {
            name: "(IV)",
            gates: vec![anon(vec![oc(Alpha, A32, A2), oo(Beta, G3, ONE)])],
            branches: vec![anon(qpr(oc(Qv, D1, SQ0), oo(P, D1, INF), co(R, Q, INF)))],
        },
        Case {
            name: "(V)",
            gates: vec![anon(vec![oc(Alpha, A32, A2), oo(Beta, G3, ONE)])],
            branches: vec![anon(qpr(oo(Qv, SQ0, S2Q0), oo(P, D1, RQ0), co(R, Q, RQ0)))],
        },
    ]
}

fn theorem3_cases() -> Vec<Case> {
    let low_mu = || anon(vec![oo(Mu, ZERO, AM1)]);
    vec![
        Case {
            name: "(1)",
            gates: vec![low_mu()],
            branches: vec![anon(qpr(oc(Qv, D2M, D1), oo(P, D1, PQM), oo(R, D1, PQ0)))],
        },
        Case {
            name: "(2)",
            gates: vec![low_mu()],
            branches: vec![anon(qpr(oc(Qv, D1, D1M), oo(P, D1, PQM), co(R, Q, INF)))],
        },
        Case {
            name: "(3)",
            gates: vec![low_mu()],
            branches: vec![anon(qpr(oo(Qv, D1M, INF), oo(P, D1, INF), co(R, Q, INF)))],
        },
        Case {
            name: "(4)",
            gates: vec![anon(vec![co(Mu, AM1, AM2)])],
            branches: vec![anon(qpr(oo(Qv, D2M, INF), oo(P, D1, PQM), co(R, Q, INF)))],
        },
    ]
}

fn assumption2_cases() -> Vec<Case> {
    // Branch (1) shared by several cases.
    let low_q = || qpr(oc(Qv, D2M, D1), oo(P, D1, PQM), oo(R, D1, PQ0));
    vec![
        Case {
            name: "I",
            gates: vec![
                gate("(i)", oc(Alpha, ONE, A54), oo(Beta, ZERO, ONE), oo(Mu, ZERO, AM1)),
                gate("(ii)", oc(Alpha, A54, A2), oc(Beta, ZERO, G5), oo(Mu, ZERO, AM1)),
                gate("(iii)", oc(Alpha, A54, A43), oo(Beta, G5, ONE), oo(Mu, ZERO, AM1)),
                gate("(iv)", oc(Alpha, A43, A2), oc(Beta, G5, G4), oo(Mu, ZERO, AM1)),
                gate("(v)", oc(Alpha, A43, A32), oo(Beta, G4, ONE), oc(Mu, ZERO, M3)),
                gate("(vi)", oc(Alpha, A32, A2), oc(Beta, G4, G3), oc(Mu, ZERO, M3)),
            ],
            branches: vec![
                part("(1)", low_q()),
                part("(2)", qpr(oo(Qv, D1, D1M), oo(P, D1, PQM), co(R, Q, INF))),
                part("(3)", qpr(co(Qv, D1M, INF), oo(P, D1, INF), co(R, Q, INF))),
            ],
        },
        Case {
            name: "II",
            gates: vec![
                gate("(i)", oc(Alpha, ONE, A54), oo(Beta, ZERO, ONE), co(Mu, AM1, AM2)),
                gate("(ii)", oc(Alpha, A54, A2), oc(Beta, ZERO, G5), co(Mu, AM1, AM2)),
                gate("(iii)", oc(Alpha, A54, A43), oo(Beta, G5, ONE), cc(Mu, AM1, M3)),
                gate("(iv)", oc(Alpha, A43, A2), oc(Beta, G5, G4), cc(Mu, AM1, M3)),
            ],
            branches: vec![part(
                "(1)",
                qpr(oo(Qv, D2M, INF), oo(P, D1, PQM), co(R, Q, INF)),
            )],
        },
        Case {
            name: "III",
            gates: vec![
                gate("(i)", oc(Alpha, A54, A43), oo(Beta, G5, ONE), oo(Mu, M3, M2)),
                gate("(ii)", oc(Alpha, A43, A2), oc(Beta, G5, G4), oo(Mu, M3, M2)),
                gate("(iii)", oc(Alpha, A43, A32), oo(Beta, G4, ONE), co(Mu, AM1, M2)),
                gate("(iv)", oc(Alpha, A32, A2), oc(Beta, G4, G3), co(Mu, AM1, M2)),
            ],
            branches: vec![
                part("(1)", qpr(oc(Qv, D2M, SQ), oo(P, D1, PQM), co(R, Q, INF))),
                part("(2)", qpr(oo(Qv, SQ, S2Q), oo(P, D1, PQM), co(R, Q, RQ))),
            ],
        },
        Case {
            name: "IV",
            gates: vec![
                gate("(i)", oc(Alpha, A43, A32), oo(Beta, G4, ONE), oc(Mu, M3, M2B)),
                gate("(ii)", oc(Alpha, A32, A2), oc(Beta, G4, G3), oc(Mu, M3, M2B)),
                gate("(iii)", oc(Alpha, A32, A2), oo(Beta, G3, ONE), oc(Mu, ZERO, M2B)),
            ],
            branches: vec![
                part("(1)", low_q()),
                part("(2)", qpr(oc(Qv, D1, D1M), oo(P, D1, PQM), co(R, Q, INF))),
                part("(3)", qpr(oc(Qv, D1M, SQ), oo(P, D1, INF), co(R, Q, INF))),
                part("(4)", qpr(oo(Qv, SQ, S2Q), oo(P, D1, RQ), co(R, Q, RQ))),
            ],
        },
        Case {
            name: "V",
            gates: vec![
                gate("(i)", oc(Alpha, A43, A32), oo(Beta, G4, ONE), oo(Mu, M2B, AM1)),
                gate("(ii)", oc(Alpha, A32, A2), oc(Beta, G4, G3), oo(Mu, M2B, AM1)),
                gate("(iii)", oc(Alpha, A32, A2), oo(Beta, G3, ONE), oc(Mu, M2B, M2C)),
            ],
            branches: vec![
                part("(1)", low_q()),
                part("(2)", qpr(oc(Qv, D1, SQ), oo(P, D1, PQM), co(R, Q, INF))),
                part("(3)", qpr(oc(Qv, SQ, T4), oo(P, D1, PQM), co(R, Q, RQ))),
                part("(4)", qpr(co(Qv, T4, S2Q), oo(P, D1, RQ), co(R, Q, RQ))),
            ],
        },
        Case {
            name: "VI",
            gates: vec![
                gate("(i)", oc(Alpha, A54, A32), oo(Beta, G5, ONE), co(Mu, M2, M3C)),
                gate("(ii)", oc(Alpha, A32, A2), oc(Beta, G5, G3), co(Mu, M2, M3C)),
                gate("(iii)", oc(Alpha, A32, A2), oo(Beta, G3, ONE), co(Mu, AM1, M3C)),
            ],
            branches: vec![part(
                "(1)",
                qpr(oo(Qv, D2M, S2Q), oo(P, D1, PQM), co(R, Q, RQ)),
            )],
        },
        Case {
            name: "VII",
            gates: vec![gate(
                "(i)",
                oc(Alpha, A32, A2),
                oo(Beta, G3, ONE),
                oo(Mu, M2C, M2),
            )],
            branches: vec![
                part("(1)", qpr(oc(Qv, D2M, T4M), oo(P, D1, PQM), oo(R, D1, PQ0))),
                part("(2)", qpr(oc(Qv, T4M, D1), oo(P, D1, PQM), oo(R, D1, RQ))),
                part("(3)", qpr(oc(Qv, D1, T4), oo(P, D1, PQM), co(R, Q, RQ))),
                part("(4)", qpr(oo(Qv, T4, S2Q), oo(P, D1, RQ), co(R, Q, RQ))),
            ],
        },
        Case {
            name: "VIII",
            gates: vec![gate(
                "(i)",
                oc(Alpha, A32, A2),
                oo(Beta, G3, ONE),
                co(Mu, M2, M3B),
            )],
            branches: vec![
                part("(1)", qpr(oc(Qv, D2M, T4M), oo(P, D1, PQM), oo(R, D1, PQ0))),
                part("(2)", qpr(oc(Qv, T4M, D1), oo(P, D1, PQM), oo(R, D1, RQ))),
            ],
        },
        Case {
            name: "IX",
            gates: vec![gate(
                "(i)",
                oc(Alpha, A32, A2),
                oo(Beta, G3, ONE),
                co(Mu, M3B, AM1),
            )],
            branches: vec![part(
                "(1)",
                qpr(oc(Qv, D2M, D1), oo(P, D1, PQM), oo(R, D1, RQ)),
            )],
        },
        Case {
            name: "X",
            gates: vec![gate(
                "(i)",
                oc(Alpha, A32, A2),
                oo(Beta, G3, ONE),
                co(Mu, M2, AM1),
            )],
            branches: vec![
                part("(1)", qpr(oc(Qv, D1, T4), oo(P, D1, PQM), co(R, Q, RQ))),
                part("(2)", qpr(oo(Qv, T4, S2Q), oo(P, D1, RQ), co(R, Q, RQ))),
            ],
        },
    ]
}

fn cases(rule: Rule) -> Vec<Case> {
    match rule {
        Rule::Theorem1 => theorem1_cases(),
        Rule::Assumption1 => assumption1_cases(),
        Rule::Theorem3 => theorem3_cases(),
        Rule::Assumption2 => assumption2_cases(),
    }
}

fn label(rule: Rule, case: &Case, gate: &Part, branch: &Part) -> String {
    let mut parts = vec![rule.name(), case.name];
    parts.extend(gate.name);
    parts.extend(branch.name);
    parts.join(".")
}

fn gate_label(rule: Rule, case: &Case, gate: &Part) -> String {
    let mut parts = vec![rule.name(), case.name];
    parts.extend(gate.name);
    parts.join(".")
}

// ---------------------------------------------------------------------------
// Evaluation

/// Checks `t` against the given rule set.
pub fn check(rule: Rule, t: &ExponentTuple) -> Result<AdmissibilityReport, AdmissibilityError> {
    t.validate()?;
    let mut case_path = Vec::new();
    let mut matches = Vec::new();
    let mut violated = Vec::new();
    for (name, v) in [("p", t.p), ("q", t.q), ("r", t.r)] {
        if v < 1.0 {
            violated.push(format!("{name} >= 1 fails ({name} = {v})"));
        }
    }
    for case in cases(rule) {
        for g in &case.gates {
            let gate_recs: Vec<ConstraintRecord> = g.constraints.iter().map(|c| c.eval(t)).collect();
            if !gate_recs.iter().all(|r| r.holds) {
                let gl = gate_label(rule, &case, g);
                for r in &gate_recs {
                    for v in r.violations() {
                        violated.push(format!("{gl}: {v}"));
                    }
                }
                continue;
            }
            for b in &case.branches {
                let recs: Vec<ConstraintRecord> = b.constraints.iter().map(|c| c.eval(t)).collect();
                let lbl = label(rule, &case, g, b);
                if recs.iter().all(|r| r.holds) {
                    let mut all = gate_recs.clone();
                    all.extend(recs);
                    case_path.push(lbl.clone());
                    matches.push(CaseMatch {
                        label: lbl,
                        constraints: all,
                    });
                } else {
                    for r in &recs {
                        for v in r.violations() {
                            violated.push(format!("{lbl}: {v}"));
                        }
                    }
                }
            }
        }
    }
    let satisfied = !case_path.is_empty();
    if satisfied {
        violated.clear();
    }
    Ok(AdmissibilityReport {
        satisfied,
        rule,
        case_path,
        violated_inequalities: violated,
        matches,
    })
}

/// Local existence conditions in Lebesgue spaces; `μ` is ignored.
pub fn check_theorem_local(t: &ExponentTuple) -> Result<AdmissibilityReport, AdmissibilityError> {
    check(Rule::Theorem1, t)
}

/// Global existence cases (I)–(V) in Lebesgue spaces; `μ` is ignored.
pub fn check_assumption1(t: &ExponentTuple) -> Result<AdmissibilityReport, AdmissibilityError> {
    check(Rule::Assumption1, t)
}

/// Local existence conditions in fractional Sobolev spaces.
pub fn check_theorem_local_sobolev(
    t: &ExponentTuple,
) -> Result<AdmissibilityReport, AdmissibilityError> {
    check(Rule::Theorem3, t)
}

/// Global existence cases (I)–(X) in fractional Sobolev spaces.
pub fn check_assumption2(t: &ExponentTuple) -> Result<AdmissibilityReport, AdmissibilityError> {
    check(Rule::Assumption2, t)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tup(d: u32, alpha: f64, beta: f64, mu: f64, q: f64, p: f64, r: f64) -> ExponentTuple {
        ExponentTuple { d, alpha, beta, mu, p, q, r }
    }

    #[test]
    fn theorem1_examples() {
        let rep = check_theorem_local(&tup(2, 2.0, 0.5, 0.0, 2.0, 3.0, 3.0)).unwrap();
        assert!(rep.satisfied);
        assert_eq!(rep.first_case(), Some("Theorem1.(1)"));
        let m = &rep.matches[0];
        assert!(m.constraints.iter().any(|c| c.var == "p" && c.hi.is_infinite()));

        let rep = check_theorem_local(&tup(2, 2.0, 0.5, 0.0, 0.5, 3.0, 3.0)).unwrap();
        assert!(!rep.satisfied);
        assert!(rep.violated_inequalities.iter().any(|v| v.contains("q >= 1")));
        assert!(rep.violated_inequalities.iter().any(|v| v.contains("Theorem1.(1): q > d/(2α−2)")));
        assert!(rep.violated_inequalities.iter().any(|v| v.contains("Theorem1.(2): q > d/(α−1)")));

        let rep = check_theorem_local(&tup(3, 1.5, 0.9, 0.0, 7.0, 7.0, 7.0)).unwrap();
        assert_eq!(rep.case_path, vec!["Theorem1.(2)"]);
    }

    #[test]
    fn assumption1_examples() {
        let rep = check_assumption1(&tup(2, 1.4, 0.5, 0.0, 6.0, 6.0, 6.0)).unwrap();
        assert_eq!(rep.first_case(), Some("Assumption1.(II)"));
        let rep = check_assumption1(&tup(2, 2.0, 0.9, 0.0, 1.5, 3.0, 3.0)).unwrap();
        assert_eq!(rep.first_case(), Some("Assumption1.(I)"));
        let rep = check_assumption1(&tup(2, 2.0, 0.5, 0.0, 100.0, 2.5, 100.0)).unwrap();
        assert_eq!(rep.case_path, vec!["Assumption1.(III)"]);
    }

    #[test]
    fn theorem3_examples_as_evaluated() {
        // p must lie below qd/(d−(α−1−μ)q) = 2.4 here, so p = 3 fails.
        let rep = check_theorem_local_sobolev(&tup(2, 2.0, 0.5, 0.5, 1.5, 3.0, 3.0)).unwrap();
        assert!(!rep.satisfied);
        assert!(rep
            .violated_inequalities
            .iter()
            .any(|v| v.starts_with("Theorem3.(1): p < qd/(d−(α−1−μ)q) fails (3 vs 2.4")));
        assert!(check_theorem_local_sobolev(&tup(2, 2.0, 0.5, 0.5, 1.5, 2.2, 3.0))
            .unwrap()
            .satisfied);

        let rep = check_theorem_local_sobolev(&tup(2, 2.0, 0.5, 2.0, 5.0, 4.0, 5.0)).unwrap();
        assert!(!rep.satisfied);

        // Upper bound on p is 10/3 < 4.
        let rep = check_theorem_local_sobolev(&tup(2, 2.0, 0.5, 1.2, 5.0, 4.0, 5.0)).unwrap();
        assert!(!rep.satisfied);
        let rep = check_theorem_local_sobolev(&tup(2, 2.0, 0.5, 1.2, 5.0, 3.0, 5.0)).unwrap();
        assert_eq!(rep.case_path, vec!["Theorem3.(4)"]);
    }

    #[test]
    fn assumption2_examples() {
        let rep = check_assumption2(&tup(2, 1.2, 0.5, 0.1, 8.0, 12.0, 12.0)).unwrap();
        assert_eq!(rep.first_case(), Some("Assumption2.I.(i).(1)"));

        let rep = check_assumption2(&tup(2, 1.5, 0.5, 0.0, 8.0, 12.0, 12.0)).unwrap();
        assert!(!rep.satisfied);
        assert!(rep
            .violated_inequalities
            .iter()
            .any(|v| v.starts_with("Assumption2.II.(ii): μ >= α−1 fails")));

        let rep = check_assumption2(&tup(2, 1.3, 0.9, 0.29, 3.0, 25.0, 25.0)).unwrap();
        assert!(rep
            .violated_inequalities
            .iter()
            .any(|v| v.starts_with("Assumption2.I.(iii).(1): q > d/(2α−2−μ) fails")));
        assert!(!rep.case_path.iter().any(|c| c.starts_with("Assumption2.I.")));
    }

    #[test]
    fn infinite_exponents_and_bounds() {
        let t = tup(2, 1.5, 0.5, 0.0, f64::INFINITY, 5.0, f64::INFINITY);
        let rep = check_theorem_local(&t).unwrap();
        assert!(!rep.satisfied, "q < ∞ must fail for q = ∞");
        assert_eq!(frac(1.0, 1.0, 1.0), f64::INFINITY);
        assert_eq!(frac(1.0, 1.0, 2.0), f64::INFINITY);
        assert_eq!(frac(6.0, 3.0, 1.0), 3.0);
    }

    #[test]
    fn equality_tolerance() {
        // q exactly at d/(α−1) up to rounding: closed end holds.
        let alpha = 1.0 + 1.0 / 3.0;
        let q = 2.0 / (alpha - 1.0) * (1.0 + 1e-15);
        let t = tup(2, alpha, 0.5, 0.0, q, 7.0, 7.0);
        let rep = check_theorem_local(&t).unwrap();
        assert_eq!(rep.first_case(), Some("Theorem1.(1)"));
    }

    #[test]
    fn validation() {
        let bad = tup(1, 2.5, 1.0, -1.0, 0.0, f64::NAN, 2.0);
        match check_assumption1(&bad) {
            Err(AdmissibilityError::Invalid(list)) => assert_eq!(list.len(), 6),
            other => panic!("{other:?}"),
        }
        assert_eq!("Theorem3".parse::<Rule>().unwrap(), Rule::Theorem3);
        assert!("theorem2".parse::<Rule>().is_err());
    }

    #[test]
    fn json_shape() {
        let rep = check_theorem_local(&tup(2, 2.0, 0.5, 0.0, 2.0, 3.0, 3.0)).unwrap();
        let j = rep.to_json();
        assert_eq!(j["satisfied"], true);
        assert_eq!(j["rule"], "Theorem1");
        assert_eq!(j["case_path"][0], "Theorem1.(1)");
        assert!(j["violated"].as_array().unwrap().is_empty());
    }
}
