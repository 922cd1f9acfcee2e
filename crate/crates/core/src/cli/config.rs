//! Line-oriented `section.key = value` run configuration.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::fmt;
use std::path::PathBuf;

use indexmap::IndexMap;

use crate::admissibility::ExponentTuple;
use crate::grid::{random_bandlimited, FracParams, ScalarField, TorusGrid, VectorField};
use crate::solver::{NormExponents, PicardConfig, SolverConfig, SolverError, SystemState};

/// Every accepted key with its default value and a one-line description.
pub const DEFAULTS: &[(&str, &str, &str)] = &[
    ("grid.d", "2", "spatial dimension (1, 2 or 3)"),
    ("grid.n", "32", "points per axis (even, >= 8)"),
    ("grid.length", "2pi", "box side; a trailing 'pi' multiplies by pi"),
    ("params.alpha", "1.8", "order of the fractional Laplacian, in (1, 2]"),
    ("params.beta", "0.8", "order of the Caputo derivative, in (0, 1]"),
    ("params.gamma", "0.5", "attractant decay rate, >= 0"),
    ("time.dt", "0.01", "step size"),
    ("time.steps", "100", "number of steps"),
    ("solver.dealias", "0.6666666666666666", "fraction of modes kept per axis"),
    ("solver.blowup_threshold", "1e8", "stop once a monitored norm exceeds this"),
    ("picard.enabled", "false", "run the fixed-point iteration over the whole window instead of marching"),
    ("picard.max_iters", "50", "iteration cap"),
    ("picard.tol", "1e-10", "stopping distance between iterates"),
    ("initial.preset", "gaussian-blob", "gaussian-blob, single-mode or random-bandlimited"),
    ("initial.amplitude", "1", "peak value of the density"),
    ("initial.width", "0.5", "gaussian-blob standard deviation"),
    ("initial.center", "mid", "gaussian-blob center, comma separated, or 'mid' for the box center"),
    ("initial.k", "1,0,0", "single-mode wave vector (integers)"),
    ("initial.seed", "0", "random-bandlimited seed"),
    ("initial.kmax", "4", "random-bandlimited maximal wavenumber"),
    ("initial.v_amplitude", "0", "attractant = v_amplitude times the unit-amplitude density shape"),
    ("initial.u_amplitude", "0", "amplitude of the divergence-free shear velocity"),
    ("initial.phi_amplitude", "0", "potential phi = phi_amplitude * cos(2 pi x1 / L)"),
    ("exponents.mu", "0", "Sobolev index for the admissibility report"),
    ("exponents.p", "4", "velocity norm exponent"),
    ("exponents.q", "2", "density norm exponent"),
    ("exponents.r", "4", "attractant gradient norm exponent"),
    ("diagnostics.every", "1", "record diagnostics every this many steps"),
    ("diagnostics.sobolev_mu", "0.5", "Sobolev orders of the extra norm columns, or 'none'"),
    ("output.dir", "out", "output directory"),
    ("output.snapshot_every", "0", "write field snapshots every this many steps (0 = never)"),
    ("output.restart", "false", "write a restart file at the end of the run"),
];

/// Renders [`DEFAULTS`] as a valid configuration document.
pub fn defaults_text() -> String {
    let mut out = String::new();
    for (key, value, help) in DEFAULTS {
        out.push_str(&format!("{key} = {value}  # {help}\n"));
    }
    out
}

/// A configuration problem, tied to a line when it stems from one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError {
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(l) => write!(f, "line {l}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialPreset {
    GaussianBlob { amplitude: f64, width: f64, center: Option<Vec<f64>> },
    SingleMode { k: Vec<i64>, amplitude: f64 },
    RandomBandlimited { seed: u64, kmax: usize, amplitude: f64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct InitialSpec {
    pub preset: InitialPreset,
    pub v_amplitude: f64,
    pub u_amplitude: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub solver: SolverConfig,
    pub initial: InitialSpec,
    pub phi_amplitude: f64,
    /// `(d, α, β, μ, p, q, r)` for the admissibility report.
    pub exponents: ExponentTuple,
    pub output_dir: PathBuf,
    pub write_restart: bool,
}

fn periodic_offset(x: f64, c: f64, l: f64) -> f64 {
    let mut dx = (x - c) % l;
    if dx > 0.5 * l {
        dx -= l;
    } else if dx < -0.5 * l {
        dx += l;
    }
    dx
}

impl InitialPreset {
    /// The density shape scaled to `amplitude`.
    pub fn field(&self, grid: TorusGrid, amplitude: f64) -> Result<ScalarField, SolverError> {
        let l = grid.length();
        let d = grid.d();
        Ok(match self {
            InitialPreset::GaussianBlob { width, center, .. } => {
                let c = center.clone().unwrap_or_else(|| vec![0.5 * l; d]);
                ScalarField::from_fn(grid, |x| {
                    let r2: f64 = (0..d).map(|j| periodic_offset(x[j], c[j], l).powi(2)).sum();
                    amplitude * (-r2 / (2.0 * width * width)).exp()
                })
            }
            InitialPreset::SingleMode { k, .. } => ScalarField::from_fn(grid, |x| {
                let phase: f64 = (0..d).map(|j| k[j] as f64 * x[j]).sum();
                amplitude * (2.0 * PI * phase / l).cos()
            }),
            InitialPreset::RandomBandlimited { seed, kmax, .. } => {
                random_bandlimited(grid, *seed, *kmax, amplitude)?
            }
        })
    }

    pub fn amplitude(&self) -> f64 {
        match self {
            InitialPreset::GaussianBlob { amplitude, .. }
            | InitialPreset::SingleMode { amplitude, .. }
            | InitialPreset::RandomBandlimited { amplitude, .. } => *amplitude,
        }
    }
}

/// Divergence-free velocity of unit amplitude built from single sine modes.
fn shear_velocity(grid: TorusGrid, amp: f64) -> Result<VectorField, SolverError> {
    let w = 2.0 * PI / grid.length();
    let comps = match grid.d() {
        1 => vec![ScalarField::constant(grid, amp)],
        2 => vec![
            ScalarField::from_fn(grid, |x| amp * (w * x[1]).sin()),
            ScalarField::from_fn(grid, |x| amp * (w * x[0]).sin()),
        ],
        _ => vec![
            ScalarField::from_fn(grid, |x| amp * (w * x[1]).sin()),
            ScalarField::from_fn(grid, |x| amp * (w * x[2]).sin()),
            ScalarField::from_fn(grid, |x| amp * (w * x[0]).sin()),
        ],
    };
    Ok(VectorField::new(comps)?)
}

impl RunConfig {
    /// Builds `(n₀, v₀, u₀)`; identical configurations give identical data.
    pub fn initial_state(&self) -> Result<SystemState, SolverError> {
        let grid = self.solver.grid;
        let p = &self.initial.preset;
        let n = p.field(grid, p.amplitude())?;
        let v = p.field(grid, 1.0)?.scaled(self.initial.v_amplitude);
        let u = shear_velocity(grid, self.initial.u_amplitude)?;
        SystemState::new(n, v, u)
    }
}

fn parse_real(s: &str) -> Result<f64, String> {
    let s = s.trim();
    let lower = s.to_ascii_lowercase();
    if let Some(head) = lower.strip_suffix("pi") {
        let head = head.trim().trim_end_matches('*').trim();
        let m = if head.is_empty() { 1.0 } else { head.parse::<f64>().map_err(|_| format!("not a number: '{s}'"))? };
        return Ok(m * PI);
    }
    s.parse::<f64>().map_err(|_| format!("not a number: '{s}'"))
}

fn parse_list<T>(s: &str, each: impl Fn(&str) -> Result<T, String>) -> Result<Vec<T>, String> {
    s.split(',').map(|x| each(x.trim())).collect()
}

fn parse_bool(s: &str) -> Result<bool, String> {
    match s {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(format!("expected true or false, got '{s}'")),
    }
}

fn parse_usize(s: &str) -> Result<usize, String> {
    s.parse().map_err(|_| format!("expected a nonnegative integer, got '{s}'"))
}

/// Splits a line into `(key, value)`; `Ok(None)` for blank and comment lines.
fn split_line(raw: &str) -> Result<Option<(&str, &str)>, String> {
    let line = raw.trim();
    if line.is_empty() || line.starts_with('#') {
        return Ok(None);
    }
    let Some((key, rest)) = line.split_once('=') else {
        return Err(format!("expected 'section.key = value', got '{line}'"));
    };
    let key = key.trim();
    let valid_key = key.split_once('.').is_some_and(|(a, b)| {
        let ok = |s: &str| !s.is_empty() && s.chars().all(|c| c.is_ascii_lowercase() || c == '_');
        ok(a) && ok(b)
    });
    if !valid_key {
        return Err(format!("malformed key '{key}'"));
    }
    let value = match rest.find('#') {
        Some(i) => &rest[..i],
        None => rest,
    }
    .trim();
    if value.is_empty() {
        return Err(format!("missing value for '{key}'"));
    }
    Ok(Some((key, value)))
}

struct Values<'a> {
    explicit: IndexMap<&'a str, (&'a str, usize)>,
    errors: Vec<ConfigError>,
}

impl<'a> Values<'a> {
    fn raw(&self, key: &str) -> (&str, Option<usize>) {
        match self.explicit.get(key) {
            Some((v, line)) => (v, Some(*line)),
            None => {
                let v = DEFAULTS.iter().find(|(k, _, _)| *k == key).expect("known key").1;
                (v, None)
            }
        }
    }

    fn line(&self, key: &str) -> Option<usize> {
        self.explicit.get(key).map(|(_, l)| *l)
    }

    fn fail(&mut self, key: &str, msg: impl Into<String>) {
        let line = self.line(key);
        self.errors.push(ConfigError {
            line,
            message: format!("{key}: {}", msg.into()),
        });
    }

    fn get<T: Default>(&mut self, key: &str, parse: impl Fn(&str) -> Result<T, String>) -> T {
        let (v, _) = self.raw(key);
        match parse(v) {
            Ok(x) => x,
            Err(e) => {
                self.fail(key, e);
                T::default()
            }
        }
    }

    fn real(&mut self, key: &str) -> f64 {
        self.get(key, parse_real)
    }

    fn check(&mut self, key: &str, ok: bool, msg: impl FnOnce() -> String) {
        if !ok {
            self.fail(key, msg());
        }
    }
}

/// Parses and validates a configuration; on failure returns every problem found.
pub fn parse_config(text: &str) -> Result<RunConfig, Vec<ConfigError>> {
    let mut vals = Values {
        explicit: IndexMap::new(),
        errors: Vec::new(),
    };
    let known: HashMap<&str, ()> = DEFAULTS.iter().map(|(k, _, _)| (*k, ())).collect();
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        match split_line(raw) {
            Ok(None) => {}
            Ok(Some((key, value))) => {
                if !known.contains_key(key) {
                    vals.errors.push(ConfigError {
                        line: Some(line),
                        message: format!("unknown key '{key}'"),
                    });
                } else if let Some((_, first)) = vals.explicit.get(key) {
                    vals.errors.push(ConfigError {
                        line: Some(line),
                        message: format!("duplicate key '{key}' (lines {first} and {line})"),
                    });
                } else {
                    vals.explicit.insert(key, (value, line));
                }
            }
            Err(message) => vals.errors.push(ConfigError {
                line: Some(line),
                message,
            }),
        }
    }

    let d = vals.get("grid.d", parse_usize);
    let n = vals.get("grid.n", parse_usize);
    let length = vals.real("grid.length");
    vals.check("grid.d", (1..=3).contains(&d), || format!("dimension must be 1, 2 or 3, got {d}"));
    vals.check("grid.n", n >= 8 && n % 2 == 0, || format!("points per axis must be even and at least 8, got {n}"));
    vals.check("grid.length", length > 0.0 && length.is_finite(), || format!("box length must be positive, got {length}"));

    let alpha = vals.real("params.alpha");
    let beta = vals.real("params.beta");
    let gamma = vals.real("params.gamma");
    vals.check("params.alpha", alpha > 1.0 && alpha <= 2.0, || format!("alpha {alpha} out of (1, 2]"));
    vals.check("params.beta", beta > 0.0 && beta <= 1.0, || format!("beta {beta} out of (0, 1]"));
    vals.check("params.gamma", gamma >= 0.0 && gamma.is_finite(), || format!("gamma must be finite and nonnegative, got {gamma}"));

    let dt = vals.real("time.dt");
    let steps = vals.get("time.steps", parse_usize);
    vals.check("time.dt", dt > 0.0 && dt.is_finite(), || format!("dt must be positive, got {dt}"));

    let dealias = vals.real("solver.dealias");
    let threshold = vals.real("solver.blowup_threshold");
    vals.check("solver.dealias", dealias > 0.0 && dealias <= 1.0, || format!("dealias must lie in (0, 1], got {dealias}"));
    vals.check("solver.blowup_threshold", threshold >= 0.0, || format!("threshold must be nonnegative, got {threshold}"));

    let picard = PicardConfig {
        enabled: vals.get("picard.enabled", parse_bool),
        max_iters: vals.get("picard.max_iters", parse_usize),
        tol: vals.real("picard.tol"),
    };
    vals.check("picard.max_iters", picard.max_iters > 0, || "must be at least 1".into());
    vals.check("picard.tol", picard.tol > 0.0, || format!("must be positive, got {}", picard.tol));

    let preset_name = vals.raw("initial.preset").0.to_string();
    let amplitude = vals.real("initial.amplitude");
    vals.check("initial.amplitude", amplitude.is_finite(), || "must be finite".into());
    let dim_ok = (1..=3).contains(&d);
    let preset = match preset_name.as_str() {
        "gaussian-blob" => {
            let width = vals.real("initial.width");
            vals.check("initial.width", width > 0.0 && width.is_finite(), || format!("width must be positive, got {width}"));
            let center = match vals.raw("initial.center").0 {
                "mid" => None,
                _ => {
                    let c = vals.get("initial.center", |s| parse_list(s, parse_real));
                    vals.check("initial.center", !dim_ok || c.len() == d, || format!("expected {d} coordinates, got {}", c.len()));
                    Some(c)
                }
            };
            InitialPreset::GaussianBlob { amplitude, width, center }
        }
        "single-mode" => {
            let k = vals.get("initial.k", |s| {
                parse_list(s, |x| x.parse::<i64>().map_err(|_| format!("not an integer: '{x}'")))
            });
            vals.check("initial.k", !dim_ok || k.len() >= d, || format!("expected at least {d} components, got {}", k.len()));
            InitialPreset::SingleMode { k, amplitude }
        }
        "random-bandlimited" => {
            let seed = vals.get("initial.seed", |s| s.parse::<u64>().map_err(|_| format!("not a seed: '{s}'")));
            let kmax = vals.get("initial.kmax", parse_usize);
            vals.check("initial.kmax", kmax >= 1 && kmax < n / 2, || format!("kmax must lie in [1, N/2), got {kmax}"));
            InitialPreset::RandomBandlimited { seed, kmax, amplitude }
        }
        other => {
            vals.fail("initial.preset", format!("unknown preset '{other}'"));
            InitialPreset::GaussianBlob { amplitude, width: 1.0, center: None }
        }
    };
    let v_amplitude = vals.real("initial.v_amplitude");
    let u_amplitude = vals.real("initial.u_amplitude");
    let phi_amplitude = vals.real("initial.phi_amplitude");
    for (key, v) in [
        ("initial.v_amplitude", v_amplitude),
        ("initial.u_amplitude", u_amplitude),
        ("initial.phi_amplitude", phi_amplitude),
    ] {
        vals.check(key, v.is_finite(), || "must be finite".into());
    }

    let mu = vals.real("exponents.mu");
    let p = vals.real("exponents.p");
    let q = vals.real("exponents.q");
    let r = vals.real("exponents.r");
    vals.check("exponents.mu", mu >= 0.0 && mu.is_finite(), || format!("mu must be finite and nonnegative, got {mu}"));
    for (key, e) in [("exponents.p", p), ("exponents.q", q), ("exponents.r", r)] {
        vals.check(key, e >= 1.0, || format!("norm exponent must be at least 1, got {e}"));
    }

    let diag_every = vals.get("diagnostics.every", parse_usize);
    vals.check("diagnostics.every", diag_every >= 1, || "must be at least 1".into());
    let sobolev_mu = match vals.raw("diagnostics.sobolev_mu").0 {
        "none" => Vec::new(),
        _ => vals.get("diagnostics.sobolev_mu", |s| parse_list(s, parse_real)),
    };
    vals.check("diagnostics.sobolev_mu", sobolev_mu.iter().all(|m| *m >= 0.0 && m.is_finite()), || {
        "orders must be finite and nonnegative".into()
    });

    let output_dir = PathBuf::from(vals.raw("output.dir").0);
    let snapshot_every = vals.get("output.snapshot_every", parse_usize);
    let write_restart = vals.get("output.restart", parse_bool);

    if !vals.errors.is_empty() {
        vals.errors.sort_by_key(|e| e.line);
        return Err(vals.errors);
    }

    let grid = TorusGrid::new(d, n, length).map_err(|e| vec![ConfigError { line: None, message: e.to_string() }])?;
    let params = FracParams::new(alpha, beta, gamma).map_err(|e| vec![ConfigError { line: None, message: e.to_string() }])?;
    let mut solver = SolverConfig::new(grid, params, dt, steps);
    solver.dealias = dealias;
    solver.blowup_threshold = threshold;
    solver.picard = picard;
    solver.exponents = NormExponents { q, r, p };
    solver.sobolev_mu = sobolev_mu;
    solver.diag_every = diag_every;
    solver.snapshot_every = snapshot_every;
    let w = 2.0 * PI / length;
    solver.phi = ScalarField::from_fn(grid, |x| phi_amplitude * (w * x[0]).cos());
    solver.validate().map_err(|e| vec![ConfigError { line: None, message: e.to_string() }])?;

    let cfg = RunConfig {
        solver,
        initial: InitialSpec {
            preset,
            v_amplitude,
            u_amplitude,
        },
        phi_amplitude,
        exponents: ExponentTuple {
            d: d as u32,
            alpha,
            beta,
            mu,
            p,
            q,
            r,
        },
        output_dir,
        write_restart,
    };
    cfg.initial_state()
        .map_err(|e| vec![ConfigError { line: None, message: format!("initial data: {e}") }])?;
    Ok(cfg)
}
