//! Command-line front end: batch runs, verification suites, exponent checks
//! and Mittag-Leffler tabulation.

pub mod config;
pub mod verify;

use std::ffi::OsString;
use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::admissibility::{check, ExponentTuple, Rule};
use crate::grid::{save_snapshot, Snapshot};
use crate::solver::{
    continue_run, load_restart, picard_solve, save_restart, verify_v_mass, RunOutput, Solver, SolverError,
};
use crate::specfun::{mittag_leffler_eval, EvalPolicy, MLOrder};

pub use config::{defaults_text, parse_config, ConfigError, InitialPreset, RunConfig};
pub use verify::{run_suite, Check, Suite};

pub const EXIT_OK: i32 = 0;
/// Internal numerical failure that is neither a blow-up nor I/O.
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_BLOWUP: i32 = 3;
pub const EXIT_IO: i32 = 4;
pub const EXIT_VERIFY: i32 = 5;

#[derive(Debug, Parser)]
#[command(name = "fkss", version, about = "Fractional Keller-Segel-Navier-Stokes laboratory")]
pub struct Cli {
    /// Print every configuration key with its default value and exit.
    #[arg(long)]
    pub print_defaults: bool,
    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run the solver on a configuration file.
    Run {
        config: PathBuf,
        /// Continue from a restart file written by an earlier run.
        #[arg(long)]
        resume: Option<PathBuf>,
    },
    /// Run a property suite and report PASS/FAIL per check.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
    /// Report which existence conditions an exponent tuple satisfies.
    CheckExponents {
        #[arg(long)]
        d: u32,
        #[arg(long, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, allow_negative_numbers = true)]
        beta: f64,
        #[arg(long, allow_negative_numbers = true)]
        mu: f64,
        #[arg(long, allow_negative_numbers = true)]
        p: f64,
        #[arg(long, allow_negative_numbers = true)]
        q: f64,
        #[arg(long, allow_negative_numbers = true)]
        r: f64,
        /// Rule set that decides the exit status.
        #[arg(long, default_value = "theorem1")]
        rule: String,
        /// Also print each report as a JSON object.
        #[arg(long)]
        json: bool,
    },
    /// Tabulate E_{β,γ}(z) on a uniform grid of nonpositive z as CSV.
    SpecfunTable {
        #[arg(long)]
        beta: f64,
        #[arg(long)]
        gamma: f64,
        #[arg(long, allow_negative_numbers = true)]
        zmin: f64,
        #[arg(long, allow_negative_numbers = true)]
        zmax: f64,
        #[arg(long)]
        count: usize,
    },
}

/// Parses `args` (including the program name) and executes; returns the exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let rendered = e.render().to_string();
            if e.use_stderr() {
                let _ = write!(err, "{rendered}");
            } else {
                let _ = write!(out, "{rendered}");
            }
            return code;
        }
    };
    execute(cli, out, err)
}

pub fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if cli.print_defaults {
        let _ = write!(out, "{}", defaults_text());
        return EXIT_OK;
    }
    let Some(command) = cli.command else {
        let _ = writeln!(err, "error: a subcommand or --print-defaults is required (see --help)");
        return EXIT_CONFIG;
    };
    match command {
        Command::Run { config, resume } => cmd_run(&config, resume.as_deref(), out, err),
        Command::Verify { suite } => cmd_verify(suite, out),
        Command::CheckExponents { d, alpha, beta, mu, p, q, r, rule, json } => {
            let t = ExponentTuple { d, alpha, beta, mu, p, q, r };
            cmd_check_exponents(&t, &rule, json, out, err)
        }
        Command::SpecfunTable { beta, gamma, zmin, zmax, count } => {
            cmd_specfun_table(beta, gamma, zmin, zmax, count, out, err)
        }
    }
}

/// Prints the report of every rule set; exit 0 iff `rule` is satisfied.
pub fn cmd_check_exponents(t: &ExponentTuple, rule: &str, json: bool, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let wanted: Rule = match rule.parse() {
        Ok(r) => r,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let mut verdict = false;
    for r in Rule::ALL {
        match check(r, t) {
            Ok(rep) => {
                let _ = write!(out, "{}", rep.to_text());
                if json {
                    let _ = writeln!(out, "json: {}", rep.to_json());
                }
                let _ = writeln!(out);
                if r == wanted {
                    verdict = rep.satisfied;
                }
            }
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_CONFIG;
            }
        }
    }
    if verdict {
        EXIT_OK
    } else {
        EXIT_VERIFY
    }
}

pub fn cmd_specfun_table(
    beta: f64,
    gamma: f64,
    zmin: f64,
    zmax: f64,
    count: usize,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32 {
    let order = match MLOrder::new(beta, gamma) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    if !(zmin <= zmax && zmax <= 0.0 && zmin.is_finite()) || count == 0 || (count == 1 && zmin != zmax) {
        let _ = writeln!(
            err,
            "error: need zmin <= zmax <= 0 and count >= 1 (count = 1 only when zmin = zmax)"
        );
        return EXIT_CONFIG;
    }
    let policy = EvalPolicy::default();
    let _ = writeln!(out, "beta,gamma,z,value,est_rel_err");
    for i in 0..count {
        let z = if count == 1 {
            zmin
        } else {
            zmin + (zmax - zmin) * i as f64 / (count - 1) as f64
        };
        match mittag_leffler_eval(order, z, &policy) {
            Ok(e) => {
                if writeln!(out, "{beta:?},{gamma:?},{z:?},{:?},{:?}", e.value, e.est_rel_err).is_err() {
                    return EXIT_IO;
                }
            }
            Err(e) => {
                let _ = writeln!(err, "error at z = {z}: {e}");
                return EXIT_FAILURE;
            }
        }
    }
    EXIT_OK
}

pub fn cmd_verify(suite: Suite, out: &mut dyn Write) -> i32 {
    let checks = run_suite(suite);
    let mut all = true;
    for c in &checks {
        let _ = writeln!(out, "{c}");
        all &= c.passed;
    }
    let failed = checks.iter().filter(|c| !c.passed).count();
    let _ = writeln!(out, "{} checks, {failed} failed", checks.len());
    if all {
        EXIT_OK
    } else {
        EXIT_VERIFY
    }
}

fn solver_exit(e: &SolverError) -> i32 {
    match e {
        SolverError::Io(_) | SolverError::Grid(crate::grid::GridError::Io(_)) => EXIT_IO,
        SolverError::Config(_) | SolverError::Format(_) => EXIT_CONFIG,
        SolverError::Blowup { .. } => EXIT_BLOWUP,
        _ => EXIT_FAILURE,
    }
}

pub fn cmd_run(config: &Path, resume: Option<&Path>, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let text = match fs::read_to_string(config) {
        Ok(t) => t,
        Err(e) => {
            let _ = writeln!(err, "error: cannot read {}: {e}", config.display());
            return EXIT_IO;
        }
    };
    let cfg = match parse_config(&text) {
        Ok(c) => c,
        Err(errors) => {
            for e in errors {
                let _ = writeln!(err, "{}: {e}", config.display());
            }
            return EXIT_CONFIG;
        }
    };
    let admissibility = admissibility_text(&cfg.exponents);
    if !admissibility.1 {
        let _ = writeln!(
            err,
            "warning: exponents satisfy neither the local nor the global Lebesgue conditions; running anyway"
        );
    }
    if let Err(e) = fs::create_dir_all(&cfg.output_dir) {
        let _ = writeln!(err, "error: cannot create {}: {e}", cfg.output_dir.display());
        return EXIT_IO;
    }
    if cfg.solver.picard.enabled {
        return run_picard(&cfg, &admissibility.0, out, err);
    }
    let solver = match resume {
        Some(path) => load_restart(path).and_then(|data| Solver::resume(cfg.solver.clone(), data)),
        None => cfg.initial_state().and_then(|s| Solver::new(cfg.solver.clone(), s)),
    };
    let result = solver.and_then(continue_run);
    let output = match result {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return solver_exit(&e);
        }
    };
    if let Err(e) = write_outputs(&cfg, &output, &admissibility.0) {
        let _ = writeln!(err, "error: writing outputs: {e}");
        return EXIT_IO;
    }
    let _ = writeln!(
        out,
        "completed {} steps to t = {}; outputs in {}",
        output.solver.steps_done(),
        output.solver.time(),
        cfg.output_dir.display()
    );
    match &output.blowup {
        Some(b) => {
            let _ = writeln!(
                err,
                "stopped at step {} (t = {}): {}; estimated T_max = {}",
                b.step, b.t_stop, b.reason, b.t_max_estimate
            );
            EXIT_BLOWUP
        }
        None => EXIT_OK,
    }
}

/// All four reports as text, and whether a Lebesgue-space rule holds.
fn admissibility_text(t: &ExponentTuple) -> (String, bool) {
    let mut s = String::new();
    let mut lebesgue_ok = false;
    for r in Rule::ALL {
        match check(r, t) {
            Ok(rep) => {
                if matches!(r, Rule::Theorem1 | Rule::Assumption1) && rep.satisfied {
                    lebesgue_ok = true;
                }
                s.push_str(&rep.to_text());
            }
            Err(e) => {
                s.push_str(&format!("rule: {r}\nnot applicable: {e}\n"));
                lebesgue_ok = true;
            }
        }
    }
    (s, lebesgue_ok)
}

fn write_outputs(cfg: &RunConfig, output: &RunOutput, admissibility: &str) -> Result<(), SolverError> {
    let dir = &cfg.output_dir;
    output
        .diagnostics
        .write_csv(BufWriter::new(fs::File::create(dir.join("diagnostics.csv"))?))?;
    for (k, state) in &output.snapshots {
        save_snapshot(dir.join(format!("snap_{k:06}_n.fkss")), &Snapshot::Scalar(state.n.clone()))?;
        save_snapshot(dir.join(format!("snap_{k:06}_v.fkss")), &Snapshot::Scalar(state.v.clone()))?;
        save_snapshot(dir.join(format!("snap_{k:06}_u.fkss")), &Snapshot::Vector(state.u.clone()))?;
    }
    if cfg.write_restart {
        save_restart(dir.join("restart.fksr"), &output.solver)?;
    }
    let mut f = BufWriter::new(fs::File::create(dir.join("summary.txt"))?);
    write_summary(&mut f, cfg, output, admissibility)?;
    f.flush()?;
    Ok(())
}

fn write_summary(w: &mut dyn Write, cfg: &RunConfig, output: &RunOutput, admissibility: &str) -> Result<(), SolverError> {
    let diag = &output.diagnostics;
    let init = output.solver.initial();
    let p = cfg.solver.params;
    writeln!(w, "steps: {}", output.solver.steps_done())?;
    writeln!(w, "final_time: {:?}", output.solver.time())?;
    if let Some(last) = diag.records.last() {
        let e = cfg.solver.exponents;
        writeln!(w, "final_norm_n_L{:?}: {:?}", e.q, last.norm_n_q)?;
        writeln!(w, "final_norm_gradv_L{:?}: {:?}", e.r, last.norm_gradv_r)?;
        writeln!(w, "final_norm_u_L{:?}: {:?}", e.p, last.norm_u_p)?;
        writeln!(w, "final_mass_n: {:?}", last.mass_n)?;
        writeln!(w, "final_mass_v: {:?}", last.mass_v)?;
    }
    writeln!(w, "mass_n_relative_drift: {:?}", diag.mass_n_drift())?;
    writeln!(w, "max_divergence_residual: {:?}", diag.max_div_residual())?;
    match verify_v_mass(diag, init.n.integral(), init.v.integral(), &p, &cfg.solver.policy) {
        Ok(c) => {
            writeln!(w, "mass_v_closed_form_max_abs_err: {:?}", c.max_abs_err)?;
            if let Some(a) = c.alt_formula_max_abs_err {
                writeln!(w, "mass_v_gamma_prefactor_variant_max_abs_err: {a:?}")?;
            }
        }
        Err(e) => writeln!(w, "mass_v_closed_form: unavailable ({e})")?,
    }
    match &output.blowup {
        Some(b) => {
            writeln!(w, "blowup_stop_step: {}", b.step)?;
            writeln!(w, "blowup_stop_time: {:?}", b.t_stop)?;
            writeln!(w, "blowup_reason: {}", b.reason)?;
            writeln!(w, "t_max_estimate: {:?}", b.t_max_estimate)?;
            writeln!(w, "last_norms: t, n, grad v, u")?;
            for row in &b.table {
                writeln!(w, "  {:?}, {:?}, {:?}, {:?}", row[0], row[1], row[2], row[3])?;
            }
        }
        None => writeln!(w, "blowup: none")?,
    }
    writeln!(w, "\n[admissibility]")?;
    write!(w, "{admissibility}")?;
    Ok(())
}

fn run_picard(cfg: &RunConfig, admissibility: &str, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let s0 = match cfg.initial_state() {
        Ok(s) => s,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return solver_exit(&e);
        }
    };
    let outcome = match picard_solve(&s0, cfg.solver.final_time(), cfg.solver.n_steps, &cfg.solver) {
        Ok(o) => o,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return solver_exit(&e);
        }
    };
    let write = || -> io::Result<()> {
        let mut f = BufWriter::new(fs::File::create(cfg.output_dir.join("picard.csv"))?);
        writeln!(f, "iteration,distance,ratio")?;
        for (m, d) in outcome.distances.iter().enumerate() {
            let ratio = if m == 0 { f64::NAN } else { outcome.ratios[m - 1] };
            writeln!(f, "{m},{d:?},{ratio:?}")?;
        }
        f.flush()?;
        let mut s = BufWriter::new(fs::File::create(cfg.output_dir.join("summary.txt"))?);
        writeln!(s, "picard_iterations: {}", outcome.iterations)?;
        writeln!(s, "picard_converged: {}", outcome.converged)?;
        if let Some(fail) = &outcome.failure {
            writeln!(s, "contraction_failure_iteration: {}", fail.iteration)?;
            writeln!(s, "contraction_failure_reason: {}", fail.reason)?;
        }
        writeln!(s, "\n[admissibility]")?;
        write!(s, "{admissibility}")?;
        s.flush()
    };
    if let Err(e) = write() {
        let _ = writeln!(err, "error: writing outputs: {e}");
        return EXIT_IO;
    }
    let _ = writeln!(
        out,
        "picard: {} iterations, converged = {}",
        outcome.iterations, outcome.converged
    );
    match outcome.failure {
        Some(f) => {
            let _ = writeln!(err, "contraction failure at iteration {}: {}", f.iteration, f.reason);
            EXIT_BLOWUP
        }
        None if outcome.converged => EXIT_OK,
        None => {
            let _ = writeln!(err, "picard iteration hit max_iters without converging");
            EXIT_FAILURE
        }
    }
}
