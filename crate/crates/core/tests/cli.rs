use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fkss::grid::{load_snapshot, Snapshot};

fn fkss(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fkss"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

const SMOKE: &str = "grid.n = 16\ntime.steps = 10\noutput.snapshot_every = 5\ninitial.u_amplitude = 0.3\ninitial.v_amplitude = 0.2\ninitial.phi_amplitude = 0.3\n";

#[test]
fn smoke_run_writes_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("run.cfg"), format!("{SMOKE}output.dir = out\noutput.restart = true\n")).unwrap();
    let o = fkss(&["run", "run.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = dir.path().join("out");
    for f in ["diagnostics.csv", "summary.txt", "restart.fksr", "snap_000010_n.fkss", "snap_000005_u.fkss"] {
        assert!(out.join(f).exists(), "missing {f}");
    }
    let csv = fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert_eq!(csv.lines().count(), 12);
    assert!(csv.starts_with("t,mass_n,mass_v,"));
    match load_snapshot(out.join("snap_000005_u.fkss")).unwrap() {
        Snapshot::Vector(v) => assert_eq!(v.components().len(), 2),
        Snapshot::Scalar(_) => panic!("velocity stored as scalar"),
    }
    let summary = fs::read_to_string(out.join("summary.txt")).unwrap();
    assert!(summary.contains("mass_n_relative_drift"));
    assert!(summary.contains("rule: Assumption2"));
}

#[test]
fn identical_configs_give_identical_diagnostics() {
    let dir = tempfile::tempdir().unwrap();
    for name in ["a", "b"] {
        let text = format!("{SMOKE}initial.preset = random-bandlimited\ninitial.seed = 11\noutput.dir = {name}\n");
        fs::write(dir.path().join(format!("{name}.cfg")), text).unwrap();
        assert_eq!(fkss(&["run", &format!("{name}.cfg")], dir.path()).status.code(), Some(0));
    }
    let a = fs::read(dir.path().join("a/diagnostics.csv")).unwrap();
    let b = fs::read(dir.path().join("b/diagnostics.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn resumed_run_ends_where_the_unsplit_run_ends() {
    let dir = tempfile::tempdir().unwrap();
    let base = "grid.n = 16\ninitial.u_amplitude = 0.3\ninitial.v_amplitude = 0.1\n";
    fs::write(dir.path().join("first.cfg"), format!("{base}time.steps = 4\noutput.dir = first\noutput.restart = true\n")).unwrap();
    fs::write(dir.path().join("rest.cfg"), format!("{base}time.steps = 9\noutput.dir = rest\n")).unwrap();
    fs::write(dir.path().join("whole.cfg"), format!("{base}time.steps = 9\noutput.dir = whole\n")).unwrap();
    assert_eq!(fkss(&["run", "first.cfg"], dir.path()).status.code(), Some(0));
    let o = fkss(&["run", "rest.cfg", "--resume", "first/restart.fksr"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(fkss(&["run", "whole.cfg"], dir.path()).status.code(), Some(0));
    let last = |p: &str| fs::read_to_string(dir.path().join(p)).unwrap().lines().last().unwrap().to_string();
    assert_eq!(last("rest/diagnostics.csv"), last("whole/diagnostics.csv"));
}

#[test]
fn zero_threshold_stops_with_the_blowup_code() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.cfg"), "grid.n = 16\nsolver.blowup_threshold = 0\noutput.dir = o\n").unwrap();
    let o = fkss(&["run", "c.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("stopped at step 0"));
    assert!(fs::read_to_string(dir.path().join("o/summary.txt")).unwrap().contains("t_max_estimate"));
}

#[test]
fn unwritable_output_gives_the_io_code() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("blocker"), "").unwrap();
    fs::write(dir.path().join("c.cfg"), "grid.n = 16\ntime.steps = 1\noutput.dir = blocker/out\n").unwrap();
    assert_eq!(fkss(&["run", "c.cfg"], dir.path()).status.code(), Some(4));
    assert_eq!(fkss(&["run", "missing.cfg"], dir.path()).status.code(), Some(4));
}

#[test]
fn bad_configs_give_the_config_code_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("c.cfg"), "params.alpha = 2.5\ngrid.n = 16\ngrid.n = 32\n").unwrap();
    let o = fkss(&["run", "c.cfg"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let e = stderr(&o);
    assert!(e.contains("line 1: params.alpha"), "{e}");
    assert!(e.contains("lines 2 and 3"), "{e}");
}

#[test]
fn print_defaults_round_trips() {
    let dir = tempfile::tempdir().unwrap();
    let o = fkss(&["--print-defaults"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    assert!(text.contains("initial.preset = gaussian-blob"));
    assert!(fkss::cli::parse_config(&text).is_ok());
}

#[test]
fn unknown_suite_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = fkss(&["verify", "everything"], dir.path());
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn specfun_suite_passes() {
    let dir = tempfile::tempdir().unwrap();
    let o = fkss(&["verify", "specfun"], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count() >= 5);
}

#[test]
fn check_exponents_reports_every_rule() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["check-exponents", "--d", "2", "--alpha", "2", "--beta", "0.5", "--mu", "0", "--q", "2", "--p", "3", "--r", "3", "--json"];
    let o = fkss(&args, dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    for rule in ["Theorem1", "Assumption1", "Theorem3", "Assumption2"] {
        assert!(text.contains(&format!("rule: {rule}")));
    }
    assert!(text.contains("case_path: Theorem1.(1)"));
    assert!(text.contains("\"case_path\":[\"Theorem1.(1)\"]"));

    let mut low = args;
    low[10] = "0.5";
    assert_eq!(fkss(&low, dir.path()).status.code(), Some(5));
    let mut bad = args;
    bad[2] = "1";
    assert_eq!(fkss(&bad, dir.path()).status.code(), Some(2));
}

#[test]
fn specfun_table_is_round_trip_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = fkss(&["specfun-table", "--beta", "1", "--gamma", "1", "--zmin", "-3", "--zmax", "0", "--count", "4"], dir.path());
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("beta,gamma,z,value,est_rel_err"));
    for (line, z) in lines.zip([-3.0f64, -2.0, -1.0, 0.0]) {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols[2].parse::<f64>().unwrap(), z);
        assert!((cols[3].parse::<f64>().unwrap() - z.exp()).abs() <= 1e-15);
    }
    let bad = fkss(&["specfun-table", "--beta", "0.5", "--gamma", "1", "--zmin", "0", "--zmax", "1", "--count", "3"], dir.path());
    assert_eq!(bad.status.code(), Some(2));
}
