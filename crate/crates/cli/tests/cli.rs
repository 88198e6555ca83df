use std::f64::consts::PI;
use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use bhdephase_cli::output::{sweep_from_csv, PointRecord, PointStatus, Report, TraceTable};
use bhdephase_cli::run::CompareReport;
use bhdephase_cli::{evaluate, run_scenario, Method, RawConfig, ScenarioConfig};

fn bhdephase(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bhdephase"))
        .args(args)
        .output()
        .unwrap()
}

fn ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn read_report(dir: &Path, tag: &str) -> Report {
    Report::from_json(&fs::read(dir.join(format!("report_{tag}.json"))).unwrap()).unwrap()
}

fn read_trace(dir: &Path, tag: &str) -> TraceTable {
    TraceTable::from_csv(&fs::read(dir.join(format!("trace_{tag}.csv"))).unwrap()).unwrap()
}

fn config_from(dir: &Path, text: &str) -> ScenarioConfig {
    let path = dir.join("scenario.cfg");
    fs::write(&path, text).unwrap();
    ScenarioConfig::resolve(&RawConfig::from_file(&path).unwrap(), None).unwrap()
}

#[test]
fn persisted_files_reload_into_equal_structures() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let cfg = config_from(
        dir.path(),
        &format!(
            "method = ed\nNs = 6\nU = 4\nT = 3\nout = {}\n",
            out.display()
        ),
    );
    let in_memory = run_scenario(&cfg).unwrap();
    assert_eq!(read_trace(&out, "ed_U4"), in_memory.trace);
    assert_eq!(read_report(&out, "ed_U4"), in_memory.report);
    assert!(in_memory.trace.dn1.is_some());
    // the binary reproduces the same numbers up to rounding from its own build profile
    let cli_out = dir.path().join("cli");
    ok(&bhdephase(&[
        "ed",
        "--config",
        dir.path().join("scenario.cfg").to_str().unwrap(),
        "--out",
        cli_out.to_str().unwrap(),
    ]));
    let from_cli = read_trace(&cli_out, "ed_U4");
    for (a, b) in from_cli
        .sqrt_l
        .iter()
        .zip(&evaluate(&cfg).unwrap().trace.sqrt_l)
    {
        assert!((a - b).abs() < 1e-12);
    }
}

#[test]
fn identical_config_gives_identical_bytes() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let args = [
        "mott",
        "--U",
        "20",
        "--kcount",
        "64",
        "--T",
        "2",
        "--out",
        out.to_str().unwrap(),
    ];
    ok(&bhdephase(&args));
    let first: Vec<Vec<u8>> = [
        "trace_mott_U20.csv",
        "report_mott_U20.json",
        "resolved_config.txt",
    ]
    .iter()
    .map(|f| fs::read(out.join(f)).unwrap())
    .collect();
    ok(&bhdephase(&args));
    for (f, bytes) in [
        "trace_mott_U20.csv",
        "report_mott_U20.json",
        "resolved_config.txt",
    ]
    .iter()
    .zip(&first)
    {
        assert_eq!(&fs::read(out.join(f)).unwrap(), bytes, "{f}");
    }
}

#[test]
fn resolved_config_lists_every_default() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    ok(&bhdephase(&[
        "sf",
        "--Ns",
        "32",
        "--out",
        out.to_str().unwrap(),
    ]));
    let text = fs::read_to_string(out.join("resolved_config.txt")).unwrap();
    for key in bhdephase_cli::config::KEYS {
        assert!(
            text.lines().any(|l| l.starts_with(&format!("{key} = "))),
            "missing {key}"
        );
    }
    // the auto horizon is written out as the value actually used
    let report = read_report(&out, "sf_U1");
    assert!(text.contains(&format!("T = {}\n", report.horizon)));
    let tau = report.predictions["recurrence_time"];
    assert!((report.horizon - 0.9 * tau).abs() <= 0.02);
    // and the resolved file is itself a valid config
    let again = ScenarioConfig::resolve(
        &RawConfig::parse_text(&text, Path::new("resolved_config.txt")).unwrap(),
        None,
    )
    .unwrap();
    assert_eq!(again.n_sites, 32);
}

#[test]
fn mott_report_predicts_revival_near_two_pi_over_u() {
    let dir = tempfile::tempdir().unwrap();
    ok(&bhdephase(&[
        "mott",
        "--U",
        "30",
        "--kcount",
        "128",
        "--out",
        dir.path().to_str().unwrap(),
    ]));
    let report = read_report(dir.path(), "mott_U30");
    let target = 2.0 * PI / 30.0;
    assert!((report.predictions["first_revival_time"] / target - 1.0).abs() < 0.05);
    assert!((report.horizon - 20.0 * target).abs() <= 0.02);
    assert!(report.measure > 0.0);
    assert_eq!(report.provenance, "mott-analytic");
    assert_eq!(report.schema_version, 1);
}

#[test]
fn ed_atomic_limit_has_unit_echo() {
    let dir = tempfile::tempdir().unwrap();
    ok(&bhdephase(&[
        "ed",
        "--J",
        "0",
        "--Ns",
        "6",
        "--out",
        dir.path().to_str().unwrap(),
    ]));
    let trace = read_trace(dir.path(), "ed_U5");
    assert!(trace.sqrt_l.iter().all(|&v| (v - 1.0).abs() < 1e-10));
    assert_eq!(read_report(dir.path(), "ed_U5").measure, 0.0);
}

#[test]
fn sf_trace_columns_are_consistent() {
    let dir = tempfile::tempdir().unwrap();
    ok(&bhdephase(&["sf", "--out", dir.path().to_str().unwrap()]));
    let trace = read_trace(dir.path(), "sf_U1");
    assert!(trace.dn1.is_none());
    for (g, v) in trace.big_gamma.iter().zip(&trace.sqrt_l) {
        assert_eq!(g.exp(), *v);
    }
}

#[test]
fn config_errors_exit_2_with_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    fs::write(&cfg, "U = 3\n# fine\nbogus = 1\n").unwrap();
    let out = bhdephase(&["ed", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.cfg:3") && err.contains("bogus"), "{err}");

    fs::write(&cfg, "U = 3\nNs = many\n").unwrap();
    let out = bhdephase(&["ed", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bad.cfg:2"));

    assert_eq!(bhdephase(&["mott", "--dt", "-1"]).status.code(), Some(2));
    assert_eq!(bhdephase(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn guard_violations_exit_3_with_hints() {
    let dir = tempfile::tempdir().unwrap();
    let out = bhdephase(&["mott", "--U", "5", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("8") && err.contains("hint"), "{err}");

    let cfg = dir.path().join("cap.cfg");
    fs::write(&cfg, "dim_cap = 100\n").unwrap();
    let out = bhdephase(&[
        "ed",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(3));

    let out = bhdephase(&["sf", "--J", "0", "--out", dir.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn empty_sweep_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = bhdephase(&[
        "sweep",
        "--method",
        "mott",
        "--out",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("empty sweep"));
}

#[test]
fn sweep_records_failures_and_resumes_by_hash() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("sweep");
    let out = out_dir.to_str().unwrap();
    let args = [
        "sweep",
        "--method",
        "mott",
        "--sweep",
        "10,5,8",
        "--kcount",
        "32",
        "--workers",
        "2",
        "--out",
        out,
    ];
    ok(&bhdephase(&args));
    let rows = sweep_from_csv(&fs::read(out_dir.join("sweep.csv")).unwrap()).unwrap();
    let ratios: Vec<f64> = rows.iter().map(|r| r.ratio).collect();
    assert_eq!(ratios, vec![5.0, 8.0, 10.0]);
    assert_eq!(rows[0].status, PointStatus::Error);
    assert!(rows[0].error.contains("4(nbar+1)"));
    assert!(rows[0].normalized.is_none());
    assert!(rows[1..].iter().all(|r| r.status == PointStatus::Ok));
    assert!(rows.iter().filter_map(|r| r.normalized).any(|x| x == 1.0));
    assert!(out_dir.join("trace_mott_U8.csv").exists());

    // a completed point is not recomputed: tamper with its record and rerun
    let record_path = out_dir
        .join("points")
        .join(format!("{}.json", rows[1].hash));
    let mut rec: PointRecord = serde_json::from_slice(&fs::read(&record_path).unwrap()).unwrap();
    rec.measure = Some(123.0);
    fs::write(&record_path, serde_json::to_vec(&rec).unwrap()).unwrap();
    ok(&bhdephase(&args));
    let again = sweep_from_csv(&fs::read(out_dir.join("sweep.csv")).unwrap()).unwrap();
    assert_eq!(again[1].measure, Some(123.0));
    // the failed point is retried (and fails again)
    assert_eq!(again[0].status, PointStatus::Error);

    // a changed parameter changes the hash
    ok(&bhdephase(&[
        "sweep", "--method", "mott", "--sweep", "8", "--kcount", "48", "--out", out,
    ]));
    let third = sweep_from_csv(&fs::read(out_dir.join("sweep.csv")).unwrap()).unwrap();
    assert_ne!(third[0].hash, rows[1].hash);
}

#[test]
fn worker_count_does_not_change_results() {
    let dir = tempfile::tempdir().unwrap();
    let run = |workers: &str, name: &str| {
        let out = dir.path().join(name);
        ok(&bhdephase(&[
            "sweep",
            "--method",
            "mott",
            "--sweep",
            "8,12,16,30",
            "--kcount",
            "64",
            "--workers",
            workers,
            "--out",
            out.to_str().unwrap(),
        ]));
        sweep_from_csv(&fs::read(out.join("sweep.csv")).unwrap()).unwrap()
    };
    let (a, b) = (run("1", "one"), run("3", "three"));
    for (x, y) in a.iter().zip(&b) {
        assert_eq!(x.measure.map(f64::to_bits), y.measure.map(f64::to_bits));
    }
}

#[test]
fn small_ed_sweep_matches_expected_trends() {
    // U/J = 1 is Markovian before the Bogoliubov recurrence of the same
    // lattice (0.9 tau ~ 4.6 / J at N_s = 8), while U/J = 5 shows the
    // opposite sign of the neighbour density offset
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    ok(&bhdephase(&[
        "sweep", "--method", "ed", "--sweep", "1,5", "--T", "4.6", "--out", out,
    ]));
    let rows = sweep_from_csv(&fs::read(dir.path().join("sweep.csv")).unwrap()).unwrap();
    let (weak, strong) = (&rows[0], &rows[1]);
    assert!(strong.measure.unwrap() >= 0.0);
    assert!(weak.density_offset.unwrap().signum() != strong.density_offset.unwrap().signum());
    assert_eq!(weak.measure, Some(0.0), "N(U/J = 1) = {:?}", weak.measure);
}

fn compare(args: &[&str]) -> CompareReport {
    let dir = tempfile::tempdir().unwrap();
    let mut all = vec!["compare", "--out", dir.path().to_str().unwrap()];
    all.extend_from_slice(args);
    ok(&bhdephase(&all));
    let json = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().path())
        .find(|p| p.extension().is_some_and(|e| e == "json"))
        .unwrap();
    serde_json::from_slice(&fs::read(json).unwrap()).unwrap()
}

#[test]
fn compare_without_impurity_agrees_exactly() {
    let r = compare(&["--Ns", "6", "--U", "0.5", "--Ue", "0", "--T", "2"]);
    assert_eq!(r.analytic.as_deref(), Some("sf"));
    // both sides are identically one; what remains is floating-point rounding
    assert!(r.max_abs_deviation.unwrap() < 1e-12);
    // the relative metric divides by a 1e-6 floor when Gamma vanishes
    assert!(r.tcl_metric.abs() < 1e-8);
    assert!(!r.breakdown);
}

#[test]
fn compare_weak_coupling_initial_decay() {
    let r = compare(&["--Ns", "6", "--U", "0.5", "--T", "5"]);
    assert_eq!(r.analytic.as_deref(), Some("sf"));
    let ratio = r.early_decay_ratio.unwrap();
    assert!((ratio - 1.0).abs() < 0.25, "{ratio}");
}

#[test]
fn compare_strong_coupling_reports_deviation() {
    let r = compare(&["--Ns", "6", "--U", "30", "--T", "5"]);
    assert_eq!(r.analytic.as_deref(), Some("mott"));
    assert!(r.max_abs_deviation.unwrap().is_finite());
    assert!(r.tcl_metric < r.tcl_bound);
}

#[test]
fn compare_in_gap_region_uses_correlator_only() {
    let r = compare(&["--Ns", "6", "--U", "4", "--T", "2"]);
    assert!(r.analytic.is_none());
    assert!(r.max_abs_deviation.is_none());
    assert!(r.tcl_metric.is_finite());
}

#[test]
fn method_key_in_file_drives_sweep() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config_from(dir.path(), "method = sf\nsweep = 0.5, 1\nNs = 24\n");
    assert_eq!(cfg.method, Method::Sf);
    assert_eq!(cfg.sweep, vec![0.5, 1.0]);
}
