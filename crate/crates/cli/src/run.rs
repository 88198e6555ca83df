//! Scenario, sweep and comparison pipelines.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use bhdephase::bogoliubov::{recurrence_time, sf_modes, sf_trace, sound_velocity};
use bhdephase::ed::{EdOptions, EdSystem};
use bhdephase::mott::{dh_model, mott_trace, MomentumGrid};
use bhdephase::nm::{average_density_offset, blp_measure, normalize_sweep, SweepPoint};
use bhdephase::{DephasingTrace, Provenance, TimeGrid};

use crate::config::{Horizon, Method, Momentum, ScenarioConfig};
use crate::error::CliError;
use crate::output::{
    fmt_f64, sweep_to_csv, write_atomic, IntervalRecord, PointRecord, PointStatus, Report,
    SweepRow, TraceTable, CODE_VERSION, SCHEMA_VERSION,
};

/// Result of one scenario before it is written.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    pub report: Report,
    pub trace: TraceTable,
}

fn grid_for(cfg: &ScenarioConfig, default_horizon: f64) -> Result<TimeGrid, CliError> {
    let horizon = match cfg.horizon {
        Horizon::Auto => default_horizon,
        Horizon::Fixed(t) => t,
    };
    Ok(TimeGrid::with_horizon(cfg.dt, horizon)?)
}

fn momentum_grid(cfg: &ScenarioConfig) -> MomentumGrid {
    match cfg.momentum {
        Momentum::Thermodynamic => MomentumGrid::Thermodynamic(cfg.k_count),
        Momentum::Lattice => MomentumGrid::Lattice(cfg.n_sites),
    }
}

fn ed_options(cfg: &ScenarioConfig) -> EdOptions {
    EdOptions {
        dim_cap: cfg.dim_cap,
        ..EdOptions::default()
    }
}

/// `-d Gamma / dt` by second-order finite differences.
fn rate_from_log_echo(big_gamma: &[f64], dt: f64) -> Vec<f64> {
    let n = big_gamma.len();
    if n < 3 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let d = if i == 0 {
                (-3.0 * big_gamma[0] + 4.0 * big_gamma[1] - big_gamma[2]) / (2.0 * dt)
            } else if i == n - 1 {
                (3.0 * big_gamma[n - 1] - 4.0 * big_gamma[n - 2] + big_gamma[n - 3]) / (2.0 * dt)
            } else {
                (big_gamma[i + 1] - big_gamma[i - 1]) / (2.0 * dt)
            };
            -d
        })
        .collect()
}

fn report_for(
    cfg: &ScenarioConfig,
    trace: &DephasingTrace,
    predictions: BTreeMap<String, f64>,
    density_offset: Option<f64>,
) -> Result<(Report, Vec<f64>), CliError> {
    let nm = blp_measure(&trace.echo(), cfg.tolerance)?;
    let mut resolved = cfg.clone();
    resolved.horizon = Horizon::Fixed(nm.horizon);
    let report = Report {
        schema_version: SCHEMA_VERSION,
        code_version: CODE_VERSION.to_string(),
        tag: cfg.tag(),
        method: cfg.method.to_string(),
        provenance: trace.provenance.to_string(),
        measure: nm.measure,
        horizon: nm.horizon,
        tolerance: nm.tolerance,
        intervals: nm
            .intervals
            .iter()
            .map(|i| IntervalRecord {
                start: i.start,
                end: i.end,
                gain: i.gain,
            })
            .collect(),
        echo_exceeds_one: trace.sqrt_echo.iter().any(|&v| v > 1.0 + 1e-12),
        predictions,
        density_offset,
        config: resolved.to_map(),
    };
    let clipped = trace.sqrt_echo.iter().map(|v| v.min(1.0)).collect();
    Ok((report, clipped))
}

/// Runs one scenario in memory.
pub fn evaluate(cfg: &ScenarioConfig) -> Result<Evaluation, CliError> {
    let params = cfg.params();
    let mut predictions = BTreeMap::new();
    if cfg.interaction > 0.0 {
        predictions.insert("two_pi_over_U".to_string(), 2.0 * PI / cfg.interaction);
    }
    match cfg.method {
        Method::Sf => {
            let modes = sf_modes(&params)?;
            let tau = recurrence_time(&modes);
            predictions.insert("recurrence_time".into(), tau);
            predictions.insert(
                "Ns_over_cs".into(),
                cfg.n_sites as f64 / sound_velocity(&params),
            );
            let grid = grid_for(cfg, 0.9 * tau)?;
            let trace = sf_trace(&modes, cfg.impurity_coupling, &grid);
            let (report, sqrt_l) = report_for(cfg, &trace, predictions, None)?;
            Ok(Evaluation {
                report,
                trace: TraceTable {
                    t: trace.times,
                    gamma: trace.gamma,
                    big_gamma: trace.big_gamma,
                    sqrt_l,
                    dn1: None,
                },
            })
        }
        Method::Mott => {
            let model = dh_model(&params, momentum_grid(cfg))?;
            predictions.insert("first_revival_time".into(), model.first_revival_time());
            let grid = grid_for(cfg, 20.0 * 2.0 * PI / cfg.interaction)?;
            let trace = mott_trace(&model, cfg.impurity_coupling, &grid);
            let (report, sqrt_l) = report_for(cfg, &trace, predictions, None)?;
            Ok(Evaluation {
                report,
                trace: TraceTable {
                    t: trace.times,
                    gamma: trace.gamma,
                    big_gamma: trace.big_gamma,
                    sqrt_l,
                    dn1: None,
                },
            })
        }
        Method::Ed => {
            let sys = EdSystem::new(&params, &ed_options(cfg))?;
            let site = params.site_from_impurity(cfg.density_site)?;
            let grid = grid_for(cfg, 2.0 * PI)?;
            let quench = sys.quench(&grid, &[site])?;
            let dn = quench
                .densities
                .into_iter()
                .next()
                .expect("one site requested");
            let window = cfg.average_window.min(grid.horizon());
            predictions.insert("density_average_window".into(), window);
            let offset = average_density_offset(&grid.times(), &dn, window)?;

            let big_gamma: Vec<f64> = quench.echo.values.iter().map(|v| v.ln()).collect();
            let trace = DephasingTrace {
                times: quench.echo.times.clone(),
                gamma: rate_from_log_echo(&big_gamma, grid.dt),
                big_gamma,
                sqrt_echo: quench.echo.values,
                provenance: Provenance::Ed,
            };
            let (report, sqrt_l) = report_for(cfg, &trace, predictions, Some(offset))?;
            Ok(Evaluation {
                report,
                trace: TraceTable {
                    t: trace.times,
                    gamma: trace.gamma,
                    big_gamma: trace.big_gamma,
                    sqrt_l,
                    dn1: Some(dn),
                },
            })
        }
    }
}

fn write_evaluation(out: &Path, eval: &Evaluation) -> Result<(), CliError> {
    let tag = &eval.report.tag;
    write_atomic(&out.join(format!("trace_{tag}.csv")), &eval.trace.to_csv()?)?;
    write_atomic(
        &out.join(format!("report_{tag}.json")),
        &eval.report.to_json()?,
    )?;
    Ok(())
}

/// Runs one scenario and writes its trace, report and resolved config.
pub fn run_scenario(cfg: &ScenarioConfig) -> Result<Evaluation, CliError> {
    let eval = evaluate(cfg)?;
    fs::create_dir_all(&cfg.out)?;
    write_evaluation(&cfg.out, &eval)?;
    let mut resolved = cfg.clone();
    resolved.horizon = Horizon::Fixed(eval.report.horizon);
    write_atomic(
        &cfg.out.join("resolved_config.txt"),
        resolved.to_text().as_bytes(),
    )?;
    log::info!(
        "{}: N = {:.6e} over T = {}",
        eval.report.tag,
        eval.report.measure,
        eval.report.horizon
    );
    Ok(eval)
}

/// Content hash of a sweep point: its resolved config and the code version.
pub fn point_hash(cfg: &ScenarioConfig) -> String {
    let mut h = Sha256::new();
    h.update(cfg.to_text().as_bytes());
    h.update(CODE_VERSION.as_bytes());
    h.finalize()
        .iter()
        .take(8)
        .map(|b| format!("{b:02x}"))
        .collect()
}

fn run_point(cfg: &ScenarioConfig, points_dir: &Path) -> PointRecord {
    let hash = point_hash(cfg);
    let path = points_dir.join(format!("{hash}.json"));
    if let Ok(bytes) = fs::read(&path) {
        if let Ok(rec) = serde_json::from_slice::<PointRecord>(&bytes) {
            if rec.status == PointStatus::Ok {
                log::info!("U/J = {}: reusing {}", rec.ratio, path.display());
                return rec;
            }
        }
    }
    let result = evaluate(cfg).and_then(|eval| {
        write_evaluation(&cfg.out, &eval)?;
        Ok(eval)
    });
    let rec = match result {
        Ok(eval) => PointRecord {
            ratio: cfg.ratio(),
            hash,
            tag: cfg.tag(),
            status: PointStatus::Ok,
            measure: Some(eval.report.measure),
            horizon: Some(eval.report.horizon),
            density_offset: eval.report.density_offset,
            error: None,
        },
        Err(e) => {
            log::warn!("U/J = {} failed: {e}", cfg.ratio());
            PointRecord {
                ratio: cfg.ratio(),
                hash,
                tag: cfg.tag(),
                status: PointStatus::Error,
                measure: None,
                horizon: None,
                density_offset: None,
                error: Some(e.to_string()),
            }
        }
    };
    let written = serde_json::to_vec_pretty(&rec)
        .map_err(CliError::from)
        .and_then(|bytes| write_atomic(&path, &bytes));
    if let Err(e) = written {
        log::warn!("could not persist sweep point {}: {e}", path.display());
    }
    rec
}

/// Sweep outcome in U/J order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub rows: Vec<SweepRow>,
    pub all_zero: bool,
}

/// Evaluates every U/J in `cfg.sweep` on `cfg.workers` threads, skipping
/// points whose content hash already has a successful record.
pub fn run_sweep(cfg: &ScenarioConfig) -> Result<SweepSummary, CliError> {
    if cfg.sweep.is_empty() {
        return Err(CliError::Config(
            "empty sweep: set 'sweep' to a comma-separated list of U/J values".into(),
        ));
    }
    let points_dir = cfg.out.join("points");
    fs::create_dir_all(&points_dir)?;
    write_atomic(
        &cfg.out.join("resolved_config.txt"),
        cfg.to_text().as_bytes(),
    )?;

    let mut ratios = cfg.sweep.clone();
    ratios.sort_by(f64::total_cmp);
    ratios.dedup();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.workers)
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let records: Vec<PointRecord> = pool.install(|| {
        ratios
            .par_iter()
            .map(|&r| run_point(&cfg.at_ratio(r), &points_dir))
            .collect()
    });

    let ok: Vec<SweepPoint> = records
        .iter()
        .filter_map(|r| {
            r.measure.map(|measure| SweepPoint {
                ratio: r.ratio,
                measure,
                density_offset: r.density_offset,
            })
        })
        .collect();
    let normalized = if ok.is_empty() {
        None
    } else {
        Some(normalize_sweep(&ok)?)
    };
    let rows: Vec<SweepRow> = records
        .iter()
        .map(|r| {
            let n_bar = normalized.as_ref().and_then(|s| {
                s.points
                    .iter()
                    .position(|p| p.ratio == r.ratio)
                    .filter(|_| r.status == PointStatus::Ok)
                    .map(|i| s.normalized[i])
            });
            SweepRow {
                ratio: r.ratio,
                measure: r.measure,
                normalized: n_bar,
                density_offset: r.density_offset,
                horizon: r.horizon,
                status: r.status,
                hash: r.hash.clone(),
                error: r.error.clone().unwrap_or_default(),
            }
        })
        .collect();
    write_atomic(&cfg.out.join("sweep.csv"), &sweep_to_csv(&rows)?)?;
    let all_zero = normalized.as_ref().is_none_or(|s| s.all_zero);
    if all_zero {
        log::warn!("every sweep point has N = 0; N_bar is reported as 0");
    }
    Ok(SweepSummary { rows, all_zero })
}

/// Contents of `compare_<tag>.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub schema_version: u32,
    pub code_version: String,
    pub tag: String,
    /// Analytic model used, if any applies at this U/J.
    pub analytic: Option<String>,
    /// `max_t |log sqrtL_ED - Gamma_corr| / max(|Gamma_corr|, 1e-6)`.
    pub tcl_metric: f64,
    pub tcl_bound: f64,
    /// `max_t |sqrtL_ED - sqrtL_analytic|`.
    pub max_abs_deviation: Option<f64>,
    pub deviation_bound: f64,
    /// `Gamma_analytic / Gamma_ED` at `t = min(1/J, T)`.
    pub early_decay_ratio: Option<f64>,
    pub echo_exceeds_one: bool,
    pub breakdown: bool,
    pub config: BTreeMap<String, String>,
}

/// Exact echo against the correlator route and the applicable analytic
/// model, all on the same lattice size.
pub fn compare_methods(cfg: &ScenarioConfig) -> Result<CompareReport, CliError> {
    let mut ed_cfg = cfg.clone();
    ed_cfg.method = Method::Ed;
    let params = ed_cfg.params();
    let sys = EdSystem::new(&params, &ed_options(cfg))?;
    let grid = grid_for(cfg, 2.0 * PI)?;
    let echo = sys.loschmidt_echo(&grid)?;
    let corr = sys.correlation_rates(&grid, None)?;
    let log_ed: Vec<f64> = echo.values.iter().map(|v| v.ln()).collect();
    let tcl_metric = log_ed
        .iter()
        .zip(&corr.big_gamma)
        .map(|(l, g)| (l - g).abs() / g.abs().max(1e-6))
        .fold(0.0, f64::max);

    let ratio = cfg.ratio();
    let analytic: Option<(String, DephasingTrace)> = if ratio <= 1.0 {
        let modes = sf_modes(&params)?;
        Some(("sf".into(), sf_trace(&modes, cfg.impurity_coupling, &grid)))
    } else if ratio >= 4.0 * (cfg.filling as f64 + 1.0) {
        let model = dh_model(&params, MomentumGrid::Lattice(cfg.n_sites))?;
        Some((
            "mott".into(),
            mott_trace(&model, cfg.impurity_coupling, &grid),
        ))
    } else {
        log::info!("U/J = {ratio} is between the analytic regimes; comparing ED with the correlator route only");
        None
    };

    let (name, analytic_echo, analytic_gamma) = match &analytic {
        Some((n, tr)) => (
            Some(n.clone()),
            Some(tr.sqrt_echo.clone()),
            Some(tr.big_gamma.clone()),
        ),
        None => (None, None, None),
    };
    let deviation: Option<Vec<f64>> = analytic_echo.as_ref().map(|a| {
        a.iter()
            .zip(&echo.values)
            .map(|(x, y)| (x - y).abs())
            .collect()
    });
    let max_abs_deviation = deviation
        .as_ref()
        .map(|d| d.iter().copied().fold(0.0, f64::max));
    let probe = grid
        .times()
        .iter()
        .position(|&t| t >= 1.0)
        .unwrap_or(grid.len() - 1);
    let early_decay_ratio = analytic_gamma
        .as_ref()
        .filter(|_| log_ed[probe] != 0.0)
        .map(|g| g[probe] / log_ed[probe]);
    let echo_exceeds_one = echo
        .values
        .iter()
        .chain(analytic_echo.iter().flatten())
        .any(|&v| v > 1.0 + 1e-12);
    let breakdown = echo_exceeds_one
        || tcl_metric > cfg.tcl_bound
        || max_abs_deviation.is_some_and(|d| d > cfg.deviation_bound);

    let tag = format!("compare_U{}", cfg.interaction);
    let mut w = csv::Writer::from_writer(Vec::new());
    let map_err = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record([
        "t",
        "sqrtL_ed",
        "log_sqrtL_ed",
        "Gamma_corr",
        "sqrtL_analytic",
        "abs_dev",
    ])
    .map_err(map_err)?;
    for (i, t) in grid.times().iter().enumerate() {
        let a = analytic_echo
            .as_ref()
            .map(|a| fmt_f64(a[i]))
            .unwrap_or_default();
        let d = deviation
            .as_ref()
            .map(|d| fmt_f64(d[i]))
            .unwrap_or_default();
        w.write_record([
            fmt_f64(*t),
            fmt_f64(echo.values[i]),
            fmt_f64(log_ed[i]),
            fmt_f64(corr.big_gamma[i]),
            a,
            d,
        ])
        .map_err(map_err)?;
    }
    let csv_bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;

    let mut resolved = ed_cfg.clone();
    resolved.horizon = Horizon::Fixed(grid.horizon());
    let report = CompareReport {
        schema_version: SCHEMA_VERSION,
        code_version: CODE_VERSION.to_string(),
        tag: tag.clone(),
        analytic: name,
        tcl_metric,
        tcl_bound: cfg.tcl_bound,
        max_abs_deviation,
        deviation_bound: cfg.deviation_bound,
        early_decay_ratio,
        echo_exceeds_one,
        breakdown,
        config: resolved.to_map(),
    };
    fs::create_dir_all(&cfg.out)?;
    write_atomic(&cfg.out.join(format!("{tag}.csv")), &csv_bytes)?;
    let mut json = serde_json::to_vec_pretty(&report)?;
    json.push(b'\n');
    write_atomic(&cfg.out.join(format!("{tag}.json")), &json)?;
    write_atomic(
        &cfg.out.join("resolved_config.txt"),
        resolved.to_text().as_bytes(),
    )?;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_difference_rate_is_exact_for_quadratics() {
        let dt = 0.1;
        let g: Vec<f64> = (0..20).map(|i| -0.5 * (i as f64 * dt).powi(2)).collect();
        for (i, r) in rate_from_log_echo(&g, dt).iter().enumerate() {
            assert!((r - i as f64 * dt).abs() < 1e-12);
        }
    }
}
