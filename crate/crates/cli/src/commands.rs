//! Subcommand bodies. Each writes its outputs plus a manifest into `cfg.out`.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use chrono::{SecondsFormat, Utc};
use hs_vanish::construct::{MollifiedField, MollifierSpec};
use hs_vanish::experiments::{apply_chart_factor, divergence_probe, vanishing_sweep, DivergenceRow, RunManifest, SlopeFit, CSV_HEADER};
use hs_vanish::flow::{endpoint_map, eps_drift, fixed_point_band, integrate, product_form_check, seed_line, ProductFormReport};
use hs_vanish::quad::QuadOptions;
use hs_vanish::radialft::{annulus_ft, radial_ft_quadrature, AnnulusInterval, Dimension, IndicatorProfile};
use hs_vanish::sobolev::oracle::{annulus_hs_norm_quadrature, OracleOptions};
use hs_vanish::sobolev::{annulus_hs_norm, grid_hs_norm, GridOptions, GridSpec, NormResult, SobolevOrder};
use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::checks::{indicator_field, run_check, CheckContext, CheckOutcome};
use crate::config::RunConfig;
use crate::CliError;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

fn now() -> String {
    Utc::now().to_rfc3339_opts(SecondsFormat::Millis, true)
}

pub fn config_hash(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> CliError {
    CliError::Io { path: path.to_path_buf(), msg: e.to_string() }
}

fn prepare_out(cfg: &RunConfig) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(&cfg.out).map_err(|e| io_err(&cfg.out, e))?;
    Ok(cfg.out.clone())
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    std::fs::write(path, text + "\n").map_err(|e| io_err(path, e))
}

fn write_manifest(
    cfg: &RunConfig,
    command: &str,
    started: String,
    rows: usize,
    tolerances: BTreeMap<String, f64>,
    outputs: &[PathBuf],
) -> Result<PathBuf, CliError> {
    let config = cfg.to_toml();
    let manifest = RunManifest {
        command: command.to_string(),
        config_hash: config_hash(&config),
        config,
        version: VERSION.to_string(),
        tolerances,
        started,
        finished: now(),
        rows,
        outputs: outputs.iter().map(|p| p.display().to_string()).collect(),
    };
    let path = cfg.out.join(format!("{command}_manifest.json"));
    write_json(&path, &manifest)?;
    Ok(path)
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub checks: Vec<CheckOutcome>,
    pub passed: usize,
    pub failed: usize,
}

pub fn run_verify(cfg: &RunConfig) -> Result<VerifyReport, CliError> {
    cfg.validate_common()?;
    cfg.validate_verify()?;
    let started = now();
    let out = prepare_out(cfg)?;
    let ctx = CheckContext {
        orders: cfg.verify.orders.clone(),
        intervals: cfg.verify.intervals.clone(),
        samples: cfg.verify.samples,
        seed: cfg.seed,
    };
    let checks: Vec<CheckOutcome> = cfg.verify.checks.iter().map(|&name| run_check(name, &ctx)).collect();
    let passed = checks.iter().filter(|c| c.passed).count();
    let report = VerifyReport { failed: checks.len() - passed, passed, checks };
    let path = out.join("verify_report.json");
    write_json(&path, &report)?;
    let tolerances = report.checks.iter().map(|c| (format!("{:?}", c.name), c.tolerance)).collect();
    write_manifest(cfg, "verify", started, report.checks.len(), tolerances, &[path])?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceReport {
    pub dim: usize,
    pub interval: [f64; 2],
    pub rows: Vec<DivergenceRow>,
    /// `seminorm_sq[k] / seminorm_sq[k-1]` against the diagonal-term prediction.
    pub ratios: Vec<DivergenceRatio>,
}

#[derive(Debug, Clone, Serialize)]
pub struct DivergenceRatio {
    pub from: f64,
    pub to: f64,
    pub actual: f64,
    pub predicted: f64,
    pub gamma_only: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub chart_c1: f64,
    pub fits: Vec<SlopeFit>,
    pub divergence: Option<DivergenceReport>,
}

#[derive(Debug, Clone)]
pub struct SweepOutput {
    pub csv: PathBuf,
    pub summary: SweepSummary,
    pub rows: usize,
    pub failed_rows: usize,
}

fn divergence_report(cfg: &RunConfig) -> Result<Option<DivergenceReport>, CliError> {
    let d = &cfg.divergence;
    if !d.enabled || d.orders.is_empty() {
        return Ok(None);
    }
    let iv = AnnulusInterval::new(d.interval[0], d.interval[1])?;
    let rows = divergence_probe(Dimension::new(d.dim)?, &iv, &d.orders)?;
    let ratios = rows
        .windows(2)
        .map(|w| DivergenceRatio {
            from: w[0].s,
            to: w[1].s,
            actual: w[1].seminorm_sq / w[0].seminorm_sq,
            predicted: w[1].diagonal / w[0].diagonal,
            gamma_only: w[1].gamma_factor / w[0].gamma_factor,
        })
        .collect();
    Ok(Some(DivergenceReport { dim: d.dim, interval: d.interval, rows, ratios }))
}

pub fn run_sweep(cfg: &RunConfig) -> Result<SweepOutput, CliError> {
    cfg.validate_common()?;
    cfg.validate_sweep()?;
    let started = now();
    let out = prepare_out(cfg)?;
    let table = apply_chart_factor(&vanishing_sweep(&cfg.sweep)?, cfg.chart_c1)?;

    let csv_path = out.join("sweep.csv");
    let mut writer = csv::Writer::from_path(&csv_path).map_err(|e| io_err(&csv_path, e))?;
    writer.write_record(CSV_HEADER).map_err(|e| io_err(&csv_path, e))?;
    for row in &table.rows {
        writer.write_record(row.record()).map_err(|e| io_err(&csv_path, e))?;
    }
    writer.flush().map_err(|e| io_err(&csv_path, e))?;

    let summary = SweepSummary { chart_c1: cfg.chart_c1, fits: table.fits.clone(), divergence: divergence_report(cfg)? };
    let summary_path = out.join("sweep_summary.json");
    write_json(&summary_path, &summary)?;

    let mut tolerances = BTreeMap::new();
    if let Some(d) = &cfg.sweep.drift {
        tolerances.insert("drift_tol".into(), d.tol);
    }
    tolerances.insert("time_nodes".into(), cfg.sweep.time_nodes as f64);
    write_manifest(cfg, "sweep", started, table.rows.len(), tolerances, &[csv_path.clone(), summary_path])?;
    let failed_rows = table.rows.iter().filter(|r| r.status != "ok").count();
    Ok(SweepOutput { csv: csv_path, summary, rows: table.rows.len(), failed_rows })
}

#[derive(Debug, Clone, Serialize)]
pub struct EndpointRow {
    pub eps: f64,
    pub seeds: Vec<f64>,
    pub images: Vec<f64>,
    pub monotone: bool,
    pub fixed_point_error: Option<f64>,
    pub max_displacement: f64,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct DriftRow {
    /// Drift between the flows at `eps` and `eps / 2`.
    pub eps: f64,
    pub drift: Option<f64>,
    pub status: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FlowReport {
    pub delta: f64,
    pub horizon: f64,
    pub band: Option<(f64, f64)>,
    pub endpoints: Vec<EndpointRow>,
    pub drift: Vec<DriftRow>,
    pub product_form: Option<ProductFormReport>,
    pub product_form_status: String,
}

fn status_of<T>(r: &hs_vanish::Result<T>) -> String {
    match r {
        Ok(_) => "ok".into(),
        Err(e) => format!("error: {e}"),
    }
}

pub fn run_flow(cfg: &RunConfig) -> Result<FlowReport, CliError> {
    cfg.validate_common()?;
    cfg.validate_flow()?;
    let started = now();
    let out = prepare_out(cfg)?;
    let fc = &cfg.flow;
    let schedule = fc.family.build(fc.horizon, fc.delta)?;
    let base = MollifierSpec::new(fc.mollifier, fc.eps)?;
    let line = Dimension::new(1)?;
    let top = MollifiedField::new(schedule.clone(), base.clone(), line);
    let band = fixed_point_band(&top);
    let (lo, hi) = match band {
        Some((lo, hi)) => (lo - 0.5 * fc.horizon, hi + 0.5 * fc.horizon),
        None => (schedule.h(0.0) - 1.0, schedule.h(0.0) + 1.0),
    };
    let seeds = seed_line(lo.max(0.0), hi, fc.seeds);
    let ladder: Vec<f64> = (0..fc.ladder).map(|k| fc.eps / 2f64.powi(k as i32)).collect();
    let field_at = |eps: f64| -> hs_vanish::Result<MollifiedField> { Ok(MollifiedField::new(schedule.clone(), base.with_eps(eps)?, line)) };

    let endpoints = ladder
        .iter()
        .map(|&eps| {
            let result = field_at(eps).and_then(|field| {
                let traj = integrate(&field, &seeds, fc.horizon, fc.tol)?;
                let images: Vec<f64> = traj.endpoints().iter().map(|x| x[0]).collect();
                Ok((images, endpoint_map(&traj, fixed_point_band(&field))))
            });
            match result {
                Ok((images, map)) => EndpointRow {
                    eps,
                    seeds: seeds.iter().map(|x| x[0]).collect(),
                    max_displacement: images.iter().zip(&seeds).map(|(y, x)| (y - x[0]).abs()).fold(0.0, f64::max),
                    images,
                    monotone: map.is_ok(),
                    fixed_point_error: map.as_ref().ok().and_then(|m| m.fixed_point_error),
                    status: status_of(&map),
                },
                Err(e) => EndpointRow {
                    eps,
                    seeds: seeds.iter().map(|x| x[0]).collect(),
                    images: Vec::new(),
                    monotone: false,
                    fixed_point_error: None,
                    max_displacement: f64::NAN,
                    status: format!("error: {e}"),
                },
            }
        })
        .collect();

    let drift = ladder
        .iter()
        .map(|&eps| {
            let r = field_at(eps).and_then(|a| {
                let b = field_at(0.5 * eps)?;
                eps_drift(&a, &b, &seeds, fc.horizon, fc.tol)
            });
            DriftRow { eps, status: status_of(&r), drift: r.ok() }
        })
        .collect();

    let (product_form, product_form_status) = if fc.dim < 2 {
        (None, "skipped: needs dim >= 2".to_string())
    } else {
        let field = MollifiedField::new(schedule.clone(), base.clone(), Dimension::new(fc.dim)?);
        let mut pseeds = Vec::new();
        for (k, r) in seed_line(lo.max(0.0), hi, 9).into_iter().enumerate() {
            let theta = 0.5 * PI * k as f64 / 8.0;
            let mut x = vec![0.0; fc.dim];
            x[0] = r[0] * theta.cos();
            x[1] = r[0] * theta.sin();
            pseeds.push(x);
        }
        let r = product_form_check(&field, &pseeds, fc.tol);
        (r.as_ref().ok().cloned(), status_of(&r))
    };

    let report = FlowReport { delta: fc.delta, horizon: fc.horizon, band, endpoints, drift, product_form, product_form_status };
    let path = out.join("flow.json");
    write_json(&path, &report)?;
    let tolerances = BTreeMap::from([("flow_tol".to_string(), fc.tol)]);
    write_manifest(cfg, "flow", started, report.endpoints.len(), tolerances, &[path])?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct NormReport {
    pub dim: usize,
    pub interval: [f64; 2],
    pub s: f64,
    pub closed_form: NormResult,
    pub quadrature: NormResult,
    pub grid: Option<NormResult>,
}

pub fn run_norm(cfg: &RunConfig) -> Result<NormReport, CliError> {
    cfg.validate_common()?;
    cfg.validate_norm()?;
    let started = now();
    let out = prepare_out(cfg)?;
    let nc = &cfg.norm;
    let d = Dimension::new(nc.dim)?;
    let iv = AnnulusInterval::new(nc.interval[0], nc.interval[1])?;
    let order = SobolevOrder::new(nc.s)?;
    let grid = if nc.grid_points > 0 && !iv.is_empty() {
        let spec = GridSpec::new(d, nc.pad * iv.outer(), nc.grid_points)?;
        Some(grid_hs_norm(&indicator_field(&iv, spec), order, GridOptions::jump())?)
    } else {
        None
    };
    let report = NormReport {
        dim: nc.dim,
        interval: nc.interval,
        s: nc.s,
        closed_form: annulus_hs_norm(&iv, d, order)?,
        quadrature: annulus_hs_norm_quadrature(&iv, d, order, OracleOptions::default())?,
        grid,
    };
    let path = out.join("norm.json");
    write_json(&path, &report)?;
    write_manifest(cfg, "norm", started, 1, BTreeMap::new(), &[path])?;
    Ok(report)
}

#[derive(Debug, Clone, Serialize)]
pub struct FtRow {
    pub xi: f64,
    pub closed_form: f64,
    pub quadrature: f64,
    pub error: f64,
    pub passed: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct FtReport {
    pub dim: usize,
    pub interval: [f64; 2],
    pub tol: f64,
    pub rows: Vec<FtRow>,
    pub passed: bool,
}

pub fn run_ft_check(cfg: &RunConfig) -> Result<FtReport, CliError> {
    cfg.validate_common()?;
    cfg.validate_ft_check()?;
    let started = now();
    let out = prepare_out(cfg)?;
    let fc = &cfg.ft_check;
    let d = Dimension::new(fc.dim)?;
    let iv = AnnulusInterval::new(fc.interval[0], fc.interval[1])?;
    let profile = IndicatorProfile(iv);
    let rows = fc
        .frequencies
        .iter()
        .map(|&xi| {
            let closed_form = annulus_ft(&iv, d, xi);
            let quadrature = radial_ft_quadrature(&profile, d, xi, QuadOptions::abs(1e-12))?;
            // relative above 1, absolute below
            let error = (quadrature - closed_form).abs() / closed_form.abs().max(1.0);
            Ok(FtRow { xi, closed_form, quadrature, error, passed: error <= fc.tol })
        })
        .collect::<hs_vanish::Result<Vec<_>>>()?;
    let passed = rows.iter().all(|r| r.passed);
    let report = FtReport { dim: fc.dim, interval: fc.interval, tol: fc.tol, rows, passed };
    let path = out.join("ft_check.json");
    write_json(&path, &report)?;
    let tolerances = BTreeMap::from([("ft_tol".to_string(), fc.tol)]);
    write_manifest(cfg, "ft_check", started, report.rows.len(), tolerances, &[path])?;
    Ok(report)
}
