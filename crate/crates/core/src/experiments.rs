//! Length bounds, direct lengths and the sweeps built from them.
//!
//! For a schedule `[f(t), g(t)]` and mollifier `G_eps` the path length of the
//! flow of `u = 1_[f, g](|x|) * G_eps` obeys
//!
//! ```text
//! Len^2 <= T int ||u||^2 dt <= T sup|F G_1|^2 int ||1_[f, g](|.|)||^2 dt,
//! ```
//!
//! which is [`length_bound`]; [`length_direct`] evaluates `int ||u|| dt` on a
//! grid.

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::construct::{Activation, BumpDisplacement, BumpShape, CenterPath, MollifiedField, MollifierSpec, Schedule};
use crate::flow::{eps_drift, fixed_point_band, seed_line};
use crate::quad::{GaussLegendre, QuadOptions};
use crate::radialft::{mollifier_ft_factor, AnnulusInterval, Dimension};
use crate::sobolev::{annulus_hs_norm, annulus_seminorm_sq, grid_hs_norm, surface_volume, ws_equal_args, GridOptions, GridSpec, SampledField, SobolevOrder};
use crate::{Error, Result};

pub const DEFAULT_TIME_NODES: usize = 64;

/// Frequencies scanned for `sup |F G_1|`.
const SUP_SCAN: usize = 64;

/// `C(G_1, T) = T sup_xi |F G_1(xi)|^2`.
pub fn mollifier_constant(mollifier: &MollifierSpec, dim: Dimension, horizon: f64) -> Result<f64> {
    let mut sup: f64 = 0.0;
    for k in 0..=SUP_SCAN {
        let xi = 0.25 * k as f64;
        sup = sup.max(mollifier_ft_factor(1.0, xi, mollifier, dim, QuadOptions::abs(1e-12))?.abs());
    }
    Ok(horizon * sup * sup)
}

/// `int_0^T q(t) dt` by Gauss-Legendre on each smooth piece of the schedule.
fn time_integral(schedule: &Schedule, nodes: usize, mut q: impl FnMut(f64) -> Result<f64>) -> Result<f64> {
    let rule = GaussLegendre::new(nodes.max(1));
    let breaks = schedule.time_breakpoints();
    let mut acc = 0.0;
    for w in breaks.windows(2) {
        for (t, wt) in rule.mapped(w[0], w[1]) {
            acc += wt * q(t)?;
        }
    }
    Ok(acc)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LengthBound {
    /// `C(G_1, T)`.
    pub constant: f64,
    /// `int ||1_[f, g](|.|)||^2_{L^2} dt`.
    pub l2_integral: f64,
    /// `int |1_[f, g](|.|)|^2_{H^s seminorm} dt`.
    pub seminorm_integral: f64,
    pub bound: f64,
}

pub fn length_bound(schedule: &Schedule, mollifier: &MollifierSpec, dim: Dimension, order: SobolevOrder, nodes: usize) -> Result<LengthBound> {
    order.require_annulus_range("length_bound")?;
    let constant = mollifier_constant(mollifier, dim, schedule.horizon())?;
    let l2 = time_integral(schedule, nodes, |t| {
        let (f, g) = (schedule.f(t), schedule.g(t));
        if !(g > f) {
            return Ok(0.0);
        }
        let norm = annulus_hs_norm(&AnnulusInterval::new(f, g)?, dim, order)?;
        Ok(norm.l2_sq)
    })?;
    let seminorm = time_integral(schedule, nodes, |t| {
        let (f, g) = (schedule.f(t), schedule.g(t));
        if !(g > f) {
            return Ok(0.0);
        }
        annulus_seminorm_sq(&AnnulusInterval::new(f, g)?, dim, order)
    })?;
    Ok(LengthBound { constant, l2_integral: l2, seminorm_integral: seminorm, bound: (constant * (l2 + seminorm)).max(0.0).sqrt() })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DirectLength {
    /// `int ||u(t)||_{H^s} dt`.
    pub length: f64,
    /// `int ||u(t)||^2_{H^s} dt`.
    pub energy: f64,
}

impl DirectLength {
    /// `T int ||u||^2 - Len^2 >= 0`, zero when `||u(t)||` is constant.
    pub fn cauchy_schwarz_gap(&self, horizon: f64) -> f64 {
        horizon * self.energy - self.length * self.length
    }
}

/// Sampled `u(t, |x|)` on the grid.
pub fn sample_field(field: &MollifiedField, t: f64, grid: GridSpec) -> SampledField {
    SampledField::from_scalar_fn(grid, |x| field.profile(t, x.iter().map(|v| v * v).sum::<f64>().sqrt()))
}

/// Time quadrature of grid norms of the radial extension `u(t, |x|)`.
pub fn length_direct(field: &MollifiedField, order: SobolevOrder, grid: GridSpec, nodes: usize, opts: GridOptions) -> Result<DirectLength> {
    if grid.dim() != field.dim {
        return Err(Error::InvalidInput(format!("grid is {}-dimensional, field {}", grid.dim().get(), field.dim.get())));
    }
    let mut energy = 0.0;
    let rule = GaussLegendre::new(nodes.max(1));
    let mut length = 0.0;
    for w in field.schedule.time_breakpoints().windows(2) {
        for (t, wt) in rule.mapped(w[0], w[1]) {
            if !(field.schedule.width(t) > 0.0) {
                continue;
            }
            let norm = grid_hs_norm(&sample_field(field, t, grid), order, opts)?;
            length += wt * norm.total();
            energy += wt * norm.total_sq;
        }
    }
    Ok(DirectLength { length, energy })
}

/// Family of schedules indexed by the width `delta`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleFamily {
    Squeeze { center: CenterPath, activation: Activation },
    /// Sweep realizing the bump displacement with `delta = (speed - 1) amplitude`.
    Sweep { start: f64, end: f64, speed: f64 },
}

impl Default for ScheduleFamily {
    fn default() -> Self {
        ScheduleFamily::Squeeze {
            center: CenterPath::Constant { h0: 1.5 },
            activation: Activation::SmoothBump { start: 0.1, end: 0.9, ramp: 0.2 },
        }
    }
}

impl ScheduleFamily {
    pub fn build(&self, horizon: f64, delta: f64) -> Result<Schedule> {
        match self {
            ScheduleFamily::Squeeze { center, activation } => Schedule::new(horizon, center.clone(), delta, activation.clone()),
            &ScheduleFamily::Sweep { start, end, speed } => {
                if delta == 0.0 {
                    return Schedule::new(horizon, CenterPath::Constant { h0: start }, 0.0, Activation::Constant);
                }
                if !(speed > 1.0) {
                    return Err(Error::Construction(format!("sweep speed must exceed 1, got {speed}")));
                }
                Schedule::sweep(horizon, BumpDisplacement::new(delta / (speed - 1.0), start, end)?, speed)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirectSpec {
    /// Grid points per axis.
    pub points: usize,
    /// Grid half-width as a multiple of the largest support radius.
    pub pad: f64,
    pub time_nodes: usize,
}

impl Default for DirectSpec {
    fn default() -> Self {
        Self { points: 2048, pad: 1.25, time_nodes: 16 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DriftSpec {
    pub seeds: usize,
    pub tol: f64,
}

impl Default for DriftSpec {
    fn default() -> Self {
        Self { seeds: 41, tol: crate::flow::DEFAULT_TOL }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SweepSpec {
    pub dim: usize,
    pub orders: Vec<f64>,
    pub deltas: Vec<f64>,
    pub eps: Vec<f64>,
    pub horizon: f64,
    pub family: ScheduleFamily,
    pub mollifier: BumpShape,
    pub time_nodes: usize,
    pub direct: Option<DirectSpec>,
    pub drift: Option<DriftSpec>,
    pub record_timing: bool,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            dim: 1,
            orders: vec![0.0, 0.1, 0.25, 0.3, 0.4],
            deltas: vec![1e-1, 3e-2, 1e-2, 3e-3, 1e-3, 3e-4, 1e-4],
            eps: vec![0.05],
            horizon: 1.0,
            family: ScheduleFamily::default(),
            mollifier: BumpShape::Exponential,
            time_nodes: DEFAULT_TIME_NODES,
            direct: None,
            drift: None,
            record_timing: false,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |field: &str, msg: String| Err(Error::InvalidInput(format!("{field}: {msg}")));
        Dimension::new(self.dim)?;
        for &s in &self.orders {
            if !(0.0..0.5).contains(&s) {
                return bad("orders", format!("s = {s} violates 0 <= s < 1/2"));
            }
        }
        if let Some(d) = self.deltas.iter().find(|d| !(**d >= 0.0) || !d.is_finite()) {
            return bad("deltas", format!("{d} is not a finite nonnegative width"));
        }
        if let Some(e) = self.eps.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
            return bad("eps", format!("{e} is not a positive scale"));
        }
        if !(self.horizon > 0.0) {
            return bad("horizon", format!("{} is not positive", self.horizon));
        }
        if self.time_nodes == 0 {
            return bad("time_nodes", "must be positive".into());
        }
        if let Some(d) = &self.direct {
            if !(d.pad > 1.0) {
                return bad("direct.pad", format!("{} must exceed 1", d.pad));
            }
            if d.time_nodes == 0 {
                return bad("direct.time_nodes", "must be positive".into());
            }
        }
        if let Some(d) = &self.drift {
            if !(d.tol > 0.0) || d.seeds < 2 {
                return bad("drift", "needs tol > 0 and at least two seeds".into());
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub s: f64,
    pub delta: f64,
    pub eps: f64,
    /// Time integral of the annulus seminorm squared.
    pub seminorm_sq: f64,
    /// Time integral of the annulus `L^2` norm squared.
    pub l2_sq: f64,
    pub len_bound: f64,
    pub len_direct: Option<f64>,
    pub endpoint_drift: Option<f64>,
    pub method: String,
    pub wall_time_ms: f64,
    pub status: String,
}

pub const CSV_HEADER: [&str; 12] = [
    "n",
    "s",
    "delta",
    "eps",
    "seminorm_sq",
    "l2_sq",
    "len_bound",
    "len_direct",
    "endpoint_drift",
    "method",
    "wall_time_ms",
    "status",
];

/// 17 significant digits; parses back to the same `f64`.
pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

impl SweepRow {
    pub fn record(&self) -> Vec<String> {
        let opt = |v: Option<f64>| v.map(format_float).unwrap_or_default();
        vec![
            self.n.to_string(),
            format_float(self.s),
            format_float(self.delta),
            format_float(self.eps),
            format_float(self.seminorm_sq),
            format_float(self.l2_sq),
            format_float(self.len_bound),
            opt(self.len_direct),
            opt(self.endpoint_drift),
            self.method.clone(),
            format_float(self.wall_time_ms),
            self.status.clone(),
        ]
    }

    fn failed(n: usize, s: f64, delta: f64, eps: f64, err: &Error) -> Self {
        Self {
            n,
            s,
            delta,
            eps,
            seminorm_sq: f64::NAN,
            l2_sq: f64::NAN,
            len_bound: f64::NAN,
            len_direct: None,
            endpoint_drift: None,
            method: String::new(),
            wall_time_ms: 0.0,
            status: format!("error: {err}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SlopeFit {
    pub s: f64,
    pub eps: f64,
    /// Log-log slope of `seminorm_sq` against `delta`; expected `1 - 2s`.
    pub seminorm_slope: Option<f64>,
    /// Log-log slope of `len_bound` against `delta`; expected `(1 - 2s) / 2`.
    pub length_slope: Option<f64>,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub fits: Vec<SlopeFit>,
}

/// Least-squares slope of `log y` against `log x` over the positive pairs,
/// dropping the largest and smallest `x` once at least four remain.
pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Option<f64> {
    let mut pts: Vec<(f64, f64)> = points.iter().copied().filter(|&(x, y)| x > 0.0 && y > 0.0 && y.is_finite()).collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    if pts.len() >= 4 {
        pts = pts[1..pts.len() - 1].to_vec();
    }
    if pts.len() < 2 {
        return None;
    }
    let m = pts.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = pts.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

fn sweep_row(spec: &SweepSpec, dim: Dimension, s: f64, delta: f64, eps: f64) -> Result<SweepRow> {
    let clock = Instant::now();
    let order = SobolevOrder::new(s)?;
    let schedule = spec.family.build(spec.horizon, delta)?;
    let mollifier = MollifierSpec::new(spec.mollifier, eps)?;
    let bound = length_bound(&schedule, &mollifier, dim, order, spec.time_nodes)?;
    let mut method = String::from("closed_form");
    let field = MollifiedField::new(schedule.clone(), mollifier.clone(), dim);
    let len_direct = match &spec.direct {
        None => None,
        Some(d) => {
            method.push_str("+grid");
            match schedule.swept_band() {
                None => Some(0.0),
                Some((_, hi)) => {
                    let grid = GridSpec::new(dim, d.pad * (hi + eps), d.points)?;
                    Some(length_direct(&field, order, grid, d.time_nodes, GridOptions::default())?.length)
                }
            }
        }
    };
    let endpoint_drift = match &spec.drift {
        None => None,
        Some(d) => {
            let line = Dimension::new(1)?;
            let a = MollifiedField::new(schedule.clone(), mollifier.clone(), line);
            match fixed_point_band(&a) {
                None => Some(0.0),
                Some((lo, hi)) => {
                    let b = MollifiedField::new(schedule.clone(), mollifier.with_eps(0.5 * eps)?, line);
                    let seeds = seed_line(lo - spec.horizon, hi + spec.horizon, d.seeds);
                    Some(eps_drift(&a, &b, &seeds, spec.horizon, d.tol)?)
                }
            }
        }
    };
    let wall_time_ms = if spec.record_timing { clock.elapsed().as_secs_f64() * 1e3 } else { 0.0 };
    Ok(SweepRow {
        n: dim.get(),
        s,
        delta,
        eps,
        seminorm_sq: bound.seminorm_integral,
        l2_sq: bound.l2_integral,
        len_bound: bound.bound,
        len_direct,
        endpoint_drift,
        method,
        wall_time_ms,
        status: "ok".into(),
    })
}

fn fit_rows(spec: &SweepSpec, rows: &[SweepRow]) -> Vec<SlopeFit> {
    let mut fits = Vec::new();
    for &s in &spec.orders {
        for &eps in &spec.eps {
            let sel: Vec<&SweepRow> = rows.iter().filter(|r| r.s == s && r.eps == eps && r.status == "ok").collect();
            let semi: Vec<(f64, f64)> = sel.iter().map(|r| (r.delta, r.seminorm_sq)).collect();
            let len: Vec<(f64, f64)> = sel.iter().map(|r| (r.delta, r.len_bound)).collect();
            fits.push(SlopeFit {
                s,
                eps,
                seminorm_slope: fit_loglog_slope(&semi),
                length_slope: fit_loglog_slope(&len),
                points: sel.iter().filter(|r| r.delta > 0.0).count(),
            });
        }
    }
    fits
}

/// One row per `(s, delta, eps)`, in that nesting order. Row failures are
/// recorded in the `status` column.
pub fn vanishing_sweep(spec: &SweepSpec) -> Result<SweepTable> {
    spec.validate()?;
    let dim = Dimension::new(spec.dim)?;
    let mut items = Vec::new();
    for &s in &spec.orders {
        for &delta in &spec.deltas {
            for &eps in &spec.eps {
                items.push((s, delta, eps));
            }
        }
    }
    let rows: Vec<SweepRow> = items
        .par_iter()
        .map(|&(s, delta, eps)| sweep_row(spec, dim, s, delta, eps).unwrap_or_else(|e| SweepRow::failed(dim.get(), s, delta, eps, &e)))
        .collect();
    let fits = fit_rows(spec, &rows);
    Ok(SweepTable { rows, fits })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DivergenceRow {
    pub s: f64,
    pub seminorm_sq: f64,
    /// `Vol(S^{n-1}) (g^n W(g, g) + f^n W(f, f))`, the part carrying `Gamma(1 - 2s)`.
    pub diagonal: f64,
    pub gamma_factor: f64,
}

/// Closed-form seminorms as `s` approaches `1/2` for a fixed annulus.
pub fn divergence_probe(dim: Dimension, iv: &AnnulusInterval, orders: &[f64]) -> Result<Vec<DivergenceRow>> {
    if iv.is_empty() {
        return Err(Error::InvalidInput("divergence probe needs f < g".into()));
    }
    orders
        .iter()
        .map(|&s| {
            let order = SobolevOrder::new(s)?;
            order.require_annulus_range("divergence_probe")?;
            if !(0.4..=0.4999).contains(&s) {
                return Err(Error::InvalidInput(format!("divergence probe orders lie in [0.4, 0.4999], got {s}")));
            }
            let (f, g) = (iv.inner(), iv.outer());
            let nf = dim.get() as i32;
            let diagonal = surface_volume(dim)
                * (g.powi(nf) * ws_equal_args(dim, order, g)? + f.powi(nf) * ws_equal_args(dim, order, f)?);
            Ok(DivergenceRow {
                s,
                seminorm_sq: annulus_seminorm_sq(iv, dim, order)?,
                diagonal,
                gamma_factor: crate::specfun::gamma(1.0 - 2.0 * s)?,
            })
        })
        .collect()
}

/// The single-chart constant `C1`, validated.
pub fn chart_reduction_factor(c1: f64) -> Result<f64> {
    if !(c1 > 0.0) || !c1.is_finite() {
        return Err(Error::InvalidInput(format!("chart constant C1 must be positive, got {c1}")));
    }
    Ok(c1)
}

/// Scale every reported length by `C1`; fitted exponents are unaffected.
pub fn apply_chart_factor(table: &SweepTable, c1: f64) -> Result<SweepTable> {
    let c1 = chart_reduction_factor(c1)?;
    let rows = table
        .rows
        .iter()
        .map(|r| SweepRow { len_bound: c1 * r.len_bound, len_direct: r.len_direct.map(|v| c1 * v), ..r.clone() })
        .collect::<Vec<_>>();
    let fits = table
        .fits
        .iter()
        .map(|f| {
            let len: Vec<(f64, f64)> =
                rows.iter().filter(|r| r.s == f.s && r.eps == f.eps && r.status == "ok").map(|r| (r.delta, r.len_bound)).collect();
            SlopeFit { length_slope: fit_loglog_slope(&len), ..f.clone() }
        })
        .collect();
    Ok(SweepTable { rows, fits })
}

/// Run bookkeeping written next to every output file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    pub config: String,
    pub config_hash: String,
    pub version: String,
    pub tolerances: std::collections::BTreeMap<String, f64>,
    pub started: String,
    pub finished: String,
    pub rows: usize,
    pub outputs: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn order(s: f64) -> SobolevOrder {
        SobolevOrder::new(s).unwrap()
    }

    fn bump(eps: f64) -> MollifierSpec {
        MollifierSpec::new(BumpShape::Exponential, eps).unwrap()
    }

    fn squeeze(delta: f64) -> Schedule {
        ScheduleFamily::default().build(1.0, delta).unwrap()
    }

    #[test]
    fn mollifier_constant_is_horizon() {
        for n in 1..=3 {
            assert_relative_eq!(mollifier_constant(&bump(0.1), dim(n), 2.0).unwrap(), 2.0, max_relative = 1e-12);
        }
    }

    #[test]
    fn zero_width_gives_zero_lengths() {
        let sched = squeeze(0.0);
        let b = length_bound(&sched, &bump(0.05), dim(2), order(0.25), 64).unwrap();
        assert_eq!(b.bound, 0.0);
        let field = MollifiedField::new(sched, bump(0.05), dim(1));
        let grid = GridSpec::new(dim(1), 3.0, 512).unwrap();
        let d = length_direct(&field, order(0.25), grid, 8, GridOptions::default()).unwrap();
        assert_eq!(d.length, 0.0);
    }

    #[test]
    fn constant_schedule_bound_matches_assembly() {
        // f = 1, g = 2 on all of [0, 1] at s = 0: bound^2 = C Vol (2^n - 1) / n * 2
        let sched = Schedule::new(1.0, CenterPath::Constant { h0: 1.5 }, 1.0, Activation::Constant).unwrap();
        for n in 1..=3 {
            let b = length_bound(&sched, &bump(0.05), dim(n), order(0.0), 64).unwrap();
            let want = b.constant * surface_volume(dim(n)) * (2f64.powi(n as i32) - 1.0) / n as f64 * 2.0;
            assert_relative_eq!(b.bound * b.bound, want, max_relative = 1e-10);
        }
    }

    #[test]
    fn direct_length_within_bound_and_grid_converged() {
        let sched = squeeze(0.2);
        let field = MollifiedField::new(sched.clone(), bump(0.05), dim(1));
        let bound = length_bound(&sched, &bump(0.05), dim(1), order(0.25), 64).unwrap();
        let coarse = length_direct(&field, order(0.25), GridSpec::new(dim(1), 2.5, 2048).unwrap(), 16, GridOptions::default()).unwrap();
        let fine = length_direct(&field, order(0.25), GridSpec::new(dim(1), 2.5, 8192).unwrap(), 16, GridOptions::default()).unwrap();
        assert!(coarse.length <= bound.bound * 1.05, "{} vs {}", coarse.length, bound.bound);
        assert!((coarse.length / fine.length - 1.0).abs() < 0.05);
    }

    #[test]
    fn l2_length_against_closed_form() {
        // s = 0: ||u||^2 = 2 int (1_[f,g] * G)^2, close to twice the annulus
        // volume for small eps
        let sched = Schedule::new(1.0, CenterPath::Constant { h0: 1.5 }, 0.4, Activation::Constant).unwrap();
        let field = MollifiedField::new(sched, bump(1e-3), dim(2));
        let d = length_direct(&field, order(0.0), GridSpec::new(dim(2), 2.0, 1024).unwrap(), 4, GridOptions::default()).unwrap();
        let iv = AnnulusInterval::new(1.3, 1.7).unwrap();
        let vol = 2.0 * iv.volume(dim(2));
        assert!((d.length / vol.sqrt() - 1.0).abs() < 5e-3, "{} vs {}", d.length, vol.sqrt());
    }

    #[test]
    fn cauchy_schwarz_equality_for_constant_schedules() {
        let sched = Schedule::new(1.0, CenterPath::Constant { h0: 1.5 }, 0.3, Activation::Constant).unwrap();
        let field = MollifiedField::new(sched, bump(0.05), dim(1));
        let d = length_direct(&field, order(0.3), GridSpec::new(dim(1), 2.5, 2048).unwrap(), 8, GridOptions::default()).unwrap();
        assert!(d.cauchy_schwarz_gap(1.0).abs() <= 1e-12 * d.energy);
        let moving = MollifiedField::new(squeeze(0.3), bump(0.05), dim(1));
        let d = length_direct(&moving, order(0.3), GridSpec::new(dim(1), 2.5, 2048).unwrap(), 8, GridOptions::default()).unwrap();
        assert!(d.cauchy_schwarz_gap(1.0) > 0.0);
    }

    #[test]
    fn sweep_rows_and_slopes() {
        let spec = SweepSpec {
            orders: vec![0.0, 0.3],
            deltas: vec![0.0, 1e-1, 1e-2, 1e-3, 1e-4],
            time_nodes: 32,
            ..SweepSpec::default()
        };
        let table = vanishing_sweep(&spec).unwrap();
        assert_eq!(table.rows.len(), 10);
        for r in table.rows.iter().filter(|r| r.delta == 0.0) {
            assert_eq!((r.seminorm_sq, r.l2_sq, r.len_bound), (0.0, 0.0, 0.0));
        }
        let s0 = table.fits.iter().find(|f| f.s == 0.0).unwrap();
        assert!((s0.seminorm_slope.unwrap() - 1.0).abs() < 0.1);
        let s3 = table.fits.iter().find(|f| f.s == 0.3).unwrap();
        assert!((s3.seminorm_slope.unwrap() - 0.4).abs() < 0.05);
        // bound shrinks with delta
        let lens: Vec<f64> = table.rows.iter().filter(|r| r.s == 0.3).map(|r| r.len_bound).collect();
        assert!(lens[1..].windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn sweep_validation_names_fields() {
        let spec = SweepSpec { orders: vec![0.6], ..SweepSpec::default() };
        let err = vanishing_sweep(&spec).unwrap_err().to_string();
        assert!(err.contains("orders") && err.contains("1/2"), "{err}");
        assert!(vanishing_sweep(&SweepSpec { eps: vec![0.0], ..SweepSpec::default() }).is_err());
    }

    #[test]
    fn failing_rows_are_flagged() {
        let spec = SweepSpec {
            orders: vec![0.2],
            deltas: vec![0.1, 5.0],
            family: ScheduleFamily::Squeeze { center: CenterPath::Constant { h0: 1.5 }, activation: Activation::Constant },
            ..SweepSpec::default()
        };
        let table = vanishing_sweep(&spec).unwrap();
        assert_eq!(table.rows[0].status, "ok");
        assert!(table.rows[1].status.starts_with("error"));
        assert!(table.rows[1].len_bound.is_nan());
    }

    #[test]
    fn sweep_family_realizes_delta() {
        let fam = ScheduleFamily::Sweep { start: 1.2, end: 1.8, speed: 2.0 };
        let sched = fam.build(1.0, 0.05).unwrap();
        assert_relative_eq!(sched.delta(), 0.05, max_relative = 1e-12);
        assert_eq!(fam.build(1.0, 0.0).unwrap().delta(), 0.0);
    }

    #[test]
    fn divergence_follows_gamma_pole() {
        let iv = AnnulusInterval::new(1.0, 2.0).unwrap();
        let rows = divergence_probe(dim(1), &iv, &[0.49, 0.499]).unwrap();
        let actual = rows[1].seminorm_sq / rows[0].seminorm_sq;
        let predicted = rows[1].diagonal / rows[0].diagonal;
        assert!((actual / predicted - 1.0).abs() < 0.15);
        assert!(divergence_probe(dim(1), &iv, &[0.5]).is_err());
        assert!(divergence_probe(dim(1), &iv, &[0.3]).is_err());
        assert!(divergence_probe(dim(1), &AnnulusInterval::new(1.0, 1.0).unwrap(), &[0.45]).is_err());
    }

    #[test]
    fn divergence_anchor_against_quadrature() {
        use crate::sobolev::oracle::{annulus_seminorm_quadrature, OracleOptions};
        let iv = AnnulusInterval::new(1.0, 2.0).unwrap();
        let rows = divergence_probe(dim(1), &iv, &[0.4]).unwrap();
        let q = annulus_seminorm_quadrature(&iv, dim(1), order(0.4), OracleOptions::default()).unwrap();
        assert!((rows[0].seminorm_sq / q - 1.0).abs() < 1e-5);
    }

    #[test]
    fn chart_factor_scales_lengths_only() {
        let spec = SweepSpec { orders: vec![0.25], deltas: vec![1e-1, 1e-2, 1e-3, 1e-4], time_nodes: 16, ..SweepSpec::default() };
        let table = vanishing_sweep(&spec).unwrap();
        assert_eq!(apply_chart_factor(&table, 1.0).unwrap(), table);
        let scaled = apply_chart_factor(&table, 3.7).unwrap();
        for (a, b) in table.rows.iter().zip(&scaled.rows) {
            assert_relative_eq!(b.len_bound, 3.7 * a.len_bound, max_relative = 1e-15);
            assert_eq!(a.seminorm_sq, b.seminorm_sq);
        }
        let (a, b) = (table.fits[0].length_slope.unwrap(), scaled.fits[0].length_slope.unwrap());
        assert!((a - b).abs() <= 1e-12);
        assert!(chart_reduction_factor(0.0).is_err() && chart_reduction_factor(-1.0).is_err());
    }

    #[test]
    fn csv_record_round_trips() {
        let row = SweepRow {
            n: 2,
            s: 0.1,
            delta: 1.0 / 3.0,
            eps: 0.05,
            seminorm_sq: std::f64::consts::PI,
            l2_sq: 1e-300,
            len_bound: 2.5,
            len_direct: None,
            endpoint_drift: Some(1.0 / 7.0),
            method: "closed_form".into(),
            wall_time_ms: 0.0,
            status: "ok".into(),
        };
        let rec = row.record();
        assert_eq!(rec.len(), CSV_HEADER.len());
        assert_eq!(rec[2].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(rec[4].parse::<f64>().unwrap(), std::f64::consts::PI);
        assert_eq!(rec[7], "");
        assert_eq!(rec[8].parse::<f64>().unwrap(), 1.0 / 7.0);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn slope_fit_recovers_power_laws(p in -2.0..2.0f64, c in 0.1..10.0f64) {
            let pts: Vec<(f64, f64)> = (0..6).map(|k| { let x = 10f64.powi(-k); (x, c * x.powf(p)) }).collect();
            prop_assert!((fit_loglog_slope(&pts).unwrap() - p).abs() < 1e-10);
            // rescaling values leaves exponents unchanged
            let scaled: Vec<(f64, f64)> = pts.iter().map(|&(x, y)| (x, 3.7 * y)).collect();
            prop_assert!((fit_loglog_slope(&scaled).unwrap() - fit_loglog_slope(&pts).unwrap()).abs() < 1e-12);
        }

        #[test]
        fn bound_nonincreasing_in_delta(n in 1usize..=3, s in 0.0..0.45f64, d in 1e-3..0.2f64) {
            let a = length_bound(&squeeze(d), &bump(0.05), dim(n), order(s), 16).unwrap().bound;
            let b = length_bound(&squeeze(0.7 * d), &bump(0.05), dim(n), order(s), 16).unwrap().bound;
            prop_assert!(b <= a);
        }
    }
}
