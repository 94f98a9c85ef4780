//! Mollifiers, squeeze schedules and the mollified moving-indicator field.
//!
//! The 1D field is `u(t, x) = (1_[f(t), g(t)] * G_eps)(x)`, which is just a
//! difference of two shifted mollifier CDFs. In `R^n` it is extended radially
//! as `(u(t, |x|), 0, ..., 0)`.

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::quad::{gk21, integrate, Neumaier, QuadOptions};
use crate::radialft::{unit_ball_volume, Dimension, MAX_DIMENSION};
use crate::{Error, Result};

/// Cells in the tabulated CDF of `G_1` on `[-1, 1]`.
pub const CDF_CELLS: usize = 4096;

/// Profile of the unnormalized bump on `[-1, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BumpShape {
    /// `exp(-1 / (1 - x^2))`
    Exponential,
    /// `(1 - x^2)^power`; only finitely smooth, handy for tests.
    Polynomial { power: u32 },
}

impl Default for BumpShape {
    fn default() -> Self {
        BumpShape::Exponential
    }
}

impl BumpShape {
    pub fn raw(&self, x: f64) -> f64 {
        let q = 1.0 - x * x;
        if q <= 0.0 {
            return 0.0;
        }
        match *self {
            BumpShape::Exponential => (-1.0 / q).exp(),
            BumpShape::Polynomial { power } => q.powi(power as i32),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            BumpShape::Polynomial { power: 0 } => {
                Err(Error::InvalidInput("polynomial bump needs power >= 1".into()))
            }
            _ => Ok(()),
        }
    }
}

#[derive(Debug)]
struct CdfTable {
    shape: BumpShape,
    mass: f64,
    /// Unit-mass normalizers of `G_1(|x|)` in `R^n`, indexed by `n - 1`.
    radial_mass: [f64; MAX_DIMENSION],
    values: Vec<f64>,
    slopes: Vec<f64>,
}

impl CdfTable {
    fn build(shape: BumpShape) -> Result<Self> {
        let h = 2.0 / CDF_CELLS as f64;
        let raw = |x: f64| shape.raw(x);
        let mut acc = Neumaier::default();
        let mut values = Vec::with_capacity(CDF_CELLS + 1);
        values.push(0.0);
        for k in 0..CDF_CELLS {
            let a = -1.0 + k as f64 * h;
            acc.add(gk21(&raw, a, a + h).0);
            values.push(acc.sum());
        }
        let mass = acc.sum();
        for v in values.iter_mut() {
            *v /= mass;
        }
        *values.last_mut().unwrap() = 1.0;
        // symmetric bump: pin the centre exactly
        values[CDF_CELLS / 2] = 0.5;
        let mut slopes: Vec<f64> = (0..=CDF_CELLS).map(|k| shape.raw(-1.0 + k as f64 * h) / mass).collect();
        fritsch_carlson(&values, &mut slopes, h);

        let mut radial_mass = [0.0; MAX_DIMENSION];
        for (i, slot) in radial_mass.iter_mut().enumerate() {
            let n = i + 1;
            let dim = Dimension::new(n)?;
            let moment = integrate(|r| shape.raw(r) * r.powi(n as i32 - 1), 0.0, 1.0, QuadOptions::abs(1e-15))?;
            *slot = n as f64 * unit_ball_volume(dim) * moment.value;
        }
        Ok(Self { shape, mass, radial_mass, values, slopes })
    }

    fn eval(&self, x: f64) -> f64 {
        if x <= -1.0 {
            return 0.0;
        }
        if x >= 1.0 {
            return 1.0;
        }
        let h = 2.0 / CDF_CELLS as f64;
        let pos = (x + 1.0) / h;
        let k = (pos.floor() as usize).min(CDF_CELLS - 1);
        let u = pos - k as f64;
        let (y0, y1) = (self.values[k], self.values[k + 1]);
        let (m0, m1) = (self.slopes[k] * h, self.slopes[k + 1] * h);
        let u2 = u * u;
        let u3 = u2 * u;
        let v = (2.0 * u3 - 3.0 * u2 + 1.0) * y0 + (u3 - 2.0 * u2 + u) * m0 + (-2.0 * u3 + 3.0 * u2) * y1 + (u3 - u2) * m1;
        v.clamp(0.0, 1.0)
    }
}

/// Monotonicity limiter for cubic Hermite slopes.
fn fritsch_carlson(y: &[f64], m: &mut [f64], h: f64) {
    for k in 0..y.len() - 1 {
        let d = (y[k + 1] - y[k]) / h;
        if d == 0.0 {
            m[k] = 0.0;
            m[k + 1] = 0.0;
            continue;
        }
        let a = m[k] / d;
        let b = m[k + 1] / d;
        let r = a * a + b * b;
        if r > 9.0 {
            let tau = 3.0 / r.sqrt();
            m[k] = tau * a * d;
            m[k + 1] = tau * b * d;
        }
    }
}

/// Unit-mass mollifier `G_eps(x) = G_1(x / eps) / eps` supported on `[-eps, eps]`.
#[derive(Debug, Clone)]
pub struct MollifierSpec {
    eps: f64,
    table: Arc<CdfTable>,
}

impl MollifierSpec {
    pub fn new(shape: BumpShape, eps: f64) -> Result<Self> {
        shape.validate()?;
        check_eps(eps)?;
        Ok(Self { eps, table: Arc::new(CdfTable::build(shape)?) })
    }

    /// Same bump at another scale; the CDF table is shared.
    pub fn with_eps(&self, eps: f64) -> Result<Self> {
        check_eps(eps)?;
        Ok(Self { eps, table: Arc::clone(&self.table) })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn shape(&self) -> BumpShape {
        self.table.shape
    }

    /// `int_{-1}^{1}` of the raw bump.
    pub fn mass(&self) -> f64 {
        self.table.mass
    }

    pub fn unit_density(&self, x: f64) -> f64 {
        self.table.shape.raw(x) / self.table.mass
    }

    pub fn density(&self, x: f64) -> f64 {
        self.unit_density(x / self.eps) / self.eps
    }

    /// `int_{-inf}^x G_eps`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.table.eval(x / self.eps)
    }

    /// `G_1(r)` renormalized to unit mass as a radial function on `R^n`.
    pub fn radial_unit_density(&self, dim: Dimension, r: f64) -> f64 {
        self.table.shape.raw(r) / self.table.radial_mass[dim.get() - 1]
    }
}

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("mollifier scale must be positive and finite, got {eps}")))
    }
}

pub fn mollifier_cdf(m: &MollifierSpec, x: f64) -> f64 {
    m.cdf(x)
}

/// `6x^5 - 15x^4 + 10x^3` clamped to `[0, 1]`.
pub fn smootherstep(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (x * (6.0 * x - 15.0) + 10.0)
}

fn smootherstep_dot(x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    30.0 * x * x * (1.0 - x) * (1.0 - x)
}

/// Path of the limit map `h`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CenterPath {
    Constant { h0: f64 },
    Linear { start: f64, speed: f64 },
}

impl CenterPath {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            CenterPath::Constant { h0 } => h0,
            CenterPath::Linear { start, speed } => start + speed * t,
        }
    }

    pub fn derivative(&self) -> f64 {
        match *self {
            CenterPath::Constant { .. } => 0.0,
            CenterPath::Linear { speed, .. } => speed,
        }
    }
}

/// Activation profile `a(t) >= 0` of a squeeze schedule.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Activation {
    Constant,
    /// Smootherstep ramp up on `[start, start + ramp]`, down on `[end - ramp, end]`.
    SmoothBump { start: f64, end: f64, ramp: f64 },
}

impl Activation {
    fn validate(&self) -> Result<()> {
        match *self {
            Activation::Constant => Ok(()),
            Activation::SmoothBump { start, end, ramp } => {
                if !(start < end) || !(ramp > 0.0) || 2.0 * ramp > end - start + 1e-15 {
                    Err(Error::Construction(format!(
                        "smooth bump needs start < end and 0 < 2 ramp <= end - start (start {start}, end {end}, ramp {ramp})"
                    )))
                } else {
                    Ok(())
                }
            }
        }
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Activation::Constant => 1.0,
            Activation::SmoothBump { start, end, ramp } => {
                smootherstep((t - start) / ramp) * smootherstep((end - t) / ramp)
            }
        }
    }

    pub fn derivative(&self, t: f64) -> f64 {
        match *self {
            Activation::Constant => 0.0,
            Activation::SmoothBump { start, end, ramp } => {
                let up = (t - start) / ramp;
                let down = (end - t) / ramp;
                (smootherstep_dot(up) * smootherstep(down) - smootherstep(up) * smootherstep_dot(down)) / ramp
            }
        }
    }

    /// Points where `a` is not analytic.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            Activation::Constant => Vec::new(),
            Activation::SmoothBump { start, end, ramp } => vec![start, start + ramp, end - ramp, end],
        }
    }
}

/// How the interval endpoints move.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ScheduleShape {
    /// `f = h - delta a / 2`, `g = h + delta a / 2`.
    Squeeze { center: CenterPath, activation: Activation },
    /// Front `g(t) = x0 + speed t` sweeping across the target support, back
    /// edge placed so that the transport endpoint is exactly `phi`. Here
    /// `delta = (speed - 1) max d` and `a = (g - f) / delta`.
    Sweep { target: BumpDisplacement, speed: f64 },
}

/// Time-dependent interval `[f(t), g(t)]` on `[0, T]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    horizon: f64,
    delta: f64,
    shape: ScheduleShape,
}

/// Samples used when checking schedule invariants.
const INVARIANT_SAMPLES: usize = 8192;

impl Schedule {
    /// Squeeze schedule around the limit path `center`.
    pub fn new(horizon: f64, center: CenterPath, delta: f64, activation: Activation) -> Result<Self> {
        if !(delta >= 0.0) || !delta.is_finite() {
            return Err(Error::Construction(format!("delta must be nonnegative, got {delta}")));
        }
        activation.validate()?;
        Self::checked(horizon, delta, ScheduleShape::Squeeze { center, activation })
    }

    /// Sweep that transports particles by `target` (un-mollified).
    pub fn sweep(horizon: f64, target: BumpDisplacement, speed: f64) -> Result<Self> {
        if !(speed > 1.0) || !speed.is_finite() {
            return Err(Error::Construction(format!("sweep speed must exceed 1, got {speed}")));
        }
        if 1.0 / speed - target.max_slope() <= 0.0 {
            return Err(Error::Construction(format!(
                "sweep speed {speed} too high for a target with slope {}; exit times would not be monotone",
                target.max_slope()
            )));
        }
        let (x0, x1) = target.support();
        let needed = (x1 - x0) / speed;
        if horizon < needed {
            return Err(Error::Construction(format!("horizon {horizon} too short; the sweep needs T >= {needed}")));
        }
        let delta = (speed - 1.0) * target.amplitude();
        Self::checked(horizon, delta, ScheduleShape::Sweep { target, speed })
    }

    fn checked(horizon: f64, delta: f64, shape: ScheduleShape) -> Result<Self> {
        if !(horizon > 0.0) || !horizon.is_finite() {
            return Err(Error::Construction(format!("horizon must be positive, got {horizon}")));
        }
        let sched = Self { horizon, delta, shape };
        sched.check_invariants()?;
        Ok(sched)
    }

    fn sample_times(&self) -> Vec<f64> {
        let mut ts: Vec<f64> = (0..=INVARIANT_SAMPLES).map(|k| self.horizon * k as f64 / INVARIANT_SAMPLES as f64).collect();
        ts.extend(self.time_breakpoints());
        ts
    }

    fn check_invariants(&self) -> Result<()> {
        for t in self.sample_times() {
            let (f, g) = (self.f(t), self.g(t));
            if !(f <= g) {
                return Err(Error::Construction(format!("f > g at t = {t}")));
            }
            if f < g && f < 1.0 - 1e-12 {
                return Err(Error::Construction(format!("active interval [{f}, {g}] at t = {t} reaches below 1")));
            }
        }
        Ok(())
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn shape(&self) -> &ScheduleShape {
        &self.shape
    }

    /// Same schedule family with another squeeze parameter. For sweeps the
    /// target amplitude is rescaled accordingly.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        match &self.shape {
            ScheduleShape::Squeeze { center, activation } => {
                Self::new(self.horizon, center.clone(), delta, activation.clone())
            }
            ScheduleShape::Sweep { target, speed } => {
                let (x0, x1) = target.support();
                let amp = delta / (speed - 1.0);
                Self::sweep(self.horizon, BumpDisplacement::new(amp, x0, x1)?, *speed)
            }
        }
    }

    /// Point of the target support whose exit time is `t` (sweeps only).
    fn sweep_source(target: &BumpDisplacement, speed: f64, t: f64) -> f64 {
        let (x0, x1) = target.support();
        let free = x0 + speed * t;
        if free <= x0 || t >= (x1 - x0) / speed {
            return free;
        }
        // (x - x0) / speed + d(x) = t is increasing in x on [x0, x1]
        let phi = |x: f64| (x - x0) / speed + target.displacement(x) - t;
        let (mut lo, mut hi) = (x0, x1);
        let mut x = free.clamp(x0, x1);
        for _ in 0..100 {
            let r = phi(x);
            if r == 0.0 {
                return x;
            }
            if r < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            let slope = 1.0 / speed + target.derivative(x);
            let mut next = x - r / slope;
            if !(next > lo && next < hi) {
                next = 0.5 * (lo + hi);
            }
            if (next - x).abs() <= 1e-15 * x.abs() || hi - lo <= 1e-15 * x.abs() {
                return next;
            }
            x = next;
        }
        x
    }

    pub fn f(&self, t: f64) -> f64 {
        match &self.shape {
            ScheduleShape::Squeeze { center, activation } => center.eval(t) - 0.5 * self.delta * activation.eval(t),
            ScheduleShape::Sweep { target, speed } => {
                let x = Self::sweep_source(target, *speed, t);
                x + target.displacement(x)
            }
        }
    }

    pub fn g(&self, t: f64) -> f64 {
        match &self.shape {
            ScheduleShape::Squeeze { center, activation } => center.eval(t) + 0.5 * self.delta * activation.eval(t),
            ScheduleShape::Sweep { target, speed } => target.support().0 + speed * t,
        }
    }

    pub fn h(&self, t: f64) -> f64 {
        match &self.shape {
            ScheduleShape::Squeeze { center, .. } => center.eval(t),
            ScheduleShape::Sweep { .. } => 0.5 * (self.f(t) + self.g(t)),
        }
    }

    pub fn a(&self, t: f64) -> f64 {
        match &self.shape {
            ScheduleShape::Squeeze { activation, .. } => activation.eval(t),
            ScheduleShape::Sweep { .. } if self.delta > 0.0 => (self.g(t) - self.f(t)) / self.delta,
            ScheduleShape::Sweep { .. } => 0.0,
        }
    }

    pub fn f_dot(&self, t: f64) -> f64 {
        match &self.shape {
            ScheduleShape::Squeeze { center, activation } => center.derivative() - 0.5 * self.delta * activation.derivative(t),
            ScheduleShape::Sweep { target, speed } => {
                let x = Self::sweep_source(target, *speed, t);
                let d1 = target.derivative(x);
                (1.0 + d1) / (1.0 / speed + d1)
            }
        }
    }

    pub fn g_dot(&self, t: f64) -> f64 {
        match &self.shape {
            ScheduleShape::Squeeze { center, activation } => center.derivative() + 0.5 * self.delta * activation.derivative(t),
            ScheduleShape::Sweep { speed, .. } => *speed,
        }
    }

    pub fn width(&self, t: f64) -> f64 {
        match &self.shape {
            ScheduleShape::Squeeze { activation, .. } => self.delta * activation.eval(t),
            ScheduleShape::Sweep { .. } => (self.g(t) - self.f(t)).max(0.0),
        }
    }

    /// `sup_t (g - f)`; every activation peaks at 1.
    pub fn max_width(&self) -> f64 {
        self.delta
    }

    /// Points in `[0, T]` where the endpoints are not analytic, with both ends.
    pub fn time_breakpoints(&self) -> Vec<f64> {
        let inner = match &self.shape {
            ScheduleShape::Squeeze { activation, .. } => activation.breakpoints(),
            ScheduleShape::Sweep { target, speed } => {
                let (x0, x1) = target.support();
                vec![(x1 - x0) / speed]
            }
        };
        let mut b = vec![0.0, self.horizon];
        b.extend(inner.into_iter().filter(|&t| t > 0.0 && t < self.horizon));
        b.sort_by(f64::total_cmp);
        b.dedup();
        b
    }

    /// `[min_t f, max_t g]` over the active times, or `None` if never active.
    pub fn swept_band(&self) -> Option<(f64, f64)> {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for t in self.sample_times() {
            if self.width(t) > 0.0 {
                lo = lo.min(self.f(t));
                hi = hi.max(self.g(t));
            }
        }
        (lo <= hi).then_some((lo, hi))
    }

    pub fn check_time(&self, t: f64) -> Result<()> {
        let slack = 1e-12 * self.horizon;
        if t >= -slack && t <= self.horizon + slack {
            Ok(())
        } else {
            Err(Error::domain("schedule", format!("t = {t} outside [0, {}]", self.horizon)))
        }
    }
}

pub fn default_schedule(horizon: f64, center: CenterPath, delta: f64, activation: Activation) -> Result<Schedule> {
    Schedule::new(horizon, center, delta, activation)
}

/// The mollified moving indicator and its radial extension.
#[derive(Debug, Clone)]
pub struct MollifiedField {
    pub schedule: Schedule,
    pub mollifier: MollifierSpec,
    pub dim: Dimension,
}

impl MollifiedField {
    pub fn new(schedule: Schedule, mollifier: MollifierSpec, dim: Dimension) -> Self {
        Self { schedule, mollifier, dim }
    }

    /// `u(t, x)` without the time check; for inner loops.
    pub fn profile(&self, t: f64, x: f64) -> f64 {
        let f = self.schedule.f(t);
        let g = self.schedule.g(t);
        if !(g > f) {
            return 0.0;
        }
        let v = self.mollifier.cdf(x - f) - self.mollifier.cdf(x - g);
        v.max(0.0)
    }

    /// `[f(t) - eps, g(t) + eps]`.
    pub fn support_band(&self, t: f64) -> (f64, f64) {
        let e = self.mollifier.eps();
        (self.schedule.f(t) - e, self.schedule.g(t) + e)
    }

    pub fn field_eval_1d(&self, t: f64, x: f64) -> Result<f64> {
        self.schedule.check_time(t)?;
        Ok(self.profile(t, x))
    }

    pub fn field_eval_nd(&self, t: f64, x: &[f64]) -> Result<Vec<f64>> {
        self.schedule.check_time(t)?;
        if x.len() != self.dim.get() {
            return Err(Error::InvalidInput(format!("point has {} coordinates, field lives in R^{}", x.len(), self.dim.get())));
        }
        let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
        let mut out = vec![0.0; x.len()];
        out[0] = self.profile(t, r);
        Ok(out)
    }
}

pub fn field_eval_1d(fld: &MollifiedField, t: f64, x: f64) -> Result<f64> {
    fld.field_eval_1d(t, x)
}

pub fn field_eval_nd(fld: &MollifiedField, t: f64, x: &[f64]) -> Result<Vec<f64>> {
    fld.field_eval_nd(t, x)
}

/// A displacement profile `phi(x) = x + d(x)` on the line.
pub trait Displacement: Sync {
    fn displacement(&self, x: f64) -> f64;
    /// Closed interval outside of which `d = 0`.
    fn support(&self) -> (f64, f64);
}

/// `d(x) = amplitude * B((x - start) / (end - start))` with the smooth bump
/// `B(u) = exp(1 - 1 / (1 - (2u - 1)^2))`, `max B = B(1/2) = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpDisplacement {
    amplitude: f64,
    start: f64,
    end: f64,
}

fn unit_bump(u: f64) -> f64 {
    let v = 2.0 * u - 1.0;
    let q = 1.0 - v * v;
    if q <= 0.0 {
        0.0
    } else {
        (1.0 - 1.0 / q).exp()
    }
}

fn unit_bump_dot(u: f64) -> f64 {
    let v = 2.0 * u - 1.0;
    let q = 1.0 - v * v;
    if q <= 0.0 {
        0.0
    } else {
        unit_bump(u) * (-4.0 * v / (q * q))
    }
}

impl BumpDisplacement {
    pub fn new(amplitude: f64, start: f64, end: f64) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::InvalidInput(format!("displacement amplitude must be >= 0 so that phi(x) >= x, got {amplitude}")));
        }
        if !(start >= 1.0) || !(end > start) || !end.is_finite() {
            return Err(Error::InvalidInput(format!("displacement support must satisfy 1 <= start < end, got [{start}, {end}]")));
        }
        let me = Self { amplitude, start, end };
        let slope = me.max_slope();
        if 1.0 - slope <= 0.0 {
            return Err(Error::InvalidInput(format!("phi is not a diffeomorphism: min phi' = {}", 1.0 - slope)));
        }
        Ok(me)
    }

    /// `sup |d'|`, sampled.
    pub fn max_slope(&self) -> f64 {
        let w = self.end - self.start;
        (1..4000).map(|k| unit_bump_dot(k as f64 / 4000.0).abs()).fold(0.0, f64::max) * self.amplitude / w
    }

    pub fn amplitude(&self) -> f64 {
        self.amplitude
    }

    pub fn derivative(&self, x: f64) -> f64 {
        let w = self.end - self.start;
        self.amplitude * unit_bump_dot((x - self.start) / w) / w
    }
}

impl Displacement for BumpDisplacement {
    fn displacement(&self, x: f64) -> f64 {
        self.amplitude * unit_bump((x - self.start) / (self.end - self.start))
    }

    fn support(&self) -> (f64, f64) {
        (self.start, self.end)
    }
}

/// Endpoint at `T` of the un-mollified transport `x' = 1_[f(t), g(t)](x)`.
///
/// Valid for sweeping schedules: `g` increasing and `f' > 1` on the active
/// set, so a particle is picked up once at the front and released at the back.
pub fn transport_endpoint(schedule: &Schedule, x: f64) -> f64 {
    let horizon = schedule.horizon();
    let (g0, g1) = (schedule.g(0.0), schedule.g(horizon));
    if x < g0 || x > g1 {
        return x;
    }
    let t_in = bisect(|t| schedule.g(t) - x, 0.0, horizon);
    let rest = horizon - t_in;
    if schedule.f(t_in) >= x {
        return x;
    }
    if schedule.f(horizon) - (x + rest) < 0.0 {
        return x + rest;
    }
    let tau = bisect(|tau| schedule.f(t_in + tau) - (x + tau), 0.0, rest);
    x + tau
}

/// Root of an increasing function with `phi(lo) <= 0 <= phi(hi)`.
fn bisect(phi: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if phi(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[derive(Debug, Clone)]
pub struct SynthesizedSchedule {
    pub schedule: Schedule,
    /// `sup_x |endpoint(x) - phi(x)|` of the un-mollified transport.
    pub residual: f64,
}

/// Samples for the synthesis residual.
const RESIDUAL_SAMPLES: usize = 2000;

/// Largest residual accepted from [`synthesize_schedule`].
pub const SYNTHESIS_TOLERANCE: f64 = 1e-3;

/// Build a schedule whose transport endpoint reproduces `phi`.
///
/// The front moves at `speed > 1`. A particle picked up at time `t_in(x)`
/// travels at unit speed until the back edge releases it at `t_in(x) + d(x)`,
/// so the back edge is `f(t) = phi(x*(t))` with `x*` the particle released at
/// `t`. Sweeping faster than the particles is what keeps `f' > 1`.
pub fn synthesize_schedule(target: &BumpDisplacement, horizon: f64, speed: f64) -> Result<SynthesizedSchedule> {
    let (x0, x1) = target.support();
    if target.amplitude() == 0.0 {
        let schedule = Schedule::new(horizon, CenterPath::Constant { h0: x0 }, 0.0, Activation::Constant)?;
        return Ok(SynthesizedSchedule { schedule, residual: 0.0 });
    }
    let schedule = Schedule::sweep(horizon, *target, speed)?;
    let residual = transport_residual(&schedule, target, x0, x1);
    if residual > SYNTHESIS_TOLERANCE {
        return Err(Error::Synthesis { residual });
    }
    Ok(SynthesizedSchedule { schedule, residual })
}

/// `sup |transport_endpoint(x) - phi(x)|` on a padded sample of `[x0, x1]`.
pub fn transport_residual(schedule: &Schedule, target: &dyn Displacement, x0: f64, x1: f64) -> f64 {
    let pad = 0.1 * (x1 - x0);
    (0..=RESIDUAL_SAMPLES)
        .map(|k| {
            let x = x0 - pad + (x1 - x0 + 2.0 * pad) * k as f64 / RESIDUAL_SAMPLES as f64;
            (transport_endpoint(schedule, x) - x - target.displacement(x)).abs()
        })
        .fold(0.0, f64::max)
}
