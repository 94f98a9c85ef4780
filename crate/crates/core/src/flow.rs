//! Flows of time-dependent vector fields by adaptive Dormand-Prince 5(4)
//! stepping, endpoint maps, and the checks built on them.

use rayon::prelude::*;
use serde::Serialize;

use crate::construct::{MollifiedField, Schedule};
use crate::radialft::Dimension;
use crate::{Error, Result};

pub const DEFAULT_TOL: f64 = 1e-8;

/// Accepted plus rejected steps allowed per seed.
const MAX_STEPS: usize = 5_000_000;

pub trait VectorField: Sync {
    fn dim(&self) -> usize;

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]);

    /// Times where the field is only piecewise smooth; the stepper stops there.
    fn time_breaks(&self) -> Vec<f64> {
        Vec::new()
    }

    /// Closed time interval the field is defined on, if limited.
    fn time_domain(&self) -> Option<(f64, f64)> {
        None
    }

    /// Largest step from `(t, x)` that cannot skip a feature of the field
    /// entirely; error control alone is blind to what no stage samples.
    fn step_limit(&self, _t: f64, _x: &[f64]) -> f64 {
        f64::INFINITY
    }
}

/// Step cap for a band `[lo, hi]` whose edges move at most at `speed`: the
/// band may not reach a particle, or cross one, within a single step.
fn band_step_limit(r: f64, lo: f64, hi: f64, speed: f64) -> f64 {
    let rate = speed + 1.0;
    let crossing = 0.5 * (hi - lo).max(0.0) / rate;
    let gap = if r < lo { lo - r } else if r > hi { r - hi } else { 0.0 };
    (0.5 * gap / rate).max(crossing)
}

fn edge_speed(schedule: &Schedule, t: f64) -> f64 {
    // twice the current speed, as headroom for the step ahead
    2.0 * schedule.f_dot(t).abs().max(schedule.g_dot(t).abs())
}

/// The mollified moving indicator. In one dimension the field is `u(t, x)`;
/// in `R^n` it is `(u(t, |x|), 0, ..., 0)`.
impl VectorField for MollifiedField {
    fn dim(&self) -> usize {
        self.dim.get()
    }

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let r = if x.len() == 1 { x[0] } else { x.iter().map(|v| v * v).sum::<f64>().sqrt() };
        out.fill(0.0);
        out[0] = self.profile(t, r);
    }

    fn time_breaks(&self) -> Vec<f64> {
        self.schedule.time_breakpoints()
    }

    fn time_domain(&self) -> Option<(f64, f64)> {
        Some((0.0, self.schedule.horizon()))
    }

    fn step_limit(&self, t: f64, x: &[f64]) -> f64 {
        let (lo, hi) = self.support_band(t);
        band_step_limit(radial(x), lo, hi, edge_speed(&self.schedule, t))
    }
}

/// `u(t, x) = 1_[f(t), g(t)](x)` on the line, without mollification.
#[derive(Debug, Clone)]
pub struct TransportField(pub Schedule);

impl VectorField for TransportField {
    fn dim(&self) -> usize {
        1
    }

    fn eval(&self, t: f64, x: &[f64], out: &mut [f64]) {
        let (f, g) = (self.0.f(t), self.0.g(t));
        out[0] = if g > f && x[0] >= f && x[0] <= g { 1.0 } else { 0.0 };
    }

    fn time_breaks(&self) -> Vec<f64> {
        self.0.time_breakpoints()
    }

    fn time_domain(&self) -> Option<(f64, f64)> {
        Some((0.0, self.0.horizon()))
    }

    fn step_limit(&self, t: f64, x: &[f64]) -> f64 {
        band_step_limit(x[0], self.0.f(t), self.0.g(t), edge_speed(&self.0, t))
    }
}

/// Spatially and temporally constant velocity.
#[derive(Debug, Clone)]
pub struct ConstantField(pub Vec<f64>);

impl VectorField for ConstantField {
    fn dim(&self) -> usize {
        self.0.len()
    }

    fn eval(&self, _t: f64, _x: &[f64], out: &mut [f64]) {
        out.copy_from_slice(&self.0);
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Trajectory {
    pub seeds: Vec<Vec<f64>>,
    pub times: Vec<f64>,
    /// `states[seed][time]`.
    pub states: Vec<Vec<Vec<f64>>>,
    pub tol: f64,
    /// Accepted steps over all seeds.
    pub steps: usize,
}

impl Trajectory {
    pub fn endpoints(&self) -> Vec<Vec<f64>> {
        self.states.iter().map(|s| s.last().cloned().unwrap_or_default()).collect()
    }
}

// Dormand-Prince 5(4) tableau
const C: [f64; 7] = [0.0, 0.2, 0.3, 0.8, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [0.2, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

struct Stepper<'a> {
    field: &'a dyn VectorField,
    tol: f64,
    k: [Vec<f64>; 7],
    stage: Vec<f64>,
    next: Vec<f64>,
    steps: usize,
    attempts: usize,
    h: f64,
}

impl<'a> Stepper<'a> {
    fn new(field: &'a dyn VectorField, tol: f64, h0: f64) -> Self {
        let n = field.dim();
        Self {
            field,
            tol,
            k: std::array::from_fn(|_| vec![0.0; n]),
            stage: vec![0.0; n],
            next: vec![0.0; n],
            steps: 0,
            attempts: 0,
            h: h0,
        }
    }

    /// Advance `y` from `t0` to `t1`, where the field is smooth in between.
    fn advance(&mut self, y: &mut [f64], t0: f64, t1: f64) -> Result<()> {
        let n = y.len();
        let mut t = t0;
        self.field.eval(t, y, &mut self.k[0]);
        let floor = 1e-14 * t1.abs().max(1.0);
        while t < t1 {
            let mut h = self.h.min(self.field.step_limit(t, y)).min(t1 - t);
            let last = h >= t1 - t;
            if h < floor && !last {
                return Err(Error::Stiffness { t, h });
            }
            self.attempts += 1;
            if self.attempts > MAX_STEPS {
                return Err(Error::Stiffness { t, h });
            }
            for s in 1..7 {
                for i in 0..n {
                    let mut acc = 0.0;
                    for j in 0..s {
                        acc += A[s][j] * self.k[j][i];
                    }
                    self.stage[i] = y[i] + h * acc;
                }
                let (_, rest) = self.k.split_at_mut(s);
                self.field.eval(t + C[s] * h, &self.stage, &mut rest[0]);
            }
            // stage 6 is the 5th-order solution
            self.next.copy_from_slice(&self.stage);
            let mut err: f64 = 0.0;
            for i in 0..n {
                let mut e = 0.0;
                for j in 0..7 {
                    e += E[j] * self.k[j][i];
                }
                err = err.max((h * e).abs());
            }
            // error per unit step: global error stays proportional to tol
            let ratio = err / (self.tol * h);
            let factor = if ratio == 0.0 { 5.0 } else { (0.9 * ratio.powf(-0.25)).clamp(0.2, 5.0) };
            if ratio <= 1.0 {
                t = if last { t1 } else { t + h };
                y.copy_from_slice(&self.next);
                self.k.swap(0, 6);
                self.steps += 1;
                if !last {
                    self.h = h * factor;
                }
            } else {
                h *= factor.min(0.9);
                self.h = h;
            }
        }
        Ok(())
    }
}

fn stop_times(field: &dyn VectorField, times: &[f64]) -> Vec<f64> {
    let (lo, hi) = (times[0], times[times.len() - 1]);
    let mut stops: Vec<f64> = times.to_vec();
    stops.extend(field.time_breaks().into_iter().filter(|&b| b > lo && b < hi));
    stops.sort_by(f64::total_cmp);
    stops.dedup();
    stops
}

fn validate(field: &dyn VectorField, seeds: &[Vec<f64>], times: &[f64], tol: f64) -> Result<()> {
    if !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("ODE tolerance must be positive, got {tol}")));
    }
    if times.is_empty() || times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidInput("sample times must be finite and strictly increasing".into()));
    }
    if let Some((lo, hi)) = field.time_domain() {
        let slack = 1e-12 * (hi - lo).abs().max(1.0);
        if times[0] < lo - slack || times[times.len() - 1] > hi + slack {
            return Err(Error::InvalidInput(format!("sample times leave the field's time domain [{lo}, {hi}]")));
        }
    }
    let n = field.dim();
    if let Some(bad) = seeds.iter().find(|s| s.len() != n || s.iter().any(|v| !v.is_finite())) {
        return Err(Error::InvalidInput(format!("seed {bad:?} is not a finite point of R^{n}")));
    }
    Ok(())
}

/// Flow every seed through the sample times; `states[i][0]` is seed `i` at
/// `times[0]`.
pub fn integrate_sampled(field: &dyn VectorField, seeds: &[Vec<f64>], times: &[f64], tol: f64) -> Result<Trajectory> {
    validate(field, seeds, times, tol)?;
    let stops = stop_times(field, times);
    let span = times[times.len() - 1] - times[0];
    let h0 = (0.01 * span).max(1e-6);
    let per_seed: Vec<(Vec<Vec<f64>>, usize)> = seeds
        .par_iter()
        .map(|seed| {
            let mut stepper = Stepper::new(field, tol, h0);
            let mut y = seed.clone();
            let mut out = Vec::with_capacity(times.len());
            out.push(y.clone());
            let mut sample = 1;
            for w in stops.windows(2) {
                stepper.advance(&mut y, w[0], w[1])?;
                if sample < times.len() && w[1] == times[sample] {
                    out.push(y.clone());
                    sample += 1;
                }
            }
            Ok((out, stepper.steps))
        })
        .collect::<Result<_>>()?;
    let steps = per_seed.iter().map(|p| p.1).sum();
    Ok(Trajectory {
        seeds: seeds.to_vec(),
        times: times.to_vec(),
        states: per_seed.into_iter().map(|p| p.0).collect(),
        tol,
        steps,
    })
}

/// Flow from `0` to `horizon`.
pub fn integrate(field: &dyn VectorField, seeds: &[Vec<f64>], horizon: f64, tol: f64) -> Result<Trajectory> {
    if !(horizon > 0.0) {
        return Err(Error::InvalidInput(format!("horizon must be positive, got {horizon}")));
    }
    integrate_sampled(field, seeds, &[0.0, horizon], tol)
}

#[derive(Debug, Clone, Serialize)]
pub struct EndpointMap {
    pub seeds: Vec<Vec<f64>>,
    pub images: Vec<Vec<f64>>,
    pub horizon: f64,
    pub tol: f64,
    /// Largest `|image - seed|` over seeds outside the checked band.
    pub fixed_point_error: Option<f64>,
}

impl EndpointMap {
    pub fn max_displacement(&self) -> f64 {
        self.seeds.iter().zip(&self.images).map(|(a, b)| distance(a, b)).fold(0.0, f64::max)
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Radial coordinate used for support bands: `x` on the line, `|x|` above.
fn radial(x: &[f64]) -> f64 {
    if x.len() == 1 {
        x[0]
    } else {
        x.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

/// Band `[min f - eps, max g + eps + T]` outside of which seeds must stay put.
pub fn fixed_point_band(field: &MollifiedField) -> Option<(f64, f64)> {
    let eps = field.mollifier.eps();
    let horizon = field.schedule.horizon();
    field.schedule.swept_band().map(|(lo, hi)| (lo - eps, hi + eps + horizon))
}

/// Endpoint map of a trajectory. One-dimensional maps must be strictly
/// increasing; with `band`, seeds whose radial coordinate lies outside it
/// must be fixed to within `20 tol`.
pub fn endpoint_map(traj: &Trajectory, band: Option<(f64, f64)>) -> Result<EndpointMap> {
    let images = traj.endpoints();
    let horizon = traj.times.last().copied().unwrap_or(0.0) - traj.times.first().copied().unwrap_or(0.0);
    if traj.seeds.first().is_some_and(|s| s.len() == 1) {
        let mut order: Vec<usize> = (0..traj.seeds.len()).collect();
        order.sort_by(|&a, &b| traj.seeds[a][0].total_cmp(&traj.seeds[b][0]));
        for w in order.windows(2) {
            let (a, b) = (w[0], w[1]);
            if traj.seeds[a][0] < traj.seeds[b][0] && !(images[a][0] < images[b][0]) {
                return Err(Error::Diffeomorphism { left: traj.seeds[a][0], right: traj.seeds[b][0] });
            }
        }
    }
    let fixed_point_error = band.map(|(lo, hi)| {
        traj.seeds
            .iter()
            .zip(&images)
            .filter(|(s, _)| {
                let r = radial(s);
                r < lo || r > hi
            })
            .map(|(s, i)| distance(s, i))
            .fold(0.0, f64::max)
    });
    if let Some(err) = fixed_point_error {
        let limit = 20.0 * traj.tol;
        if err > limit {
            return Err(Error::Accuracy { requested: limit, achieved: err });
        }
    }
    Ok(EndpointMap { seeds: traj.seeds.clone(), images, horizon, tol: traj.tol, fixed_point_error })
}

/// `sup_seeds |phi_A(T, x) - phi_B(T, x)|` for two fields on the same seeds.
pub fn eps_drift(a: &dyn VectorField, b: &dyn VectorField, seeds: &[Vec<f64>], horizon: f64, tol: f64) -> Result<f64> {
    let ea = integrate(a, seeds, horizon, tol)?.endpoints();
    let eb = integrate(b, seeds, horizon, tol)?.endpoints();
    Ok(ea.iter().zip(&eb).map(|(x, y)| distance(x, y)).fold(0.0, f64::max))
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductFormRow {
    pub seed: Vec<f64>,
    /// `|(|x|, x_2, ..., x_n) - x|`: the displayed form evaluated at `t = 0`.
    pub initial: f64,
    /// Distance at `T` between the integrated flow and
    /// `(phi_R(T, |x|), x_2, ..., x_n)`.
    pub terminal: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProductFormReport {
    pub rows: Vec<ProductFormRow>,
    pub max_initial: f64,
    pub max_terminal: f64,
}

/// Compare the flow of `(u(t, |x|), 0, ..., 0)` with the product form
/// `(phi_R(t, |x|), x_2, ..., x_n)` built from the line flow.
pub fn product_form_check(field: &MollifiedField, seeds: &[Vec<f64>], tol: f64) -> Result<ProductFormReport> {
    if field.dim.get() < 2 {
        return Err(Error::InvalidInput("the product form needs n >= 2".into()));
    }
    let horizon = field.schedule.horizon();
    let truth = integrate(field, seeds, horizon, tol)?.endpoints();
    let line = MollifiedField::new(field.schedule.clone(), field.mollifier.clone(), Dimension::new(1)?);
    let radii: Vec<Vec<f64>> = seeds.iter().map(|s| vec![radial(s)]).collect();
    let line_ends = integrate(&line, &radii, horizon, tol)?.endpoints();
    let rows: Vec<ProductFormRow> = seeds
        .iter()
        .zip(truth.iter().zip(&line_ends))
        .zip(&radii)
        .map(|((seed, (tru, lend)), r)| {
            let mut at_zero = seed.clone();
            at_zero[0] = r[0];
            let mut at_end = seed.clone();
            at_end[0] = lend[0];
            ProductFormRow { seed: seed.clone(), initial: distance(&at_zero, seed), terminal: distance(&at_end, tru) }
        })
        .collect();
    let max_initial = rows.iter().map(|r| r.initial).fold(0.0, f64::max);
    let max_terminal = rows.iter().map(|r| r.terminal).fold(0.0, f64::max);
    Ok(ProductFormReport { rows, max_initial, max_terminal })
}

/// `count` evenly spaced seeds on `[lo, hi]`.
pub fn seed_line(lo: f64, hi: f64, count: usize) -> Vec<Vec<f64>> {
    match count {
        0 => Vec::new(),
        1 => vec![vec![0.5 * (lo + hi)]],
        _ => (0..count).map(|k| vec![lo + (hi - lo) * k as f64 / (count - 1) as f64]).collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{
        default_schedule, synthesize_schedule, transport_endpoint, Activation, BumpDisplacement, BumpShape, CenterPath,
        Displacement, MollifierSpec,
    };
    use proptest::prelude::*;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn squeeze(delta: f64, eps: f64, n: usize) -> MollifiedField {
        let sched = default_schedule(1.0, CenterPath::Constant { h0: 2.0 }, delta, Activation::Constant).unwrap();
        MollifiedField::new(sched, MollifierSpec::new(BumpShape::Exponential, eps).unwrap(), dim(n))
    }

    fn moving(delta: f64, eps: f64) -> MollifiedField {
        let act = Activation::SmoothBump { start: 0.1, end: 0.9, ramp: 0.2 };
        let sched = default_schedule(1.0, CenterPath::Linear { start: 1.6, speed: 0.8 }, delta, act).unwrap();
        MollifiedField::new(sched, MollifierSpec::new(BumpShape::Exponential, eps).unwrap(), dim(1))
    }

    #[test]
    fn zero_and_constant_fields() {
        let seeds = seed_line(-1.0, 3.0, 9);
        let zero = ConstantField(vec![0.0]);
        let traj = integrate(&zero, &seeds, 2.0, DEFAULT_TOL).unwrap();
        assert_eq!(traj.endpoints(), seeds);
        let one = ConstantField(vec![1.0]);
        let ends = integrate(&one, &seeds, 2.0, DEFAULT_TOL).unwrap().endpoints();
        for (s, e) in seeds.iter().zip(&ends) {
            assert!((e[0] - s[0] - 2.0).abs() < 1e-12);
        }
        let map = endpoint_map(&integrate(&zero, &seeds, 2.0, DEFAULT_TOL).unwrap(), Some((0.0, 0.0))).unwrap();
        assert_eq!(map.max_displacement(), 0.0);
    }

    #[test]
    fn rejects_bad_input() {
        let f = squeeze(0.2, 0.05, 1);
        assert!(integrate(&f, &[vec![1.0]], 2.0, DEFAULT_TOL).is_err());
        assert!(integrate(&f, &[vec![1.0, 2.0]], 1.0, DEFAULT_TOL).is_err());
        assert!(integrate(&f, &[vec![1.0]], 1.0, 0.0).is_err());
        assert!(integrate_sampled(&f, &[vec![1.0]], &[0.0, 0.5, 0.5], DEFAULT_TOL).is_err());
    }

    #[test]
    fn sampled_states_start_at_seeds() {
        let f = moving(0.2, 0.05);
        let seeds = seed_line(1.0, 3.0, 5);
        let traj = integrate_sampled(&f, &seeds, &[0.0, 0.25, 0.5, 1.0], DEFAULT_TOL).unwrap();
        for (s, st) in seeds.iter().zip(&traj.states) {
            assert_eq!(&st[0], s);
            assert_eq!(st.len(), 4);
        }
    }

    #[test]
    fn tolerance_refinement_moves_endpoints_little() {
        let f = moving(0.2, 0.05);
        let seeds = seed_line(1.0, 3.0, 41);
        let a = integrate(&f, &seeds, 1.0, 1e-8).unwrap().endpoints();
        let b = integrate(&f, &seeds, 1.0, 1e-9).unwrap().endpoints();
        let gap = a.iter().zip(&b).map(|(x, y)| (x[0] - y[0]).abs()).fold(0.0, f64::max);
        assert!(gap <= 1e-7, "gap {gap}");
    }

    #[test]
    fn semigroup_property() {
        let f = moving(0.2, 0.05);
        let seeds = seed_line(1.0, 3.0, 21);
        let tol = 1e-8;
        let whole = integrate_sampled(&f, &seeds, &[0.0, 1.0], tol).unwrap().endpoints();
        let half = integrate_sampled(&f, &seeds, &[0.0, 0.5], tol).unwrap().endpoints();
        let rest = integrate_sampled(&f, &half, &[0.5, 1.0], tol).unwrap().endpoints();
        let gap = whole.iter().zip(&rest).map(|(x, y)| (x[0] - y[0]).abs()).fold(0.0, f64::max);
        assert!(gap <= 2.0 * tol, "gap {gap}");
    }

    #[test]
    fn squeeze_endpoints_increase_and_fix_outside() {
        let f = squeeze(0.2, 0.05, 1);
        let band = fixed_point_band(&f).unwrap();
        let seeds = seed_line(0.0, 5.0, 201);
        let traj = integrate(&f, &seeds, 1.0, DEFAULT_TOL).unwrap();
        let map = endpoint_map(&traj, Some(band)).unwrap();
        assert!(map.fixed_point_error.unwrap() <= 20.0 * DEFAULT_TOL);
        assert!(map.max_displacement() > 0.0 && map.max_displacement() <= 1.0);
    }

    #[test]
    fn non_monotone_map_is_rejected() {
        let traj = Trajectory {
            seeds: vec![vec![0.0], vec![1.0]],
            times: vec![0.0, 1.0],
            states: vec![vec![vec![0.0], vec![2.0]], vec![vec![1.0], vec![1.5]]],
            tol: 1e-8,
            steps: 0,
        };
        assert!(matches!(endpoint_map(&traj, None), Err(Error::Diffeomorphism { .. })));
    }

    #[test]
    fn drift_vanishes_for_zero_width() {
        let a = squeeze(0.0, 0.1, 1);
        let b = squeeze(0.0, 0.05, 1);
        let seeds = seed_line(0.0, 4.0, 17);
        assert_eq!(eps_drift(&a, &b, &seeds, 1.0, DEFAULT_TOL).unwrap(), 0.0);
    }

    #[test]
    fn drift_is_converged_in_tolerance() {
        let a = moving(0.2, 0.1);
        let b = moving(0.2, 0.05);
        let seeds = seed_line(1.0, 3.0, 21);
        let d1 = eps_drift(&a, &b, &seeds, 1.0, 1e-8).unwrap();
        let d2 = eps_drift(&a, &b, &seeds, 1.0, 1e-10).unwrap();
        assert!((d1 - d2).abs() <= 1e-6, "{d1} vs {d2}");
    }

    #[test]
    fn product_form_on_and_off_axis() {
        let f = squeeze(0.2, 0.05, 2);
        let on_axis: Vec<Vec<f64>> = (0..9).map(|k| vec![1.5 + 0.125 * k as f64, 0.0]).collect();
        let rep = product_form_check(&f, &on_axis, DEFAULT_TOL).unwrap();
        assert_eq!(rep.max_initial, 0.0);
        assert!(rep.max_terminal <= 1e-7, "{}", rep.max_terminal);
        let rep = product_form_check(&f, &[vec![0.0, 1.7]], DEFAULT_TOL).unwrap();
        assert!((rep.rows[0].initial - 1.7).abs() < 1e-15);
        assert!(product_form_check(&squeeze(0.2, 0.05, 1), &on_axis, DEFAULT_TOL).is_err());
    }

    #[test]
    fn mollified_flow_reproduces_synthesized_target() {
        let target = BumpDisplacement::new(0.05, 1.2, 1.8).unwrap();
        let syn = synthesize_schedule(&target, 1.0, 2.0).unwrap();
        let seeds = seed_line(1.0, 2.0, 51);
        let field = MollifiedField::new(syn.schedule.clone(), MollifierSpec::new(BumpShape::Exponential, 1e-4).unwrap(), dim(1));
        let residual = |tol: f64| {
            let traj = integrate(&field, &seeds, 1.0, tol).unwrap();
            let map = endpoint_map(&traj, None).unwrap();
            seeds.iter().zip(&map.images).map(|(s, e)| (e[0] - s[0] - target.displacement(s[0])).abs()).fold(0.0, f64::max)
        };
        let (coarse, fine) = (residual(1e-8), residual(1e-9));
        assert!(coarse <= 1e-3 && fine <= 1e-3);
        assert!((coarse - fine).abs() <= 1e-6, "{coarse} vs {fine}");
        for s in &seeds {
            let want = s[0] + target.displacement(s[0]);
            assert!((transport_endpoint(&syn.schedule, s[0]) - want).abs() <= 1e-3);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(12))]

        #[test]
        fn speed_bound_and_monotone(delta in 0.0..0.3f64, eps in 0.02..0.2f64, x in 0.0..4.0f64) {
            let f = moving(delta, eps);
            let seeds = vec![vec![x], vec![x + 1e-3]];
            let traj = integrate(&f, &seeds, 1.0, DEFAULT_TOL).unwrap();
            let map = endpoint_map(&traj, None).unwrap();
            for (s, e) in seeds.iter().zip(&map.images) {
                prop_assert!(e[0] - s[0] >= -1e-12 && e[0] - s[0] <= 1.0 + 1e-12);
            }
        }
    }
}
