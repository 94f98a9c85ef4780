//! Quadrature: adaptive Gauss-Kronrod (10/21), Gauss-Legendre rules, and
//! asymptotic tails of power-law and oscillatory integrands.

use std::collections::BinaryHeap;

use crate::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// One 21-point Kronrod panel on `[a, b]`; returns `(integral, error estimate)`.
pub fn gk21<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = fc.abs() * WGK[10];
    let mut fv = [(0.0, 0.0); 10];
    for (j, slot) in fv.iter_mut().enumerate() {
        let dx = half * XGK[j];
        let f1 = f(center - dx);
        let f2 = f(center + dx);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
        *slot = (f1, f2);
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for (j, (f1, f2)) in fv.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let result = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    (result, err)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadResult {
    pub value: f64,
    pub abs_err: f64,
    pub intervals: usize,
}

/// Tolerances and budget of the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-9, rel_tol: 1e-12, max_intervals: 200_000 }
    }
}

impl QuadOptions {
    pub fn abs(abs_tol: f64) -> Self {
        Self { abs_tol, ..Self::default() }
    }
}

struct Panel {
    a: f64,
    b: f64,
    value: f64,
    err: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.err == other.err
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.err.total_cmp(&other.err)
    }
}

/// Globally adaptive bisection on `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, opts: QuadOptions) -> Result<QuadResult> {
    integrate_panels(f, &[a, b], opts)
}

/// Globally adaptive bisection starting from the partition given by `breaks`
/// (sorted, at least two points). The panel with the largest error estimate
/// is split until the summed estimate meets `max(abs_tol, rel_tol |I|)`.
pub fn integrate_panels<F: Fn(f64) -> f64>(f: F, breaks: &[f64], opts: QuadOptions) -> Result<QuadResult> {
    if breaks.len() < 2 {
        return Err(Error::InvalidInput("quadrature needs at least two break points".into()));
    }
    let mut heap = BinaryHeap::with_capacity(breaks.len() * 2);
    let mut total = 0.0;
    let mut total_err = 0.0;
    for w in breaks.windows(2) {
        if w[1] <= w[0] {
            continue;
        }
        let (value, err) = gk21(&f, w[0], w[1]);
        total += value;
        total_err += err;
        heap.push(Panel { a: w[0], b: w[1], value, err });
    }
    while total_err > opts.abs_tol.max(opts.rel_tol * total.abs()) {
        if heap.len() >= opts.max_intervals {
            return Err(Error::Accuracy { requested: opts.abs_tol, achieved: total_err });
        }
        let Some(worst) = heap.pop() else { break };
        let mid = 0.5 * (worst.a + worst.b);
        if mid <= worst.a || mid >= worst.b {
            // cannot bisect further in floating point
            return Err(Error::Accuracy { requested: opts.abs_tol, achieved: total_err });
        }
        let (v1, e1) = gk21(&f, worst.a, mid);
        let (v2, e2) = gk21(&f, mid, worst.b);
        total += v1 + v2 - worst.value;
        total_err += e1 + e2 - worst.err;
        heap.push(Panel { a: worst.a, b: mid, value: v1, err: e1 });
        heap.push(Panel { a: mid, b: worst.b, value: v2, err: e2 });
    }
    let intervals = heap.len();
    let (value, err) = heap
        .into_iter()
        .fold((Neumaier::default(), 0.0), |(mut s, e), p| {
            s.add(p.value);
            (s, e + p.err)
        });
    Ok(QuadResult { value: value.sum(), abs_err: err, intervals })
}

/// Compensated (Neumaier) summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct Neumaier {
    sum: f64,
    comp: f64,
}

impl Neumaier {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn sum(&self) -> f64 {
        self.sum + self.comp
    }
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes by Newton iteration on `P_n`.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre rule needs at least one node");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..n.div_ceil(2) {
            let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(n, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre_with_derivative(n, x);
            dp = if d != 0.0 { d } else { dp };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped onto `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        self.nodes.iter().zip(&self.weights).map(move |(x, w)| (c + h * x, h * w))
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F, a: f64, b: f64) -> f64 {
        let mut acc = Neumaier::default();
        for (x, w) in self.mapped(a, b) {
            acc.add(w * f(x));
        }
        acc.sum()
    }
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// `int_R^inf r^beta dr` for `beta < -1`.
pub fn power_tail(beta: f64, r: f64) -> f64 {
    debug_assert!(beta < -1.0 && r > 0.0);
    r.powf(beta + 1.0) / (-beta - 1.0)
}

/// `int_R^inf r^beta cos(omega r + phase) dr` for `beta < 0`, `omega > 0`,
/// from the integration-by-parts expansion in `1 / (omega R)`.
/// Accurate when `omega R` is large compared with `|beta|`.
pub fn oscillatory_power_tail(beta: f64, omega: f64, phase: f64, r: f64) -> f64 {
    if omega == 0.0 {
        return phase.cos() * power_tail(beta, r);
    }
    let (st, ct) = (omega * r + phase).sin_cos();
    // T_0 = i R^beta e^{i theta} / omega, T_k = T_{k-1} * i (beta - k + 1) / (omega R)
    let scale = r.powf(beta) / omega;
    let (mut re, mut im) = (-st * scale, ct * scale);
    let mut sum = re;
    let mut prev = re.hypot(im);
    for k in 1..200 {
        let factor = (beta - (k as f64 - 1.0)) / (omega * r);
        let (nre, nim) = (-im * factor, re * factor);
        let mag = nre.hypot(nim);
        if mag > prev {
            break;
        }
        re = nre;
        im = nim;
        sum += re;
        if mag < 1e-18 * scale.abs() {
            break;
        }
        prev = mag;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    #[test]
    fn gk21_exact_on_polynomials() {
        let (v, _) = gk21(&|x: f64| x.powi(20) - 3.0 * x, 0.0, 1.0);
        assert_relative_eq!(v, 1.0 / 21.0 - 1.5, max_relative = 1e-14);
    }

    #[test]
    fn adaptive_handles_sqrt_endpoint() {
        let r = integrate(|x: f64| x.sqrt(), 0.0, 1.0, QuadOptions::abs(1e-12)).unwrap();
        assert!((r.value - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn budget_exhaustion_reports_achieved_error() {
        let opts = QuadOptions { abs_tol: 1e-15, rel_tol: 0.0, max_intervals: 4 };
        let err = integrate(|x: f64| (1.0 / x).sin(), 1e-4, 1.0, opts).unwrap_err();
        match err {
            Error::Accuracy { requested, achieved } => {
                assert_eq!(requested, 1e-15);
                assert!(achieved > requested);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn gauss_legendre_weights_and_moments() {
        for n in [1, 2, 5, 16, 64] {
            let gl = GaussLegendre::new(n);
            let total: f64 = gl.weights.iter().sum();
            assert_relative_eq!(total, 2.0, max_relative = 1e-14);
            let deg = 2 * n - 1;
            let got = gl.integrate(|x| x.powi(deg as i32 - 1), -1.0, 1.0);
            let want = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((got - want).abs() < 1e-13, "n={n}: {got} vs {want}");
        }
        let gl = GaussLegendre::new(64);
        assert_relative_eq!(gl.integrate(f64::exp, 0.0, 2.0), 2f64.exp() - 1.0, max_relative = 1e-14);
    }

    #[test]
    fn oscillatory_tail_matches_direct_integration() {
        // int_R^X r^-1.5 cos(3 r + 0.4) dr with the remainder beyond X bounded by X^-1.5/3
        let (beta, omega, phase, r0) = (-1.5, 3.0, 0.4, 40.0);
        let far = 40.0 + 2.0 * PI / omega * 20_000.0;
        let breaks: Vec<f64> = (0..=20_000).map(|k| r0 + (far - r0) * k as f64 / 20_000.0).collect();
        let head = integrate_panels(|r: f64| r.powf(beta) * (omega * r + phase).cos(), &breaks, QuadOptions::abs(1e-13))
            .unwrap()
            .value;
        let rest = oscillatory_power_tail(beta, omega, phase, far);
        let tail = oscillatory_power_tail(beta, omega, phase, r0);
        assert!((head + rest - tail).abs() < 1e-12, "{} vs {}", head + rest, tail);
    }

    #[test]
    fn power_tail_value() {
        assert_relative_eq!(power_tail(-2.0, 4.0), 0.25);
        assert_relative_eq!(oscillatory_power_tail(-2.0, 0.0, 0.0, 4.0), 0.25);
    }
}
