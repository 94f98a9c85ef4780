//! Special functions on the real line: log-Gamma, Bessel functions of the
//! first kind of nonnegative real order, and the regularized Gauss
//! hypergeometric function on `[0, 1]`.
//!
//! Everything here is plain `f64` arithmetic with no external dependencies.

use std::f64::consts::PI;

use crate::{Error, Result};

const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_741_780_329_736_405_6;

/// Stirling coefficients `B_{2k} / (2k (2k - 1))`, k = 1..=8.
const STIRLING: [f64; 8] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
    -3617.0 / 122_400.0,
];

/// Below this argument the Stirling series is entered through upward recurrence.
const STIRLING_MIN: f64 = 15.0;

/// `ln Gamma(x)` for `x > 0`.
///
/// Stirling series for `x >= 15`, upward recurrence below that.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("ln_gamma", format!("x must be positive and finite, got {x}")));
    }
    Ok(ln_gamma_pos(x))
}

pub(crate) fn ln_gamma_pos(x: f64) -> f64 {
    if x >= STIRLING_MIN {
        return stirling(x);
    }
    let mut shifted = x;
    let mut prod = 1.0;
    while shifted < STIRLING_MIN {
        prod *= shifted;
        shifted += 1.0;
    }
    stirling(shifted) - prod.ln()
}

fn stirling(x: f64) -> f64 {
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut corr = 0.0;
    for c in STIRLING.iter().rev() {
        corr = corr * inv2 + c;
    }
    (x - 0.5) * x.ln() - x + LN_SQRT_2PI + corr * inv
}

/// `sin(pi x)` with exact zeros at the integers.
pub(crate) fn sin_pi(x: f64) -> f64 {
    let r = x - 2.0 * (x / 2.0).round();
    if r == 0.0 || r.abs() == 1.0 {
        return 0.0;
    }
    if r > 0.5 {
        (PI * (1.0 - r)).sin()
    } else if r < -0.5 {
        -(PI * (1.0 + r)).sin()
    } else {
        (PI * r).sin()
    }
}

/// `Gamma(x)` on the real line. Poles (nonpositive integers) give a pole error.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() {
        return Err(Error::domain("gamma", format!("non-finite argument {x}")));
    }
    if x <= 0.0 && x == x.round() {
        return Err(Error::pole("gamma", format!("Gamma has a pole at {x}")));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked(x: f64) -> f64 {
    if x > 0.0 {
        ln_gamma_pos(x).exp()
    } else {
        // reflection
        PI / (sin_pi(x) * ln_gamma_pos(1.0 - x).exp())
    }
}

/// `1 / Gamma(x)`, entire: zero at the poles of Gamma.
pub fn rgamma(x: f64) -> f64 {
    if x <= 0.0 && x == x.round() {
        return 0.0;
    }
    if x > 0.0 {
        (-ln_gamma_pos(x)).exp()
    } else {
        sin_pi(x) * ln_gamma_pos(1.0 - x).exp() / PI
    }
}

/// Nonnegative real order of a Bessel function.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct RealOrder(f64);

impl RealOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if !(nu >= 0.0) || !nu.is_finite() {
            return Err(Error::domain("RealOrder", format!("order must be finite and >= 0, got {nu}")));
        }
        Ok(Self(nu))
    }

    /// The order `k / 2`.
    pub fn half(k: u32) -> Self {
        Self(f64::from(k) / 2.0)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Below this argument the ascending series is used.
const BESSEL_SERIES_MAX: f64 = 8.0;
/// Hankel asymptotics are used for `x >= BESSEL_ASYMPTOTIC_MIN + nu^2 / 2`.
const BESSEL_ASYMPTOTIC_MIN: f64 = 25.0;

/// `J_nu(x)` for `nu >= 0`, `x >= 0`.
///
/// Three regimes: the ascending series for `x <= 8`, Hankel's asymptotic
/// expansion for `x >= 25 + nu^2/2`, and Miller's backward recurrence in between.
pub fn bessel_j(order: RealOrder, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain("bessel_j", format!("x must be finite and >= 0, got {x}")));
    }
    Ok(bessel_j_raw(order.0, x))
}

pub(crate) fn bessel_j_raw(nu: f64, x: f64) -> f64 {
    if x == 0.0 {
        return if nu == 0.0 { 1.0 } else { 0.0 };
    }
    if x <= BESSEL_SERIES_MAX {
        bessel_series(nu, x)
    } else if x >= BESSEL_ASYMPTOTIC_MIN + 0.5 * nu * nu {
        bessel_hankel(nu, x)
    } else {
        bessel_miller(nu, x)
    }
}

fn bessel_series(nu: f64, x: f64) -> f64 {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = (nu * half.ln() - ln_gamma_pos(nu + 1.0)).exp();
    let mut sum = term;
    for k in 1..200 {
        let kf = k as f64;
        term *= q / (kf * (kf + nu));
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
    }
    sum
}

/// Hankel's expansion `J = sqrt(2/(pi x)) (P cos w - Q sin w)`,
/// `w = x - (nu/2 + 1/4) pi`.
fn bessel_hankel(nu: f64, x: f64) -> f64 {
    let (p, q) = hankel_pq(nu, x);
    let (cw, sw) = hankel_phase(nu, x);
    (2.0 / (PI * x)).sqrt() * (p * cw - q * sw)
}

/// `(cos w, sin w)` for `w = x - (nu/2 + 1/4) pi`, without forming `w`.
pub(crate) fn hankel_phase(nu: f64, x: f64) -> (f64, f64) {
    let phi = (0.5 * nu + 0.25) * PI;
    let (sx, cx) = x.sin_cos();
    let (sp, cp) = phi.sin_cos();
    (cx * cp + sx * sp, sx * cp - cx * sp)
}

/// Asymptotic series `P(nu, x)`, `Q(nu, x)`, summed until the terms
/// stop decreasing or drop below `1e-17`.
pub(crate) fn hankel_pq(nu: f64, x: f64) -> (f64, f64) {
    let mu = 4.0 * nu * nu;
    let mut p = 1.0;
    let mut q = 0.0;
    let mut term = 1.0_f64;
    let mut prev = f64::INFINITY;
    for k in 1..60 {
        let odd = (2 * k - 1) as f64;
        term *= (mu - odd * odd) / (k as f64 * 8.0 * x);
        let mag = term.abs();
        if mag == 0.0 {
            break;
        }
        if mag > prev {
            break;
        }
        // term_k enters P with sign (-1)^{k/2} for even k and Q with (-1)^{(k-1)/2} for odd k
        match k % 4 {
            1 => q += term,
            2 => p -= term,
            3 => q -= term,
            _ => p += term,
        }
        if mag < 1e-17 {
            break;
        }
        prev = mag;
    }
    (p, q)
}

/// Miller's backward recurrence normalized by
/// `(x/2)^nu0 = sum_k (nu0 + 2k) Gamma(nu0 + k) / k! J_{nu0 + 2k}(x)`.
fn bessel_miller(nu: f64, x: f64) -> f64 {
    let m = nu.floor();
    let nu0 = nu - m;
    let m = m as usize;
    let top = m.max(x.ceil() as usize);
    let mut start = top + 20 + (40.0 * top as f64).sqrt() as usize;
    if start % 2 == 1 {
        start += 1;
    }
    let half_n = start / 2;

    // weights[k] = Gamma(nu0 + k) / k! for k >= 1, weights[0] = Gamma(nu0 + 1)
    let mut weights = vec![0.0; half_n + 1];
    let g1 = ln_gamma_pos(nu0 + 1.0).exp();
    weights[0] = g1;
    if half_n >= 1 {
        weights[1] = g1;
    }
    for k in 1..half_n {
        weights[k + 1] = weights[k] * (nu0 + k as f64) / (k as f64 + 1.0);
    }

    let mut j_next = 0.0; // J_{j+1}
    let mut j_cur = 1e-30; // J_j
    let mut sum = 0.0;
    let mut target = 0.0;
    let mut j = start;
    loop {
        if j == m {
            target = j_cur;
        }
        if j % 2 == 0 {
            let k = j / 2;
            let w = if k == 0 { weights[0] } else { (nu0 + j as f64) * weights[k] };
            sum += w * j_cur;
        }
        if j == 0 {
            break;
        }
        let j_prev = 2.0 * (nu0 + j as f64) / x * j_cur - j_next;
        j_next = j_cur;
        j_cur = j_prev;
        j -= 1;
        if j_cur.abs() > 1e200 {
            j_cur *= 1e-200;
            j_next *= 1e-200;
            sum *= 1e-200;
            target *= 1e-200;
        }
    }
    target * (0.5 * x).powf(nu0) / sum
}

/// Parameters of `F(a, b; c; z)` on `z in [0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HypParams {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub z: f64,
}

impl HypParams {
    pub fn new(a: f64, b: f64, c: f64, z: f64) -> Self {
        Self { a, b, c, z }
    }
}

const HYP_SERIES_MAX_Z: f64 = 0.9;
const HYP_NEAR_INTEGER: f64 = 5e-4;
const HYP_RICHARDSON_SCALE: f64 = 0.03;

/// Regularized Gauss hypergeometric function `F(a,b;c;z) / Gamma(c)` for `z in [0,1]`.
///
/// Direct series for `z <= 0.9`; the `1 - z` connection formula above that;
/// Gauss's closed form at `z = 1` (requires `c - a - b > 0`).
pub fn hyp2f1_reg(p: &HypParams) -> Result<f64> {
    let HypParams { a, b, c, z } = *p;
    if !(0.0..=1.0).contains(&z) {
        return Err(Error::domain("hyp2f1_reg", format!("z must lie in [0, 1], got {z}")));
    }
    hyp2f1_reg_split(a, b, c, z, 1.0 - z)
}

/// As [`hyp2f1_reg`] with `1 - z` supplied separately, so callers that know
/// it in closed form avoid the cancellation in `1 - z`.
pub(crate) fn hyp2f1_reg_split(a: f64, b: f64, c: f64, z: f64, w: f64) -> Result<f64> {
    if ![a, b, c, z, w].iter().all(|v| v.is_finite()) {
        return Err(Error::domain("hyp2f1_reg", "non-finite parameter"));
    }
    let m = c - a - b;
    if w <= 0.0 {
        if m <= 0.0 {
            return Err(Error::pole(
                "hyp2f1_reg",
                format!("z = 1 requires c - a - b > 0, got {m}"),
            ));
        }
        return Ok(gauss_value(a, b, c));
    }
    if a == 0.0 || b == 0.0 || z == 0.0 {
        return Ok(rgamma(c));
    }
    if z <= HYP_SERIES_MAX_Z {
        return series_reg(a, b, c, z);
    }
    if (m - m.round()).abs() < HYP_NEAR_INTEGER {
        // Connection coefficients blow up like 1/sin(pi m); extrapolate in b instead.
        // the w^m factor makes b-derivatives grow like |ln w|^k
        let h = (HYP_RICHARDSON_SCALE / w.ln().abs()).clamp(1e-3, 3e-3);
        let mut avg = [0.0; 3];
        for (i, slot) in avg.iter_mut().enumerate() {
            let step = h * (i + 1) as f64;
            let up = connection(a, b + step, c, w)?;
            let down = connection(a, b - step, c, w)?;
            *slot = 0.5 * (up + down);
        }
        return Ok(1.5 * avg[0] - 0.6 * avg[1] + 0.1 * avg[2]);
    }
    connection(a, b, c, w)
}

/// `Gamma(c-a-b) / (Gamma(c-a) Gamma(c-b))`.
fn gauss_value(a: f64, b: f64, c: f64) -> f64 {
    let m = c - a - b;
    gamma_unchecked(m) * rgamma(c - a) * rgamma(c - b)
}

/// `F = pi/sin(pi m) [ F(a,b;1-m;w)/(G(c-a)G(c-b)) - w^m F(c-a,c-b;1+m;w)/(G(a)G(b)) ]`
/// with all `F` regularized, `m = c - a - b`, `w = 1 - z`.
fn connection(a: f64, b: f64, c: f64, w: f64) -> Result<f64> {
    let m = c - a - b;
    let first = series_reg(a, b, 1.0 - m, w)? * rgamma(c - a) * rgamma(c - b);
    let second = w.powf(m) * series_reg(c - a, c - b, 1.0 + m, w)? * rgamma(a) * rgamma(b);
    Ok(PI / sin_pi(m) * (first - second))
}

/// `sum_k (a)_k (b)_k z^k / (k! Gamma(c + k))`, valid for any real `c`.
fn series_reg(a: f64, b: f64, c: f64, z: f64) -> Result<f64> {
    let (k0, mut term) = if c <= 0.0 && c == c.round() {
        // Gamma(c + k) is infinite for k <= -c: first surviving index is 1 - c.
        let k0 = (1.0 - c) as usize;
        let mut t = 1.0;
        for k in 0..k0 {
            let kf = k as f64;
            t *= (a + kf) * (b + kf) * z / (kf + 1.0);
        }
        (k0, t)
    } else {
        (0, rgamma(c))
    };
    let mut sum = term;
    let mut small = 0;
    for k in k0..20_000 {
        let kf = k as f64;
        term *= (a + kf) * (b + kf) / ((kf + 1.0) * (c + kf)) * z;
        sum += term;
        if term == 0.0 {
            return Ok(sum);
        }
        let past_hump = kf > (a.abs() + b.abs() + c.abs());
        if past_hump && term.abs() <= 1e-17 * sum.abs() {
            small += 1;
            if small >= 3 {
                return Ok(sum);
            }
        } else {
            small = 0;
        }
    }
    Err(Error::Accuracy { requested: 1e-17, achieved: (term / sum).abs() })
}
