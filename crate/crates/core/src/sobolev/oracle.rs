//! Quadrature oracle for the Weber-Schafheitlin integrals and the annulus
//! seminorm, independent of the hypergeometric closed forms.
//!
//! `int_0^R` is done with Gauss-Kronrod panels of half-oscillation width. The
//! tail `int_R^inf` uses the Hankel expansion
//! `J_nu(c r) ~ sqrt(2 / (pi c)) sum_k A_k c^{-k} r^{-k-1/2} cos(c r - phi + k pi / 2)`,
//! which turns every product of two Bessel factors into a finite sum of
//! `r^beta cos(omega r + theta)` terms with closed-form tails.

use std::f64::consts::PI;

use crate::quad::{integrate_panels, oscillatory_power_tail, QuadOptions};
use crate::radialft::{AnnulusInterval, Dimension};
use crate::specfun::bessel_j_raw;
use crate::{Error, Result};

use super::{surface_volume, NormMethod, NormResult, SobolevOrder};

/// Terms kept from each Hankel series.
const HANKEL_TERMS: usize = 8;

#[derive(Debug, Clone, Copy)]
pub struct OracleOptions {
    pub quad: QuadOptions,
    /// Minimum truncation radius in frequency.
    pub min_cutoff: f64,
}

impl Default for OracleOptions {
    fn default() -> Self {
        Self { quad: QuadOptions { abs_tol: 1e-13, rel_tol: 1e-13, max_intervals: 400_000 }, min_cutoff: 200.0 }
    }
}

/// `sqrt(2 / (pi c)) A_k c^{-k}` for `k < HANKEL_TERMS`.
fn hankel_coefficients(nu: f64, c: f64) -> [f64; HANKEL_TERMS] {
    let mu = 4.0 * nu * nu;
    let mut out = [0.0; HANKEL_TERMS];
    let mut a = (2.0 / (PI * c)).sqrt();
    for (k, slot) in out.iter_mut().enumerate() {
        if k > 0 {
            let odd = (2 * k - 1) as f64;
            a *= (mu - odd * odd) / (8.0 * k as f64 * c);
        }
        *slot = a;
    }
    out
}

/// `int_R^inf r^{2s-1} J_nu(2 pi a r) J_nu(2 pi b r) dr` from the Hankel expansions.
fn product_tail(nu: f64, s: f64, a: f64, b: f64, r: f64) -> f64 {
    let ca = hankel_coefficients(nu, 2.0 * PI * a);
    let cb = hankel_coefficients(nu, 2.0 * PI * b);
    let phi = (0.5 * nu + 0.25) * PI;
    let diff = 2.0 * PI * (a - b);
    let sum = 2.0 * PI * (a + b);
    let mut total = 0.0;
    for (j, &x) in ca.iter().enumerate() {
        for (k, &y) in cb.iter().enumerate() {
            let beta = 2.0 * s - 2.0 - (j + k) as f64;
            let coef = 0.5 * x * y;
            // cos(A)cos(B) = (cos(A - B) + cos(A + B)) / 2
            let theta_diff = (j as f64 - k as f64) * 0.5 * PI;
            let diff_part = if diff >= 0.0 {
                oscillatory_power_tail(beta, diff, theta_diff, r)
            } else {
                oscillatory_power_tail(beta, -diff, -theta_diff, r)
            };
            let theta_sum = -2.0 * phi + (j + k) as f64 * 0.5 * PI;
            total += coef * (diff_part + oscillatory_power_tail(beta, sum, theta_sum, r));
        }
    }
    total
}

fn cutoff(opts: &OracleOptions, a: f64, b: f64) -> f64 {
    let gap = (b - a).abs();
    let mut r = opts.min_cutoff;
    if gap > 0.0 {
        r = r.max(opts.min_cutoff / (2.0 * PI * gap));
    }
    r
}

fn panel_breaks(r: f64, freq: f64) -> Vec<f64> {
    let panels = ((r * 2.0 * freq).ceil() as usize).max(1);
    (0..=panels).map(|k| r * k as f64 / panels as f64).collect()
}

fn check(order: SobolevOrder, a: f64, b: f64) -> Result<()> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::domain("ws_quadrature", format!("radii must be positive, got {a}, {b}")));
    }
    order.require_annulus_range("ws_quadrature")
}

/// Numerical `int_0^inf r^{2s-1} J_{n/2}(2 pi a r) J_{n/2}(2 pi b r) dr`.
pub fn ws_quadrature(dim: Dimension, order: SobolevOrder, a: f64, b: f64, opts: OracleOptions) -> Result<f64> {
    check(order, a, b)?;
    let nu = dim.half();
    let s = order.value();
    let r = cutoff(&opts, a, b);
    let breaks = panel_breaks(r, a.max(b));
    let head = integrate_panels(
        |x| {
            if x == 0.0 {
                return 0.0;
            }
            x.powf(2.0 * s - 1.0) * bessel_j_raw(nu, 2.0 * PI * a * x) * bessel_j_raw(nu, 2.0 * PI * b * x)
        },
        &breaks,
        opts.quad,
    )?;
    Ok(head.value + product_tail(nu, s, a, b, r))
}

/// Seminorm of the annulus indicator by direct quadrature of the squared
/// transform, `Vol(S^{n-1}) int_0^inf r^{2s+n-1} (F 1)(r)^2 dr`.
pub fn annulus_seminorm_quadrature(iv: &AnnulusInterval, dim: Dimension, order: SobolevOrder, opts: OracleOptions) -> Result<f64> {
    if iv.is_empty() {
        return Ok(0.0);
    }
    let (f, g) = (iv.inner(), iv.outer());
    check(order, f, g)?;
    let nu = dim.half();
    let s = order.value();
    let (pf, pg) = (f.powf(nu), g.powf(nu));
    let r = cutoff(&opts, f, g);
    let breaks = panel_breaks(r, g);
    let head = integrate_panels(
        |x| {
            if x == 0.0 {
                return 0.0;
            }
            let d = pg * bessel_j_raw(nu, 2.0 * PI * g * x) - pf * bessel_j_raw(nu, 2.0 * PI * f * x);
            x.powf(2.0 * s - 1.0) * d * d
        },
        &breaks,
        opts.quad,
    )?;
    let tail = pg * pg * product_tail(nu, s, g, g, r) + pf * pf * product_tail(nu, s, f, f, r)
        - 2.0 * pf * pg * product_tail(nu, s, f, g, r);
    Ok(surface_volume(dim) * (head.value + tail))
}

pub fn annulus_hs_norm_quadrature(iv: &AnnulusInterval, dim: Dimension, order: SobolevOrder, opts: OracleOptions) -> Result<NormResult> {
    let l2 = annulus_seminorm_quadrature(iv, dim, SobolevOrder::new(0.0)?, opts)?;
    let semi = annulus_seminorm_quadrature(iv, dim, order, opts)?;
    Ok(NormResult::new(l2, semi, NormMethod::Quadrature))
}
