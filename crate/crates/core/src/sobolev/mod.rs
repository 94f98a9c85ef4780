//! Fractional Sobolev norms `||v||^2 = ||v||_{L^2}^2 + || |xi|^s F v ||_{L^2}^2`.
//!
//! For the annulus indicator the seminorm reduces, in polar coordinates, to
//! `Vol(S^{n-1}) int_0^inf r^{2s-1} (g^{n/2} J(2 pi g r) - f^{n/2} J(2 pi f r))^2 dr`
//! with `J = J_{n/2}`. Expanding the square leaves three Weber-Schafheitlin
//! integrals with closed forms in Gamma and regularized 2F1.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::radialft::{unit_ball_volume, AnnulusInterval, Dimension};
use crate::specfun::{hyp2f1_reg_split, ln_gamma_pos};
use crate::{Error, Result};

mod grid;
pub mod oracle;

pub use grid::{
    equivalence_constant, equivalence_ratio, grid_hs_norm, lattice_zeta, spectral_seminorm_sq, GridOptions, GridSpec, SampledField, Spectrum,
    TailModel,
};

/// Sobolev order `s`, `0 <= s < 1`.
///
/// Closed-form annulus norms additionally need `s < 1/2`, checked where used.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct SobolevOrder(f64);

impl SobolevOrder {
    pub fn new(s: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&s) {
            return Err(Error::InvalidInput(format!("Sobolev order must satisfy 0 <= s < 1, got {s}")));
        }
        Ok(Self(s))
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// Fails with a pole error unless `s < 1/2`.
    pub fn require_annulus_range(self, func: &'static str) -> Result<()> {
        if self.0 < 0.5 {
            Ok(())
        } else {
            Err(Error::pole(func, format!("annulus norms need s < 1/2 (Gamma(1 - 2s) diverges), got s = {}", self.0)))
        }
    }
}

impl TryFrom<f64> for SobolevOrder {
    type Error = Error;
    fn try_from(s: f64) -> Result<Self> {
        Self::new(s)
    }
}

impl From<SobolevOrder> for f64 {
    fn from(s: SobolevOrder) -> f64 {
        s.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ClosedForm,
    Grid,
    Quadrature,
}

impl NormMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            NormMethod::ClosedForm => "closed_form",
            NormMethod::Grid => "grid",
            NormMethod::Quadrature => "quadrature",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormResult {
    pub l2_sq: f64,
    /// `int |xi|^{2s} |F v|^2`.
    pub seminorm_sq: f64,
    pub total_sq: f64,
    pub method: NormMethod,
}

impl NormResult {
    pub fn new(l2_sq: f64, seminorm_sq: f64, method: NormMethod) -> Self {
        let l2_sq = l2_sq.max(0.0);
        let seminorm_sq = seminorm_sq.max(0.0);
        Self { l2_sq, seminorm_sq, total_sq: l2_sq + seminorm_sq, method }
    }

    pub fn zero(method: NormMethod) -> Self {
        Self::new(0.0, 0.0, method)
    }

    pub fn total(&self) -> f64 {
        self.total_sq.sqrt()
    }
}

/// `Vol(S^{n-1}) = 2 pi^{n/2} / Gamma(n/2)`.
pub fn surface_volume(dim: Dimension) -> f64 {
    dim.get() as f64 * unit_ball_volume(dim)
}

fn check_radius(func: &'static str, r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(func, format!("radius must be positive and finite, got {r}")))
    }
}

/// `int_0^inf r^{2s-1} J_{n/2}(2 pi f r)^2 dr`
/// `= (pi f)^{-2s} Gamma(n/2 + s) Gamma(1 - 2s) / (2 Gamma(1 - s)^2 Gamma(n/2 + 1 - s))`.
pub fn ws_equal_args(dim: Dimension, order: SobolevOrder, f: f64) -> Result<f64> {
    check_radius("ws_equal_args", f)?;
    order.require_annulus_range("ws_equal_args")?;
    let s = order.value();
    let nh = dim.half();
    if s == 0.0 {
        return Ok(1.0 / dim.get() as f64);
    }
    let ln = -(2.0f64).ln() - 2.0 * s * (PI * f).ln() + ln_gamma_pos(nh + s) + ln_gamma_pos(1.0 - 2.0 * s)
        - 2.0 * ln_gamma_pos(1.0 - s)
        - ln_gamma_pos(nh + 1.0 - s);
    Ok(ln.exp())
}

/// `int_0^inf r^{2s-1} J_{n/2}(2 pi f r) J_{n/2}(2 pi g r) dr` for `f < g`
/// `= (pi g)^{-2s} (f/g)^{n/2} Gamma(n/2 + s) / (2 Gamma(1 - s)) F(n/2 + s, s; n/2 + 1; f^2/g^2)`
/// with `F` the regularized hypergeometric function. Valid for `s < 1`.
pub fn ws_mixed_args(dim: Dimension, order: SobolevOrder, f: f64, g: f64) -> Result<f64> {
    check_radius("ws_mixed_args", f)?;
    check_radius("ws_mixed_args", g)?;
    if f > g {
        return Err(Error::ArgumentOrder { f, g });
    }
    if f == g {
        return ws_equal_args(dim, order, f);
    }
    let s = order.value();
    let nh = dim.half();
    let ratio = f / g;
    if s == 0.0 {
        return Ok(ratio.powf(nh) / dim.get() as f64);
    }
    let z = ratio * ratio;
    // 1 - z without cancellation for nearly equal radii
    let w = (g - f) * (g + f) / (g * g);
    let hyp = hyp2f1_reg_split(nh + s, s, nh + 1.0, z, w)?;
    let ln_pre = -(2.0f64).ln() - 2.0 * s * (PI * g).ln() + nh * ratio.ln() + ln_gamma_pos(nh + s) - ln_gamma_pos(1.0 - s);
    Ok(ln_pre.exp() * hyp)
}

/// `int |xi|^{2s} |F 1_[f,g](|.|)|^2 dxi`
/// `= Vol(S^{n-1}) [g^n WS(g,g) + f^n WS(f,f) - 2 (fg)^{n/2} WS(f,g)]`.
pub fn annulus_seminorm_sq(iv: &AnnulusInterval, dim: Dimension, order: SobolevOrder) -> Result<f64> {
    if iv.is_empty() {
        return Ok(0.0);
    }
    order.require_annulus_range("annulus_seminorm_sq")?;
    let (f, g) = (iv.inner(), iv.outer());
    let n = dim.get() as i32;
    let vol = surface_volume(dim);
    if order.value() == 0.0 {
        return Ok(vol * (g.powi(n) - f.powi(n)) / n as f64);
    }
    let eq_g = ws_equal_args(dim, order, g)?;
    let eq_f = ws_equal_args(dim, order, f)?;
    let mixed = ws_mixed_args(dim, order, f, g)?;
    let val = vol * (g.powi(n) * eq_g + f.powi(n) * eq_f - 2.0 * (f * g).powf(dim.half()) * mixed);
    Ok(val.max(0.0))
}

/// Closed-form `H^s` norm parts of the annulus indicator.
pub fn annulus_hs_norm(iv: &AnnulusInterval, dim: Dimension, order: SobolevOrder) -> Result<NormResult> {
    let l2 = annulus_seminorm_sq(iv, dim, SobolevOrder(0.0))?;
    let semi = annulus_seminorm_sq(iv, dim, order)?;
    Ok(NormResult::new(l2, semi, NormMethod::ClosedForm))
}
