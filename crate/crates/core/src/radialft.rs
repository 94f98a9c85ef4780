//! Fourier transforms of radially symmetric functions on `R^n`.
//!
//! For `v(|x|)` the transform is again radial,
//! `F v(xi) = 2 pi |xi|^{1-n/2} int_0^inf J_{n/2-1}(2 pi |xi| s) v(s) s^{n/2} ds`,
//! and for the annulus indicator `1_[f,g](|x|)` it has the closed form
//! `|xi|^{-n/2} (g^{n/2} J_{n/2}(2 pi g |xi|) - f^{n/2} J_{n/2}(2 pi f |xi|))`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::construct::MollifierSpec;
use crate::quad::{integrate_panels, QuadOptions};
use crate::specfun::{bessel_j_raw, ln_gamma_pos};
use crate::{Error, Result};

pub const MAX_DIMENSION: usize = 8;

/// Ambient dimension `n`, `1 <= n <= 8`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "usize", into = "usize")]
pub struct Dimension(usize);

impl Dimension {
    pub fn new(n: usize) -> Result<Self> {
        if !(1..=MAX_DIMENSION).contains(&n) {
            return Err(Error::InvalidInput(format!("dimension must be in 1..={MAX_DIMENSION}, got {n}")));
        }
        Ok(Self(n))
    }

    pub fn get(self) -> usize {
        self.0
    }

    /// `n / 2` as a float.
    pub fn half(self) -> f64 {
        self.0 as f64 / 2.0
    }
}

impl TryFrom<usize> for Dimension {
    type Error = Error;
    fn try_from(n: usize) -> Result<Self> {
        Self::new(n)
    }
}

impl From<Dimension> for usize {
    fn from(d: Dimension) -> usize {
        d.0
    }
}

/// Radial interval `[f, g]` with `0 < f <= g`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnulusInterval {
    f: f64,
    g: f64,
}

impl AnnulusInterval {
    pub fn new(f: f64, g: f64) -> Result<Self> {
        if !(f > 0.0) || !g.is_finite() {
            return Err(Error::InvalidInput(format!("annulus needs finite radii with f > 0, got f = {f}, g = {g}")));
        }
        if f > g {
            return Err(Error::ArgumentOrder { f, g });
        }
        Ok(Self { f, g })
    }

    pub fn inner(&self) -> f64 {
        self.f
    }

    pub fn outer(&self) -> f64 {
        self.g
    }

    pub fn is_empty(&self) -> bool {
        self.f == self.g
    }

    /// Lebesgue measure of `{f <= |x| <= g}` in `R^n`.
    pub fn volume(&self, dim: Dimension) -> f64 {
        let n = dim.get() as i32;
        unit_ball_volume(dim) * (self.g.powi(n) - self.f.powi(n))
    }
}

/// `pi^{n/2} / Gamma(n/2 + 1)`.
pub fn unit_ball_volume(dim: Dimension) -> f64 {
    (dim.half() * PI.ln() - ln_gamma_pos(dim.half() + 1.0)).exp()
}

/// A radial profile `r -> v(r)` with compact support.
pub trait RadialProfile: Sync {
    fn value(&self, r: f64) -> f64;

    /// `[r0, r1]` outside of which the profile vanishes.
    fn support(&self) -> (f64, f64);

    /// Interior points where the profile is not smooth.
    fn breakpoints(&self) -> Vec<f64> {
        Vec::new()
    }
}

/// `1_[f,g](r)`.
#[derive(Debug, Clone, Copy)]
pub struct IndicatorProfile(pub AnnulusInterval);

impl RadialProfile for IndicatorProfile {
    fn value(&self, r: f64) -> f64 {
        if r >= self.0.f && r <= self.0.g {
            1.0
        } else {
            0.0
        }
    }

    fn support(&self) -> (f64, f64) {
        (self.0.f, self.0.g)
    }
}

/// Any closure with a declared support.
pub struct FnProfile<F> {
    pub func: F,
    pub support: (f64, f64),
    pub breaks: Vec<f64>,
}

impl<F: Fn(f64) -> f64 + Sync> FnProfile<F> {
    pub fn new(func: F, r0: f64, r1: f64) -> Self {
        Self { func, support: (r0, r1), breaks: Vec::new() }
    }
}

impl<F: Fn(f64) -> f64 + Sync> RadialProfile for FnProfile<F> {
    fn value(&self, r: f64) -> f64 {
        (self.func)(r)
    }

    fn support(&self) -> (f64, f64) {
        self.support
    }

    fn breakpoints(&self) -> Vec<f64> {
        self.breaks.clone()
    }
}

/// Closed-form transform of `1_[f,g](|x|)` at radius `xi >= 0`.
pub fn annulus_ft(iv: &AnnulusInterval, dim: Dimension, xi: f64) -> f64 {
    let xi = xi.abs();
    if iv.is_empty() {
        return 0.0;
    }
    if xi == 0.0 {
        return iv.volume(dim);
    }
    let nu = dim.half();
    let outer = bessel_j_raw(nu, 2.0 * PI * iv.g * xi) * iv.g.powf(nu);
    let inner = bessel_j_raw(nu, 2.0 * PI * iv.f * xi) * iv.f.powf(nu);
    xi.powf(-nu) * (outer - inner)
}

/// Radial transform kernel `k(s)` with `F v(xi) = int k(s) v(s) ds`.
/// In one dimension `J_{-1/2}` reduces to a cosine.
fn radial_kernel(dim: Dimension, xi: f64) -> impl Fn(f64) -> f64 {
    let n = dim.get();
    let nu = dim.half() - 1.0;
    let w = 2.0 * PI * xi;
    let pre = 2.0 * PI * xi.powf(1.0 - dim.half());
    move |s: f64| {
        if n == 1 {
            2.0 * (w * s).cos()
        } else {
            pre * bessel_j_raw(nu, w * s) * s.powf(dim.half())
        }
    }
}

/// Panel edges at half-oscillation spacing `1 / (2 xi)` across the support,
/// merged with the profile's own break points.
pub(crate) fn oscillation_breaks(r0: f64, r1: f64, xi: f64, extra: &[f64]) -> Vec<f64> {
    let width = if xi > 0.0 { 0.5 / xi } else { r1 - r0 };
    let panels = (((r1 - r0) / width).ceil() as usize).clamp(1, 1_000_000);
    let mut breaks: Vec<f64> = (0..=panels).map(|k| r0 + (r1 - r0) * k as f64 / panels as f64).collect();
    breaks.extend(extra.iter().copied().filter(|&b| b > r0 && b < r1));
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    breaks
}

/// Transform of a compactly supported radial profile by oscillatory quadrature.
pub fn radial_ft_quadrature(profile: &dyn RadialProfile, dim: Dimension, xi: f64, opts: QuadOptions) -> Result<f64> {
    if !(xi > 0.0) || !xi.is_finite() {
        return Err(Error::InvalidInput(format!("quadrature transform needs xi > 0, got {xi}")));
    }
    let (r0, r1) = profile.support();
    if r1 <= r0 {
        return Ok(0.0);
    }
    let kernel = radial_kernel(dim, xi);
    let breaks = oscillation_breaks(r0, r1, xi, &profile.breakpoints());
    let res = integrate_panels(|s| kernel(s) * profile.value(s), &breaks, opts)?;
    Ok(res.value)
}

/// `(F G_1(|.|))(eps xi)`, the transform of the `n`-dimensional radial
/// mollifier evaluated at the rescaled frequency. Equals `F(G_eps(|.|))(xi)`.
pub fn mollifier_ft_factor(eps: f64, xi: f64, bump: &MollifierSpec, dim: Dimension, opts: QuadOptions) -> Result<f64> {
    if !(eps > 0.0) {
        return Err(Error::InvalidInput(format!("mollifier scale must be positive, got {eps}")));
    }
    let k = (eps * xi).abs();
    if k == 0.0 {
        return Ok(1.0);
    }
    let profile = FnProfile::new(|r| bump.radial_unit_density(dim, r), 0.0, 1.0);
    radial_ft_quadrature(&profile, dim, k, opts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::BumpShape;
    use approx::assert_relative_eq;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    #[test]
    fn dimension_and_interval_validation() {
        assert!(Dimension::new(0).is_err());
        assert!(Dimension::new(9).is_err());
        assert!(matches!(AnnulusInterval::new(2.0, 1.0), Err(Error::ArgumentOrder { .. })));
        assert!(AnnulusInterval::new(0.0, 1.0).is_err());
        assert!(AnnulusInterval::new(1.0, 1.0).unwrap().is_empty());
    }

    #[test]
    fn origin_value_is_annulus_volume() {
        for n in 1..=4 {
            let iv = AnnulusInterval::new(1.0, 2.0).unwrap();
            let d = dim(n);
            let vol = PI.powf(d.half()) * (2f64.powi(n as i32) - 1.0) / ln_gamma_pos(d.half() + 1.0).exp();
            assert_relative_eq!(annulus_ft(&iv, d, 0.0), vol, max_relative = 1e-13);
            // continuity into the origin
            assert_relative_eq!(annulus_ft(&iv, d, 1e-7), vol, max_relative = 1e-9);
        }
    }

    #[test]
    fn empty_annulus_transform_vanishes() {
        let iv = AnnulusInterval::new(1.3, 1.3).unwrap();
        for xi in [0.0, 0.1, 2.0, 50.0] {
            assert_eq!(annulus_ft(&iv, dim(3), xi), 0.0);
        }
    }

    #[test]
    fn one_dimensional_sinc_reduction() {
        // direct integral of 1 on [-2,-1] u [1,2]
        let xi = 0.7;
        let want = ((2.0 * PI * 2.0 * xi).sin() - (2.0 * PI * xi).sin()) / (PI * xi);
        let iv = AnnulusInterval::new(1.0, 2.0).unwrap();
        assert_relative_eq!(annulus_ft(&iv, dim(1), xi), want, max_relative = 1e-12);
        let q = radial_ft_quadrature(&IndicatorProfile(iv), dim(1), xi, QuadOptions::default()).unwrap();
        assert!((q - want).abs() < 1e-9);
    }

    #[test]
    fn quadrature_matches_closed_form_in_two_dimensions() {
        let iv = AnnulusInterval::new(1.0, 2.0).unwrap();
        let q = radial_ft_quadrature(&IndicatorProfile(iv), dim(2), 0.5, QuadOptions::default()).unwrap();
        assert!((q - annulus_ft(&iv, dim(2), 0.5)).abs() < 1e-8);
    }

    #[test]
    fn zero_profile_transforms_to_zero() {
        let zero = FnProfile::new(|_| 0.0, 1.0, 2.0);
        assert_eq!(radial_ft_quadrature(&zero, dim(2), 1.3, QuadOptions::default()).unwrap(), 0.0);
        let empty = FnProfile::new(|_| 1.0, 1.0, 1.0);
        assert_eq!(radial_ft_quadrature(&empty, dim(2), 1.3, QuadOptions::default()).unwrap(), 0.0);
    }

    #[test]
    fn mollifier_factor_limits() {
        let bump = MollifierSpec::new(BumpShape::Exponential, 0.1).unwrap();
        for n in 1..=3 {
            assert_eq!(mollifier_ft_factor(0.1, 0.0, &bump, dim(n), QuadOptions::default()).unwrap(), 1.0);
            let v = mollifier_ft_factor(1e-6, 3.0, &bump, dim(n), QuadOptions::default()).unwrap();
            assert!((v - 1.0).abs() < 1e-9, "n={n}: {v}");
        }
        assert!(mollifier_ft_factor(0.0, 1.0, &bump, dim(1), QuadOptions::default()).is_err());
    }

    #[test]
    fn quadrature_matches_closed_form_across_dimensions() {
        let opts = QuadOptions::abs(1e-10);
        for n in 1..=3 {
            for (f, g) in [(0.5, 1.0), (1.0, 2.0), (1.0, 1.1), (2.0, 3.5)] {
                let iv = AnnulusInterval::new(f, g).unwrap();
                for xi in [0.05, 0.3, 1.7, 6.2] {
                    let q = radial_ft_quadrature(&IndicatorProfile(iv), dim(n), xi, opts).unwrap();
                    let c = annulus_ft(&iv, dim(n), xi);
                    assert!((q - c).abs() <= 1e-7 * c.abs().max(1.0), "n={n} ({f},{g}) xi={xi}: {q} vs {c}");
                }
            }
        }
    }

    #[test]
    fn transform_decays_like_bessel_amplitude() {
        let iv = AnnulusInterval::new(1.0, 2.0).unwrap();
        let envelope = |n: usize, lo: f64| {
            (0..4000).map(|k| annulus_ft(&iv, dim(n), lo + lo * k as f64 / 4000.0).abs()).fold(0.0, f64::max)
        };
        for n in 1..=3 {
            let slope = (envelope(n, 500.0) / envelope(n, 50.0)).ln() / 10f64.ln();
            let want = -(n as f64 + 1.0) / 2.0;
            assert!((slope / want - 1.0).abs() < 0.1, "n={n}: slope {slope}");
        }
    }

    #[test]
    fn mollifier_factor_against_grid_transform() {
        use crate::sobolev::{GridSpec, SampledField, Spectrum};
        let bump = MollifierSpec::new(BumpShape::Exponential, 1.0).unwrap();
        let d = dim(2);
        let spec = GridSpec::new(d, 4.0, 1024).unwrap();
        let field = SampledField::from_scalar_fn(spec, |x| {
            let r = (x[0] * x[0] + x[1] * x[1]).sqrt();
            bump.radial_unit_density(d, r)
        });
        let mut at_two = Vec::new();
        Spectrum::of(&field).visit(|r, p| {
            if (r - 2.0).abs() < 1e-12 {
                at_two.push((p / spec.dxi().powi(2)).sqrt());
            }
        });
        assert!(!at_two.is_empty());
        let v = mollifier_ft_factor(1.0, 2.0, &bump, d, QuadOptions::abs(1e-12)).unwrap();
        assert!(v.abs() <= 1.0);
        for g in at_two {
            assert!((g - v.abs()).abs() < 1e-8, "grid {g} vs {v}");
        }
    }
}
