//! Spectral `H^s` norms of fields sampled on a periodic grid.
//!
//! Samples sit at `x_j = -L + j h`, `h = 2L / N`. The transform
//! `F v(xi) = int e^{-2 pi i x xi} v(x) dx` is approximated at `xi_k = k / (2L)`
//! by `h^n` times the DFT, so `int |F v|^2 dxi` becomes a sum with weight
//! `(2L)^{-n}`, which equals the sampled `L^2` norm exactly (Parseval).

use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use std::f64::consts::PI;

use crate::quad::{integrate, GaussLegendre, QuadOptions};
use crate::radialft::Dimension;
use crate::specfun::rgamma;
use crate::{Error, Result};

use super::{NormMethod, NormResult, SobolevOrder};

/// Largest grid the FFT path will allocate (`N^n` points).
const MAX_GRID_POINTS: usize = 1 << 27;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    dim: Dimension,
    extent: f64,
    points: usize,
}

impl GridSpec {
    /// `points` per axis on `[-extent, extent)`.
    pub fn new(dim: Dimension, extent: f64, points: usize) -> Result<Self> {
        if !(extent > 0.0) || !extent.is_finite() {
            return Err(Error::InvalidInput(format!("grid extent must be positive, got {extent}")));
        }
        if points < 32 || !points.is_power_of_two() {
            return Err(Error::InvalidInput(format!("grid points per axis must be a power of two >= 32, got {points}")));
        }
        let total = (points as u128).pow(dim.get() as u32);
        if total > MAX_GRID_POINTS as u128 {
            return Err(Error::InvalidInput(format!("grid of {points}^{} points is too large", dim.get())));
        }
        Ok(Self { dim, extent, points })
    }

    pub fn dim(&self) -> Dimension {
        self.dim
    }

    pub fn extent(&self) -> f64 {
        self.extent
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / self.points as f64
    }

    pub fn len(&self) -> usize {
        self.points.pow(self.dim.get() as u32)
    }

    pub fn coordinate(&self, i: usize) -> f64 {
        -self.extent + i as f64 * self.spacing()
    }

    /// Frequency spacing `1 / (2L)`.
    pub fn dxi(&self) -> f64 {
        0.5 / self.extent
    }

    /// `1 / (2h)`.
    pub fn nyquist(&self) -> f64 {
        0.5 / self.spacing()
    }

    fn multi_index(&self, mut flat: usize, out: &mut [usize]) {
        for slot in out.iter_mut().rev() {
            *slot = flat % self.points;
            flat /= self.points;
        }
    }

    fn frequency_index(&self, k: usize) -> f64 {
        let n = self.points;
        let signed = if k < n / 2 { k as f64 } else { k as f64 - n as f64 };
        signed * self.dxi()
    }
}

/// Scalar or vector field sampled on a [`GridSpec`], one array per component
/// in row-major order (last axis fastest).
#[derive(Debug, Clone)]
pub struct SampledField {
    spec: GridSpec,
    components: Vec<Vec<f64>>,
}

impl SampledField {
    pub fn zero(spec: GridSpec, ncomp: usize) -> Self {
        Self { spec, components: vec![vec![0.0; spec.len()]; ncomp.max(1)] }
    }

    pub fn from_components(spec: GridSpec, components: Vec<Vec<f64>>) -> Result<Self> {
        if components.is_empty() || components.iter().any(|c| c.len() != spec.len()) {
            return Err(Error::InvalidInput(format!("each component needs {} samples", spec.len())));
        }
        Ok(Self { spec, components })
    }

    pub fn from_scalar_fn<F>(spec: GridSpec, f: F) -> Self
    where
        F: Fn(&[f64]) -> f64 + Sync,
    {
        let n = spec.dim.get();
        let values = (0..spec.len())
            .into_par_iter()
            .map_init(
                || (vec![0usize; n], vec![0.0; n]),
                |(idx, x), flat| {
                    spec.multi_index(flat, idx);
                    for (xi, &i) in x.iter_mut().zip(idx.iter()) {
                        *xi = spec.coordinate(i);
                    }
                    f(x)
                },
            )
            .collect();
        Self { spec, components: vec![values] }
    }

    /// Vector field; `f(x, out)` fills `ncomp` values.
    pub fn from_vector_fn<F>(spec: GridSpec, ncomp: usize, f: F) -> Self
    where
        F: Fn(&[f64], &mut [f64]) + Sync,
    {
        let n = spec.dim.get();
        let mut components = vec![vec![0.0; spec.len()]; ncomp];
        let rows: Vec<Vec<f64>> = (0..spec.len())
            .into_par_iter()
            .map_init(
                || (vec![0usize; n], vec![0.0; n]),
                |(idx, x), flat| {
                    spec.multi_index(flat, idx);
                    for (xi, &i) in x.iter_mut().zip(idx.iter()) {
                        *xi = spec.coordinate(i);
                    }
                    let mut out = vec![0.0; ncomp];
                    f(x, &mut out);
                    out
                },
            )
            .collect();
        for (flat, row) in rows.into_iter().enumerate() {
            for (c, v) in row.into_iter().enumerate() {
                components[c][flat] = v;
            }
        }
        Self { spec, components }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    pub fn scale(&mut self, factor: f64) {
        for c in self.components.iter_mut() {
            for v in c.iter_mut() {
                *v *= factor;
            }
        }
    }

    /// Sampled `sum |v|^2 h^n`.
    pub fn l2_sq(&self) -> f64 {
        let cell = self.spec.spacing().powi(self.spec.dim.get() as i32);
        self.components.iter().map(|c| c.iter().map(|v| v * v).sum::<f64>()).sum::<f64>() * cell
    }

    /// Fraction of `sum |v|^2` within `margin` cells of the grid boundary.
    pub fn margin_fraction(&self, margin: usize) -> f64 {
        let n = self.spec.dim.get();
        let pts = self.spec.points;
        let mut idx = vec![0usize; n];
        let mut edge = 0.0;
        let mut total = 0.0;
        for flat in 0..self.spec.len() {
            let e: f64 = self.components.iter().map(|c| c[flat] * c[flat]).sum();
            if e == 0.0 {
                continue;
            }
            total += e;
            self.spec.multi_index(flat, &mut idx);
            if idx.iter().any(|&i| i < margin || i + margin >= pts) {
                edge += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            edge / total
        }
    }
}

/// `|F v(xi_k)|^2` summed over components, with the frequency cell volume.
#[derive(Debug, Clone)]
pub struct Spectrum {
    spec: GridSpec,
    power: Vec<f64>,
}

impl Spectrum {
    pub fn of(field: &SampledField) -> Self {
        let spec = field.spec;
        let n = spec.dim.get();
        let pts = spec.points;
        let cell = spec.spacing().powi(n as i32);
        let mut planner = FftPlanner::<f64>::new();
        let fft = planner.plan_fft_forward(pts);
        let mut power = vec![0.0; spec.len()];
        let mut data: Vec<Complex<f64>> = vec![Complex::new(0.0, 0.0); spec.len()];
        let mut line = vec![Complex::new(0.0, 0.0); pts];
        let mut scratch = vec![Complex::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for comp in &field.components {
            if comp.iter().all(|&v| v == 0.0) {
                continue;
            }
            for (d, &v) in data.iter_mut().zip(comp.iter()) {
                *d = Complex::new(v, 0.0);
            }
            for axis in 0..n {
                let stride = pts.pow((n - 1 - axis) as u32);
                if stride == 1 {
                    fft.process_with_scratch(&mut data, &mut scratch);
                    continue;
                }
                let block = stride * pts;
                for base in (0..spec.len()).step_by(block) {
                    for offset in 0..stride {
                        let start = base + offset;
                        for (j, slot) in line.iter_mut().enumerate() {
                            *slot = data[start + j * stride];
                        }
                        fft.process_with_scratch(&mut line, &mut scratch);
                        for (j, v) in line.iter().enumerate() {
                            data[start + j * stride] = *v;
                        }
                    }
                }
            }
            for (p, d) in power.iter_mut().zip(data.iter()) {
                *p += d.norm_sqr() * cell * cell;
            }
        }
        Self { spec, power }
    }

    pub fn spec(&self) -> &GridSpec {
        &self.spec
    }

    /// Calls `visit(|xi_k|, |F(xi_k)|^2 dxi^n)` for every nonzero mode.
    pub fn visit(&self, mut visit: impl FnMut(f64, f64)) {
        let n = self.spec.dim.get();
        let vol = self.spec.dxi().powi(n as i32);
        let mut idx = vec![0usize; n];
        for (flat, &p) in self.power.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            self.spec.multi_index(flat, &mut idx);
            let r2: f64 = idx.iter().map(|&k| self.spec.frequency_index(k).powi(2)).sum();
            visit(r2.sqrt(), p * vol);
        }
    }

    /// `sum_k w(|xi_k|) |F(xi_k)|^2 dxi^n`.
    pub fn weighted_sum(&self, w: impl Fn(f64) -> f64) -> f64 {
        let mut acc = 0.0;
        self.visit(|r, p| acc += w(r) * p);
        acc
    }
}

/// Extrapolation of the spectrum beyond the resolved band.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum TailModel {
    /// Plain truncated sum; right for smooth fields.
    #[default]
    None,
    /// Fields with jumps across smooth hypersurfaces: the radial energy
    /// density decays like `C |xi|^{-2}`. Above a cut `k` the spectrum is
    /// replaced by that law. `C` is fixed by the energy the samples carry
    /// beyond `k` (exact by Parseval), after accounting for the part of the
    /// law that aliases back inside the Nyquist cube. The estimate is
    /// averaged over a range of cuts, which damps the interference ripple of
    /// nearby surfaces.
    JumpDiscontinuity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridOptions {
    pub tail: TailModel,
    /// Width of the boundary band checked for leaked support, in cells.
    pub margin_cells: usize,
    /// Largest tolerated fraction of `|v|^2` inside the margin band.
    pub overflow_limit: f64,
    /// Range of tail cuts, as fractions of the Nyquist radius `1 / 2h`,
    /// over which the jump model is averaged.
    pub tail_cut: [f64; 2],
}

impl Default for GridOptions {
    fn default() -> Self {
        Self { tail: TailModel::None, margin_cells: 2, overflow_limit: 1e-8, tail_cut: [0.25, 0.75] }
    }
}

impl GridOptions {
    pub fn jump() -> Self {
        Self { tail: TailModel::JumpDiscontinuity, ..Self::default() }
    }
}

fn guard(field: &SampledField, opts: &GridOptions) -> Result<()> {
    let frac = field.margin_fraction(opts.margin_cells);
    if frac > opts.overflow_limit {
        return Err(Error::SupportOverflow { fraction: frac, limit: opts.overflow_limit });
    }
    Ok(())
}

/// Epstein zeta of the cubic lattice, `Z_n(z) = sum_{k != 0} |k|^{-z}`,
/// continued to `z < n` through the theta-function splitting at `t = 1`.
pub fn lattice_zeta(dim: Dimension, z: f64) -> Result<f64> {
    let n = dim.get() as f64;
    if z == 0.0 {
        return Ok(-1.0);
    }
    if z >= n {
        return Err(Error::domain("lattice_zeta", format!("z = {z} needs z < n = {n}")));
    }
    let theta = |t: f64| {
        let mut acc = 0.0;
        for k in 1..64 {
            let term = (-PI * (k * k) as f64 * t).exp();
            acc += term;
            if term < 1e-18 {
                break;
            }
        }
        1.0 + 2.0 * acc
    };
    let body = integrate(
        |t| (t.powf(0.5 * z - 1.0) + t.powf(0.5 * (n - z) - 1.0)) * (theta(t).powf(n) - 1.0),
        1.0,
        20.0,
        QuadOptions::abs(1e-15),
    )?
    .value;
    let bracket = -2.0 / z - 2.0 / (n - z) + body;
    Ok(PI.powf(0.5 * z) * rgamma(0.5 * z) * bracket)
}

/// Number of cut radii averaged by the jump tail model.
const TAIL_CUTS: usize = 9;

/// For each radius `c` in `cuts` (ascending, below 1), the pair
/// `int_{|u| < c} |u|^{2t} sum_{m != 0} p(u + 2m) du` for `t = s` and `t = 0`,
/// with `p(u) = |u|^{-n-1} / |S^{n-1}|`: what the tail law beyond the Nyquist
/// cube (scaled to half-width 1) aliases onto the ball of radius `c`.
fn alias_leaks(dim: Dimension, cuts: &[f64], s: f64) -> Vec<(f64, f64)> {
    let n = dim.get();
    let sigma = super::surface_volume(dim);
    let reach: i64 = match n {
        1 => 400,
        2 => 40,
        _ => 10,
    };
    let side = (2 * reach + 1) as usize;
    let mut images = Vec::with_capacity(side.pow(n as u32));
    let mut idx = vec![0i64; n];
    for flat in 0..side.pow(n as u32) {
        let mut rem = flat;
        for slot in idx.iter_mut() {
            *slot = (rem % side) as i64 - reach;
            rem /= side;
        }
        if idx.iter().any(|&m| m != 0) {
            let mut m = [0.0; 3];
            for (dst, &src) in m.iter_mut().zip(idx.iter()) {
                *dst = 2.0 * src as f64;
            }
            images.push(m);
        }
    }
    // images beyond the cube of half-width 2 reach + 1 as a continuum of
    // density 2^{-n}
    let far = 1.0 / (2f64.powi(n as i32) * (2 * reach + 1) as f64);
    let image_sum = |u: [f64; 3]| -> f64 {
        let mut acc = 0.0;
        for m in &images {
            let r2 = (u[0] + m[0]).powi(2) + (u[1] + m[1]).powi(2) + (u[2] + m[2]).powi(2);
            acc += match n {
                1 => 1.0 / r2,
                2 => 1.0 / (r2 * r2.sqrt()),
                _ => 1.0 / (r2 * r2),
            };
        }
        acc / sigma + far
    };
    let angular = GaussLegendre::new(12);
    let shell = |r: f64| -> f64 {
        match n {
            1 => image_sum([r, 0.0, 0.0]) + image_sum([-r, 0.0, 0.0]),
            2 => 4.0 * r * angular.integrate(|t| image_sum([r * t.cos(), r * t.sin(), 0.0]), 0.0, 0.5 * PI),
            _ => {
                let inner = |th: f64| {
                    let (st, ct) = th.sin_cos();
                    st * angular.integrate(|ph| image_sum([r * st * ph.cos(), r * st * ph.sin(), r * ct]), 0.0, 0.5 * PI)
                };
                8.0 * r * r * angular.integrate(inner, 0.0, 0.5 * PI)
            }
        }
    };
    let radial = GaussLegendre::new(8);
    let mut out = Vec::with_capacity(cuts.len());
    let (mut with_s, mut plain) = (0.0, 0.0);
    let mut lo = 0.0;
    for &c in cuts {
        for (r, w) in radial.mapped(lo, c) {
            let v = w * shell(r);
            with_s += v * r.powf(2.0 * s);
            plain += v;
        }
        out.push((with_s, plain));
        lo = c;
    }
    out
}

/// `int |xi|^{2s} |F v|^2` from a spectrum, with the chosen tail model.
///
/// The lattice sum of `|xi|^{2s} P(xi)` misses the cusp at the origin by
/// `dxi^{n+2s} (Z_n(-2s) P(0) + Z_n(-2s-2) dxi^2 Lap P(0) / 2n + ...)`; the
/// first two terms are removed, the Laplacian by central differences.
pub fn spectral_seminorm_sq(spectrum: &Spectrum, order: SobolevOrder, opts: &GridOptions) -> Result<f64> {
    let s = order.value();
    if s == 0.0 {
        return Ok(spectrum.weighted_sum(|_| 1.0));
    }
    let n = spectrum.spec.dim.get() as f64;
    let spec = spectrum.spec;
    let p0 = spectrum.power[0];
    let pts = spec.points;
    let mut second = 0.0;
    for axis in 0..spec.dim.get() {
        let stride = pts.pow((spec.dim.get() - 1 - axis) as u32);
        second += spectrum.power[stride] + spectrum.power[(pts - 1) * stride] - 2.0 * p0;
    }
    let cusp = spec.dxi().powf(n + 2.0 * s)
        * (lattice_zeta(spec.dim, -2.0 * s)? * p0 + lattice_zeta(spec.dim, -2.0 * s - 2.0)? * second / (2.0 * n));
    let raw = match opts.tail {
        TailModel::None => spectrum.weighted_sum(|r| r.powf(2.0 * s)),
        TailModel::JumpDiscontinuity => {
            if s >= 0.5 {
                return Err(Error::pole("grid_hs_norm", format!("a jump field has no finite H^s norm for s = {s} >= 1/2")));
            }
            let k = spectrum.spec.nyquist();
            let [lo, hi] = opts.tail_cut;
            let fractions: Vec<f64> =
                (0..TAIL_CUTS).map(|j| lo + (hi - lo) * j as f64 / (TAIL_CUTS - 1) as f64).collect();
            let cuts: Vec<f64> = fractions.iter().map(|c| c * k).collect();
            // per shell between consecutive cuts: weighted sum and plain energy
            let mut weighted = vec![0.0; TAIL_CUTS + 1];
            let mut energy = vec![0.0; TAIL_CUTS + 1];
            spectrum.visit(|r, p| {
                let j = cuts.partition_point(|&c| c <= r);
                weighted[j] += r.powf(2.0 * s) * p;
                energy[j] += p;
            });
            let leaks = alias_leaks(spectrum.spec.dim, &fractions, s);
            let mut inner = 0.0;
            let mut outer: f64 = energy.iter().sum();
            let mut estimates = Vec::with_capacity(TAIL_CUTS);
            for (j, &cut) in cuts.iter().enumerate() {
                inner += weighted[j];
                outer -= energy[j];
                // unit law p(xi) = |xi|^{-n-1} / |S^{n-1}| beyond the cut,
                // scaled so that law plus its aliases carries `outer`
                let leak_s = k.powf(2.0 * s - 1.0) * leaks[j].0;
                let leak_0 = leaks[j].1 / k;
                let c = outer / (1.0 / cut - leak_0);
                estimates.push(inner - c * leak_s + c * cut.powf(2.0 * s - 1.0) / (1.0 - 2.0 * s));
            }
            let last = TAIL_CUTS - 1;
            let trap: f64 = estimates.iter().sum::<f64>() - 0.5 * (estimates[0] + estimates[last]);
            trap / last as f64
        }
    };
    Ok(raw - cusp)
}

/// `||v||^2_{L^2} + || |xi|^s F v ||^2_{L^2}` on the grid; vector fields sum
/// their components.
pub fn grid_hs_norm(field: &SampledField, order: SobolevOrder, opts: GridOptions) -> Result<NormResult> {
    guard(field, &opts)?;
    let l2 = field.l2_sq();
    if l2 == 0.0 {
        return Ok(NormResult::zero(NormMethod::Grid));
    }
    let spectrum = Spectrum::of(field);
    let semi = spectral_seminorm_sq(&spectrum, order, &opts)?;
    Ok(NormResult::new(l2, semi, NormMethod::Grid))
}

/// `C(s) = 2^{|1 - s| / 2}`: the ratio of the `(1 + |xi|^2)^{s/2}` norm to the
/// split norm lies in `[1/C, C]`. For `0 <= s <= 1` it actually lies in
/// `[2^{(s-1)/2}, 1]`, from `2^{s-1} (1 + t^s) <= (1 + t)^s <= 1 + t^s`.
pub fn equivalence_constant(order: SobolevOrder) -> f64 {
    2f64.powf((1.0 - order.value()).abs() / 2.0)
}

/// `sqrt(int (1 + |xi|^2)^s |F v|^2 / int (1 + |xi|^{2s}) |F v|^2)` on the grid.
pub fn equivalence_ratio(field: &SampledField, order: SobolevOrder) -> Result<f64> {
    let spectrum = Spectrum::of(field);
    let s = order.value();
    let first = spectrum.weighted_sum(|r| (1.0 + r * r).powf(s));
    let second = spectrum.weighted_sum(|r| 1.0 + r.powf(2.0 * s));
    if second == 0.0 {
        return Err(Error::DivisionByZero("equivalence ratio of the zero field".into()));
    }
    Ok((first / second).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construct::{BumpShape, MollifierSpec};
    use crate::radialft::{annulus_ft, mollifier_ft_factor, AnnulusInterval};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn dim(n: usize) -> Dimension {
        Dimension::new(n).unwrap()
    }

    fn order(s: f64) -> SobolevOrder {
        SobolevOrder::new(s).unwrap()
    }

    fn gaussian(spec: GridSpec) -> SampledField {
        SampledField::from_scalar_fn(spec, |x| (-PI * x.iter().map(|v| v * v).sum::<f64>()).exp())
    }

    #[test]
    fn lattice_zeta_reference() {
        // mpmath: 2 zeta(-2s) and 4 zeta(-s) beta(-s)
        let table = [
            (0.1, -0.699332561196628260676739643299, -0.767153467878534706521373848041),
            (0.25, -0.415772449954709132034613450794, -0.506045609429222235668216386592),
            (0.4, -0.24397415533954226459689625471, -0.321019345814171093843306709971),
        ];
        for (s, one, two) in table {
            assert_relative_eq!(lattice_zeta(dim(1), -2.0 * s).unwrap(), one, max_relative = 1e-11);
            assert_relative_eq!(lattice_zeta(dim(2), -2.0 * s).unwrap(), two, max_relative = 1e-11);
        }
        assert_relative_eq!(lattice_zeta(dim(3), -1e-9).unwrap(), -1.0, max_relative = 1e-6);
    }

    #[test]
    fn spec_validation() {
        assert!(GridSpec::new(dim(1), 1.0, 48).is_err());
        assert!(GridSpec::new(dim(1), 1.0, 16).is_err());
        assert!(GridSpec::new(dim(1), 0.0, 64).is_err());
        assert!(GridSpec::new(dim(3), 1.0, 1024).is_err());
    }

    #[test]
    fn zero_field() {
        let spec = GridSpec::new(dim(2), 2.0, 32).unwrap();
        let r = grid_hs_norm(&SampledField::zero(spec, 2), order(0.3), GridOptions::default()).unwrap();
        assert_eq!(r.total_sq, 0.0);
        assert!(matches!(equivalence_ratio(&SampledField::zero(spec, 1), order(0.3)), Err(Error::DivisionByZero(_))));
    }

    #[test]
    fn gaussian_parseval_and_exact_seminorm() {
        // e^{-pi |x|^2} is its own transform; int |xi|^{2s} e^{-2 pi |xi|^2} is explicit
        for n in 1..=2 {
            let spec = GridSpec::new(dim(n), 12.0, if n == 1 { 1024 } else { 512 }).unwrap();
            let field = gaussian(spec);
            let r0 = grid_hs_norm(&field, order(0.0), GridOptions::default()).unwrap();
            let want_l2 = (0.5f64).powf(n as f64 / 2.0);
            assert_relative_eq!(r0.l2_sq, want_l2, max_relative = 1e-10);
            assert_relative_eq!(r0.seminorm_sq, r0.l2_sq, max_relative = 1e-10);
            let s = 0.35;
            let nh = n as f64 / 2.0;
            let vol = crate::sobolev::surface_volume(dim(n));
            // vol int r^{2s + n - 1} e^{-2 pi r^2} dr = vol Gamma(s + n/2) / (2 (2 pi)^{s + n/2})
            let want = vol * crate::specfun::gamma(s + nh).unwrap() / (2.0 * (2.0 * PI).powf(s + nh));
            let r = grid_hs_norm(&field, order(s), GridOptions::default()).unwrap();
            assert_relative_eq!(r.seminorm_sq, want, max_relative = 1e-7);
        }
    }

    #[test]
    fn support_overflow_detected() {
        let spec = GridSpec::new(dim(1), 1.0, 64).unwrap();
        let field = SampledField::from_scalar_fn(spec, |x| if x[0] < -0.98 { 1.0 } else { 0.0 });
        assert!(matches!(grid_hs_norm(&field, order(0.2), GridOptions::default()), Err(Error::SupportOverflow { .. })));
    }

    #[test]
    fn vector_norm_sums_components() {
        let spec = GridSpec::new(dim(2), 5.0, 64).unwrap();
        let g = gaussian(spec);
        let v = SampledField::from_vector_fn(spec, 2, |x, out| {
            let e = (-PI * (x[0] * x[0] + x[1] * x[1])).exp();
            out[0] = e;
            out[1] = 2.0 * e;
        });
        let a = grid_hs_norm(&g, order(0.3), GridOptions::default()).unwrap();
        let b = grid_hs_norm(&v, order(0.3), GridOptions::default()).unwrap();
        assert_relative_eq!(b.total_sq, 5.0 * a.total_sq, max_relative = 1e-12);
    }

    #[test]
    fn equivalence_ratio_examples() {
        let spec = GridSpec::new(dim(2), 4.0, 64).unwrap();
        let field = gaussian(spec);
        assert_relative_eq!(equivalence_ratio(&field, order(0.0)).unwrap(), 0.5f64.sqrt(), max_relative = 1e-12);
        let mut big = field.clone();
        big.scale(10.0);
        assert_relative_eq!(equivalence_ratio(&field, order(0.4)).unwrap(), equivalence_ratio(&big, order(0.4)).unwrap(), max_relative = 1e-12);
        // random band-limited fields
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..5 {
            let modes: Vec<(f64, f64, f64)> = (0..6).map(|_| (rng.gen_range(-3.0..3.0), rng.gen_range(-3.0..3.0), rng.gen_range(-1.0..1.0))).collect();
            let f = SampledField::from_scalar_fn(spec, |x| {
                let env = (-PI * (x[0] * x[0] + x[1] * x[1]) / 2.0).exp();
                env * modes.iter().map(|(a, b, c)| c * (2.0 * PI * (a * x[0] + b * x[1])).cos()).sum::<f64>()
            });
            let r = equivalence_ratio(&f, order(0.4)).unwrap();
            let c = equivalence_constant(order(0.4));
            assert!(r >= 1.0 / c && r <= c && (0.5..=2.0).contains(&r), "ratio {r}");
        }
    }

    fn annulus_field(spec: GridSpec, f: f64, g: f64) -> SampledField {
        SampledField::from_scalar_fn(spec, move |x| {
            let r = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if r >= f && r <= g {
                1.0
            } else {
                0.0
            }
        })
    }

    #[test]
    fn jump_model_matches_closed_form() {
        let iv = AnnulusInterval::new(1.0, 2.0).unwrap();
        let spec = GridSpec::new(dim(1), 4.0, 1 << 14).unwrap();
        let field = annulus_field(spec, 1.0, 2.0);
        let grid = grid_hs_norm(&field, order(0.3), GridOptions::jump()).unwrap();
        let exact = crate::sobolev::annulus_hs_norm(&iv, dim(1), order(0.3)).unwrap();
        assert!((grid.total_sq / exact.total_sq - 1.0).abs() < 0.01);
        let spec = GridSpec::new(dim(2), 4.0, 512).unwrap();
        let field = annulus_field(spec, 1.0, 2.0);
        let grid = grid_hs_norm(&field, order(0.25), GridOptions::jump()).unwrap();
        let exact = crate::sobolev::annulus_hs_norm(&iv, dim(2), order(0.25)).unwrap();
        assert!((grid.seminorm_sq / exact.seminorm_sq - 1.0).abs() < 0.01);
        // truncation alone is visibly worse
        let plain = grid_hs_norm(&field, order(0.25), GridOptions::default()).unwrap();
        assert!((plain.seminorm_sq / exact.seminorm_sq - 1.0).abs() > 0.01);
    }

    #[test]
    fn jump_model_rejects_half() {
        let spec = GridSpec::new(dim(1), 4.0, 1024).unwrap();
        let field = annulus_field(spec, 1.0, 2.0);
        let err = grid_hs_norm(&field, order(0.5), GridOptions::jump()).unwrap_err();
        assert!(matches!(err, Error::Pole { .. }));
    }

    #[test]
    fn mollified_annulus_against_transform_quadrature() {
        // 1D field 1_[1,1.5] * G_eps, even extension; its transform is the
        // annulus transform times the mollifier factor
        let eps = 0.05;
        let m = MollifierSpec::new(BumpShape::Exponential, eps).unwrap();
        let spec = GridSpec::new(dim(1), 8.0, 16384).unwrap();
        let field = SampledField::from_scalar_fn(spec, |x| {
            let r = x[0].abs();
            m.cdf(r - 1.0) - m.cdf(r - 1.5)
        });
        let s = 0.25;
        let grid = grid_hs_norm(&field, order(s), GridOptions::default()).unwrap();
        let iv = AnnulusInterval::new(1.0, 1.5).unwrap();
        let q = integrate(
            |xi| {
                let k = mollifier_ft_factor(eps, xi, &m, dim(1), QuadOptions::abs(1e-12)).unwrap();
                2.0 * xi.powf(2.0 * s) * (annulus_ft(&iv, dim(1), xi) * k).powi(2)
            },
            0.0,
            60.0,
            QuadOptions::abs(1e-10),
        )
        .unwrap()
        .value;
        assert!((grid.seminorm_sq - q).abs() / q < 0.02, "grid {} vs {q}", grid.seminorm_sq);
    }
}
