//! Numerical machinery for short paths in diffeomorphism groups under
//! fractional Sobolev metrics of order `0 <= s < 1/2`.
//!
//! The crate is organised bottom-up:
//!
//! * [`specfun`] - log-Gamma, Bessel `J_nu` and the regularized Gauss
//!   hypergeometric function.
//! * [`quad`] - Gauss-Kronrod / Gauss-Legendre quadrature and oscillatory tails.
//! * [`radialft`] - Fourier transforms of radial functions on `R^n`.
//! * [`sobolev`] - closed-form, quadrature and grid evaluation of `H^s` norms.
//! * [`construct`] - mollifiers, schedules and the mollified annulus field.
//! * [`flow`] - adaptive Dormand-Prince flows, endpoint maps and drift.
//! * [`experiments`] - length bounds, direct lengths and convergence sweeps.
//!
//! All transforms use the convention `F v(xi) = int exp(-2 pi i <x, xi>) v(x) dx`.

pub mod construct;
pub mod error;
pub mod experiments;
pub mod flow;
pub mod quad;
pub mod radialft;
pub mod sobolev;
pub mod specfun;

pub use error::{Error, Result};
