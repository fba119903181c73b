//! Forward and inverse problems for the wave equation on the unit square with
//! boundary damping `d_nu u + a d_t u = 0` on the sides `x = 0` and `y = 0`
//! and homogeneous Dirichlet data on `x = 1` and `y = 1`.
//!
//! The crate is organised as
//!
//! * [`spectral`]: eigenpairs, boundary modes, Fourier projection, Sobolev and
//!   Holder norms, corner compatibility checks;
//! * [`wave`]: leapfrog forward solver, energy, boundary traces, the Rellich
//!   identity check and the discrete Riesz solve for dual norms;
//! * [`diagnostics`]: decay fits and observability-constant estimates;
//! * [`inverse_source`]: the convolution operator, its adjoint and the
//!   Gronwall stability factor;
//! * [`reconstruction`]: modal probing, damping recovery, gap estimates and
//!   the stability sweep.

pub mod diagnostics;
pub mod error;
pub mod inverse_source;
pub mod quadrature;
pub mod reconstruction;
pub mod spectral;
pub mod wave;

pub use error::{Error, Result};
