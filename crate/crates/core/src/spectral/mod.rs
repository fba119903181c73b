//! Spectral objects of the mixed-boundary Laplacian on the unit square,
//! boundary modes, Fourier analysis and the norm machinery on (0,1).

mod compat;
mod damping;
mod fourier;
mod modes;
mod norms;
mod sampled;

pub use compat::{compat_integral, damping_compat_check, CompatResult, DYADIC_REL_TOL};
pub use damping::{DampingClass, DampingPair, CORNER_TOL_EXACT};
pub use fourier::{
    fourier_project, fourier_synthesize, min_samples_for_order, BoundarySide, FourierCoeffs,
};
pub use modes::{eigenpair, eval_phi1d, eval_phi2d, Eigenpair, ModeIndex};
pub use norms::{holder_seminorm, multiplier_bound_check, sobolev_norms, MultiplierCheck, SobolevNorms};
pub use sampled::SampledFunction1D;
