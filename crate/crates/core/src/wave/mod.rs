//! Forward solver for the boundary-damped wave equation on the unit square.

mod grid;
mod rellich;
mod riesz;
mod solver;
mod source;
mod state;
mod trace;

pub use grid::Grid2D;
pub use rellich::{rellich_report, rellich_residual, RellichReport};
pub use riesz::{riesz_solve, riesz_solve_load, RieszSolution, CG_REL_TOL};
pub use solver::{
    dissipation_residual, solve, solve_free, step, Stepper, TimeGrid, Trajectory, DEFAULT_DT_FACTOR,
};
pub use source::{SourceSpec, SpatialFunctional};
pub use state::{energy, WaveState};
pub use trace::BoundaryTrace;
