mod gap;
mod linearized;
mod lsq;
mod probe;
mod stability;
mod sweep;

pub use gap::{estimate_gap, gap_from_measurements, GapEstimate, DEFAULT_PROBE_BUDGET};
pub use linearized::{
    errors_unguarded, linearized_recover, modal_decay_rate, recover_linearized,
    relative_error_unguarded, LinearizedEstimate, DEFAULT_GUARD, PHI_FLOOR,
};
pub use lsq::{fit_damping_least_squares, LsqOptions, LsqResult, MAX_LSQ_ORDER};
pub use probe::{
    check_resolution, modal_template, probe_mode, probe_mode_with_reference, reference_trace,
    time_project, ModalMeasurement, ReferenceTraces,
};
pub use stability::{
    coefficient_constant, exponent_k_squared, exponent_lambda, log_stability_profile,
    n0_inequality, n0_scan, product_bound_check, product_bound_constant, select_n0,
    stability_rhs, trunc_rate, ProductBoundCheck,
};
pub use sweep::{
    scaled_family, stability_sweep, FamilyMember, SweepConfig, SweepOutcome, SweepRecord,
    CSV_HEADER,
};
