use super::probe::{ModalMeasurement, ReferenceTraces};
use crate::error::Result;
use crate::spectral::{eigenpair, DampingPair, ModeIndex};
use crate::wave::{Grid2D, TimeGrid};

pub const DEFAULT_PROBE_BUDGET: usize = 2;

/// Finite-probe lower bound for `|Lambda_a - Lambda_0|`.
#[derive(Debug, Clone, PartialEq)]
pub struct GapEstimate {
    pub value: f64,
    pub probe_budget: usize,
    /// `(mode, trace_norm / |phi_kl|_{U_0})`
    pub normalized: Vec<(ModeIndex, f64)>,
}

/// `max_{k,l <= K} |Lambda_a phi_kl - Lambda_0 phi_kl| / sqrt(lambda + lambda^2)`.
pub fn gap_from_measurements(meas: &[ModalMeasurement], probe_budget: usize) -> GapEstimate {
    let normalized: Vec<(ModeIndex, f64)> = meas
        .iter()
        .filter(|m| m.mode.k <= probe_budget && m.mode.l <= probe_budget)
        .map(|m| (m.mode, m.trace_norm / eigenpair(m.mode).graph_norm()))
        .collect();
    let value = normalized.iter().map(|p| p.1).fold(0.0, f64::max);
    GapEstimate {
        value,
        probe_budget,
        normalized,
    }
}

pub fn estimate_gap(
    grid: &Grid2D,
    a: &DampingPair,
    probe_budget: usize,
    time: TimeGrid,
) -> Result<GapEstimate> {
    let refs = ReferenceTraces::compute(grid, time, &ModeIndex::square(probe_budget))?;
    Ok(gap_from_measurements(&refs.probe_all(a)?, probe_budget))
}
