use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::end_factor;
use crate::spectral::{eigenpair, DampingPair, ModeIndex, SampledFunction1D};
use crate::wave::{solve_free, BoundaryTrace, Grid2D, TimeGrid};

/// Minimum grid nodes per half-period of the probed mode.
pub const NODES_PER_HALF_PERIOD: f64 = 8.0;

/// Trace difference `Lambda_a phi_kl - Lambda_0 phi_kl` for data `(phi_kl, 0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalMeasurement {
    pub mode: ModeIndex,
    pub trace: BoundaryTrace,
    pub trace_norm: f64,
}

pub fn check_resolution(grid: &Grid2D, mode: ModeIndex) -> Result<()> {
    let k = mode.k.max(mode.l) as f64 + 0.5;
    let per_half = (grid.n() - 1) as f64 / k;
    if per_half < NODES_PER_HALF_PERIOD {
        return Err(Error::Resolution(format!(
            "mode {mode} has {per_half:.1} nodes per half-period on n = {}, need {NODES_PER_HALF_PERIOD}",
            grid.n()
        )));
    }
    Ok(())
}

/// Undamped trace `Lambda_0 phi_kl`.
pub fn reference_trace(grid: &Grid2D, mode: ModeIndex, time: TimeGrid) -> Result<BoundaryTrace> {
    check_resolution(grid, mode)?;
    let zero = DampingPair::zero(grid.n())?;
    Ok(solve_free(grid, &grid.mode_field(mode), &zero, time)?.trace)
}

/// Probe against a precomputed undamped trace.
pub fn probe_mode_with_reference(
    grid: &Grid2D,
    a: &DampingPair,
    mode: ModeIndex,
    time: TimeGrid,
    reference: &BoundaryTrace,
) -> Result<ModalMeasurement> {
    check_resolution(grid, mode)?;
    let traj = solve_free(grid, &grid.mode_field(mode), a, time)?;
    let trace = traj.trace.difference(reference)?;
    let trace_norm = trace.l2_norm();
    Ok(ModalMeasurement {
        mode,
        trace,
        trace_norm,
    })
}

pub fn probe_mode(
    grid: &Grid2D,
    a: &DampingPair,
    mode: ModeIndex,
    time: TimeGrid,
) -> Result<ModalMeasurement> {
    let reference = reference_trace(grid, mode, time)?;
    probe_mode_with_reference(grid, a, mode, time, &reference)
}

/// Undamped traces for a probe set, computed once and shared.
#[derive(Debug, Clone)]
pub struct ReferenceTraces {
    pub grid: Grid2D,
    pub time: TimeGrid,
    pub traces: Vec<(ModeIndex, BoundaryTrace)>,
}

impl ReferenceTraces {
    pub fn compute(grid: &Grid2D, time: TimeGrid, modes: &[ModeIndex]) -> Result<Self> {
        let traces = modes
            .par_iter()
            .map(|&m| Ok((m, reference_trace(grid, m, time)?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            grid: *grid,
            time,
            traces,
        })
    }

    pub fn get(&self, mode: ModeIndex) -> Option<&BoundaryTrace> {
        self.traces.iter().find(|(m, _)| *m == mode).map(|(_, t)| t)
    }

    pub fn modes(&self) -> Vec<ModeIndex> {
        self.traces.iter().map(|(m, _)| *m).collect()
    }

    /// Probe every stored mode under damping `a`.
    pub fn probe_all(&self, a: &DampingPair) -> Result<Vec<ModalMeasurement>> {
        self.traces
            .par_iter()
            .map(|(m, r)| probe_mode_with_reference(&self.grid, a, *m, self.time, r))
            .collect()
    }
}

/// Velocity profile of a damped mode, normalised so that `decay = 0` gives
/// `sin(omega t)`: `(omega / omega') e^{-decay t} sin(omega' t)`.
pub fn modal_template(omega: f64, decay: f64, t: f64) -> f64 {
    let omega_d = (omega * omega - decay * decay).sqrt();
    (omega / omega_d) * (-decay * t).exp() * (omega_d * t).sin()
}

/// Per-side projection of the measured trace onto the modal template,
/// `Y(s) = int trace(s, t) T(t) dt / int T(t)^2 dt`.
///
/// `decay = 0` is the plain `sin(omega t)` projection of the undamped
/// first-order model.
pub fn time_project(meas: &ModalMeasurement, decay: f64) -> Result<[SampledFunction1D; 2]> {
    let omega = eigenpair(meas.mode).omega;
    if !(decay >= 0.0 && decay < omega) {
        return Err(crate::error::invalid(format!(
            "decay rate {decay} outside [0, {omega})"
        )));
    }
    let tr = &meas.trace;
    let levels = tr.steps() + 1;
    let dt = tr.dt();
    let weights: Vec<f64> = (0..levels).map(|k| end_factor(k, levels) * dt).collect();
    let tmpl: Vec<f64> = (0..levels)
        .map(|k| modal_template(omega, decay, k as f64 * dt))
        .collect();
    let den: f64 = tmpl.iter().zip(&weights).map(|(x, w)| w * x * x).sum();
    if !(den > 1e-12 * tr.tau()) {
        return Err(Error::DegenerateProjection(den));
    }
    let n = tr.n();
    let side = |s: usize| -> Result<SampledFunction1D> {
        let mut acc = vec![0.0; n];
        for k in 0..levels {
            let c = weights[k] * tmpl[k] / den;
            for (a, x) in acc.iter_mut().zip(tr.at(s, k)) {
                *a += c * x;
            }
        }
        SampledFunction1D::new(acc)
    };
    Ok([side(0)?, side(1)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn synthetic(n: usize, steps: usize, dt: f64, f: impl Fn(usize, usize, f64) -> f64) -> BoundaryTrace {
        let mut blocks = [vec![0.0; n * (steps + 1)], vec![0.0; n * (steps + 1)]];
        for (s, b) in blocks.iter_mut().enumerate() {
            for k in 0..=steps {
                for i in 0..n {
                    b[k * n + i] = f(s, i, k as f64 * dt);
                }
            }
        }
        let zeros = [vec![0.0; n * (steps + 1)], vec![0.0; n * (steps + 1)]];
        BoundaryTrace::from_parts(n, dt, steps, blocks, zeros).unwrap()
    }

    #[test]
    fn projection_recovers_separable_profile() {
        let mode = ModeIndex::new(0, 0);
        let om = eigenpair(mode).omega;
        let n = 17;
        let g = |s: usize, i: usize| (s as f64 + 1.0) * (1.0 + i as f64 * 0.1);
        for decay in [0.0, 0.3] {
            let trace = synthetic(n, 4000, 1e-3, |s, i, t| g(s, i) * modal_template(om, decay, t));
            let meas = ModalMeasurement {
                mode,
                trace_norm: trace.l2_norm(),
                trace,
            };
            let y = time_project(&meas, decay).unwrap();
            for s in 0..2 {
                for i in 0..n {
                    assert!((y[s].values()[i] - g(s, i)).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn zero_trace_projects_to_zero() {
        let trace = synthetic(17, 100, 0.01, |_, _, _| 0.0);
        let meas = ModalMeasurement {
            mode: ModeIndex::new(0, 0),
            trace_norm: 0.0,
            trace,
        };
        let y = time_project(&meas, 0.0).unwrap();
        assert_eq!(y[0].max_abs() + y[1].max_abs(), 0.0);
    }

    #[test]
    fn resolution_check() {
        let g = Grid2D::new(17).unwrap();
        assert!(check_resolution(&g, ModeIndex::new(1, 1)).is_ok());
        assert!(check_resolution(&g, ModeIndex::new(2, 0)).is_err());
    }
}
