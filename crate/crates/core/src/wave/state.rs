use super::grid::Grid2D;
use crate::error::{invalid, Result};

/// Displacement and velocity fields at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: f64,
}

impl WaveState {
    pub fn zeros(grid: &Grid2D) -> Self {
        Self {
            u: grid.zeros(),
            v: grid.zeros(),
            t: 0.0,
        }
    }

    /// Initial state; Dirichlet nodes must already be zero.
    pub fn new(grid: &Grid2D, u: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if u.len() != grid.len() || v.len() != grid.len() {
            return Err(invalid(format!(
                "initial fields must have {} entries (got {} and {})",
                grid.len(),
                u.len(),
                v.len()
            )));
        }
        let n = grid.n();
        for k in 0..n {
            for p in [grid.idx(n - 1, k), grid.idx(k, n - 1)] {
                if u[p] != 0.0 || v[p] != 0.0 {
                    return Err(invalid("initial data must vanish on the Dirichlet sides"));
                }
            }
        }
        Ok(Self { u, v, t: 0.0 })
    }

    pub fn is_finite(&self) -> bool {
        self.u.iter().chain(&self.v).all(|x| x.is_finite())
    }
}

/// `E = (|grad u|^2 + |v|^2) / 2` with the grid's stiffness and mass forms.
pub fn energy(grid: &Grid2D, state: &WaveState) -> f64 {
    0.5 * (grid.stiffness_inner(&state.u, &state.u) + grid.l2_inner(&state.v, &state.v))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{eigenpair, ModeIndex};
    use std::f64::consts::PI;

    #[test]
    fn zero_state_energy() {
        let g = Grid2D::new(17).unwrap();
        assert_eq!(energy(&g, &WaveState::zeros(&g)), 0.0);
    }

    #[test]
    fn modal_energies() {
        let g = Grid2D::new(257).unwrap();
        for (mode, expect) in [
            (ModeIndex::new(0, 0), PI * PI / 4.0),
            (ModeIndex::new(1, 0), 5.0 * PI * PI / 4.0),
        ] {
            assert!((eigenpair(mode).lambda / 2.0 - expect).abs() < 1e-12);
            let s = WaveState::new(&g, g.mode_field(mode), g.zeros()).unwrap();
            let e = energy(&g, &s);
            assert!((e - expect).abs() / expect < 1e-4, "{mode}: {e}");
        }
    }

    #[test]
    fn dirichlet_data_rejected() {
        let g = Grid2D::new(17).unwrap();
        let u = g.field_from_fn(|_, _| 1.0);
        assert!(WaveState::new(&g, u, g.zeros()).is_err());
    }
}
