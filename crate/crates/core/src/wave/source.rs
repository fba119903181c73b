use super::grid::Grid2D;
use crate::error::{invalid, Result};
use crate::inverse_source::Modulation;
use crate::quadrature::end_factor;
use crate::spectral::{eigenpair, eval_phi2d, DampingPair, ModeIndex};

/// Spatial part `w` of a separable source `lambda(t) w`.
#[derive(Debug, Clone, PartialEq)]
pub enum SpatialFunctional {
    /// `w(psi) = int f psi` for a grid field `f`.
    Density(Vec<f64>),
    /// `w(psi) = int grad g . grad psi` for a grid field `g`.
    Gradient(Vec<f64>),
    /// `w_a(psi) = -sqrt(lambda_kl) int_{Gamma_1} a phi_kl psi`.
    Boundary { damping: DampingPair, mode: ModeIndex },
}

impl SpatialFunctional {
    pub fn boundary(damping: DampingPair, mode: ModeIndex) -> Self {
        SpatialFunctional::Boundary { damping, mode }
    }

    /// Nodal load vector `F_p = w(e_p)` against the hat basis; zero on Dirichlet nodes.
    pub fn load(&self, grid: &Grid2D) -> Result<Vec<f64>> {
        let n = grid.n();
        let mut out = grid.zeros();
        match self {
            SpatialFunctional::Density(f) => {
                check_len(grid, f.len())?;
                for j in 0..n {
                    for i in 0..n {
                        let p = grid.idx(i, j);
                        out[p] = grid.mass(i, j) * f[p];
                    }
                }
            }
            SpatialFunctional::Gradient(g) => {
                check_len(grid, g.len())?;
                grid.apply_stiffness(g, &mut out);
            }
            SpatialFunctional::Boundary { damping, mode } => {
                let sqrt_lam = eigenpair(*mode).omega;
                let a = grid.boundary_damping(damping);
                let h = grid.h();
                for (side, a_side) in a.iter().enumerate() {
                    for (k, &ak) in a_side.iter().enumerate() {
                        let p = grid.side_node(side, k);
                        let (x, y) = match side {
                            0 => (grid.coord(k), 0.0),
                            _ => (0.0, grid.coord(k)),
                        };
                        let phi = eval_phi2d(*mode, x, y);
                        out[p] -= sqrt_lam * ak * phi * h * end_factor(k, n);
                    }
                }
            }
        }
        grid.pin_dirichlet(&mut out);
        Ok(out)
    }

    pub fn scaled(&self, c: f64) -> Result<Self> {
        Ok(match self {
            SpatialFunctional::Density(f) => {
                SpatialFunctional::Density(f.iter().map(|x| c * x).collect())
            }
            SpatialFunctional::Gradient(g) => {
                SpatialFunctional::Gradient(g.iter().map(|x| c * x).collect())
            }
            SpatialFunctional::Boundary { damping, mode } => SpatialFunctional::Boundary {
                damping: damping.scaled(c)?,
                mode: *mode,
            },
        })
    }
}

fn check_len(grid: &Grid2D, len: usize) -> Result<()> {
    if len != grid.len() {
        return Err(invalid(format!(
            "source field has {len} entries, grid has {}",
            grid.len()
        )));
    }
    Ok(())
}

/// Source `lambda(t) w` of the forced problem.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceSpec {
    pub modulation: Modulation,
    pub functional: SpatialFunctional,
}

impl SourceSpec {
    pub fn new(modulation: Modulation, functional: SpatialFunctional) -> Self {
        Self {
            modulation,
            functional,
        }
    }
}
