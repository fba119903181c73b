use super::grid::Grid2D;
use super::source::SpatialFunctional;
use crate::error::{Error, Result};

pub const CG_REL_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct RieszSolution {
    pub z: Vec<f64>,
    /// `|grad z|`, the discrete dual norm of the functional.
    pub vprime_norm: f64,
    pub iterations: usize,
}

/// Solve `<grad z, grad psi> = w(psi)` for all grid `psi` vanishing on the
/// Dirichlet sides, by Jacobi-preconditioned conjugate gradients.
pub fn riesz_solve(grid: &Grid2D, w: &SpatialFunctional) -> Result<RieszSolution> {
    let load = w.load(grid)?;
    riesz_solve_load(grid, &load)
}

pub fn riesz_solve_load(grid: &Grid2D, load: &[f64]) -> Result<RieszSolution> {
    let n = grid.n();
    let len = grid.len();
    let h2 = grid.h() * grid.h();
    let mut inv_diag = grid.zeros();
    for j in 0..n - 1 {
        for i in 0..n - 1 {
            inv_diag[grid.idx(i, j)] = h2 / (4.0 * grid.mass(i, j));
        }
    }
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };

    let b_norm = dot(load, load).sqrt();
    let mut z = grid.zeros();
    if b_norm == 0.0 {
        return Ok(RieszSolution {
            z,
            vprime_norm: 0.0,
            iterations: 0,
        });
    }
    let mut r = load.to_vec();
    grid.pin_dirichlet(&mut r);
    let mut s: Vec<f64> = r.iter().zip(&inv_diag).map(|(a, d)| a * d).collect();
    let mut p = s.clone();
    let mut kp = vec![0.0; len];
    let mut rs = dot(&r, &s);
    let max_iter = 20 * n + 200;
    for it in 1..=max_iter {
        grid.apply_stiffness(&p, &mut kp);
        let alpha = rs / dot(&p, &kp);
        for q in 0..len {
            z[q] += alpha * p[q];
            r[q] -= alpha * kp[q];
        }
        let res = dot(&r, &r).sqrt();
        if res <= CG_REL_TOL * b_norm {
            let vprime_norm = dot(load, &z).max(0.0).sqrt();
            return Ok(RieszSolution {
                z,
                vprime_norm,
                iterations: it,
            });
        }
        for q in 0..len {
            s[q] = r[q] * inv_diag[q];
        }
        let rs_new = dot(&r, &s);
        let beta = rs_new / rs;
        rs = rs_new;
        for q in 0..len {
            p[q] = s[q] + beta * p[q];
        }
    }
    let residual = dot(&r, &r).sqrt() / b_norm;
    Err(Error::CgNotConverged {
        iterations: max_iter,
        residual,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{eigenpair, DampingPair, ModeIndex};

    #[test]
    fn zero_functional() {
        let g = Grid2D::new(17).unwrap();
        let s = riesz_solve(&g, &SpatialFunctional::Density(g.zeros())).unwrap();
        assert_eq!(s.vprime_norm, 0.0);
        assert!(s.z.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn gradient_functional_recovers_its_field() {
        let g = Grid2D::new(65).unwrap();
        let mode = ModeIndex::new(0, 0);
        let phi = g.mode_field(mode);
        let s = riesz_solve(&g, &SpatialFunctional::Gradient(phi.clone())).unwrap();
        let err = s.z.iter().zip(&phi).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        assert!(err < 1e-8, "{err}");
        let sqrt_lam = eigenpair(mode).omega;
        assert!((s.vprime_norm - sqrt_lam).abs() / sqrt_lam < 1e-3);
        assert!((sqrt_lam - 2.2214).abs() < 1e-4);
    }

    #[test]
    fn boundary_functional_converges() {
        let mut norms = Vec::new();
        for n in [65, 129] {
            let g = Grid2D::new(n).unwrap();
            let a = DampingPair::constant(n, 0.1).unwrap();
            let w = SpatialFunctional::boundary(a, ModeIndex::new(0, 0));
            norms.push(riesz_solve(&g, &w).unwrap().vprime_norm);
        }
        assert!(norms[0] > 0.0);
        assert!((norms[0] - norms[1]).abs() / norms[1] < 0.02, "{norms:?}");
    }
}
