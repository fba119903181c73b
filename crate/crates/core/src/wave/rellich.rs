use super::grid::Grid2D;
use crate::error::{invalid, Result};
use crate::quadrature::end_factor;

/// Both sides of the Rellich identity for the multiplier `m(x) = x - x0`:
/// `2 int Lap(phi) (m . grad phi) = 2 int_Gamma d_nu phi (m . grad phi) - int_Gamma (m . nu) |grad phi|^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RellichReport {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
    /// Magnitude of the largest term, for relative tolerances.
    pub scale: f64,
}

fn d1(f: &[f64], k: usize, h: f64) -> f64 {
    let n = f.len();
    if k == 0 {
        (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * h)
    } else if k == n - 1 {
        (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * h)
    } else {
        (f[k + 1] - f[k - 1]) / (2.0 * h)
    }
}

fn d2(f: &[f64], k: usize, h: f64) -> f64 {
    let n = f.len();
    if k == 0 {
        (2.0 * f[0] - 5.0 * f[1] + 4.0 * f[2] - f[3]) / (h * h)
    } else if k == n - 1 {
        (2.0 * f[n - 1] - 5.0 * f[n - 2] + 4.0 * f[n - 3] - f[n - 4]) / (h * h)
    } else {
        (f[k - 1] - 2.0 * f[k] + f[k + 1]) / (h * h)
    }
}

pub fn rellich_report(grid: &Grid2D, phi: &[f64], x0: (f64, f64)) -> Result<RellichReport> {
    if phi.len() != grid.len() {
        return Err(invalid("field size does not match grid"));
    }
    if !(x0.0 > 1.0 && x0.1 > 1.0) {
        return Err(invalid(format!(
            "multiplier centre must lie beyond (1, 1), got {x0:?}"
        )));
    }
    let n = grid.n();
    let h = grid.h();
    let row = |j: usize| -> Vec<f64> { (0..n).map(|i| phi[grid.idx(i, j)]).collect() };
    let col = |i: usize| -> Vec<f64> { (0..n).map(|j| phi[grid.idx(i, j)]).collect() };
    let rows: Vec<Vec<f64>> = (0..n).map(row).collect();
    let cols: Vec<Vec<f64>> = (0..n).map(col).collect();

    let mut gx = grid.zeros();
    let mut gy = grid.zeros();
    let mut lhs = 0.0;
    let mut lhs_abs = 0.0;
    for j in 0..n {
        for i in 0..n {
            let p = grid.idx(i, j);
            gx[p] = d1(&rows[j], i, h);
            gy[p] = d1(&cols[i], j, h);
            let lap = d2(&rows[j], i, h) + d2(&cols[i], j, h);
            let m_dot = (grid.coord(i) - x0.0) * gx[p] + (grid.coord(j) - x0.1) * gy[p];
            let term = 2.0 * grid.mass(i, j) * lap * m_dot;
            lhs += term;
            lhs_abs += term.abs();
        }
    }

    // (node of side at position k, outward normal)
    let sides: [(Box<dyn Fn(usize) -> (usize, usize)>, (f64, f64)); 4] = [
        (Box::new(|k| (k, 0)), (0.0, -1.0)),
        (Box::new(|k| (k, n - 1)), (0.0, 1.0)),
        (Box::new(|k| (0, k)), (-1.0, 0.0)),
        (Box::new(|k| (n - 1, k)), (1.0, 0.0)),
    ];
    let mut rhs = 0.0;
    let mut rhs_abs = 0.0;
    for (node, nu) in &sides {
        for k in 0..n {
            let (i, j) = node(k);
            let p = grid.idx(i, j);
            let m = (grid.coord(i) - x0.0, grid.coord(j) - x0.1);
            let dn = nu.0 * gx[p] + nu.1 * gy[p];
            let m_grad = m.0 * gx[p] + m.1 * gy[p];
            let m_nu = m.0 * nu.0 + m.1 * nu.1;
            let w = h * end_factor(k, n);
            let a = 2.0 * w * dn * m_grad;
            let b = w * m_nu * (gx[p] * gx[p] + gy[p] * gy[p]);
            rhs += a - b;
            rhs_abs += a.abs() + b.abs();
        }
    }
    Ok(RellichReport {
        lhs,
        rhs,
        residual: (lhs - rhs).abs(),
        scale: lhs_abs.max(rhs_abs),
    })
}

pub fn rellich_residual(grid: &Grid2D, phi: &[f64], x0: (f64, f64)) -> Result<f64> {
    Ok(rellich_report(grid, phi, x0)?.residual)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ModeIndex;

    #[test]
    fn linear_and_constant_fields_are_exact() {
        let g = Grid2D::new(33).unwrap();
        let x0 = (1.25, 1.25);
        let c = g.field_from_fn(|_, _| 3.0);
        assert_eq!(rellich_residual(&g, &c, x0).unwrap(), 0.0);
        let lin = g.field_from_fn(|x, _| x);
        let r = rellich_report(&g, &lin, x0).unwrap();
        assert!(r.lhs.abs() < 1e-10);
        assert!(r.residual <= 1e-8 * r.scale.max(1.0), "{r:?}");
        let lin2 = g.field_from_fn(|x, y| 2.0 * x - 0.5 * y + 1.0);
        let r = rellich_report(&g, &lin2, (1.5, 2.0)).unwrap();
        assert!(r.residual <= 1e-8 * r.scale.max(1.0), "{r:?}");
    }

    #[test]
    fn eigenfunction_residual_decreases() {
        let mut last = f64::INFINITY;
        for n in [33, 65, 129] {
            let g = Grid2D::new(n).unwrap();
            let phi = g.mode_field(ModeIndex::new(0, 0));
            let r = rellich_residual(&g, &phi, (1.25, 1.25)).unwrap();
            assert!(r < last, "n = {n}: {r} >= {last}");
            last = r;
        }
    }

    #[test]
    fn centre_must_be_outside() {
        let g = Grid2D::new(17).unwrap();
        assert!(rellich_residual(&g, &g.zeros(), (0.5, 1.5)).is_err());
    }
}
