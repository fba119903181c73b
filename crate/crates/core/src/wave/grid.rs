use crate::error::{invalid, Result};
use crate::quadrature::end_factor;
use crate::spectral::{eval_phi2d, DampingPair, ModeIndex};

/// Uniform node grid on the unit square, `n` nodes per side.
///
/// Fields are stored row-major: node `(i, j)` at `(i h, j h)` has index
/// `j * n + i`. Nodes with `i = n - 1` or `j = n - 1` lie on the Dirichlet
/// sides; the rows `j = 0` and `i = 0` are the damped sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Grid2D {
    n: usize,
}

impl Grid2D {
    pub const MIN_NODES: usize = 17;

    pub fn new(n: usize) -> Result<Self> {
        if n < Self::MIN_NODES {
            return Err(invalid(format!(
                "grid needs at least {} nodes per side, got {n}",
                Self::MIN_NODES
            )));
        }
        Ok(Self { n })
    }

    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn h(&self) -> f64 {
        1.0 / (self.n - 1) as f64
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn idx(&self, i: usize, j: usize) -> usize {
        j * self.n + i
    }

    #[inline]
    pub fn coord(&self, i: usize) -> f64 {
        i as f64 * self.h()
    }

    #[inline]
    pub fn is_dirichlet(&self, i: usize, j: usize) -> bool {
        i == self.n - 1 || j == self.n - 1
    }

    pub fn zeros(&self) -> Vec<f64> {
        vec![0.0; self.len()]
    }

    pub fn field_from_fn(&self, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
        let mut out = self.zeros();
        for j in 0..self.n {
            for i in 0..self.n {
                out[self.idx(i, j)] = f(self.coord(i), self.coord(j));
            }
        }
        out
    }

    /// Sampled eigenfunction, exactly zero on the Dirichlet rows.
    pub fn mode_field(&self, mode: ModeIndex) -> Vec<f64> {
        let mut out = self.field_from_fn(|x, y| eval_phi2d(mode, x, y));
        self.pin_dirichlet(&mut out);
        out
    }

    pub fn pin_dirichlet(&self, field: &mut [f64]) {
        let n = self.n;
        for k in 0..n {
            field[self.idx(n - 1, k)] = 0.0;
            field[self.idx(k, n - 1)] = 0.0;
        }
    }

    /// Lumped (2D trapezoid) mass of node `(i, j)`.
    #[inline]
    pub fn mass(&self, i: usize, j: usize) -> f64 {
        let h = self.h();
        h * h * end_factor(i, self.n) * end_factor(j, self.n)
    }

    pub fn integrate(&self, field: &[f64]) -> f64 {
        let mut s = 0.0;
        for j in 0..self.n {
            for i in 0..self.n {
                s += self.mass(i, j) * field[self.idx(i, j)];
            }
        }
        s
    }

    pub fn l2_inner(&self, f: &[f64], g: &[f64]) -> f64 {
        let mut s = 0.0;
        for j in 0..self.n {
            for i in 0..self.n {
                let p = self.idx(i, j);
                s += self.mass(i, j) * f[p] * g[p];
            }
        }
        s
    }

    pub fn l2_norm(&self, f: &[f64]) -> f64 {
        self.l2_inner(f, f).sqrt()
    }

    /// Edge-based stiffness form `int grad f . grad g` with trapezoid weights
    /// across each edge's normal direction.
    pub fn stiffness_inner(&self, f: &[f64], g: &[f64]) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for j in 0..n {
            let cj = end_factor(j, n);
            for i in 0..n - 1 {
                let p = self.idx(i, j);
                let q = self.idx(i + 1, j);
                s += cj * (f[q] - f[p]) * (g[q] - g[p]);
            }
        }
        for j in 0..n - 1 {
            for i in 0..n {
                let ci = end_factor(i, n);
                let p = self.idx(i, j);
                let q = self.idx(i, j + 1);
                s += ci * (f[q] - f[p]) * (g[q] - g[p]);
            }
        }
        s
    }

    /// `|grad f|_{L2}`.
    pub fn grad_norm(&self, f: &[f64]) -> f64 {
        self.stiffness_inner(f, f).sqrt()
    }

    /// Nodal stiffness action `K f`, zero on Dirichlet nodes.
    pub fn apply_stiffness(&self, f: &[f64], out: &mut [f64]) {
        let n = self.n;
        for j in 0..n {
            for i in 0..n {
                let p = self.idx(i, j);
                out[p] = if self.is_dirichlet(i, j) {
                    0.0
                } else {
                    -self.mass(i, j) * self.laplacian_at(f, i, j)
                };
            }
        }
    }

    /// Five-point Laplacian with mirror ghosts on the damped sides (zero
    /// normal derivative). Only valid at non-Dirichlet nodes.
    #[inline]
    pub fn laplacian_at(&self, u: &[f64], i: usize, j: usize) -> f64 {
        let n = self.n;
        let p = j * n + i;
        let right = u[p + 1];
        let left = if i == 0 { right } else { u[p - 1] };
        let up = u[p + n];
        let down = if j == 0 { up } else { u[p - n] };
        let h = self.h();
        ((left + right) + (down + up) - 4.0 * u[p]) / (h * h)
    }

    /// Damping coefficient at the nodes of each damped side, with the shared
    /// corner value at index 0.
    pub fn boundary_damping(&self, a: &DampingPair) -> [Vec<f64>; 2] {
        let corner = a.corner_value();
        let sample = |side: usize| -> Vec<f64> {
            let f = a.side(side);
            let mut vals: Vec<f64> = if f.len() == self.n {
                f.values().to_vec()
            } else {
                (0..self.n).map(|i| f.value_at(self.coord(i))).collect()
            };
            vals[0] = corner;
            vals
        };
        [sample(0), sample(1)]
    }

    /// Node of side `side` (0: `y = 0`, 1: `x = 0`) at position `k`.
    #[inline]
    pub fn side_node(&self, side: usize, k: usize) -> usize {
        match side {
            0 => self.idx(k, 0),
            _ => self.idx(0, k),
        }
    }

    /// Inward neighbour at depth `d` of side node `k`.
    #[inline]
    pub fn side_inward(&self, side: usize, k: usize, d: usize) -> usize {
        match side {
            0 => self.idx(k, d),
            _ => self.idx(d, k),
        }
    }

    /// Transpose a field (exchange x and y).
    pub fn transpose(&self, f: &[f64]) -> Vec<f64> {
        let mut out = self.zeros();
        for j in 0..self.n {
            for i in 0..self.n {
                out[self.idx(j, i)] = f[self.idx(i, j)];
            }
        }
        out
    }
}
