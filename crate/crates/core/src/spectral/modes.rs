use std::f64::consts::{PI, SQRT_2};
use std::fmt;

/// Index `(k, l)` of a mixed Dirichlet/Neumann eigenmode of the unit square.
///
/// Negative indices duplicate nonnegative ones up to sign, so only `k, l >= 0`
/// are representable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeIndex {
    pub k: usize,
    pub l: usize,
}

impl ModeIndex {
    pub const fn new(k: usize, l: usize) -> Self {
        Self { k, l }
    }

    /// Same mode with the axes exchanged.
    pub const fn swapped(self) -> Self {
        Self { k: self.l, l: self.k }
    }

    /// All modes with `0 <= k, l <= max`, row-major in `k`.
    pub fn square(max: usize) -> Vec<ModeIndex> {
        (0..=max)
            .flat_map(|k| (0..=max).map(move |l| ModeIndex::new(k, l)))
            .collect()
    }
}

impl fmt::Display for ModeIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.k, self.l)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenpair {
    pub mode: ModeIndex,
    pub lambda: f64,
    pub omega: f64,
}

impl Eigenpair {
    /// Norm of the eigenfunction in the graph norm `(|v|_V^2 + |Lap v|^2)^{1/2}`.
    pub fn graph_norm(&self) -> f64 {
        (self.lambda + self.lambda * self.lambda).sqrt()
    }
}

#[inline]
pub(crate) fn half_wavenumber(k: usize) -> f64 {
    (k as f64 + 0.5) * PI
}

pub fn eigenpair(mode: ModeIndex) -> Eigenpair {
    let kk = k_sq(mode.k);
    let ll = k_sq(mode.l);
    let lambda = (kk + ll) * PI * PI;
    Eigenpair {
        mode,
        lambda,
        omega: lambda.sqrt(),
    }
}

fn k_sq(k: usize) -> f64 {
    let s = k as f64 + 0.5;
    s * s
}

/// `2 cos((k+1/2) pi x) cos((l+1/2) pi y)`: vanishes on `x = 1` and `y = 1`,
/// zero normal derivative on `x = 0` and `y = 0`, unit L2 norm.
pub fn eval_phi2d(mode: ModeIndex, x: f64, y: f64) -> f64 {
    2.0 * (half_wavenumber(mode.k) * x).cos() * (half_wavenumber(mode.l) * y).cos()
}

/// Orthonormal boundary mode `sqrt(2) cos((k+1/2) pi s)` on (0,1).
pub fn eval_phi1d(k: usize, s: f64) -> f64 {
    SQRT_2 * (half_wavenumber(k) * s).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::trapezoid;

    #[test]
    fn eigenvalues_match_formula() {
        assert!((eigenpair(ModeIndex::new(0, 0)).lambda - PI * PI / 2.0).abs() < 1e-12);
        assert!((eigenpair(ModeIndex::new(1, 0)).lambda - 2.5 * PI * PI).abs() < 1e-12);
        let e = eigenpair(ModeIndex::new(2, 3));
        assert!((e.lambda - 18.5 * PI * PI).abs() < 1e-11);
        assert!((e.lambda - 182.58).abs() < 1e-2);
        assert!((e.omega * e.omega - e.lambda).abs() < 1e-10);
    }

    #[test]
    fn phi2d_values() {
        assert_eq!(eval_phi2d(ModeIndex::new(0, 0), 0.0, 0.0), 2.0);
        for k in 0..4 {
            for l in 0..4 {
                assert!(eval_phi2d(ModeIndex::new(k, l), 1.0, 0.3).abs() < 1e-14);
                assert!(eval_phi2d(ModeIndex::new(k, l), 0.7, 1.0).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn phi00_has_unit_norm() {
        // 2D trapezoid oracle, n = 513
        let n = 513;
        let h = 1.0 / (n - 1) as f64;
        let rows: Vec<f64> = (0..n)
            .map(|j| {
                let line: Vec<f64> = (0..n)
                    .map(|i| eval_phi2d(ModeIndex::new(0, 0), i as f64 * h, j as f64 * h).powi(2))
                    .collect();
                trapezoid(&line, h)
            })
            .collect();
        assert!((trapezoid(&rows, h) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn phi1d_values_and_orthogonality() {
        assert!((eval_phi1d(0, 0.0) - SQRT_2).abs() < 1e-15);
        assert!(eval_phi1d(0, 1.0).abs() < 1e-15);
        let n = 1025;
        let h = 1.0 / (n - 1) as f64;
        let prod: Vec<f64> = (0..n)
            .map(|i| eval_phi1d(0, i as f64 * h) * eval_phi1d(1, i as f64 * h))
            .collect();
        assert!(trapezoid(&prod, h).abs() < 1e-12);
    }

    #[test]
    fn orthonormality_up_to_eight() {
        let n = 1025;
        let h = 1.0 / (n - 1) as f64;
        for k in 0..=8 {
            for kp in 0..=8 {
                let prod: Vec<f64> = (0..n)
                    .map(|i| eval_phi1d(k, i as f64 * h) * eval_phi1d(kp, i as f64 * h))
                    .collect();
                let expect = if k == kp { 1.0 } else { 0.0 };
                assert!((trapezoid(&prod, h) - expect).abs() < 1e-10, "k={k} k'={kp}");
            }
        }
    }
}
