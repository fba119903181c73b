use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::probe::{reference_trace, ModalMeasurement};
use crate::error::{invalid, Result};
use crate::quadrature::end_factor;
use crate::spectral::{eval_phi1d, DampingPair, SampledFunction1D};
use crate::wave::{solve_free, BoundaryTrace, Grid2D, TimeGrid};

pub const MAX_LSQ_ORDER: usize = 4;
/// Consecutive residual increases that end the iteration.
pub const MAX_INCREASES: usize = 3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LsqOptions {
    /// Highest boundary mode in the correction, at most [`MAX_LSQ_ORDER`].
    pub order: usize,
    pub max_iters: usize,
    /// Forward-difference step on the correction coefficients.
    pub fd_step: f64,
}

impl Default for LsqOptions {
    fn default() -> Self {
        Self {
            order: MAX_LSQ_ORDER,
            max_iters: 8,
            fd_step: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LsqResult {
    pub damping: DampingPair,
    pub initial_residual: f64,
    /// Lowest data residual reached (that of `damping`).
    pub residual: f64,
    /// Residual after each evaluated iterate, starting with `init`.
    pub history: Vec<f64>,
    /// Set when the residual rose for [`MAX_INCREASES`] consecutive steps.
    pub stalled: bool,
}

struct Problem<'a> {
    grid: Grid2D,
    time: TimeGrid,
    init: DampingPair,
    order: usize,
    u0: Vec<Vec<f64>>,
    targets: Vec<BoundaryTrace>,
    sqrt_w: &'a [f64],
}

impl Problem<'_> {
    fn params(&self) -> usize {
        2 * (self.order + 1)
    }

    /// `init + sum_k c_jk phi_k`, corner averaged and clipped at zero.
    fn damping(&self, c: &[f64]) -> Result<DampingPair> {
        let n = self.grid.n();
        let k1 = self.order + 1;
        let mut sides: Vec<Vec<f64>> = (0..2)
            .map(|s| {
                let base = self.init.side(s).values();
                (0..n)
                    .map(|i| {
                        let x = i as f64 * self.grid.h();
                        let corr: f64 = (0..k1).map(|k| c[s * k1 + k] * eval_phi1d(k, x)).sum();
                        (base[i] + corr).max(0.0)
                    })
                    .collect()
            })
            .collect();
        let corner = 0.5 * (sides[0][0] + sides[1][0]);
        sides[0][0] = corner;
        sides[1][0] = corner;
        let a2 = SampledFunction1D::new(sides.pop().unwrap())?;
        let a1 = SampledFunction1D::new(sides.pop().unwrap())?;
        DampingPair::new(a1, a2)
    }

    /// Weighted misfit of the predicted traces against the data.
    fn residual(&self, c: &[f64]) -> Result<Vec<f64>> {
        let a = self.damping(c)?;
        let mut out = Vec::new();
        for (u0, target) in self.u0.iter().zip(&self.targets) {
            let pred = solve_free(&self.grid, u0, &a, self.time)?.trace;
            for s in 0..2 {
                out.extend(
                    pred.normal(s)
                        .iter()
                        .zip(target.normal(s))
                        .zip(self.sqrt_w)
                        .map(|((p, t), w)| w * (p - t)),
                );
            }
        }
        Ok(out)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// Project coefficients onto `sum_k c_1k = sum_k c_2k` (equal corner
/// corrections, since every `phi_k(0) = sqrt 2`).
fn project_corner(c: &mut [f64], k1: usize) {
    let d: f64 = c[..k1].iter().sum::<f64>() - c[k1..].iter().sum::<f64>();
    let shift = d / (2 * k1) as f64;
    for x in &mut c[..k1] {
        *x -= shift;
    }
    for x in &mut c[k1..] {
        *x += shift;
    }
}

/// Gauss-Newton refinement of `init` against modal measurements, over
/// corrections spanned by the boundary modes `phi_0..phi_order` on each side.
pub fn fit_damping_least_squares(
    grid: &Grid2D,
    time: TimeGrid,
    meas: &[ModalMeasurement],
    init: &DampingPair,
    opts: LsqOptions,
) -> Result<LsqResult> {
    if meas.is_empty() {
        return Err(invalid("least squares needs at least one measurement"));
    }
    if opts.order > MAX_LSQ_ORDER {
        return Err(invalid(format!(
            "correction order {} exceeds {MAX_LSQ_ORDER}",
            opts.order
        )));
    }
    let n = grid.n();
    let levels = time.steps + 1;
    let h = grid.h();
    let sqrt_w: Vec<f64> = (0..levels)
        .flat_map(|k| {
            (0..n).map(move |i| (end_factor(k, levels) * time.dt * end_factor(i, n) * h).sqrt())
        })
        .collect();
    let targets = meas
        .iter()
        .map(|m| {
            let r = reference_trace(grid, m.mode, time)?;
            let mut normal = [Vec::new(), Vec::new()];
            for (s, block) in normal.iter_mut().enumerate() {
                *block = m.trace.normal(s).iter().zip(r.normal(s)).map(|(a, b)| a + b).collect();
            }
            BoundaryTrace::from_parts(n, time.dt, time.steps, normal.clone(), normal)
        })
        .collect::<Result<Vec<_>>>()?;
    let problem = Problem {
        grid: *grid,
        time,
        init: init.resample(n)?,
        order: opts.order,
        u0: meas.iter().map(|m| grid.mode_field(m.mode)).collect(),
        targets,
        sqrt_w: &sqrt_w,
    };
    let p = problem.params();
    let k1 = opts.order + 1;

    let mut c = vec![0.0; p];
    let mut r = problem.residual(&c)?;
    let initial = norm(&r);
    let mut history = vec![initial];
    let mut best = (c.clone(), initial);
    let mut increases = 0;
    let mut stalled = false;

    for _ in 0..opts.max_iters {
        let current = norm(&r);
        if current == 0.0 {
            break;
        }
        let columns = (0..p)
            .into_par_iter()
            .map(|q| {
                let mut cq = c.clone();
                cq[q] += opts.fd_step;
                let rq = problem.residual(&cq)?;
                Ok(rq
                    .iter()
                    .zip(&r)
                    .map(|(a, b)| (a - b) / opts.fd_step)
                    .collect::<Vec<f64>>())
            })
            .collect::<Result<Vec<_>>>()?;
        let mut jtj = DMatrix::<f64>::zeros(p, p);
        let mut jtr = DVector::<f64>::zeros(p);
        for a in 0..p {
            jtr[a] = columns[a].iter().zip(&r).map(|(x, y)| x * y).sum();
            for b in a..p {
                let v: f64 = columns[a].iter().zip(&columns[b]).map(|(x, y)| x * y).sum();
                jtj[(a, b)] = v;
                jtj[(b, a)] = v;
            }
        }
        let svd = jtj.svd(true, true);
        let tol = 1e-12 * svd.singular_values.max();
        let step = svd
            .solve(&(-jtr), tol)
            .map_err(|e| invalid(format!("normal equations: {e}")))?;
        let mut next = c.clone();
        for (x, d) in next.iter_mut().zip(step.iter()) {
            *x += d;
        }
        project_corner(&mut next, k1);
        let r_next = problem.residual(&next)?;
        let value = norm(&r_next);
        history.push(value);
        if value < best.1 {
            best = (next.clone(), value);
        }
        if value > current {
            increases += 1;
            if increases >= MAX_INCREASES {
                stalled = true;
                break;
            }
        } else {
            increases = 0;
            if current - value <= 1e-10 * current {
                break;
            }
        }
        c = next;
        r = r_next;
    }
    Ok(LsqResult {
        damping: problem.damping(&best.0)?,
        initial_residual: initial,
        residual: best.1,
        history,
        stalled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reconstruction::probe::probe_mode;
    use crate::spectral::ModeIndex;

    #[test]
    fn corner_projection() {
        let mut c = vec![1.0, 2.0, 0.5, -1.0];
        project_corner(&mut c, 2);
        assert!((c[0] + c[1] - c[2] - c[3]).abs() < 1e-15);
    }

    #[test]
    fn exact_init_is_fixed_point() {
        let n = 33;
        let g = Grid2D::new(n).unwrap();
        let t = TimeGrid::with_default_factor(&g, 1.0).unwrap();
        let a = DampingPair::affine(n, 0.1, 0.5).unwrap();
        let meas = probe_mode(&g, &a, ModeIndex::new(0, 0), t).unwrap();
        let opts = LsqOptions { max_iters: 2, ..LsqOptions::default() };
        let fit = fit_damping_least_squares(&g, t, &[meas], &a, opts).unwrap();
        assert_eq!(fit.initial_residual, 0.0);
        assert_eq!(fit.damping, a);
    }

    #[test]
    fn zero_data_zero_init() {
        let n = 33;
        let g = Grid2D::new(n).unwrap();
        let t = TimeGrid::with_default_factor(&g, 1.0).unwrap();
        let zero = DampingPair::zero(n).unwrap();
        let meas = probe_mode(&g, &zero, ModeIndex::new(0, 0), t).unwrap();
        let fit = fit_damping_least_squares(&g, t, &[meas], &zero, LsqOptions::default()).unwrap();
        assert!(fit.damping.is_zero());
        assert_eq!(fit.residual, 0.0);
    }
}
