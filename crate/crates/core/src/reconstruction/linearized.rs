use super::probe::{time_project, ModalMeasurement};
use crate::error::{Error, Result};
use crate::quadrature::end_factor;
use crate::spectral::{eigenpair, eval_phi1d, DampingPair, ModeIndex, SampledFunction1D};

pub const DEFAULT_GUARD: f64 = 0.2;

/// Nodes where `|phi_k|` falls below this value are not inverted.
pub const PHI_FLOOR: f64 = 0.1;

/// Pointwise inversion `a_1(x) = Y_1(x) / (sqrt 2 sqrt(lambda_kl) phi_k(x))`
/// on `[0, 1 - guard]` (and likewise `a_2` with `phi_l`); nodes in the guard
/// band or near a zero of the mode take the nearest inverted value. The
/// corner value is the average of both sides; negative values are clipped.
pub fn linearized_recover(
    y: &[SampledFunction1D; 2],
    mode: ModeIndex,
    guard: f64,
) -> Result<DampingPair> {
    if !(0.0..=0.5).contains(&guard) {
        return Err(crate::error::invalid(format!("guard must lie in [0, 0.5], got {guard}")));
    }
    let omega = eigenpair(mode).omega;
    let mut sides = Vec::with_capacity(2);
    for (s, ys) in y.iter().enumerate() {
        let k = if s == 0 { mode.k } else { mode.l };
        let n = ys.len();
        let mut vals: Vec<Option<f64>> = (0..n)
            .map(|i| {
                let x = ys.node(i);
                let phi = eval_phi1d(k, x);
                (x <= 1.0 - guard + 1e-12 && phi.abs() >= PHI_FLOOR)
                    .then(|| ys.values()[i] / (std::f64::consts::SQRT_2 * omega * phi))
            })
            .collect();
        if vals.iter().all(Option::is_none) {
            return Err(Error::GuardEverywhere);
        }
        fill_nearest(&mut vals);
        sides.push(vals.into_iter().map(|v| v.unwrap().max(0.0)).collect::<Vec<f64>>());
    }
    let corner = 0.5 * (sides[0][0] + sides[1][0]);
    sides[0][0] = corner;
    sides[1][0] = corner;
    let a2 = SampledFunction1D::new(sides.pop().unwrap())?;
    let a1 = SampledFunction1D::new(sides.pop().unwrap())?;
    DampingPair::new(a1, a2)
}

fn fill_nearest(vals: &mut [Option<f64>]) {
    let known: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].is_some()).collect();
    for i in 0..vals.len() {
        if vals[i].is_none() {
            let j = *known
                .iter()
                .min_by_key(|&&j| (j as isize - i as isize).unsigned_abs())
                .unwrap();
            vals[i] = vals[j];
        }
    }
}

/// Modal decay rate `int a_1 phi_k^2 + int a_2 phi_l^2` of `(phi_kl, 0)`
/// under weak damping.
pub fn modal_decay_rate(a: &DampingPair, mode: ModeIndex) -> f64 {
    let side = |f: &SampledFunction1D, k: usize| -> f64 {
        let h = f.spacing();
        let n = f.len();
        f.values()
            .iter()
            .enumerate()
            .map(|(i, v)| end_factor(i, n) * h * v * eval_phi1d(k, f.node(i)).powi(2))
            .sum()
    };
    side(a.a1(), mode.k) + side(a.a2(), mode.l)
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearizedEstimate {
    pub damping: DampingPair,
    /// Decay rate used in the final projection.
    pub decay: f64,
    pub iterations: usize,
}

pub const DECAY_TOL: f64 = 1e-7;
pub const MAX_DECAY_ITERATIONS: usize = 50;

/// Linearized recovery with the modal decay rate re-estimated from the
/// current profile until it settles. The first pass is the plain
/// undamped projection.
pub fn recover_linearized(meas: &ModalMeasurement, guard: f64) -> Result<LinearizedEstimate> {
    let omega = eigenpair(meas.mode).omega;
    let mut decay = 0.0;
    let mut est = linearized_recover(&time_project(meas, decay)?, meas.mode, guard)?;
    for it in 1..=MAX_DECAY_ITERATIONS {
        let next = modal_decay_rate(&est, meas.mode).min(0.9 * omega);
        if (next - decay).abs() <= DECAY_TOL {
            return Ok(LinearizedEstimate {
                damping: est,
                decay,
                iterations: it,
            });
        }
        decay = next;
        est = linearized_recover(&time_project(meas, decay)?, meas.mode, guard)?;
    }
    Ok(LinearizedEstimate {
        damping: est,
        decay,
        iterations: MAX_DECAY_ITERATIONS,
    })
}

/// Relative L2 error of `est` against `truth` on `[0, 1 - guard]`, both sides
/// pooled.
pub fn relative_error_unguarded(est: &DampingPair, truth: &DampingPair, guard: f64) -> Result<f64> {
    let (e, t) = errors_unguarded(est, truth, guard)?;
    Ok(if t == 0.0 { e } else { e / t })
}

/// `(|est - truth|, |truth|)` in L2 over `[0, 1 - guard]` on both sides.
pub fn errors_unguarded(est: &DampingPair, truth: &DampingPair, guard: f64) -> Result<(f64, f64)> {
    let truth = truth.resample(est.len())?;
    let mut e2 = 0.0;
    let mut t2 = 0.0;
    for s in 0..2 {
        let a = est.side(s);
        let b = truth.side(s);
        let upper = 1.0 - guard;
        let d = a.zip_with(b, |x, y| x - y)?;
        e2 += d.l2_norm_on(upper).powi(2);
        t2 += b.l2_norm_on(upper).powi(2);
    }
    Ok((e2.sqrt(), t2.sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model_profiles(a: &DampingPair, mode: ModeIndex) -> [SampledFunction1D; 2] {
        let om = eigenpair(mode).omega;
        let f = |s: usize| {
            let side = a.side(s);
            let k = if s == 0 { mode.k } else { mode.l };
            SampledFunction1D::from_fn(side.len(), |x| {
                side.value_at(x) * std::f64::consts::SQRT_2 * om * eval_phi1d(k, x)
            })
            .unwrap()
        };
        [f(0), f(1)]
    }

    #[test]
    fn exact_model_inverts() {
        let n = 65;
        let mode = ModeIndex::new(0, 0);
        let a = DampingPair::constant(n, 0.3).unwrap();
        let est = linearized_recover(&model_profiles(&a, mode), mode, 0.2).unwrap();
        for s in 0..2 {
            for v in est.side(s).values() {
                assert!((v - 0.3).abs() < 1e-12);
            }
        }
        let zero = SampledFunction1D::zeros(n).unwrap();
        let est = linearized_recover(&[zero.clone(), zero], mode, 0.2).unwrap();
        assert!(est.is_zero());
    }

    #[test]
    fn guard_band_is_constant() {
        let n = 101;
        let mode = ModeIndex::new(0, 0);
        let a = DampingPair::affine(n, 0.1, 0.5).unwrap();
        let est = linearized_recover(&model_profiles(&a, mode), mode, 0.2).unwrap();
        let v = est.a1().values();
        assert!((v[50] - 0.1 * 1.25).abs() < 1e-12);
        assert_eq!(v[90], v[80]);
        assert!((v[80] - 0.1 * 1.4).abs() < 1e-12);
    }

    #[test]
    fn higher_mode_skips_zero() {
        let n = 129;
        let mode = ModeIndex::new(1, 0);
        let a = DampingPair::constant(n, 0.2).unwrap();
        let est = linearized_recover(&model_profiles(&a, mode), mode, 0.0).unwrap();
        for v in est.a1().values() {
            assert!((v - 0.2).abs() < 1e-12, "{v}");
        }
    }

    #[test]
    fn decay_rate_of_constant() {
        // int_0^1 phi_k^2 = 1 on each side
        let a = DampingPair::constant(257, 0.1).unwrap();
        assert!((modal_decay_rate(&a, ModeIndex::new(0, 0)) - 0.2).abs() < 1e-12);
    }
}
