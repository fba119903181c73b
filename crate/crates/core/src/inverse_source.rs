//! Convolution operators of the separable source problem and their
//! stability bounds.

use std::io::Write;

use nalgebra::DMatrix;

use crate::error::{invalid, Error, Result};
use crate::quadrature::end_factor;
use crate::spectral::DampingPair;
use crate::wave::{riesz_solve, solve, Grid2D, SourceSpec, TimeGrid};

/// Relative slack in the Gronwall comparison.
pub const GRONWALL_REL_TOL: f64 = 1e-9;

/// Time modulation `lambda(t)` sampled at `t_k = k dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Modulation {
    dt: f64,
    samples: Vec<f64>,
}

impl Modulation {
    pub fn new(dt: f64, samples: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) {
            return Err(invalid(format!("modulation step must be positive, got {dt}")));
        }
        if samples.len() < 2 {
            return Err(invalid("modulation needs at least two samples"));
        }
        if samples.iter().any(|x| !x.is_finite()) {
            return Err(invalid("modulation samples must be finite"));
        }
        Ok(Self { dt, samples })
    }

    pub fn from_fn(dt: f64, steps: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(dt, (0..=steps).map(|k| f(k as f64 * dt)).collect())
    }

    pub fn on_time_grid(time: &TimeGrid, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::from_fn(time.dt, time.steps, f)
    }

    pub fn constant(dt: f64, steps: usize, c: f64) -> Result<Self> {
        Self::new(dt, vec![c; steps + 1])
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn steps(&self) -> usize {
        self.samples.len() - 1
    }

    pub fn tau(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn lambda0(&self) -> f64 {
        self.samples[0]
    }

    /// Linear interpolation, held constant outside `[0, tau]`.
    pub fn value_at(&self, t: f64) -> f64 {
        let x = (t / self.dt).max(0.0);
        let last = self.steps();
        let k = x.floor() as usize;
        if k >= last {
            return self.samples[last];
        }
        let frac = x - k as f64;
        if frac == 0.0 {
            return self.samples[k];
        }
        self.samples[k] + frac * (self.samples[k + 1] - self.samples[k])
    }

    /// `|lambda'|_{L2(0, t_steps)}` from finite differences and the trapezoid rule.
    pub fn hprime_l2_upto(&self, steps: usize) -> f64 {
        let d = derivative(&self.samples[..=steps], self.dt);
        d.iter()
            .enumerate()
            .map(|(k, x)| end_factor(k, d.len()) * self.dt * x * x)
            .sum::<f64>()
            .sqrt()
    }

    pub fn hprime_l2(&self) -> f64 {
        self.hprime_l2_upto(self.steps())
    }

    fn steps_for(&self, tau: f64) -> Result<usize> {
        let k = (tau / self.dt).round();
        if !(k >= 2.0) || (k * self.dt - tau).abs() > 1e-9 * tau.max(1.0) {
            return Err(invalid(format!(
                "horizon {tau} is not a multiple of the modulation step {}",
                self.dt
            )));
        }
        let k = k as usize;
        if k > self.steps() {
            return Err(invalid(format!(
                "modulation covers [0, {}], horizon {tau} requested",
                self.tau()
            )));
        }
        Ok(k)
    }
}

/// Second-order differences, one-sided at both ends.
fn derivative(f: &[f64], dt: f64) -> Vec<f64> {
    let n = f.len();
    if n == 2 {
        let d = (f[1] - f[0]) / dt;
        return vec![d, d];
    }
    (0..n)
        .map(|k| {
            if k == 0 {
                (-3.0 * f[0] + 4.0 * f[1] - f[2]) / (2.0 * dt)
            } else if k == n - 1 {
                (3.0 * f[n - 1] - 4.0 * f[n - 2] + f[n - 3]) / (2.0 * dt)
            } else {
                (f[k + 1] - f[k - 1]) / (2.0 * dt)
            }
        })
        .collect()
}

/// Samples `h(t_k) in Y`, `Y = R^dim` with diagonal quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeSignal {
    dt: f64,
    dim: usize,
    samples: Vec<f64>,
    weights: Vec<f64>,
}

impl TimeSignal {
    pub fn new(dt: f64, dim: usize, samples: Vec<f64>) -> Result<Self> {
        Self::with_weights(dt, dim, samples, vec![1.0; dim])
    }

    pub fn with_weights(dt: f64, dim: usize, samples: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if !(dt > 0.0) || dim == 0 || weights.len() != dim {
            return Err(invalid("signal needs dt > 0, dim > 0 and one weight per component"));
        }
        if samples.len() % dim != 0 || samples.len() / dim < 2 {
            return Err(invalid(format!(
                "signal of dimension {dim} cannot hold {} samples",
                samples.len()
            )));
        }
        Ok(Self {
            dt,
            dim,
            samples,
            weights,
        })
    }

    pub fn scalar(dt: f64, values: Vec<f64>) -> Result<Self> {
        Self::new(dt, 1, values)
    }

    pub fn from_fn(dt: f64, steps: usize, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::scalar(dt, (0..=steps).map(|k| f(k as f64 * dt)).collect())
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn steps(&self) -> usize {
        self.samples.len() / self.dim - 1
    }

    pub fn tau(&self) -> f64 {
        self.steps() as f64 * self.dt
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn at(&self, k: usize) -> &[f64] {
        &self.samples[k * self.dim..(k + 1) * self.dim]
    }

    fn same_shape(&self, other: &TimeSignal) -> Result<()> {
        if self.dim != other.dim || self.samples.len() != other.samples.len() || self.dt != other.dt
        {
            return Err(invalid("signals have different shapes"));
        }
        Ok(())
    }

    fn with_samples(&self, samples: Vec<f64>) -> TimeSignal {
        TimeSignal {
            dt: self.dt,
            dim: self.dim,
            samples,
            weights: self.weights.clone(),
        }
    }

    /// `<h, g>_{L2((0,tau); Y)}` by the trapezoid rule in time.
    pub fn inner(&self, other: &TimeSignal) -> Result<f64> {
        self.same_shape(other)?;
        let levels = self.steps() + 1;
        let mut total = 0.0;
        for k in 0..levels {
            let mut s = 0.0;
            for ((x, y), w) in self.at(k).iter().zip(other.at(k)).zip(&self.weights) {
                s += w * x * y;
            }
            total += end_factor(k, levels) * self.dt * s;
        }
        Ok(total)
    }

    pub fn l2_norm(&self) -> f64 {
        self.inner(self).expect("same shape").max(0.0).sqrt()
    }

    pub fn scaled(&self, c: f64) -> TimeSignal {
        self.with_samples(self.samples.iter().map(|x| c * x).collect())
    }

    pub fn sub(&self, other: &TimeSignal) -> Result<TimeSignal> {
        self.same_shape(other)?;
        Ok(self.with_samples(
            self.samples.iter().zip(&other.samples).map(|(a, b)| a - b).collect(),
        ))
    }

    /// Componentwise time derivative.
    pub fn derivative(&self) -> TimeSignal {
        let levels = self.steps() + 1;
        let mut out = vec![0.0; self.samples.len()];
        let mut column = vec![0.0; levels];
        for c in 0..self.dim {
            for (k, x) in column.iter_mut().enumerate() {
                *x = self.samples[k * self.dim + c];
            }
            for (k, d) in derivative(&column, self.dt).into_iter().enumerate() {
                out[k * self.dim + c] = d;
            }
        }
        self.with_samples(out)
    }

    /// CSV with columns `t,component,value`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["t", "component", "value"])?;
        for k in 0..=self.steps() {
            let t = (k as f64 * self.dt).to_string();
            for (c, x) in self.at(k).iter().enumerate() {
                w.write_record([t.as_str(), &c.to_string(), &x.to_string()])?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

fn check_pair(lam: &Modulation, h: &TimeSignal) -> Result<()> {
    if (lam.dt - h.dt).abs() > 1e-12 * h.dt {
        return Err(invalid(format!(
            "modulation step {} differs from signal step {}",
            lam.dt, h.dt
        )));
    }
    if lam.steps() < h.steps() {
        return Err(invalid("modulation is shorter than the signal"));
    }
    Ok(())
}

/// `(S h)(t) = int_0^t lambda(t - s) h(s) ds`.
///
/// Trapezoid rule, except that the diagonal end weight is dropped at the last
/// level; with the matching choice in [`convolve_s_star`] the two operators
/// are exact adjoints for the trapezoid inner product.
pub fn convolve_s(lam: &Modulation, h: &TimeSignal) -> Result<TimeSignal> {
    check_pair(lam, h)?;
    let last = h.steps();
    let dim = h.dim;
    let dt = h.dt;
    let l = &lam.samples;
    let mut out = vec![0.0; h.samples.len()];
    for i in 1..=last {
        let row = &mut out[i * dim..(i + 1) * dim];
        for j in 0..=i {
            let c = if j == i {
                if i == last {
                    continue;
                }
                0.5
            } else if j == 0 {
                0.5
            } else {
                1.0
            };
            let coef = dt * c * l[i - j];
            for (o, x) in row.iter_mut().zip(h.at(j)) {
                *o += coef * x;
            }
        }
    }
    Ok(h.with_samples(out))
}

/// `(S* g)(t) = int_t^tau lambda(s - t) g(s) ds`; the diagonal weight is
/// dropped at `t = 0` (see [`convolve_s`]).
pub fn convolve_s_star(lam: &Modulation, g: &TimeSignal) -> Result<TimeSignal> {
    check_pair(lam, g)?;
    let last = g.steps();
    let dim = g.dim;
    let dt = g.dt;
    let l = &lam.samples;
    let mut out = vec![0.0; g.samples.len()];
    for j in 0..last {
        let row = &mut out[j * dim..(j + 1) * dim];
        for i in j..=last {
            let c = if i == j {
                if j == 0 {
                    continue;
                }
                0.5
            } else if i == last {
                0.5
            } else {
                1.0
            };
            let coef = dt * c * l[i - j];
            for (o, x) in row.iter_mut().zip(g.at(i)) {
                *o += coef * x;
            }
        }
    }
    Ok(g.with_samples(out))
}

/// `(sqrt 2 / |lambda(0)|) exp(|lambda'|^2_{L2(0,tau)} tau / |lambda(0)|^2)`.
pub fn stability_factor(lam: &Modulation, tau: f64) -> Result<f64> {
    let l0 = lam.lambda0().abs();
    if l0 == 0.0 {
        return Err(Error::ZeroModulation);
    }
    let steps = lam.steps_for(tau)?;
    let hp = lam.hprime_l2_upto(steps);
    Ok(std::f64::consts::SQRT_2 / l0 * (hp * hp * tau / (l0 * l0)).exp())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// `|h|_{L2} <= stability_factor * |(S* h)'|_{L2}`.
pub fn gronwall_bound_check(lam: &Modulation, h: &TimeSignal) -> Result<BoundCheck> {
    let factor = stability_factor(lam, h.tau())?;
    let lhs = h.l2_norm();
    let rhs = factor * convolve_s_star(lam, h)?.derivative().l2_norm();
    Ok(BoundCheck {
        lhs,
        rhs,
        holds: lhs <= rhs * (1.0 + GRONWALL_REL_TOL),
    })
}

/// Numerical rank of `S*` acting on scalar signals with `steps` steps.
pub fn s_star_rank(lam: &Modulation, steps: usize) -> Result<usize> {
    let dt = lam.dt;
    let size = steps + 1;
    let mut m = DMatrix::<f64>::zeros(size, size);
    let mut unit = vec![0.0; size];
    for col in 0..size {
        unit.iter_mut().for_each(|x| *x = 0.0);
        unit[col] = 1.0;
        let out = convolve_s_star(lam, &TimeSignal::scalar(dt, unit.clone())?)?;
        for (row, x) in out.samples.iter().enumerate() {
            m[(row, col)] = *x;
        }
    }
    let sv = m.singular_values();
    let smax = sv.max();
    Ok(sv.iter().filter(|&&s| s > 1e-10 * smax).count())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceBoundReport {
    pub wnorm: f64,
    pub trace_norm: f64,
    pub ratio: f64,
    /// `ratio / stability_factor`
    pub c_emp: f64,
}

/// Run the forced problem from rest and compare `|w|_{V'}` with the trace norm.
pub fn check_prop21(
    grid: &Grid2D,
    a: &DampingPair,
    source: &SourceSpec,
    time: TimeGrid,
) -> Result<SourceBoundReport> {
    let wnorm = riesz_solve(grid, &source.functional)?.vprime_norm;
    let zeros = grid.zeros();
    let traj = solve(grid, &zeros, &zeros, a, Some(source), time)?;
    let trace_norm = traj.trace.l2_norm();
    if wnorm == 0.0 {
        return Ok(SourceBoundReport {
            wnorm,
            trace_norm,
            ratio: 0.0,
            c_emp: 0.0,
        });
    }
    if trace_norm <= 1e-12 * wnorm {
        return Err(Error::ZeroTrace(format!(
            "source with dual norm {wnorm:e} produced a vanishing trace"
        )));
    }
    let ratio = wnorm / trace_norm;
    let factor = stability_factor(&source.modulation, time.tau())?;
    Ok(SourceBoundReport {
        wnorm,
        trace_norm,
        ratio,
        c_emp: ratio / factor,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{PI, SQRT_2};

    fn ones(dt: f64, steps: usize) -> TimeSignal {
        TimeSignal::scalar(dt, vec![1.0; steps + 1]).unwrap()
    }

    #[test]
    fn s_of_constants() {
        let steps = 100;
        let dt = 0.01;
        let lam = Modulation::constant(dt, steps, 1.0).unwrap();
        let sh = convolve_s(&lam, &ones(dt, steps)).unwrap();
        for k in 0..steps {
            assert!((sh.samples()[k] - k as f64 * dt).abs() < 1e-12);
        }
        // the last level omits the diagonal half weight
        assert!((sh.samples()[steps] - (1.0 - 0.5 * dt)).abs() < 1e-12);

        let ss = convolve_s_star(&lam, &ones(dt, steps)).unwrap();
        for k in 1..=steps {
            assert!((ss.samples()[k] - (1.0 - k as f64 * dt)).abs() < 1e-12);
        }
        assert_eq!(ss.samples()[steps], 0.0);
    }

    #[test]
    fn s_of_cosine_is_sine() {
        let steps = 2000;
        let dt = 2.0 / steps as f64;
        let om = 3.0;
        let lam = Modulation::from_fn(dt, steps, |t| (om * t).cos()).unwrap();
        let sh = convolve_s(&lam, &ones(dt, steps)).unwrap();
        for k in 0..steps {
            let t = k as f64 * dt;
            assert!((sh.samples()[k] - (om * t).sin() / om).abs() < 1e-5);
        }
    }

    #[test]
    fn adjoint_identity_random() {
        let steps = 512;
        let dt = 1.0 / 256.0;
        let lam = Modulation::from_fn(dt, steps, |t| 1.0 + 0.3 * t - (2.0 * t).sin()).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..10 {
            let h: Vec<f64> = (0..=steps).map(|_| rng.random_range(-1.0..1.0)).collect();
            let g: Vec<f64> = (0..=steps).map(|_| rng.random_range(-1.0..1.0)).collect();
            let h = TimeSignal::scalar(dt, h).unwrap();
            let g = TimeSignal::scalar(dt, g).unwrap();
            let lhs = convolve_s(&lam, &h).unwrap().inner(&g).unwrap();
            let rhs = h.inner(&convolve_s_star(&lam, &g).unwrap()).unwrap();
            assert!((lhs - rhs).abs() <= 1e-12 * h.l2_norm() * g.l2_norm());
        }
    }

    #[test]
    fn stability_factor_examples() {
        let lam = Modulation::constant(0.01, 300, 1.0).unwrap();
        assert!((stability_factor(&lam, 3.0).unwrap() - SQRT_2).abs() < 1e-14);

        let steps = 20000;
        let lam = Modulation::from_fn(PI / steps as f64, steps, f64::cos).unwrap();
        let f = stability_factor(&lam, PI).unwrap();
        let exact = SQRT_2 * (PI * PI / 2.0).exp();
        assert!((f - exact).abs() / exact < 1e-6, "{f} vs {exact}");
        assert!((exact - 196.6).abs() < 0.1);

        let zero = Modulation::from_fn(0.1, 10, |t| t).unwrap();
        assert!(matches!(stability_factor(&zero, 1.0), Err(Error::ZeroModulation)));
    }

    #[test]
    fn gronwall_trivial_and_bump() {
        let steps = 400;
        let dt = 2.0 / steps as f64;
        let lam = Modulation::constant(dt, steps, 1.0).unwrap();
        let zero = TimeSignal::scalar(dt, vec![0.0; steps + 1]).unwrap();
        let r = gronwall_bound_check(&lam, &zero).unwrap();
        assert_eq!((r.lhs, r.rhs), (0.0, 0.0));
        assert!(r.holds);

        let bump = TimeSignal::from_fn(dt, steps, |t| (-20.0 * (t - 1.0).powi(2)).exp()).unwrap();
        let r = gronwall_bound_check(&lam, &bump).unwrap();
        // lambda = 1: (S* h)' = -h, so rhs = sqrt(2) lhs up to quadrature
        assert!(r.holds);
        assert!((r.rhs / r.lhs - SQRT_2).abs() < 1e-3, "{r:?}");
    }

    #[test]
    fn causality_is_bit_exact() {
        let steps = 64;
        let dt = 1.0 / 64.0;
        let lam = Modulation::from_fn(dt, steps, |t| (2.0 * t).cos()).unwrap();
        let h = TimeSignal::from_fn(dt, steps, |t| t.sin() + 0.2).unwrap();
        let mut perturbed = h.samples().to_vec();
        for x in &mut perturbed[41..] {
            *x += 1.0;
        }
        let hp = TimeSignal::scalar(dt, perturbed).unwrap();
        let a = convolve_s(&lam, &h).unwrap();
        let b = convolve_s(&lam, &hp).unwrap();
        assert_eq!(&a.samples()[..=40], &b.samples()[..=40]);
        assert_ne!(a.samples()[41], b.samples()[41]);
    }

    #[test]
    fn s_star_rank_is_full_on_steps() {
        let steps = 128;
        let lam = Modulation::from_fn(1.0 / 32.0, steps, |t| (2.0 * t).cos()).unwrap();
        assert_eq!(s_star_rank(&lam, steps).unwrap(), steps);
    }

    #[test]
    fn modulation_interpolation() {
        let lam = Modulation::new(0.5, vec![1.0, 3.0, 2.0]).unwrap();
        assert_eq!(lam.value_at(0.0), 1.0);
        assert_eq!(lam.value_at(0.25), 2.0);
        assert_eq!(lam.value_at(0.5), 3.0);
        assert_eq!(lam.value_at(5.0), 2.0);
        assert_eq!(lam.value_at(-1.0), 1.0);
    }
}
