//! Energy decay fits and empirical observability constants.

use std::io::Write;

use rayon::prelude::*;

use crate::error::{invalid, Error, Result};
use crate::spectral::{DampingPair, ModeIndex};
use crate::wave::{solve_free, Grid2D, TimeGrid};

/// Fraction of the window discarded as initial transient.
pub const TRANSIENT_FRACTION: f64 = 0.1;

/// A trace counts as vanishing when its norm is within this factor of the
/// undamped discretization floor.
pub const ZERO_TRACE_FLOOR_FACTOR: f64 = 10.0;

/// Fit of `sqrt(2 E(t)) ~ M e^{-omega t} sqrt(2 E(0))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayFit {
    pub m_fit: f64,
    pub omega_fit: f64,
    /// Root-mean-square misfit of the log-linear regression.
    pub residual: f64,
    /// Fitted time window.
    pub t_start: f64,
    pub t_end: f64,
}

impl DecayFit {
    /// Misfit relative to the log-decay explained over the window,
    /// `residual / (|omega| (t_end - t_start))`.
    pub fn relative_residual(&self) -> f64 {
        self.residual / (self.omega_fit.abs() * (self.t_end - self.t_start))
    }
}

/// Regression of `log sqrt(2E)` on `t` over the whole series minus the
/// initial transient.
pub fn fit_decay(energy: &[f64], dt: f64) -> Result<DecayFit> {
    fit_decay_window(energy, dt, 0, energy.len())
}

/// As [`fit_decay`] restricted to levels `start..end`.
pub fn fit_decay_window(energy: &[f64], dt: f64, start: usize, end: usize) -> Result<DecayFit> {
    if end > energy.len() || start >= end {
        return Err(invalid("empty decay window"));
    }
    if let Some(k) = energy.iter().position(|&e| !(e > 0.0)) {
        return Err(Error::DecayFit(format!(
            "energy must stay positive (level {k} has {})",
            energy[k]
        )));
    }
    let first = start + ((end - start) as f64 * TRANSIENT_FRACTION).ceil() as usize;
    if end - first < 3 {
        return Err(Error::DecayFit("window too short".into()));
    }
    let xs: Vec<f64> = (first..end).map(|k| k as f64 * dt).collect();
    let ys: Vec<f64> = (first..end).map(|k| (2.0 * energy[k]).sqrt().ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let omega = -slope;
    let base = (2.0 * energy[0]).sqrt();
    let m_fit = energy
        .iter()
        .enumerate()
        .map(|(k, e)| (2.0 * e).sqrt() * (omega * k as f64 * dt).exp() / base)
        .fold(1.0, f64::max);
    Ok(DecayFit {
        m_fit,
        omega_fit: omega,
        residual: (ssr / m).sqrt(),
        t_start: xs[0],
        t_end: xs[xs.len() - 1],
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ObservabilityReport {
    pub kappa_est: f64,
    /// `(mode, |(phi, 0)|_{V x L2} / |C_a(phi, 0)|_{L2(Sigma_1)})`
    pub ratios: Vec<(ModeIndex, f64)>,
    pub tau: f64,
    pub n: usize,
}

impl ObservabilityReport {
    /// CSV with columns `mode_k,mode_l,ratio`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["mode_k", "mode_l", "ratio"])?;
        for (m, r) in &self.ratios {
            w.write_record([m.k.to_string(), m.l.to_string(), r.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }

    /// One-line summary record `{"kappa_est": .., "tau": .., "n": ..}`.
    pub fn summary_json(&self) -> String {
        format!(
            "{{\"kappa_est\": {}, \"tau\": {}, \"n\": {}}}",
            self.kappa_est, self.tau, self.n
        )
    }
}

/// Default probe set `{(k, l): 0 <= k, l <= 2}`.
pub fn default_probes() -> Vec<ModeIndex> {
    ModeIndex::square(2)
}

/// Ratios of initial energy norm to boundary trace norm for data `(phi_kl, 0)`.
///
/// A probe whose trace does not rise above the undamped discretization
/// floor signals an observability failure.
pub fn estimate_observability(
    grid: &Grid2D,
    a: &DampingPair,
    time: TimeGrid,
    probes: &[ModeIndex],
) -> Result<ObservabilityReport> {
    if probes.is_empty() {
        return Err(invalid("probe set is empty"));
    }
    let zero = DampingPair::zero(grid.n())?;
    let ratios = probes
        .par_iter()
        .map(|&mode| -> Result<(ModeIndex, f64)> {
            let u0 = grid.mode_field(mode);
            let norm = grid.grad_norm(&u0);
            let trace = solve_free(grid, &u0, a, time)?.trace.l2_norm();
            let floor = solve_free(grid, &u0, &zero, time)?.trace.l2_norm();
            if trace <= ZERO_TRACE_FLOOR_FACTOR * floor {
                return Err(Error::ZeroTrace(format!(
                    "probe {mode}: trace norm {trace:e} within the discretization floor {floor:e}"
                )));
            }
            Ok((mode, norm / trace))
        })
        .collect::<Result<Vec<_>>>()?;
    let kappa_est = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(ObservabilityReport {
        kappa_est,
        ratios,
        tau: time.tau(),
        n: grid.n(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_exponential() {
        let dt = 0.01;
        let omega = 0.7;
        let e: Vec<f64> = (0..800).map(|k| 3.0 * (-2.0 * omega * k as f64 * dt).exp()).collect();
        let f = fit_decay(&e, dt).unwrap();
        assert!((f.omega_fit - omega).abs() < 1e-12);
        assert!(f.residual < 1e-12);
        assert!((f.m_fit - 1.0).abs() < 1e-10);
    }

    #[test]
    fn transient_is_skipped() {
        let dt = 0.01;
        let e: Vec<f64> = (0..1000)
            .map(|k| {
                let t = k as f64 * dt;
                if t < 0.5 {
                    50.0
                } else {
                    (-t).exp()
                }
            })
            .collect();
        let f = fit_decay(&e, dt).unwrap();
        assert!((f.omega_fit - 0.5).abs() < 1e-10);
        assert!(f.t_start >= 1.0 - 1e-12);
        assert!(f.m_fit > 1.0);
    }

    #[test]
    fn rejects_nonpositive_and_short() {
        assert!(fit_decay(&[1.0, 0.0, 1.0, 1.0], 0.1).is_err());
        assert!(fit_decay(&[1.0, 1.0], 0.1).is_err());
    }

    #[test]
    fn report_exports() {
        let r = ObservabilityReport {
            kappa_est: 2.5,
            ratios: vec![(ModeIndex::new(0, 1), 2.5)],
            tau: 4.0,
            n: 65,
        };
        let mut out = Vec::new();
        r.write_csv(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "mode_k,mode_l,ratio\n0,1,2.5\n");
        assert_eq!(r.summary_json(), "{\"kappa_est\": 2.5, \"tau\": 4, \"n\": 65}");
    }
}
