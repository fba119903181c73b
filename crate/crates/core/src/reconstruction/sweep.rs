//! Stability sweep over a family of damping pairs with shrinking amplitude.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;

use super::gap::gap_from_measurements;
use super::linearized::{errors_unguarded, recover_linearized};
use super::probe::ReferenceTraces;
use super::stability::{
    coefficient_constant, exponent_k_squared, exponent_lambda, log_stability_profile,
    n0_inequality, n0_scan, stability_rhs, trunc_rate,
};
use crate::error::{invalid, Error, Result};
use crate::spectral::{DampingPair, ModeIndex};
use crate::wave::{Grid2D, TimeGrid};

#[derive(Debug, Clone, PartialEq)]
pub struct SweepConfig {
    pub n: usize,
    pub tau: f64,
    pub dt_factor: f64,
    /// Probes `phi_kl` with `k, l <= probe_budget` enter the gap.
    pub probe_budget: usize,
    /// Highest boundary mode in the coefficient check.
    pub truncation: usize,
    pub guard: f64,
    /// Index of the family member that fixes the bound's constant.
    pub calibration_member: usize,
    pub recon_mode: ModeIndex,
    /// Class bounds; taken from the family when absent.
    pub m_lower: Option<f64>,
    pub m_upper: Option<f64>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            n: 65,
            tau: 4.0,
            dt_factor: crate::wave::DEFAULT_DT_FACTOR,
            probe_budget: super::gap::DEFAULT_PROBE_BUDGET,
            truncation: 4,
            guard: super::linearized::DEFAULT_GUARD,
            calibration_member: 0,
            recon_mode: ModeIndex::new(0, 0),
            m_lower: None,
            m_upper: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FamilyMember {
    pub id: String,
    pub epsilon: f64,
    pub damping: DampingPair,
}

/// `eps * base` for each `eps`, in the given order.
pub fn scaled_family(base: &DampingPair, epsilons: &[f64]) -> Result<Vec<FamilyMember>> {
    epsilons
        .iter()
        .map(|&e| {
            Ok(FamilyMember {
                id: format!("eps{e}"),
                epsilon: e,
                damping: base.scaled(e)?,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRecord {
    pub damping_id: String,
    pub epsilon: f64,
    pub delta: f64,
    pub a_l2: f64,
    pub bound_rhs: f64,
    pub n0: usize,
    /// Absolute L2 error of the linearized reconstruction on the unguarded
    /// part of the boundary.
    pub recon_error_l2: f64,
    /// Smallest constant making the coefficient bound hold, exponent
    /// `k^2 (tau^2 pi^2 + 1)`.
    pub c_emp: f64,
    /// Same with exponent `lambda_{k0} tau^2`.
    pub c_emp_lambda: f64,
    pub small_gap_regime: bool,
    pub bound_holds: bool,
    /// `N0` satisfies the truncation rule and `N0 + 1` does not.
    pub n0_bracketed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepOutcome {
    pub records: Vec<SweepRecord>,
    pub m_lower: f64,
    pub m_upper: f64,
    pub alpha: f64,
    /// Constant of the logarithmic bound, fixed at the calibration member.
    pub c_cal: f64,
    /// Coefficient constant at the calibration member.
    pub c_emp_cal: f64,
    pub calibration_member: usize,
}

pub const CSV_HEADER: &str = "damping_id,epsilon,delta,a_l2,bound_rhs,N0,recon_error_l2,C_emp";

impl SweepOutcome {
    /// Coefficient constants of all records stay below the calibrated one.
    pub fn coefficient_bound_holds(&self) -> bool {
        self.records
            .iter()
            .all(|r| r.c_emp <= self.c_emp_cal * (1.0 + 1e-9))
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(CSV_HEADER.split(','))?;
        for r in &self.records {
            out.write_record([
                r.damping_id.clone(),
                r.epsilon.to_string(),
                r.delta.to_string(),
                r.a_l2.to_string(),
                r.bound_rhs.to_string(),
                r.n0.to_string(),
                r.recon_error_l2.to_string(),
                r.c_emp.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }

    /// Bound curve sampled on `samples` log-spaced gaps spanning the records.
    pub fn bound_curve(&self, samples: usize) -> Vec<(f64, f64)> {
        let deltas: Vec<f64> = self
            .records
            .iter()
            .map(|r| r.delta)
            .filter(|d| *d > 0.0 && *d < self.m_lower)
            .collect();
        if deltas.is_empty() || samples < 2 || !(self.c_cal > 0.0) {
            return Vec::new();
        }
        let lo = deltas.iter().copied().fold(f64::INFINITY, f64::min).ln();
        let hi = deltas.iter().copied().fold(0.0, f64::max).ln();
        (0..samples)
            .filter_map(|i| {
                let d = (lo + (hi - lo) * i as f64 / (samples - 1) as f64).exp();
                stability_rhs(d, self.m_lower, self.m_upper, self.c_cal)
                    .ok()
                    .map(|v| (d, v))
            })
            .collect()
    }

    /// Plot data with columns `series,delta,value`: one `member` row per
    /// record (`|a|`) and `bound` rows along the bound curve.
    pub fn write_plot_csv<W: Write>(&self, w: W, samples: usize) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["series", "delta", "value"])?;
        for r in &self.records {
            out.write_record(["member".to_string(), r.delta.to_string(), r.a_l2.to_string()])?;
        }
        for (d, v) in self.bound_curve(samples) {
            out.write_record(["bound".to_string(), d.to_string(), v.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

pub fn stability_sweep(family: &[FamilyMember], config: &SweepConfig) -> Result<SweepOutcome> {
    if family.len() < 2 {
        return Err(invalid("a sweep needs at least two family members"));
    }
    if config.calibration_member >= family.len() {
        return Err(invalid(format!(
            "calibration member {} out of range for {} members",
            config.calibration_member,
            family.len()
        )));
    }
    let grid = Grid2D::new(config.n)?;
    let time = TimeGrid::new(&grid, config.tau, config.dt_factor)?;
    let mut modes = ModeIndex::square(config.probe_budget);
    if !modes.contains(&config.recon_mode) {
        modes.push(config.recon_mode);
    }
    let refs = ReferenceTraces::compute(&grid, time, &modes)?;

    let m_lower = config
        .m_lower
        .unwrap_or_else(|| family.iter().map(|f| f.damping.min_value()).fold(f64::INFINITY, f64::min));
    let m_upper = config
        .m_upper
        .unwrap_or_else(|| family.iter().map(|f| f.damping.max_h1_sq()).fold(0.0, f64::max));
    if !(m_lower >= 0.0) || !(m_upper > 0.0) {
        return Err(invalid(format!(
            "class bounds must satisfy m >= 0 and M > 0 (got {m_lower}, {m_upper})"
        )));
    }
    let alpha = trunc_rate(config.tau);

    struct Measured {
        delta: f64,
        a_l2: f64,
        recon_error_l2: f64,
    }
    let measured = family
        .par_iter()
        .map(|member| {
            let meas = refs.probe_all(&member.damping)?;
            let delta = gap_from_measurements(&meas, config.probe_budget).value;
            let target = meas
                .iter()
                .find(|m| m.mode == config.recon_mode)
                .expect("reconstruction mode is probed");
            let est = recover_linearized(target, config.guard)?;
            let (err, _) = errors_unguarded(&est.damping, &member.damping, config.guard)?;
            Ok(Measured {
                delta,
                a_l2: member.damping.l2_norm(),
                recon_error_l2: err,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    // a vanishing lower bound or calibration gap leaves the estimate vacuous
    let cal = &measured[config.calibration_member];
    let vacuous = m_lower == 0.0 || cal.delta == 0.0;
    let c_cal = if vacuous {
        0.0
    } else {
        let profile = log_stability_profile(cal.delta, m_lower)?;
        cal.a_l2 / (m_upper * profile)
    };
    let coeff = |member: &FamilyMember, delta: f64, lambda_form: bool| -> Result<f64> {
        if vacuous {
            return Ok(0.0);
        }
        if lambda_form {
            coefficient_constant(&member.damping, config.truncation, m_lower, m_upper, delta, exponent_lambda(config.tau))
        } else {
            coefficient_constant(&member.damping, config.truncation, m_lower, m_upper, delta, exponent_k_squared(config.tau))
        }
    };
    let c_emp_cal = coeff(&family[config.calibration_member], cal.delta, false)?;
    // the truncation rule needs a positive constant even when every
    // coefficient vanishes
    let c_rule = if c_emp_cal > 0.0 { c_emp_cal } else { 1.0 };

    let mut records = Vec::with_capacity(family.len());
    for (member, m) in family.iter().zip(&measured) {
        let bound_rhs = if vacuous {
            f64::INFINITY
        } else {
            match stability_rhs(m.delta, m_lower, m_upper, c_cal) {
                Ok(v) => v,
                Err(Error::SingularGap) => f64::INFINITY,
                Err(e) => return Err(e),
            }
        };
        let (n0, n0_bracketed) = if vacuous || m.delta == 0.0 {
            (0, true)
        } else {
            let n0 = n0_scan(c_rule, m_lower, alpha, m.delta)?;
            let ok = n0_inequality(c_rule, m_lower, alpha, m.delta, n0)
                && !n0_inequality(c_rule, m_lower, alpha, m.delta, n0 + 1);
            (n0, ok)
        };
        records.push(SweepRecord {
            damping_id: member.id.clone(),
            epsilon: member.epsilon,
            delta: m.delta,
            a_l2: m.a_l2,
            bound_rhs,
            n0,
            recon_error_l2: m.recon_error_l2,
            c_emp: coeff(member, m.delta, false)?,
            c_emp_lambda: coeff(member, m.delta, true)?,
            small_gap_regime: !vacuous && m.delta <= m_lower * (-alpha).exp(),
            bound_holds: m.a_l2 <= bound_rhs * (1.0 + 1e-12),
            n0_bracketed,
        });
    }

    Ok(SweepOutcome {
        records,
        m_lower,
        m_upper,
        alpha,
        c_cal,
        c_emp_cal,
        calibration_member: config.calibration_member,
    })
}
