//! Named numerical checks run by the `verify` subcommand.

use std::fs;

use dampwave::inverse_source::{
    convolve_s, convolve_s_star, gronwall_bound_check, Modulation, TimeSignal,
};
use dampwave::reconstruction::{n0_inequality, n0_scan, product_bound_check, product_bound_constant};
use dampwave::spectral::{eval_phi1d, multiplier_bound_check, DampingPair, ModeIndex, SampledFunction1D};
use dampwave::wave::{dissipation_residual, rellich_report, solve_free, Grid2D, TimeGrid};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::manifest::write_manifest;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparison {
    AtMost,
    AtLeast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub tolerance: f64,
    pub comparison: Comparison,
    pub pass: bool,
}

type CheckFn = fn(&mut ChaCha8Rng) -> dampwave::Result<f64>;

/// `(name, comparison, tolerance, measurement)`
pub const CHECKS: &[(&str, Comparison, f64, CheckFn)] = &[
    ("adjoint.identity", Comparison::AtMost, 1e-8, adjoint_identity),
    ("adjoint.causality", Comparison::AtMost, 0.0, adjoint_causality),
    ("rellich.exact", Comparison::AtMost, 1e-8, rellich_exact),
    ("rellich.monotone", Comparison::AtMost, 1.0, rellich_monotone),
    ("dissipation.residual", Comparison::AtMost, 1e-2, dissipation_at_65),
    ("dissipation.order", Comparison::AtLeast, 3.732, dissipation_ratio),
    ("energy.monotone", Comparison::AtMost, 1e-12, energy_monotone),
    ("multiplier.bound", Comparison::AtMost, 1.0, multiplier_ratio),
    ("gronwall.bound", Comparison::AtMost, 1.0, gronwall_ratio),
    ("truncation.bracketing", Comparison::AtMost, 0.0, truncation_failures),
    ("product.bound", Comparison::AtMost, 1.0, product_ratio),
];

fn adjoint_identity(rng: &mut ChaCha8Rng) -> dampwave::Result<f64> {
    let steps = 2048;
    let dt = 3.0 / steps as f64;
    let lam = Modulation::from_fn(dt, steps, |t| (2.0 * t).cos() + 0.1 * t)?;
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let h = TimeSignal::scalar(dt, (0..=steps).map(|_| rng.random_range(-1.0..1.0)).collect())?;
        let g = TimeSignal::scalar(dt, (0..=steps).map(|_| rng.random_range(-1.0..1.0)).collect())?;
        let lhs = convolve_s(&lam, &h)?.inner(&g)?;
        let rhs = h.inner(&convolve_s_star(&lam, &g)?)?;
        worst = worst.max((lhs - rhs).abs() / (h.l2_norm() * g.l2_norm()));
    }
    Ok(worst)
}

/// Largest change of `S h` before, and of `S* g` after, a perturbation time.
fn adjoint_causality(rng: &mut ChaCha8Rng) -> dampwave::Result<f64> {
    let steps = 512;
    let dt = 1.0 / 128.0;
    let lam = Modulation::from_fn(dt, steps, |t| (2.0 * t).cos())?;
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let cut = rng.random_range(1..steps);
        let base: Vec<f64> = (0..=steps).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut late = base.clone();
        let mut early = base.clone();
        for x in &mut late[cut + 1..] {
            *x += 1.0;
        }
        for x in &mut early[..cut] {
            *x -= 1.0;
        }
        let b = TimeSignal::scalar(dt, base)?;
        let s0 = convolve_s(&lam, &b)?;
        let s1 = convolve_s(&lam, &TimeSignal::scalar(dt, late)?)?;
        let a0 = convolve_s_star(&lam, &b)?;
        let a1 = convolve_s_star(&lam, &TimeSignal::scalar(dt, early)?)?;
        for k in 0..=cut {
            worst = worst.max((s0.samples()[k] - s1.samples()[k]).abs());
        }
        for k in cut..=steps {
            worst = worst.max((a0.samples()[k] - a1.samples()[k]).abs());
        }
    }
    Ok(worst)
}

fn rellich_exact(_: &mut ChaCha8Rng) -> dampwave::Result<f64> {
    let g = Grid2D::new(33)?;
    let mut worst: f64 = 0.0;
    for (field, x0) in [
        (g.field_from_fn(|_, _| 3.0), (1.25, 1.25)),
        (g.field_from_fn(|x, _| x), (1.25, 1.25)),
        (g.field_from_fn(|x, y| 2.0 * x - 0.5 * y + 1.0), (1.5, 2.0)),
    ] {
        let r = rellich_report(&g, &field, x0)?;
        worst = worst.max(r.residual / r.scale.max(1.0));
    }
    Ok(worst)
}

/// Largest ratio of successive residuals for `phi_00`; below 1 means decreasing.
fn rellich_monotone(_: &mut ChaCha8Rng) -> dampwave::Result<f64> {
    let res = [33, 65, 129]
        .iter()
        .map(|&n| {
            let g = Grid2D::new(n)?;
            Ok(rellich_report(&g, &g.mode_field(ModeIndex::new(0, 0)), (1.25, 1.25))?.residual)
        })
        .collect::<dampwave::Result<Vec<f64>>>()?;
    Ok(res.windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max))
}

fn dissipation_run(n: usize) -> dampwave::Result<f64> {
    let g = Grid2D::new(n)?;
    let t = TimeGrid::with_default_factor(&g, 2.0)?;
    let a = DampingPair::constant(n, 1.0)?;
    Ok(dissipation_residual(&solve_free(&g, &g.mode_field(ModeIndex::new(0, 0)), &a, t)?))
}

fn dissipation_at_65(_: &mut ChaCha8Rng) -> dampwave::Result<f64> {
    dissipation_run(65)
}

fn dissipation_ratio(_: &mut ChaCha8Rng) -> dampwave::Result<f64> {
    Ok(dissipation_run(65)? / dissipation_run(129)?)
}

/// Largest relative step increase of the scheme's conserved energy.
fn energy_monotone(rng: &mut ChaCha8Rng) -> dampwave::Result<f64> {
    let n = 33;
    let g = Grid2D::new(n)?;
    let t = TimeGrid::with_default_factor(&g, 2.0)?;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..5 {
        let level = rng.random_range(0.0..3.0);
        let slope = rng.random_range(-0.9..2.0);
        let a = DampingPair::affine(n, level, slope)?;
        let mut u0 = g.field_from_fn(|x, y| (1.0 - x) * (1.0 - y) * (1.0 + x * y) * (2.0 * x + y).cos());
        g.pin_dirichlet(&mut u0);
        let e = solve_free(&g, &u0, &a, t)?.staggered_energy;
        let e0 = e[0];
        worst = e.windows(2).map(|w| (w[1] - w[0]) / e0).fold(worst, f64::max);
    }
    Ok(worst)
}

fn multiplier_ratio(rng: &mut ChaCha8Rng) -> dampwave::Result<f64> {
    let n = 129;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let alpha: f64 = rng.random_range(0.55..=1.0);
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let base: f64 = rng.random_range(0.1..2.0);
        let a = SampledFunction1D::from_fn(n, |s| base + 0.5 * c[0] * (3.0 * s).sin() + 0.3 * c[1] * s.powf(alpha))?;
        let f = SampledFunction1D::from_fn(n, |s| {
            c[2] * eval_phi1d(0, s) + c[3] * eval_phi1d(2, s) + 0.2 * (7.0 * s).cos()
        })?;
        let r = multiplier_bound_check(&a, &f, alpha)?;
        if r.rhs > 0.0 {
            worst = worst.max(r.lhs / r.rhs);
        }
    }
    Ok(worst)
}

fn gronwall_ratio(rng: &mut ChaCha8Rng) -> dampwave::Result<f64> {
    let tau = 3.0;
    let steps = 1200;
    let dt = tau / steps as f64;
    let lam = Modulation::from_fn(dt, steps, |t| (2.0 * t).cos())?;
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let amps: [f64; 5] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let freqs: [f64; 5] = std::array::from_fn(|_| rng.random_range(0.2..6.0));
        let phases: [f64; 5] = std::array::from_fn(|_| rng.random_range(0.0..6.3));
        let h = TimeSignal::from_fn(dt, steps, |t| {
            (0..5).map(|i| amps[i] * (freqs[i] * t + phases[i]).sin()).sum()
        })?;
        let r = gronwall_bound_check(&lam, &h)?;
        if r.rhs > 0.0 {
            worst = worst.max(r.lhs / r.rhs);
        }
    }
    Ok(worst)
}

/// Number of random cases where the selected `N0` fails its rule or
/// `N0 + 1` passes.
fn truncation_failures(rng: &mut ChaCha8Rng) -> dampwave::Result<f64> {
    let mut failures = 0;
    for _ in 0..50 {
        let c = rng.random_range(0.1..10.0);
        let m = rng.random_range(0.01..1.0);
        let alpha = rng.random_range(1.0..200.0);
        let delta = m * (-rng.random_range(0.0..3000.0f64)).exp();
        if delta == 0.0 {
            continue;
        }
        let n0 = n0_scan(c, m, alpha, delta)?;
        if !n0_inequality(c, m, alpha, delta, n0) || n0_inequality(c, m, alpha, delta, n0 + 1) {
            failures += 1;
        }
    }
    Ok(failures as f64)
}

/// Largest normalized product ratio over the bound constant.
fn product_ratio(rng: &mut ChaCha8Rng) -> dampwave::Result<f64> {
    let n = 65;
    let g = Grid2D::new(n)?;
    let modes = ModeIndex::square(2);
    let mut worst: f64 = 0.0;
    for _ in 0..5 {
        let c: [f64; 4] = std::array::from_fn(|_| rng.random_range(0.0..1.0));
        let corner = 0.5 + c[0];
        let a = DampingPair::new(
            SampledFunction1D::from_fn(n, |s| corner + c[1] * s + 0.3 * c[2] * (4.0 * s).sin())?,
            SampledFunction1D::from_fn(n, |s| corner * (1.0 + c[3] * s * s))?,
        )?;
        let r = product_bound_check(&g, &a, &modes)?;
        worst = r.ratios.iter().map(|x| x.1 / product_bound_constant()).fold(worst, f64::max);
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub checks: Vec<CheckResult>,
}

impl VerifyReport {
    pub fn failed(&self) -> Vec<String> {
        self.checks.iter().filter(|c| !c.pass).map(|c| c.name.clone()).collect()
    }

    pub fn table(&self) -> String {
        let mut s = format!("{:<24} {:>14} {:>5} {:>12}  result\n", "check", "measured", "", "tolerance");
        for c in &self.checks {
            let op = match c.comparison {
                Comparison::AtMost => "<=",
                Comparison::AtLeast => ">=",
            };
            s.push_str(&format!(
                "{:<24} {:>14.6e} {:>5} {:>12.3e}  {}\n",
                c.name,
                c.measured,
                op,
                c.tolerance,
                if c.pass { "pass" } else { "FAIL" }
            ));
        }
        s
    }
}

/// Run every check whose name starts with `filter`. Each check draws from
/// its own generator seeded by `seed` and its position in [`CHECKS`].
pub fn run_checks(seed: u64, tolerance_scale: f64, filter: Option<&str>) -> Result<VerifyReport, CliError> {
    let selected: Vec<_> = CHECKS
        .iter()
        .enumerate()
        .filter(|(_, c)| filter.is_none_or(|p| c.0.starts_with(p)))
        .collect();
    if selected.is_empty() {
        return Err(CliError::Config(format!(
            "flag `--filter`: no check matches prefix `{}`",
            filter.unwrap_or_default()
        )));
    }
    let mut checks = Vec::with_capacity(selected.len());
    for (i, &(name, comparison, tol, f)) in selected {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(i as u64));
        let measured = f(&mut rng)?;
        let tolerance = tol * tolerance_scale;
        let pass = match comparison {
            Comparison::AtMost => measured <= tolerance,
            Comparison::AtLeast => measured >= tolerance,
        };
        checks.push(CheckResult {
            name: name.to_string(),
            measured,
            tolerance,
            comparison,
            pass,
        });
    }
    Ok(VerifyReport { checks })
}

/// Run the check suite and write `verify.csv`; fails with the names of the
/// failing checks.
pub fn cmd_verify(cfg: &ExperimentConfig, filter: Option<&str>) -> Result<VerifyReport, CliError> {
    cfg.validate()?;
    let start = std::time::Instant::now();
    let report = run_checks(cfg.seed, cfg.tolerance_scale, filter)?;
    let elapsed = start.elapsed().as_secs_f64();
    fs::create_dir_all(&cfg.out_dir)?;
    let mut w = csv::Writer::from_path(cfg.out_dir.join("verify.csv"))?;
    w.write_record(["check", "measured", "comparison", "tolerance", "pass"])?;
    for c in &report.checks {
        let op = match c.comparison {
            Comparison::AtMost => "at_most",
            Comparison::AtLeast => "at_least",
        };
        w.write_record([
            c.name.clone(),
            c.measured.to_string(),
            op.to_string(),
            c.tolerance.to_string(),
            c.pass.to_string(),
        ])?;
    }
    w.flush()?;
    drop(w);
    write_manifest(&cfg.out_dir, "verify", cfg, vec![("checks".to_string(), elapsed)])?;
    Ok(report)
}
