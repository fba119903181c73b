use std::fs;
use std::path::Path;
use std::time::Instant;

use dampwave::diagnostics::{fit_decay, ZERO_TRACE_FLOOR_FACTOR};
use dampwave::reconstruction::{
    fit_damping_least_squares, probe_mode_with_reference, recover_linearized, reference_trace,
    relative_error_unguarded, scaled_family, stability_sweep, LsqOptions, SweepConfig,
};
use dampwave::spectral::{fourier_project, BoundarySide, DampingPair};
use dampwave::wave::{solve_free, Grid2D, TimeGrid};
use serde::Serialize;

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::manifest::write_manifest;
use crate::svg::loglog_chart;

struct Timer {
    phases: Vec<(String, f64)>,
    last: Instant,
}

impl Timer {
    fn new() -> Self {
        Self {
            phases: Vec::new(),
            last: Instant::now(),
        }
    }

    fn lap(&mut self, name: &str) {
        let now = Instant::now();
        self.phases.push((name.to_string(), (now - self.last).as_secs_f64()));
        self.last = now;
    }
}

fn prepare(cfg: &ExperimentConfig) -> Result<(Grid2D, TimeGrid), CliError> {
    cfg.validate()?;
    fs::create_dir_all(&cfg.out_dir)?;
    let grid = Grid2D::new(cfg.n)?;
    let time = TimeGrid::new(&grid, cfg.tau, cfg.dt_factor)?;
    Ok((grid, time))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("summary serializes");
    fs::write(path, text + "\n")?;
    Ok(())
}

#[derive(Debug, Clone, Serialize)]
pub struct ForwardSummary {
    pub n: usize,
    pub steps: usize,
    pub dt: f64,
    pub initial_energy: f64,
    pub final_energy: f64,
    /// `max_t |E(t) - E(0)| / E(0)`
    pub energy_drift: f64,
    pub m_fit: f64,
    pub omega_fit: f64,
    pub fit_residual: f64,
    pub fit_relative_residual: f64,
}

/// Run from `(phi_kl, 0)` and write the energy history, boundary trace and
/// decay fit.
pub fn cmd_forward(cfg: &ExperimentConfig) -> Result<ForwardSummary, CliError> {
    let mut timer = Timer::new();
    let (grid, time) = prepare(cfg)?;
    let a = cfg.damping_pair(cfg.n)?;
    let u0 = grid.mode_field(cfg.initial_mode());
    let traj = solve_free(&grid, &u0, &a, time)?;
    timer.lap("solve");

    let out = &cfg.out_dir;
    traj.save_energy_csv(&out.join("energy.csv"))?;
    traj.trace.save_csv(&out.join("trace.csv"))?;
    traj.trace.save_binary(&out.join("trace.bin"))?;
    let e0 = traj.energy[0];
    let fit = fit_decay(&traj.energy, time.dt)?;
    let summary = ForwardSummary {
        n: cfg.n,
        steps: time.steps,
        dt: time.dt,
        initial_energy: e0,
        final_energy: *traj.energy.last().expect("nonempty"),
        energy_drift: traj.energy.iter().map(|e| (e - e0).abs() / e0).fold(0.0, f64::max),
        m_fit: fit.m_fit,
        omega_fit: fit.omega_fit,
        fit_residual: fit.residual,
        fit_relative_residual: fit.relative_residual(),
    };
    write_json(&out.join("decay.json"), &summary)?;
    timer.lap("write");
    write_manifest(out, "forward", cfg, timer.phases)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct ReconstructSummary {
    pub mode: [usize; 2],
    pub guard: f64,
    pub trace_norm: f64,
    pub noise_floor: f64,
    pub below_noise_floor: bool,
    pub flags: Vec<String>,
    pub decay_rate: f64,
    pub linearized_rel_error: f64,
    pub lsq_rel_error: Option<f64>,
    pub lsq_initial_residual: Option<f64>,
    pub lsq_residual: Option<f64>,
    /// `1 - residual / initial_residual`
    pub lsq_residual_reduction: Option<f64>,
    pub lsq_stalled: Option<bool>,
}

fn write_fourier_table(
    path: &Path,
    estimates: &[(&str, &DampingPair)],
    order: usize,
) -> Result<(), CliError> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["estimate", "side", "k", "coeff"])?;
    for (name, a) in estimates {
        for side in BoundarySide::BOTH {
            let c = fourier_project(a.side(side.index()), order, side)?;
            for (k, v) in c.coeffs.iter().enumerate() {
                w.write_record([name.to_string(), side.label().to_string(), k.to_string(), v.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

/// Probe the configured damping with one mode, recover it and refine by
/// least squares.
pub fn cmd_reconstruct(cfg: &ExperimentConfig) -> Result<ReconstructSummary, CliError> {
    let mut timer = Timer::new();
    let (grid, time) = prepare(cfg)?;
    let truth = cfg.damping_pair(cfg.n)?;
    let mode = cfg.recon_mode();
    let reference = reference_trace(&grid, mode, time)?;
    let meas = probe_mode_with_reference(&grid, &truth, mode, time, &reference)?;
    timer.lap("probe");

    let noise_floor = reference.l2_norm();
    let below = meas.trace_norm <= ZERO_TRACE_FLOOR_FACTOR * noise_floor;
    let mut flags = Vec::new();
    let out = &cfg.out_dir;
    truth.save_csv(&out.join("truth.csv"))?;

    let (linearized, decay) = if below {
        flags.push("below noise floor".to_string());
        (DampingPair::zero(cfg.n)?, 0.0)
    } else {
        let est = recover_linearized(&meas, cfg.guard)?;
        (est.damping, est.decay)
    };
    linearized.save_csv(&out.join("linearized.csv"))?;
    timer.lap("linearized");

    let mut summary = ReconstructSummary {
        mode: cfg.recon_mode,
        guard: cfg.guard,
        trace_norm: meas.trace_norm,
        noise_floor,
        below_noise_floor: below,
        flags,
        decay_rate: decay,
        linearized_rel_error: relative_error_unguarded(&linearized, &truth, cfg.guard)?,
        lsq_rel_error: None,
        lsq_initial_residual: None,
        lsq_residual: None,
        lsq_residual_reduction: None,
        lsq_stalled: None,
    };
    let mut estimates = vec![("truth", &truth), ("linearized", &linearized)];
    let fit;
    if !below && cfg.lsq_iters > 0 {
        let opts = LsqOptions {
            order: cfg.lsq_order,
            max_iters: cfg.lsq_iters,
            ..LsqOptions::default()
        };
        fit = fit_damping_least_squares(&grid, time, std::slice::from_ref(&meas), &linearized, opts)?;
        fit.damping.save_csv(&out.join("lsq.csv"))?;
        summary.lsq_rel_error = Some(relative_error_unguarded(&fit.damping, &truth, cfg.guard)?);
        summary.lsq_initial_residual = Some(fit.initial_residual);
        summary.lsq_residual = Some(fit.residual);
        summary.lsq_residual_reduction = Some(if fit.initial_residual > 0.0 {
            1.0 - fit.residual / fit.initial_residual
        } else {
            0.0
        });
        summary.lsq_stalled = Some(fit.stalled);
        if fit.stalled {
            summary.flags.push("least squares stalled".to_string());
        }
        estimates.push(("lsq", &fit.damping));
        timer.lap("least_squares");
    }
    write_fourier_table(&out.join("fourier.csv"), &estimates, cfg.truncation)?;
    write_json(&out.join("summary.json"), &summary)?;
    timer.lap("write");
    write_manifest(out, "reconstruct", cfg, timer.phases)?;
    Ok(summary)
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepSummary {
    pub members: usize,
    pub m_lower: f64,
    pub m_upper: f64,
    pub alpha: f64,
    pub c_cal: f64,
    pub c_emp_cal: f64,
    pub calibration_member: String,
    pub delta_monotone: bool,
    pub bound_holds: bool,
    pub n0_bracketed: bool,
    pub coefficient_bound_holds: bool,
}

pub const BOUND_CURVE_SAMPLES: usize = 64;

/// Scaled family `eps * a` over `family_epsilons`, with gap, bound and
/// reconstruction error per member.
pub fn cmd_sweep(cfg: &ExperimentConfig) -> Result<SweepSummary, CliError> {
    if cfg.family_epsilons.len() < 2 {
        return Err(CliError::Config(format!(
            "field `family_epsilons`: a sweep needs at least two members, got {}",
            cfg.family_epsilons.len()
        )));
    }
    let calibration = cfg.calibration_index()?;
    let mut timer = Timer::new();
    prepare(cfg)?;
    let base = cfg.damping_pair(cfg.n)?;
    let family = scaled_family(&base, &cfg.family_epsilons)?;
    let sweep_cfg = SweepConfig {
        n: cfg.n,
        tau: cfg.tau,
        dt_factor: cfg.dt_factor,
        probe_budget: cfg.probe_budget,
        truncation: cfg.truncation,
        guard: cfg.guard,
        calibration_member: calibration,
        recon_mode: cfg.recon_mode(),
        m_lower: cfg.m_lower,
        m_upper: cfg.m_upper,
    };
    let outcome = stability_sweep(&family, &sweep_cfg)?;
    timer.lap("sweep");

    let out = &cfg.out_dir;
    outcome.save_csv(&out.join("sweep.csv"))?;
    outcome.write_plot_csv(fs::File::create(out.join("sweep_plot.csv"))?, BOUND_CURVE_SAMPLES)?;
    if cfg.svg {
        let points: Vec<(f64, f64)> = outcome.records.iter().map(|r| (r.delta, r.a_l2)).collect();
        let chart = loglog_chart("gap vs damping norm", &points, &outcome.bound_curve(BOUND_CURVE_SAMPLES));
        fs::write(out.join("sweep_plot.svg"), chart)?;
    }

    // members ordered by epsilon, gaps must follow the same order
    let mut by_eps: Vec<_> = outcome.records.iter().collect();
    by_eps.sort_by(|a, b| a.epsilon.total_cmp(&b.epsilon));
    let delta_monotone = by_eps.windows(2).all(|w| w[0].delta <= w[1].delta);
    let summary = SweepSummary {
        members: outcome.records.len(),
        m_lower: outcome.m_lower,
        m_upper: outcome.m_upper,
        alpha: outcome.alpha,
        c_cal: outcome.c_cal,
        c_emp_cal: outcome.c_emp_cal,
        calibration_member: family[calibration].id.clone(),
        delta_monotone,
        bound_holds: outcome.records.iter().all(|r| r.bound_holds),
        n0_bracketed: outcome.records.iter().all(|r| r.n0_bracketed),
        coefficient_bound_holds: outcome.coefficient_bound_holds(),
    };
    write_json(&out.join("sweep_summary.json"), &summary)?;
    timer.lap("write");
    write_manifest(out, "sweep", cfg, timer.phases)?;
    Ok(summary)
}
