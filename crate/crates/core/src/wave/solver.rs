use super::grid::Grid2D;
use super::source::SourceSpec;
use super::state::{energy, WaveState};
use super::trace::BoundaryTrace;
use crate::error::{invalid, Error, Result};
use crate::inverse_source::Modulation;
use crate::quadrature::end_factor;
use crate::spectral::DampingPair;

pub const DEFAULT_DT_FACTOR: f64 = 0.5;

/// Uniform time levels `t_k = k dt`, `k = 0..=steps`.
///
/// `dt = 1 / ceil(sqrt(2) / (factor h))`, so a whole number of steps fits in
/// every unit of time and runs with different horizons share their prefix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeGrid {
    pub dt: f64,
    pub steps: usize,
}

impl TimeGrid {
    pub fn new(grid: &Grid2D, tau: f64, dt_factor: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(invalid(format!("tau must be positive, got {tau}")));
        }
        if !(dt_factor > 0.0 && dt_factor <= 1.0) {
            return Err(invalid(format!("dt factor must lie in (0, 1], got {dt_factor}")));
        }
        let per_unit = (std::f64::consts::SQRT_2 / (dt_factor * grid.h())).ceil();
        let steps = (tau * per_unit).round().max(1.0) as usize;
        Ok(Self {
            dt: 1.0 / per_unit,
            steps,
        })
    }

    pub fn with_default_factor(grid: &Grid2D, tau: f64) -> Result<Self> {
        Self::new(grid, tau, DEFAULT_DT_FACTOR)
    }

    pub fn tau(&self) -> f64 {
        self.steps as f64 * self.dt
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.dt
    }
}

/// Prepared update operator for one trajectory.
///
/// Leapfrog on the half-step velocity `v^{k+1/2}` with the boundary damping
/// averaged over the step. The velocity reported at level `k` is
/// `(v^{k-1/2} + v^{k+1/2}) / 2 = (u^{k+1} - u^{k-1}) / (2 dt)`, for which the
/// scheme dissipates a modified energy at exactly the discrete boundary rate.
pub struct Stepper<'a> {
    grid: Grid2D,
    dt: f64,
    /// boundary damping per unit mass, `B_p / M_p`
    beta: Vec<f64>,
    side_damping: [Vec<f64>; 2],
    /// `M^{-1} F`
    forcing: Option<(Vec<f64>, &'a Modulation)>,
    acc: Vec<f64>,
    /// `v^{k+1/2}` for the state at time `half_for`
    v_half: Vec<f64>,
    v_prev: Vec<f64>,
    half_for: Option<f64>,
}

impl<'a> Stepper<'a> {
    pub fn new(
        grid: &Grid2D,
        a: &DampingPair,
        source: Option<&'a SourceSpec>,
        dt: f64,
    ) -> Result<Self> {
        let limit = grid.h() / std::f64::consts::SQRT_2;
        if !(dt > 0.0) || dt > limit * (1.0 + 1e-12) {
            return Err(Error::CflViolation { dt, limit });
        }
        let n = grid.n();
        let h = grid.h();
        let side_damping = grid.boundary_damping(a);
        let mut b = grid.zeros();
        for (s, vals) in side_damping.iter().enumerate() {
            for (k, &ak) in vals.iter().enumerate() {
                b[grid.side_node(s, k)] += ak * h * end_factor(k, n);
            }
        }
        let mut beta = grid.zeros();
        for j in 0..n {
            for i in 0..n {
                if !grid.is_dirichlet(i, j) {
                    let p = grid.idx(i, j);
                    beta[p] = b[p] / grid.mass(i, j);
                }
            }
        }
        let forcing = match source {
            Some(src) => {
                let mut f = src.functional.load(grid)?;
                for j in 0..n {
                    for i in 0..n {
                        if !grid.is_dirichlet(i, j) {
                            f[grid.idx(i, j)] /= grid.mass(i, j);
                        }
                    }
                }
                Some((f, &src.modulation))
            }
            None => None,
        };
        Ok(Self {
            grid: *grid,
            dt,
            beta,
            side_damping,
            forcing,
            acc: grid.zeros(),
            v_half: grid.zeros(),
            v_prev: grid.zeros(),
            half_for: None,
        })
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    fn accelerate(&mut self, u: &[f64], t: f64) {
        let g = self.grid;
        let n = g.n();
        let lam = self.forcing.as_ref().map(|(_, m)| m.value_at(t));
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let p = g.idx(i, j);
                let mut x = g.laplacian_at(u, i, j);
                if let (Some(l), Some((f, _))) = (lam, &self.forcing) {
                    x += l * f[p];
                }
                self.acc[p] = x;
            }
        }
    }

    /// `v^{k+1/2}` from `v^{k-1/2}` (or from `v^k` when starting) and `acc(u^k)`.
    fn kick(&mut self, from_is_half: bool) {
        let g = self.grid;
        let n = g.n();
        let dt = self.dt;
        let (scale, damp) = if from_is_half { (dt, 0.5 * dt) } else { (0.5 * dt, 0.5 * dt) };
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let p = g.idx(i, j);
                let prev = if from_is_half {
                    self.v_prev[p] * (1.0 - damp * self.beta[p])
                } else {
                    self.v_prev[p]
                };
                self.v_half[p] = (prev + scale * self.acc[p]) / (1.0 + damp * self.beta[p]);
            }
        }
    }

    /// Advance `state` by one step in place.
    pub fn advance(&mut self, state: &mut WaveState) {
        let t_next = state.t + self.dt;
        self.advance_to(state, t_next);
    }

    /// One step, labelling the new level with `t_next` (avoids drift from
    /// repeated addition of `dt`).
    pub fn advance_to(&mut self, state: &mut WaveState, t_next: f64) {
        let g = self.grid;
        let n = g.n();
        let dt = self.dt;
        if self.half_for != Some(state.t) {
            self.accelerate(&state.u, state.t);
            self.v_prev.copy_from_slice(&state.v);
            self.kick(false);
        }
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let p = g.idx(i, j);
                state.u[p] += dt * self.v_half[p];
                state.v[p] = 0.5 * self.v_half[p];
            }
        }
        self.accelerate(&state.u, t_next);
        std::mem::swap(&mut self.v_prev, &mut self.v_half);
        self.kick(true);
        for j in 0..n - 1 {
            for i in 0..n - 1 {
                let p = g.idx(i, j);
                state.v[p] += 0.5 * self.v_half[p];
            }
        }
        state.t = t_next;
        self.half_for = Some(t_next);
    }

    /// `v^{k+1/2}` of the step that produced the current level.
    fn last_half_velocity(&self) -> &[f64] {
        &self.v_prev
    }

    /// One-sided normal derivative and `-a v` on both damped sides.
    fn record(&self, state: &WaveState, normal: &mut [Vec<f64>; 2], check: &mut [Vec<f64>; 2]) {
        let g = self.grid;
        let inv2h = 0.5 / g.h();
        for s in 0..2 {
            for k in 0..g.n() {
                let u0 = state.u[g.side_inward(s, k, 0)];
                let u1 = state.u[g.side_inward(s, k, 1)];
                let u2 = state.u[g.side_inward(s, k, 2)];
                // outward normal is -e_y (resp. -e_x)
                normal[s][k] = (3.0 * u0 - 4.0 * u1 + u2) * inv2h;
                check[s][k] = -self.side_damping[s][k] * state.v[g.side_node(s, k)];
            }
        }
    }

    fn boundary_dissipation(&self, state: &WaveState) -> f64 {
        let g = self.grid;
        let n = g.n();
        let h = g.h();
        let mut d = 0.0;
        for s in 0..2 {
            for k in 0..n {
                let v = state.v[g.side_node(s, k)];
                d += self.side_damping[s][k] * v * v * h * end_factor(k, n);
            }
        }
        d
    }
}

/// Single step from `state`.
pub fn step(
    grid: &Grid2D,
    state: &WaveState,
    a: &DampingPair,
    source: Option<&SourceSpec>,
    dt: f64,
) -> Result<WaveState> {
    let mut stepper = Stepper::new(grid, a, source, dt)?;
    let mut next = state.clone();
    stepper.advance(&mut next);
    if !next.is_finite() {
        return Err(Error::NonFinite { step: 1 });
    }
    Ok(next)
}

/// Full run with energy, dissipation and boundary trace at every level.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub grid: Grid2D,
    pub time: TimeGrid,
    pub final_state: WaveState,
    pub trace: BoundaryTrace,
    pub energy: Vec<f64>,
    /// `int_{Gamma_1} a v^2` at every level.
    pub dissipation: Vec<f64>,
    /// Energy conserved by the undamped scheme,
    /// `(|v^{k+1/2}|^2 + <grad u^k, grad u^{k+1}>) / 2`, one value per step.
    /// Without forcing it never increases when `a >= 0`.
    pub staggered_energy: Vec<f64>,
}

impl Trajectory {
    pub fn times(&self) -> impl Iterator<Item = f64> + '_ {
        (0..=self.time.steps).map(|k| self.time.time(k))
    }

    /// CSV with columns `t,energy,dissipation`, one row per level.
    pub fn write_energy_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["t", "energy", "dissipation"])?;
        for (k, t) in self.times().enumerate() {
            out.write_record([
                t.to_string(),
                self.energy[k].to_string(),
                self.dissipation[k].to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_energy_csv(&self, path: &std::path::Path) -> Result<()> {
        self.write_energy_csv(std::fs::File::create(path)?)
    }
}

const FINITE_CHECK_EVERY: usize = 32;

pub fn solve(
    grid: &Grid2D,
    u0: &[f64],
    u1: &[f64],
    a: &DampingPair,
    source: Option<&SourceSpec>,
    time: TimeGrid,
) -> Result<Trajectory> {
    let mut state = WaveState::new(grid, u0.to_vec(), u1.to_vec())?;
    let mut stepper = Stepper::new(grid, a, source, time.dt)?;
    let n = grid.n();
    let mut trace = BoundaryTrace::with_capacity(n, time.dt, time.steps);
    let mut normal = [vec![0.0; n], vec![0.0; n]];
    let mut check = [vec![0.0; n], vec![0.0; n]];
    let mut energies = Vec::with_capacity(time.steps + 1);
    let mut dissipation = Vec::with_capacity(time.steps + 1);
    let mut staggered = Vec::with_capacity(time.steps);
    let mut u_prev = grid.zeros();

    let mut observe = |stepper: &Stepper, state: &WaveState| {
        stepper.record(state, &mut normal, &mut check);
        trace.push([&normal[0], &normal[1]], [&check[0], &check[1]]);
        energies.push(energy(grid, state));
        dissipation.push(stepper.boundary_dissipation(state));
    };
    observe(&stepper, &state);
    for k in 1..=time.steps {
        u_prev.copy_from_slice(&state.u);
        stepper.advance_to(&mut state, time.time(k));
        if (k % FINITE_CHECK_EVERY == 0 || k == time.steps) && !state.is_finite() {
            return Err(Error::NonFinite { step: k });
        }
        let vh = stepper.last_half_velocity();
        staggered.push(0.5 * (grid.l2_inner(vh, vh) + grid.stiffness_inner(&u_prev, &state.u)));
        observe(&stepper, &state);
    }
    Ok(Trajectory {
        grid: *grid,
        time,
        final_state: state,
        trace,
        energy: energies,
        dissipation,
        staggered_energy: staggered,
    })
}

/// Homogeneous run from `(u0, 0)`.
pub fn solve_free(grid: &Grid2D, u0: &[f64], a: &DampingPair, time: TimeGrid) -> Result<Trajectory> {
    solve(grid, u0, &grid.zeros(), a, None, time)
}

/// `max_k |(E_{k+1} - E_{k-1}) / (2 dt) + int_{Gamma_1} a v_k^2|`.
pub fn dissipation_residual(traj: &Trajectory) -> f64 {
    let e = &traj.energy;
    let dt = traj.time.dt;
    (1..e.len().saturating_sub(1))
        .map(|k| ((e[k + 1] - e[k - 1]) / (2.0 * dt) + traj.dissipation[k]).abs())
        .fold(0.0, f64::max)
}
