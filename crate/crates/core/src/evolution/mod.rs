//! Coupled evolution: velocity recovery, forcing ramp and transport.
//!
//! Two drivers share the same discrete kernel. [`run`] marches the
//! regularized system forward in time, recovering the velocity from the
//! current area at every step. [`picard_iterate`] solves it on a short slab
//! by the fixed-point map `A^k -> A^{k+1}`, in which the velocity and draw
//! force come from the previous iterate and the transport problem is linear.

mod energy;
mod picard;

pub use energy::{energy_norm, EnergyAccumulator, EnergySummary};
pub use picard::{picard_iterate, PicardIterate, PicardOutcome, PicardSettings};

use thiserror::Error;

use crate::model::{BoundaryData, DataError, FiberState, Grid, Problem, RegularizationPlan, ShortTimeBudget};
use crate::monitors::{BoundReport, ForcingHistory, Monitor};
use crate::quadrature::trapezoid;
use crate::transport::{advance_slice, ramp_step_integral, TraceScheme};
use crate::velocity::{compute_velocity, VelocityError};

#[derive(Debug, Error)]
pub enum EvolutionError {
    #[error("area lost positivity at t = {}, node {} (value {})", .0.t, .0.index, .0.value)]
    Breakdown(Box<BreakdownDump>),
    #[error("fixed-point iteration stopped after {} iterations, last difference {}", .0.iterates.len() - 1, .0.last_difference())]
    NoConvergence(Box<PicardOutcome>),
    #[error(transparent)]
    Data(#[from] DataError),
    #[error(transparent)]
    Velocity(#[from] VelocityError),
}

/// Everything known when the area left the positive cone.
#[derive(Debug, Clone)]
pub struct BreakdownDump {
    pub t: f64,
    pub index: usize,
    pub value: f64,
    pub last_state: FiberState,
    pub offending_area: Vec<f64>,
    /// Trajectory up to the last good slice, when produced by [`run`].
    pub partial: Option<Trajectory>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub trace: TraceScheme,
    /// Keep every `stride`-th slice and report (the last one is always kept).
    pub stride: usize,
    /// Evaluate the bound monitors at every step.
    pub monitor: bool,
    /// Tolerance for bounds that hold up to roundoff.
    pub report_tol: f64,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            trace: TraceScheme::Midpoint,
            stride: 1,
            monitor: true,
            report_tol: crate::monitors::REPORT_TOL,
        }
    }
}

/// Scalar diagnostics recorded at every step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub q: f64,
    pub mass: f64,
    pub min_area: f64,
    pub max_area: f64,
    pub energy: f64,
    pub worst_margin: f64,
    pub mass_residual: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub grid: Grid,
    pub plan: RegularizationPlan,
    pub budget: ShortTimeBudget,
    pub states: Vec<FiberState>,
    pub diagnostics: Vec<BoundReport>,
    pub series: Vec<SeriesRow>,
    pub forcing: ForcingHistory,
    pub max_courant: f64,
    /// Number of steps whose report had at least one failed check.
    pub violations: usize,
    pub first_violation: Option<BoundReport>,
}

impl Trajectory {
    pub fn final_state(&self) -> &FiberState {
        self.states.last().expect("trajectory holds the initial state")
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

/// Velocity and draw force recovered from an area slice at time `t`.
pub fn recover(data: &BoundaryData, area: Vec<f64>, t: f64, dx: f64) -> Result<FiberState, VelocityError> {
    let flow = compute_velocity(&area, dx, data.v_in.value(t), data.v_l.value(t))?;
    Ok(FiberState { t, area, flow })
}

pub fn initial_state(problem: &Problem, grid: &Grid) -> Result<FiberState, EvolutionError> {
    let area = grid.sample(&problem.data.s1);
    Ok(recover(&problem.data, area, 0.0, grid.dx())?)
}

#[derive(Clone, Debug)]
pub struct StepOutcome {
    pub state: FiberState,
    /// Integral of the applied forcing over the step.
    pub forcing_integral: f64,
    pub max_courant: f64,
}

/// One step of the regularized system from `state` to `t_next`.
pub fn step(
    state: &FiberState,
    data: &BoundaryData,
    plan: &RegularizationPlan,
    grid: &Grid,
    t_next: f64,
    trace: TraceScheme,
) -> Result<StepOutcome, EvolutionError> {
    let dt = t_next - state.t;
    let dx = grid.dx();
    let forcing_integral = ramp_step_integral(plan, state.t, dt, state.flow.q);
    let update = advance_slice(
        &state.area,
        &state.flow.v,
        forcing_integral / dt,
        dx,
        dt,
        state.t,
        |t| data.s0.value(t),
        trace,
    );
    if let Some(index) = update.values.iter().position(|&a| !(a > 0.0)) {
        return Err(EvolutionError::Breakdown(Box::new(BreakdownDump {
            t: t_next,
            index,
            value: update.values[index],
            last_state: state.clone(),
            offending_area: update.values,
            partial: None,
        })));
    }
    let next = recover(data, update.values, t_next, dx)?;
    Ok(StepOutcome {
        state: next,
        forcing_integral,
        max_courant: update.max_courant,
    })
}

/// Streaming time-marcher; keeps only the current slice.
#[derive(Clone, Debug)]
pub struct Marcher<'a> {
    data: &'a BoundaryData,
    plan: RegularizationPlan,
    grid: Grid,
    trace: TraceScheme,
    state: FiberState,
    steps: usize,
}

impl<'a> Marcher<'a> {
    pub fn new(
        data: &'a BoundaryData,
        plan: RegularizationPlan,
        grid: Grid,
        initial_area: Vec<f64>,
        trace: TraceScheme,
    ) -> Result<Self, EvolutionError> {
        let state = recover(data, initial_area, 0.0, grid.dx())?;
        Ok(Marcher {
            data,
            plan,
            grid,
            trace,
            state,
            steps: 0,
        })
    }

    pub fn state(&self) -> &FiberState {
        &self.state
    }

    pub fn advance(&mut self) -> Result<StepOutcome, EvolutionError> {
        let t_next = (self.steps + 1) as f64 * self.grid.dt;
        let out = step(&self.state, self.data, &self.plan, &self.grid, t_next, self.trace)?;
        self.state = out.state.clone();
        self.steps += 1;
        Ok(out)
    }
}

/// Number of steps covering `[0, t_end]` and the matching uniform step.
pub fn step_count(t_end: f64, dt: f64) -> (usize, f64) {
    let steps = ((t_end / dt) - 1e-9).ceil().max(1.0) as usize;
    (steps, t_end / steps as f64)
}

/// Marches from `S1` to `t_end`, checking every bound at every step.
pub fn run(
    problem: &Problem,
    plan: RegularizationPlan,
    grid: Grid,
    t_end: f64,
    options: RunOptions,
) -> Result<Trajectory, EvolutionError> {
    let area = grid.sample(&problem.data.s1);
    run_from(problem, plan, grid, area, t_end, options)
}

/// As [`run`], from an arbitrary positive initial slice.
pub fn run_from(
    problem: &Problem,
    plan: RegularizationPlan,
    grid: Grid,
    initial_area: Vec<f64>,
    t_end: f64,
    options: RunOptions,
) -> Result<Trajectory, EvolutionError> {
    let (steps, dt) = step_count(t_end, grid.dt);
    let grid = Grid { dt, ..grid };
    let dx = grid.dx();
    let stride = options.stride.max(1);
    let mut marcher = Marcher::new(&problem.data, plan, grid, initial_area, options.trace)?;
    let mut monitor = Monitor::new(problem, plan, &grid).with_report_tol(options.report_tol);
    let mut energy = EnergyAccumulator::new(dx, problem.bounds.v_min);

    let first = marcher.state().clone();
    let mut trajectory = Trajectory {
        grid,
        plan,
        budget: problem.budget,
        states: vec![first.clone()],
        diagnostics: Vec::new(),
        series: Vec::with_capacity(steps + 1),
        forcing: ForcingHistory::new(),
        max_courant: 0.0,
        violations: 0,
        first_violation: None,
    };

    let observe = |traj: &mut Trajectory,
                   monitor: &Monitor<'_>,
                   energy: &mut EnergyAccumulator,
                   state: &FiberState,
                   prev: Option<&FiberState>,
                   dt: f64,
                   keep: bool| {
        let e = energy.push(&state.area, dt);
        let (min_area, max_area) = state
            .area
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &a| (lo.min(a), hi.max(a)));
        let (worst, residual) = if options.monitor {
            let report = monitor.check(state, prev);
            let worst = report.worst_margin();
            let residual = report.mass_residual.unwrap_or(0.0);
            if !report.passed() {
                traj.violations += 1;
                if traj.first_violation.is_none() {
                    traj.first_violation = Some(report.clone());
                }
            }
            if keep || !report.passed() {
                traj.diagnostics.push(report);
            }
            (worst, residual)
        } else {
            (f64::NAN, f64::NAN)
        };
        traj.series.push(SeriesRow {
            t: state.t,
            q: state.flow.q,
            mass: trapezoid(&state.area, dx),
            min_area,
            max_area,
            energy: e,
            worst_margin: worst,
            mass_residual: residual,
        });
    };

    observe(&mut trajectory, &monitor, &mut energy, &first, None, dt, true);

    let mut prev = first;
    for n in 1..=steps {
        let out = match marcher.advance() {
            Ok(out) => out,
            Err(EvolutionError::Breakdown(mut dump)) => {
                trajectory.forcing = monitor.history().clone();
                dump.partial = Some(trajectory);
                return Err(EvolutionError::Breakdown(dump));
            }
            Err(e) => return Err(e),
        };
        trajectory.max_courant = trajectory.max_courant.max(out.max_courant);
        monitor.record_step(&prev, dt, out.forcing_integral);
        let keep = n % stride == 0 || n == steps;
        observe(&mut trajectory, &monitor, &mut energy, &out.state, Some(&prev), dt, keep);
        if keep {
            trajectory.states.push(out.state.clone());
        }
        prev = out.state;
    }
    if trajectory.max_courant > 1.0 {
        log::warn!(
            "largest Courant number {:.3} exceeds one; the scheme stays stable but loses accuracy",
            trajectory.max_courant
        );
    }
    trajectory.forcing = monitor.history().clone();
    Ok(trajectory)
}
