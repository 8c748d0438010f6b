//! Fixed-point construction on a short slab `[0, t0]`.

use super::{energy_norm, recover, step_count, EnergySummary, EvolutionError, SeriesRow, Trajectory};
use super::BreakdownDump;
use crate::model::{Grid, Problem, RegularizationPlan};
use crate::monitors::Monitor;
use crate::quadrature::trapezoid;
use crate::transport::{advance_slice, ramp_step_integral, TraceScheme};
use crate::velocity::{compute_velocity, VelocitySlice};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardSettings {
    /// Slab length; must stay below `t*`.
    pub t0: f64,
    /// Stop once `sup |A^{k+1} - A^k|` falls below this.
    pub tol: f64,
    pub max_iter: usize,
    pub trace: TraceScheme,
    /// Tolerance for monitored bounds that hold up to roundoff.
    pub report_tol: f64,
}

impl PicardSettings {
    pub fn for_problem(problem: &Problem) -> Self {
        PicardSettings {
            t0: problem.picard_horizon(),
            tol: 1e-12,
            max_iter: 50,
            trace: TraceScheme::Midpoint,
            report_tol: crate::monitors::REPORT_TOL,
        }
    }
}

/// Membership record for one iterate `A^k` of the fixed-point map.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardIterate {
    pub index: usize,
    /// `sup |A^k - A^{k-1}|`; infinite for the initial guess.
    pub difference: f64,
    pub energy: EnergySummary,
    pub energy_ok: bool,
    pub time_derivative_ok: bool,
    /// `S_m / 4 <= A^k <= 2 S_M`.
    pub sandwich_ok: bool,
    /// `A^k(0, .) = S1` and `A^k(., 0) = S0` at every lattice point.
    pub traces_ok: bool,
    pub q_at_delta: f64,
    pub min_area: f64,
    pub max_area: f64,
}

impl PicardIterate {
    pub fn in_set(&self) -> bool {
        self.energy_ok && self.time_derivative_ok && self.sandwich_ok && self.traces_ok
    }
}

#[derive(Clone, Debug)]
pub struct PicardOutcome {
    pub grid: Grid,
    pub iterates: Vec<PicardIterate>,
    pub converged: bool,
    /// `sup |Phi(A) - A|` at the returned iterate.
    pub residual: f64,
    pub energy_cap: f64,
    pub time_derivative_cap: f64,
    /// The returned iterate as a trajectory checked by the monitors.
    pub trajectory: Trajectory,
}

impl PicardOutcome {
    pub fn last_difference(&self) -> f64 {
        self.iterates.last().map_or(f64::INFINITY, |it| it.difference)
    }

    /// `d_{k+1} / d_k` for consecutive finite differences.
    pub fn contraction_ratios(&self) -> Vec<f64> {
        let d: Vec<f64> = self
            .iterates
            .iter()
            .map(|it| it.difference)
            .filter(|d| d.is_finite())
            .collect();
        d.windows(2).map(|w| w[1] / w[0]).collect()
    }

    /// Differences strictly decrease from the second difference on.
    pub fn monotone_after_second(&self) -> bool {
        let d: Vec<f64> = self.iterates.iter().skip(2).map(|it| it.difference).collect();
        d.windows(2).all(|w| w[1] < w[0] || w[1] == 0.0)
    }

    pub fn all_in_set(&self) -> bool {
        self.iterates.iter().all(PicardIterate::in_set)
    }
}

/// Space-time field `A[n][i]` on the slab lattice.
type Slab = Vec<Vec<f64>>;

struct Lattice<'a> {
    problem: &'a Problem,
    dx: f64,
    dt: f64,
    steps: usize,
    delta: f64,
    trace: TraceScheme,
}

impl Lattice<'_> {
    fn time(&self, n: usize) -> f64 {
        n as f64 * self.dt
    }

    fn flows(&self, a: &Slab) -> Result<Vec<VelocitySlice>, EvolutionError> {
        let data = &self.problem.data;
        a.iter()
            .enumerate()
            .map(|(n, slice)| {
                let t = self.time(n);
                Ok(compute_velocity(slice, self.dx, data.v_in.value(t), data.v_l.value(t))?)
            })
            .collect()
    }

    /// `Q^k(delta)` by linear interpolation in time.
    fn force_at_delta(&self, flows: &[VelocitySlice]) -> f64 {
        let s = (self.delta / self.dt).min(self.steps as f64);
        let n = (s.floor() as usize).min(self.steps.saturating_sub(1));
        let w = s - n as f64;
        (1.0 - w) * flows[n].q + w * flows[n + 1].q
    }

    fn plan(&self, flows: &[VelocitySlice]) -> RegularizationPlan {
        RegularizationPlan::picard(self.delta, self.problem.q00, self.force_at_delta(flows))
    }

    /// One application of the fixed-point map.
    fn apply(&self, a: &Slab) -> Result<(Slab, RegularizationPlan, Vec<f64>), EvolutionError> {
        let flows = self.flows(a)?;
        let plan = self.plan(&flows);
        let data = &self.problem.data;
        let mut out = Vec::with_capacity(self.steps + 1);
        let mut integrals = Vec::with_capacity(self.steps);
        out.push(a[0].clone());
        for (n, flow) in flows.iter().enumerate().take(self.steps) {
            let t = self.time(n);
            let integral = ramp_step_integral(&plan, t, self.dt, flow.q);
            let next = advance_slice(
                &out[n],
                &flow.v,
                integral / self.dt,
                self.dx,
                self.dt,
                t,
                |s| data.s0.value(s),
                self.trace,
            )
            .values;
            if let Some(index) = next.iter().position(|&x| !(x > 0.0)) {
                let last_state = recover(data, out[n].clone(), t, self.dx)?;
                return Err(EvolutionError::Breakdown(Box::new(BreakdownDump {
                    t: self.time(n + 1),
                    index,
                    value: next[index],
                    last_state,
                    offending_area: next,
                    partial: None,
                })));
            }
            out.push(next);
            integrals.push(integral);
        }
        Ok((out, plan, integrals))
    }

    fn record(&self, index: usize, a: &Slab, difference: f64, caps: (f64, f64)) -> Result<PicardIterate, EvolutionError> {
        let b = &self.problem.bounds;
        let data = &self.problem.data;
        let energy = energy_norm(a, self.dx, self.dt, b.v_min);
        let (min_area, max_area) = a
            .iter()
            .flatten()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        let initial_ok = a[0]
            .iter()
            .enumerate()
            .all(|(i, &x)| x == data.s1.value(i as f64 * self.dx));
        let inlet_ok = a
            .iter()
            .enumerate()
            .all(|(n, s)| n == 0 || s[0] == data.s0.value(self.time(n)));
        let flows = self.flows(a)?;
        Ok(PicardIterate {
            index,
            difference,
            energy,
            energy_ok: energy.energy <= caps.0,
            time_derivative_ok: energy.time_derivative_norm <= caps.1,
            sandwich_ok: min_area >= 0.25 * b.area_min && max_area <= 2.0 * b.area_max,
            traces_ok: initial_ok && inlet_ok,
            q_at_delta: self.force_at_delta(&flows),
            min_area,
            max_area,
        })
    }
}

fn sup_difference(a: &Slab, b: &Slab) -> f64 {
    a.iter()
        .flatten()
        .zip(b.iter().flatten())
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Iterates `A^{k+1} = Phi(A^k)` from the time-frozen guess `A^0 = S1`.
///
/// The slab uses `grid.cells` cells and the largest step not exceeding
/// `grid.dt` that divides `t0`. The returned trajectory carries the monitor
/// reports of the final iterate.
pub fn picard_iterate(
    problem: &Problem,
    delta: f64,
    grid: Grid,
    settings: PicardSettings,
) -> Result<PicardOutcome, EvolutionError> {
    let t0 = settings.t0;
    RegularizationPlan::picard(delta, problem.q00, problem.q00)
        .check_admissible(problem.bounds.area_min, t0)?;
    let (steps, dt) = step_count(t0, grid.dt);
    let grid = Grid { dt, ..grid };
    let lattice = Lattice {
        problem,
        dx: grid.dx(),
        dt,
        steps,
        delta,
        trace: settings.trace,
    };
    let data = &problem.data;
    let caps = (problem.budget.radius, problem.time_derivative_cap());

    let initial = grid.sample(&data.s1);
    let mut current: Slab = (0..=steps)
        .map(|n| {
            let mut s = initial.clone();
            if n > 0 {
                s[0] = data.s0.value(lattice.time(n));
            }
            s
        })
        .collect();
    let mut iterates = vec![lattice.record(0, &current, f64::INFINITY, caps)?];
    let mut converged = false;
    let (mut next, mut plan, mut integrals) = lattice.apply(&current)?;
    for k in 1..=settings.max_iter {
        let difference = sup_difference(&next, &current);
        iterates.push(lattice.record(k, &next, difference, caps)?);
        current = next;
        let applied = lattice.apply(&current)?;
        next = applied.0;
        plan = applied.1;
        integrals = applied.2;
        if difference < settings.tol {
            converged = true;
            break;
        }
    }
    let residual = sup_difference(&next, &current);

    // `plan` and `integrals` were produced from `current`, whose image is `next`;
    // the monitored trajectory is that image, which differs by `residual`.
    let trajectory = monitored(problem, &lattice, grid, plan, &next, &integrals, settings.report_tol)?;
    let outcome = PicardOutcome {
        grid,
        iterates,
        converged,
        residual,
        energy_cap: caps.0,
        time_derivative_cap: caps.1,
        trajectory,
    };
    if converged {
        Ok(outcome)
    } else {
        Err(EvolutionError::NoConvergence(Box::new(outcome)))
    }
}

fn monitored(
    problem: &Problem,
    lattice: &Lattice<'_>,
    grid: Grid,
    plan: RegularizationPlan,
    slab: &Slab,
    integrals: &[f64],
    report_tol: f64,
) -> Result<Trajectory, EvolutionError> {
    let mut monitor = Monitor::new(problem, plan, &grid).with_report_tol(report_tol);
    let mut energy = super::EnergyAccumulator::new(lattice.dx, problem.bounds.v_min);
    let mut traj = Trajectory {
        grid,
        plan,
        budget: problem.budget,
        states: Vec::with_capacity(slab.len()),
        diagnostics: Vec::with_capacity(slab.len()),
        series: Vec::with_capacity(slab.len()),
        forcing: Default::default(),
        max_courant: 0.0,
        violations: 0,
        first_violation: None,
    };
    for (n, slice) in slab.iter().enumerate() {
        let state = recover(&problem.data, slice.clone(), lattice.time(n), lattice.dx)?;
        let prev = traj.states.last();
        if let Some(p) = prev {
            monitor.record_step(p, lattice.dt, integrals[n - 1]);
        }
        let report = monitor.check(&state, prev);
        let e = energy.push(slice, lattice.dt);
        let (min_area, max_area) = slice
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
        traj.series.push(SeriesRow {
            t: state.t,
            q: state.flow.q,
            mass: trapezoid(slice, lattice.dx),
            min_area,
            max_area,
            energy: e,
            worst_margin: report.worst_margin(),
            mass_residual: report.mass_residual.unwrap_or(0.0),
        });
        if !report.passed() {
            traj.violations += 1;
            if traj.first_violation.is_none() {
                traj.first_violation = Some(report.clone());
            }
        }
        traj.max_courant = traj
            .max_courant
            .max(state.flow.v.iter().cloned().fold(0.0, f64::max) * lattice.dt / lattice.dx);
        traj.diagnostics.push(report);
        traj.states.push(state);
    }
    traj.forcing = monitor.history().clone();
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BoundaryData;
    use crate::profile::Profile;

    fn constant_problem() -> Problem {
        let data = BoundaryData {
            s0: Profile::constant(1.0),
            s1: Profile::constant(1.0),
            v_in: Profile::constant(1.0),
            v_l: Profile::constant(2.0),
            length: 1.0,
            horizon: 1.0,
        };
        Problem::new(data, 32).unwrap()
    }

    #[test]
    fn converges_on_constant_data() {
        let problem = constant_problem();
        let settings = PicardSettings::for_problem(&problem);
        let grid = Grid::new(32, 1.0, settings.t0 / 24.0).unwrap();
        let out = picard_iterate(&problem, problem.auto_delta(), grid, settings).unwrap();
        assert!(out.converged);
        assert!(out.residual < 1e-10, "{}", out.residual);
        assert!(out.all_in_set());
        assert!(out.monotone_after_second());
        assert!(out.trajectory.passed());
    }

    #[test]
    fn iteration_cap_reports_outcome() {
        let problem = constant_problem();
        let mut settings = PicardSettings::for_problem(&problem);
        settings.max_iter = 1;
        settings.tol = 0.0;
        let grid = Grid::new(16, 1.0, settings.t0 / 10.0).unwrap();
        match picard_iterate(&problem, problem.auto_delta(), grid, settings) {
            Err(EvolutionError::NoConvergence(out)) => {
                assert_eq!(out.iterates.len(), 2);
                assert!(!out.converged);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn rejects_delta_beyond_slab() {
        let problem = constant_problem();
        let settings = PicardSettings::for_problem(&problem);
        let grid = Grid::new(16, 1.0, settings.t0 / 10.0).unwrap();
        assert!(picard_iterate(&problem, settings.t0, grid, settings).is_err());
    }
}
