//! Grid-convergence studies.

use rayon::prelude::*;
use serde::Serialize;

use super::steady::{residence_time, steady_data, steady_profile};
use crate::evolution::{run, step_count, EvolutionError, RunOptions};
use crate::model::{BoundaryData, Grid, Problem};
use crate::profile::Profile;
use crate::quadrature::{sample, sup_distance};
use crate::transport::{advance_slice, TraceScheme};

/// What the errors are measured against.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// Exact exponential stationary state.
    SteadyOracle,
    /// Characteristic solution of `u_t + (1 + x) u_x = -f`.
    PureAdvection,
    /// Solution on the finest grid of the study.
    Finest,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub cells: usize,
    pub error: f64,
    /// `log2(e_{N/2} / e_N)`; absent on the first row.
    pub order: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub reference: Reference,
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceTable {
    fn from_errors(reference: Reference, cells: &[usize], errors: &[f64]) -> Self {
        let rows = cells
            .iter()
            .zip(errors)
            .enumerate()
            .map(|(k, (&n, &e))| ConvergenceRow {
                cells: n,
                error: e,
                order: (k > 0).then(|| {
                    let ratio = n as f64 / cells[k - 1] as f64;
                    (errors[k - 1] / e).ln() / ratio.ln()
                }),
            })
            .collect();
        ConvergenceTable { reference, rows }
    }

    pub fn min_order(&self) -> f64 {
        self.rows
            .iter()
            .filter_map(|r| r.order)
            .fold(f64::INFINITY, f64::min)
    }
}

fn check_doubling(cells: &[usize]) {
    assert!(cells.len() >= 3, "a convergence study needs at least three grids");
    assert!(
        cells.windows(2).all(|w| w[1] == 2 * w[0]),
        "grids must double: {cells:?}"
    );
}

/// Runs from the exact stationary state of draw ratio `draw_ratio` for
/// `residence_times` and measures `sup |A - A_exact|` at the end.
pub fn steady_convergence(
    draw_ratio: f64,
    cells: &[usize],
    residence_times: f64,
    cfl: f64,
) -> Result<ConvergenceTable, EvolutionError> {
    check_doubling(cells);
    let probe = steady_data(draw_ratio, 1.0, 1.0, 1.0, 1.0);
    let t_end = residence_times * residence_time(&probe);
    let data = BoundaryData { horizon: t_end, ..probe };
    let errors = cells
        .par_iter()
        .map(|&n| {
            let problem = Problem::new(data.clone(), n)?;
            let grid = Grid::with_cfl(n, data.length, problem.bounds.v_max, cfl)?;
            let plan = problem.time_march_plan(problem.auto_delta());
            let options = RunOptions {
                stride: usize::MAX,
                monitor: false,
                ..RunOptions::default()
            };
            let traj = run(&problem, plan, grid, t_end, options)?;
            let exact = steady_profile(draw_ratio, 1.0, 1.0, &grid);
            Ok(sup_distance(&traj.final_state().area, &exact.area))
        })
        .collect::<Result<Vec<f64>, EvolutionError>>()?;
    Ok(ConvergenceTable::from_errors(Reference::SteadyOracle, cells, &errors))
}

/// Transport-only study with velocity `1 + x` on `[0, 1]`, forcing
/// `f = 0.3`, initial slice `S1(x) = 1 + 0.2 sin(2x)` and inflow
/// `S0(t) = 1 - (0.7/3) sin(3t)`. The inflow slope is chosen so that
/// `S0'(0) + S1'(0) = -f`; otherwise a slope kink travels along the corner
/// characteristic and numerical diffusion of that kink caps the sup-norm
/// order at one half.
pub fn advection_convergence(cells: &[usize], t_end: f64, cfl: f64) -> ConvergenceTable {
    check_doubling(cells);
    let f = 0.3;
    let s0 = |t: f64| 1.0 - 0.7 / 3.0 * (3.0 * t).sin();
    let s1 = |x: f64| 1.0 + 0.2 * (2.0 * x).sin();
    let exact = |t: f64, x: f64| {
        let foot = (1.0 + x) * (-t).exp() - 1.0;
        if foot >= 0.0 {
            s1(foot) - f * t
        } else {
            let since = (1.0 + x).ln();
            s0(t - since) - f * since
        }
    };
    let errors: Vec<f64> = cells
        .par_iter()
        .map(|&n| {
            let dx = 1.0 / n as f64;
            let (steps, dt) = step_count(t_end, cfl * dx / 2.0);
            let v = sample(|x| 1.0 + x, 1.0, n);
            let mut u = sample(s1, 1.0, n);
            for k in 0..steps {
                u = advance_slice(&u, &v, f, dx, dt, k as f64 * dt, s0, TraceScheme::Frozen).values;
            }
            let reference = sample(|x| exact(t_end, x), 1.0, n);
            sup_distance(&u, &reference)
        })
        .collect();
    ConvergenceTable::from_errors(Reference::PureAdvection, cells, &errors)
}

/// Self-convergence of the full solver: each grid is compared with the
/// finest one at the coarse nodes. The finest grid's own row is omitted.
pub fn self_convergence(
    data: &BoundaryData,
    cells: &[usize],
    t_end: f64,
    cfl: f64,
) -> Result<ConvergenceTable, EvolutionError> {
    check_doubling(cells);
    let finals = cells
        .par_iter()
        .map(|&n| {
            let problem = Problem::new(data.clone(), n)?;
            let grid = Grid::with_cfl(n, data.length, problem.bounds.v_max, cfl)?;
            let plan = problem.time_march_plan(problem.auto_delta());
            let options = RunOptions {
                stride: usize::MAX,
                monitor: false,
                ..RunOptions::default()
            };
            Ok(run(&problem, plan, grid, t_end, options)?.final_state().area.clone())
        })
        .collect::<Result<Vec<Vec<f64>>, EvolutionError>>()?;
    let finest = finals.last().expect("at least three grids");
    let top = *cells.last().expect("at least three grids");
    let errors: Vec<f64> = cells[..cells.len() - 1]
        .iter()
        .zip(&finals)
        .map(|(&n, a)| {
            let stride = top / n;
            a.iter()
                .enumerate()
                .map(|(i, x)| (x - finest[i * stride]).abs())
                .fold(0.0, f64::max)
        })
        .collect();
    Ok(ConvergenceTable::from_errors(Reference::Finest, &cells[..cells.len() - 1], &errors))
}

/// Convenience data for self-convergence checks: constant speeds with a
/// sinusoidal inlet area.
pub fn wavy_inlet_data(amplitude: f64, horizon: f64) -> BoundaryData {
    BoundaryData {
        s0: Profile::sinusoid(1.0, amplitude, 0.5),
        s1: Profile::constant(1.0),
        v_in: Profile::constant(1.0),
        v_l: Profile::constant(2.0),
        length: 1.0,
        horizon,
    }
}
