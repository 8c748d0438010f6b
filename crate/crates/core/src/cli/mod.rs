//! Command-line driver: `fiberdraw <mode> --config <path> [--out <dir>]`.
//!
//! Exit codes: 0 when the run completed with every monitored bound
//! satisfied, 2 when a bound failed or the area broke down, 1 on
//! configuration or I/O errors.

mod config;
mod output;

pub use config::{
    load_config, parse_config, ConfigError, ConvergeConfig, DataProfiles, DeltaChoice, Geometry, GridConfig, Mode,
    OutputConfig, PicardConfig, Regularization, RunConfig, SteadyConfig, SweepConfig, Tolerances, DEFAULT_CFL,
};
pub use output::{num, write_config_echo, write_trajectory, Csv, IoFailure};

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use thiserror::Error;

use crate::analysis::{
    advection_convergence, delta_sweep, halving, residence_time, resonance_scan, self_convergence, steady_convergence,
    steady_data, steady_profile,
};
use crate::evolution::{picard_iterate, run, EvolutionError, PicardOutcome, PicardSettings, RunOptions, Trajectory};
use crate::model::{Grid, Problem};
use crate::monitors::{certified_area_floor, slope_barriers, Regime};

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Io(#[from] IoFailure),
    #[error(transparent)]
    Evolution(#[from] EvolutionError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => 1,
            CliError::Evolution(_) => 2,
        }
    }
}

/// Result of a completed run.
#[derive(Clone, Debug)]
pub struct Outcome {
    /// 0 when every bound held, 2 otherwise.
    pub exit_code: i32,
    pub summary: String,
    pub files: Vec<PathBuf>,
}

/// Loads the configuration, runs `mode` and writes every artifact into the
/// output directory (`--out`, else `output.directory`, else `./out`).
pub fn run_cli(mode: Mode, config_path: &Path, out: Option<&Path>) -> Result<Outcome, CliError> {
    let config = load_config(config_path, mode)?;
    let dir = out
        .map(Path::to_path_buf)
        .or_else(|| config.output.directory.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    execute(&config, &dir)
}

pub fn execute(config: &RunConfig, dir: &Path) -> Result<Outcome, CliError> {
    output::create_dir(dir)?;
    let mut files = vec![write_config_echo(dir, config)?];
    let mut report = String::new();
    let _ = writeln!(report, "fiberdraw {}", config.mode());
    let result = match config.mode() {
        Mode::Simulate => simulate(config, dir, &mut report, &mut files),
        Mode::Picard => picard(config, dir, &mut report, &mut files),
        Mode::Steady => steady(config, dir, &mut report, &mut files),
        Mode::Scan => scan(config, dir, &mut report, &mut files),
        Mode::SweepDelta => sweep(config, dir, &mut report, &mut files),
        Mode::Converge => converge(config, dir, &mut report, &mut files),
        Mode::Verify => verify(config, dir, &mut report, &mut files),
    };
    let exit_code = match result {
        Ok(ok) => {
            let _ = writeln!(report, "\nresult: {}", if ok { "all checks passed" } else { "CHECKS FAILED" });
            if ok {
                0
            } else {
                2
            }
        }
        Err(CliError::Evolution(EvolutionError::Breakdown(dump))) => {
            let _ = writeln!(
                report,
                "\nresult: BREAKDOWN at t = {} node {} (area {})",
                num(dump.t),
                dump.index,
                num(dump.value)
            );
            if let Some(partial) = &dump.partial {
                files.extend(write_trajectory(dir, partial)?);
                files.push(output::write_breakdown(dir, &partial.grid, &dump)?);
            }
            2
        }
        Err(e) => return Err(e),
    };
    files.push(output::write_text(dir, "report.txt", &report)?);
    Ok(Outcome {
        exit_code,
        summary: report,
        files,
    })
}

fn expect_problem(config: &RunConfig) -> Result<Problem, CliError> {
    Ok(config.problem()?.expect("modes that need data were validated"))
}

fn run_options(config: &RunConfig) -> RunOptions {
    RunOptions {
        trace: config.trace,
        stride: config.output.stride,
        monitor: true,
        report_tol: config.tolerances.report_tol,
    }
}

fn describe_problem(report: &mut String, problem: &Problem, delta: f64) {
    let b = &problem.bounds;
    let s = &problem.budget;
    let _ = writeln!(report, "data bounds: v_m = {}, V_M = {}, S_m = {}, S_M = {}", num(b.v_min), num(b.v_max), num(b.area_min), num(b.area_max));
    let _ = writeln!(report, "compatibility force Q00 = {}", num(problem.q00));
    let _ = writeln!(report, "energy radius R = {}, alpha = {}, beta = {}", num(s.radius), num(s.alpha), num(s.beta));
    let _ = writeln!(report, "short-time horizon t* = {}", num(s.t_star));
    let _ = writeln!(report, "ramp width delta = {}", num(delta));
}

fn describe_trajectory(report: &mut String, traj: &Trajectory, viscosity: f64) {
    let last = traj.diagnostics.last();
    let _ = writeln!(report, "steps: {} (dt = {}, N = {})", traj.series.len() - 1, num(traj.grid.dt), traj.grid.cells);
    let _ = writeln!(report, "largest Courant number: {}", num(traj.max_courant));
    let last_state = traj.final_state();
    let _ = writeln!(
        report,
        "draw force Q at t = {}: {} (tension 3 mu Q = {})",
        num(last_state.t),
        num(last_state.force()),
        num(viscosity * last_state.force())
    );
    if let Some(r) = last {
        let _ = writeln!(report, "certified area floor at t = {}: {}", num(r.t), num(r.area_floor));
        let _ = writeln!(report, "certified area ceiling at t = {}: {}", num(r.t), num(r.area_ceiling));
        let _ = writeln!(report, "log-slope barriers: [{}, {}]", num(r.slope_bounds.0), num(r.slope_bounds.1));
    }
    let (lo, hi) = traj
        .series
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| (lo.min(r.min_area), hi.max(r.max_area)));
    let _ = writeln!(report, "observed area range: [{}, {}]", num(lo), num(hi));
    // the ramp replaces A v_x on [0, delta], so mass is not conserved on steps touching it
    let delta = traj.plan.delta;
    let (layer, outer) = traj.series.iter().fold((0.0_f64, 0.0_f64), |(l, o), r| {
        if r.t - traj.grid.dt < delta {
            (l.max(r.mass_residual), o)
        } else {
            (l, o.max(r.mass_residual))
        }
    });
    let _ = writeln!(report, "largest per-step mass residual on the ramp layer: {}", num(layer));
    let _ = writeln!(report, "largest per-step mass residual after the ramp layer: {}", num(outer));
    let short = traj.diagnostics.iter().filter(|r| r.regime == Regime::ShortTime).count();
    let _ = writeln!(
        report,
        "reports in the short-time regime (t <= t* = {}, sandwich applies): {short}; global barriers only: {}",
        num(traj.budget.t_star),
        traj.diagnostics.len() - short
    );
    let _ = writeln!(report, "steps with failed checks: {}", traj.violations);
    if let Some(r) = &traj.first_violation {
        for c in r.failures() {
            let _ = writeln!(
                report,
                "  first failure at t = {}: {} bound {} observed {}",
                num(r.t),
                c.name,
                num(c.bound),
                num(c.observed)
            );
        }
    }
}

const RAMP_NOTE: &str = "deviation: on [0, delta) the ramp interpolates towards the running force Q(t) \
instead of Q(delta), which is not yet known while marching";

fn simulate(config: &RunConfig, dir: &Path, report: &mut String, files: &mut Vec<PathBuf>) -> Result<bool, CliError> {
    let problem = expect_problem(config)?;
    let delta = config.delta_for(&problem);
    describe_problem(report, &problem, delta);
    let _ = writeln!(report, "{RAMP_NOTE}");
    let grid = config.grid_for(problem.bounds.v_max).map_err(EvolutionError::from)?;
    let traj = run(&problem, problem.time_march_plan(delta), grid, problem.data.horizon, run_options(config))?;
    describe_trajectory(report, &traj, config.viscosity);
    files.extend(write_trajectory(dir, &traj)?);
    Ok(traj.passed())
}

fn picard_grid(config: &RunConfig, problem: &Problem, t0: f64) -> Result<Grid, CliError> {
    let grid = config.grid_for(problem.bounds.v_max).map_err(EvolutionError::from)?;
    let dt = grid.dt.min(t0 / config.picard.min_steps.max(1) as f64);
    Ok(Grid { dt, ..grid })
}

fn describe_picard(report: &mut String, out: &PicardOutcome) {
    let _ = writeln!(report, "fixed-point iterations: {}", out.iterates.len() - 1);
    let _ = writeln!(report, "converged: {}", out.converged);
    let _ = writeln!(report, "fixed-point residual: {}", num(out.residual));
    let _ = writeln!(report, "energy cap R = {}, time-derivative cap = {}", num(out.energy_cap), num(out.time_derivative_cap));
    let ratios: Vec<String> = out.contraction_ratios().iter().map(|r| format!("{r:.3e}")).collect();
    let _ = writeln!(report, "contraction ratios: [{}]", ratios.join(", "));
    let _ = writeln!(report, "all iterates in the admissible set: {}", out.all_in_set());
    let _ = writeln!(report, "differences decrease after iteration 2: {}", out.monotone_after_second());
}

fn run_picard(config: &RunConfig, problem: &Problem) -> Result<(PicardOutcome, f64), CliError> {
    let delta = config.delta_for(problem);
    let t0 = config.picard.t0.unwrap_or(problem.picard_horizon());
    let settings = PicardSettings {
        t0,
        tol: config.tolerances.picard_tol,
        max_iter: config.tolerances.max_iter,
        trace: config.trace,
        report_tol: config.tolerances.report_tol,
    };
    let grid = picard_grid(config, problem, t0)?;
    match picard_iterate(problem, delta, grid, settings) {
        Ok(out) => Ok((out, t0)),
        Err(EvolutionError::NoConvergence(out)) => {
            log::warn!("fixed-point iteration stopped after {} iterations", out.iterates.len() - 1);
            Ok((*out, t0))
        }
        Err(e) => Err(e.into()),
    }
}

fn picard(config: &RunConfig, dir: &Path, report: &mut String, files: &mut Vec<PathBuf>) -> Result<bool, CliError> {
    let problem = expect_problem(config)?;
    describe_problem(report, &problem, config.delta_for(&problem));
    let (out, t0) = run_picard(config, &problem)?;
    let _ = writeln!(report, "slab length t0 = {}", num(t0));
    describe_picard(report, &out);
    describe_trajectory(report, &out.trajectory, config.viscosity);
    files.push(output::write_iterates(dir, &out)?);
    files.extend(write_trajectory(dir, &out.trajectory)?);
    Ok(out.converged && out.all_in_set() && out.trajectory.passed())
}

fn steady(config: &RunConfig, dir: &Path, report: &mut String, files: &mut Vec<PathBuf>) -> Result<bool, CliError> {
    let s = config.steady;
    let probe = steady_data(s.draw_ratio, s.v_in, s.inlet_area, config.geometry.length, 1.0);
    let t_end = s.residence_times * residence_time(&probe);
    let data = crate::model::BoundaryData { horizon: t_end, ..probe };
    let problem = Problem::new(data, config.grid.cells).map_err(EvolutionError::from)?;
    let delta = match config.regularization.delta {
        DeltaChoice::Auto => problem.auto_delta(),
        DeltaChoice::Value(v) => v,
    };
    let _ = writeln!(report, "draw ratio D = {}, run length {} residence times", num(s.draw_ratio), num(s.residence_times));
    describe_problem(report, &problem, delta);
    let grid = config.grid_for(problem.bounds.v_max).map_err(EvolutionError::from)?;
    let traj = run(&problem, problem.time_march_plan(delta), grid, t_end, run_options(config))?;
    let exact = steady_profile(s.draw_ratio, s.v_in, s.inlet_area, &traj.grid);
    let drift = traj
        .final_state()
        .area
        .iter()
        .zip(&exact.area)
        .map(|(a, e)| ((a - e) / e).abs())
        .fold(0.0, f64::max);
    let _ = writeln!(report, "relative drift from the stationary profile: {}", num(drift));
    let _ = writeln!(report, "stationary force chi = {}, flux F = {}", num(exact.chi), num(exact.flux));
    describe_trajectory(report, &traj, config.viscosity);
    files.extend(write_trajectory(dir, &traj)?);
    Ok(traj.passed())
}

fn scan(config: &RunConfig, dir: &Path, report: &mut String, files: &mut Vec<PathBuf>) -> Result<bool, CliError> {
    let settings = &config.scan;
    let result = resonance_scan(settings)?;
    let _ = writeln!(
        report,
        "draw ratios scanned: {} (N = {}, Courant target {}, Richardson: {})",
        result.entries.len(),
        settings.cells,
        settings.cfl,
        settings.richardson
    );
    let _ = writeln!(report, "growth rates are per residence time (L / mean v_in)");
    for e in &result.entries {
        let _ = writeln!(
            report,
            "  D = {:>8.4}  rate = {:>11.4e}  period = {}  residual = {:.3e}{}",
            e.draw_ratio,
            e.growth_rate,
            e.period.map_or("-".to_string(), |p| format!("{p:.4}")),
            e.fit_residual,
            e.inconclusive.as_ref().map_or(String::new(), |err| format!("  inconclusive: {err}"))
        );
    }
    match result.bracket {
        Some((lo, hi)) => {
            let _ = writeln!(report, "critical bracket: [{}, {}], midpoint {}", num(lo), num(hi), num(0.5 * (lo + hi)));
        }
        None => {
            let _ = writeln!(report, "critical bracket: none (no decay-to-growth sign change)");
        }
    }
    files.push(output::write_scan(dir, &result)?);
    Ok(true)
}

fn sweep(config: &RunConfig, dir: &Path, report: &mut String, files: &mut Vec<PathBuf>) -> Result<bool, CliError> {
    let problem = expect_problem(config)?;
    let delta = config.delta_for(&problem);
    describe_problem(report, &problem, delta);
    let sw = &config.sweep;
    let deltas = sw.deltas.clone().unwrap_or_else(|| halving(delta, sw.count));
    let largest = deltas.iter().cloned().fold(0.0, f64::max);
    let smallest = deltas.iter().cloned().fold(f64::INFINITY, f64::min);
    let t_end = sw.t_end.unwrap_or((20.0 * largest).min(problem.data.horizon));
    let grid = config.grid_for(problem.bounds.v_max).map_err(EvolutionError::from)?;
    let grid = Grid {
        dt: grid.dt.min(smallest / sw.steps_per_delta.max(1) as f64),
        ..grid
    };
    let result = delta_sweep(&problem, grid, &deltas, t_end)?;
    let _ = writeln!(report, "run length {}, dt = {}", num(t_end), num(grid.dt));
    for p in &result.pairs {
        let _ = writeln!(
            report,
            "  delta {} vs {}: distance {} (layer {}, after layer {}) at t = {}",
            num(p.delta_a),
            num(p.delta_b),
            num(p.distance),
            num(p.layer_distance),
            num(p.outer_distance),
            num(p.t_max)
        );
    }
    let monotone = result.monotone();
    let concentrated = result.concentrated(0.0);
    let _ = writeln!(report, "distances decrease monotonically: {monotone}");
    let _ = writeln!(report, "distances peak inside [0, {}]: {concentrated}", num(largest));
    files.push(output::write_sweep(dir, &result)?);
    Ok(monotone && concentrated)
}

fn converge(config: &RunConfig, dir: &Path, report: &mut String, files: &mut Vec<PathBuf>) -> Result<bool, CliError> {
    let c = &config.converge;
    let cfl = config.grid.cfl.unwrap_or(DEFAULT_CFL);
    let steady = steady_convergence(c.draw_ratio, &c.cells, c.residence_times, cfl)?;
    let advection = advection_convergence(&c.cells, c.advection_t_end, cfl);
    let mut tables = vec![("steady_oracle", &steady), ("pure_advection", &advection)];
    let own;
    if let Some(data) = config.boundary_data() {
        let mut cells = c.cells.clone();
        cells.push(2 * cells[cells.len() - 1]);
        own = self_convergence(&data, &cells, data.horizon, cfl)?;
        tables.push(("self", &own));
    }
    let mut ok = true;
    for (name, t) in &tables {
        let _ = writeln!(report, "{name}:");
        for r in &t.rows {
            let _ = writeln!(
                report,
                "  N = {:>5}  error = {}  order = {}",
                r.cells,
                num(r.error),
                r.order.map_or("-".to_string(), |o| format!("{o:.3}"))
            );
        }
        if *name != "self" {
            ok &= t.min_order() >= 0.9;
        }
    }
    files.push(output::write_convergence(dir, &tables)?);
    Ok(ok)
}

fn verify(config: &RunConfig, dir: &Path, report: &mut String, files: &mut Vec<PathBuf>) -> Result<bool, CliError> {
    let problem = expect_problem(config)?;
    let delta = config.delta_for(&problem);
    describe_problem(report, &problem, delta);
    let grid = config.grid_for(problem.bounds.v_max).map_err(EvolutionError::from)?;
    let plan = problem.time_march_plan(delta);
    let options = RunOptions {
        stride: 1,
        ..run_options(config)
    };
    let traj = run(&problem, plan, grid, problem.data.horizon, options)?;
    let _ = writeln!(report, "\n[time march over the horizon]");
    let _ = writeln!(report, "{RAMP_NOTE}");
    describe_trajectory(report, &traj, config.viscosity);

    let barriers = slope_barriers(&problem, &plan, &traj.states);
    let floor = certified_area_floor(barriers.c1, barriers.c2, problem.bounds.area_min, problem.data.length);
    let observed_min = traj.series.iter().map(|r| r.min_area).fold(f64::INFINITY, f64::min);
    let _ = writeln!(report, "\n[log-slope certification]");
    let _ = writeln!(report, "C1 = {}, C2 = {}", num(barriers.c1), num(barriers.c2));
    let _ = writeln!(report, "slices outside [y_m, Y_M]: {}", barriers.violations.len());
    let _ = writeln!(report, "certified floor {} vs observed minimum {}", num(floor), num(observed_min));
    let slopes_ok = barriers.violations.is_empty() && observed_min >= floor;

    let (out, t0) = run_picard(config, &problem)?;
    let _ = writeln!(report, "\n[fixed-point construction on [0, {}]]", num(t0));
    describe_picard(report, &out);
    let picard_ok = out.converged && out.all_in_set() && out.trajectory.passed();

    // only the full-resolution trajectory is written; keep the stride for snapshots
    let kept = Trajectory {
        states: traj
            .states
            .iter()
            .enumerate()
            .filter(|(k, _)| k % config.output.stride == 0 || *k + 1 == traj.states.len())
            .map(|(_, s)| s.clone())
            .collect(),
        ..traj.clone()
    };
    files.extend(write_trajectory(dir, &kept)?);
    files.push(output::write_iterates(dir, &out)?);
    Ok(traj.passed() && slopes_ok && picard_ok)
}
