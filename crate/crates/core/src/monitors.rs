//! Runtime certification of the a priori bounds.
//!
//! Every barrier here is an explicit sub- or supersolution of a transport
//! problem solved along with the fiber state: the area barriers
//! `s_m`, `s_M`, `S_M^delta` and the log-slope barriers `y_m`, `Y_M`. They
//! are advanced with the same step integrals of the forcing that the solver
//! applies, so each barrier carries only data-sampling error.
//!
//! A [`BoundReport`] lists every inequality checked on one slice together
//! with its margin. Failures are recorded, never raised.

use serde::Serialize;

use crate::model::{FiberState, Grid, Problem, RampMode, RegularizationPlan};
use crate::quadrature::{derivative, trapezoid};
use crate::transport::ramp_forcing;

/// Absolute slack for inequalities that hold with real margins.
pub const REPORT_TOL: f64 = 1e-10;

/// Relative tolerance on `max |A dv/dx - Q|`.
pub const CHI_REL_TOL: f64 = 1e-12;

/// Which estimates a bound is certified under.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// `t <= t*`: the short-time sandwich also applies.
    ShortTime,
    /// Only the global barriers apply.
    Global,
}

/// How a margin is turned into a verdict.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Slack {
    /// `margin >= -REPORT_TOL`
    #[default]
    Report,
    /// `margin > 0`
    Strict,
    /// `margin >= 0`
    Exact,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundCheck {
    pub name: &'static str,
    pub bound: f64,
    pub observed: f64,
    /// Positive when the inequality holds.
    pub margin: f64,
    pub pass: bool,
    /// Node attaining the observed value, for nodal checks.
    pub node: Option<usize>,
    #[serde(skip)]
    pub slack: Slack,
}

impl BoundCheck {
    fn verdict(margin: f64, slack: Slack, report_tol: f64) -> bool {
        match slack {
            Slack::Report => margin >= -report_tol,
            Slack::Strict => margin > 0.0,
            Slack::Exact => margin >= 0.0,
        }
    }

    /// `observed <= bound`
    pub fn upper(name: &'static str, bound: f64, observed: f64, slack: Slack) -> Self {
        let margin = bound - observed;
        BoundCheck {
            name,
            bound,
            observed,
            margin,
            pass: Self::verdict(margin, slack, REPORT_TOL),
            node: None,
            slack,
        }
    }

    /// `observed >= bound`
    pub fn lower(name: &'static str, bound: f64, observed: f64, slack: Slack) -> Self {
        let margin = observed - bound;
        BoundCheck {
            name,
            bound,
            observed,
            margin,
            pass: Self::verdict(margin, slack, REPORT_TOL),
            node: None,
            slack,
        }
    }

    /// Re-evaluates the verdict with another tolerance for [`Slack::Report`] checks.
    pub fn rejudge(&mut self, report_tol: f64) {
        self.pass = Self::verdict(self.margin, self.slack, report_tol);
    }

    fn at(mut self, node: usize) -> Self {
        self.node = Some(node);
        self
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub t: f64,
    pub regime: Regime,
    pub checks: Vec<BoundCheck>,
    /// Certified lower bound for the area at `t`.
    pub area_floor: f64,
    pub area_ceiling: f64,
    /// Current log-slope barriers `(y_m(t), Y_M(t))`.
    pub slope_bounds: (f64, f64),
    /// `|M(t) - M(t - dt) - dt (flux_in - flux_out)| / M`, when a previous slice is known.
    pub mass_residual: Option<f64>,
}

impl BoundReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundCheck> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn worst_margin(&self) -> f64 {
        self.checks
            .iter()
            .map(|c| c.margin)
            .fold(f64::INFINITY, f64::min)
    }

    pub fn check(&self, name: &str) -> Option<&BoundCheck> {
        self.checks.iter().find(|c| c.name == name)
    }
}

/// Cumulative integral of the applied forcing, `int_0^{t_n} Q^{0,delta}`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ForcingHistory {
    pub times: Vec<f64>,
    pub cumulative: Vec<f64>,
}

impl ForcingHistory {
    pub fn new() -> Self {
        ForcingHistory {
            times: vec![0.0],
            cumulative: vec![0.0],
        }
    }

    /// Appends the integral of the forcing over the step ending at `t_next`.
    pub fn push(&mut self, t_next: f64, step_integral: f64) {
        let last = *self.cumulative.last().unwrap_or(&0.0);
        self.times.push(t_next);
        self.cumulative.push(last + step_integral);
    }

    /// Trapezoid accumulation of pointwise forcing samples.
    pub fn from_samples(times: &[f64], values: &[f64]) -> Self {
        let mut h = ForcingHistory::new();
        h.times[0] = times[0];
        for k in 1..times.len() {
            h.push(times[k], 0.5 * (values[k - 1] + values[k]) * (times[k] - times[k - 1]));
        }
        h
    }

    pub fn integral(&self) -> f64 {
        *self.cumulative.last().unwrap_or(&0.0)
    }
}

/// Lower barrier `s_m(t) = 2 S_m / 3 - int_0^t Q^{0,delta}`.
pub fn barrier_lower(area_min: f64, history: &ForcingHistory) -> Vec<f64> {
    history
        .cumulative
        .iter()
        .map(|c| 2.0 * area_min / 3.0 - c)
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct UpperBarriers {
    /// `s_M(t) = S_M + S_m / 2 - int_0^t Q^{0,delta}`, valid for `t <= t*`.
    pub short_time: Vec<f64>,
    /// `S_M^delta(t) = S_M + |Q00| min(t, delta)`, valid for all `t`.
    pub global: Vec<f64>,
}

pub fn global_ceiling(area_max: f64, q00: f64, delta: f64, t: f64) -> f64 {
    area_max + q00.abs() * t.min(delta)
}

pub fn barrier_upper(
    area_min: f64,
    area_max: f64,
    plan: &RegularizationPlan,
    history: &ForcingHistory,
) -> UpperBarriers {
    UpperBarriers {
        short_time: history
            .cumulative
            .iter()
            .map(|c| area_max + 0.5 * area_min - c)
            .collect(),
        global: history
            .times
            .iter()
            .map(|&t| global_ceiling(area_max, plan.q00, plan.delta, t))
            .collect(),
    }
}

/// `S_m exp(-L max(|C1|, |C2|))`.
pub fn certified_area_floor(c1: f64, c2: f64, area_min: f64, length: f64) -> f64 {
    area_min * (-length * c1.abs().max(c2.abs())).exp()
}

/// `G_M`: uniform bound on the inlet slope `|A_x(t, 0)|`.
pub fn inlet_slope_bound(problem: &Problem, delta: f64) -> f64 {
    let b = &problem.bounds;
    let q = problem.q00.abs();
    (problem.inlet_rate_max + q + b.v_max / problem.data.length * (b.area_max + delta * q)) / b.v_min
}

/// Integral over `[a, b]` of `|g|` for `g` linear with end values `ga`, `gb`.
fn abs_linear_integral(ga: f64, gb: f64, len: f64) -> f64 {
    if ga * gb >= 0.0 {
        0.5 * (ga.abs() + gb.abs()) * len
    } else {
        let r = ga.abs() / (ga.abs() + gb.abs());
        0.5 * (ga.abs() * r + gb.abs() * (1.0 - r)) * len
    }
}

/// Log-slope barriers `y_m(t) = y_m(0) e^{J(t)}`, `Y_M(t) = Y_M(0) e^{J(t)}`
/// with `J(t) = int_0^t ||F||_inf` and `F = (Q^delta - Q^{cut,delta}) / A`.
#[derive(Clone, Debug, PartialEq)]
pub struct SlopeBarrier {
    pub y_min0: f64,
    pub y_max0: f64,
    pub g_max: f64,
    /// Running `J(t)`.
    pub exponent: f64,
    /// Largest draw force seen on `[0, delta]`.
    pub layer_force_max: f64,
    delta: f64,
}

impl SlopeBarrier {
    pub fn new(problem: &Problem, delta: f64) -> Self {
        let g_max = inlet_slope_bound(problem, delta);
        let (lo, hi) = problem.initial_log_slope;
        SlopeBarrier {
            y_min0: lo.min(-g_max),
            y_max0: hi.max(g_max),
            g_max,
            exponent: 0.0,
            layer_force_max: 0.0,
            delta,
        }
    }

    /// Accounts for the step `[t, t + dt]` during which the force is `q` and
    /// the area slice is `area`.
    pub fn advance(&mut self, plan: &RegularizationPlan, t: f64, dt: f64, q: f64, area: &[f64]) {
        if t >= self.delta {
            return;
        }
        self.layer_force_max = self.layer_force_max.max(q);
        let end = (t + dt).min(self.delta);
        let ramp_end = match plan.mode {
            RampMode::TimeMarch => plan.q00 + (q - plan.q00) * end / plan.delta,
            RampMode::Picard { q_at_delta } => plan.q00 + (q_at_delta - plan.q00) * end / plan.delta,
        };
        let gap = abs_linear_integral(q - ramp_forcing(plan, t, q), q - ramp_end, end - t);
        let inv_min_area = area.iter().fold(0.0_f64, |m, a| m.max(1.0 / a));
        self.exponent += gap * inv_min_area;
    }

    pub fn bounds(&self) -> (f64, f64) {
        let growth = self.exponent.exp();
        (self.y_min0 * growth, self.y_max0 * growth)
    }

    /// Cap on `J` for all times: `8 delta (|Q00| + sup_{[0,delta]} Q) / S_m`.
    pub fn exponent_cap(&self, q00: f64, area_min: f64) -> f64 {
        8.0 * self.delta * (q00.abs() + self.layer_force_max) / area_min
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SlopeBarriers {
    pub c1: f64,
    pub c2: f64,
    pub y_min: Vec<f64>,
    pub y_max: Vec<f64>,
    /// Time indices where the discrete `d log A / dx` left `[y_m(t), Y_M(t)]`.
    pub violations: Vec<usize>,
}

/// Log-slope barriers along a trajectory whose states are equally spaced in time.
pub fn slope_barriers(problem: &Problem, plan: &RegularizationPlan, states: &[FiberState]) -> SlopeBarriers {
    let mut barrier = SlopeBarrier::new(problem, plan.delta);
    let dx = problem.data.length / (states[0].area.len() - 1) as f64;
    let mut y_min = Vec::with_capacity(states.len());
    let mut y_max = Vec::with_capacity(states.len());
    let mut violations = Vec::new();
    for (k, state) in states.iter().enumerate() {
        if k > 0 {
            let prev = &states[k - 1];
            barrier.advance(plan, prev.t, state.t - prev.t, prev.flow.q, &prev.area);
        }
        let (lo, hi) = barrier.bounds();
        let (smin, smax) = log_slope_extremes(&state.area, dx);
        if smin.0 < lo - REPORT_TOL || smax.0 > hi + REPORT_TOL {
            violations.push(k);
        }
        y_min.push(lo);
        y_max.push(hi);
    }
    let (c1, c2) = barrier.bounds();
    SlopeBarriers {
        c1,
        c2,
        y_min,
        y_max,
        violations,
    }
}

/// `(min, argmin), (max, argmax)` of the discrete `d log A / dx`.
pub fn log_slope_extremes(area: &[f64], dx: f64) -> ((f64, usize), (f64, usize)) {
    let logs: Vec<f64> = area.iter().map(|a| a.ln()).collect();
    let d = derivative(&logs, dx);
    extremes(&d)
}

fn extremes(values: &[f64]) -> ((f64, usize), (f64, usize)) {
    let mut lo = (f64::INFINITY, 0);
    let mut hi = (f64::NEG_INFINITY, 0);
    for (i, &x) in values.iter().enumerate() {
        // NaN compares false and is caught by the positivity checks
        if x < lo.0 || x.is_nan() {
            lo = (x, i);
        }
        if x > hi.0 || x.is_nan() {
            hi = (x, i);
        }
    }
    (lo, hi)
}

/// Barrier state carried alongside a run.
#[derive(Clone, Debug)]
pub struct Monitor<'a> {
    problem: &'a Problem,
    plan: RegularizationPlan,
    dx: f64,
    history: ForcingHistory,
    slope: SlopeBarrier,
    report_tol: f64,
}

impl<'a> Monitor<'a> {
    pub fn new(problem: &'a Problem, plan: RegularizationPlan, grid: &Grid) -> Self {
        Monitor {
            problem,
            plan,
            dx: grid.dx(),
            history: ForcingHistory::new(),
            slope: SlopeBarrier::new(problem, plan.delta),
            report_tol: REPORT_TOL,
        }
    }

    /// Tolerance for bounds that hold up to roundoff (default [`REPORT_TOL`]).
    pub fn with_report_tol(mut self, report_tol: f64) -> Self {
        self.report_tol = report_tol;
        self
    }

    pub fn plan(&self) -> &RegularizationPlan {
        &self.plan
    }

    pub fn history(&self) -> &ForcingHistory {
        &self.history
    }

    pub fn slope_barrier(&self) -> &SlopeBarrier {
        &self.slope
    }

    /// Records a completed step from `before` over `dt` with the given forcing integral.
    pub fn record_step(&mut self, before: &FiberState, dt: f64, forcing_integral: f64) {
        self.slope
            .advance(&self.plan, before.t, dt, before.flow.q, &before.area);
        self.history.push(before.t + dt, forcing_integral);
    }

    /// Certified `(floor, ceiling)` for the area at the latest recorded time.
    pub fn area_envelope(&self, t: f64) -> (f64, f64) {
        let b = &self.problem.bounds;
        let (c1, c2) = self.slope.bounds();
        let spent = self.history.integral();
        let mut floor = certified_area_floor(c1, c2, b.area_min, self.problem.data.length)
            .max(2.0 * b.area_min / 3.0 - spent);
        let mut ceiling = global_ceiling(b.area_max, self.plan.q00, self.plan.delta, t);
        if self.regime(t) == Regime::ShortTime {
            floor = floor.max(0.25 * b.area_min);
            ceiling = ceiling.min(b.area_max + 0.5 * b.area_min - spent);
        }
        (floor, ceiling)
    }

    pub fn regime(&self, t: f64) -> Regime {
        if t <= self.problem.budget.t_star {
            Regime::ShortTime
        } else {
            Regime::Global
        }
    }

    /// Evaluates every bound on `state`; `previous` enables the mass-balance residual.
    pub fn check(&self, state: &FiberState, previous: Option<&FiberState>) -> BoundReport {
        let mut report = check_slice(self, state, previous);
        if self.report_tol != REPORT_TOL {
            report.checks.iter_mut().for_each(|c| c.rejudge(self.report_tol));
        }
        report
    }
}

/// Evaluates all monitored inequalities on one slice.
pub fn check_slice(monitor: &Monitor<'_>, state: &FiberState, previous: Option<&FiberState>) -> BoundReport {
    let problem = monitor.problem;
    let data = &problem.data;
    let b = &problem.bounds;
    let plan = &monitor.plan;
    let dx = monitor.dx;
    let t = state.t;
    let n = state.area.len() - 1;
    let v = &state.flow.v;
    let q = state.flow.q;
    let v_in = data.v_in.value(t);
    let v_l = data.v_l.value(t);
    let regime = monitor.regime(t);
    let mut checks = Vec::with_capacity(16);

    // velocity bracketing, strict at interior nodes
    let (vmin, vmax) = extremes(&v[1..n]);
    checks.push(BoundCheck::lower("velocity_lower", v_in, vmin.0, Slack::Strict).at(vmin.1 + 1));
    checks.push(BoundCheck::upper("velocity_upper", v_l, vmax.0, Slack::Strict).at(vmax.1 + 1));
    let steps: Vec<f64> = v.windows(2).map(|w| w[1] - w[0]).collect();
    let (smallest, _) = extremes(&steps);
    checks.push(BoundCheck::lower("velocity_monotone", 0.0, smallest.0, Slack::Strict).at(smallest.1));

    checks.push(BoundCheck::lower("force_positive", 0.0, q, Slack::Strict));
    let q_cap = b.v_max / data.length * (b.area_max + plan.delta * plan.q00.abs());
    checks.push(BoundCheck::upper("force_upper", q_cap, q, Slack::Report));

    let ((amin, imin), (amax, imax)) = extremes(&state.area);
    let (floor, ceiling) = monitor.area_envelope(t);
    checks.push(BoundCheck::lower("area_floor", floor, amin, Slack::Report).at(imin));
    checks.push(BoundCheck::upper("area_ceiling", ceiling, amax, Slack::Report).at(imax));
    let global = b.area_max + plan.delta * plan.q00.abs();
    checks.push(BoundCheck::upper("global_ceiling", global, amax, Slack::Report).at(imax));
    if regime == Regime::ShortTime {
        checks.push(BoundCheck::lower("short_time_floor", 0.25 * b.area_min, amin, Slack::Report).at(imin));
        checks.push(
            BoundCheck::upper("short_time_ceiling", b.area_max + 2.0 * b.area_min / 3.0, amax, Slack::Report)
                .at(imax),
        );
    }

    let a = &state.area;
    let inlet_slope = (-3.0 * a[0] + 4.0 * a[1] - a[2]) / (2.0 * dx);
    let g_bound = (data.s0.derivative(t).abs()
        + plan.q00.abs()
        + b.v_max / data.length * (b.area_max + plan.delta * plan.q00.abs()))
        / b.v_min;
    checks.push(BoundCheck::upper("inlet_slope", g_bound, inlet_slope.abs(), Slack::Report));

    let chi = a
        .iter()
        .zip(&state.flow.dv_dx)
        .map(|(a, d)| (a * d - q).abs())
        .fold(0.0, f64::max);
    checks.push(BoundCheck::upper("chi_constancy", CHI_REL_TOL * q, chi, Slack::Exact));

    let slope_bounds = monitor.slope.bounds();
    if amin > 0.0 {
        let ((lo, ilo), (hi, ihi)) = log_slope_extremes(a, dx);
        checks.push(BoundCheck::lower("log_slope_lower", slope_bounds.0, lo, Slack::Report).at(ilo));
        checks.push(BoundCheck::upper("log_slope_upper", slope_bounds.1, hi, Slack::Report).at(ihi));
    }
    checks.push(BoundCheck::upper(
        "layer_exponent",
        monitor.slope.exponent_cap(plan.q00, b.area_min),
        monitor.slope.exponent,
        Slack::Report,
    ));

    let mass_residual = previous.map(|prev| mass_balance_residual(problem, prev, state, dx));

    BoundReport {
        t,
        regime,
        checks,
        area_floor: floor,
        area_ceiling: ceiling,
        slope_bounds,
        mass_residual,
    }
}

/// Per-step conservation defect of `A_t + (v A)_x = 0`, relative to the mass.
pub fn mass_balance_residual(problem: &Problem, prev: &FiberState, next: &FiberState, dx: f64) -> f64 {
    let data = &problem.data;
    let dt = next.t - prev.t;
    let m0 = trapezoid(&prev.area, dx);
    let m1 = trapezoid(&next.area, dx);
    let n = next.area.len() - 1;
    let flux = |s: &FiberState| {
        data.v_in.value(s.t) * s.area[0] - data.v_l.value(s.t) * s.area[n]
    };
    let net = 0.5 * (flux(prev) + flux(next)) * dt;
    (m1 - m0 - net).abs() / m1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BoundaryData;
    use crate::profile::Profile;
    use crate::velocity::compute_velocity;
    use approx::assert_relative_eq;

    fn unit_problem() -> Problem {
        Problem::new(
            BoundaryData {
                s0: Profile::constant(1.0),
                s1: Profile::constant(1.0),
                v_in: Profile::constant(1.0),
                v_l: Profile::constant(2.0),
                length: 1.0,
                horizon: 1.0,
            },
            50,
        )
        .unwrap()
    }

    #[test]
    fn lower_barrier_examples() {
        let times: Vec<f64> = (0..=10).map(|k| k as f64 * 0.1).collect();
        let zero = ForcingHistory::from_samples(&times, &[0.0; 11]);
        assert!(barrier_lower(0.9, &zero).iter().all(|&s| s == 0.6));
        let q = 0.3;
        let constant = ForcingHistory::from_samples(&times, &[q; 11]);
        for (s, t) in barrier_lower(0.9, &constant).iter().zip(&times) {
            assert_relative_eq!(*s, 0.6 - q * t, epsilon = 1e-14);
        }
    }

    #[test]
    fn lower_barrier_at_tstar_for_unit_data() {
        let p = unit_problem();
        let t_star = p.budget.t_star;
        // the force never exceeds V_M R / L^{3/2} on the set
        let q_cap = p.bounds.v_max * p.budget.radius;
        let h = ForcingHistory::from_samples(&[0.0, t_star], &[q_cap, q_cap]);
        let s = barrier_lower(p.bounds.area_min, &h);
        assert!(s[1] >= 0.25 * p.bounds.area_min);
    }

    #[test]
    fn upper_barrier_examples() {
        let plan = RegularizationPlan::time_march(0.1, 0.5);
        assert_relative_eq!(global_ceiling(1.0, 0.5, 0.1, 0.3), 1.05, epsilon = 1e-15);
        assert_relative_eq!(global_ceiling(1.0, 0.5, 0.1, 0.1), 1.05, epsilon = 1e-15);
        assert_eq!(global_ceiling(1.0, 0.5, 0.0, 0.3), 1.0);
        let h = ForcingHistory::from_samples(&[0.0, 0.05, 0.2], &[0.5, 0.6, 1.0]);
        let up = barrier_upper(1.0, 1.0, &plan, &h);
        assert_relative_eq!(up.global[1], 1.025, epsilon = 1e-15);
        // with delta |Q00| < S_m / 12 the short-time ceiling stays below S_M + 2 S_m / 3
        assert!(up.short_time.iter().all(|&s| s <= 1.0 + 2.0 / 3.0));
    }

    #[test]
    fn floor_examples() {
        assert_eq!(certified_area_floor(0.0, 0.0, 0.8, 1.0), 0.8);
        assert_relative_eq!(certified_area_floor(-2.0, 1.0, 1.0, 1.0), (-2.0f64).exp(), epsilon = 1e-15);
        assert!(certified_area_floor(-3.0, 1.0, 1.0, 1.0) < certified_area_floor(-2.0, 1.0, 1.0, 1.0));
    }

    #[test]
    fn slope_barrier_initial_values_with_flat_data() {
        let p = unit_problem();
        let sb = SlopeBarrier::new(&p, 0.01);
        // zero slopes and Q00 = 0: G_M = V_M S_M / (L v_m)
        assert_relative_eq!(sb.y_min0, -2.0, epsilon = 1e-15);
        assert_relative_eq!(sb.y_max0, 2.0, epsilon = 1e-15);
        let mut frozen = sb.clone();
        let plan = RegularizationPlan::time_march(0.01, 0.0);
        frozen.advance(&plan, 0.02, 0.01, 1.0, &[1.0; 5]);
        assert_eq!(frozen.bounds(), sb.bounds());
        let mut active = sb.clone();
        active.advance(&plan, 0.0, 0.005, 1.0, &[0.5; 5]);
        // int_0^{0.005} (1 - s/0.01) ds / 0.5
        assert_relative_eq!(active.exponent, 2.0 * 0.00375, epsilon = 1e-14);
    }

    #[test]
    fn constant_slice_passes_with_expected_force_margin() {
        let p = unit_problem();
        let grid = Grid::new(50, 1.0, 0.01).unwrap();
        let plan = p.time_march_plan(p.auto_delta());
        let monitor = Monitor::new(&p, plan, &grid);
        let area = vec![1.0; 51];
        let flow = compute_velocity(&area, grid.dx(), 1.0, 2.0).unwrap();
        let state = FiberState { t: 0.0, area, flow };
        let report = monitor.check(&state, None);
        assert!(report.passed(), "{:?}", report.failures().collect::<Vec<_>>());
        let force = report.check("force_upper").unwrap();
        assert_relative_eq!(force.margin, 2.0 * 1.0 - 1.0 * 1.0, epsilon = 1e-12);
        assert_eq!(report.check("log_slope_lower").unwrap().observed, 0.0);
    }

    #[test]
    fn corrupted_node_is_isolated() {
        let p = unit_problem();
        let grid = Grid::new(50, 1.0, 0.01).unwrap();
        let monitor = Monitor::new(&p, p.time_march_plan(p.auto_delta()), &grid);
        let area = vec![1.0; 51];
        let flow = compute_velocity(&area, grid.dx(), 1.0, 2.0).unwrap();
        let mut state = FiberState { t: 0.0, area, flow };
        state.area[17] = -1.0;
        let report = monitor.check(&state, None);
        let floor = report.check("area_floor").unwrap();
        assert!(!floor.pass);
        assert_eq!(floor.node, Some(17));
    }

    #[test]
    fn abs_linear_integral_with_sign_change() {
        assert_relative_eq!(abs_linear_integral(1.0, -1.0, 2.0), 1.0, epsilon = 1e-15);
        assert_relative_eq!(abs_linear_integral(1.0, 3.0, 1.0), 2.0, epsilon = 1e-15);
    }
}
