//! Problem data, admissibility checks and the scalar constants that drive
//! the regularized construction (compatibility defect, energy radius,
//! short-time horizon and the admissible ramp width).

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::profile::Profile;
use crate::quadrature::{sample, trapezoid};
use crate::velocity::VelocitySlice;

/// Data profiles are checked on a grid this many times finer than the solver grid.
pub const OVERSAMPLING: usize = 4;

/// Safety factor applied to the strict upper limit on the ramp width.
pub const DELTA_SAFETY: f64 = 0.9;

/// Relative tolerance for the corner condition `S0(0) = S1(0)`.
pub const COMPATIBILITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DataError {
    #[error("ordering violated at t = {t}: v_in = {v_in} is not below v_L = {v_l}")]
    OrderingViolation { t: f64, v_in: f64, v_l: f64 },
    #[error("profile {profile} is not positive at {at} (value {value})")]
    PositivityViolation {
        profile: &'static str,
        at: f64,
        value: f64,
    },
    #[error("incompatible corner data: S0(0) = {s0} but S1(0) = {s1}")]
    CompatibilityViolation { s0: f64, s1: f64 },
    #[error("profile {profile} is not regular near {at}")]
    RegularityViolation { profile: &'static str, at: f64 },
    #[error("profile {profile}: {reason}")]
    InvalidProfile { profile: &'static str, reason: String },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("inadmissible ramp width delta = {delta}: {reason}")]
    InadmissibleDelta { delta: f64, reason: String },
}

/// The four data profiles and the space-time box they live on.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryData {
    /// Inlet area `S0(t)`.
    pub s0: Profile,
    /// Initial area `S1(x)`.
    pub s1: Profile,
    /// Inlet velocity.
    pub v_in: Profile,
    /// Take-up velocity.
    pub v_l: Profile,
    pub length: f64,
    pub horizon: f64,
}

/// Sampled extrema of the data: `v_m, V_M, S_m, S_M`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataBounds {
    pub v_min: f64,
    pub v_max: f64,
    pub area_min: f64,
    pub area_max: f64,
}

/// Uniform space grid on `[0, L]` with a fixed time step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Grid {
    pub cells: usize,
    pub length: f64,
    pub dt: f64,
}

impl Grid {
    pub fn new(cells: usize, length: f64, dt: f64) -> Result<Self, DataError> {
        if cells < 8 {
            return Err(DataError::InvalidGeometry(format!(
                "grid needs at least 8 cells, got {cells}"
            )));
        }
        if !(length.is_finite() && length > 0.0) {
            return Err(DataError::InvalidGeometry("length must be positive".into()));
        }
        if !(dt.is_finite() && dt > 0.0) {
            return Err(DataError::InvalidGeometry("time step must be positive".into()));
        }
        Ok(Grid { cells, length, dt })
    }

    /// Grid whose time step puts the fastest characteristic at Courant number `cfl`.
    pub fn with_cfl(cells: usize, length: f64, v_max: f64, cfl: f64) -> Result<Self, DataError> {
        let dx = length / cells as f64;
        Grid::new(cells, length, cfl * dx / v_max)
    }

    pub fn dx(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        if i == self.cells {
            self.length
        } else {
            i as f64 * self.dx()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.cells).map(|i| self.node(i)).collect()
    }

    pub fn sample(&self, profile: &Profile) -> Vec<f64> {
        let mut v = sample(|x| profile.value(x), self.length, self.cells);
        v[self.cells] = profile.value(self.length);
        v
    }
}

/// One time slice of the solution.
#[derive(Clone, Debug, PartialEq)]
pub struct FiberState {
    pub t: f64,
    pub area: Vec<f64>,
    pub flow: VelocitySlice,
}

impl FiberState {
    pub fn velocity(&self) -> &[f64] {
        &self.flow.v
    }

    /// Draw force `Q(t) = A dv/dx`.
    pub fn force(&self) -> f64 {
        self.flow.q
    }
}

/// Which value the forcing ramp on `[0, delta)` interpolates towards.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RampMode {
    /// Interpolate towards the running force `Q(t)`: the future value
    /// `Q(delta)` is unknown while marching forward.
    TimeMarch,
    /// Interpolate towards a stored `Q(delta)` from the previous iterate.
    Picard { q_at_delta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizationPlan {
    pub delta: f64,
    /// Compatibility force `Q^{0,0}`.
    pub q00: f64,
    pub mode: RampMode,
}

impl RegularizationPlan {
    pub fn time_march(delta: f64, q00: f64) -> Self {
        RegularizationPlan {
            delta,
            q00,
            mode: RampMode::TimeMarch,
        }
    }

    pub fn picard(delta: f64, q00: f64, q_at_delta: f64) -> Self {
        RegularizationPlan {
            delta,
            q00,
            mode: RampMode::Picard { q_at_delta },
        }
    }

    /// `delta < min(1, t0)` and `S_m / 12 - delta |Q00| > 0`.
    pub fn check_admissible(&self, area_min: f64, t0: f64) -> Result<(), DataError> {
        let bad = |reason: String| DataError::InadmissibleDelta {
            delta: self.delta,
            reason,
        };
        if !(self.delta.is_finite() && self.delta > 0.0) {
            return Err(bad("must be positive".into()));
        }
        if self.delta >= 1.0_f64.min(t0) {
            return Err(bad(format!("must be below min(1, t0) with t0 = {t0}")));
        }
        let slack = area_min / 12.0 - self.delta * self.q00.abs();
        if slack <= 0.0 {
            return Err(bad(format!(
                "S_m/12 - delta |Q00| = {slack} is not positive"
            )));
        }
        Ok(())
    }
}

/// Short-time horizon for the fixed-point construction.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ShortTimeBudget {
    pub radius: f64,
    pub alpha: f64,
    pub beta: f64,
    pub t_star: f64,
}

/// Validated data together with the derived constants every solver needs.
#[derive(Clone, Debug, PartialEq)]
pub struct Problem {
    pub data: BoundaryData,
    pub bounds: DataBounds,
    pub q00: f64,
    pub budget: ShortTimeBudget,
    /// `sup |S0'|` over the sampled horizon.
    pub inlet_rate_max: f64,
    /// Extremes of `d log S1 / dx` over the sampled length.
    pub initial_log_slope: (f64, f64),
}

impl Problem {
    /// Validates `data` at [`OVERSAMPLING`] times the resolution of a
    /// `cells`-cell solver grid and evaluates the derived constants.
    pub fn new(data: BoundaryData, cells: usize) -> Result<Self, DataError> {
        let samples = OVERSAMPLING * cells.max(1);
        let bounds = validate_data(&data, samples)?;
        let q00 = compute_q00(&data);
        let radius = compute_radius(&data, samples);
        let budget = compute_tstar(radius, q00, &bounds, data.length, data.horizon);
        let inlet_rate_max = (0..=samples)
            .map(|j| data.s0.derivative(data.horizon * j as f64 / samples as f64).abs())
            .fold(0.0, f64::max);
        let initial_log_slope = (0..=samples)
            .map(|j| {
                let x = data.length * j as f64 / samples as f64;
                data.s1.derivative(x) / data.s1.value(x)
            })
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), y| (lo.min(y), hi.max(y)));
        Ok(Problem {
            data,
            bounds,
            q00,
            budget,
            inlet_rate_max,
            initial_log_slope,
        })
    }

    /// Default fixed-point horizon `t0 = t* / 2`.
    pub fn picard_horizon(&self) -> f64 {
        0.5 * self.budget.t_star
    }

    /// Largest admissible ramp width for the default horizon.
    pub fn auto_delta(&self) -> f64 {
        max_delta(self.q00, self.bounds.area_min, self.picard_horizon())
    }

    pub fn time_march_plan(&self, delta: f64) -> RegularizationPlan {
        RegularizationPlan::time_march(delta, self.q00)
    }

    /// Right-hand side of the time-derivative bound on members of the
    /// fixed-point set.
    pub fn time_derivative_cap(&self) -> f64 {
        let (l, t) = (self.data.length, self.data.horizon);
        self.budget.radius * self.bounds.v_max * (2.0 + 1.0 / l + t.sqrt() / l.powf(1.5))
            + self.q00.abs() * (t.sqrt() + l.sqrt())
    }
}

/// Validates the data on an `samples`-interval sampling of each domain and
/// returns the sampled extrema.
pub fn validate_data(data: &BoundaryData, samples: usize) -> Result<DataBounds, DataError> {
    if !(data.length.is_finite() && data.length > 0.0) {
        return Err(DataError::InvalidGeometry("length must be positive".into()));
    }
    if !(data.horizon.is_finite() && data.horizon > 0.0) {
        return Err(DataError::InvalidGeometry("horizon must be positive".into()));
    }
    let samples = samples.max(1);
    let profiles: [(&'static str, &Profile); 4] = [
        ("s0", &data.s0),
        ("s1", &data.s1),
        ("v_in", &data.v_in),
        ("v_l", &data.v_l),
    ];
    for (name, p) in profiles {
        p.check_parameters()
            .map_err(|reason| DataError::InvalidProfile {
                profile: name,
                reason,
            })?;
    }

    let dt = data.horizon / samples as f64;
    let dx = data.length / samples as f64;
    let mut bounds = DataBounds {
        v_min: f64::INFINITY,
        v_max: f64::NEG_INFINITY,
        area_min: f64::INFINITY,
        area_max: f64::NEG_INFINITY,
    };

    for j in 0..=samples {
        let t = if j == samples { data.horizon } else { j as f64 * dt };
        let s0 = data.s0.value(t);
        let v_in = data.v_in.value(t);
        let v_l = data.v_l.value(t);
        for (name, p, value) in [("s0", &data.s0, s0), ("v_in", &data.v_in, v_in), ("v_l", &data.v_l, v_l)] {
            if !value.is_finite() || !p.derivative(t).is_finite() {
                return Err(DataError::RegularityViolation { profile: name, at: t });
            }
        }
        if s0 <= 0.0 {
            return Err(DataError::PositivityViolation {
                profile: "s0",
                at: t,
                value: s0,
            });
        }
        if v_in <= 0.0 {
            return Err(DataError::PositivityViolation {
                profile: "v_in",
                at: t,
                value: v_in,
            });
        }
        if v_in >= v_l {
            return Err(DataError::OrderingViolation { t, v_in, v_l });
        }
        bounds.v_min = bounds.v_min.min(v_in);
        bounds.v_max = bounds.v_max.max(v_l);
        bounds.area_min = bounds.area_min.min(s0);
        bounds.area_max = bounds.area_max.max(s0);
    }

    for j in 0..=samples {
        let x = if j == samples { data.length } else { j as f64 * dx };
        let s1 = data.s1.value(x);
        if !s1.is_finite() || !data.s1.derivative(x).is_finite() {
            return Err(DataError::RegularityViolation { profile: "s1", at: x });
        }
        if s1 <= 0.0 {
            return Err(DataError::PositivityViolation {
                profile: "s1",
                at: x,
                value: s1,
            });
        }
        bounds.area_min = bounds.area_min.min(s1);
        bounds.area_max = bounds.area_max.max(s1);
    }

    let (s0, s1) = (data.s0.value(0.0), data.s1.value(0.0));
    if (s0 - s1).abs() > COMPATIBILITY_TOL * s0.abs().max(1.0) {
        return Err(DataError::CompatibilityViolation { s0, s1 });
    }
    Ok(bounds)
}

/// `Q^{0,0} = -S0'(0) - v_in(0) S1'(0)`.
pub fn compute_q00(data: &BoundaryData) -> f64 {
    0.0 - data.s0.derivative(0.0) - data.v_in.value(0.0) * data.s1.derivative(0.0)
}

/// Energy radius `R`, from trapezoid quadrature on `samples` intervals:
/// `R^2 / 8 = int_0^L (S1^2 + S1'^2) dx + int_0^T v_in (S0^2 + 2 S0'^2 / v_in^2) dt`.
pub fn compute_radius(data: &BoundaryData, samples: usize) -> f64 {
    let space = sample(
        |x| {
            let s = data.s1.value(x);
            let ds = data.s1.derivative(x);
            s * s + ds * ds
        },
        data.length,
        samples,
    );
    let time = sample(
        |t| {
            let v = data.v_in.value(t);
            let s = data.s0.value(t);
            let ds = data.s0.derivative(t);
            v * (s * s + 2.0 * ds * ds / (v * v))
        },
        data.horizon,
        samples,
    );
    let eighth = trapezoid(&space, data.length / samples as f64)
        + trapezoid(&time, data.horizon / samples as f64);
    (8.0 * eighth).sqrt()
}

pub fn compute_tstar(
    radius: f64,
    q00: f64,
    bounds: &DataBounds,
    length: f64,
    horizon: f64,
) -> ShortTimeBudget {
    let q = q00.abs();
    let DataBounds {
        v_min,
        v_max,
        area_min,
        area_max,
    } = *bounds;
    let alpha = 4.0 * q * q / v_min + 4.0 * area_max * length * q;
    let beta = 4.0 * v_max * v_max * radius * radius / (v_min * length.powi(3))
        + 4.0 * area_max * area_max * v_max
        + 4.0 * area_max * v_max * radius / length.sqrt();
    let positivity_cap = area_min * length.powf(1.5) / (4.0 * radius * v_max);
    let energy_cap = radius * radius / (8.0 * (alpha + beta));
    ShortTimeBudget {
        radius,
        alpha,
        beta,
        t_star: horizon.min(positivity_cap).min(energy_cap),
    }
}

/// `0.9 * min(1, t0, S_m / (12 |Q00|))`.
pub fn max_delta(q00: f64, area_min: f64, t0: f64) -> f64 {
    let mut cap = 1.0_f64.min(t0);
    if q00 != 0.0 {
        cap = cap.min(area_min / (12.0 * q00.abs()));
    }
    DELTA_SAFETY * cap
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn constant_data(s: f64, v_in: f64, v_l: f64) -> BoundaryData {
        BoundaryData {
            s0: Profile::constant(s),
            s1: Profile::constant(s),
            v_in: Profile::constant(v_in),
            v_l: Profile::constant(v_l),
            length: 1.0,
            horizon: 1.0,
        }
    }

    #[test]
    fn constant_profiles_give_their_values() {
        let b = validate_data(&constant_data(1.0, 1.0, 2.0), 40).unwrap();
        assert_eq!(
            b,
            DataBounds {
                v_min: 1.0,
                v_max: 2.0,
                area_min: 1.0,
                area_max: 1.0
            }
        );
    }

    #[test]
    fn reversed_velocities_are_rejected() {
        let err = validate_data(&constant_data(1.0, 2.0, 1.0), 40).unwrap_err();
        assert!(matches!(err, DataError::OrderingViolation { .. }));
    }

    #[test]
    fn corner_mismatch_is_rejected() {
        let mut d = constant_data(1.0, 1.0, 2.0);
        d.s1 = Profile::linear(2.0, -0.5);
        let err = validate_data(&d, 40).unwrap_err();
        assert_eq!(err, DataError::CompatibilityViolation { s0: 1.0, s1: 2.0 });
    }

    #[test]
    fn nonpositive_area_is_rejected() {
        let mut d = constant_data(1.0, 1.0, 2.0);
        d.s1 = Profile::linear(1.0, -1.5);
        let err = validate_data(&d, 40).unwrap_err();
        assert!(matches!(
            err,
            DataError::PositivityViolation { profile: "s1", .. }
        ));
    }

    #[test]
    fn sampled_extrema_of_sinusoid() {
        let mut d = constant_data(1.0, 1.0, 2.0);
        d.s0 = Profile::sinusoid(1.0, 0.05, 1.0);
        let b = validate_data(&d, 400).unwrap();
        assert_relative_eq!(b.area_max, 1.05, epsilon = 1e-12);
        assert_relative_eq!(b.area_min, 0.95, epsilon = 1e-12);
    }

    #[test]
    fn q00_examples() {
        let mut d = constant_data(1.0, 1.0, 3.0);
        assert_eq!(compute_q00(&d), 0.0);

        d.s0 = Profile::linear(1.0, 0.1);
        d.s1 = Profile::linear(1.0, -0.3);
        d.v_in = Profile::constant(2.0);
        assert_relative_eq!(compute_q00(&d), 0.5, epsilon = 1e-15);

        d.s0 = Profile::linear(1.0, -0.2);
        d.s1 = Profile::linear(1.0, 0.2);
        d.v_in = Profile::constant(1.0);
        assert_relative_eq!(compute_q00(&d), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn radius_of_unit_constant_data() {
        assert_relative_eq!(compute_radius(&constant_data(1.0, 1.0, 2.0), 64), 4.0, epsilon = 1e-14);
    }

    #[test]
    fn radius_closed_form_for_constants() {
        let (sm, vm) = (0.7, 1.3);
        let mut d = constant_data(sm, vm, 2.0 * vm);
        d.length = 2.5;
        d.horizon = 0.4;
        let expected = (8.0 * sm * sm * (d.length + vm * d.horizon)).sqrt();
        assert_relative_eq!(compute_radius(&d, 64), expected, epsilon = 1e-13);
        let doubled = constant_data(2.0 * sm, vm, 2.0 * vm);
        let single = constant_data(sm, vm, 2.0 * vm);
        assert_relative_eq!(
            compute_radius(&doubled, 16),
            2.0 * compute_radius(&single, 16),
            epsilon = 1e-14
        );
    }

    #[test]
    fn tstar_for_unit_constant_data() {
        let bounds = DataBounds {
            v_min: 1.0,
            v_max: 2.0,
            area_min: 1.0,
            area_max: 1.0,
        };
        let b = compute_tstar(4.0, 0.0, &bounds, 1.0, 1.0);
        assert_eq!(b.alpha, 0.0);
        assert_relative_eq!(b.beta, 296.0, epsilon = 1e-12);
        assert_relative_eq!(b.t_star, 16.0 / 2368.0, epsilon = 1e-15);
        assert_relative_eq!(b.t_star, 0.006757, epsilon = 1e-6);

        let wide = compute_tstar(8.0, 0.0, &bounds, 1.0, 1.0);
        // beta = 4*4*64 + 4*2 + 4*2*8 = 1096; energy cap 64 / 8768 is below 1/64
        assert_relative_eq!(wide.beta, 1096.0, epsilon = 1e-12);
        assert_relative_eq!(wide.t_star, 64.0 / 8768.0, epsilon = 1e-15);
    }

    #[test]
    fn max_delta_examples() {
        assert_relative_eq!(max_delta(0.5, 1.0, 1.0), 0.15, epsilon = 1e-15);
        assert_relative_eq!(max_delta(0.0, 1.0, 0.5), 0.45, epsilon = 1e-15);
        assert_relative_eq!(max_delta(10.0, 0.12, 1.0), 0.0009, epsilon = 1e-15);
    }

    #[test]
    fn plan_admissibility() {
        let plan = RegularizationPlan::time_march(max_delta(10.0, 0.12, 1.0), 10.0);
        plan.check_admissible(0.12, 1.0).unwrap();
        let too_wide = RegularizationPlan::time_march(0.02, 10.0);
        assert!(too_wide.check_admissible(0.12, 1.0).is_err());
        let late = RegularizationPlan::time_march(0.6, 0.0);
        assert!(late.check_admissible(1.0, 0.5).is_err());
    }

    #[test]
    fn grid_nodes() {
        let g = Grid::new(10, 2.0, 0.01).unwrap();
        let x = g.nodes();
        assert_eq!(x[0], 0.0);
        assert_eq!(x[10], 2.0);
        assert!(x.windows(2).all(|w| w[0] < w[1]));
        assert!(Grid::new(4, 1.0, 0.1).is_err());
    }
}
