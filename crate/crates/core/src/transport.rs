//! Linear inflow transport `u_t + v u_x = -f(t)` with `v > 0`, solved by
//! backward characteristic tracing and linear interpolation.
//!
//! Linear interpolation is a convex combination of neighbouring values, so
//! one step is monotone in both the previous slice and the inflow data. All
//! comparison arguments downstream rely on that.

use crate::model::{RampMode, RegularizationPlan};
use crate::quadrature::interpolate;

/// How the foot of a characteristic is located.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceScheme {
    /// `x* = x_i - v_i dt`.
    Frozen,
    /// Two-stage trace through the velocity at the half-step point.
    #[default]
    Midpoint,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SliceUpdate {
    pub values: Vec<f64>,
    /// `max_i v_i dt / dx`; above one is worth a warning (accuracy only).
    pub max_courant: f64,
}

impl SliceUpdate {
    pub fn cfl_warning(&self) -> bool {
        self.max_courant > 1.0
    }
}

/// Pointwise forcing on the regularization layer.
pub fn ramp_forcing(plan: &RegularizationPlan, t: f64, q_current: f64) -> f64 {
    if t >= plan.delta {
        return q_current;
    }
    let q_ref = match plan.mode {
        RampMode::TimeMarch => q_current,
        RampMode::Picard { q_at_delta } => q_at_delta,
    };
    plan.q00 + (q_ref - plan.q00) * t / plan.delta
}

/// Exact integral of the forcing over `[t, t + dt]` with `q_current` held
/// fixed during the step. The ramp part is linear, so its integral is the
/// trapezoid of the endpoint values.
pub fn ramp_step_integral(plan: &RegularizationPlan, t: f64, dt: f64, q_current: f64) -> f64 {
    let end = t + dt;
    let mut total = 0.0;
    if t < plan.delta {
        let b = end.min(plan.delta);
        let fa = ramp_forcing(plan, t, q_current);
        let fb = match plan.mode {
            RampMode::TimeMarch => plan.q00 + (q_current - plan.q00) * b / plan.delta,
            RampMode::Picard { q_at_delta } => plan.q00 + (q_at_delta - plan.q00) * b / plan.delta,
        };
        total += 0.5 * (fa + fb) * (b - t);
    }
    let a = t.max(plan.delta);
    if end > a {
        total += q_current * (end - a);
    }
    total
}

/// Inlet slope `G = u_x(t, 0) = -(S0'(t) + Q) / v_in(t)`.
pub fn boundary_slope(ds0_dt: f64, v_in: f64, q_ramp: f64) -> f64 {
    -(ds0_dt + q_ramp) / v_in
}

/// Advances `u` from `t` to `t + dt`.
///
/// Nodes whose characteristic stays inside the domain take the interpolated
/// value at the foot point minus `forcing * dt`. Nodes whose characteristic
/// entered through `x = 0` during the step take the inflow value at the
/// crossing time minus the forcing accumulated since then.
pub fn advance_slice(
    u: &[f64],
    v: &[f64],
    forcing: f64,
    dx: f64,
    dt: f64,
    t: f64,
    inflow: impl Fn(f64) -> f64,
    trace: TraceScheme,
) -> SliceUpdate {
    debug_assert_eq!(u.len(), v.len());
    let n = u.len() - 1;
    let mut values = vec![0.0; n + 1];
    let mut max_courant = 0.0_f64;
    values[0] = inflow(t + dt);
    for i in 1..=n {
        let x = i as f64 * dx;
        let speed = match trace {
            TraceScheme::Frozen => v[i],
            TraceScheme::Midpoint => {
                let half = x - 0.5 * dt * v[i];
                if half > 0.0 {
                    interpolate(v, dx, half)
                } else {
                    v[i]
                }
            }
        };
        max_courant = max_courant.max(v[i] * dt / dx);
        let foot = x - speed * dt;
        values[i] = if foot >= 0.0 {
            interpolate(u, dx, foot) - forcing * dt
        } else {
            let since_entry = x / speed;
            inflow(t + dt - since_entry) - forcing * since_entry
        };
    }
    SliceUpdate {
        values,
        max_courant,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::{derivative, sample};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    #[test]
    fn ramp_examples() {
        let plan = RegularizationPlan::time_march(0.1, 0.5);
        assert_eq!(ramp_forcing(&plan, 0.0, 3.0), 0.5);
        assert_eq!(ramp_forcing(&plan, 0.1, 3.0), 3.0);
        assert_eq!(ramp_forcing(&plan, 0.7, 3.0), 3.0);
        let frozen = RegularizationPlan::picard(0.1, 0.5, 1.0);
        assert_relative_eq!(ramp_forcing(&frozen, 0.05, 9.0), 0.75, epsilon = 1e-15);
        assert_relative_eq!(ramp_forcing(&plan, 0.05, 1.0), 0.75, epsilon = 1e-15);
    }

    #[test]
    fn step_integral_matches_fine_quadrature() {
        for plan in [
            RegularizationPlan::time_march(0.1, -0.4),
            RegularizationPlan::picard(0.1, 0.5, 1.3),
        ] {
            for (t, dt) in [(0.0, 0.03), (0.08, 0.05), (0.0, 0.25), (0.2, 0.01)] {
                let q = 1.7;
                let m = 20000;
                let h = dt / m as f64;
                let fine: f64 = (0..m)
                    .map(|k| ramp_forcing(&plan, t + (k as f64 + 0.5) * h, q) * h)
                    .sum();
                assert_relative_eq!(ramp_step_integral(&plan, t, dt, q), fine, epsilon = 1e-7);
            }
        }
    }

    #[test]
    fn boundary_slope_examples() {
        assert_eq!(boundary_slope(0.0, 1.0, 0.0), 0.0);
        assert_eq!(boundary_slope(0.0, 1.0, 1.0), -1.0);
        assert_eq!(boundary_slope(-0.5, 2.0, 0.5), 0.0);
        let g = boundary_slope(0.3, 1.5, -0.9);
        assert!(g.abs() <= (0.3f64.abs() + 0.9) / 1.5);
    }

    #[test]
    fn pure_advection_of_linear_profile_is_exact() {
        let n = 20;
        let dx = 1.0 / n as f64;
        let dt = 0.013;
        let s1 = |x: f64| 2.0 - 0.5 * x;
        let s0 = |t: f64| 2.0 + 0.5 * t;
        let u = sample(s1, 1.0, n);
        let v = vec![1.0; n + 1];
        let out = advance_slice(&u, &v, 0.0, dx, dt, 0.0, s0, TraceScheme::Frozen);
        for i in 1..=n {
            let x = i as f64 * dx;
            let exact = if x >= dt { s1(x - dt) } else { s0(dt - x) };
            assert_relative_eq!(out.values[i], exact, epsilon = 1e-13);
        }
        assert_eq!(out.values[0], s0(dt));

        let q = 0.7;
        let forced = advance_slice(&u, &v, q, dx, dt, 0.0, s0, TraceScheme::Frozen);
        for i in 1..=n {
            let x = i as f64 * dx;
            let exact = if x >= dt {
                s1(x - dt) - q * dt
            } else {
                s0(dt - x) - q * x
            };
            assert_relative_eq!(forced.values[i], exact, epsilon = 1e-13);
        }
    }

    #[test]
    fn constants_are_reproduced() {
        let u = vec![1.5; 17];
        let v = sample(|x| 1.0 + 3.0 * x, 1.0, 16);
        let out = advance_slice(&u, &v, 0.0, 1.0 / 16.0, 0.2, 0.0, |_| 1.5, TraceScheme::Frozen);
        assert!(out.values.iter().all(|&x| x == 1.5));
        assert!(out.cfl_warning());
    }

    #[test]
    fn slope_field_follows_companion_equation() {
        // u_t + v u_x = -q  implies  S = u_x solves S_t + v S_x = -v_x S.
        let run = |n: usize| {
            let dx = 1.0 / n as f64;
            let dt = 0.5 * dx / 2.0;
            let v = sample(|x| 1.0 + x, 1.0, n);
            let dv = vec![1.0_f64; n + 1];
            let q = 0.3;
            let s0 = |t: f64| 1.0 + 0.1 * (3.0 * t).sin();
            let ds0 = |t: f64| 0.3 * (3.0 * t).cos();
            let mut u = sample(|x| 1.0 + 0.2 * (2.0 * x).sin(), 1.0, n);
            let mut slope = sample(|x| 0.4 * (2.0 * x).cos(), 1.0, n);
            let steps = (0.25 / dt).round() as usize;
            for k in 0..steps {
                let t = k as f64 * dt;
                u = advance_slice(&u, &v, q, dx, dt, t, s0, TraceScheme::Frozen).values;
                // advance S with reaction -v_x S along the characteristic
                let inlet = |tau: f64| boundary_slope(ds0(tau), 1.0, q);
                let mut next = advance_slice(&slope, &v, 0.0, dx, dt, t, inlet, TraceScheme::Frozen).values;
                for (s, d) in next.iter_mut().zip(&dv) {
                    *s *= (-d * dt).exp();
                }
                slope = next;
            }
            let du = derivative(&u, dx);
            crate::quadrature::sup_distance(&du[2..n - 1], &slope[2..n - 1])
        };
        let coarse = run(50);
        let fine = run(100);
        assert!(coarse < 0.05, "coarse mismatch {coarse}");
        assert!(fine < 0.8 * coarse, "{fine} vs {coarse}");
    }

    proptest! {
        #[test]
        fn one_step_preserves_order(
            base in prop::collection::vec(0.5f64..2.0, 17),
            gap in prop::collection::vec(0.0f64..0.5, 17),
            speeds in prop::collection::vec(0.1f64..4.0, 17),
            dt in 1e-3f64..0.3,
            f in -2.0f64..2.0,
            lift in 0.0f64..0.3,
        ) {
            let dx = 1.0 / 16.0;
            let upper: Vec<f64> = base.iter().zip(&gap).map(|(b, g)| b + g).collect();
            let low = advance_slice(&base, &speeds, f, dx, dt, 0.0, |t| 1.0 + t, TraceScheme::Frozen);
            let high = advance_slice(&upper, &speeds, f, dx, dt, 0.0, |t| 1.0 + t + lift, TraceScheme::Frozen);
            for (a, b) in low.values.iter().zip(&high.values) {
                prop_assert!(a <= b);
            }
        }
    }
}
