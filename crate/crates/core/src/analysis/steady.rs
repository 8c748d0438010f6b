//! Closed-form stationary states.
//!
//! With constant data the stationary system `(vA)_x = 0`, `(A v_x)_x = 0`
//! forces `v'/v` to be constant, so both fields are exponentials:
//! `v = v_in D^{x/L}`, `A = A0 D^{-x/L}`, flux `F = v_in A0` and force
//! `chi = F ln D / L`.

use crate::model::{BoundaryData, Grid};
use crate::profile::Profile;

#[derive(Clone, Debug, PartialEq)]
pub struct SteadyProfile {
    pub draw_ratio: f64,
    pub v: Vec<f64>,
    pub area: Vec<f64>,
    /// `v A`, the same at every node.
    pub flux: f64,
    /// `A dv/dx`, the same at every node.
    pub chi: f64,
}

pub fn steady_profile(draw_ratio: f64, v_in: f64, a0: f64, grid: &Grid) -> SteadyProfile {
    assert!(draw_ratio > 1.0 && v_in > 0.0 && a0 > 0.0);
    let rate = draw_ratio.ln() / grid.length;
    let nodes = grid.nodes();
    SteadyProfile {
        draw_ratio,
        v: nodes.iter().map(|x| v_in * (rate * x).exp()).collect(),
        area: nodes.iter().map(|x| a0 * (-rate * x).exp()).collect(),
        flux: v_in * a0,
        chi: v_in * a0 * rate,
    }
}

/// Constant boundary data whose stationary state is the exponential profile,
/// started from that profile.
pub fn steady_data(draw_ratio: f64, v_in: f64, a0: f64, length: f64, horizon: f64) -> BoundaryData {
    BoundaryData {
        s0: Profile::constant(a0),
        s1: Profile::exponential(a0, -draw_ratio.ln() / length),
        v_in: Profile::constant(v_in),
        v_l: Profile::constant(draw_ratio * v_in),
        length,
        horizon,
    }
}

/// `L / mean(v_in)` with the mean taken over the horizon.
pub fn residence_time(data: &BoundaryData) -> f64 {
    let n = 1024;
    let h = data.horizon / n as f64;
    let samples: Vec<f64> = (0..=n).map(|j| data.v_in.value(j as f64 * h)).collect();
    let mean = crate::quadrature::trapezoid(&samples, h) / data.horizon;
    data.length / mean
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::derivative;
    use approx::assert_relative_eq;

    #[test]
    fn draw_ratio_two() {
        let grid = Grid::new(50, 1.0, 0.01).unwrap();
        let s = steady_profile(2.0, 1.0, 1.0, &grid);
        assert_relative_eq!(s.chi, std::f64::consts::LN_2, epsilon = 1e-15);
        for (i, x) in grid.nodes().into_iter().enumerate() {
            assert_relative_eq!(s.v[i], 2f64.powf(x), epsilon = 1e-14);
            assert_relative_eq!(s.area[i], 2f64.powf(-x), epsilon = 1e-14);
            assert_relative_eq!(s.v[i] * s.area[i], s.flux, epsilon = 1e-14);
        }
    }

    #[test]
    fn no_stretching_limit() {
        let grid = Grid::new(20, 1.0, 0.01).unwrap();
        let s = steady_profile(1.0 + 1e-9, 1.5, 0.7, &grid);
        assert!(s.chi < 2e-9);
        assert!(s.v.iter().all(|v| (v - 1.5).abs() < 1e-8));
        assert!(s.area.iter().all(|a| (a - 0.7).abs() < 1e-8));
    }

    #[test]
    fn discrete_force_residual_is_second_order() {
        let residual = |n: usize| {
            let grid = Grid::new(n, 1.0, 0.01).unwrap();
            let s = steady_profile(5.0, 1.0, 1.0, &grid);
            let dv = derivative(&s.v, grid.dx());
            (1..n)
                .map(|i| (s.area[i] * dv[i] - s.chi).abs())
                .fold(0.0, f64::max)
        };
        let (a, b) = (residual(50), residual(100));
        assert!(a > 0.0);
        assert_relative_eq!(a / b, 4.0, epsilon = 0.05);
    }

    #[test]
    fn data_are_compatible_and_stationary() {
        let data = steady_data(3.0, 1.0, 2.0, 2.0, 5.0);
        assert_eq!(data.s0.value(0.0), data.s1.value(0.0));
        let q00 = crate::model::compute_q00(&data);
        assert_relative_eq!(q00, 2.0 * 3f64.ln() / 2.0, epsilon = 1e-14);
        assert_relative_eq!(residence_time(&data), 2.0, epsilon = 1e-14);
    }
}
