//! Velocity recovery from an area slice.
//!
//! With constant viscosity and no surface tension the momentum balance says
//! `A dv/dx` is constant in space, so the velocity is the normalized running
//! integral of `1/A` between the two prescribed end speeds.

use thiserror::Error;

use crate::quadrature::{cumulative_trapezoid, trapezoid};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VelocityError {
    #[error("area is not positive at node {index} (value {value})")]
    NonpositiveArea { index: usize, value: f64 },
}

#[derive(Clone, Debug, PartialEq)]
pub struct VelocitySlice {
    pub v: Vec<f64>,
    pub dv_dx: Vec<f64>,
    /// Draw force, the spatially constant value of `A dv/dx`.
    pub q: f64,
    /// Cumulative `int_0^{x_i} dxi / A`.
    pub recip_integral: Vec<f64>,
}

fn check_positive(area: &[f64]) -> Result<(), VelocityError> {
    match area.iter().position(|&a| !(a > 0.0)) {
        Some(index) => Err(VelocityError::NonpositiveArea {
            index,
            value: area[index],
        }),
        None => Ok(()),
    }
}

pub fn reciprocal_integral(area: &[f64], dx: f64) -> Result<Vec<f64>, VelocityError> {
    check_positive(area)?;
    let recip: Vec<f64> = area.iter().map(|a| 1.0 / a).collect();
    Ok(cumulative_trapezoid(&recip, dx))
}

fn force_from_integral(total: f64, v_in: f64, v_l: f64) -> f64 {
    (v_l - v_in) / total
}

/// `Q = (v_L - v_in) / int_0^L dx / A`.
pub fn compute_q(area: &[f64], dx: f64, v_in: f64, v_l: f64) -> Result<f64, VelocityError> {
    let integral = reciprocal_integral(area, dx)?;
    let q = force_from_integral(integral[integral.len() - 1], v_in, v_l);
    debug_assert!(
        q <= (v_l - v_in) * trapezoid(area, dx) / (dx * (area.len() - 1) as f64).powi(2)
            * (1.0 + 1e-12),
        "discrete Jensen bound violated"
    );
    Ok(q)
}

pub fn compute_velocity(
    area: &[f64],
    dx: f64,
    v_in: f64,
    v_l: f64,
) -> Result<VelocitySlice, VelocityError> {
    let recip_integral = reciprocal_integral(area, dx)?;
    let n = area.len() - 1;
    let q = force_from_integral(recip_integral[n], v_in, v_l);
    let mut v: Vec<f64> = recip_integral.iter().map(|i| v_in + q * i).collect();
    v[0] = v_in;
    v[n] = v_l;
    let dv_dx = area.iter().map(|a| q / a).collect();
    Ok(VelocitySlice {
        v,
        dv_dx,
        q,
        recip_integral,
    })
}
