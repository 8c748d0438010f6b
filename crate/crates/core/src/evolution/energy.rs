//! Discrete version of the mixed space-time energy
//! `E(h)^2 = sup_t ||h(t)||_{H^1}^2 + v_m sup_x ||h_x(., x)||_{L^2(0,t0)}^2`.

use crate::quadrature::{derivative, trapezoid};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergySummary {
    /// `E(h)`.
    pub energy: f64,
    /// `sup_t ||h_t(t)||_{L^2(0,L)} + sup_x ||h_t(., x)||_{L^2(0,t0)}`.
    pub time_derivative_norm: f64,
}

fn h1_squared(slice: &[f64], dx: f64) -> f64 {
    let d = derivative(slice, dx);
    let integrand: Vec<f64> = slice.iter().zip(&d).map(|(h, g)| h * h + g * g).collect();
    trapezoid(&integrand, dx)
}

/// Energy of a field stored as time slices `h[n][i]` on a uniform lattice.
pub fn energy_norm(h: &[Vec<f64>], dx: f64, dt: f64, v_min: f64) -> EnergySummary {
    let steps = h.len();
    let nodes = h[0].len();
    let space_part = h.iter().map(|s| h1_squared(s, dx)).fold(0.0, f64::max);

    let slopes: Vec<Vec<f64>> = h.iter().map(|s| derivative(s, dx)).collect();
    let mut column = vec![0.0; steps];
    let mut time_part = 0.0_f64;
    let mut column_dt_norm = 0.0_f64;
    let mut dh_dt = vec![vec![0.0; nodes]; steps];
    for i in 0..nodes {
        for (n, c) in column.iter_mut().enumerate() {
            *c = slopes[n][i] * slopes[n][i];
        }
        time_part = time_part.max(trapezoid(&column, dt));
        if steps >= 3 {
            let series: Vec<f64> = h.iter().map(|s| s[i]).collect();
            let d = derivative(&series, dt);
            let sq: Vec<f64> = d.iter().map(|x| x * x).collect();
            column_dt_norm = column_dt_norm.max(trapezoid(&sq, dt).sqrt());
            for (n, row) in dh_dt.iter_mut().enumerate() {
                row[i] = d[n];
            }
        }
    }
    let slice_dt_norm = dh_dt
        .iter()
        .map(|row| {
            let sq: Vec<f64> = row.iter().map(|x| x * x).collect();
            trapezoid(&sq, dx).sqrt()
        })
        .fold(0.0, f64::max);

    EnergySummary {
        energy: (space_part + v_min * time_part).sqrt(),
        time_derivative_norm: slice_dt_norm + column_dt_norm,
    }
}

/// Running energy of a trajectory, updated one slice at a time.
#[derive(Clone, Debug)]
pub struct EnergyAccumulator {
    dx: f64,
    v_min: f64,
    space_part: f64,
    column_integrals: Vec<f64>,
    last_slope_sq: Option<Vec<f64>>,
}

impl EnergyAccumulator {
    pub fn new(dx: f64, v_min: f64) -> Self {
        EnergyAccumulator {
            dx,
            v_min,
            space_part: 0.0,
            column_integrals: Vec::new(),
            last_slope_sq: None,
        }
    }

    /// Adds the slice reached after a step of length `dt` (ignored for the first slice).
    pub fn push(&mut self, slice: &[f64], dt: f64) -> f64 {
        self.space_part = self.space_part.max(h1_squared(slice, self.dx));
        let sq: Vec<f64> = derivative(slice, self.dx).iter().map(|g| g * g).collect();
        match &self.last_slope_sq {
            Some(prev) => {
                for ((acc, a), b) in self.column_integrals.iter_mut().zip(prev).zip(&sq) {
                    *acc += 0.5 * dt * (a + b);
                }
            }
            None => self.column_integrals = vec![0.0; sq.len()],
        }
        self.last_slope_sq = Some(sq);
        self.energy()
    }

    pub fn energy(&self) -> f64 {
        let column = self.column_integrals.iter().cloned().fold(0.0, f64::max);
        (self.space_part + self.v_min * column).sqrt()
    }
}
