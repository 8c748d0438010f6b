//! Sensitivity of the regularized solution to the ramp width.

use rayon::prelude::*;
use serde::Serialize;

use crate::evolution::{run, EvolutionError, RunOptions};
use crate::model::{Grid, Problem};

/// Distance between the runs for two consecutive ramp widths.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepPair {
    pub delta_a: f64,
    pub delta_b: f64,
    /// `sup_{t,x} |A_a - A_b|`.
    pub distance: f64,
    /// Supremum restricted to `t <= delta_max` (the largest width of the sweep).
    pub layer_distance: f64,
    /// Supremum restricted to `t > delta_max`.
    pub outer_distance: f64,
    /// Time at which the supremum is attained.
    pub t_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DeltaSweep {
    pub deltas: Vec<f64>,
    pub pairs: Vec<SweepPair>,
}

impl DeltaSweep {
    /// Successive distances strictly decrease (or vanish).
    pub fn monotone(&self) -> bool {
        self.pairs
            .windows(2)
            .all(|w| w[1].distance < w[0].distance || w[1].distance == 0.0)
    }

    /// Every pair attains its supremum inside the layer `[0, delta_max]`,
    /// up to a relative `slack` on the outer part.
    pub fn concentrated(&self, slack: f64) -> bool {
        self.pairs
            .iter()
            .all(|p| p.outer_distance <= (1.0 + slack) * p.layer_distance)
    }
}

/// Runs every ramp width on the same grid (every step kept) and compares
/// consecutive trajectories. Each width must be admissible.
pub fn delta_sweep(
    problem: &Problem,
    grid: Grid,
    deltas: &[f64],
    t_end: f64,
) -> Result<DeltaSweep, EvolutionError> {
    let t0 = problem.picard_horizon();
    for &d in deltas {
        problem
            .time_march_plan(d)
            .check_admissible(problem.bounds.area_min, t0)?;
    }
    let options = RunOptions {
        stride: 1,
        monitor: false,
        ..RunOptions::default()
    };
    let runs = deltas
        .par_iter()
        .map(|&d| run(problem, problem.time_march_plan(d), grid, t_end, options))
        .collect::<Result<Vec<_>, _>>()?;
    let layer = deltas.iter().cloned().fold(0.0, f64::max);
    let pairs = deltas
        .windows(2)
        .zip(runs.windows(2))
        .map(|(d, r)| {
            let mut pair = SweepPair {
                delta_a: d[0],
                delta_b: d[1],
                distance: 0.0,
                layer_distance: 0.0,
                outer_distance: 0.0,
                t_max: 0.0,
            };
            for (a, b) in r[0].states.iter().zip(&r[1].states) {
                let dist = a
                    .area
                    .iter()
                    .zip(&b.area)
                    .map(|(x, y)| (x - y).abs())
                    .fold(0.0, f64::max);
                if dist > pair.distance {
                    pair.distance = dist;
                    pair.t_max = a.t;
                }
                if a.t <= layer {
                    pair.layer_distance = pair.layer_distance.max(dist);
                } else {
                    pair.outer_distance = pair.outer_distance.max(dist);
                }
            }
            pair
        })
        .collect();
    Ok(DeltaSweep {
        deltas: deltas.to_vec(),
        pairs,
    })
}

/// `[d0, d0/2, d0/4, ...]` with `count` entries.
pub fn halving(d0: f64, count: usize) -> Vec<f64> {
    (0..count).map(|k| d0 / (1u64 << k) as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::BoundaryData;
    use crate::profile::Profile;

    fn problem() -> Problem {
        let data = BoundaryData {
            s0: Profile::constant(1.0),
            s1: Profile::constant(1.0),
            v_in: Profile::constant(1.0),
            v_l: Profile::constant(2.0),
            length: 1.0,
            horizon: 1.0,
        };
        Problem::new(data, 40).unwrap()
    }

    #[test]
    fn equal_widths_have_zero_distance() {
        let p = problem();
        let d = p.auto_delta();
        let grid = Grid::new(40, 1.0, d / 16.0).unwrap();
        let sweep = delta_sweep(&p, grid, &[d, d], 4.0 * d).unwrap();
        assert_eq!(sweep.pairs[0].distance, 0.0);
    }

    #[test]
    fn halving_shrinks_distance() {
        let p = problem();
        let d = p.auto_delta();
        let grid = Grid::new(40, 1.0, d / 32.0).unwrap();
        let sweep = delta_sweep(&p, grid, &halving(d, 3), 4.0 * d).unwrap();
        assert!(sweep.monotone(), "{sweep:?}");
    }

    #[test]
    fn rejects_inadmissible_width() {
        let p = problem();
        let grid = Grid::new(40, 1.0, 1e-3).unwrap();
        assert!(delta_sweep(&p, grid, &[0.5], 1.0).is_err());
    }
}
