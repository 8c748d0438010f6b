//! Oracles and numerical experiments.

mod convergence;
mod growth;
mod resonance;
mod steady;
mod sweep;

pub use convergence::{
    advection_convergence, self_convergence, steady_convergence, wavy_inlet_data, ConvergenceRow,
    ConvergenceTable, Reference,
};
pub use growth::{envelope_peaks, estimate_growth, fit_line, GrowthError, GrowthFit};
pub use resonance::{
    disturbance_response, fit_window, growth_at, resonance_scan, Response, ScanEntry, ScanResult, ScanSettings,
    MIN_WINDOW, NOISE_FLOOR, SATURATION,
};
pub use steady::{residence_time, steady_data, steady_profile, SteadyProfile};
pub use sweep::{delta_sweep, halving, DeltaSweep, SweepPair};
