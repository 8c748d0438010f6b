//! Draw-resonance scan: growth rate of a small inlet disturbance on the
//! stationary state as a function of the draw ratio.
//!
//! For each draw ratio the solver runs twice on the same grid, once from the
//! steady profile with steady data and once with one Hann-windowed cycle of
//! inlet-area oscillation added to `S0`. The difference of the two take-up
//! areas `A(t, L)` isolates the disturbance from the discretization's own
//! stationary offset; the envelope of that difference gives the growth rate.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::growth::{estimate_growth, GrowthError, GrowthFit};
use super::steady::{residence_time, steady_data};
use crate::evolution::{step_count, EvolutionError, Marcher};
use crate::model::{Grid, Problem};
use crate::profile::Profile;
use crate::transport::TraceScheme;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScanSettings {
    pub ratios: Vec<f64>,
    /// Disturbance amplitude as a fraction of the inlet area (at most 0.01).
    pub epsilon: f64,
    /// Disturbance period in residence times.
    pub period: f64,
    /// Run length in residence times.
    pub residence_times: f64,
    pub cells: usize,
    pub cfl: f64,
    pub trace: TraceScheme,
    /// Bisection stops once the bracket is at most this wide.
    pub bracket_width: f64,
    /// Largest accepted RMS residual of the log-envelope fit.
    pub fit_threshold: f64,
    /// Combine runs on `cells` and `2 cells` to cancel first-order damping.
    pub richardson: bool,
    pub v_in: f64,
    pub inlet_area: f64,
    pub length: f64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            ratios: vec![5.0, 10.0, 15.0, 18.0, 20.0, 21.0, 22.0, 25.0, 30.0],
            epsilon: 0.01,
            period: 1.0,
            residence_times: 30.0,
            cells: 400,
            cfl: 2.0,
            trace: TraceScheme::Midpoint,
            bracket_width: 0.5,
            fit_threshold: 0.25,
            richardson: true,
            v_in: 1.0,
            inlet_area: 1.0,
            length: 1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanEntry {
    pub draw_ratio: f64,
    pub growth_rate: f64,
    pub period: Option<f64>,
    pub fit_residual: f64,
    /// Set when the envelope fit was rejected; the rate is then unreliable.
    pub inconclusive: Option<GrowthError>,
}

impl ScanEntry {
    pub fn conclusive(&self) -> bool {
        self.inconclusive.is_none()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScanResult {
    /// Sorted by draw ratio, bisection points included.
    pub entries: Vec<ScanEntry>,
    /// Narrowest pair of conclusive ratios with decaying then growing disturbance.
    pub bracket: Option<(f64, f64)>,
}

impl ScanResult {
    pub fn entry(&self, draw_ratio: f64) -> Option<&ScanEntry> {
        self.entries.iter().find(|e| e.draw_ratio == draw_ratio)
    }

    pub fn critical_estimate(&self) -> Option<f64> {
        self.bracket.map(|(lo, hi)| 0.5 * (lo + hi))
    }
}

/// Take-up area difference between the disturbed and the undisturbed run,
/// with time measured in residence times.
pub struct Response {
    pub times: Vec<f64>,
    pub signal: Vec<f64>,
    /// Departure of the undisturbed run's take-up area from the exact
    /// stationary value. Above the threshold the discrete offset has itself
    /// grown out of the linear regime.
    pub drift: Vec<f64>,
    /// Exact stationary take-up area `A0 / D`.
    pub take_up_area: f64,
}

pub fn disturbance_response(draw_ratio: f64, cells: usize, settings: &ScanSettings) -> Result<Response, EvolutionError> {
    let s = settings;
    let base = steady_data(draw_ratio, s.v_in, s.inlet_area, s.length, 1.0);
    let tau = residence_time(&base);
    let t_end = s.residence_times * tau;
    let base = crate::model::BoundaryData { horizon: t_end, ..base };
    let mut disturbed = base.clone();
    disturbed.s0 = Profile::Pulse {
        mean: s.inlet_area,
        amplitude: s.epsilon * s.inlet_area,
        period: s.period * tau,
        onset: 0.0,
    };
    let reference = Problem::new(base, cells)?;
    Problem::new(disturbed.clone(), cells)?;

    let grid = Grid::with_cfl(cells, s.length, reference.bounds.v_max, s.cfl)?;
    let (steps, dt) = step_count(t_end, grid.dt);
    let grid = Grid { dt, ..grid };
    let plan = reference.time_march_plan(reference.auto_delta());
    let start = grid.sample(&reference.data.s1);
    let mut quiet = Marcher::new(&reference.data, plan, grid, start.clone(), s.trace)?;
    let mut loud = Marcher::new(&disturbed, plan, grid, start, s.trace)?;

    let take_up_area = s.inlet_area / draw_ratio;
    let mut times = Vec::with_capacity(steps);
    let mut signal = Vec::with_capacity(steps);
    let mut drift = Vec::with_capacity(steps);
    for _ in 0..steps {
        quiet.advance()?;
        loud.advance()?;
        let (a, b) = (quiet.state(), loud.state());
        times.push(a.t / tau);
        signal.push(b.area[cells] - a.area[cells]);
        drift.push(a.area[cells] - take_up_area);
    }
    Ok(Response {
        times,
        signal,
        drift,
        take_up_area,
    })
}

/// Disturbances above this fraction of the stationary take-up area count as
/// saturated.
pub const SATURATION: f64 = 0.1;

/// Envelope peaks below this (in units of the inlet area) are roundoff.
pub const NOISE_FLOOR: f64 = 1e-10;

/// Shortest fit window, in residence times, before falling back to the
/// window that starts at the end of the inlet pulse.
pub const MIN_WINDOW: f64 = 3.0;

/// Fit window in residence times.
///
/// The window is the second half of the run, cut where the disturbance either
/// leaves the linear regime ([`SATURATION`]) or decays into roundoff
/// ([`NOISE_FLOOR`]). If less than [`MIN_WINDOW`] remains, it starts at the
/// end of the inlet pulse instead.
pub fn fit_window(response: &Response, settings: &ScanSettings) -> (f64, f64) {
    let cap = SATURATION * response.take_up_area;
    let floor = NOISE_FLOOR * settings.inlet_area;
    let pulse_end = settings.period;
    let t_end = settings.residence_times;
    let t_sat = response
        .times
        .iter()
        .zip(response.signal.iter().zip(&response.drift))
        .find(|(_, (y, d))| y.abs() > cap || d.abs() > cap)
        .map_or(t_end, |(&t, _)| t);
    let t_noise = super::growth::envelope_peaks(&response.times, &response.signal)
        .into_iter()
        .find(|&(t, a)| t > pulse_end && a < floor)
        .map_or(t_end, |(t, _)| t);
    let stop = t_sat.min(t_noise);
    let start = (0.5 * t_end).max(pulse_end);
    if stop - start >= MIN_WINDOW {
        (start, stop)
    } else {
        (pulse_end, stop)
    }
}

fn fit_response(response: &Response, settings: &ScanSettings) -> Result<GrowthFit, GrowthError> {
    let (lo, hi) = fit_window(response, settings);
    let (t, y): (Vec<f64>, Vec<f64>) = response
        .times
        .iter()
        .zip(&response.signal)
        .filter(|(&t, _)| t >= lo && t <= hi)
        .map(|(&t, &y)| (t, y))
        .unzip();
    let floor = NOISE_FLOOR * settings.inlet_area;
    estimate_growth(&t, &y, floor, settings.fit_threshold)
}

/// Growth rate (per residence time) of the disturbance at one draw ratio.
///
/// With `richardson` set, the rate is `2 s(2N) - s(N)` from runs on `N` and
/// `2N` cells at the same Courant number, which cancels the leading
/// first-order damping of the interpolation.
pub fn growth_at(draw_ratio: f64, settings: &ScanSettings) -> Result<ScanEntry, EvolutionError> {
    let coarse = disturbance_response(draw_ratio, settings.cells, settings)?;
    let coarse_fit = fit_response(&coarse, settings);
    let fit = if settings.richardson {
        let fine = disturbance_response(draw_ratio, 2 * settings.cells, settings)?;
        match (coarse_fit, fit_response(&fine, settings)) {
            (Ok(c), Ok(f)) => Ok(GrowthFit {
                rate: 2.0 * f.rate - c.rate,
                residual: c.residual.max(f.residual),
                ..f
            }),
            (Err(e), _) | (_, Err(e)) => Err(e),
        }
    } else {
        coarse_fit
    };
    Ok(match fit {
        Ok(fit) => ScanEntry {
            draw_ratio,
            growth_rate: fit.rate,
            period: fit.period,
            fit_residual: fit.residual,
            inconclusive: None,
        },
        Err(e) => {
            let (rate, period, residual) = match &e {
                GrowthError::InconclusiveGrowthRate { fit, .. } => (fit.rate, fit.period, fit.residual),
                GrowthError::TooFewPoints { .. } => (f64::NAN, None, f64::NAN),
            };
            log::warn!("draw ratio {draw_ratio}: {e}");
            ScanEntry {
                draw_ratio,
                growth_rate: rate,
                period,
                fit_residual: residual,
                inconclusive: Some(e),
            }
        }
    })
}

fn find_bracket(entries: &[ScanEntry]) -> Option<(f64, f64)> {
    let usable: Vec<&ScanEntry> = entries.iter().filter(|e| e.conclusive()).collect();
    usable
        .windows(2)
        .find(|w| w[0].growth_rate < 0.0 && w[1].growth_rate > 0.0)
        .map(|w| (w[0].draw_ratio, w[1].draw_ratio))
}

fn insert_sorted(entries: &mut Vec<ScanEntry>, entry: ScanEntry) {
    let at = entries.partition_point(|e| e.draw_ratio < entry.draw_ratio);
    entries.insert(at, entry);
}

/// Scans the configured draw ratios in parallel and bisects the first
/// decay-to-growth bracket down to `bracket_width`.
pub fn resonance_scan(settings: &ScanSettings) -> Result<ScanResult, EvolutionError> {
    let mut ratios = settings.ratios.clone();
    ratios.sort_by(f64::total_cmp);
    ratios.dedup();
    let mut entries = ratios
        .par_iter()
        .map(|&d| growth_at(d, settings))
        .collect::<Result<Vec<_>, _>>()?;

    let mut bracket = find_bracket(&entries);
    while let Some((lo, hi)) = bracket {
        if hi - lo <= settings.bracket_width {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let entry = growth_at(mid, settings)?;
        insert_sorted(&mut entries, entry);
        let next = find_bracket(&entries);
        if next == bracket {
            // the midpoint was inconclusive; nothing more to learn here
            break;
        }
        bracket = next;
    }
    Ok(ScanResult { entries, bracket })
}
