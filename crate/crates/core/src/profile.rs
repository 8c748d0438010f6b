//! Analytic boundary and initial data profiles.
//!
//! Every profile is a function of one scalar (time for `S0`, `v_in`, `v_L`;
//! arc length for `S1`). Derivatives are evaluated analytically so that the
//! boundary slopes entering the compatibility constant never pass through a
//! finite difference.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

/// A scalar profile drawn from a small set of named families.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum Profile {
    /// `value`
    Constant { value: f64 },
    /// `start + slope * s`
    Linear { start: f64, slope: f64 },
    /// `mean + amplitude * sin(2 pi s / period + phase)`
    Sinusoid {
        mean: f64,
        amplitude: f64,
        period: f64,
        #[serde(default)]
        phase: f64,
    },
    /// `from + (to - from) * (1 + tanh((s - center) / width)) / 2`
    SmoothStep {
        from: f64,
        to: f64,
        center: f64,
        width: f64,
    },
    /// `start * exp(rate * s)`
    Exponential { start: f64, rate: f64 },
    /// One Hann-windowed sinusoidal cycle on `[onset, onset + period]`:
    /// `mean + amplitude * sin(2 pi u) * sin^2(pi u)` with `u = (s - onset) / period`,
    /// and `mean` outside the window. Twice continuously differentiable.
    Pulse {
        mean: f64,
        amplitude: f64,
        period: f64,
        #[serde(default)]
        onset: f64,
    },
    /// Piecewise-linear interpolation through `(s, value)` pairs, held
    /// constant beyond the first and last abscissa.
    Tabulated { points: Vec<[f64; 2]> },
}

impl Profile {
    pub fn constant(value: f64) -> Self {
        Profile::Constant { value }
    }

    pub fn linear(start: f64, slope: f64) -> Self {
        Profile::Linear { start, slope }
    }

    pub fn sinusoid(mean: f64, amplitude: f64, period: f64) -> Self {
        Profile::Sinusoid {
            mean,
            amplitude,
            period,
            phase: 0.0,
        }
    }

    pub fn exponential(start: f64, rate: f64) -> Self {
        Profile::Exponential { start, rate }
    }

    pub fn value(&self, s: f64) -> f64 {
        match self {
            Profile::Constant { value } => *value,
            Profile::Linear { start, slope } => start + slope * s,
            Profile::Sinusoid {
                mean,
                amplitude,
                period,
                phase,
            } => mean + amplitude * (2.0 * PI * s / period + phase).sin(),
            Profile::SmoothStep {
                from,
                to,
                center,
                width,
            } => from + (to - from) * 0.5 * (1.0 + ((s - center) / width).tanh()),
            Profile::Exponential { start, rate } => start * (rate * s).exp(),
            Profile::Pulse {
                mean,
                amplitude,
                period,
                onset,
            } => {
                let u = (s - onset) / period;
                if (0.0..=1.0).contains(&u) {
                    mean + amplitude * pulse_shape(u)
                } else {
                    *mean
                }
            }
            Profile::Tabulated { points } => tabulated_value(points, s),
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            Profile::Constant { .. } => 0.0,
            Profile::Linear { slope, .. } => *slope,
            Profile::Sinusoid {
                amplitude,
                period,
                phase,
                ..
            } => {
                let w = 2.0 * PI / period;
                amplitude * w * (w * s + phase).cos()
            }
            Profile::SmoothStep {
                from,
                to,
                center,
                width,
            } => {
                let th = ((s - center) / width).tanh();
                (to - from) * 0.5 * (1.0 - th * th) / width
            }
            Profile::Exponential { start, rate } => start * rate * (rate * s).exp(),
            Profile::Pulse {
                amplitude,
                period,
                onset,
                ..
            } => {
                let u = (s - onset) / period;
                if (0.0..=1.0).contains(&u) {
                    amplitude * pulse_shape_derivative(u) / period
                } else {
                    0.0
                }
            }
            Profile::Tabulated { points } => tabulated_slope(points, s),
        }
    }

    /// Checks parameters that would make the profile meaningless
    /// (non-finite numbers, zero periods, unsorted tables).
    pub fn check_parameters(&self) -> Result<(), String> {
        let finite = |name: &str, x: f64| {
            if x.is_finite() {
                Ok(())
            } else {
                Err(format!("{name} is not finite"))
            }
        };
        match self {
            Profile::Constant { value } => finite("value", *value),
            Profile::Linear { start, slope } => {
                finite("start", *start)?;
                finite("slope", *slope)
            }
            Profile::Sinusoid {
                mean,
                amplitude,
                period,
                phase,
            } => {
                finite("mean", *mean)?;
                finite("amplitude", *amplitude)?;
                finite("phase", *phase)?;
                positive("period", *period)
            }
            Profile::SmoothStep {
                from,
                to,
                center,
                width,
            } => {
                finite("from", *from)?;
                finite("to", *to)?;
                finite("center", *center)?;
                positive("width", *width)
            }
            Profile::Exponential { start, rate } => {
                finite("start", *start)?;
                finite("rate", *rate)
            }
            Profile::Pulse {
                mean,
                amplitude,
                period,
                onset,
            } => {
                finite("mean", *mean)?;
                finite("amplitude", *amplitude)?;
                finite("onset", *onset)?;
                positive("period", *period)
            }
            Profile::Tabulated { points } => {
                if points.len() < 2 {
                    return Err("tabulated profile needs at least two points".into());
                }
                for p in points {
                    finite("point", p[0])?;
                    finite("point", p[1])?;
                }
                if points.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err("tabulated abscissae must be strictly increasing".into());
                }
                Ok(())
            }
        }
    }

    /// Returns a copy with every value multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Profile {
        match self.clone() {
            Profile::Constant { value } => Profile::Constant {
                value: value * factor,
            },
            Profile::Linear { start, slope } => Profile::Linear {
                start: start * factor,
                slope: slope * factor,
            },
            Profile::Sinusoid {
                mean,
                amplitude,
                period,
                phase,
            } => Profile::Sinusoid {
                mean: mean * factor,
                amplitude: amplitude * factor,
                period,
                phase,
            },
            Profile::SmoothStep {
                from,
                to,
                center,
                width,
            } => Profile::SmoothStep {
                from: from * factor,
                to: to * factor,
                center,
                width,
            },
            Profile::Exponential { start, rate } => Profile::Exponential {
                start: start * factor,
                rate,
            },
            Profile::Pulse {
                mean,
                amplitude,
                period,
                onset,
            } => Profile::Pulse {
                mean: mean * factor,
                amplitude: amplitude * factor,
                period,
                onset,
            },
            Profile::Tabulated { points } => Profile::Tabulated {
                points: points.into_iter().map(|[s, y]| [s, y * factor]).collect(),
            },
        }
    }
}

fn positive(name: &str, x: f64) -> Result<(), String> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(format!("{name} must be positive"))
    }
}

fn pulse_shape(u: f64) -> f64 {
    let s = (PI * u).sin();
    (2.0 * PI * u).sin() * s * s
}

fn pulse_shape_derivative(u: f64) -> f64 {
    let s = (PI * u).sin();
    let c = (PI * u).cos();
    2.0 * PI * (2.0 * PI * u).cos() * s * s + (2.0 * PI * u).sin() * 2.0 * PI * s * c
}

fn tabulated_segment(points: &[[f64; 2]], s: f64) -> Option<usize> {
    if s <= points[0][0] || s >= points[points.len() - 1][0] {
        return None;
    }
    // first index whose abscissa exceeds s
    let hi = points.partition_point(|p| p[0] <= s);
    Some(hi - 1)
}

fn tabulated_value(points: &[[f64; 2]], s: f64) -> f64 {
    match tabulated_segment(points, s) {
        Some(j) => {
            let [x0, y0] = points[j];
            let [x1, y1] = points[j + 1];
            y0 + (y1 - y0) * (s - x0) / (x1 - x0)
        }
        None if s <= points[0][0] => points[0][1],
        None => points[points.len() - 1][1],
    }
}

fn tabulated_slope(points: &[[f64; 2]], s: f64) -> f64 {
    let n = points.len();
    let j = match tabulated_segment(points, s) {
        Some(j) => j,
        // one-sided slope at the ends of the table
        None if s <= points[0][0] => 0,
        None => n - 2,
    };
    let [x0, y0] = points[j];
    let [x1, y1] = points[j + 1];
    (y1 - y0) / (x1 - x0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn finite_difference(p: &Profile, s: f64) -> f64 {
        let h = 1e-6;
        (p.value(s + h) - p.value(s - h)) / (2.0 * h)
    }

    #[test]
    fn analytic_derivatives_match_finite_differences() {
        let profiles = [
            Profile::linear(1.0, -0.3),
            Profile::Sinusoid {
                mean: 1.0,
                amplitude: 0.2,
                period: 0.7,
                phase: 0.4,
            },
            Profile::SmoothStep {
                from: 1.0,
                to: 2.0,
                center: 0.5,
                width: 0.1,
            },
            Profile::exponential(2.0, -0.69),
            Profile::Pulse {
                mean: 1.0,
                amplitude: 0.01,
                period: 1.0,
                onset: 0.1,
            },
        ];
        for p in &profiles {
            for s in [0.05, 0.3, 0.55, 0.9] {
                assert_relative_eq!(p.derivative(s), finite_difference(p, s), epsilon = 1e-6);
            }
        }
    }

    #[test]
    fn pulse_is_flat_outside_window() {
        let p = Profile::Pulse {
            mean: 2.0,
            amplitude: 0.5,
            period: 1.0,
            onset: 1.0,
        };
        assert_eq!(p.value(0.5), 2.0);
        assert_eq!(p.value(2.5), 2.0);
        assert_eq!(p.derivative(0.5), 0.0);
        assert!(p.value(1.0) == 2.0 && p.derivative(1.0).abs() < 1e-15);
        assert!((p.value(1.25) - 2.0).abs() > 0.1);
    }

    #[test]
    fn tabulated_interpolates_and_clamps() {
        let p = Profile::Tabulated {
            points: vec![[0.0, 1.0], [1.0, 3.0], [2.0, 2.0]],
        };
        assert_eq!(p.value(0.5), 2.0);
        assert_eq!(p.value(1.5), 2.5);
        assert_eq!(p.value(-1.0), 1.0);
        assert_eq!(p.value(5.0), 2.0);
        assert_eq!(p.derivative(0.0), 2.0);
        assert_eq!(p.derivative(1.5), -1.0);
        assert_eq!(p.derivative(2.0), -1.0);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(Profile::sinusoid(1.0, 0.1, 0.0).check_parameters().is_err());
        let unsorted = Profile::Tabulated {
            points: vec![[0.0, 1.0], [0.0, 2.0]],
        };
        assert!(unsorted.check_parameters().is_err());
        assert!(Profile::constant(f64::NAN).check_parameters().is_err());
    }

    #[test]
    fn json_tagging() {
        let p: Profile =
            serde_json::from_str(r#"{"family":"sinusoid","mean":1,"amplitude":0.05,"period":1}"#)
                .unwrap();
        assert_eq!(p, Profile::sinusoid(1.0, 0.05, 1.0));
        let bad = serde_json::from_str::<Profile>(r#"{"family":"constant","value":1,"slope":2}"#);
        assert!(bad.is_err());
    }
}
