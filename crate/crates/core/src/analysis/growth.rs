//! Exponential growth rate of an oscillating signal from its envelope.

use thiserror::Error;

/// Least-squares line through `log |peak|` against time.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GrowthFit {
    /// Growth rate per unit time; negative for decay.
    pub rate: f64,
    /// Mean spacing of successive positive maxima, if at least two exist.
    pub period: Option<f64>,
    /// Root-mean-square residual of the log-envelope fit.
    pub residual: f64,
    pub peaks: usize,
}

#[derive(Clone, Debug, Error, PartialEq)]
pub enum GrowthError {
    #[error("signal has {found} usable samples, need at least 3")]
    TooFewPoints { found: usize },
    #[error("envelope fit residual {} exceeds {threshold} (rate {})", .fit.residual, .fit.rate)]
    InconclusiveGrowthRate { fit: GrowthFit, threshold: f64 },
}

/// Local maxima of `|y|`, refined by a parabola through the three samples
/// around each one. Returns `(time, amplitude)` pairs.
pub fn envelope_peaks(times: &[f64], signal: &[f64]) -> Vec<(f64, f64)> {
    let mut peaks = Vec::new();
    for k in 1..signal.len().saturating_sub(1) {
        let (a, b, c) = (signal[k - 1].abs(), signal[k].abs(), signal[k + 1].abs());
        if b > a && b >= c && b > 0.0 {
            let h = times[k + 1] - times[k];
            let denom = a - 2.0 * b + c;
            let (shift, top) = if denom < 0.0 {
                let s = 0.5 * (a - c) / denom;
                (s, b - 0.25 * (a - c) * s)
            } else {
                (0.0, b)
            };
            peaks.push((times[k] + shift * h, top));
        }
    }
    peaks
}

fn positive_maxima(times: &[f64], signal: &[f64]) -> Vec<f64> {
    (1..signal.len().saturating_sub(1))
        .filter(|&k| signal[k] > 0.0 && signal[k] > signal[k - 1] && signal[k] >= signal[k + 1])
        .map(|k| times[k])
        .collect()
}

/// Slope, intercept and RMS residual of the least-squares line through `(x, y)`.
pub fn fit_line(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    let intercept = my - slope * mx;
    let ss: f64 = x
        .iter()
        .zip(y)
        .map(|(a, b)| {
            let r = b - (intercept + slope * a);
            r * r
        })
        .sum();
    (slope, intercept, (ss / n).sqrt())
}

/// Growth rate of `signal` sampled at `times`.
///
/// Samples with `|y| <= noise_floor` are ignored. With three or more envelope
/// peaks the rate comes from the peaks; otherwise (a non-oscillating decay or
/// growth) from `log |y|` at every usable sample.
pub fn estimate_growth(
    times: &[f64],
    signal: &[f64],
    noise_floor: f64,
    threshold: f64,
) -> Result<GrowthFit, GrowthError> {
    let peaks: Vec<(f64, f64)> = envelope_peaks(times, signal)
        .into_iter()
        .filter(|p| p.1 > noise_floor)
        .collect();
    let (x, y): (Vec<f64>, Vec<f64>) = if peaks.len() >= 3 {
        peaks.iter().map(|&(t, a)| (t, a.ln())).unzip()
    } else {
        times
            .iter()
            .zip(signal)
            .filter(|(_, y)| y.abs() > noise_floor)
            .map(|(&t, y)| (t, y.abs().ln()))
            .unzip()
    };
    if x.len() < 3 {
        return Err(GrowthError::TooFewPoints { found: x.len() });
    }
    let (rate, _, residual) = fit_line(&x, &y);
    let maxima = positive_maxima(times, signal);
    let period = (maxima.len() >= 2)
        .then(|| (maxima[maxima.len() - 1] - maxima[0]) / (maxima.len() - 1) as f64);
    let fit = GrowthFit {
        rate,
        period,
        residual,
        peaks: peaks.len(),
    };
    if residual > threshold {
        return Err(GrowthError::InconclusiveGrowthRate { fit, threshold });
    }
    Ok(fit)
}
