//! Grid-function quadrature and differencing on uniform grids.

/// Composite trapezoid rule for samples spaced `h` apart.
pub fn trapezoid(values: &[f64], h: f64) -> f64 {
    match values.len() {
        0 | 1 => 0.0,
        n => {
            let interior: f64 = values[1..n - 1].iter().sum();
            h * (0.5 * (values[0] + values[n - 1]) + interior)
        }
    }
}

/// Running trapezoid integral; `out[0] == 0`.
pub fn cumulative_trapezoid(values: &[f64], h: f64) -> Vec<f64> {
    let mut out = Vec::with_capacity(values.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in values.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// First derivative by central differences, second-order one-sided at the ends.
pub fn derivative(values: &[f64], h: f64) -> Vec<f64> {
    let n = values.len();
    assert!(n >= 3, "need at least three samples to difference");
    let mut d = vec![0.0; n];
    d[0] = (-3.0 * values[0] + 4.0 * values[1] - values[2]) / (2.0 * h);
    for i in 1..n - 1 {
        d[i] = (values[i + 1] - values[i - 1]) / (2.0 * h);
    }
    d[n - 1] = (3.0 * values[n - 1] - 4.0 * values[n - 2] + values[n - 3]) / (2.0 * h);
    d
}

/// Samples `f` at `n + 1` equispaced points on `[0, length]`.
pub fn sample(f: impl Fn(f64) -> f64, length: f64, n: usize) -> Vec<f64> {
    let h = length / n as f64;
    (0..=n).map(|i| f(i as f64 * h)).collect()
}

/// Linear interpolation of a uniform grid function at `x` (clamped to the grid).
pub fn interpolate(values: &[f64], h: f64, x: f64) -> f64 {
    let n = values.len() - 1;
    let s = x / h;
    if s <= 0.0 {
        return values[0];
    }
    let j = s.floor() as usize;
    if j >= n {
        return values[n];
    }
    let theta = s - j as f64;
    (1.0 - theta) * values[j] + theta * values[j + 1]
}

pub fn sup_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn trapezoid_is_exact_for_linear() {
        let v = sample(|x| 2.0 * x + 1.0, 1.0, 10);
        assert_relative_eq!(trapezoid(&v, 0.1), 2.0, epsilon = 1e-14);
        let c = cumulative_trapezoid(&v, 0.1);
        assert_eq!(c[0], 0.0);
        assert_relative_eq!(c[5], 0.25 + 0.5, epsilon = 1e-14);
    }

    #[test]
    fn derivative_is_exact_for_quadratics() {
        let v = sample(|x| x * x - x, 2.0, 8);
        let d = derivative(&v, 0.25);
        for (i, di) in d.iter().enumerate() {
            assert_relative_eq!(*di, 2.0 * i as f64 * 0.25 - 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn interpolation_clamps() {
        let v = [0.0, 1.0, 4.0];
        assert_eq!(interpolate(&v, 0.5, -0.1), 0.0);
        assert_eq!(interpolate(&v, 0.5, 0.75), 2.5);
        assert_eq!(interpolate(&v, 0.5, 1.0), 4.0);
        assert_eq!(interpolate(&v, 0.5, 7.0), 4.0);
    }
}
