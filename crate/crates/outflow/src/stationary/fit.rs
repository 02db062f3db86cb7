//! Least-squares fits used to measure profile decay rates.

/// Ordinary least-squares line `y = slope * x + intercept`.
///
/// Returns `(slope, intercept)`. Requires at least two points; non-finite
/// samples are skipped.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let pairs: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(&a, &b)| a.is_finite() && b.is_finite())
        .map(|(&a, &b)| (a, b))
        .collect();
    assert!(pairs.len() >= 2, "linear_fit needs at least two finite points");
    let n = pairs.len() as f64;
    let mx = pairs.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pairs.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pairs.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pairs.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Fitted exponent `q` in `y ~ C (1 + delta * x)^q`.
///
/// Fits `ln y` against `ln(1 + delta * x)`; points with `y <= 0` are dropped.
pub fn log_log_slope(x: &[f64], y: &[f64], delta: f64) -> f64 {
    assert_eq!(x.len(), y.len());
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(_, &yi)| yi > 0.0)
        .map(|(&xi, &yi)| ((1.0 + delta * xi).ln(), yi.ln()))
        .unzip();
    linear_fit(&lx, &ly).0
}

/// Fitted rate `lambda` in `y ~ C exp(lambda * x)` (negative for decay).
///
/// Fits `ln y` against `x`; points with `y <= 0` are dropped.
pub fn exponential_rate(x: &[f64], y: &[f64]) -> f64 {
    assert_eq!(x.len(), y.len());
    let (lx, ly): (Vec<f64>, Vec<f64>) = x
        .iter()
        .zip(y)
        .filter(|(_, &yi)| yi > 0.0)
        .map(|(&xi, &yi)| (xi, yi.ln()))
        .unzip();
    linear_fit(&lx, &ly).0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn linear_fit_recovers_exact_line() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|&t| 3.5 * t - 2.0).collect();
        let (s, b) = linear_fit(&x, &y);
        assert_relative_eq!(s, 3.5, max_relative = 1e-12);
        assert_relative_eq!(b, -2.0, max_relative = 1e-12);
    }

    #[test]
    fn log_log_slope_recovers_power_law() {
        let x: Vec<f64> = (1..200).map(|i| i as f64).collect();
        let delta = 0.3;
        let y: Vec<f64> = x.iter().map(|&t| 2.0 * (1.0 + delta * t).powf(-1.7)).collect();
        let q = log_log_slope(&x, &y, delta);
        assert_relative_eq!(q, -1.7, max_relative = 1e-10);
    }

    #[test]
    fn exponential_rate_recovers_decay() {
        let x: Vec<f64> = (0..100).map(|i| i as f64 * 0.05).collect();
        let y: Vec<f64> = x.iter().map(|&t| 4.0 * (-0.9 * t).exp()).collect();
        let r = exponential_rate(&x, &y);
        assert_relative_eq!(r, -0.9, max_relative = 1e-10);
    }

    #[test]
    fn fits_skip_nonpositive_samples() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 0.0, (-2.0f64).exp(), (-3.0f64).exp()];
        let r = exponential_rate(&x, &y);
        assert_relative_eq!(r, -1.0, max_relative = 1e-10);
    }
}
