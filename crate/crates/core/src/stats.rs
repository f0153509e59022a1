//! Small regression helpers for convergence and scaling fits.

use serde::Serialize;

#[derive(Clone, Copy, Debug, Serialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Ordinary least squares `y ≈ slope·x + intercept`; `None` for fewer than two
/// distinct abscissae.
pub fn fit_line(pts: &[(f64, f64)]) -> Option<LineFit> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let syy: f64 = pts.iter().map(|p| (p.1 - my).powi(2)).sum();
    if sxx <= 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 { sxy * sxy / (sxx * syy) } else { 1.0 };
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
        r2,
    })
}

/// Slope of `ln y` against `ln x` over positive pairs.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .zip(ys)
        .filter(|(x, y)| **x > 0.0 && **y > 0.0)
        .map(|(x, y)| (x.ln(), y.ln()))
        .collect();
    fit_line(&pts).map(|f| f.slope)
}

/// Richardson extrapolation to zero from samples at `ε, 2ε, 4ε` for an error
/// expansion `c_1 ε + c_2 ε^2`.
pub fn extrapolate_zero(f1: f64, f2: f64, f4: f64) -> f64 {
    (8.0 * f1 - 6.0 * f2 + f4) / 3.0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let f = fit_line(&[(0.0, 1.0), (1.0, 3.0), (2.0, 5.0)]).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-14 && (f.intercept - 1.0).abs() < 1e-14);
        assert!(fit_line(&[(1.0, 1.0)]).is_none());
    }

    #[test]
    fn power_law_slope() {
        let xs = [1.0, 2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.5)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() + 1.5).abs() < 1e-12);
    }

    #[test]
    fn richardson_removes_quadratic_error() {
        let f = |e: f64| 2.0 + 0.3 * e - 0.7 * e * e;
        let v = extrapolate_zero(f(0.1), f(0.2), f(0.4));
        assert!((v - 2.0).abs() < 1e-13);
    }
}
