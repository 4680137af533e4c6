//! Ordinary least squares on log-log data.

use serde::Serialize;

use crate::error::{Result, TailError};

/// Result of regressing `ln y` on `ln x`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeFit {
    pub slope: f64,
    pub intercept: f64,
    pub residual_se: f64,
    pub n: usize,
    /// Standard error of the slope (0 when n = 2).
    pub slope_stderr: f64,
}

pub fn fit_loglog_slope(points: &[(f64, f64)]) -> Result<SlopeFit> {
    if points.len() < 2 {
        return Err(TailError::domain(format!("need at least 2 points, got {}", points.len())));
    }
    if let Some(&(x, y)) = points.iter().find(|(x, y)| !(*x > 0.0 && *y > 0.0 && x.is_finite() && y.is_finite())) {
        return Err(TailError::domain(format!("log-log fit needs positive finite coordinates, got ({x}, {y})")));
    }
    let n = points.len();
    let nf = n as f64;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = lx.iter().sum::<f64>() / nf;
    let my = ly.iter().sum::<f64>() / nf;
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(TailError::domain("log-log fit needs at least two distinct x values"));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = lx
        .iter()
        .zip(&ly)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let (residual_se, slope_stderr) = if n > 2 {
        let s = (rss / (nf - 2.0)).sqrt();
        (s, s / sxx.sqrt())
    } else {
        (0.0, 0.0)
    };
    Ok(SlopeFit { slope, intercept, residual_se, n, slope_stderr })
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let (a, b) = (lo.ln(), hi.ln());
    (0..n)
        .map(|i| {
            if i == n - 1 {
                hi
            } else {
                (a + (b - a) * i as f64 / (n - 1) as f64).exp()
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn square_law_is_exact() {
        let pts: Vec<_> = [0.1, 0.01, 0.001].iter().map(|&x: &f64| (x, x * x)).collect();
        let fit = fit_loglog_slope(&pts).unwrap();
        assert!((fit.slope - 2.0).abs() < 1e-14);
        assert!(fit.residual_se < 1e-13);
    }

    #[test]
    fn intercept_absorbs_scale() {
        let pts: Vec<_> = log_grid(1e-4, 1.0, 7).into_iter().map(|x| (x, 3.7 * x)).collect();
        let fit = fit_loglog_slope(&pts).unwrap();
        assert!((fit.slope - 1.0).abs() < 1e-13);
        assert!((fit.intercept - 3.7f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn perturbed_power_law() {
        let pts: Vec<_> = log_grid(1e-6, 1e-3, 20)
            .into_iter()
            .map(|x| (x, x.powf(1.5) * (1.0 + 0.01 * x)))
            .collect();
        let fit = fit_loglog_slope(&pts).unwrap();
        assert!((fit.slope - 1.5).abs() < 1e-4);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_loglog_slope(&[(1.0, 1.0)]).is_err());
        assert!(fit_loglog_slope(&[(1.0, 1.0), (0.0, 2.0)]).is_err());
        assert!(fit_loglog_slope(&[(1.0, 1.0), (2.0, -2.0)]).is_err());
        assert!(fit_loglog_slope(&[(1.0, 1.0), (1.0, 2.0)]).is_err());
    }

    #[test]
    fn grid_endpoints() {
        let g = log_grid(1e-6, 1e-3, 20);
        assert_eq!(g.len(), 20);
        assert!((g[0] - 1e-6).abs() < 1e-20);
        assert_eq!(g[19], 1e-3);
        assert!(g.windows(2).all(|w| w[1] > w[0]));
    }

    proptest! {
        #[test]
        fn pure_power_laws_are_exact(k in 0.1f64..6.0, c in 1e-6f64..1e6, lo in -12.0f64..-2.0) {
            let pts: Vec<_> = log_grid(10f64.powf(lo), 10f64.powf(lo + 2.0), 9)
                .into_iter()
                .map(|x| (x, c * x.powf(k)))
                .collect();
            let fit = fit_loglog_slope(&pts).unwrap();
            prop_assert!((fit.slope - k).abs() < 1e-12);
        }
    }
}
