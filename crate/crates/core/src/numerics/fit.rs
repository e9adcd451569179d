//! Ordinary least-squares line fits.

// Unused whenever std is linked; needed for the float methods without it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope from the residual variance.
    pub slope_stderr: f64,
    /// Coefficient of determination; 1 when the data have no spread.
    pub r2: f64,
    /// Root-mean-square residual.
    pub rms_residual: f64,
}

/// Fit `y = slope x + intercept`.
pub fn fit_line(x: &[f64], y: &[f64]) -> Result<LineFit> {
    if x.len() != y.len() {
        return Err(Error::InvalidArgument("x and y lengths differ".into()));
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::InvalidArgument(
            "need at least two points to fit a line".into(),
        ));
    }
    if x.iter().chain(y).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("fit data"));
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    for (&a, &b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidArgument("x values are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ss_res: f64 = x
        .iter()
        .zip(y)
        .map(|(&a, &b)| {
            let r = b - (slope * a + intercept);
            r * r
        })
        .sum();
    let slope_stderr = if n > 2 {
        (ss_res / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    let r2 = if syy > 0.0 { 1.0 - ss_res / syy } else { 1.0 };
    Ok(LineFit {
        slope,
        intercept,
        slope_stderr,
        r2,
        rms_residual: (ss_res / nf).sqrt(),
    })
}

/// Least-squares `c` in `y = c x^2` (no intercept).
pub fn fit_quadratic_coefficient(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.is_empty() {
        return Err(Error::InvalidArgument(
            "need matching, non-empty data".into(),
        ));
    }
    let num: f64 = x.iter().zip(y).map(|(&a, &b)| b * a * a).sum();
    let den: f64 = x.iter().map(|&a| a.powi(4)).sum();
    if den == 0.0 {
        return Err(Error::InvalidArgument("all abscissae are zero".into()));
    }
    Ok(num / den)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let x = [0.0, 1.0, 2.0, 3.0];
        let y = [1.0, 3.0, 5.0, 7.0];
        let f = fit_line(&x, &y).unwrap();
        assert!((f.slope - 2.0).abs() < 1e-15 && (f.intercept - 1.0).abs() < 1e-15);
        assert!(f.slope_stderr < 1e-15 && (f.r2 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn quadratic_coefficient() {
        let x = [0.5, 1.0, 2.0];
        let y: [f64; 3] = x.map(|t| 3.0 * t * t);
        assert!((fit_quadratic_coefficient(&x, &y).unwrap() - 3.0).abs() < 1e-15);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_line(&[1.0], &[1.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(fit_line(&[1.0, f64::NAN], &[1.0, 2.0]).is_err());
    }
}
