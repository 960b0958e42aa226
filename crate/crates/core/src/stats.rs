//! Ordinary least squares for straight lines.

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Coefficient of determination. A perfect fit of constant data counts as 1.
    pub r_squared: f64,
}

pub fn fit_line(xs: &[f64], ys: &[f64]) -> Result<LineFit> {
    let n = xs.len();
    if n != ys.len() {
        return Err(Error::LengthMismatch {
            expected: n,
            found: ys.len(),
        });
    }
    if n < 2 {
        return Err(Error::InsufficientSamples { needed: 2, found: n });
    }
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("abscissae are all equal".into()));
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = r_squared(
        ys.iter().copied(),
        xs.iter().map(|x| intercept + slope * x),
        my,
    );
    Ok(LineFit {
        slope,
        intercept,
        r_squared,
    })
}

pub(crate) fn r_squared(
    observed: impl Iterator<Item = f64>,
    predicted: impl Iterator<Item = f64>,
    mean: f64,
) -> f64 {
    let mut ss_res = 0.0;
    let mut ss_tot = 0.0;
    for (y, p) in observed.zip(predicted) {
        ss_res += (y - p) * (y - p);
        ss_tot += (y - mean) * (y - mean);
    }
    if ss_tot <= f64::EPSILON * f64::EPSILON * (1.0 + mean * mean) {
        if ss_res <= ss_tot.max(f64::MIN_POSITIVE) * 1e6 {
            1.0
        } else {
            0.0
        }
    } else {
        (1.0 - ss_res / ss_tot).clamp(0.0, 1.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_line() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 - 0.5 * x).collect();
        let fit = fit_line(&xs, &ys).unwrap();
        assert!((fit.slope + 0.5).abs() < 1e-14);
        assert!((fit.intercept - 3.0).abs() < 1e-13);
        assert!((fit.r_squared - 1.0).abs() < 1e-14);
    }

    #[test]
    fn constant_data_is_a_perfect_fit() {
        let xs = [1.0, 2.0, 3.0];
        let fit = fit_line(&xs, &[2.0; 3]).unwrap();
        assert_eq!(fit.slope, 0.0);
        assert_eq!(fit.r_squared, 1.0);
    }

    #[test]
    fn degenerate_inputs() {
        assert!(fit_line(&[1.0], &[1.0]).is_err());
        assert!(fit_line(&[1.0, 1.0], &[1.0, 2.0]).is_err());
        assert!(fit_line(&[1.0, 2.0], &[1.0]).is_err());
    }
}
