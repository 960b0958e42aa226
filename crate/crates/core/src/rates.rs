//! Long-time behaviour of norm series: decay-rate fits for the polynomial
//! and stretched-exponential laws, and a coarse classification into
//! converged, oscillating, or stuck on a non-equilibrium plateau.

use crate::error::{Error, Result};
use crate::stats::fit_line;

pub const MIN_FIT_SAMPLES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesSample {
    pub t: f64,
    pub value: f64,
}

impl From<(f64, f64)> for SeriesSample {
    fn from((t, value): (f64, f64)) -> Self {
        SeriesSample { t, value }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RateModel {
    /// `value ≈ C (1+t)^{-lambda}`
    PolynomialDecay { lambda: f64, prefactor: f64 },
    /// `value ≈ C exp(-c t^{exponent})`
    StretchedExponential { c: f64, prefactor: f64, exponent: f64 },
    Plateau { level: f64 },
    Oscillating { peak_to_peak: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateFit {
    pub model: RateModel,
    /// Present for the two regression models.
    pub r_squared: Option<f64>,
    pub window: (f64, f64),
    pub samples: usize,
}

fn check_increasing(series: &[SeriesSample]) -> Result<()> {
    if series.windows(2).any(|w| !(w[1].t > w[0].t)) {
        return Err(Error::InvalidParameter("sample times must be strictly increasing".into()));
    }
    Ok(())
}

/// Samples inside `window` with values usable in a log fit. Values at or
/// below `10 ε · max` are dropped; negative values are an error.
fn log_window(series: &[SeriesSample], window: (f64, f64)) -> Result<Vec<SeriesSample>> {
    check_increasing(series)?;
    if !(window.0 < window.1) {
        return Err(Error::InvalidParameter(format!(
            "empty fit window [{}, {}]",
            window.0, window.1
        )));
    }
    let inside: Vec<SeriesSample> = series
        .iter()
        .copied()
        .filter(|s| s.t >= window.0 && s.t <= window.1)
        .collect();
    if inside.iter().any(|s| s.value < 0.0 || s.value.is_nan()) {
        return Err(Error::NonPositiveValues);
    }
    let max = inside.iter().fold(0.0_f64, |m, s| m.max(s.value));
    if inside.len() >= MIN_FIT_SAMPLES && max <= 0.0 {
        return Err(Error::NonPositiveValues);
    }
    let floor = 10.0 * f64::EPSILON * max;
    let kept: Vec<SeriesSample> = inside.into_iter().filter(|s| s.value > floor).collect();
    if kept.len() < MIN_FIT_SAMPLES {
        return Err(Error::InsufficientSamples {
            needed: MIN_FIT_SAMPLES,
            found: kept.len(),
        });
    }
    Ok(kept)
}

/// Least squares of `log value` against `log(1+t)`; `lambda = -slope`.
pub fn fit_polynomial_decay(series: &[SeriesSample], window: (f64, f64)) -> Result<RateFit> {
    let kept = log_window(series, window)?;
    let xs: Vec<f64> = kept.iter().map(|s| s.t.ln_1p()).collect();
    let ys: Vec<f64> = kept.iter().map(|s| s.value.ln()).collect();
    let line = fit_line(&xs, &ys)?;
    Ok(RateFit {
        model: RateModel::PolynomialDecay {
            lambda: -line.slope,
            prefactor: line.intercept.exp(),
        },
        r_squared: Some(line.r_squared),
        window,
        samples: kept.len(),
    })
}

/// Least squares of `log value` against `t^{1-alpha}`; `c = -slope`,
/// `C = exp(intercept)`.
pub fn fit_stretched_exponential(
    series: &[SeriesSample],
    alpha: f64,
    window: (f64, f64),
) -> Result<RateFit> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::InvalidAlpha(alpha));
    }
    let kept = log_window(series, window)?;
    let exponent = 1.0 - alpha;
    let xs: Vec<f64> = kept.iter().map(|s| s.t.powf(exponent)).collect();
    let ys: Vec<f64> = kept.iter().map(|s| s.value.ln()).collect();
    let line = fit_line(&xs, &ys)?;
    Ok(RateFit {
        model: RateModel::StretchedExponential {
            c: -line.slope,
            prefactor: line.intercept.exp(),
            exponent,
        },
        r_squared: Some(line.r_squared),
        window,
        samples: kept.len(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LambdaSup {
    Finite(f64),
    /// θ = 1/2: the decay is (stretched-)exponential, faster than any power.
    Unbounded,
    /// α outside the admissibility window, no polynomial rate is guaranteed.
    NotApplicable,
}

/// Supremum of the guaranteed polynomial rates, `(θ - (1-θ)α) / (1 - 2θ)`.
pub fn theoretical_lambda_sup(theta: f64, alpha: f64) -> Result<LambdaSup> {
    if !(theta > 0.0 && theta <= 0.5) {
        return Err(Error::InvalidParameter(format!("theta must lie in (0, 1/2], got {theta}")));
    }
    if !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!("alpha must be >= 0, got {alpha}")));
    }
    if theta == 0.5 {
        return Ok(LambdaSup::Unbounded);
    }
    let num = theta - (1.0 - theta) * alpha;
    // the window boundary α = θ/(1-θ) is rarely representable exactly
    if num <= 1e-12 * theta {
        return Ok(LambdaSup::NotApplicable);
    }
    Ok(LambdaSup::Finite(num / (1.0 - 2.0 * theta)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClassifyParams {
    /// Fraction of the time span treated as the tail window.
    pub tail_fraction: f64,
    /// Tail peak-to-peak, relative to the global maximum, above which the
    /// series counts as oscillating.
    pub osc_frac: f64,
    /// Distance of the tail mean from an equilibrium level, relative to the
    /// global maximum, below which the series counts as converged.
    pub eq_tol: f64,
}

impl Default for ClassifyParams {
    fn default() -> Self {
        ClassifyParams {
            tail_fraction: 0.25,
            osc_frac: 0.02,
            eq_tol: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LongTimeLabel {
    Oscillating,
    ConvergedToEquilibrium,
    NonEquilibriumPlateau,
}

impl LongTimeLabel {
    pub fn as_str(&self) -> &'static str {
        match self {
            LongTimeLabel::Oscillating => "oscillating",
            LongTimeLabel::ConvergedToEquilibrium => "converged",
            LongTimeLabel::NonEquilibriumPlateau => "non-equilibrium-plateau",
        }
    }
}

impl std::fmt::Display for LongTimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub label: LongTimeLabel,
    /// `Oscillating { peak_to_peak }` or `Plateau { level }`.
    pub fit: RateFit,
    pub tail_mean: f64,
    pub peak_to_peak: f64,
    pub global_max: f64,
    /// Equilibrium level closest to the tail mean, if any were supplied.
    pub nearest_level: Option<f64>,
}

/// Labels the tail of a norm series.
///
/// With `m` the tail mean, `ptp` its peak-to-peak and `A` the global maximum:
/// oscillating if `ptp ≥ osc_frac·A`, otherwise a plateau at `m`, converged
/// when `m` is within `eq_tol·A` of one of `equilibrium_levels`.
pub fn classify_longtime(
    series: &[SeriesSample],
    equilibrium_levels: &[f64],
    params: &ClassifyParams,
) -> Result<Classification> {
    check_increasing(series)?;
    if !(params.tail_fraction > 0.0 && params.tail_fraction <= 0.25) {
        return Err(Error::InvalidParameter(format!(
            "tail fraction must lie in (0, 0.25], got {}",
            params.tail_fraction
        )));
    }
    if series.len() < 8 {
        return Err(Error::SeriesTooShort(format!("{} samples", series.len())));
    }
    let t0 = series[0].t;
    let t1 = series[series.len() - 1].t;
    let tail_start = t1 - params.tail_fraction * (t1 - t0);
    let tail: Vec<f64> = series
        .iter()
        .filter(|s| s.t >= tail_start)
        .map(|s| s.value)
        .collect();
    if tail.len() < 2 {
        return Err(Error::SeriesTooShort("tail window holds fewer than 2 samples".into()));
    }

    let global_max = series.iter().fold(f64::NEG_INFINITY, |m, s| m.max(s.value));
    let tail_max = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tail_min = tail.iter().copied().fold(f64::INFINITY, f64::min);
    let ptp = tail_max - tail_min;
    let mean = tail.iter().sum::<f64>() / tail.len() as f64;
    let scale = global_max.abs();

    let nearest_level = equilibrium_levels
        .iter()
        .copied()
        .min_by(|a, b| (a - mean).abs().total_cmp(&(b - mean).abs()));

    let window = (tail_start, t1);
    let (label, model) = if ptp > 0.0 && ptp >= params.osc_frac * scale {
        (LongTimeLabel::Oscillating, RateModel::Oscillating { peak_to_peak: ptp })
    } else {
        let converged = nearest_level
            .map(|lvl| (mean - lvl).abs() <= params.eq_tol * scale)
            .unwrap_or(false);
        let label = if converged {
            LongTimeLabel::ConvergedToEquilibrium
        } else {
            LongTimeLabel::NonEquilibriumPlateau
        };
        (label, RateModel::Plateau { level: mean })
    };

    Ok(Classification {
        label,
        fit: RateFit {
            model,
            r_squared: None,
            window,
            samples: tail.len(),
        },
        tail_mean: mean,
        peak_to_peak: ptp,
        global_max,
        nearest_level,
    })
}
