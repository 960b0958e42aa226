//! Stationary solutions of `-Δψ + f(ψ) = 0` and a numerical probe of the
//! Łojasiewicz gradient inequality around them.

use std::f64::consts::PI;

use crate::diagnostics::{g_residual, stationary_energy};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};
use crate::physics::Nonlinearity;
use crate::stats::{fit_line, r_squared};
use crate::tridiag;

pub const DEFAULT_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_ITER: usize = 100;
/// Halvings tried before a Newton step is declared stalled.
pub const MAX_HALVINGS: usize = 30;
/// Samples with a smaller energy gap are dropped from the probe fit.
pub const MIN_ENERGY_GAP: f64 = 1e-13;

#[derive(Debug, Clone, PartialEq)]
pub struct EquilibriumResult {
    pub psi: Field,
    /// `‖G(ψ)‖_{H⁻¹}` of the returned iterate.
    pub residual_hm1: f64,
    pub iterations: usize,
    pub converged: bool,
    /// `E_0(ψ)`.
    pub e0: f64,
    /// Residual before the first step and after each accepted step.
    pub residual_history: Vec<f64>,
}

/// Positive bump `amplitude · cos(πx/(2L))` vanishing at both ends.
pub fn bump_guess(g: &Grid1D, amplitude: f64) -> Field {
    let l = g.half_length();
    g.sample(|x| amplitude * (PI * x / (2.0 * l)).cos())
}

/// Canonical seed for the nontrivial Klein-Gordon equilibrium: a bump of
/// amplitude `√|a|`, the flat-interior balance `a ψ + ψ³ = 0` for p = 3.
pub fn canonical_seed(g: &Grid1D, nl: &Nonlinearity) -> Field {
    match *nl {
        Nonlinearity::KleinGordon { a, p } => bump_guess(g, a.abs().powf(1.0 / (p - 1.0).max(1.0))),
        _ => bump_guess(g, 0.1),
    }
}

/// Damped Newton iteration on `Φ(v) = -Δ_h v + f(v)`.
///
/// Each step solves `(-Δ_h + diag f'(v)) δ = -Φ(v)` and halves the step
/// until the H⁻¹ residual decreases. Running out of iterations, or a step
/// that cannot be made to decrease the residual, returns the best iterate
/// with `converged = false`.
pub fn solve_equilibrium(
    guess: &[f64],
    nl: &Nonlinearity,
    g: &Grid1D,
    tol: f64,
    max_iter: usize,
) -> Result<EquilibriumResult> {
    g.check(guess)?;
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let n = guess.len();
    let inv_dx2 = 1.0 / (g.dx() * g.dx());
    let off = vec![-inv_dx2; n.saturating_sub(1)];

    let mut v = Field::from(guess.to_vec());
    let mut phi = g_residual(&v, nl, g)?;
    let mut res = g.hm1_norm(&phi)?;
    let mut history = vec![res];
    let mut iterations = 0;

    while res > tol && iterations < max_iter {
        let diag: Vec<f64> = v
            .iter()
            .map(|&s| 2.0 * inv_dx2 + nl.force_derivative(s))
            .collect();
        let rhs: Vec<f64> = phi.iter().map(|r| -r).collect();
        let delta = tridiag::solve(&off, &diag, &off, &rhs)?;

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..=MAX_HALVINGS {
            let trial = v.add_scaled(scale, &delta);
            let trial_phi = g_residual(&trial, nl, g)?;
            let trial_res = g.hm1_norm(&trial_phi)?;
            if trial_res < res {
                accepted = Some((trial, trial_phi, trial_res));
                break;
            }
            scale *= 0.5;
        }
        let Some((trial, trial_phi, trial_res)) = accepted else {
            break;
        };
        v = trial;
        phi = trial_phi;
        res = trial_res;
        history.push(res);
        iterations += 1;
    }

    let e0 = stationary_energy(&v, nl, g)?;
    Ok(EquilibriumResult {
        psi: v,
        residual_hm1: res,
        iterations,
        converged: res <= tol,
        e0,
        residual_history: history,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct LojasiewiczProbe {
    /// Common slope of `log ‖G‖_{H⁻¹}` against `log |ΔE_0|`, an estimate of `1 - θ`.
    pub slope: f64,
    /// R² of the common-slope fit.
    pub r_squared: f64,
    pub epsilon_range: (f64, f64),
    pub direction_count: usize,
    /// Slope along each direction separately (`NaN` when a direction has
    /// fewer than two usable samples).
    pub direction_slopes: Vec<f64>,
    /// Single-line fit through all samples, with one shared intercept.
    pub pooled_slope: f64,
    pub pooled_r_squared: f64,
    pub samples: usize,
}

/// Geometric sequence of `count` values from `lo` to `hi`.
pub fn geometric_epsilons(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let ratio = (hi / lo).ln() / (count.max(2) - 1) as f64;
    (0..count).map(|i| lo * (ratio * i as f64).exp()).collect()
}

/// ε from 1e-3 to 1e-1, 12 points.
pub fn default_epsilons() -> Vec<f64> {
    geometric_epsilons(1e-3, 1e-1, 12)
}

/// Measures the exponent in `‖G(v)‖_{H⁻¹} ≥ c |E_0(v) - E_0(ψ)|^{1-θ}` along
/// the rays `v = ψ + εφ`.
///
/// Directions are rescaled to unit H¹ seminorm. Each direction has its own
/// constant, so the fit uses one slope shared by all directions and one
/// intercept per direction; the single-intercept fit is reported alongside.
pub fn lojasiewicz_probe(
    psi: &EquilibriumResult,
    nl: &Nonlinearity,
    g: &Grid1D,
    directions: &[Field],
    epsilons: &[f64],
) -> Result<LojasiewiczProbe> {
    if !psi.converged {
        return Err(Error::InvalidParameter("probe needs a converged equilibrium".into()));
    }
    if epsilons.len() < 6 {
        return Err(Error::InvalidParameter(format!(
            "need at least 6 epsilon values, got {}",
            epsilons.len()
        )));
    }
    if epsilons.iter().any(|&e| !(e > 0.0 && e <= 1.0)) {
        return Err(Error::InvalidParameter("epsilons must lie in (0, 1]".into()));
    }
    if directions.is_empty() {
        return Err(Error::InvalidParameter("no probe directions".into()));
    }
    g.check(&psi.psi)?;

    let mut groups: Vec<(Vec<f64>, Vec<f64>)> = Vec::with_capacity(directions.len());
    for dir in directions {
        let norm = g.h1_seminorm(dir)?;
        if !(norm > 0.0) {
            return Err(Error::InvalidParameter("probe direction is zero".into()));
        }
        let unit = dir.scaled(1.0 / norm);
        let mut xs = Vec::new();
        let mut ys = Vec::new();
        for &eps in epsilons {
            let v = psi.psi.add_scaled(eps, &unit);
            let gap = (stationary_energy(&v, nl, g)? - psi.e0).abs();
            let grad = g.hm1_norm(&g_residual(&v, nl, g)?)?;
            if gap > MIN_ENERGY_GAP && grad > 0.0 {
                xs.push(gap.ln());
                ys.push(grad.ln());
            }
        }
        groups.push((xs, ys));
    }

    let samples: usize = groups.iter().map(|(x, _)| x.len()).sum();
    if samples < 4 {
        return Err(Error::DegenerateSamples { found: samples });
    }

    let direction_slopes = groups
        .iter()
        .map(|(x, y)| fit_line(x, y).map(|f| f.slope).unwrap_or(f64::NAN))
        .collect();

    // within-direction centering removes the per-direction intercepts
    let mut cx = Vec::with_capacity(samples);
    let mut cy = Vec::with_capacity(samples);
    for (x, y) in groups.iter().filter(|(x, _)| x.len() >= 2) {
        let mx = x.iter().sum::<f64>() / x.len() as f64;
        let my = y.iter().sum::<f64>() / y.len() as f64;
        cx.extend(x.iter().map(|v| v - mx));
        cy.extend(y.iter().map(|v| v - my));
    }
    let sxx: f64 = cx.iter().map(|x| x * x).sum();
    if cx.len() < 4 || sxx == 0.0 {
        return Err(Error::DegenerateSamples { found: cx.len() });
    }
    let slope = cx.iter().zip(&cy).map(|(x, y)| x * y).sum::<f64>() / sxx;
    let within_r2 = r_squared(cy.iter().copied(), cx.iter().map(|x| slope * x), 0.0);

    let all_x: Vec<f64> = groups.iter().flat_map(|(x, _)| x.iter().copied()).collect();
    let all_y: Vec<f64> = groups.iter().flat_map(|(_, y)| y.iter().copied()).collect();
    let pooled = fit_line(&all_x, &all_y)?;

    let lo = epsilons.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = epsilons.iter().copied().fold(0.0, f64::max);
    Ok(LojasiewiczProbe {
        slope,
        r_squared: within_r2,
        epsilon_range: (lo, hi),
        direction_count: directions.len(),
        direction_slopes,
        pooled_slope: pooled.slope,
        pooled_r_squared: pooled.r_squared,
        samples,
    })
}
