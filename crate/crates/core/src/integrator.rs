//! Explicit central-difference scheme for `u_tt - Δu + h(t) u_t + f(u) = 0`.
//!
//! The damping term is discretized with the centered average
//! `h_n (u^{n+1} - u^{n-1}) / (2 dt)`, so each step solves
//!
//! ```text
//! (1 + h_n dt/2) u^{n+1} = 2 u^n - (1 - h_n dt/2) u^{n-1} + dt² (Δ_h u^n - f(u^n))
//! ```
//!
//! with `h_n = h(n dt)`. The first step uses a second-order Taylor start that
//! takes `u_tt(0)` from the equation itself.

use std::ops::ControlFlow;

use crate::diagnostics::{Diagnostics, DiagnosticsRow, DEFAULT_ETA};
use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};
use crate::physics::{Damping, Nonlinearity};

/// Any value above this magnitude is treated as a blow-up.
pub const BLOW_UP_THRESHOLD: f64 = 1e12;

pub const DEFAULT_RECORD_EVERY: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchemeConfig {
    pub dt: f64,
    pub t_final: f64,
    pub cfl_safety: f64,
}

impl SchemeConfig {
    pub fn new(dt: f64, t_final: f64, cfl_safety: f64) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be positive, got {dt}")));
        }
        if !(t_final.is_finite() && t_final >= dt) {
            return Err(Error::InvalidParameter(format!(
                "final time {t_final} must be at least dt = {dt}"
            )));
        }
        if !(cfl_safety > 0.0 && cfl_safety <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "CFL safety factor must lie in (0, 1], got {cfl_safety}"
            )));
        }
        Ok(SchemeConfig {
            dt,
            t_final,
            cfl_safety,
        })
    }

    /// dt = 0.05, T = 200.
    pub fn reference() -> Self {
        SchemeConfig {
            dt: 0.05,
            t_final: 200.0,
            cfl_safety: 1.0,
        }
    }

    /// Number of time steps, `round(T / dt)`.
    pub fn n_steps(&self) -> usize {
        ((self.t_final / self.dt).round() as usize).max(1)
    }
}

pub fn cfl_check(cfg: &SchemeConfig, g: &Grid1D) -> bool {
    cfg.dt <= cfg.cfl_safety * g.dx()
}

/// The pieces of the equation that stay fixed during a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveModel {
    pub grid: Grid1D,
    pub nonlinearity: Nonlinearity,
    pub damping: Damping,
}

impl WaveModel {
    pub fn new(grid: Grid1D, nonlinearity: Nonlinearity, damping: Damping) -> Self {
        WaveModel {
            grid,
            nonlinearity,
            damping,
        }
    }
}

/// Two consecutive time levels; `u_curr` lives at `step_index * dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    pub u_prev: Field,
    pub u_curr: Field,
    pub step_index: usize,
    pub dt: f64,
}

impl WaveState {
    pub fn time(&self) -> f64 {
        self.step_index as f64 * self.dt
    }
}

/// Builds level 1 from the initial data:
/// `u¹ = u⁰ + dt v⁰ + dt²/2 (Δ_h u⁰ - h(0) v⁰ - f(u⁰))`.
pub fn bootstrap(u0: &[f64], v0: &[f64], model: &WaveModel, cfg: &SchemeConfig) -> Result<WaveState> {
    let g = &model.grid;
    g.check(u0)?;
    g.check(v0)?;
    if !cfl_check(cfg, g) {
        return Err(Error::InvalidParameter(format!(
            "dt = {} violates the CFL bound {} * dx = {}",
            cfg.dt,
            cfg.cfl_safety,
            cfg.cfl_safety * g.dx()
        )));
    }
    let dt = cfg.dt;
    let h0 = model.damping.eval(0.0);
    let lap = g.laplacian(u0)?;
    let u1: Field = (0..u0.len())
        .map(|i| {
            let acc = lap[i] - h0 * v0[i] - model.nonlinearity.force(u0[i]);
            u0[i] + dt * v0[i] + 0.5 * dt * dt * acc
        })
        .collect();
    if !u1.is_finite() {
        return Err(Error::NonFinite("bootstrap step"));
    }
    Ok(WaveState {
        u_prev: Field::from(u0.to_vec()),
        u_curr: u1,
        step_index: 1,
        dt,
    })
}

/// Advances one step. Fails with [`Error::BlowUp`] carrying the time of the
/// last valid level when the new level is non-finite or exceeds
/// [`BLOW_UP_THRESHOLD`].
pub fn step(s: &WaveState, model: &WaveModel) -> Result<WaveState> {
    let g = &model.grid;
    g.check(&s.u_curr)?;
    g.check(&s.u_prev)?;
    let dt = s.dt;
    let half_hdt = 0.5 * model.damping.eval(s.time()) * dt;
    let denom = 1.0 + half_hdt;
    let mut next = Field::zeros(s.u_curr.len());
    g.laplacian_into(&s.u_curr, &mut next);
    for (i, v) in next.iter_mut().enumerate() {
        let u = s.u_curr[i];
        let rhs = 2.0 * u - (1.0 - half_hdt) * s.u_prev[i]
            + dt * dt * (*v - model.nonlinearity.force(u));
        *v = rhs / denom;
    }
    if next.iter().any(|v| !v.is_finite() || v.abs() > BLOW_UP_THRESHOLD) {
        return Err(Error::BlowUp { t: s.time() });
    }
    Ok(WaveState {
        u_prev: s.u_curr.clone(),
        u_curr: next,
        step_index: s.step_index + 1,
        dt,
    })
}

/// Centered velocity `(u^{n+1} - u^{n-1}) / (2 dt)` at the level of `s.u_curr`.
pub fn velocity(s: &WaveState, s_next: &WaveState) -> Field {
    let inv = 1.0 / (2.0 * s.dt);
    s_next
        .u_curr
        .iter()
        .zip(s.u_prev.iter())
        .map(|(a, b)| (a - b) * inv)
        .collect()
}

fn backward_velocity(s: &WaveState) -> Field {
    let inv = 1.0 / s.dt;
    s.u_curr
        .iter()
        .zip(s.u_prev.iter())
        .map(|(a, b)| (a - b) * inv)
        .collect()
}

#[derive(Debug, Clone)]
pub struct RecordOptions {
    pub record_every: usize,
    /// Reference equilibrium for `‖u - ψ‖` and the Lyapunov functional.
    pub psi: Option<Field>,
    pub eta: f64,
}

impl Default for RecordOptions {
    fn default() -> Self {
        RecordOptions {
            record_every: DEFAULT_RECORD_EVERY,
            psi: None,
            eta: DEFAULT_ETA,
        }
    }
}

/// A recorded sample handed to the observer of [`run`].
#[derive(Debug, Clone, Copy)]
pub struct Sample<'a> {
    pub step: usize,
    pub row: &'a DiagnosticsRow,
    pub u: &'a [f64],
    pub ut: &'a [f64],
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub steps: usize,
    pub final_time: f64,
    /// Displacement at the last computed level.
    pub final_u: Field,
    pub rows_emitted: usize,
}

/// Integrates to `cfg.t_final`, handing a [`Sample`] to `on_sample` at step 0,
/// every `record_every` steps, and at the final step. The observer may stop
/// the run early by returning `ControlFlow::Break`.
///
/// Rows emitted before a blow-up have already been delivered when the error
/// is returned.
pub fn run<F>(
    u0: &[f64],
    v0: &[f64],
    model: &WaveModel,
    cfg: &SchemeConfig,
    opts: &RecordOptions,
    mut on_sample: F,
) -> Result<RunSummary>
where
    F: FnMut(Sample<'_>) -> ControlFlow<()>,
{
    if opts.record_every == 0 {
        return Err(Error::InvalidParameter("record_every must be at least 1".into()));
    }
    let g = &model.grid;
    if let Some(psi) = &opts.psi {
        g.check(psi)?;
    }
    let diag = Diagnostics::new(*g, model.nonlinearity, model.damping, opts.psi.clone(), opts.eta)?;
    let mut state = bootstrap(u0, v0, model, cfg)?;
    let n_steps = cfg.n_steps();
    let mut emitted = 0;

    let row = diag.row(0.0, u0, v0, false)?;
    emitted += 1;
    if on_sample(Sample { step: 0, row: &row, u: u0, ut: v0 }).is_break() {
        return Ok(summary(&state, emitted, u0));
    }

    loop {
        let n = state.step_index;
        if n >= n_steps {
            let ut = backward_velocity(&state);
            let row = diag.row(state.time(), &state.u_curr, &ut, true)?;
            emitted += 1;
            let _ = on_sample(Sample {
                step: n,
                row: &row,
                u: &state.u_curr,
                ut: &ut,
            });
            break;
        }
        let next = step(&state, model)?;
        if n % opts.record_every == 0 {
            let ut = velocity(&state, &next);
            let row = diag.row(state.time(), &state.u_curr, &ut, false)?;
            emitted += 1;
            let flow = on_sample(Sample {
                step: n,
                row: &row,
                u: &state.u_curr,
                ut: &ut,
            });
            if flow.is_break() {
                let u = state.u_curr.clone();
                return Ok(summary(&state, emitted, &u));
            }
        }
        state = next;
    }
    let u = state.u_curr.clone();
    Ok(summary(&state, emitted, &u))
}

fn summary(state: &WaveState, emitted: usize, u: &[f64]) -> RunSummary {
    RunSummary {
        steps: state.step_index,
        final_time: state.time(),
        final_u: Field::from(u.to_vec()),
        rows_emitted: emitted,
    }
}

/// [`run`] collecting every row.
pub fn run_collect(
    u0: &[f64],
    v0: &[f64],
    model: &WaveModel,
    cfg: &SchemeConfig,
    opts: &RecordOptions,
) -> Result<(Vec<DiagnosticsRow>, RunSummary)> {
    let mut rows = Vec::new();
    let summary = run(u0, v0, model, cfg, opts, |s| {
        rows.push(s.row.clone());
        ControlFlow::Continue(())
    })?;
    Ok((rows, summary))
}
