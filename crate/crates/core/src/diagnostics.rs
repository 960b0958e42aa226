//! Scalar functionals evaluated along trajectories: energies, the residual
//! `G(u) = -Δu + f(u)` in H⁻¹, the Lyapunov functional and the dissipation
//! identity `E' = -h ‖u_t‖²`.

use crate::error::{Error, Result};
use crate::grid::{dot, Field, Grid1D};
use crate::physics::{Damping, Nonlinearity};

/// Default weight of the cross term in the Lyapunov functional.
pub const DEFAULT_ETA: f64 = 0.01;

/// One recorded sample of a trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRow {
    pub t: f64,
    pub l2_u: f64,
    pub h1_u: f64,
    pub l2_ut: f64,
    pub hm1_g: f64,
    /// Total energy `E_u`.
    pub energy: f64,
    /// Stationary energy `E_0(u)`.
    pub stationary_energy: f64,
    pub lyapunov: f64,
    /// `‖u - ψ‖_{L²}` when a reference equilibrium was supplied.
    pub l2_dist_psi: Option<f64>,
    /// Set on the final sample of a run, where `u_t` is a backward difference.
    pub one_sided_velocity: bool,
}

/// `E_0(v) = ½|v|²_{H¹} + Σ F(v_i) dx`.
pub fn stationary_energy(v: &[f64], nl: &Nonlinearity, g: &Grid1D) -> Result<f64> {
    let h1 = g.h1_seminorm(v)?;
    let pot: f64 = v.iter().map(|&s| nl.potential(s)).sum::<f64>() * g.dx();
    Ok(0.5 * h1 * h1 + pot)
}

/// `E_u = E_0(u) + ½‖u_t‖²`.
pub fn total_energy(u: &[f64], ut: &[f64], nl: &Nonlinearity, g: &Grid1D) -> Result<f64> {
    let kinetic = g.l2_norm(ut)?;
    Ok(stationary_energy(u, nl, g)? + 0.5 * kinetic * kinetic)
}

/// `G(v) = -Δ_h v + f(v)`.
pub fn g_residual(v: &[f64], nl: &Nonlinearity, g: &Grid1D) -> Result<Field> {
    let lap = g.laplacian(v)?;
    Ok(v.iter()
        .zip(lap.iter())
        .map(|(&s, &l)| -l + nl.force(s))
        .collect())
}

/// Weight exponent used in the cross term: the damping's α, or 0 when the
/// damping is not a power law.
fn weight_exponent(d: &Damping) -> f64 {
    d.exponent().unwrap_or(0.0)
}

fn check_eta(eta: f64) -> Result<()> {
    if !(0.0..1.0).contains(&eta) {
        return Err(Error::InvalidParameter(format!("eta must lie in [0, 1), got {eta}")));
    }
    Ok(())
}

/// `H(t) = E_u - E_0(ψ) + η (t+1)^{-α} ⟨G(u), u_t⟩_{H⁻¹}`.
#[allow(clippy::too_many_arguments)]
pub fn lyapunov(
    u: &[f64],
    ut: &[f64],
    nl: &Nonlinearity,
    d: &Damping,
    g: &Grid1D,
    psi: &[f64],
    eta: f64,
    t: f64,
) -> Result<f64> {
    check_eta(eta)?;
    let e_u = total_energy(u, ut, nl, g)?;
    let e_psi = stationary_energy(psi, nl, g)?;
    let cross = g.hm1_inner(&g_residual(u, nl, g)?, ut)?;
    Ok(e_u - e_psi + eta * (t + 1.0).powf(-weight_exponent(d)) * cross)
}

/// Evaluates [`DiagnosticsRow`]s for one model, caching `E_0(ψ)`.
#[derive(Debug, Clone)]
pub struct Diagnostics {
    grid: Grid1D,
    nonlinearity: Nonlinearity,
    damping: Damping,
    psi: Option<Field>,
    psi_energy: f64,
    eta: f64,
}

impl Diagnostics {
    /// Without a reference equilibrium the Lyapunov functional is taken
    /// relative to ψ = 0.
    pub fn new(
        grid: Grid1D,
        nonlinearity: Nonlinearity,
        damping: Damping,
        psi: Option<Field>,
        eta: f64,
    ) -> Result<Self> {
        check_eta(eta)?;
        let psi_energy = match &psi {
            Some(p) => stationary_energy(p, &nonlinearity, &grid)?,
            None => 0.0,
        };
        Ok(Diagnostics {
            grid,
            nonlinearity,
            damping,
            psi,
            psi_energy,
            eta,
        })
    }

    pub fn row(&self, t: f64, u: &[f64], ut: &[f64], one_sided_velocity: bool) -> Result<DiagnosticsRow> {
        let g = &self.grid;
        let nl = &self.nonlinearity;
        let residual = g_residual(u, nl, g)?;
        let inv_residual = g.inverse_laplacian(&residual)?;
        let hm1_g = (dot(&residual, &inv_residual) * g.dx()).max(0.0).sqrt();
        // ⟨G, u_t⟩_{H⁻¹} = ⟨(-Δ)⁻¹G, u_t⟩ by symmetry
        let cross = dot(&inv_residual, ut) * g.dx();

        let l2_u = g.l2_norm(u)?;
        let h1_u = g.h1_seminorm(u)?;
        let l2_ut = g.l2_norm(ut)?;
        let pot: f64 = u.iter().map(|&s| nl.potential(s)).sum::<f64>() * g.dx();
        let stationary = 0.5 * h1_u * h1_u + pot;
        let energy = stationary + 0.5 * l2_ut * l2_ut;
        let weight = (t + 1.0).powf(-weight_exponent(&self.damping));
        let lyap = energy - self.psi_energy + self.eta * weight * cross;
        let l2_dist_psi = match &self.psi {
            Some(p) => {
                let diff: Vec<f64> = u.iter().zip(p.iter()).map(|(a, b)| a - b).collect();
                Some(g.l2_norm(&diff)?)
            }
            None => None,
        };
        Ok(DiagnosticsRow {
            t,
            l2_u,
            h1_u,
            l2_ut,
            hm1_g,
            energy,
            stationary_energy: stationary,
            lyapunov: lyap,
            l2_dist_psi,
            one_sided_velocity,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }
}

fn check_consecutive(rows: &[DiagnosticsRow]) -> Result<()> {
    if rows.len() < 2 {
        return Ok(());
    }
    let spacing = rows[1].t - rows[0].t;
    if !(spacing > 0.0) {
        return Err(Error::NonConsecutiveRows);
    }
    for w in rows.windows(2) {
        let dt = w[1].t - w[0].t;
        if !(dt > 0.0) {
            return Err(Error::NonConsecutiveRows);
        }
        // the final sample may sit closer when T is not a multiple of the
        // recording interval
        if dt > spacing * (1.0 + 1e-9) {
            return Err(Error::NonConsecutiveRows);
        }
    }
    Ok(())
}

/// Pointwise defect of the dissipation identity at each interior sample:
/// `|(E(t₊) - E(t₋))/(t₊ - t₋) + h(t) ‖u_t(t)‖²|`, the energy derivative
/// taken as a centered difference over the neighbouring samples.
///
/// Samples whose neighbour carries a one-sided velocity are skipped, so the
/// result has at most `rows.len() - 2` entries.
pub fn dissipation_residual(rows: &[DiagnosticsRow], d: &Damping) -> Result<Vec<f64>> {
    check_consecutive(rows)?;
    Ok(rows
        .windows(3)
        .filter(|w| !w.iter().any(|r| r.one_sided_velocity))
        .map(|w| {
            let de = (w[2].energy - w[0].energy) / (w[2].t - w[0].t);
            (de + d.eval(w[1].t) * w[1].l2_ut * w[1].l2_ut).abs()
        })
        .collect())
}

/// Empirical constant in the Lyapunov decay estimate,
/// `-H'(t) / ((t+1)^{-α}(‖u_t‖² + ‖G(u)‖²_{H⁻¹}))`, at each interior sample.
pub fn lyapunov_ratios(rows: &[DiagnosticsRow], d: &Damping) -> Result<Vec<(f64, f64)>> {
    check_consecutive(rows)?;
    let alpha = weight_exponent(d);
    Ok(rows
        .windows(3)
        .filter(|w| !w.iter().any(|r| r.one_sided_velocity))
        .map(|w| {
            let dh = (w[2].lyapunov - w[0].lyapunov) / (w[2].t - w[0].t);
            let scale = (w[1].t + 1.0).powf(-alpha)
                * (w[1].l2_ut * w[1].l2_ut + w[1].hm1_g * w[1].hm1_g);
            (w[1].t, -dh / scale)
        })
        .collect())
}
