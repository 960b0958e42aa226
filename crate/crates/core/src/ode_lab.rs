//! Single-mode reductions `ω'' + h(t) ω' + μ ω = 0`.
//!
//! Projecting the linear equation onto a discrete eigenmode leaves one
//! damped oscillator per mode. This module integrates it with classical RK4
//! and checks the explicit solution `w(t) = 1 - μ (t+1)^{1+α} / (1+α)`,
//! which tends to 1 while the mode it multiplies is not an equilibrium.

use crate::diagnostics::g_residual;
use crate::error::{Error, Result};
use crate::grid::Grid1D;
use crate::physics::{Damping, Nonlinearity};

pub const DEFAULT_DT: f64 = 0.01;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeOde {
    pub mu: f64,
    pub damping: Damping,
    pub omega0: f64,
    pub omega0_dot: f64,
    pub dt: f64,
    pub t_final: f64,
}

impl ModeOde {
    pub fn new(mu: f64, damping: Damping, omega0: f64, omega0_dot: f64, t_final: f64) -> Result<Self> {
        let m = ModeOde {
            mu,
            damping,
            omega0,
            omega0_dot,
            dt: DEFAULT_DT,
            t_final,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn with_dt(mut self, dt: f64) -> Result<Self> {
        self.dt = dt;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<()> {
        if !(self.mu.is_finite() && self.mu > 0.0) {
            return Err(Error::InvalidParameter(format!("mu must be > 0, got {}", self.mu)));
        }
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::InvalidParameter(format!("dt must be > 0, got {}", self.dt)));
        }
        if !(self.t_final.is_finite() && self.t_final >= 0.0) {
            return Err(Error::InvalidParameter(format!("T must be >= 0, got {}", self.t_final)));
        }
        if !(self.omega0.is_finite() && self.omega0_dot.is_finite()) {
            return Err(Error::NonFinite("initial mode data"));
        }
        Ok(())
    }

    /// `½ω'² + ½μω²`
    pub fn energy(&self, omega: f64, omega_dot: f64) -> f64 {
        0.5 * omega_dot * omega_dot + 0.5 * self.mu * omega * omega
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeSample {
    pub t: f64,
    pub omega: f64,
    pub omega_dot: f64,
}

pub fn integrate_mode(m: &ModeOde) -> Result<Vec<ModeSample>> {
    m.validate()?;
    let n = (m.t_final / m.dt).round() as usize;
    let rhs = |t: f64, w: f64, v: f64| (v, -m.damping.eval(t) * v - m.mu * w);

    let mut out = Vec::with_capacity(n + 1);
    let (mut w, mut v) = (m.omega0, m.omega0_dot);
    out.push(ModeSample { t: 0.0, omega: w, omega_dot: v });
    let h = m.dt;
    for i in 0..n {
        let t = i as f64 * h;
        // Substep where the damping makes the step stiff; |z| stays inside
        // the RK4 stability region.
        let stiff = m.damping.eval(t).abs().max(m.damping.eval(t + h).abs()) * h;
        let sub = (stiff.ceil() as usize).max(1);
        let hs = h / sub as f64;
        for j in 0..sub {
            let ts = t + j as f64 * hs;
            let (k1w, k1v) = rhs(ts, w, v);
            let (k2w, k2v) = rhs(ts + 0.5 * hs, w + 0.5 * hs * k1w, v + 0.5 * hs * k1v);
            let (k3w, k3v) = rhs(ts + 0.5 * hs, w + 0.5 * hs * k2w, v + 0.5 * hs * k2v);
            let (k4w, k4v) = rhs(ts + hs, w + hs * k3w, v + hs * k3v);
            w += hs / 6.0 * (k1w + 2.0 * k2w + 2.0 * k3w + k4w);
            v += hs / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
        }
        if !(w.is_finite() && v.is_finite()) {
            return Err(Error::BlowUp { t });
        }
        out.push(ModeSample {
            t: (i + 1) as f64 * h,
            omega: w,
            omega_dot: v,
        });
    }
    Ok(out)
}

/// `h(t) = (t+1)^{-α} - μ(t+1)/(1+α) - α/(t+1)`, the coefficient for which
/// `w(t) = 1 - μ(t+1)^{1+α}/(1+α)` solves `w'' + h w' + μ w = 0`.
pub fn explicit_solution_damping(mu: f64, alpha: f64) -> Result<Damping> {
    if !(mu.is_finite() && mu > 0.0) {
        return Err(Error::InvalidParameter(format!("mu must be > 0, got {mu}")));
    }
    if !(alpha.is_finite() && alpha < -1.0) {
        return Err(Error::InvalidParameter(format!("alpha must be < -1, got {alpha}")));
    }
    Ok(Damping::ExplicitSolution { mu, alpha })
}

/// The explicit profile `w` with its first two derivatives.
pub fn explicit_profile(mu: f64, alpha: f64, t: f64) -> (f64, f64, f64) {
    let s = t + 1.0;
    let w = 1.0 - mu * s.powf(1.0 + alpha) / (1.0 + alpha);
    let w1 = -mu * s.powf(alpha);
    let w2 = -mu * alpha * s.powf(alpha - 1.0);
    (w, w1, w2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExplicitSolutionReport {
    pub mu: f64,
    pub alpha: f64,
    pub mode: usize,
    /// Mass `b = μ - λ_k` of the linear nonlinearity.
    pub b: f64,
    pub w0: f64,
    pub w0_dot: f64,
    /// Largest `|w'' + h w' + μ w|` over the sample times.
    pub ode_residual: f64,
    /// Largest max-norm of `u_tt - Δ_h u + h u_t + b u` for `u = w e_k`.
    pub pde_residual: f64,
    /// `(T, ‖u(T) - e_k‖_{L²})`.
    pub limit_distances: Vec<(f64, f64)>,
    pub hm1_g_mode: f64,
    pub hm1_mode: f64,
}

pub const CHECK_TIMES: usize = 50;
pub const CHECK_HORIZON: f64 = 100.0;

pub fn explicit_solution_check(mu: f64, alpha: f64, grid: &Grid1D, k: usize) -> Result<ExplicitSolutionReport> {
    let h = explicit_solution_damping(mu, alpha)?;
    let ek = grid.eigenmode(k)?;
    let b = mu - grid.eigenvalue(k);
    let lap = grid.laplacian(&ek)?;

    let mut ode_residual: f64 = 0.0;
    let mut pde_residual: f64 = 0.0;
    for i in 0..CHECK_TIMES {
        let t = CHECK_HORIZON * i as f64 / (CHECK_TIMES - 1) as f64;
        let (w, w1, w2) = explicit_profile(mu, alpha, t);
        let ht = h.eval(t);
        ode_residual = ode_residual.max((w2 + ht * w1 + mu * w).abs());
        let worst = ek
            .iter()
            .zip(lap.iter())
            .map(|(&e, &le)| (w2 * e - w * le + ht * w1 * e + b * w * e).abs())
            .fold(0.0, f64::max);
        pde_residual = pde_residual.max(worst);
    }

    let limit_distances = [1e1, 1e2, 1e3, 1e4, 1e5]
        .iter()
        .map(|&t| {
            let (w, _, _) = explicit_profile(mu, alpha, t);
            let diff = ek.scaled(w - 1.0);
            grid.l2_norm(&diff).map(|d| (t, d))
        })
        .collect::<Result<Vec<_>>>()?;

    let nl = Nonlinearity::LinearMass { b };
    let g = g_residual(&ek, &nl, grid)?;
    let (w0, w0_dot, _) = explicit_profile(mu, alpha, 0.0);
    Ok(ExplicitSolutionReport {
        mu,
        alpha,
        mode: k,
        b,
        w0,
        w0_dot,
        ode_residual,
        pde_residual,
        limit_distances,
        hm1_g_mode: grid.hm1_norm(&g)?,
        hm1_mode: grid.hm1_norm(&ek)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn max_err(traj: &[ModeSample], exact: impl Fn(f64) -> f64) -> f64 {
        traj.iter().map(|s| (s.omega - exact(s.t)).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn harmonic() {
        // global RK4 error ~ T ω⁵ dt⁴ / 120, so ω = 2 needs a finer step
        let m = ModeOde::new(4.0, Damping::Zero, 1.0, 0.0, 10.0).unwrap().with_dt(0.005).unwrap();
        let traj = integrate_mode(&m).unwrap();
        assert_eq!(traj.len(), 2001);
        assert!(max_err(&traj, |t| (2.0 * t).cos()) < 1e-8);
    }

    #[test]
    fn underdamped() {
        // roots -1/2 ± i/2; ω(0) = 1, ω'(0) = 0 gives A = 1, B = 1
        let m = ModeOde::new(0.5, Damping::Constant { c: 1.0 }, 1.0, 0.0, 10.0).unwrap();
        let traj = integrate_mode(&m).unwrap();
        let exact = |t: f64| (-t / 2.0).exp() * ((t / 2.0).cos() + (t / 2.0).sin());
        assert!(max_err(&traj, exact) < 1e-8);
    }

    #[test]
    fn critically_damped() {
        let m = ModeOde::new(1.0, Damping::Constant { c: 2.0 }, 1.0, 0.0, 10.0).unwrap();
        let traj = integrate_mode(&m).unwrap();
        assert!(max_err(&traj, |t| (1.0 + t) * (-t).exp()) < 1e-8);
    }

    #[test]
    fn overdamped() {
        // roots -1 and -2
        let m = ModeOde::new(2.0, Damping::Constant { c: 3.0 }, 1.0, 0.0, 10.0).unwrap();
        let traj = integrate_mode(&m).unwrap();
        assert!(max_err(&traj, |t| 2.0 * (-t).exp() - (-2.0 * t).exp()) < 1e-8);
    }

    #[test]
    fn integrable_damping_keeps_oscillating() {
        let m = ModeOde::new(1.0, Damping::PowerDecay { c: 1.0, alpha: 2.0 }, 1.0, 0.0, 200.0).unwrap();
        let traj = integrate_mode(&m).unwrap();
        let e0 = m.energy(1.0, 0.0);
        let last = traj.last().unwrap();
        assert!(m.energy(last.omega, last.omega_dot) >= 0.1 * e0);
        let tail = traj.iter().filter(|s| s.t >= 150.0).map(|s| s.omega.abs()).fold(0.0, f64::max);
        assert!(tail >= 0.5);
    }

    #[test]
    fn slow_decay_still_dissipates() {
        for alpha in [0.0, 0.5, 0.9] {
            let m = ModeOde::new(1.0, Damping::PowerDecay { c: 1.0, alpha }, 1.0, 0.0, 200.0).unwrap();
            let traj = integrate_mode(&m).unwrap();
            let last = traj.last().unwrap();
            assert!(m.energy(last.omega, last.omega_dot) <= 1e-2 * m.energy(1.0, 0.0), "alpha {alpha}");
        }
    }

    #[test]
    fn invalid_inputs() {
        assert!(ModeOde::new(0.0, Damping::Zero, 1.0, 0.0, 1.0).is_err());
        let m = ModeOde::new(1.0, Damping::Zero, 1.0, 0.0, 1.0).unwrap();
        assert!(m.with_dt(0.0).is_err());
        assert!(explicit_solution_damping(1.0, -1.0).is_err());
        assert!(explicit_solution_damping(0.0, -2.0).is_err());
    }

    #[test]
    fn explicit_coefficient_at_zero() {
        let h = explicit_solution_damping(1.0, -2.0).unwrap();
        assert_relative_eq!(h.eval(0.0), 4.0, epsilon = 1e-15);
        for i in 0..=2000 {
            assert!(h.eval(i as f64 * 0.1) > 0.0);
        }
    }

    #[test]
    fn explicit_profile_solves_its_ode() {
        for &(mu, alpha) in &[(1.0, -2.0), (0.3, -1.5), (2.0, -3.0)] {
            let h = explicit_solution_damping(mu, alpha).unwrap();
            for i in 0..CHECK_TIMES {
                let t = CHECK_HORIZON * i as f64 / (CHECK_TIMES - 1) as f64;
                let (w, w1, w2) = explicit_profile(mu, alpha, t);
                assert!((w2 + h.eval(t) * w1 + mu * w).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn integrator_follows_explicit_solution() {
        let (mu, alpha) = (1.0, -2.0);
        let (w0, w1, _) = explicit_profile(mu, alpha, 0.0);
        let m = ModeOde::new(mu, explicit_solution_damping(mu, alpha).unwrap(), w0, w1, 20.0)
            .unwrap()
            .with_dt(0.001)
            .unwrap();
        let traj = integrate_mode(&m).unwrap();
        assert!(max_err(&traj, |t| explicit_profile(mu, alpha, t).0) < 1e-8);
    }

    #[test]
    fn growing_damping_is_substepped() {
        // h(t) ~ t² here, so h·dt passes the RK4 stability limit near t = 16.
        let (mu, alpha) = (1.0, -2.0);
        let (w0, w1, _) = explicit_profile(mu, alpha, 0.0);
        let m = ModeOde::new(mu, explicit_solution_damping(mu, alpha).unwrap(), w0, w1, 200.0).unwrap();
        let traj = integrate_mode(&m).unwrap();
        assert_eq!(traj.len(), 20001);
        assert!(max_err(&traj, |t| explicit_profile(mu, alpha, t).0) < 1e-6);
    }

    #[test]
    fn explicit_check_report() {
        let g = Grid1D::from_spacing(20.0, 0.1).unwrap();
        let r = explicit_solution_check(1.0, -2.0, &g, 1).unwrap();
        assert_relative_eq!(r.w0, 2.0, epsilon = 1e-15);
        assert_relative_eq!(r.w0_dot, -1.0, epsilon = 1e-15);
        assert!(r.ode_residual <= 1e-10);
        assert!(r.pde_residual <= 1e-10);
        assert!(r.limit_distances.windows(2).all(|p| p[1].1 < p[0].1));
        assert!(r.limit_distances.last().unwrap().1 < 1e-4);
        assert_relative_eq!(r.hm1_g_mode, r.mu * r.hm1_mode, max_relative = 1e-10);
        assert!(r.hm1_g_mode > 0.0);
        assert!(explicit_solution_check(1.0, -2.0, &g, 400).is_err());
    }
}
