//! Model families: nonlinear forces, damping coefficients and initial data.

use crate::error::{Error, Result};
use crate::grid::{Field, Grid1D};

/// Nonlinear force `f(u)` together with its potential `F(u) = ∫₀ᵘ f`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Nonlinearity {
    /// `f(u) = b sin u`, b > 0.
    SineGordon { b: f64 },
    /// `f(u) = a u + |u|^{p-1} u`, p ≥ 1.
    KleinGordon { a: f64, p: f64 },
    /// `f(u) = b u`.
    LinearMass { b: f64 },
}

impl Nonlinearity {
    pub fn sine_gordon(b: f64) -> Result<Self> {
        if !(b.is_finite() && b > 0.0) {
            return Err(Error::InvalidParameter(format!(
                "sine-Gordon needs b > 0, got {b}"
            )));
        }
        Ok(Nonlinearity::SineGordon { b })
    }

    pub fn klein_gordon(a: f64, p: f64) -> Result<Self> {
        if !a.is_finite() || !(p.is_finite() && p >= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "Klein-Gordon needs finite a and p >= 1, got a = {a}, p = {p}"
            )));
        }
        Ok(Nonlinearity::KleinGordon { a, p })
    }

    pub fn linear_mass(b: f64) -> Result<Self> {
        if !b.is_finite() {
            return Err(Error::InvalidParameter(format!("mass must be finite, got {b}")));
        }
        Ok(Nonlinearity::LinearMass { b })
    }

    pub fn force(&self, s: f64) -> f64 {
        match *self {
            Nonlinearity::SineGordon { b } => b * s.sin(),
            // sign(s)|s|^p, odd for every real p
            Nonlinearity::KleinGordon { a, p } => a * s + s.signum() * s.abs().powf(p),
            Nonlinearity::LinearMass { b } => b * s,
        }
    }

    pub fn force_derivative(&self, s: f64) -> f64 {
        match *self {
            Nonlinearity::SineGordon { b } => b * s.cos(),
            Nonlinearity::KleinGordon { a, p } => {
                if p == 1.0 {
                    a + 1.0
                } else {
                    a + p * s.abs().powf(p - 1.0)
                }
            }
            Nonlinearity::LinearMass { b } => b,
        }
    }

    pub fn potential(&self, s: f64) -> f64 {
        match *self {
            Nonlinearity::SineGordon { b } => b * (1.0 - s.cos()),
            Nonlinearity::KleinGordon { a, p } => {
                0.5 * a * s * s + s.abs().powf(p + 1.0) / (p + 1.0)
            }
            Nonlinearity::LinearMass { b } => 0.5 * b * s * s,
        }
    }

    /// Componentwise `f(v)`.
    pub fn apply(&self, v: &[f64]) -> Field {
        v.iter().map(|&s| self.force(s)).collect()
    }

    /// Łojasiewicz exponent at the equilibria of this model, given the first
    /// Dirichlet eigenvalue `mu0` of the domain.
    pub fn lojasiewicz_theta(&self, mu0: f64) -> f64 {
        match *self {
            Nonlinearity::SineGordon { .. } | Nonlinearity::LinearMass { .. } => 0.5,
            Nonlinearity::KleinGordon { a, p } => {
                if a > -mu0 {
                    0.5
                } else {
                    1.0 / (p + 1.0)
                }
            }
        }
    }
}

/// Free-function form of [`Nonlinearity::lojasiewicz_theta`].
pub fn lojasiewicz_theta(nl: &Nonlinearity, mu0: f64) -> f64 {
    nl.lojasiewicz_theta(mu0)
}

/// Time-dependent friction coefficient `h(t)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Damping {
    Zero,
    Constant { c: f64 },
    /// `c (t+1)^{-alpha}`
    PowerDecay { c: f64, alpha: f64 },
    /// `c t^{alpha}`
    PowerGrowth { c: f64, alpha: f64 },
    /// Coefficient for which `1 - mu (t+1)^{1+alpha} / (1+alpha)` solves the
    /// single-mode equation exactly; see [`crate::ode_lab::explicit_solution_damping`].
    ExplicitSolution { mu: f64, alpha: f64 },
}

impl Damping {
    pub fn constant(c: f64) -> Result<Self> {
        if !(c.is_finite() && c >= 0.0) {
            return Err(Error::InvalidParameter(format!("damping constant must be >= 0, got {c}")));
        }
        Ok(Damping::Constant { c })
    }

    pub fn power_decay(c: f64, alpha: f64) -> Result<Self> {
        check_power(c, alpha)?;
        Ok(Damping::PowerDecay { c, alpha })
    }

    pub fn power_growth(c: f64, alpha: f64) -> Result<Self> {
        check_power(c, alpha)?;
        Ok(Damping::PowerGrowth { c, alpha })
    }

    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Damping::Zero => 0.0,
            Damping::Constant { c } => c,
            Damping::PowerDecay { c, alpha } => c * (t + 1.0).powf(-alpha),
            Damping::PowerGrowth { c, alpha } => c * t.powf(alpha),
            Damping::ExplicitSolution { mu, alpha } => {
                let s = t + 1.0;
                s.powf(-alpha) - mu * s / (1.0 + alpha) - alpha / s
            }
        }
    }

    /// The power-law exponent α of the damping; `None` for [`Damping::ExplicitSolution`],
    /// which is not of power type.
    pub fn exponent(&self) -> Option<f64> {
        match *self {
            Damping::Zero | Damping::Constant { .. } => Some(0.0),
            Damping::PowerDecay { alpha, .. } | Damping::PowerGrowth { alpha, .. } => Some(alpha),
            Damping::ExplicitSolution { .. } => None,
        }
    }

    /// Whether α lies in the convergence window `[0, θ/(1-θ))`.
    pub fn admissibility(&self, theta: f64) -> Admissibility {
        match self.exponent() {
            None => Admissibility::NotApplicable,
            Some(alpha) if alpha >= 0.0 && alpha < theta / (1.0 - theta) => {
                Admissibility::Admissible
            }
            Some(_) => Admissibility::Inadmissible,
        }
    }
}

fn check_power(c: f64, alpha: f64) -> Result<()> {
    if !(c.is_finite() && c > 0.0) || !(alpha.is_finite() && alpha >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "power damping needs c > 0 and alpha >= 0, got c = {c}, alpha = {alpha}"
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Admissibility {
    Admissible,
    Inadmissible,
    /// The damping is not a power law, so the window does not apply.
    NotApplicable,
}

impl Admissibility {
    pub fn is_admissible(self) -> bool {
        self == Admissibility::Admissible
    }
}

pub fn admissible_alpha(d: &Damping, theta: f64) -> Admissibility {
    d.admissibility(theta)
}

/// The seven damping coefficients h₀..h₆ of the reference experiments.
pub fn preset_damping(index: usize) -> Result<Damping> {
    Ok(match index {
        0 => Damping::Zero,
        1 => Damping::Constant { c: 1.0 },
        2 => Damping::PowerDecay { c: 1.0, alpha: 0.5 },
        3 => Damping::PowerDecay { c: 1.0, alpha: 1.0 },
        4 => Damping::PowerGrowth { c: 1.0, alpha: 0.5 },
        5 => Damping::PowerGrowth { c: 1.0, alpha: 1.0 },
        6 => Damping::PowerGrowth { c: 1.0, alpha: 1.5 },
        _ => {
            return Err(Error::InvalidParameter(format!(
                "damping index {index} outside 0..=6"
            )))
        }
    })
}

/// Initial data `(u₀, u₁)`: zero displacement and the breather velocity
/// profile `4√(1-c²) / cosh(x√(1-c²))`.
pub fn initial_profile(g: &Grid1D, wave_speed: f64) -> Result<(Field, Field)> {
    if !(wave_speed > 0.0 && wave_speed < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "wave speed must lie in (0, 1), got {wave_speed}"
        )));
    }
    let s = (1.0 - wave_speed * wave_speed).sqrt();
    let u1 = g.sample(|x| 4.0 * s / (x * s).cosh());
    Ok((Field::zeros(g.n_interior()), u1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn models() -> Vec<Nonlinearity> {
        vec![
            Nonlinearity::SineGordon { b: 1.0 },
            Nonlinearity::SineGordon { b: 2.5 },
            Nonlinearity::KleinGordon { a: 1.0, p: 3.0 },
            Nonlinearity::KleinGordon { a: -0.1, p: 3.0 },
            Nonlinearity::KleinGordon { a: 0.5, p: 2.5 },
            Nonlinearity::KleinGordon { a: 0.0, p: 1.0 },
            Nonlinearity::LinearMass { b: 1.0 },
            Nonlinearity::LinearMass { b: -0.3 },
        ]
    }

    #[test]
    fn zero_is_a_root_and_potential_vanishes() {
        for nl in models() {
            assert_eq!(nl.force(0.0), 0.0);
            assert_eq!(nl.potential(0.0), 0.0);
        }
    }

    #[test]
    fn force_derivative_matches_finite_differences() {
        for nl in models() {
            for &s in &[-2.3, -0.7, 0.4, 1.9] {
                let eps = 1e-5;
                let fd = (nl.force(s + eps) - nl.force(s - eps)) / (2.0 * eps);
                assert_relative_eq!(nl.force_derivative(s), fd, max_relative = 1e-6);
            }
        }
    }

    #[test]
    fn preset_damping_values() {
        assert_eq!(preset_damping(0).unwrap().eval(17.0), 0.0);
        assert_relative_eq!(preset_damping(2).unwrap().eval(3.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(preset_damping(6).unwrap().eval(4.0), 8.0, epsilon = 1e-14);
        assert_relative_eq!(preset_damping(3).unwrap().eval(1.0), 0.5, epsilon = 1e-15);
        assert_relative_eq!(preset_damping(4).unwrap().eval(9.0), 3.0, epsilon = 1e-14);
        assert_relative_eq!(preset_damping(5).unwrap().eval(7.0), 7.0, epsilon = 1e-14);
        assert_eq!(preset_damping(1).unwrap().eval(123.0), 1.0);
        assert!(preset_damping(7).is_err());
    }

    #[test]
    fn theta_table() {
        let mu0 = 0.00617;
        assert_eq!(Nonlinearity::SineGordon { b: 1.0 }.lojasiewicz_theta(mu0), 0.5);
        assert_eq!(Nonlinearity::KleinGordon { a: 1.0, p: 3.0 }.lojasiewicz_theta(mu0), 0.5);
        assert_eq!(Nonlinearity::KleinGordon { a: -0.1, p: 3.0 }.lojasiewicz_theta(mu0), 0.25);
        assert_eq!(Nonlinearity::LinearMass { b: -5.0 }.lojasiewicz_theta(mu0), 0.5);
    }

    #[test]
    fn admissibility_window() {
        let h2 = preset_damping(2).unwrap();
        let h3 = preset_damping(3).unwrap();
        assert_eq!(admissible_alpha(&h2, 0.5), Admissibility::Admissible);
        assert_eq!(admissible_alpha(&h3, 0.5), Admissibility::Inadmissible);
        assert_eq!(admissible_alpha(&h2, 0.25), Admissibility::Inadmissible);
        assert!(preset_damping(0).unwrap().admissibility(0.25).is_admissible());
        assert!(preset_damping(1).unwrap().admissibility(0.25).is_admissible());
        for i in [5, 6] {
            assert_eq!(
                preset_damping(i).unwrap().admissibility(0.5),
                Admissibility::Inadmissible
            );
        }
        let r2 = Damping::ExplicitSolution { mu: 1.0, alpha: -2.0 };
        assert_eq!(r2.admissibility(0.5), Admissibility::NotApplicable);
    }

    #[test]
    fn constructors_validate() {
        assert!(Nonlinearity::sine_gordon(0.0).is_err());
        assert!(Nonlinearity::klein_gordon(1.0, 0.5).is_err());
        assert!(Nonlinearity::linear_mass(f64::NAN).is_err());
        assert!(Damping::power_decay(0.0, 1.0).is_err());
        assert!(Damping::power_growth(1.0, -1.0).is_err());
        assert!(Damping::constant(-1.0).is_err());
    }

    #[test]
    fn initial_profile_values() {
        let g = Grid1D::from_spacing(20.0, 0.1).unwrap();
        let (u0, u1) = initial_profile(&g, 0.2).unwrap();
        assert!(u0.iter().all(|&v| v == 0.0));
        // node 199 sits at x = 0
        assert!(g.x(199).abs() < 1e-12);
        assert_relative_eq!(u1[199], 4.0 * 0.96_f64.sqrt(), epsilon = 1e-12);
        assert_relative_eq!(u1[199], 3.919184, epsilon = 1e-6);
        let n = u1.len();
        for i in 0..n {
            assert_relative_eq!(u1[i], u1[n - 1 - i], max_relative = 1e-12);
        }
        assert!(initial_profile(&g, 1.0).is_err());
        assert!(initial_profile(&g, 0.0).is_err());
    }
}
