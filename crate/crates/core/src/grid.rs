//! Uniform grid on (-L, L) with homogeneous Dirichlet boundaries.
//!
//! Only interior nodes carry unknowns; the two boundary nodes are implicitly
//! zero. All L²-type quantities use the rectangle rule `Σ v_i w_i dx`, which
//! coincides with the trapezoid rule because boundary values vanish.
//!
//! The H¹ seminorm is taken over forward differences including both boundary
//! gaps, so that `|v|²_{H¹} = vᵀ(-Δ_h)v dx` holds exactly and the H¹ and H⁻¹
//! quantities are dual with respect to the same operator.

use std::f64::consts::PI;
use std::ops::{Deref, DerefMut};

use crate::error::{Error, Result};
use crate::tridiag;

/// Nodal values on the interior nodes of a [`Grid1D`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Field(Vec<f64>);

impl Field {
    pub fn zeros(n: usize) -> Self {
        Field(vec![0.0; n])
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().all(|v| v.is_finite())
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// `self + k * other`, componentwise.
    pub fn add_scaled(&self, k: f64, other: &[f64]) -> Field {
        self.0.iter().zip(other).map(|(a, b)| a + k * b).collect()
    }

    pub fn scaled(&self, k: f64) -> Field {
        self.0.iter().map(|a| k * a).collect()
    }
}

impl Deref for Field {
    type Target = [f64];
    fn deref(&self) -> &[f64] {
        &self.0
    }
}

impl DerefMut for Field {
    fn deref_mut(&mut self) -> &mut [f64] {
        &mut self.0
    }
}

impl From<Vec<f64>> for Field {
    fn from(v: Vec<f64>) -> Self {
        Field(v)
    }
}

impl FromIterator<f64> for Field {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        Field(iter.into_iter().collect())
    }
}

/// Uniform mesh of `(-half_length, half_length)` with `n_interior` unknowns.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid1D {
    half_length: f64,
    n_interior: usize,
    dx: f64,
}

impl Grid1D {
    pub fn new(half_length: f64, n_interior: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half length must be positive, got {half_length}"
            )));
        }
        if n_interior == 0 {
            return Err(Error::InvalidGrid("need at least one interior node".into()));
        }
        Ok(Grid1D {
            half_length,
            n_interior,
            dx: 2.0 * half_length / (n_interior as f64 + 1.0),
        })
    }

    /// Builds the grid whose spacing is `dx`. The node count is rounded to the
    /// nearest integer; the request is rejected when the implied spacing differs
    /// from `dx` by more than 1e-9 relative.
    pub fn from_spacing(half_length: f64, dx: f64) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::InvalidGrid(format!("dx must be positive, got {dx}")));
        }
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "half length must be positive, got {half_length}"
            )));
        }
        let cells = (2.0 * half_length / dx).round();
        if cells < 2.0 {
            return Err(Error::InvalidGrid(format!(
                "dx = {dx} leaves no interior node on (-{half_length}, {half_length})"
            )));
        }
        let grid = Grid1D::new(half_length, cells as usize - 1)?;
        if ((grid.dx - dx) / dx).abs() > 1e-9 {
            return Err(Error::InvalidGrid(format!(
                "2L = {} is not an integer multiple of dx = {dx}",
                2.0 * half_length
            )));
        }
        Ok(grid)
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn n_interior(&self) -> usize {
        self.n_interior
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Coordinate of interior node `i` (0-based, so `x(0) = -L + dx`).
    pub fn x(&self, i: usize) -> f64 {
        -self.half_length + (i as f64 + 1.0) * self.dx
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_interior).map(|i| self.x(i)).collect()
    }

    /// Samples `f` at the interior nodes.
    pub fn sample(&self, f: impl Fn(f64) -> f64) -> Field {
        (0..self.n_interior).map(|i| f(self.x(i))).collect()
    }

    pub fn check(&self, v: &[f64]) -> Result<()> {
        if v.len() != self.n_interior {
            return Err(Error::LengthMismatch {
                expected: self.n_interior,
                found: v.len(),
            });
        }
        Ok(())
    }

    /// Discrete Dirichlet eigenvector `sin(kπ(x+L)/(2L))`, k ≥ 1.
    pub fn eigenmode(&self, k: usize) -> Result<Field> {
        if k == 0 || k > self.n_interior {
            return Err(Error::InvalidParameter(format!(
                "mode index {k} outside 1..={}",
                self.n_interior
            )));
        }
        let l = self.half_length;
        Ok(self.sample(|x| (k as f64 * PI * (x + l) / (2.0 * l)).sin()))
    }

    /// Eigenvalue of `-Δ_h` belonging to [`Grid1D::eigenmode`]`(k)`.
    pub fn eigenvalue(&self, k: usize) -> f64 {
        let theta = k as f64 * PI * self.dx / (2.0 * self.half_length);
        2.0 / (self.dx * self.dx) * (1.0 - theta.cos())
    }

    /// Smallest eigenvalue of `-Δ_h`, the discrete counterpart of μ₀.
    pub fn first_eigenvalue(&self) -> f64 {
        self.eigenvalue(1)
    }

    /// Three-point Laplacian with zero boundary values.
    pub fn laplacian(&self, v: &[f64]) -> Result<Field> {
        self.check(v)?;
        let mut out = Field::zeros(v.len());
        self.laplacian_into(v, &mut out);
        Ok(out)
    }

    /// Unchecked variant used in inner loops.
    pub(crate) fn laplacian_into(&self, v: &[f64], out: &mut [f64]) {
        let n = v.len();
        let inv_dx2 = 1.0 / (self.dx * self.dx);
        for i in 0..n {
            let left = if i > 0 { v[i - 1] } else { 0.0 };
            let right = if i + 1 < n { v[i + 1] } else { 0.0 };
            out[i] = (left - 2.0 * v[i] + right) * inv_dx2;
        }
    }

    /// Solves `-Δ_h w = v`.
    pub fn inverse_laplacian(&self, v: &[f64]) -> Result<Field> {
        self.check(v)?;
        let n = v.len();
        // dx² (-Δ_h) = tridiag(-1, 2, -1)
        let dx2 = self.dx * self.dx;
        let lower = vec![-1.0; n - 1];
        let diag = vec![2.0; n];
        let rhs: Vec<f64> = v.iter().map(|x| x * dx2).collect();
        let mut w = tridiag::solve(&lower, &diag, &lower, &rhs)?;

        // one step of iterative refinement keeps the residual near round-off
        // even on fine grids where the system is poorly conditioned
        let aw = tridiag::apply(&lower, &diag, &lower, &w);
        let r: Vec<f64> = rhs.iter().zip(&aw).map(|(b, a)| b - a).collect();
        let dw = tridiag::solve(&lower, &diag, &lower, &r)?;
        for (wi, di) in w.iter_mut().zip(dw) {
            *wi += di;
        }
        Ok(Field(w))
    }

    pub fn l2_inner(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.check(a)?;
        self.check(b)?;
        Ok(dot(a, b) * self.dx)
    }

    pub fn l2_norm(&self, v: &[f64]) -> Result<f64> {
        Ok(self.l2_inner(v, v)?.sqrt())
    }

    pub fn h1_seminorm(&self, v: &[f64]) -> Result<f64> {
        self.check(v)?;
        let n = v.len();
        let mut acc = v[0] * v[0] + v[n - 1] * v[n - 1];
        for w in v.windows(2) {
            let d = w[1] - w[0];
            acc += d * d;
        }
        Ok((acc / self.dx).sqrt())
    }

    /// `⟨a, b⟩_{H⁻¹} = ⟨a, (-Δ_h)⁻¹ b⟩_{L²}`.
    pub fn hm1_inner(&self, a: &[f64], b: &[f64]) -> Result<f64> {
        self.check(a)?;
        let w = self.inverse_laplacian(b)?;
        Ok(dot(a, &w) * self.dx)
    }

    pub fn hm1_norm(&self, v: &[f64]) -> Result<f64> {
        // the quadratic form is nonnegative; clamp round-off below zero
        Ok(self.hm1_inner(v, v)?.max(0.0).sqrt())
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    /// Dense `-Δ_h` used as an independent oracle.
    fn dense_neg_laplacian(g: &Grid1D) -> Vec<Vec<f64>> {
        let n = g.n_interior();
        let s = 1.0 / (g.dx() * g.dx());
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = 2.0 * s;
            if i > 0 {
                a[i][i - 1] = -s;
            }
            if i + 1 < n {
                a[i][i + 1] = -s;
            }
        }
        a
    }

    fn matvec(a: &[Vec<f64>], v: &[f64]) -> Vec<f64> {
        a.iter().map(|row| dot(row, v)).collect()
    }

    /// Gaussian elimination with partial pivoting on a dense copy.
    #[allow(clippy::needless_range_loop)]
    fn dense_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
        let n = b.len();
        let mut m: Vec<Vec<f64>> = a.to_vec();
        let mut x = b.to_vec();
        for col in 0..n {
            let piv = (col..n)
                .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
                .unwrap();
            m.swap(col, piv);
            x.swap(col, piv);
            for r in col + 1..n {
                let f = m[r][col] / m[col][col];
                for c in col..n {
                    m[r][c] -= f * m[col][c];
                }
                x[r] -= f * x[col];
            }
        }
        for r in (0..n).rev() {
            let mut s = x[r];
            for c in r + 1..n {
                s -= m[r][c] * x[c];
            }
            x[r] = s / m[r][r];
        }
        x
    }

    fn reference_grid() -> Grid1D {
        Grid1D::from_spacing(20.0, 0.1).unwrap()
    }

    #[test]
    fn from_spacing_gives_399_nodes() {
        let g = reference_grid();
        assert_eq!(g.n_interior(), 399);
        assert_relative_eq!(g.dx(), 0.1, max_relative = 1e-12);
        assert_relative_eq!(g.x(0), -19.9, epsilon = 1e-12);
        assert_relative_eq!(g.x(398), 19.9, epsilon = 1e-12);
    }

    #[test]
    fn from_spacing_rejects_incommensurate_dx() {
        assert!(Grid1D::from_spacing(1.0, 0.3).is_err());
        assert!(Grid1D::from_spacing(1.0, 3.0).is_err());
        assert!(Grid1D::from_spacing(-1.0, 0.1).is_err());
        assert!(Grid1D::new(1.0, 0).is_err());
    }

    #[test]
    fn laplacian_of_zero() {
        let g = Grid1D::new(1.0, 5).unwrap();
        assert_eq!(g.laplacian(&Field::zeros(5)).unwrap(), Field::zeros(5));
    }

    #[test]
    fn laplacian_matches_dense_on_eigenmodes() {
        let g = reference_grid();
        let a = dense_neg_laplacian(&g);
        for k in 1..=5 {
            let e = g.eigenmode(k).unwrap();
            let lap = g.laplacian(&e).unwrap();
            let dense = matvec(&a, &e);
            let lam = g.eigenvalue(k);
            for i in 0..e.len() {
                assert_relative_eq!(lap[i], -dense[i], epsilon = 1e-10);
                assert!((lap[i] + lam * e[i]).abs() <= 1e-10 * lam);
            }
        }
    }

    #[test]
    fn laplacian_of_parabola_by_hand() {
        // L = 1, n = 3: dx = 0.5, nodes -0.5, 0, 0.5; v = 1 - x² = [0.75, 1, 0.75]
        let g = Grid1D::new(1.0, 3).unwrap();
        let v = g.sample(|x| 1.0 - x * x);
        let lap = g.laplacian(&v).unwrap();
        // (0 - 1.5 + 1)/0.25 = -2, (0.75 - 2 + 0.75)/0.25 = -2
        for w in lap.iter() {
            assert_relative_eq!(*w, -2.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn laplacian_length_mismatch() {
        let g = Grid1D::new(1.0, 3).unwrap();
        assert_eq!(
            g.laplacian(&[1.0, 2.0]).unwrap_err(),
            Error::LengthMismatch { expected: 3, found: 2 }
        );
    }

    #[test]
    fn inverse_laplacian_on_eigenmode_matches_dense_solve() {
        let g = Grid1D::new(2.0, 40).unwrap();
        let a = dense_neg_laplacian(&g);
        for k in [1, 3, 7] {
            let e = g.eigenmode(k).unwrap();
            let w = g.inverse_laplacian(&e).unwrap();
            let oracle = dense_solve(&a, &e);
            let lam = g.eigenvalue(k);
            for i in 0..e.len() {
                assert_relative_eq!(w[i], oracle[i], epsilon = 1e-10, max_relative = 1e-10);
                assert_relative_eq!(w[i], e[i] / lam, epsilon = 1e-10, max_relative = 1e-10);
            }
        }
    }

    #[test]
    fn inverse_laplacian_residual_bound() {
        let g = reference_grid();
        let v = g.sample(|x| (0.3 * x).cos() + 0.5 * (3.1 * x).sin() + 0.1 * x);
        let w = g.inverse_laplacian(&v).unwrap();
        let r = g.laplacian(&w).unwrap();
        let res = r.iter().zip(v.iter()).fold(0.0_f64, |m, (a, b)| m.max((a + b).abs()));
        assert!(res <= 1e-12 * v.max_abs(), "residual {res}");
        assert_eq!(g.inverse_laplacian(&Field::zeros(399)).unwrap(), Field::zeros(399));
    }

    #[test]
    fn l2_of_constant() {
        let g = reference_grid();
        let one = g.sample(|_| 1.0);
        // direct summation: 399 nodes each weighted by dx = 0.1
        let oracle = (0..399).map(|_| 0.1).sum::<f64>().sqrt();
        assert_relative_eq!(g.l2_norm(&one).unwrap(), oracle, max_relative = 1e-12);
        assert_relative_eq!(g.l2_norm(&one).unwrap(), 6.31664, epsilon = 1e-5);
        assert_eq!(g.l2_norm(&Field::zeros(399)).unwrap(), 0.0);
    }

    #[test]
    fn l2_of_sech_profile() {
        let g = reference_grid();
        let s = (1.0_f64 - 0.04).sqrt();
        let v = g.sample(|x| 4.0 * s / (x * s).cosh());
        // ∫ 16 s² sech²(s x) dx over ℝ = 32 s
        let continuum = 32.0 * s;
        let discrete = g.l2_norm(&v).unwrap().powi(2);
        assert!(((discrete - continuum) / continuum).abs() < 5e-3);
        assert_relative_eq!(continuum, 31.353, epsilon = 1e-3);
    }

    #[test]
    fn h1_seminorm_matches_quadratic_form() {
        let g = reference_grid();
        let a = dense_neg_laplacian(&g);
        let e = g.eigenmode(1).unwrap();
        let quad = dot(&e, &matvec(&a, &e)) * g.dx();
        assert_relative_eq!(g.h1_seminorm(&e).unwrap().powi(2), quad, max_relative = 1e-12);
        let lam = g.first_eigenvalue();
        assert_relative_eq!(
            g.h1_seminorm(&e).unwrap(),
            lam.sqrt() * g.l2_norm(&e).unwrap(),
            max_relative = 1e-10
        );
    }

    #[test]
    fn h1_seminorm_is_homogeneous() {
        let g = Grid1D::new(1.0, 9).unwrap();
        let v = g.sample(|x| x.sin() + 0.3);
        let doubled = v.scaled(2.0);
        assert_eq!(
            g.h1_seminorm(&doubled).unwrap(),
            2.0 * g.h1_seminorm(&v).unwrap()
        );
        assert_eq!(g.h1_seminorm(&Field::zeros(9)).unwrap(), 0.0);
    }

    #[test]
    fn hm1_norm_of_eigenmode() {
        let g = reference_grid();
        for k in 1..=4 {
            let e = g.eigenmode(k).unwrap();
            let expected = g.l2_norm(&e).unwrap() / g.eigenvalue(k).sqrt();
            assert_relative_eq!(g.hm1_norm(&e).unwrap(), expected, max_relative = 1e-10);
        }
        assert_eq!(g.hm1_norm(&Field::zeros(399)).unwrap(), 0.0);
    }

    #[test]
    fn first_eigenvalue_values() {
        let g = reference_grid();
        let continuum = PI * PI / 1600.0;
        // O((πdx/2L)²/12) below the continuum value
        assert!(((g.first_eigenvalue() - continuum) / continuum).abs() < 1e-5);
        assert_relative_eq!(g.first_eigenvalue(), 0.0061685, epsilon = 1e-7);

        // 1×1 matrix [2/dx²] with dx = 1
        let g1 = Grid1D::new(1.0, 1).unwrap();
        assert_relative_eq!(g1.first_eigenvalue(), 2.0, epsilon = 1e-15);
    }

    #[test]
    fn first_eigenvalue_matches_dense_power_iteration() {
        // inverse power iteration on the dense matrix as an eigensolve oracle
        let g = Grid1D::new(20.0, 99).unwrap();
        let a = dense_neg_laplacian(&g);
        let mut v = vec![1.0; 99];
        let mut lam = 0.0;
        for _ in 0..50 {
            let w = dense_solve(&a, &v);
            let nrm = dot(&w, &w).sqrt();
            v = w.iter().map(|x| x / nrm).collect();
            lam = dot(&v, &matvec(&a, &v));
        }
        assert_relative_eq!(g.first_eigenvalue(), lam, max_relative = 1e-10);
    }

    #[test]
    fn first_eigenvalue_converges_under_refinement() {
        let continuum = PI * PI / 4.0;
        let mut prev_err = f64::INFINITY;
        for n in [3, 7, 15, 31, 63] {
            let g = Grid1D::new(1.0, n).unwrap();
            let err = (g.first_eigenvalue() - continuum).abs();
            assert!(err < prev_err);
            prev_err = err;
        }
    }
}
