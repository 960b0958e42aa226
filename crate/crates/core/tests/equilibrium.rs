use dampwave::diagnostics::g_residual;
use dampwave::equilibria::{bump_guess, solve_equilibrium, DEFAULT_MAX_ITER, DEFAULT_TOL};
use dampwave::{Grid1D, Nonlinearity};

const A: f64 = -0.1;

/// `ψ'' = aψ + ψ³` is even about 0, so shoot from `ψ(-L) = 0` with slope `p`
/// and bisect on the sign of `ψ'` at the midpoint. Returns the profile on a
/// fine uniform mesh over `[-L, 0]`.
fn shooting_profile(l: f64, steps: usize) -> (f64, Vec<f64>) {
    let h = l / steps as f64;
    let rhs = |psi: f64, dpsi: f64| (dpsi, A * psi + psi * psi * psi);
    let plateau = (-A).sqrt();
    let shoot = |p: f64, keep: bool| -> (i32, Vec<f64>) {
        let (mut y, mut z) = (0.0, p);
        let mut out = if keep { vec![0.0] } else { Vec::new() };
        for _ in 0..steps {
            let (k1y, k1z) = rhs(y, z);
            let (k2y, k2z) = rhs(y + 0.5 * h * k1y, z + 0.5 * h * k1z);
            let (k3y, k3z) = rhs(y + 0.5 * h * k2y, z + 0.5 * h * k2z);
            let (k4y, k4z) = rhs(y + h * k3y, z + h * k3z);
            y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y);
            z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
            if keep {
                out.push(y);
            }
            if y > plateau {
                return (1, out);
            }
            if z < 0.0 {
                return (-1, out);
            }
        }
        (0, out)
    };
    // the heteroclinic slope √0.005 ≈ 0.0707 lies inside the bracket
    let (mut lo, mut hi) = (0.0, 0.1);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        match shoot(mid, false).0 {
            1 => hi = mid,
            _ => lo = mid,
        }
    }
    let (_, prof) = shoot(lo, true);
    (lo, prof)
}

#[test]
fn klein_gordon_plateau_matches_shooting() {
    let g = Grid1D::from_spacing(20.0, 0.1).unwrap();
    let nl = Nonlinearity::KleinGordon { a: A, p: 3.0 };
    let r = solve_equilibrium(&bump_guess(&g, 0.3), &nl, &g, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    assert!(r.converged);
    let res = g.hm1_norm(&g_residual(&r.psi, &nl, &g).unwrap()).unwrap();
    assert!(res <= 1e-10);

    // 100 RK4 steps per grid spacing
    let (_, prof) = shooting_profile(20.0, 20_000);
    let centre = 199;
    assert!(g.x(centre).abs() < 1e-12);
    let oracle_mid = *prof.last().unwrap();
    assert!((oracle_mid - 0.1f64.sqrt()).abs() <= 0.05 * 0.1f64.sqrt());
    assert!((r.psi[centre] - 0.1f64.sqrt()).abs() <= 0.05 * 0.1f64.sqrt());

    // whole left half against the oracle profile
    let mut worst: f64 = 0.0;
    for i in 0..=centre {
        let k = (i + 1) * 100;
        worst = worst.max((r.psi[i] - prof[k]).abs());
    }
    assert!(worst < 1e-3, "max deviation {worst}");
}

#[test]
fn newton_tail_is_quadratic() {
    let g = Grid1D::from_spacing(20.0, 0.1).unwrap();
    let nl = Nonlinearity::KleinGordon { a: A, p: 3.0 };
    let r = solve_equilibrium(&bump_guess(&g, 0.3), &nl, &g, 1e-13, DEFAULT_MAX_ITER).unwrap();
    let h = &r.residual_history;
    assert!(h.iter().any(|&x| x < 1e-3));
    // steps whose result is still above the roundoff floor
    let ratios: Vec<f64> = h
        .windows(2)
        .filter(|w| w[1] > 1e-13)
        .map(|w| w[1] / (w[0] * w[0]))
        .collect();
    assert!(ratios.len() >= 3, "history {h:?}");
    let last = &ratios[ratios.len() - 3..];
    let (lo, hi) = last.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &x| (a.min(x), b.max(x)));
    // r_{k+1} ≤ C r_k² with one C across the last three steps
    assert!(hi < 10.0 && hi / lo < 3.0, "ratios {ratios:?}");
}

#[test]
fn odd_symmetry_of_solutions() {
    let g = Grid1D::from_spacing(20.0, 0.1).unwrap();
    let nl = Nonlinearity::KleinGordon { a: A, p: 3.0 };
    let guess = bump_guess(&g, 0.3);
    let neg = guess.scaled(-1.0);
    let a = solve_equilibrium(&guess, &nl, &g, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    let b = solve_equilibrium(&neg, &nl, &g, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    for (x, y) in a.psi.iter().zip(b.psi.iter()) {
        assert!((x + y).abs() <= 1e-8);
    }
}

#[test]
fn refinement_changes_solution_by_order_dx_squared() {
    let nl = Nonlinearity::KleinGordon { a: A, p: 3.0 };
    let solve = |dx: f64| {
        let g = Grid1D::from_spacing(20.0, dx).unwrap();
        solve_equilibrium(&bump_guess(&g, 0.3), &nl, &g, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap()
    };
    let coarse = solve(0.1);
    let fine = solve(0.05);
    let mid = solve(0.025);
    assert!(coarse.converged && fine.converged && mid.converged);
    let d1 = coarse
        .psi
        .iter()
        .enumerate()
        .map(|(i, v)| (v - fine.psi[2 * i + 1]).abs())
        .fold(0.0, f64::max);
    let d2 = fine
        .psi
        .iter()
        .enumerate()
        .map(|(i, v)| (v - mid.psi[2 * i + 1]).abs())
        .fold(0.0, f64::max);
    assert!(d1 < 1e-3);
    let order = (d1 / d2).log2();
    assert!(order > 1.8, "d1 {d1} d2 {d2}");
}
