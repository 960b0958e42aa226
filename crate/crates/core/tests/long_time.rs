//! Full-length runs at the reference resolution (L = 20, dx = 0.1, dt = 0.05,
//! T = 200, breather velocity with c = 0.2).

use dampwave::diagnostics::lyapunov_ratios;
use dampwave::equilibria::{solve_equilibrium, DEFAULT_MAX_ITER, DEFAULT_TOL};
use dampwave::integrator::{run_collect, RecordOptions, SchemeConfig, WaveModel};
use dampwave::physics::{initial_profile, preset_damping};
use dampwave::rates::{
    classify_longtime, fit_polynomial_decay, fit_stretched_exponential, ClassifyParams, LongTimeLabel,
    RateModel, SeriesSample,
};
use dampwave::{DiagnosticsRow, Field, Grid1D, Nonlinearity};

fn reference_run(nl: Nonlinearity, h: usize, psi: Option<Field>) -> (Vec<DiagnosticsRow>, Field) {
    let g = Grid1D::from_spacing(20.0, 0.1).unwrap();
    let (u0, v0) = initial_profile(&g, 0.2).unwrap();
    let model = WaveModel::new(g, nl, preset_damping(h).unwrap());
    let opts = RecordOptions { psi, ..Default::default() };
    let (rows, s) = run_collect(&u0, &v0, &model, &SchemeConfig::reference(), &opts).unwrap();
    (rows, s.final_u)
}

fn l2_series(rows: &[DiagnosticsRow]) -> Vec<SeriesSample> {
    rows.iter().map(|r| SeriesSample { t: r.t, value: r.l2_u }).collect()
}

const SG: Nonlinearity = Nonlinearity::SineGordon { b: 1.0 };
const KG: Nonlinearity = Nonlinearity::KleinGordon { a: 1.0, p: 3.0 };

#[test]
fn undamped_sine_gordon_conserves_energy_and_keeps_oscillating() {
    let (rows, _) = reference_run(SG, 0, None);
    assert_eq!(rows.len(), 1001);
    let e0 = rows[0].energy;
    // breather energy 16√(1-c²)
    assert!((e0 - 16.0 * 0.96f64.sqrt()).abs() < 0.01 * e0);
    let drift = rows.iter().map(|r| (r.energy - e0).abs() / e0).fold(0.0, f64::max);
    assert!(drift <= 0.01, "drift {drift}");
    let global = rows.iter().map(|r| r.l2_u).fold(0.0, f64::max);
    let tail = rows.iter().filter(|r| r.t >= 150.0).map(|r| r.l2_u).fold(0.0, f64::max);
    assert!(tail >= 0.5 * global);
}

#[test]
fn damped_energy_is_non_increasing() {
    for h in [1, 2] {
        for nl in [SG, KG] {
            let (rows, _) = reference_run(nl, h, None);
            for w in rows.windows(2) {
                assert!(w[1].energy <= w[0].energy + 1e-6, "h{h} t {}", w[1].t);
            }
        }
    }
}

#[test]
fn damping_sweep_classification() {
    let expected = [
        (1, LongTimeLabel::ConvergedToEquilibrium),
        (2, LongTimeLabel::ConvergedToEquilibrium),
        (3, LongTimeLabel::Oscillating),
        (4, LongTimeLabel::ConvergedToEquilibrium),
        (5, LongTimeLabel::ConvergedToEquilibrium),
        (6, LongTimeLabel::NonEquilibriumPlateau),
    ];
    for nl in [SG, KG] {
        for (h, label) in expected {
            let (rows, _) = reference_run(nl, h, None);
            let c = classify_longtime(&l2_series(&rows), &[0.0], &ClassifyParams::default()).unwrap();
            eprintln!(
                "{nl:?} h{h}: {} ptp/A {:.4} m/A {:.4}",
                c.label,
                c.peak_to_peak / c.global_max,
                c.tail_mean / c.global_max
            );
            assert_eq!(c.label, label, "{nl:?} h{h}");
        }
    }
}

#[test]
fn sine_gordon_h2_follows_stretched_exponential() {
    let (rows, _) = reference_run(SG, 2, None);
    let fit = fit_stretched_exponential(&l2_series(&rows), 0.5, (50.0, 200.0)).unwrap();
    let RateModel::StretchedExponential { c, .. } = fit.model else { unreachable!() };
    eprintln!("c {c} r2 {:?}", fit.r_squared);
    assert!(c > 0.0);
    assert!(fit.r_squared.unwrap() >= 0.9);
}

#[test]
fn sine_gordon_h2_lyapunov_decreases() {
    let (rows, _) = reference_run(SG, 2, None);
    let late: Vec<&DiagnosticsRow> = rows.iter().filter(|r| r.t >= 1.0 && !r.one_sided_velocity).collect();
    for w in late.windows(2) {
        assert!(w[1].lyapunov <= w[0].lyapunov + 1e-6, "t {}", w[1].t);
    }
    let interior: Vec<DiagnosticsRow> = rows.iter().filter(|r| !r.one_sided_velocity).cloned().collect();
    let ratios = lyapunov_ratios(&interior, &preset_damping(2).unwrap()).unwrap();
    assert!(!ratios.is_empty());
}

#[test]
fn defocusing_klein_gordon_settles_on_nontrivial_equilibrium() {
    let nl = Nonlinearity::KleinGordon { a: -0.1, p: 3.0 };
    let (_, last) = reference_run(nl, 1, None);
    let g = Grid1D::from_spacing(20.0, 0.1).unwrap();
    let eq = solve_equilibrium(&last, &nl, &g, DEFAULT_TOL, DEFAULT_MAX_ITER).unwrap();
    assert!(eq.converged);
    assert!(g.l2_norm(&eq.psi).unwrap() > 1.0);
    let (rows, _) = reference_run(nl, 1, Some(eq.psi.clone()));
    let dist: Vec<SeriesSample> = rows
        .iter()
        .map(|r| SeriesSample { t: r.t, value: r.l2_dist_psi.unwrap() })
        .collect();
    let fit = fit_polynomial_decay(&dist, (50.0, 200.0)).unwrap();
    let RateModel::PolynomialDecay { lambda, .. } = fit.model else { unreachable!() };
    eprintln!("lambda {lambda} psi norm {}", g.l2_norm(&eq.psi).unwrap());
    assert!(lambda > 0.0);
}
