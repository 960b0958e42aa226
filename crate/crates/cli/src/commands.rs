use std::ops::ControlFlow;
use std::path::{Path, PathBuf};

use dampwave::equilibria::{
    bump_guess, canonical_seed, geometric_epsilons, lojasiewicz_probe, solve_equilibrium, DEFAULT_MAX_ITER,
    DEFAULT_TOL,
};
use dampwave::integrator::{run, RecordOptions, WaveModel};
use dampwave::ode_lab::{explicit_profile, explicit_solution_check, integrate_mode, explicit_solution_damping, ModeOde};
use dampwave::physics::initial_profile;
use dampwave::rates::{
    classify_longtime, fit_polynomial_decay, fit_stretched_exponential, theoretical_lambda_sup, Classification,
    ClassifyParams, LambdaSup, RateFit, RateModel, SeriesSample,
};
use dampwave::{Damping, DiagnosticsRow, Field};
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use crate::config::{DampingKind, ExperimentConfig, InitialData, ModelKind, PsiSource};
use crate::error::CliError;
use crate::output::{create, csv_err, fmt_float, read_columns, read_profile, write_profile, write_text, Manifest, Report, RowWriter};

/// A report together with a failure that should still set the exit code
/// after the report has been printed.
#[derive(Debug)]
pub struct Outcome {
    pub report: Report,
    pub error: Option<CliError>,
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub rows: Vec<DiagnosticsRow>,
    pub final_u: Field,
    pub psi: Field,
    /// Set when `newton-from-final` could not produce an equilibrium and the
    /// run fell back to ψ = 0.
    pub psi_note: Option<String>,
}

fn initial_data(cfg: &ExperimentConfig) -> Result<(Field, Field), CliError> {
    let g = cfg.grid();
    Ok(match cfg.initial {
        InitialData::Breather => initial_profile(&g, cfg.wave_speed)?,
        InitialData::Zero => (Field::zeros(g.n_interior()), Field::zeros(g.n_interior())),
    })
}

fn model(cfg: &ExperimentConfig) -> WaveModel {
    WaveModel::new(cfg.grid(), cfg.nonlinearity(), cfg.damping())
}

fn reference_state(cfg: &ExperimentConfig, u0: &[f64], v0: &[f64]) -> Result<(Field, Option<String>), CliError> {
    let g = cfg.grid();
    match &cfg.psi_source {
        PsiSource::Zero => Ok((Field::zeros(g.n_interior()), None)),
        PsiSource::File(p) => Ok((read_profile(p, &g)?, None)),
        PsiSource::NewtonFromFinal => {
            let opts = RecordOptions {
                record_every: usize::MAX,
                ..Default::default()
            };
            let s = run(u0, v0, &model(cfg), &cfg.scheme(), &opts, |_| ControlFlow::Continue(()))?;
            let eq = solve_equilibrium(&s.final_u, &cfg.nonlinearity(), &g, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
            if eq.converged {
                Ok((eq.psi, None))
            } else {
                Ok((
                    Field::zeros(g.n_interior()),
                    Some(format!(
                        "newton-from-final stalled at residual {:e}; using zero",
                        eq.residual_hm1
                    )),
                ))
            }
        }
    }
}

/// Field snapshots as `t,x,u` rows every `every` steps.
pub struct Snapshots<'a> {
    pub path: &'a Path,
    pub every: usize,
}

/// Runs one experiment, streaming rows to `csv_path`. A blow-up leaves the
/// rows written so far in place.
pub fn simulate_run(
    cfg: &ExperimentConfig,
    csv_path: &Path,
    snapshots: Option<Snapshots<'_>>,
) -> Result<RunOutput, CliError> {
    let g = cfg.grid();
    let (u0, v0) = initial_data(cfg)?;
    let (psi, psi_note) = reference_state(cfg, &u0, &v0)?;
    let opts = RecordOptions {
        record_every: cfg.record_every,
        psi: Some(psi.clone()),
        eta: cfg.eta,
    };

    let mut writer = RowWriter::create(csv_path)?;
    let mut snap = match &snapshots {
        Some(s) => {
            let mut w = create(s.path)?;
            w.write_record(["t", "x", "u"]).map_err(|e| csv_err(s.path, e))?;
            Some((w, s.path, s.every.max(1)))
        }
        None => None,
    };
    let mut rows = Vec::new();
    let mut io_error = None;
    let result = run(&u0, &v0, &model(cfg), &cfg.scheme(), &opts, |s| {
        let mut write = || -> Result<(), CliError> {
            writer.write(s.row)?;
            if let Some((w, path, every)) = snap.as_mut() {
                if s.step % *every == 0 {
                    for (i, u) in s.u.iter().enumerate() {
                        w.write_record([fmt_float(s.row.t), fmt_float(g.x(i)), fmt_float(*u)])
                            .map_err(|e| csv_err(path, e))?;
                    }
                }
            }
            Ok(())
        };
        rows.push(s.row.clone());
        match write() {
            Ok(()) => ControlFlow::Continue(()),
            Err(e) => {
                io_error = Some(e);
                ControlFlow::Break(())
            }
        }
    });
    writer.finish()?;
    if let Some((mut w, path, _)) = snap {
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    if let Some(e) = io_error {
        return Err(e);
    }
    let summary = result?;
    Ok(RunOutput {
        rows,
        final_u: summary.final_u,
        psi,
        psi_note,
    })
}

#[derive(Debug, Clone)]
pub struct Analysis {
    pub classification: Option<Classification>,
    pub polynomial: Option<RateFit>,
    pub stretched: Option<RateFit>,
    pub theta: f64,
    /// Present for damping of decaying power type.
    pub lambda_sup: Option<LambdaSup>,
    pub energy_drift: f64,
}

fn decay_exponent(d: &Damping) -> Option<f64> {
    match *d {
        Damping::Constant { c } if c > 0.0 => Some(0.0),
        Damping::PowerDecay { alpha, .. } => Some(alpha),
        _ => None,
    }
}

pub fn analyze(cfg: &ExperimentConfig, out: &RunOutput) -> Analysis {
    let g = cfg.grid();
    let rows = &out.rows;
    let psi_norm = g.l2_norm(&out.psi).unwrap_or(0.0);
    let mut levels = vec![0.0];
    if psi_norm > 0.0 {
        levels.push(psi_norm);
    }
    let norms: Vec<SeriesSample> = rows.iter().map(|r| SeriesSample { t: r.t, value: r.l2_u }).collect();
    let dist: Vec<SeriesSample> = rows
        .iter()
        .map(|r| SeriesSample {
            t: r.t,
            value: r.l2_dist_psi.unwrap_or(r.l2_u),
        })
        .collect();
    let t_end = rows.last().map(|r| r.t).unwrap_or(0.0);
    let window = (0.25 * t_end, t_end);
    let damping = cfg.damping();
    let alpha = decay_exponent(&damping);
    let theta = cfg.nonlinearity().lojasiewicz_theta(g.first_eigenvalue());

    let e0 = rows.first().map(|r| r.energy).unwrap_or(0.0);
    let energy_drift = if e0 != 0.0 {
        rows.iter().map(|r| (r.energy - e0).abs() / e0.abs()).fold(0.0, f64::max)
    } else {
        0.0
    };

    Analysis {
        classification: classify_longtime(&norms, &levels, &ClassifyParams::default()).ok(),
        polynomial: fit_polynomial_decay(&dist, window).ok(),
        stretched: alpha
            .filter(|a| *a < 1.0)
            .and_then(|a| fit_stretched_exponential(&dist, a, window).ok()),
        theta,
        lambda_sup: alpha.and_then(|a| theoretical_lambda_sup(theta, a).ok()),
        energy_drift,
    }
}

fn lambda_sup_text(l: LambdaSup) -> String {
    match l {
        LambdaSup::Finite(v) => v.to_string(),
        LambdaSup::Unbounded => "inf".into(),
        LambdaSup::NotApplicable => "n/a".into(),
    }
}

fn analysis_report(a: &Analysis) -> Report {
    let mut r = Report::new();
    if let Some(c) = &a.classification {
        r.push("classification", c.label);
        r.push("tail_mean", c.tail_mean);
        r.push("tail_peak_to_peak", c.peak_to_peak);
        r.push("global_max", c.global_max);
    }
    if let Some(RateFit {
        model: RateModel::PolynomialDecay { lambda, .. },
        r_squared,
        ..
    }) = a.polynomial
    {
        r.push("lambda", lambda);
        r.push("lambda_r_squared", r_squared.unwrap_or(f64::NAN));
    }
    if let Some(RateFit {
        model: RateModel::StretchedExponential { c, .. },
        r_squared,
        ..
    }) = a.stretched
    {
        r.push("stretched_c", c);
        r.push("stretched_r_squared", r_squared.unwrap_or(f64::NAN));
    }
    r.push("theta", a.theta);
    if let Some(l) = a.lambda_sup {
        r.push("lambda_sup", lambda_sup_text(l));
    }
    r.push("energy_drift", a.energy_drift);
    r
}

pub fn cmd_simulate(cfg: &ExperimentConfig, out_dir: &Path) -> Result<Report, CliError> {
    let path = out_dir.join(format!("{}.csv", cfg.run_name()));
    let out = simulate_run(cfg, &path, None)?;
    let mut r = Report::new();
    r.push("csv", path.display());
    r.push("rows", out.rows.len());
    r.push("final_time", out.rows.last().map(|x| x.t).unwrap_or(0.0));
    r.push("config_hash", cfg.hash());
    if let Some(n) = &out.psi_note {
        r.push("psi_note", n);
    }
    r.extend(analysis_report(&analyze(cfg, &out)));
    Ok(r)
}

const SUMMARY_HEADER: [&str; 12] = [
    "model",
    "damping",
    "status",
    "classification",
    "tail_mean",
    "tail_peak_to_peak",
    "global_max",
    "lambda",
    "lambda_r_squared",
    "stretched_c",
    "stretched_r_squared",
    "lambda_sup",
];

struct SweepRun {
    cfg: ExperimentConfig,
    file: PathBuf,
    result: Result<Analysis, CliError>,
}

fn summary_record(run: &SweepRun) -> Vec<String> {
    let blank = || String::new();
    let num = |v: Option<f64>| v.map(fmt_float).unwrap_or_else(blank);
    let mut rec = vec![run.cfg.model.name().to_string(), run.cfg.damping.tag()];
    match &run.result {
        Err(e) => {
            rec.push(format!("failed: {e}").replace(',', ";"));
            rec.extend(std::iter::repeat_with(blank).take(9));
        }
        Ok(a) => {
            rec.push("ok".into());
            let c = a.classification.as_ref();
            rec.push(c.map(|c| c.label.to_string()).unwrap_or_else(blank));
            rec.push(num(c.map(|c| c.tail_mean)));
            rec.push(num(c.map(|c| c.peak_to_peak)));
            rec.push(num(c.map(|c| c.global_max)));
            let (lam, lam_r2) = match a.polynomial {
                Some(RateFit {
                    model: RateModel::PolynomialDecay { lambda, .. },
                    r_squared,
                    ..
                }) => (Some(lambda), r_squared),
                _ => (None, None),
            };
            rec.push(num(lam));
            rec.push(num(lam_r2));
            let (sc, sr2) = match a.stretched {
                Some(RateFit {
                    model: RateModel::StretchedExponential { c, .. },
                    r_squared,
                    ..
                }) => (Some(c), r_squared),
                _ => (None, None),
            };
            rec.push(num(sc));
            rec.push(num(sr2));
            rec.push(a.lambda_sup.map(lambda_sup_text).unwrap_or_else(blank));
        }
    }
    rec
}

fn run_sweep(
    configs: Vec<ExperimentConfig>,
    out_dir: &Path,
    prefix: &str,
    workers: Option<usize>,
) -> Result<Vec<SweepRun>, CliError> {
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = workers {
        pool = pool.num_threads(n.max(1));
    }
    let pool = pool
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    Ok(pool.install(|| {
        configs
            .into_par_iter()
            .map(|cfg| {
                let file = out_dir.join(format!("{prefix}{}.csv", cfg.run_name()));
                let result = simulate_run(&cfg, &file, None).map(|o| analyze(&cfg, &o));
                SweepRun { cfg, file, result }
            })
            .collect()
    }))
}

fn write_summary(path: &Path, runs: &[SweepRun]) -> Result<(), CliError> {
    let mut w = create(path)?;
    w.write_record(SUMMARY_HEADER).map_err(|e| csv_err(path, e))?;
    for run in runs {
        w.write_record(summary_record(run)).map_err(|e| csv_err(path, e))?;
    }
    w.flush().map_err(|e| CliError::io(path, e))
}

fn sweep_report(runs: &[SweepRun]) -> (Report, Option<CliError>) {
    let mut r = Report::new();
    let mut failed = 0;
    for run in runs {
        let tag = format!("{}.{}", run.cfg.model.name(), run.cfg.damping.tag());
        match &run.result {
            Ok(a) => {
                let label = a
                    .classification
                    .as_ref()
                    .map(|c| c.label.to_string())
                    .unwrap_or_else(|| "unclassified".into());
                r.push(format!("{tag}.classification"), label);
            }
            Err(e) => {
                failed += 1;
                r.push(format!("{tag}.status"), format!("failed: {e}"));
            }
        }
    }
    r.push("runs", runs.len());
    r.push("failed", failed);
    let err = (failed > 0).then(|| CliError::Failed(format!("{failed} of {} runs failed", runs.len())));
    (r, err)
}

fn with_damping(cfg: &ExperimentConfig, kind: DampingKind) -> ExperimentConfig {
    ExperimentConfig {
        damping: kind,
        damping_c: None,
        damping_alpha: None,
        ..cfg.clone()
    }
}

/// Parses damping tags `h0`..`h6`.
pub fn parse_damping_list(items: &[String]) -> Result<Vec<usize>, CliError> {
    items
        .iter()
        .map(|s| s.trim())
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.strip_prefix('h')
                .and_then(|i| i.parse::<usize>().ok())
                .filter(|i| *i <= 6)
                .ok_or_else(|| CliError::Usage(format!("unknown damping `{s}`, expected h0..h6")))
        })
        .collect()
}

pub fn cmd_sweep(cfg: &ExperimentConfig, dampings: &[usize], workers: Option<usize>, out_dir: &Path) -> Result<Outcome, CliError> {
    let configs = dampings.iter().map(|&i| with_damping(cfg, DampingKind::Indexed(i))).collect();
    let runs = run_sweep(configs, out_dir, "", workers)?;
    let summary = out_dir.join(format!("{}_summary.csv", cfg.model.name()));
    write_summary(&summary, &runs)?;
    let (mut report, error) = sweep_report(&runs);
    report.push("summary", summary.display());
    Ok(Outcome { report, error })
}

#[derive(Debug, Clone, PartialEq)]
pub enum Guess {
    Bump(f64),
    Seed,
    Zero,
    File(PathBuf),
}

impl std::str::FromStr for Guess {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "seed" => Ok(Guess::Seed),
            "zero" => Ok(Guess::Zero),
            "bump" => Ok(Guess::Bump(0.3)),
            _ => {
                if let Some(p) = s.strip_prefix("file:") {
                    return Ok(Guess::File(PathBuf::from(p)));
                }
                if let Some(a) = s.strip_prefix("bump:") {
                    return a.parse().map(Guess::Bump).map_err(|_| format!("bad bump amplitude `{a}`"));
                }
                Err(format!("unknown guess `{s}`; use bump[:amp], seed, zero or file:<path>"))
            }
        }
    }
}

pub fn cmd_equilibrium(
    cfg: &ExperimentConfig,
    guess: &Guess,
    tol: f64,
    max_iter: usize,
    out_dir: &Path,
) -> Result<Outcome, CliError> {
    let g = cfg.grid();
    let nl = cfg.nonlinearity();
    let start = match guess {
        Guess::Bump(a) => bump_guess(&g, *a),
        Guess::Seed => canonical_seed(&g, &nl),
        Guess::Zero => Field::zeros(g.n_interior()),
        Guess::File(p) => read_profile(p, &g)?,
    };
    let eq = solve_equilibrium(&start, &nl, &g, tol, max_iter)?;
    let path = out_dir.join(format!("{}_equilibrium.csv", cfg.model.name()));
    write_profile(&path, &g, &eq.psi)?;
    let mut r = Report::new();
    r.push("csv", path.display());
    r.push("converged", eq.converged);
    r.push("iterations", eq.iterations);
    r.push("residual_hm1", eq.residual_hm1);
    r.push("e0", eq.e0);
    r.push("l2_norm", g.l2_norm(&eq.psi)?);
    r.push("max_abs", eq.psi.max_abs());
    r.push("center_value", eq.psi[g.n_interior() / 2]);
    r.push(
        "residual_history",
        eq.residual_history.iter().map(|v| format!("{v:e}")).collect::<Vec<_>>().join(" "),
    );
    let error = (!eq.converged)
        .then(|| CliError::Failed(format!("newton iteration did not reach tol = {tol:e}")));
    Ok(Outcome { report: r, error })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProbeCentre {
    Zero,
    Newton,
}

pub fn cmd_probe(
    cfg: &ExperimentConfig,
    centre: ProbeCentre,
    seed: u64,
    eps: (f64, f64, usize),
) -> Result<Report, CliError> {
    let g = cfg.grid();
    let nl = cfg.nonlinearity();
    let start = match centre {
        ProbeCentre::Zero => Field::zeros(g.n_interior()),
        ProbeCentre::Newton => canonical_seed(&g, &nl),
    };
    let psi = solve_equilibrium(&start, &nl, &g, DEFAULT_TOL, DEFAULT_MAX_ITER)?;
    if !psi.converged {
        return Err(CliError::Failed(format!(
            "no equilibrium to probe: newton stalled at residual {:e}",
            psi.residual_hm1
        )));
    }
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let random: Field = (0..g.n_interior()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let directions = [g.eigenmode(1)?, g.eigenmode(2)?, random];
    let p = lojasiewicz_probe(&psi, &nl, &g, &directions, &geometric_epsilons(eps.0, eps.1, eps.2))?;
    let mut r = Report::new();
    r.push("slope", p.slope);
    r.push("r_squared", p.r_squared);
    r.push("theta_estimate", 1.0 - p.slope);
    r.push("theta_theory", nl.lojasiewicz_theta(g.first_eigenvalue()));
    r.push("pooled_slope", p.pooled_slope);
    r.push("pooled_r_squared", p.pooled_r_squared);
    r.push(
        "direction_slopes",
        p.direction_slopes.iter().map(|s| s.to_string()).collect::<Vec<_>>().join(" "),
    );
    r.push("samples", p.samples);
    r.push("psi_l2_norm", g.l2_norm(&psi.psi)?);
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FitKind {
    Polynomial,
    Stretched { alpha: f64 },
}

pub fn cmd_rate_fit(
    csv_path: &Path,
    column: &str,
    kind: FitKind,
    window: Option<(f64, f64)>,
    theta: Option<f64>,
    alpha: Option<f64>,
) -> Result<Report, CliError> {
    let data = read_columns(csv_path, "t", column)?;
    let series: Vec<SeriesSample> = data.iter().map(|&(t, value)| SeriesSample { t, value }).collect();
    let window = window.unwrap_or_else(|| {
        let lo = series.first().map(|s| s.t).unwrap_or(0.0);
        let hi = series.last().map(|s| s.t).unwrap_or(0.0);
        (lo, hi)
    });
    let mut r = Report::new();
    let fit = match kind {
        FitKind::Polynomial => fit_polynomial_decay(&series, window)?,
        FitKind::Stretched { alpha } => fit_stretched_exponential(&series, alpha, window)?,
    };
    match fit.model {
        RateModel::PolynomialDecay { lambda, prefactor } => {
            r.push("model", "polynomial");
            r.push("lambda", lambda);
            r.push("prefactor", prefactor);
        }
        RateModel::StretchedExponential { c, prefactor, exponent } => {
            r.push("model", "stretched");
            r.push("c", c);
            r.push("prefactor", prefactor);
            r.push("exponent", exponent);
        }
        _ => unreachable!("regression fits only"),
    }
    r.push("r_squared", fit.r_squared.unwrap_or(f64::NAN));
    r.push("window", format!("{} {}", window.0, window.1));
    r.push("samples", fit.samples);
    if let Ok(c) = classify_longtime(&series, &[0.0], &ClassifyParams::default()) {
        r.push("classification", c.label);
    }
    let alpha = alpha.or(match kind {
        FitKind::Stretched { alpha } => Some(alpha),
        FitKind::Polynomial => None,
    });
    if let (Some(theta), Some(alpha)) = (theta, alpha) {
        r.push("lambda_sup", lambda_sup_text(theoretical_lambda_sup(theta, alpha)?));
    }
    Ok(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct OdeParams {
    pub mu: f64,
    /// Decay exponent of `c (t+1)^{-α}`; below -1 selects the coefficient
    /// with the explicit solution instead.
    pub alpha: f64,
    pub c: f64,
    pub omega0: Option<f64>,
    pub omega0_dot: Option<f64>,
    pub dt: f64,
    pub t_final: f64,
    /// Mode for the discrete explicit-solution check (α < -1 only).
    pub explicit_mode: Option<usize>,
}

impl Default for OdeParams {
    fn default() -> Self {
        OdeParams {
            mu: 1.0,
            alpha: 2.0,
            c: 1.0,
            omega0: None,
            omega0_dot: None,
            dt: dampwave::ode_lab::DEFAULT_DT,
            t_final: 200.0,
            explicit_mode: None,
        }
    }
}

pub fn cmd_ode(cfg: &ExperimentConfig, p: &OdeParams, out_dir: &Path) -> Result<Report, CliError> {
    let explicit = p.alpha < -1.0;
    let (damping, w0, w1) = if explicit {
        let (w, w1, _) = explicit_profile(p.mu, p.alpha, 0.0);
        (explicit_solution_damping(p.mu, p.alpha)?, w, w1)
    } else if p.alpha >= 0.0 {
        (Damping::power_decay(p.c, p.alpha)?, 1.0, 0.0)
    } else {
        return Err(CliError::Usage(format!(
            "alpha = {} is neither a decay exponent (>= 0) nor below -1",
            p.alpha
        )));
    };
    if p.explicit_mode.is_some() && !explicit {
        return Err(CliError::Usage("--explicit-mode needs alpha < -1".into()));
    }
    let m = ModeOde::new(p.mu, damping, p.omega0.unwrap_or(w0), p.omega0_dot.unwrap_or(w1), p.t_final)?
        .with_dt(p.dt)?;
    let traj = integrate_mode(&m)?;

    let path = out_dir.join("ode.csv");
    let mut w = create(&path)?;
    w.write_record(["t", "omega", "omega_dot", "energy"]).map_err(|e| csv_err(&path, e))?;
    for s in &traj {
        w.write_record([s.t, s.omega, s.omega_dot, m.energy(s.omega, s.omega_dot)].map(fmt_float))
            .map_err(|e| csv_err(&path, e))?;
    }
    w.flush().map_err(|e| CliError::io(&path, e))?;

    let first = traj[0];
    let last = traj[traj.len() - 1];
    let e0 = m.energy(first.omega, first.omega_dot);
    let e1 = m.energy(last.omega, last.omega_dot);
    let series: Vec<SeriesSample> = traj.iter().map(|s| SeriesSample { t: s.t, value: s.omega }).collect();

    let mut r = Report::new();
    r.push("csv", path.display());
    r.push("steps", traj.len() - 1);
    r.push("energy_initial", e0);
    r.push("energy_final", e1);
    r.push("energy_ratio", if e0 > 0.0 { e1 / e0 } else { f64::NAN });
    if let Ok(c) = classify_longtime(&series, &[0.0], &ClassifyParams::default()) {
        r.push("classification", c.label);
    }
    if explicit {
        let dev = traj
            .iter()
            .map(|s| (s.omega - explicit_profile(p.mu, p.alpha, s.t).0).abs())
            .fold(0.0, f64::max);
        r.push("max_deviation_from_explicit", dev);
        if let Some(k) = p.explicit_mode {
            let rep = explicit_solution_check(p.mu, p.alpha, &cfg.grid(), k)?;
            r.push("mode", rep.mode);
            r.push("b", rep.b);
            r.push("w0", rep.w0);
            r.push("w0_dot", rep.w0_dot);
            r.push("ode_residual", rep.ode_residual);
            r.push("pde_residual", rep.pde_residual);
            for (t, d) in &rep.limit_distances {
                r.push(format!("distance_to_mode_at_{t}"), d);
            }
            r.push("hm1_g_mode", rep.hm1_g_mode);
            r.push("hm1_mode", rep.hm1_mode);
        }
    }
    Ok(r)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
}

impl std::str::FromStr for Figure {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "fig1" => Ok(Figure::Fig1),
            "fig2" => Ok(Figure::Fig2),
            "fig3" => Ok(Figure::Fig3),
            _ => Err(format!("unknown figure `{s}`; use fig1, fig2 or fig3")),
        }
    }
}

fn preset(model: ModelKind, a: f64, damping: usize) -> ExperimentConfig {
    ExperimentConfig {
        model,
        a,
        damping: DampingKind::Indexed(damping),
        ..ExperimentConfig::default()
    }
}

pub fn cmd_reproduce(fig: Figure, workers: Option<usize>, out_dir: &Path) -> Result<Outcome, CliError> {
    let mut manifest = Manifest::default();
    let mut report = Report::new();
    let mut error = None;
    match fig {
        Figure::Fig1 => {
            for model in [ModelKind::SineGordon, ModelKind::KleinGordon] {
                let cfg = preset(model, 1.0, 0);
                let norms = out_dir.join(format!("fig1_{}.csv", cfg.run_name()));
                let field = out_dir.join(format!("fig1_{}_field.csv", cfg.run_name()));
                // a snapshot every 2 time units
                let every = (2.0 / cfg.dt).round() as usize;
                let out = simulate_run(&cfg, &norms, Some(Snapshots { path: &field, every }))?;
                let a = analyze(&cfg, &out);
                report.push(format!("{}.energy_drift", model.name()), a.energy_drift);
                if let Some(c) = &a.classification {
                    report.push(format!("{}.classification", model.name()), c.label);
                }
                manifest.add(&norms, &cfg.hash());
                manifest.add(&field, &cfg.hash());
            }
        }
        Figure::Fig2 => {
            let configs: Vec<ExperimentConfig> = [ModelKind::SineGordon, ModelKind::KleinGordon]
                .into_iter()
                .flat_map(|m| (0..=6).map(move |i| preset(m, 1.0, i)))
                .collect();
            let runs = run_sweep(configs, out_dir, "fig2_", workers)?;
            let summary = out_dir.join("fig2_summary.csv");
            write_summary(&summary, &runs)?;
            for run in &runs {
                manifest.add(&run.file, &run.cfg.hash());
            }
            manifest.add(&summary, &preset(ModelKind::SineGordon, 1.0, 0).hash());
            let (r, e) = sweep_report(&runs);
            report.extend(r);
            error = e;
        }
        Figure::Fig3 => {
            let mut configs = vec![preset(ModelKind::KleinGordon, 1.0, 2)];
            for i in 0..=6 {
                configs.push(ExperimentConfig {
                    psi_source: PsiSource::NewtonFromFinal,
                    ..preset(ModelKind::KleinGordon, -0.1, i)
                });
            }
            let panel_a = run_sweep(configs[..1].to_vec(), out_dir, "fig3a_", workers)?;
            let panel_b = run_sweep(configs[1..].to_vec(), out_dir, "fig3b_", workers)?;
            let summary = out_dir.join("fig3_summary.csv");
            let runs: Vec<SweepRun> = panel_a.into_iter().chain(panel_b).collect();
            write_summary(&summary, &runs)?;
            let mut rates = Report::new();
            for (run, panel) in runs.iter().zip(std::iter::once("a").chain(std::iter::repeat("b"))) {
                manifest.add(&run.file, &run.cfg.hash());
                if let Ok(a) = &run.result {
                    let prefix = format!("{panel}.{}", run.cfg.damping.tag());
                    for (k, v) in analysis_report(a).0 {
                        rates.push(format!("{prefix}.{k}"), v);
                    }
                }
            }
            let rates_path = out_dir.join("fig3_rates.txt");
            write_text(&rates_path, &rates.to_string())?;
            manifest.add(&summary, &configs[0].hash());
            manifest.add(&rates_path, &configs[1].hash());
            let (r, e) = sweep_report(&runs);
            report.extend(r);
            error = e;
        }
    }
    let manifest_path = out_dir.join("manifest.tsv");
    manifest.write(&manifest_path)?;
    report.push("manifest", manifest_path.display());
    report.push("files", manifest.entries().len());
    Ok(Outcome { report, error })
}
