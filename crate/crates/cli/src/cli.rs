use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::commands::{
    cmd_equilibrium, cmd_ode, cmd_probe, cmd_rate_fit, cmd_reproduce, cmd_simulate, cmd_sweep, parse_damping_list,
    FitKind, Figure, Guess, OdeParams, Outcome, ProbeCentre,
};
use crate::config::{parse_config, ExperimentConfig};
use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(name = "dampwave", version, about = "Damped semilinear wave experiments")]
pub struct Cli {
    /// Experiment configuration (`key = value` lines).
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Output directory; overrides `out_dir`.
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Configuration override, repeatable.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Worker threads for sweeps.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FitModelArg {
    Polynomial,
    Stretched,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProbeAt {
    Zero,
    Newton,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment and write its diagnostics CSV.
    Simulate,
    /// Run the configured model once per damping h0..h6.
    Sweep {
        #[arg(long, value_delimiter = ',', default_value = "h0,h1,h2,h3,h4,h5,h6")]
        dampings: Vec<String>,
    },
    /// Solve for a stationary state with Newton's method.
    Equilibrium {
        /// bump[:amplitude], seed, zero or file:<path>
        #[arg(long, default_value = "bump")]
        guess: Guess,
        #[arg(long, default_value_t = dampwave::equilibria::DEFAULT_TOL)]
        tol: f64,
        #[arg(long, default_value_t = dampwave::equilibria::DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Measure the gradient-inequality exponent around an equilibrium.
    Probe {
        #[arg(long, value_enum, default_value_t = ProbeAt::Zero)]
        at: ProbeAt,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 1e-3)]
        eps_min: f64,
        #[arg(long, default_value_t = 1e-1)]
        eps_max: f64,
        #[arg(long, default_value_t = 12)]
        eps_count: usize,
    },
    /// Fit a decay law to one column of a CSV.
    RateFit {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long, default_value = "l2_u")]
        column: String,
        #[arg(long, value_enum, default_value_t = FitModelArg::Polynomial)]
        model: FitModelArg,
        /// Damping exponent; required for the stretched model.
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<f64>,
        /// Fit window `lo,hi`.
        #[arg(long, value_parser = parse_window, allow_hyphen_values = true)]
        window: Option<(f64, f64)>,
        /// Gradient-inequality exponent, to print the theoretical rate bound.
        #[arg(long)]
        theta: Option<f64>,
    },
    /// Integrate a single damped mode.
    Ode {
        #[arg(long, default_value_t = 1.0)]
        mu: f64,
        /// Decay exponent of c(t+1)^-alpha; below -1 uses the explicit-solution coefficient.
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        alpha: f64,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, allow_negative_numbers = true)]
        omega0: Option<f64>,
        #[arg(long, allow_negative_numbers = true)]
        omega0_dot: Option<f64>,
        #[arg(long, default_value_t = dampwave::ode_lab::DEFAULT_DT)]
        dt: f64,
        #[arg(long = "t-final", default_value_t = 200.0)]
        t_final: f64,
        /// Check the explicit solution on grid mode k.
        #[arg(long)]
        explicit_mode: Option<usize>,
    },
    /// Regenerate the data behind a reference figure.
    Reproduce {
        /// fig1, fig2 or fig3
        figure: Figure,
    },
}

fn parse_window(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or("expected `lo,hi`")?;
    let num = |v: &str| v.trim().parse::<f64>().map_err(|_| format!("`{v}` is not a number"));
    Ok((num(lo)?, num(hi)?))
}

fn load_config(cli: &Cli) -> Result<ExperimentConfig, CliError> {
    let cfg = match &cli.config {
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::io(p, e))?;
            parse_config(&text)?
        }
        None => ExperimentConfig::default(),
    };
    Ok(cfg.with_overrides(&cli.set)?)
}

fn dispatch(cli: &Cli) -> Result<Outcome, CliError> {
    let cfg = load_config(cli)?;
    let out: &Path = cli.out.as_deref().unwrap_or(&cfg.out_dir);
    let ok = |report| Ok(Outcome { report, error: None });
    match &cli.command {
        Command::Simulate => ok(cmd_simulate(&cfg, out)?),
        Command::Sweep { dampings } => cmd_sweep(&cfg, &parse_damping_list(dampings)?, cli.workers, out),
        Command::Equilibrium { guess, tol, max_iter } => cmd_equilibrium(&cfg, guess, *tol, *max_iter, out),
        Command::Probe {
            at,
            seed,
            eps_min,
            eps_max,
            eps_count,
        } => {
            let centre = match at {
                ProbeAt::Zero => ProbeCentre::Zero,
                ProbeAt::Newton => ProbeCentre::Newton,
            };
            ok(cmd_probe(&cfg, centre, *seed, (*eps_min, *eps_max, *eps_count))?)
        }
        Command::RateFit {
            csv,
            column,
            model,
            alpha,
            window,
            theta,
        } => {
            let kind = match model {
                FitModelArg::Polynomial => FitKind::Polynomial,
                FitModelArg::Stretched => FitKind::Stretched {
                    alpha: alpha.ok_or_else(|| CliError::Usage("--model stretched needs --alpha".into()))?,
                },
            };
            ok(cmd_rate_fit(csv, column, kind, *window, *theta, *alpha)?)
        }
        Command::Ode {
            mu,
            alpha,
            c,
            omega0,
            omega0_dot,
            dt,
            t_final,
            explicit_mode,
        } => {
            let p = OdeParams {
                mu: *mu,
                alpha: *alpha,
                c: *c,
                omega0: *omega0,
                omega0_dot: *omega0_dot,
                dt: *dt,
                t_final: *t_final,
                explicit_mode: *explicit_mode,
            };
            ok(cmd_ode(&cfg, &p, out)?)
        }
        Command::Reproduce { figure } => cmd_reproduce(*figure, cli.workers, out),
    }
}

/// Parses `args`, runs the command, prints the report to `stdout` and
/// errors to `stderr`, and returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return 1;
            }
            let _ = write!(stdout, "{e}");
            return 0;
        }
    };
    match dispatch(&cli) {
        Ok(Outcome { report, error }) => {
            let _ = write!(stdout, "{report}");
            match error {
                None => 0,
                Some(e) => {
                    let _ = writeln!(stderr, "dampwave: {e}");
                    e.exit_code()
                }
            }
        }
        Err(e) => {
            let _ = writeln!(stderr, "dampwave: {e}");
            e.exit_code()
        }
    }
}
