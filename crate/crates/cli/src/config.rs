//! Flat `key = value` experiment configuration.
//!
//! Every key is optional; missing keys take the reference values
//! (sine-Gordon, b = 1, no damping, L = 20, dx = 0.1, dt = 0.05, T = 200,
//! c = 0.2). Overrides from `--set key=value` are applied after the file.

use std::collections::HashMap;
use std::fmt;
use std::path::PathBuf;

use dampwave::integrator::{cfl_check, SchemeConfig};
use dampwave::physics::preset_damping;
use dampwave::{Damping, Grid1D, Nonlinearity};
use sha2::{Digest, Sha256};
use thiserror::Error;

/// Where an offending setting came from.
#[derive(Debug, Clone, PartialEq)]
pub enum Origin {
    Line(usize),
    Override(String),
    Default,
}

impl fmt::Display for Origin {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Origin::Line(n) => write!(f, "line {n}"),
            Origin::Override(s) => write!(f, "--set {s}"),
            Origin::Default => write!(f, "defaults"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("{origin}: expected `key = value`, got `{text}`")]
    Syntax { origin: Origin, text: String },
    #[error("{origin}: unknown key `{key}`")]
    UnknownKey { origin: Origin, key: String },
    #[error("{origin}: `{key}` expects {expected}, got `{value}`")]
    TypeMismatch {
        origin: Origin,
        key: String,
        value: String,
        expected: &'static str,
    },
    #[error("{origin}: {message}")]
    ConstraintViolation { origin: Origin, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    SineGordon,
    KleinGordon,
    LinearMass,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::SineGordon => "sine_gordon",
            ModelKind::KleinGordon => "klein_gordon",
            ModelKind::LinearMass => "linear_mass",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DampingKind {
    /// One of the seven reference coefficients h0..h6.
    Indexed(usize),
    Zero,
    Constant,
    PowerDecay,
    PowerGrowth,
}

impl DampingKind {
    pub fn tag(self) -> String {
        match self {
            DampingKind::Indexed(i) => format!("h{i}"),
            DampingKind::Zero => "zero".into(),
            DampingKind::Constant => "constant".into(),
            DampingKind::PowerDecay => "power_decay".into(),
            DampingKind::PowerGrowth => "power_growth".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PsiSource {
    Zero,
    NewtonFromFinal,
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialData {
    /// Zero displacement, breather velocity profile.
    Breather,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelKind,
    pub b: f64,
    pub a: f64,
    pub p: f64,
    pub damping: DampingKind,
    pub damping_c: Option<f64>,
    pub damping_alpha: Option<f64>,
    pub half_length: f64,
    pub dx: f64,
    pub dt: f64,
    pub t_final: f64,
    pub wave_speed: f64,
    pub eta: f64,
    pub record_every: usize,
    pub out_dir: PathBuf,
    pub psi_source: PsiSource,
    pub initial: InitialData,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            model: ModelKind::SineGordon,
            b: 1.0,
            a: 1.0,
            p: 3.0,
            damping: DampingKind::Indexed(0),
            damping_c: None,
            damping_alpha: None,
            half_length: 20.0,
            dx: 0.1,
            dt: 0.05,
            t_final: 200.0,
            wave_speed: 0.2,
            eta: 0.01,
            record_every: 4,
            out_dir: PathBuf::from("out"),
            psi_source: PsiSource::Zero,
            initial: InitialData::Breather,
        }
    }
}

pub const KEYS: &[&str] = &[
    "model",
    "b",
    "a",
    "p",
    "damping",
    "damping_c",
    "damping_alpha",
    "L",
    "dx",
    "dt",
    "T",
    "c",
    "eta",
    "record_every",
    "out_dir",
    "psi_source",
    "initial",
];

impl ExperimentConfig {
    pub fn grid(&self) -> Grid1D {
        Grid1D::from_spacing(self.half_length, self.dx).expect("validated grid")
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        match self.model {
            ModelKind::SineGordon => Nonlinearity::SineGordon { b: self.b },
            ModelKind::KleinGordon => Nonlinearity::KleinGordon { a: self.a, p: self.p },
            ModelKind::LinearMass => Nonlinearity::LinearMass { b: self.b },
        }
    }

    pub fn damping(&self) -> Damping {
        self.try_damping().expect("validated damping")
    }

    fn try_damping(&self) -> Result<Damping, String> {
        let c = self.damping_c.unwrap_or(1.0);
        let need_alpha = || {
            self.damping_alpha
                .ok_or_else(|| format!("damping `{}` needs damping_alpha", self.damping.tag()))
        };
        let d = match self.damping {
            DampingKind::Indexed(i) => {
                if self.damping_c.is_some() || self.damping_alpha.is_some() {
                    return Err(format!(
                        "damping `h{i}` is fixed; damping_c and damping_alpha do not apply"
                    ));
                }
                preset_damping(i)
            }
            DampingKind::Zero => Ok(Damping::Zero),
            DampingKind::Constant => Damping::constant(c),
            DampingKind::PowerDecay => Damping::power_decay(c, need_alpha()?),
            DampingKind::PowerGrowth => Damping::power_growth(c, need_alpha()?),
        };
        d.map_err(|e| e.to_string())
    }

    pub fn scheme(&self) -> SchemeConfig {
        SchemeConfig::new(self.dt, self.t_final, 1.0).expect("validated scheme")
    }

    /// File stem used for this run's outputs, e.g. `sine_gordon_h3`.
    pub fn run_name(&self) -> String {
        format!("{}_{}", self.model.name(), self.damping.tag())
    }

    /// Every setting except `out_dir`, one `key = value` per line in a fixed
    /// order. Floats use the shortest exact representation.
    pub fn canonical(&self) -> String {
        let opt = |v: Option<f64>| v.map(|x| format!("{x:?}")).unwrap_or_else(|| "none".into());
        let psi = match &self.psi_source {
            PsiSource::Zero => "zero".to_string(),
            PsiSource::NewtonFromFinal => "newton-from-final".to_string(),
            PsiSource::File(p) => format!("file:{}", p.display()),
        };
        let initial = match self.initial {
            InitialData::Breather => "breather",
            InitialData::Zero => "zero",
        };
        [
            format!("model = {}", self.model.name()),
            format!("b = {:?}", self.b),
            format!("a = {:?}", self.a),
            format!("p = {:?}", self.p),
            format!("damping = {}", self.damping.tag()),
            format!("damping_c = {}", opt(self.damping_c)),
            format!("damping_alpha = {}", opt(self.damping_alpha)),
            format!("L = {:?}", self.half_length),
            format!("dx = {:?}", self.dx),
            format!("dt = {:?}", self.dt),
            format!("T = {:?}", self.t_final),
            format!("c = {:?}", self.wave_speed),
            format!("eta = {:?}", self.eta),
            format!("record_every = {}", self.record_every),
            format!("psi_source = {psi}"),
            format!("initial = {initial}"),
        ]
        .join("\n")
            + "\n"
    }

    /// SHA-256 of [`Self::canonical`], hex encoded.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }

    /// Applies `key = value` pairs, then re-validates.
    pub fn with_overrides(mut self, overrides: &[String]) -> Result<Self, ConfigError> {
        let mut origins = Origins::default();
        for o in overrides {
            let origin = Origin::Override(o.clone());
            let (k, v) = split_pair(o).ok_or_else(|| ConfigError::Syntax {
                origin: origin.clone(),
                text: o.clone(),
            })?;
            self.set(k, v, &origin)?;
            if let Some(key) = KEYS.iter().find(|x| **x == k) {
                origins.0.insert(key, origin);
            }
        }
        self.validate(&origins)?;
        Ok(self)
    }

    fn set(&mut self, key: &str, value: &str, origin: &Origin) -> Result<(), ConfigError> {
        let float = |expected| {
            value.parse::<f64>().map_err(|_| ConfigError::TypeMismatch {
                origin: origin.clone(),
                key: key.to_string(),
                value: value.to_string(),
                expected,
            })
        };
        let mismatch = |expected| ConfigError::TypeMismatch {
            origin: origin.clone(),
            key: key.to_string(),
            value: value.to_string(),
            expected,
        };
        match key {
            "model" => {
                self.model = match value.replace('-', "_").as_str() {
                    "sine_gordon" => ModelKind::SineGordon,
                    "klein_gordon" => ModelKind::KleinGordon,
                    "linear_mass" => ModelKind::LinearMass,
                    _ => return Err(mismatch("sine_gordon, klein_gordon or linear_mass")),
                }
            }
            "b" => self.b = float("a number")?,
            "a" => self.a = float("a number")?,
            "p" => self.p = float("a number")?,
            "damping" => self.damping = parse_damping(value).ok_or_else(|| mismatch("h0..h6, zero, constant, power_decay or power_growth"))?,
            "damping_c" => self.damping_c = Some(float("a number")?),
            "damping_alpha" => self.damping_alpha = Some(float("a number")?),
            "L" => self.half_length = float("a number")?,
            "dx" => self.dx = float("a number")?,
            "dt" => self.dt = float("a number")?,
            "T" => self.t_final = float("a number")?,
            "c" => self.wave_speed = float("a number")?,
            "eta" => self.eta = float("a number")?,
            "record_every" => {
                self.record_every = value.parse::<usize>().map_err(|_| mismatch("a positive integer"))?
            }
            "out_dir" => self.out_dir = PathBuf::from(value),
            "psi_source" => {
                self.psi_source = match value {
                    "zero" => PsiSource::Zero,
                    "newton-from-final" => PsiSource::NewtonFromFinal,
                    v => match v.strip_prefix("file:") {
                        Some(p) if !p.is_empty() => PsiSource::File(PathBuf::from(p)),
                        _ => return Err(mismatch("zero, newton-from-final or file:<path>")),
                    },
                }
            }
            "initial" => {
                self.initial = match value {
                    "breather" => InitialData::Breather,
                    "zero" => InitialData::Zero,
                    _ => return Err(mismatch("breather or zero")),
                }
            }
            _ => {
                return Err(ConfigError::UnknownKey {
                    origin: origin.clone(),
                    key: key.to_string(),
                })
            }
        }
        Ok(())
    }

    fn validate(&self, origins: &Origins) -> Result<(), ConfigError> {
        let fail = |keys: &[&str], message: String| ConfigError::ConstraintViolation {
            origin: origins.first(keys),
            message,
        };
        let finite_pos = |v: f64| v.is_finite() && v > 0.0;
        if !finite_pos(self.half_length) {
            return Err(fail(&["L"], format!("L must be > 0, got {}", self.half_length)));
        }
        if !finite_pos(self.dx) {
            return Err(fail(&["dx"], format!("dx must be > 0, got {}", self.dx)));
        }
        if let Err(e) = Grid1D::from_spacing(self.half_length, self.dx) {
            return Err(fail(&["dx", "L"], e.to_string()));
        }
        if !finite_pos(self.dt) {
            return Err(fail(&["dt"], format!("dt must be > 0, got {}", self.dt)));
        }
        if !finite_pos(self.t_final) {
            return Err(fail(&["T"], format!("T must be > 0, got {}", self.t_final)));
        }
        let scheme = SchemeConfig::new(self.dt, self.t_final, 1.0).map_err(|e| fail(&["dt", "T"], e.to_string()))?;
        if !cfl_check(&scheme, &self.grid()) {
            return Err(fail(
                &["dt", "dx"],
                format!("dt = {} exceeds the CFL bound dx = {}", self.dt, self.dx),
            ));
        }
        if !(self.wave_speed > 0.0 && self.wave_speed < 1.0) {
            return Err(fail(&["c"], format!("c must lie in (0, 1), got {}", self.wave_speed)));
        }
        if !(self.eta >= 0.0 && self.eta < 1.0) {
            return Err(fail(&["eta"], format!("eta must lie in [0, 1), got {}", self.eta)));
        }
        if self.record_every == 0 {
            return Err(fail(&["record_every"], "record_every must be at least 1".into()));
        }
        let nl = match self.model {
            ModelKind::SineGordon => Nonlinearity::sine_gordon(self.b),
            ModelKind::KleinGordon => Nonlinearity::klein_gordon(self.a, self.p),
            ModelKind::LinearMass => Nonlinearity::linear_mass(self.b),
        };
        nl.map_err(|e| fail(&["b", "a", "p", "model"], e.to_string()))?;
        self.try_damping()
            .map_err(|m| fail(&["damping", "damping_c", "damping_alpha"], m))?;
        Ok(())
    }
}

#[derive(Debug, Default)]
struct Origins(HashMap<&'static str, Origin>);

impl Origins {
    fn first(&self, keys: &[&str]) -> Origin {
        keys.iter()
            .find_map(|k| self.0.get(k).cloned())
            .unwrap_or(Origin::Default)
    }
}

fn parse_damping(v: &str) -> Option<DampingKind> {
    if let Some(i) = v.strip_prefix('h').and_then(|s| s.parse::<usize>().ok()) {
        return (i <= 6).then_some(DampingKind::Indexed(i));
    }
    match v {
        "zero" => Some(DampingKind::Zero),
        "constant" => Some(DampingKind::Constant),
        "power_decay" => Some(DampingKind::PowerDecay),
        "power_growth" => Some(DampingKind::PowerGrowth),
        _ => None,
    }
}

fn split_pair(line: &str) -> Option<(&str, &str)> {
    let (k, v) = line.split_once('=')?;
    let (k, v) = (k.trim(), v.trim());
    (!k.is_empty() && !v.is_empty()).then_some((k, v))
}

pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let mut cfg = ExperimentConfig::default();
    let mut origins = Origins::default();
    for (i, raw) in text.lines().enumerate() {
        let origin = Origin::Line(i + 1);
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = split_pair(line).ok_or_else(|| ConfigError::Syntax {
            origin: origin.clone(),
            text: raw.to_string(),
        })?;
        cfg.set(k, v, &origin)?;
        if let Some(key) = KEYS.iter().find(|x| **x == k) {
            origins.0.insert(key, origin);
        }
    }
    cfg.validate(&origins)?;
    Ok(cfg)
}
