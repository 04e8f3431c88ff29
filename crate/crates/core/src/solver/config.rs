//! Plain-text problem description: one `key = value` pair per line, `#`
//! starts a comment.
//!
//! ```text
//! # CS scheme, large time step
//! d11 = 1.0
//! d12 = 0.3
//! d21 = 0.3
//! d22 = 0.5
//! c1 = 2.0
//! m1 = 32
//! m2 = 32
//! dt = 0.01
//! theta = 0.5
//! steps = 100
//! scheme = mcs
//! initial = mode:1,2
//! ```

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use super::GridField;
use crate::spectrum::{FourierMode, GridSpec, PdeCoefficients, SpectrumError};
use crate::stability::{SchemeParams, StabilityError};

const KEYS: [&str; 16] = [
    "c1", "c2", "d11", "d12", "d21", "d22", "beta", "m1", "m2", "dx", "dy", "dt", "theta", "steps", "scheme",
    "initial",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got {text:?}")]
    Syntax { line: usize, text: String },
    #[error("unknown key {0:?}")]
    UnknownKey(String),
    #[error("key {0:?} given twice")]
    DuplicateKey(String),
    #[error("missing required key {0:?}")]
    Missing(&'static str),
    #[error("bad value for {key:?}: {msg}")]
    Value { key: String, msg: String },
    #[error(transparent)]
    Spectrum(#[from] SpectrumError),
    #[error(transparent)]
    Scheme(#[from] StabilityError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum SchemeKind {
    #[default]
    Mcs,
    Douglas,
}

impl FromStr for SchemeKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mcs" => Ok(SchemeKind::Mcs),
            "douglas" => Ok(SchemeKind::Douglas),
            other => Err(format!("unknown scheme {other:?} (expected mcs or douglas)")),
        }
    }
}

impl fmt::Display for SchemeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SchemeKind::Mcs => "mcs",
            SchemeKind::Douglas => "douglas",
        })
    }
}

/// Named initial-field presets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialCondition {
    /// Real part of the Fourier mode `(k1, k2)`.
    Mode(FourierMode),
    /// Unit value at grid point `(0, 0)`.
    Impulse,
    /// Uniform noise on `[-1, 1)`.
    Random(u64),
    Constant(f64),
}

impl InitialCondition {
    pub fn field(&self, grid: &GridSpec) -> GridField {
        match *self {
            InitialCondition::Mode(mode) => GridField::fourier_pair(grid, mode).0,
            InitialCondition::Impulse => GridField::impulse(grid.m1, grid.m2, 0, 0),
            InitialCondition::Random(seed) => GridField::random(grid.m1, grid.m2, seed),
            InitialCondition::Constant(v) => GridField::constant(grid.m1, grid.m2, v),
        }
    }
}

impl FromStr for InitialCondition {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, arg) = match s.split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s, None),
        };
        match (name, arg) {
            ("impulse", None) => Ok(InitialCondition::Impulse),
            ("mode", Some(a)) => {
                let (k1, k2) = a
                    .split_once(',')
                    .ok_or_else(|| format!("mode needs `k1,k2`, got {a:?}"))?;
                let k1 = k1.trim().parse().map_err(|e| format!("k1: {e}"))?;
                let k2 = k2.trim().parse().map_err(|e| format!("k2: {e}"))?;
                Ok(InitialCondition::Mode(FourierMode::new(k1, k2)))
            }
            ("random", Some(a)) => a
                .parse()
                .map(InitialCondition::Random)
                .map_err(|e| format!("seed: {e}")),
            ("constant", Some(a)) => a
                .parse()
                .map(InitialCondition::Constant)
                .map_err(|e| format!("value: {e}")),
            _ => Err(format!(
                "unknown initial condition {s:?} (expected mode:k1,k2 | impulse | random:seed | constant:value)"
            )),
        }
    }
}

impl fmt::Display for InitialCondition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialCondition::Mode(m) => write!(f, "mode:{},{}", m.k1, m.k2),
            InitialCondition::Impulse => f.write_str("impulse"),
            InitialCondition::Random(seed) => write!(f, "random:{seed}"),
            InitialCondition::Constant(v) => write!(f, "constant:{v}"),
        }
    }
}

/// A fully validated solver run.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemConfig {
    pub coeffs: PdeCoefficients,
    pub grid: GridSpec,
    pub params: SchemeParams,
    pub steps: usize,
    pub scheme: SchemeKind,
    pub initial: InitialCondition,
}

impl ProblemConfig {
    /// Parses and validates a config file. `m1`, `m2` and `dt` are required;
    /// coefficients default to zero, `dx = 1/m1`, `dy = 1/m2`, `beta = 0`,
    /// `theta = 0.5`, `steps = 1`, `scheme = mcs`, `initial = mode:1,1`.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let raw = parse_pairs(text)?;
        Self::from_pairs(&raw)
    }

    pub fn from_pairs(raw: &HashMap<String, String>) -> Result<Self, ConfigError> {
        if let Some(k) = raw.keys().find(|k| !KEYS.contains(&k.as_str())) {
            return Err(ConfigError::UnknownKey(k.clone()));
        }
        let num = |key: &'static str, default: Option<f64>| -> Result<f64, ConfigError> {
            match raw.get(key) {
                Some(v) => v
                    .parse::<f64>()
                    .map_err(|e| ConfigError::Value { key: key.to_string(), msg: e.to_string() }),
                None => default.ok_or(ConfigError::Missing(key)),
            }
        };
        let int = |key: &'static str, default: Option<usize>| -> Result<usize, ConfigError> {
            match raw.get(key) {
                Some(v) => v
                    .parse::<usize>()
                    .map_err(|e| ConfigError::Value { key: key.to_string(), msg: e.to_string() }),
                None => default.ok_or(ConfigError::Missing(key)),
            }
        };
        let parsed = |key: &str| -> Option<&str> { raw.get(key).map(String::as_str) };

        let coeffs = PdeCoefficients::new(
            num("c1", Some(0.0))?,
            num("c2", Some(0.0))?,
            num("d11", Some(0.0))?,
            num("d12", Some(0.0))?,
            num("d21", Some(0.0))?,
            num("d22", Some(0.0))?,
        )?;
        let m1 = int("m1", None)?;
        let m2 = int("m2", None)?;
        let grid = GridSpec::new(
            m1,
            m2,
            num("dx", Some(1.0 / m1 as f64))?,
            num("dy", Some(1.0 / m2 as f64))?,
            num("beta", Some(0.0))?,
        )?;
        let params = SchemeParams::new(num("theta", Some(0.5))?, num("dt", None)?)?;
        let steps = int("steps", Some(1))?;
        let scheme = match parsed("scheme") {
            Some(s) => s.parse().map_err(|msg| ConfigError::Value { key: "scheme".into(), msg })?,
            None => SchemeKind::Mcs,
        };
        let initial = match parsed("initial") {
            Some(s) => s.parse().map_err(|msg| ConfigError::Value { key: "initial".into(), msg })?,
            None => InitialCondition::Mode(FourierMode::new(1, 1)),
        };
        if let InitialCondition::Mode(mode) = initial {
            if !mode.in_grid(&grid) {
                return Err(ConfigError::Value {
                    key: "initial".into(),
                    msg: format!("mode ({}, {}) outside the {m1} x {m2} grid", mode.k1, mode.k2),
                });
            }
        }
        Ok(Self { coeffs, grid, params, steps, scheme, initial })
    }
}

/// Splits the file into `key -> value`, rejecting malformed lines and repeats.
pub fn parse_pairs(text: &str) -> Result<HashMap<String, String>, ConfigError> {
    let mut out = HashMap::new();
    for (n, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: n + 1, text: line.to_string() })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(ConfigError::Syntax { line: n + 1, text: line.to_string() });
        }
        if out.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ConfigError::DuplicateKey(k.to_string()));
        }
    }
    Ok(out)
}
