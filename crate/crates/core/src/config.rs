//! Plain-text run configuration.
//!
//! One `key = value` pair per line, `#` starts a comment. Frequencies are
//! ordinary frequencies ν in Hz (ω = 2πν); complex couplings are written as
//! `re+imj`. Every physical field must be present. Parameters come in one of
//! two modes:
//!
//! * effective: `delta_c_eff`, `delta_n_eff`, `G_c`, `G_n`
//! * raw drive: `g_c_bare`, `delta_c_bare`, `g_n_bare`, `delta_n_bare`, `omega_L`
//!
//! Both share `kappa_c`, `kappa_n`, `gamma_a`, `gamma_b`, `omega_b`,
//! `delta_a` and `g_N`. `eps_p` (dimensionless, default 1), the sweep keys
//! and the output keys are optional.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use thiserror::Error;

use crate::model::{self, hz, ParamError, RawDriveParams, SteadyState, SystemParams, ValidatedParams};
use crate::response::Engine;
use crate::sweep::{SweepSpec, SweepSpecError};
use crate::Complex;

const SHARED_KEYS: [&str; 7] = ["kappa_c", "kappa_n", "gamma_a", "gamma_b", "omega_b", "delta_a", "g_N"];
const EFFECTIVE_KEYS: [&str; 4] = ["delta_c_eff", "delta_n_eff", "G_c", "G_n"];
const RAW_KEYS: [&str; 5] = ["g_c_bare", "delta_c_bare", "g_n_bare", "delta_n_bare", "omega_L"];
const OPTIONAL_KEYS: [&str; 11] = [
    "eps_p",
    "delta_start",
    "delta_stop",
    "n_points",
    "fd_step",
    "prominence",
    "engine",
    "output",
    "format",
    "steady_tol",
    "steady_max_iter",
];

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("missing field `{0}`")]
    MissingField(String),
    #[error("both effective-coupling and raw-drive parameters are present")]
    ConflictingModes,
    #[error(transparent)]
    Param(#[from] ParamError),
    #[error(transparent)]
    Sweep(#[from] SweepSpecError),
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(format!("unknown format `{other}` (expected csv or json)")),
        }
    }
}

impl fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ParamMode {
    Effective(ValidatedParams),
    RawDrive(RawDriveParams),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub mode: ParamMode,
    pub sweep: SweepSpec,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub steady_tol: f64,
    pub steady_max_iter: usize,
}

impl RunConfig {
    /// Effective-coupling parameters, solving the steady state first in
    /// raw-drive mode.
    pub fn resolve(&self) -> Result<(ValidatedParams, Option<SteadyState>), crate::Error> {
        match self.mode {
            ParamMode::Effective(p) => Ok((p, None)),
            ParamMode::RawDrive(raw) => {
                let ss = model::solve_magnon_steady_state(&raw, self.steady_tol, self.steady_max_iter)?;
                let p = raw.effective(&ss).validate()?;
                Ok((p, Some(ss)))
            }
        }
    }
}

/// Parses a real number for `key`.
fn parse_real(line: usize, key: &str, v: &str) -> Result<f64, ConfigError> {
    v.parse::<f64>().map_err(|_| ConfigError::Parse {
        line,
        message: format!("`{key}`: expected a number, got `{v}`"),
    })
}

/// Parses `re`, `imj`, `re+imj` or `re-imj`.
pub fn parse_complex(s: &str) -> Option<Complex> {
    let s = s.trim();
    let Some(body) = s.strip_suffix(['j', 'i']) else {
        return s.parse::<f64>().ok().map(|re| Complex::new(re, 0.0));
    };
    // Split at the last sign that does not start the string or
    // an exponent.
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| matches!(bytes[k], b'+' | b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => {
            let re = body[..k].trim().parse::<f64>().ok()?;
            let im = match body[k..].trim() {
                "+" => 1.0,
                "-" => -1.0,
                t => t.parse::<f64>().ok()?,
            };
            Some(Complex::new(re, im))
        }
        None => {
            let im = match body.trim() {
                "" | "+" => 1.0,
                "-" => -1.0,
                t => t.parse::<f64>().ok()?,
            };
            Some(Complex::new(0.0, im))
        }
    }
}

struct Entries {
    map: BTreeMap<String, (usize, String)>,
}

impl Entries {
    fn has(&self, key: &str) -> bool {
        self.map.contains_key(key)
    }

    fn raw(&self, key: &str) -> Result<(usize, &str), ConfigError> {
        self.map
            .get(key)
            .map(|(l, v)| (*l, v.as_str()))
            .ok_or_else(|| ConfigError::MissingField(key.to_string()))
    }

    fn real(&self, key: &str) -> Result<f64, ConfigError> {
        let (line, v) = self.raw(key)?;
        parse_real(line, key, v)
    }

    /// A frequency in Hz, returned in rad/s.
    fn freq(&self, key: &str) -> Result<f64, ConfigError> {
        self.real(key).map(hz)
    }

    fn complex_freq(&self, key: &str) -> Result<Complex, ConfigError> {
        let (line, v) = self.raw(key)?;
        parse_complex(v).map(|c| c * hz(1.0)).ok_or_else(|| ConfigError::Parse {
            line,
            message: format!("`{key}`: expected a complex number like 4e6+0j, got `{v}`"),
        })
    }

    fn optional<T>(&self, key: &str, f: impl FnOnce(&Self) -> Result<T, ConfigError>) -> Result<Option<T>, ConfigError> {
        if self.has(key) {
            f(self).map(Some)
        } else {
            Ok(None)
        }
    }

    fn parsed<T: FromStr<Err = String>>(&self, key: &str) -> Result<Option<T>, ConfigError> {
        self.optional(key, |e| {
            let (line, v) = e.raw(key)?;
            v.parse::<T>().map_err(|message| ConfigError::Parse { line, message })
        })
    }
}

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut map = BTreeMap::new();
    for (idx, raw_line) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw_line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let Some((key, value)) = content.split_once('=') else {
            return Err(ConfigError::Parse { line, message: format!("expected `key = value`, got `{content}`") });
        };
        let key = key.trim();
        let value = value.trim();
        let known = SHARED_KEYS
            .iter()
            .chain(&EFFECTIVE_KEYS)
            .chain(&RAW_KEYS)
            .chain(&OPTIONAL_KEYS)
            .any(|k| *k == key);
        if !known {
            return Err(ConfigError::Parse { line, message: format!("unknown key `{key}`") });
        }
        if value.is_empty() {
            return Err(ConfigError::Parse { line, message: format!("`{key}` has no value") });
        }
        if map.insert(key.to_string(), (line, value.to_string())).is_some() {
            return Err(ConfigError::Parse { line, message: format!("duplicate key `{key}`") });
        }
    }
    Ok(Entries { map })
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let e = tokenize(text)?;

    let effective = EFFECTIVE_KEYS.iter().any(|k| e.has(k));
    let raw = RAW_KEYS.iter().any(|k| e.has(k));
    if effective && raw {
        return Err(ConfigError::ConflictingModes);
    }

    for key in SHARED_KEYS {
        e.raw(key)?;
    }
    let mode_keys: &[&str] = if raw { &RAW_KEYS } else { &EFFECTIVE_KEYS };
    for key in mode_keys {
        e.raw(key)?;
    }

    let kappa_c = e.freq("kappa_c")?;
    let kappa_n = e.freq("kappa_n")?;
    let gamma_a = e.freq("gamma_a")?;
    let gamma_b = e.freq("gamma_b")?;
    let omega_b = e.freq("omega_b")?;
    let delta_a = e.freq("delta_a")?;
    let g_atom = e.freq("g_N")?;
    let eps_p = e.optional("eps_p", |e| e.real("eps_p"))?.unwrap_or(1.0);

    let mode = if raw {
        let params = RawDriveParams {
            kappa_c,
            kappa_n,
            gamma_a,
            gamma_b,
            omega_b,
            delta_a,
            g_atom,
            eps_p,
            g_c_bare: e.freq("g_c_bare")?,
            delta_c_bare: e.freq("delta_c_bare")?,
            g_n_bare: e.freq("g_n_bare")?,
            delta_n_bare: e.freq("delta_n_bare")?,
            omega_l_rabi: e.freq("omega_L")?,
        };
        params.validate()?;
        ParamMode::RawDrive(params)
    } else {
        let params = SystemParams {
            kappa_c,
            kappa_n,
            gamma_a,
            gamma_b,
            omega_b,
            delta_a,
            delta_c_eff: e.freq("delta_c_eff")?,
            delta_n_eff: e.freq("delta_n_eff")?,
            g_atom,
            g_opto: e.complex_freq("G_c")?,
            g_magno: e.complex_freq("G_n")?,
            eps_p,
        };
        ParamMode::Effective(params.validate()?)
    };

    let defaults = SweepSpec::default_for(omega_b);
    let sweep = SweepSpec {
        delta_start: e.optional("delta_start", |e| e.freq("delta_start"))?.unwrap_or(defaults.delta_start),
        delta_stop: e.optional("delta_stop", |e| e.freq("delta_stop"))?.unwrap_or(defaults.delta_stop),
        n_points: match e.optional("n_points", |e| e.raw("n_points").map(|(l, v)| (l, v.to_string())))? {
            Some((line, v)) => v.parse::<usize>().map_err(|_| ConfigError::Parse {
                line,
                message: format!("`n_points`: expected a positive integer, got `{v}`"),
            })?,
            None => defaults.n_points,
        },
        fd_step: e.optional("fd_step", |e| e.freq("fd_step"))?.unwrap_or(defaults.fd_step),
        prominence: e.optional("prominence", |e| e.real("prominence"))?.unwrap_or(defaults.prominence),
        engine: e.parsed::<Engine>("engine")?.unwrap_or(defaults.engine),
    };
    sweep.validate()?;

    let steady_tol = e.optional("steady_tol", |e| e.real("steady_tol"))?.unwrap_or(model::DEFAULT_TOL);
    let steady_max_iter = match e.optional("steady_max_iter", |e| e.raw("steady_max_iter").map(|(l, v)| (l, v.to_string())))? {
        Some((line, v)) => v.parse::<usize>().map_err(|_| ConfigError::Parse {
            line,
            message: format!("`steady_max_iter`: expected a positive integer, got `{v}`"),
        })?,
        None => model::DEFAULT_MAX_ITER,
    };

    Ok(RunConfig {
        mode,
        sweep,
        output: e.optional("output", |e| e.raw("output").map(|(_, v)| PathBuf::from(v)))?,
        format: e.parsed::<OutputFormat>("format")?.unwrap_or_default(),
        steady_tol,
        steady_max_iter,
    })
}

pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|err| ConfigError::Io {
        path: path.display().to_string(),
        message: err.to_string(),
    })?;
    parse_config(&text)
}
