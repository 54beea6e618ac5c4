//! Settings resolution. Precedence is command-line flags, then the JSON
//! config file, then built-in defaults. The seed additionally falls back to
//! `WCE_SEED` before its default.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use wiener_chaos::gaussian_measure::MeasureDescriptor;
use wiener_chaos::poly::TermsDocument;

pub const DEFAULT_SEED: u64 = 42;
pub const SEED_ENV: &str = "WCE_SEED";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("malformed config {path}: {source}")]
    Parse {
        path: PathBuf,
        source: serde_json::Error,
    },
    #[error("{SEED_ENV}={0:?} is not an unsigned 64-bit integer")]
    EnvSeed(String),
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: &'static str, reason: String },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

/// A covariance given by name (`identityN`) or as explicit rows.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum CovSpec {
    Named(String),
    Matrix(Vec<Vec<f64>>),
}

impl CovSpec {
    pub fn parse_flag(s: &str) -> Result<Self, String> {
        if s.trim_start().starts_with('[') {
            serde_json::from_str(s).map(CovSpec::Matrix).map_err(|e| e.to_string())
        } else {
            Ok(CovSpec::Named(s.to_string()))
        }
    }

    pub fn rows(&self) -> Result<Vec<Vec<f64>>, ConfigError> {
        match self {
            CovSpec::Matrix(m) => Ok(m.clone()),
            CovSpec::Named(name) => {
                let n = name
                    .strip_prefix("identity")
                    .and_then(|k| k.parse::<usize>().ok())
                    .filter(|&k| k > 0)
                    .ok_or_else(|| ConfigError::Invalid {
                        key: "cov",
                        reason: format!("`{name}` is neither `identityN` nor a JSON matrix"),
                    })?;
                Ok((0..n)
                    .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
                    .collect())
            }
        }
    }
}

/// Keys accepted in a config file. Anything else is an error.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub workers: Option<usize>,
    pub confidence_multiplier: Option<f64>,
    pub format: Option<Format>,
    pub output: Option<PathBuf>,
    // isserlis
    pub cov: Option<CovSpec>,
    pub indices: Option<Vec<usize>>,
    pub max_order: Option<usize>,
    // hermite
    pub n: Option<usize>,
    pub max_degree: Option<usize>,
    // chaos, density, cameron-martin
    pub poly: Option<TermsDocument>,
    // verify
    pub suite: Option<String>,
    // skorokhod
    pub cells: Option<usize>,
    pub paths: Option<usize>,
    // density
    pub xs: Option<Vec<f64>>,
    // cameron-martin
    pub measure: Option<MeasureDescriptor>,
    pub h: Option<Vec<f64>>,
    pub points: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        serde_json::from_str(&text).map_err(|source| ConfigError::Parse {
            path: path.to_path_buf(),
            source,
        })
    }
}

/// `flag`, else `file`, else `default`.
pub fn pick<T>(flag: Option<T>, file: Option<T>, default: T) -> T {
    flag.or(file).unwrap_or(default)
}

pub fn resolve_seed(flag: Option<u64>, file: Option<u64>) -> Result<u64, ConfigError> {
    if let Some(s) = flag.or(file) {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v.trim().parse().map_err(|_| ConfigError::EnvSeed(v)),
        Err(_) => Ok(DEFAULT_SEED),
    }
}

/// `a:b:step` (inclusive) or a comma-separated list.
pub fn parse_grid(s: &str) -> Result<Vec<f64>, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() == 3 {
        let nums: Vec<f64> = parts
            .iter()
            .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
            .collect::<Result<_, _>>()?;
        let (a, b, step) = (nums[0], nums[1], nums[2]);
        if !(step > 0.0) || !(b >= a) {
            return Err(format!("grid `{s}` needs a <= b and step > 0"));
        }
        let n = ((b - a) / step + 1e-9).floor() as usize;
        return Ok((0..=n).map(|i| a + step * i as f64).collect());
    }
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect()
}

/// Comma-separated 1-based indices.
pub fn parse_indices(s: &str) -> Result<Vec<usize>, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("`{p}`: {e}")))
        .collect()
}
