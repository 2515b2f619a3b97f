//! Run configuration: `key = value` files plus flag overrides.

use std::fmt;
use std::str::FromStr;

use nested_mzi::{BeamSplitterParams, NamedFamilyId, ProbeSpec, ProbeStrength};

use crate::CliError;

pub const KEYS: [&str; 8] = [
    "alpha2",
    "epsilon",
    "probes",
    "family",
    "tolerance",
    "seed",
    "samples",
    "format",
];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Format {
    #[default]
    Text,
    Csv,
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" => Ok(Self::Text),
            "csv" => Ok(Self::Csv),
            _ => Err("expected `text` or `csv`".into()),
        }
    }
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Text => "text",
            Self::Csv => "csv",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub alpha2: f64,
    pub epsilon: f64,
    /// Comma separated built-in probe ids.
    pub probes: String,
    pub family: NamedFamilyId,
    pub tolerance: f64,
    pub seed: u64,
    pub samples: u64,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            alpha2: 1.0 / 3.0,
            epsilon: 1e-4,
            probes: "a,d,b,c,e".into(),
            family: NamedFamilyId::FA,
            tolerance: 1e-10,
            seed: 0,
            samples: 100_000,
            format: Format::Text,
        }
    }
}

impl RunConfig {
    pub fn params(&self) -> BeamSplitterParams {
        BeamSplitterParams::new(self.alpha2).expect("validated")
    }

    pub fn strength(&self) -> ProbeStrength {
        ProbeStrength::new(self.epsilon).expect("validated")
    }

    pub fn probe_specs(&self) -> Vec<ProbeSpec> {
        ProbeSpec::builtin_set(&self.probes).expect("validated")
    }

    fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |reason: String| CliError::Config {
            key: key.to_string(),
            reason,
        };
        match key {
            "alpha2" => {
                let x = parse_real(value).map_err(bad)?;
                if !(x > 0.0 && x < 1.0) {
                    return Err(bad(format!(
                        "must satisfy 0 < α, β < 1, i.e. 0 < alpha2 < 1 (got {value})"
                    )));
                }
                self.alpha2 = x;
            }
            "epsilon" => {
                let x = parse_real(value).map_err(bad)?;
                if !(0.0..1.0).contains(&x) {
                    return Err(bad(format!("must satisfy 0 <= epsilon < 1 (got {value})")));
                }
                self.epsilon = x;
            }
            "probes" => {
                let specs = ProbeSpec::builtin_set(value).map_err(|e| bad(e.to_string()))?;
                if specs.is_empty() {
                    return Err(bad("no probes listed".into()));
                }
                self.probes = specs.iter().map(|p| p.id()).collect::<Vec<_>>().join(",");
            }
            "family" => {
                self.family = value.parse().map_err(bad)?;
            }
            "tolerance" => {
                let x = parse_real(value).map_err(bad)?;
                if !(x > 0.0 && x.is_finite()) {
                    return Err(bad(format!("must be positive (got {value})")));
                }
                self.tolerance = x;
            }
            "seed" => {
                self.seed = value
                    .parse()
                    .map_err(|_| bad(format!("not an integer: {value}")))?
            }
            "samples" => {
                let n: u64 = value
                    .parse()
                    .map_err(|_| bad(format!("not an integer: {value}")))?;
                if n == 0 {
                    return Err(bad("must be at least 1".into()));
                }
                self.samples = n;
            }
            "format" => self.format = value.parse().map_err(bad)?,
            _ => {
                return Err(CliError::Config {
                    key: key.to_string(),
                    reason: format!("unknown key (expected one of {})", KEYS.join(", ")),
                })
            }
        }
        Ok(())
    }
}

/// Reals, also accepting `p/q` fractions such as `1/3`.
fn parse_real(s: &str) -> Result<f64, String> {
    let x = match s.split_once('/') {
        Some((p, q)) => {
            let p: f64 = p.trim().parse().map_err(|_| format!("not a number: {s}"))?;
            let q: f64 = q.trim().parse().map_err(|_| format!("not a number: {s}"))?;
            p / q
        }
        None => s.parse().map_err(|_| format!("not a number: {s}"))?,
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(format!("not finite: {s}"))
    }
}

/// Reads `source` (one `key = value` per line, `#` starts a comment), then
/// applies `overrides` in order. Later assignments win.
pub fn parse_config(source: &str, overrides: &[(String, String)]) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::default();
    for (n, raw) in source.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| CliError::Config {
            key: format!("line {}", n + 1),
            reason: format!("expected key = value, got `{line}`"),
        })?;
        cfg.set(key.trim(), value.trim())?;
    }
    for (key, value) in overrides {
        cfg.set(key, value.trim())?;
    }
    Ok(cfg)
}
