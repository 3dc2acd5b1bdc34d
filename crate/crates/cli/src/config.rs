//! Run configuration read from TOML.
//!
//! ```toml
//! [vorticity]
//! kind = "constant"
//! b = -1.0
//!
//! [solve]
//! s = 0.36
//! period = "auto"
//! n_q = 128
//! n_p = 64
//! a_max = 0.05
//! n_steps = 5
//! output_path = "branch"
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use vortwave::VorticitySpec;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub vorticity: VorticitySpec,
    pub laminar: Option<LaminarConfig>,
    pub dispersion: Option<DispersionConfig>,
    pub solve: Option<SolveConfig>,
    pub verify: Option<VerifyConfig>,
    pub flux: Option<FluxConfig>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaminarConfig {
    pub r: f64,
    pub s_range: [f64; 2],
    pub n_samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DispersionConfig {
    pub s: Option<f64>,
    pub s_range: Option<[f64; 2]>,
    pub n_samples: Option<usize>,
    pub n_nodes: usize,
}

/// A number or the string `"auto"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AutoOr<T> {
    Value(T),
    Keyword(String),
}

impl<T> AutoOr<T> {
    fn check(&self, field: &str) -> CliResult<()> {
        match self {
            AutoOr::Keyword(k) if k != "auto" => Err(CliError::Config(format!(
                "{field} must be a value or \"auto\", got \"{k}\""
            ))),
            _ => Ok(()),
        }
    }

    pub fn value(&self) -> Option<&T> {
        match self {
            AutoOr::Value(v) => Some(v),
            AutoOr::Keyword(_) => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveConfig {
    pub s: f64,
    pub period: AutoOr<f64>,
    pub n_q: usize,
    pub n_p: usize,
    pub a_max: f64,
    pub n_steps: usize,
    pub output_path: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    pub solution_path: String,
    pub s_probe: AutoOr<Vec<f64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FluxConfig {
    pub solution_path: String,
    pub s: f64,
}

fn finite(field: &str, v: f64) -> CliResult<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{field} must be finite, got {v}")))
    }
}

fn positive(field: &str, v: f64) -> CliResult<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{field} must be positive, got {v}")))
    }
}

fn range(field: &str, r: [f64; 2]) -> CliResult<()> {
    finite(field, r[0])?;
    finite(field, r[1])?;
    if r[0] < r[1] {
        Ok(())
    } else {
        Err(CliError::Config(format!("{field} must be increasing, got {r:?}")))
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::file(path, e))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> CliResult<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    /// Every numeric field is checked here, before any computation.
    pub fn validate(&self) -> CliResult<()> {
        vortwave::VorticityModel::from_spec(self.vorticity.clone())
            .map_err(|e| CliError::Config(format!("vorticity: {e}")))?;
        if let Some(l) = &self.laminar {
            finite("laminar.r", l.r)?;
            range("laminar.s_range", l.s_range)?;
            if l.n_samples < 2 {
                return Err(CliError::Config("laminar.n_samples must be at least 2".into()));
            }
        }
        if let Some(d) = &self.dispersion {
            match (d.s, d.s_range) {
                (Some(s), None) => positive("dispersion.s", s)?,
                (None, Some(r)) => {
                    range("dispersion.s_range", r)?;
                    if d.n_samples.unwrap_or(0) < 2 {
                        return Err(CliError::Config(
                            "dispersion.n_samples must be at least 2 with s_range".into(),
                        ));
                    }
                }
                _ => {
                    return Err(CliError::Config(
                        "dispersion needs exactly one of s and s_range".into(),
                    ))
                }
            }
            if d.n_nodes < vortwave::dispersion::MIN_NODES {
                return Err(CliError::Config(format!(
                    "dispersion.n_nodes must be at least {}",
                    vortwave::dispersion::MIN_NODES
                )));
            }
        }
        if let Some(s) = &self.solve {
            positive("solve.s", s.s)?;
            s.period.check("solve.period")?;
            if let Some(&l) = s.period.value() {
                positive("solve.period", l)?;
            }
            if s.n_q < 16 || s.n_q % 2 != 0 {
                return Err(CliError::Config(format!(
                    "solve.n_q must be even and at least 16, got {}",
                    s.n_q
                )));
            }
            if s.n_p < 16 {
                return Err(CliError::Config(format!("solve.n_p must be at least 16, got {}", s.n_p)));
            }
            if !(s.a_max >= 0.0 && s.a_max.is_finite()) {
                return Err(CliError::Config(format!("solve.a_max must be non-negative, got {}", s.a_max)));
            }
            if s.output_path.is_empty() {
                return Err(CliError::Config("solve.output_path must not be empty".into()));
            }
        }
        if let Some(v) = &self.verify {
            v.s_probe.check("verify.s_probe")?;
            if let Some(list) = v.s_probe.value() {
                for &s in list {
                    positive("verify.s_probe", s)?;
                }
            }
        }
        if let Some(f) = &self.flux {
            positive("flux.s", f.s)?;
        }
        Ok(())
    }

    /// Canonical TOML text of the configuration.
    pub fn canonical(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// SHA-256 of the canonical text, hex encoded.
    pub fn hash(&self) -> String {
        Sha256::digest(self.canonical().as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }

    pub fn section<'a, T>(&self, value: &'a Option<T>, name: &str) -> CliResult<&'a T> {
        value
            .as_ref()
            .ok_or_else(|| CliError::Config(format!("missing [{name}] section")))
    }
}
