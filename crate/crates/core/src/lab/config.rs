//! Flat TOML experiment configuration with `key=value` overrides.

use std::f64::consts::PI;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::floquet::{MAX_DENSE_SPINS, MAX_EVOLUTION_SPINS};
use crate::spin::{Boundary, Interaction, SystemParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    TimeSeries,
    AlphaScan,
    SpectralScan,
    DeffScan,
    OracleCompare,
    ReferenceValues,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 6] = [
        ExperimentKind::TimeSeries,
        ExperimentKind::AlphaScan,
        ExperimentKind::SpectralScan,
        ExperimentKind::DeffScan,
        ExperimentKind::OracleCompare,
        ExperimentKind::ReferenceValues,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::TimeSeries => "time_series",
            ExperimentKind::AlphaScan => "alpha_scan",
            ExperimentKind::SpectralScan => "spectral_scan",
            ExperimentKind::DeffScan => "deff_scan",
            ExperimentKind::OracleCompare => "oracle_compare",
            ExperimentKind::ReferenceValues => "reference_values",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        ExperimentKind::ALL
            .into_iter()
            .find(|k| k.name() == s.replace('-', "_"))
            .ok_or_else(|| Error::Config(format!("unknown experiment {s:?}")))
    }
}

/// Every setting of a run. Missing keys take the defaults below.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: Option<ExperimentKind>,
    pub n_spins: usize,
    pub coupling: f64,
    pub kick: f64,
    pub boundary: Boundary,
    pub interaction: Interaction,
    pub alpha_list: Vec<f64>,
    pub tau_list: Vec<f64>,
    pub n_steps: u64,
    /// Length of the trailing averaging window, `[n_steps − avg_window, n_steps]`.
    pub avg_window: u64,
    /// Steps between recorded samples.
    pub stride: u64,
    /// Record the half-chain entropy alongside `⟨J²⟩`.
    pub record_entropy: bool,
    pub theta: f64,
    pub phi: f64,
    pub epsilon: f64,
    pub seed: u64,
    /// Haar samples for `reference_values`.
    pub n_samples: usize,
    /// Largest accepted exact-vs-oracle difference in `oracle_compare`.
    pub oracle_tolerance: f64,
    /// Free-form note copied into the manifest (e.g. a desk-scale preset).
    pub note: String,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            experiment: None,
            n_spins: 12,
            coupling: 6.0,
            kick: 4.0 * PI / 11.0,
            boundary: Boundary::OpenLine,
            interaction: Interaction::PowerLaw,
            alpha_list: vec![0.0, 0.5, 1.0, 1.5, 2.0, 3.0, 5.0],
            tau_list: vec![1.0],
            n_steps: 300_000,
            avg_window: 200_000,
            stride: 100,
            record_entropy: true,
            theta: 2.25,
            phi: 1.1,
            epsilon: 1e-4,
            seed: 0,
            n_samples: 1000,
            oracle_tolerance: 1e-6,
            note: String::new(),
        }
    }
}

impl ExperimentConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("configuration serializes")
    }

    /// Applies `key=value`, where `value` is read as a TOML value and falls
    /// back to a bare string.
    pub fn apply_override(&mut self, assignment: &str) -> Result<()> {
        let (key, raw) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("override {assignment:?} is not key=value")))?;
        let key = key.trim();
        let raw = raw.trim();
        let value = toml::from_str::<toml::Table>(&format!("v = {raw}"))
            .ok()
            .and_then(|mut t| t.remove("v"))
            .unwrap_or_else(|| toml::Value::String(raw.to_string()));

        let mut table = toml::Table::try_from(&*self).expect("configuration serializes");
        let known = toml::Table::try_from(ExperimentConfig::default()).expect("defaults serialize");
        if !known.contains_key(key) && key != "experiment" {
            return Err(Error::Config(format!("unknown configuration key {key:?}")));
        }
        // integers are accepted where floats are expected
        let value = match (table.get(key).or_else(|| known.get(key)), value) {
            (Some(toml::Value::Float(_)), toml::Value::Integer(i)) => toml::Value::Float(i as f64),
            (Some(toml::Value::Array(_)), v @ (toml::Value::Integer(_) | toml::Value::Float(_))) => {
                toml::Value::Array(vec![v])
            }
            (_, v) => v,
        };
        table.insert(key.to_string(), value);
        *self = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(format!("override {key}: {e}")))?;
        Ok(())
    }

    /// Checks every invariant of the configuration for `kind`; runs before
    /// any computation starts.
    pub fn validate(&self, kind: ExperimentKind) -> Result<()> {
        let bad = |msg: String| Err(Error::Config(msg));
        if self.n_spins < 2 {
            return bad(format!("n_spins must be at least 2, got {}", self.n_spins));
        }
        if self.alpha_list.is_empty() || self.tau_list.is_empty() {
            return bad("alpha_list and tau_list must not be empty".into());
        }
        if let Some(a) = self.alpha_list.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return bad(format!("every alpha must be finite and non-negative, got {a}"));
        }
        if let Some(t) = self.tau_list.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return bad(format!("every tau must be positive, got {t}"));
        }
        if !self.coupling.is_finite() || !self.kick.is_finite() {
            return bad("coupling and kick must be finite".into());
        }
        if self.stride == 0 {
            return bad("stride must be positive".into());
        }
        if !(self.epsilon > 0.0 && self.epsilon < 1.0) {
            return bad(format!("epsilon must lie in (0, 1), got {}", self.epsilon));
        }
        if !self.theta.is_finite() || !self.phi.is_finite() {
            return bad("theta and phi must be finite".into());
        }
        let n = self.n_spins;
        match kind {
            ExperimentKind::TimeSeries | ExperimentKind::AlphaScan => {
                if n > MAX_EVOLUTION_SPINS {
                    return Err(Error::Capacity {
                        what: "state-vector evolution",
                        max: MAX_EVOLUTION_SPINS,
                        requested: n,
                    });
                }
                if kind == ExperimentKind::AlphaScan {
                    if self.avg_window == 0 || self.avg_window > self.n_steps {
                        return bad(format!(
                            "avg_window must lie in 1..={} (n_steps), got {}",
                            self.n_steps, self.avg_window
                        ));
                    }
                    if self.avg_window < self.stride {
                        return bad(format!(
                            "avg_window {} is shorter than the sampling stride {}",
                            self.avg_window, self.stride
                        ));
                    }
                }
            }
            ExperimentKind::SpectralScan | ExperimentKind::DeffScan => {
                if n % 2 == 1 {
                    return Err(Error::Unsupported(format!(
                        "spectral analysis needs an even number of spins, got {n}"
                    )));
                }
                if n > MAX_DENSE_SPINS {
                    return Err(Error::Capacity {
                        what: "dense Floquet diagonalization",
                        max: MAX_DENSE_SPINS,
                        requested: n,
                    });
                }
                if n < 4 {
                    return bad("spectral analysis needs at least 4 spins".into());
                }
            }
            ExperimentKind::OracleCompare => {
                if n % 2 == 1 || n < 4 {
                    return bad(format!(
                        "oracle comparison needs an even ring of at least 4 spins, got {n}"
                    ));
                }
                if n > MAX_EVOLUTION_SPINS {
                    return Err(Error::Capacity {
                        what: "state-vector evolution",
                        max: MAX_EVOLUTION_SPINS,
                        requested: n,
                    });
                }
                if !(self.oracle_tolerance > 0.0) {
                    return bad("oracle_tolerance must be positive".into());
                }
            }
            ExperimentKind::ReferenceValues => {
                if n % 2 == 1 {
                    return Err(Error::Unsupported(
                        "bit-reversal-even reference states need even N".into(),
                    ));
                }
                if n > MAX_EVOLUTION_SPINS {
                    return Err(Error::Capacity {
                        what: "random reference states",
                        max: MAX_EVOLUTION_SPINS,
                        requested: n,
                    });
                }
                if self.n_samples < 2 {
                    return bad("n_samples must be at least 2".into());
                }
            }
        }
        Ok(())
    }

    /// Chain parameters for one sweep point.
    pub fn system(&self, alpha: f64, tau: f64) -> Result<SystemParams> {
        match self.interaction {
            Interaction::PowerLaw => SystemParams::new(
                self.n_spins,
                alpha,
                self.coupling,
                self.kick,
                tau,
                self.boundary,
            ),
            Interaction::NearestNeighbor => SystemParams::nearest_neighbor(
                self.n_spins,
                self.coupling,
                self.kick,
                tau,
                self.boundary,
            ),
        }
    }

    /// `(α, τ)` sweep points, α varying fastest.
    pub fn grid(&self) -> Vec<(f64, f64)> {
        self.tau_list
            .iter()
            .flat_map(|&t| self.alpha_list.iter().map(move |&a| (a, t)))
            .collect()
    }

    /// SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("configuration serializes");
        let digest = Sha256::digest(json.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }
}
