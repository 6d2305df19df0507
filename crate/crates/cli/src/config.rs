use std::path::{Path, PathBuf};

use pspin_core::parisi::{DiscreteMeasure, OptimizerSettings, XGrid, MAX_ATOMS};
use pspin_core::verify::ChaosMode;
use pspin_core::MixingSpec;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::CliError;

/// Whole run configuration. Every block has defaults, so `{}` is a valid
/// file describing the SK model with field 0.5.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub model: ModelConfig,
    pub grid: GridConfig,
    pub measure: MeasureConfig,
    pub experiment: ExperimentConfig,
    pub seed: u64,
    pub threads: Threads,
    pub out: PathBuf,
    pub format: Format,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            model: ModelConfig::default(),
            grid: GridConfig::default(),
            measure: MeasureConfig::default(),
            experiment: ExperimentConfig::default(),
            seed: 1,
            threads: Threads::Auto,
            out: PathBuf::from("out"),
            format: Format::Csv,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ModelConfig {
    /// `beta[p-1]` is `β_p`.
    pub beta: Vec<f64>,
    pub h: f64,
    pub pmax: Option<usize>,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            beta: vec![0.0, 1.0],
            h: 0.5,
            pmax: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridConfig {
    #[serde(rename = "L")]
    pub half_width: f64,
    pub delta: f64,
    pub gh_nodes: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        let g = XGrid::default();
        Self {
            half_width: g.half_width(),
            delta: g.spacing(),
            gh_nodes: g.gh_nodes(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MeasureConfig {
    pub k_max: usize,
    pub tol: f64,
    pub max_evals: usize,
    /// Fixed measure for `parisi` without `--optimize`.
    pub atoms: Option<Vec<f64>>,
    pub cdf: Option<Vec<f64>>,
}

impl Default for MeasureConfig {
    fn default() -> Self {
        let o = OptimizerSettings::default();
        Self {
            k_max: o.k_max,
            tol: o.tol,
            max_evals: o.max_evals,
            atoms: None,
            cdf: None,
        }
    }
}

/// Parameters shared by the experiment commands; each command reads the
/// fields it needs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub sizes: Vec<usize>,
    pub replicas: usize,
    pub t: f64,
    pub t_nodes: usize,
    pub epsilon: f64,
    /// Overlap centre for `chaos`; computed from the model when absent.
    pub center: Option<f64>,
    pub mode: ChaosModeConfig,
    pub lambdas: Vec<f64>,
    /// Gauss–Legendre nodes for `ν`.
    pub nu_nodes: usize,
    /// Fixes `ν` for `clt` and `variance` instead of computing it.
    pub nu: Option<f64>,
    pub ks_max: f64,
    pub stein_k_se: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            sizes: vec![8, 12, 16],
            replicas: 5000,
            t: 0.5,
            t_nodes: 21,
            epsilon: 0.1,
            center: None,
            mode: ChaosModeConfig::T,
            lambdas: vec![0.0, 0.1, 0.3],
            nu_nodes: pspin_core::cltvar::DEFAULT_T_NODES,
            nu: None,
            ks_max: 0.05,
            stein_k_se: 3.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ChaosModeConfig {
    T,
    Ts0,
}

impl From<ChaosModeConfig> for ChaosMode {
    fn from(m: ChaosModeConfig) -> Self {
        match m {
            ChaosModeConfig::T => ChaosMode::T,
            ChaosModeConfig::Ts0 => ChaosMode::Ts0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Threads {
    Auto,
    Count(usize),
}

impl Serialize for Threads {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Threads::Auto => s.serialize_str("auto"),
            Threads::Count(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Threads {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(0) => Err(serde::de::Error::custom("threads must be at least 1")),
            Raw::Count(n) => Ok(Threads::Count(n)),
            Raw::Word(w) if w == "auto" => Ok(Threads::Auto),
            Raw::Word(w) => Err(serde::de::Error::custom(format!(
                "threads must be a positive count or \"auto\", got {w:?}"
            ))),
        }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        self.spec()?;
        self.grid()?;
        let m = &self.measure;
        if m.k_max == 0 || m.k_max > MAX_ATOMS {
            return Err(CliError::Config(format!(
                "measure.k_max must lie in 1..={MAX_ATOMS}"
            )));
        }
        if !(m.tol > 0.0 && m.tol.is_finite()) || m.max_evals == 0 {
            return Err(CliError::Config(
                "measure.tol and measure.max_evals must be positive".into(),
            ));
        }
        if m.atoms.is_some() != m.cdf.is_some() {
            return Err(CliError::Config(
                "measure.atoms and measure.cdf go together".into(),
            ));
        }
        let e = &self.experiment;
        if e.sizes.is_empty() || e.sizes.contains(&0) {
            return Err(CliError::Config(
                "experiment.sizes must be a nonempty list of positive sizes".into(),
            ));
        }
        if !(0.0..=1.0).contains(&e.t) {
            return Err(CliError::Config("experiment.t must lie in [0, 1]".into()));
        }
        if !(e.epsilon > 0.0 && e.epsilon.is_finite()) {
            return Err(CliError::Config(
                "experiment.epsilon must be positive".into(),
            ));
        }
        if e.nu_nodes == 0 {
            return Err(CliError::Config(
                "experiment.nu_nodes must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn spec(&self) -> Result<MixingSpec, CliError> {
        let m = &self.model;
        let spec = match m.pmax {
            Some(p) => MixingSpec::with_pmax(m.beta.clone(), m.h, p),
            None => MixingSpec::new(m.beta.clone(), m.h),
        };
        spec.map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn grid(&self) -> Result<XGrid, CliError> {
        let g = &self.grid;
        XGrid::new(g.half_width, g.delta, g.gh_nodes).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn optimizer(&self) -> OptimizerSettings {
        OptimizerSettings {
            k_max: self.measure.k_max,
            tol: self.measure.tol,
            max_evals: self.measure.max_evals,
            ..OptimizerSettings::default()
        }
    }

    pub fn fixed_measure(&self) -> Result<Option<DiscreteMeasure>, CliError> {
        match (&self.measure.atoms, &self.measure.cdf) {
            (Some(a), Some(c)) => DiscreteMeasure::new(a.clone(), c.clone())
                .map(Some)
                .map_err(|e| CliError::Config(e.to_string())),
            _ => Ok(None),
        }
    }

    /// SHA-256 of the config with `threads` and `out` reset, so that the digest
    /// only depends on what determines the numbers.
    pub fn digest(&self) -> String {
        let mut canon = self.clone();
        canon.threads = Threads::Auto;
        canon.out = PathBuf::new();
        let bytes = serde_json::to_vec(&canon).expect("config serializes");
        Sha256::digest(&bytes)
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_object_is_default() {
        assert_eq!(RunConfig::parse("{}").unwrap(), RunConfig::default());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        assert!(RunConfig::parse(r#"{"modle": {}}"#).is_err());
        assert!(RunConfig::parse(r#"{"model": {"beta": [0, 1], "hh": 1}}"#).is_err());
        assert!(RunConfig::parse(r#"{"threads": 0}"#).is_err());
        assert!(RunConfig::parse(r#"{"threads": "many"}"#).is_err());
        assert!(RunConfig::parse(r#"{"grid": {"L": 10, "delta": 0.3}}"#).is_err());
    }

    #[test]
    fn round_trip_and_digest() {
        let cfg =
            RunConfig::parse(r#"{"threads": 3, "grid": {"L": 8}, "experiment": {"mode": "ts0"}}"#)
                .unwrap();
        assert_eq!(cfg.threads, Threads::Count(3));
        let text = serde_json::to_string(&cfg).unwrap();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
        let mut other = cfg.clone();
        other.threads = Threads::Auto;
        other.out = PathBuf::from("elsewhere");
        assert_eq!(other.digest(), cfg.digest());
        other.seed += 1;
        assert_ne!(other.digest(), cfg.digest());
        assert_eq!(cfg.digest().len(), 64);
    }
}
