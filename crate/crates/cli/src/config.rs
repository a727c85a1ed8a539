//! Experiment configuration.
//!
//! A config is a JSON document with a `schema_version` field. Parsing goes
//! through `serde_path_to_error` so that type errors name the offending
//! field, and [`ExperimentConfig::validate`] adds the semantic checks
//! (positive numbers, decreasing grids, consistent dimensions).

use std::path::{Path, PathBuf};

use aperiodic::bernoulli::SymbolWord;
use aperiodic::dynamics::EpsilonGrid;
use aperiodic::torus::ContinuedFraction;
use serde::{Deserialize, Serialize};

pub const SCHEMA_VERSION: u32 = 1;

/// A config problem, located at a dotted field path.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("config error at `{field}`: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self { field: field.into(), message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub schema_version: u32,
    pub system: SystemConfig,
    /// Defaults depend on the system, see [`ExperimentConfig::grid_values`].
    #[serde(default)]
    pub grid: Option<GridConfig>,
    #[serde(default)]
    pub window: WindowConfig,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub samples: SampleConfig,
    #[serde(default)]
    pub entropy: EntropyConfig,
    #[serde(default)]
    pub registry: RegistryConfig,
    #[serde(default)]
    pub closing: ClosingConfig,
    #[serde(default)]
    pub search: SearchConfig,
    #[serde(default)]
    pub hyperbolic: HyperbolicConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemConfig {
    Torus {
        alpha: AlphaSpec,
        /// Base point; the origin if absent.
        #[serde(default)]
        point: Option<Vec<f64>>,
    },
    Bernoulli {
        alphabet: u8,
        /// `"prefix|tail"` over the digits `1..=alphabet`; random if absent.
        #[serde(default)]
        word: Option<String>,
        #[serde(default = "default_prefix_len")]
        prefix_len: usize,
    },
    Schottky {
        tau: f64,
        #[serde(default = "default_prefix_len")]
        prefix_len: usize,
        #[serde(default = "default_tail_len")]
        tail_len: usize,
    },
}

/// A rotation vector: `"golden"`, `"silver"`, a number, a list of numbers,
/// or a continued fraction `{"a0": 0, "prefix": [..], "period": [..]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AlphaSpec {
    Named(String),
    Scalar(f64),
    Vector(Vec<f64>),
    Expansion(ContinuedFraction),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GridConfig {
    Geometric { eps_max: f64, ratio: f64, count: usize },
    Exponential { first: u32, count: usize },
    Explicit { values: Vec<f64> },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WindowConfig {
    /// Orbit points `n <= horizon` entering the shift function.
    pub horizon: usize,
    /// Largest return time searched.
    pub s_max: usize,
    /// Profiles are computed for `l = 0..=max_length`.
    pub max_length: usize,
}

impl Default for WindowConfig {
    fn default() -> Self {
        Self { horizon: 10_000, s_max: 100_000, max_length: 10 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SampleConfig {
    /// Starting points for `report`.
    pub points: usize,
    /// Budget for net candidates.
    pub candidates: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        Self { points: 10, candidates: 4096 }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EntropyConfig {
    /// Scales of the ε-sweep, decreasing; a system default if absent.
    pub epsilons: Option<Vec<f64>>,
    pub lengths: Option<Vec<usize>>,
    /// Largest slope change between the last two sweep scales.
    pub stabilization_tol: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegistryConfig {
    /// Torus anchors `p/q` with `q <= max_denominator`.
    pub max_denominator: usize,
    /// Periodic words `u^∞` with `|u| <= max_period`.
    pub max_period: usize,
}

impl Default for RegistryConfig {
    fn default() -> Self {
        Self { max_denominator: 50, max_period: 8 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClosingConfig {
    pub events: usize,
    /// Torus: `δ(ε) = factor·ε`.
    pub factor: f64,
    /// Shift: `δ_ε(l) = slope·l + offset`.
    pub slope: usize,
    pub offset: usize,
}

impl Default for ClosingConfig {
    fn default() -> Self {
        Self { events: 10_000, factor: 2.0, slope: 1, offset: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    /// `φ(l) = ⌈2^{δ·l}⌉`.
    pub delta: f64,
    pub target: usize,
    pub max_nodes: Option<usize>,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self { delta: 0.5, target: 200, max_nodes: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HyperbolicConfig {
    pub instances: usize,
    pub epsilon0: Vec<f64>,
    pub max_translation: f64,
    pub displacement_checks: usize,
    pub containment_checks: usize,
    /// Schottky generators for orbital counting.
    pub tau: f64,
    pub word_radius: usize,
    /// Should stay below the displacement of every word of length
    /// `word_radius + 1`, or the truncated ball flattens the counts.
    pub lengths: Vec<f64>,
}

impl Default for HyperbolicConfig {
    fn default() -> Self {
        Self {
            instances: 1000,
            epsilon0: vec![0.05, 0.1, 0.2],
            max_translation: 20.0,
            displacement_checks: 10_000,
            containment_checks: 10_000,
            tau: 3.0,
            word_radius: 7,
            lengths: (0..=24).map(|k| 6.0 + 0.5 * k as f64).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub dir: Option<PathBuf>,
}

fn default_prefix_len() -> usize {
    2000
}

fn default_tail_len() -> usize {
    3
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let config: Self = serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let field = if path == "." { "<root>".to_string() } else { path };
            ConfigError::new(field, e.into_inner().to_string())
        })?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("--config", format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.schema_version != SCHEMA_VERSION {
            return Err(ConfigError::new(
                "schema_version",
                format!("unsupported version {}, expected {SCHEMA_VERSION}", self.schema_version),
            ));
        }
        match &self.system {
            SystemConfig::Torus { point, .. } => {
                let alpha = self.alpha()?;
                if let Some(p) = point {
                    if p.len() != alpha.len() {
                        return Err(ConfigError::new(
                            "system.point",
                            format!("has {} coordinates but alpha has {}", p.len(), alpha.len()),
                        ));
                    }
                    if p.iter().any(|v| !v.is_finite()) {
                        return Err(ConfigError::new("system.point", "coordinates must be finite"));
                    }
                }
            }
            SystemConfig::Bernoulli { alphabet, word, prefix_len } => {
                if !(2..=9).contains(alphabet) {
                    return Err(ConfigError::new("system.alphabet", "must lie in 2..=9"));
                }
                positive("system.prefix_len", *prefix_len)?;
                if let Some(w) = word {
                    SymbolWord::parse(*alphabet, w).map_err(|e| ConfigError::new("system.word", e.to_string()))?;
                }
            }
            SystemConfig::Schottky { tau, prefix_len, tail_len } => {
                aperiodic::hyperbolic::schottky_generators(*tau)
                    .map_err(|e| ConfigError::new("system.tau", e.to_string()))?;
                positive("system.prefix_len", *prefix_len)?;
                positive("system.tail_len", *tail_len)?;
            }
        }
        self.grid_values()?;
        positive("window.horizon", self.window.horizon)?;
        positive("window.s_max", self.window.s_max)?;
        positive("window.max_length", self.window.max_length)?;
        positive("samples.points", self.samples.points)?;
        positive("samples.candidates", self.samples.candidates)?;
        if let Some(e) = &self.entropy.epsilons {
            decreasing("entropy.epsilons", e)?;
        }
        if let Some(l) = &self.entropy.lengths {
            if l.len() < 5 {
                return Err(ConfigError::new("entropy.lengths", "need at least 5 lengths"));
            }
            if !l.windows(2).all(|w| w[0] < w[1]) {
                return Err(ConfigError::new("entropy.lengths", "must be strictly increasing"));
            }
        }
        if let Some(t) = self.entropy.stabilization_tol {
            positive_real("entropy.stabilization_tol", t)?;
        }
        positive("registry.max_denominator", self.registry.max_denominator)?;
        positive("registry.max_period", self.registry.max_period)?;
        positive("closing.events", self.closing.events)?;
        positive_real("closing.factor", self.closing.factor)?;
        positive_real("search.delta", self.search.delta)?;
        positive("search.target", self.search.target)?;
        let h = &self.hyperbolic;
        positive("hyperbolic.instances", h.instances)?;
        if h.epsilon0.is_empty() {
            return Err(ConfigError::new("hyperbolic.epsilon0", "must not be empty"));
        }
        for &e in &h.epsilon0 {
            positive_real("hyperbolic.epsilon0", e)?;
        }
        let floor = 4.0 * aperiodic::hyperbolic::DELTA_ZERO;
        if !(h.max_translation > floor) {
            return Err(ConfigError::new(
                "hyperbolic.max_translation",
                format!("must exceed 4δ₀ = {floor:.6}"),
            ));
        }
        positive("hyperbolic.displacement_checks", h.displacement_checks)?;
        positive("hyperbolic.containment_checks", h.containment_checks)?;
        aperiodic::hyperbolic::schottky_generators(h.tau)
            .map_err(|e| ConfigError::new("hyperbolic.tau", e.to_string()))?;
        positive("hyperbolic.word_radius", h.word_radius)?;
        if h.lengths.len() < 5 || !h.lengths.windows(2).all(|w| w[0] < w[1]) {
            return Err(ConfigError::new(
                "hyperbolic.lengths",
                "need at least 5 strictly increasing lengths",
            ));
        }
        Ok(())
    }

    /// The ε-grid, strictly decreasing with at least five points.
    pub fn grid_values(&self) -> Result<Vec<f64>, ConfigError> {
        let grid = self.grid.clone().unwrap_or_else(|| self.default_grid());
        let values = match grid {
            GridConfig::Geometric { eps_max, ratio, count } => {
                let g = EpsilonGrid::Geometric { eps_max, ratio, count };
                g.validate().map_err(|e| ConfigError::new("grid", e.to_string()))?;
                g.values()
            }
            GridConfig::Exponential { first, count } => EpsilonGrid::Exponential { first, count }.values(),
            GridConfig::Explicit { values } => values,
        };
        decreasing("grid", &values)?;
        if values.len() < 5 {
            return Err(ConfigError::new("grid", format!("has {} points, need at least 5", values.len())));
        }
        Ok(values)
    }

    fn default_grid(&self) -> GridConfig {
        match self.system {
            SystemConfig::Torus { .. } => GridConfig::Geometric { eps_max: 0.1, ratio: 0.7, count: 14 },
            SystemConfig::Bernoulli { .. } => GridConfig::Exponential { first: 1, count: 10 },
            SystemConfig::Schottky { .. } => GridConfig::Geometric { eps_max: 0.5, ratio: 0.5, count: 14 },
        }
    }

    /// The rotation vector of a torus config.
    pub fn alpha(&self) -> Result<Vec<f64>, ConfigError> {
        let SystemConfig::Torus { alpha, .. } = &self.system else {
            return Err(ConfigError::new("system.kind", "not a torus system"));
        };
        let field = "system.alpha";
        let values = match alpha {
            AlphaSpec::Named(name) => match name.as_str() {
                "golden" => vec![ContinuedFraction::golden().value()],
                "silver" => vec![ContinuedFraction::silver().value()],
                other => {
                    return Err(ConfigError::new(
                        field,
                        format!("unknown name {other:?}, expected \"golden\" or \"silver\""),
                    ))
                }
            },
            AlphaSpec::Scalar(a) => vec![*a],
            AlphaSpec::Vector(v) => v.clone(),
            AlphaSpec::Expansion(cf) => {
                let cf = ContinuedFraction::new(cf.a0, cf.prefix.clone(), cf.period.clone())
                    .map_err(|e| ConfigError::new(field, e.to_string()))?;
                vec![cf.value()]
            }
        };
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(ConfigError::new(field, "must be a nonempty list of finite numbers"));
        }
        Ok(values)
    }

    /// The continued fraction of a one-dimensional torus config, when known
    /// exactly.
    pub fn continued_fraction(&self) -> Option<ContinuedFraction> {
        match &self.system {
            SystemConfig::Torus { alpha: AlphaSpec::Named(n), .. } if n == "golden" => Some(ContinuedFraction::golden()),
            SystemConfig::Torus { alpha: AlphaSpec::Named(n), .. } if n == "silver" => Some(ContinuedFraction::silver()),
            SystemConfig::Torus { alpha: AlphaSpec::Expansion(cf), .. } => Some(cf.clone()),
            _ => None,
        }
    }

    pub fn system_name(&self) -> &'static str {
        match self.system {
            SystemConfig::Torus { .. } => "torus",
            SystemConfig::Bernoulli { .. } => "bernoulli",
            SystemConfig::Schottky { .. } => "schottky",
        }
    }
}

fn positive(field: &str, v: usize) -> Result<(), ConfigError> {
    if v == 0 {
        return Err(ConfigError::new(field, "must be positive"));
    }
    Ok(())
}

fn positive_real(field: &str, v: f64) -> Result<(), ConfigError> {
    if !(v > 0.0 && v.is_finite()) {
        return Err(ConfigError::new(field, format!("must be positive and finite, got {v}")));
    }
    Ok(())
}

fn decreasing(field: &str, values: &[f64]) -> Result<(), ConfigError> {
    if values.is_empty() {
        return Err(ConfigError::new(field, "must not be empty"));
    }
    if let Some(v) = values.iter().find(|v| !(**v > 0.0 && v.is_finite())) {
        return Err(ConfigError::new(field, format!("values must be positive and finite, got {v}")));
    }
    if let Some(k) = values.windows(2).position(|w| w[0] <= w[1]) {
        return Err(ConfigError::new(
            field,
            format!(
                "must be strictly decreasing, but entry {} ({}) is not below entry {} ({})",
                k + 1,
                values[k + 1],
                k,
                values[k]
            ),
        ));
    }
    Ok(())
}
