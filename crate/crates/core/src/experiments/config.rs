use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use super::families::FunctionFamily;
use crate::error::{Error, Result};
use crate::geometry::ExponentSet;
use crate::grid::{read_grid_csv, Axis, Grid, Weight, WeightKind};
use crate::operators::KernelRule;

/// Density of the measure as written in a config file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum WeightSpec {
    Lebesgue,
    ProductPower { exponents: Vec<f64> },
    ProductExponential,
    /// Samples from a grid CSV file whose grid must equal the base grid.
    CustomCsv { path: String },
}

impl WeightSpec {
    /// The analytic kind, or `None` for sampled weights.
    pub fn analytic(&self) -> Option<WeightKind> {
        match self {
            WeightSpec::Lebesgue => Some(WeightKind::Lebesgue),
            WeightSpec::ProductPower { exponents } => Some(WeightKind::ProductPower { exponents: exponents.clone() }),
            WeightSpec::ProductExponential => Some(WeightKind::ProductExponential),
            WeightSpec::CustomCsv { .. } => None,
        }
    }
}

fn default_seed() -> u64 {
    0
}
fn default_trials() -> usize {
    20
}
fn default_refinements() -> u32 {
    2
}
fn default_growth_cap() -> f64 {
    0.15
}
fn default_k_max() -> u32 {
    4
}
fn default_alpha_offsets() -> Vec<f64> {
    vec![0.0, 0.2, -0.2]
}
fn default_slope_tolerance() -> f64 {
    0.05
}
fn default_h_max() -> u32 {
    4
}
fn default_min_r_squared() -> f64 {
    0.8
}
fn default_tolerance() -> f64 {
    1e-12
}

/// Everything an experiment needs; every field is echoed in the report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    #[serde(default = "default_seed")]
    pub seed: u64,
    pub dimension: usize,
    pub counts: Vec<usize>,
    /// `[lo, hi]` per axis.
    pub domain: Vec<[f64; 2]>,
    #[serde(default = "lebesgue")]
    pub weight: WeightSpec,
    pub p: f64,
    pub q: f64,
    #[serde(default = "default_trials")]
    pub trials: usize,
    #[serde(default)]
    pub family: FunctionFamily,
    /// Number of resolution doublings after the base grid.
    #[serde(default = "default_refinements")]
    pub refinements: u32,
    #[serde(default)]
    pub quadrature: KernelRule,
    /// Largest allowed relative growth of a maximum ratio per doubling.
    #[serde(default = "default_growth_cap")]
    pub growth_cap: f64,
    #[serde(default = "default_k_max")]
    pub k_max: u32,
    #[serde(default = "default_alpha_offsets")]
    pub alpha_offsets: Vec<f64>,
    #[serde(default = "default_slope_tolerance")]
    pub slope_tolerance: f64,
    #[serde(default = "default_h_max")]
    pub h_max: u32,
    #[serde(default = "default_min_r_squared")]
    pub min_r_squared: f64,
    /// Dilation exponents per axis; empty means every vector in `{0,1,2}^n`.
    #[serde(default)]
    pub dilations: Vec<Vec<u32>>,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    /// Shifted dyadic system per axis; empty means the unshifted one.
    #[serde(default)]
    pub shift: Vec<usize>,
}

fn lebesgue() -> WeightSpec {
    WeightSpec::Lebesgue
}

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

/// Sets `key` (dot-separated for nested objects) to `raw`, parsed as JSON
/// when possible and kept as a string otherwise.
pub fn apply_override(doc: &mut Value, key: &str, raw: &str) -> Result<()> {
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut cur = doc;
    let parts: Vec<&str> = key.split('.').collect();
    for (k, part) in parts.iter().enumerate() {
        let obj = cur.as_object_mut().ok_or_else(|| config_err(format!("override {key}: not an object")))?;
        if k + 1 == parts.len() {
            obj.insert(part.to_string(), value);
            return Ok(());
        }
        cur = obj.entry(part.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    Err(config_err(format!("empty override key {key:?}")))
}

/// Parses `key=value`.
pub fn parse_override(s: &str) -> Result<(String, String)> {
    let (k, v) = s.split_once('=').ok_or_else(|| config_err(format!("override {s:?} is not key=value")))?;
    if k.trim().is_empty() {
        return Err(config_err(format!("override {s:?} has an empty key")));
    }
    Ok((k.trim().to_string(), v.to_string()))
}

impl ExperimentConfig {
    /// Parses JSON text, applies overrides, fills derived defaults and validates.
    pub fn from_json(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let mut doc: Value = serde_json::from_str(text).map_err(|e| config_err(format!("malformed config: {e}")))?;
        for (k, v) in overrides {
            apply_override(&mut doc, k, v)?;
        }
        let mut cfg: Self = serde_json::from_value(doc).map_err(|e| config_err(e.to_string()))?;
        cfg.resolve();
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path, overrides: &[(String, String)]) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| config_err(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_json(&text, overrides)
    }

    fn resolve(&mut self) {
        let n = self.dimension;
        if self.dilations.is_empty() && n > 0 && n <= 6 {
            self.dilations = (0..3usize.pow(n as u32))
                .map(|mut k| {
                    let mut s = vec![0u32; n];
                    for i in (0..n).rev() {
                        s[i] = (k % 3) as u32;
                        k /= 3;
                    }
                    s
                })
                .collect();
        }
        if self.shift.is_empty() {
            self.shift = vec![0; n];
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.dimension;
        if self.id.is_empty() || self.id.contains(['/', '\\']) || self.id == "." || self.id == ".." {
            return Err(config_err(format!("id {:?} is not a plain directory name", self.id)));
        }
        if n == 0 || self.counts.len() != n || self.domain.len() != n {
            return Err(config_err(format!(
                "dimension {n} needs {n} counts and {n} domain intervals, got {} and {}",
                self.counts.len(),
                self.domain.len()
            )));
        }
        self.base_grid()?;
        self.exponents()?;
        if self.trials == 0 {
            return Err(config_err("trials must be positive"));
        }
        if let WeightSpec::ProductPower { exponents } = &self.weight {
            if exponents.len() != n {
                return Err(config_err(format!("{} power exponents for dimension {n}", exponents.len())));
            }
        }
        if self.shift.len() != n || self.shift.iter().any(|&s| s > 2) {
            return Err(config_err(format!("shift {:?} must hold {n} entries in 0..=2", self.shift)));
        }
        if self.dilations.iter().any(|s| s.len() != n) {
            return Err(config_err("every dilation needs one exponent per axis"));
        }
        for (name, v) in [
            ("growth_cap", self.growth_cap),
            ("slope_tolerance", self.slope_tolerance),
            ("tolerance", self.tolerance),
            ("min_r_squared", self.min_r_squared),
        ] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(config_err(format!("{name} = {v} must be a nonnegative number")));
            }
        }
        Ok(())
    }

    pub fn exponents(&self) -> Result<ExponentSet> {
        ExponentSet::new(self.dimension, self.p, self.q).map_err(|e| config_err(e.to_string()))
    }

    pub fn base_grid(&self) -> Result<Grid> {
        let axes = self
            .counts
            .iter()
            .zip(&self.domain)
            .map(|(&c, d)| Axis::new(d[0], d[1], c))
            .collect::<Result<Vec<_>>>()
            .map_err(|e| config_err(e.to_string()))?;
        Grid::new(axes).map_err(|e| config_err(e.to_string()))
    }

    /// Base grid with counts multiplied by `2^level`.
    pub fn grid_at(&self, level: u32) -> Result<Grid> {
        let mut g = self.base_grid()?;
        for _ in 0..level {
            g = g.refined();
        }
        Ok(g)
    }

    pub fn weight_on(&self, grid: &Grid) -> Result<Weight> {
        match &self.weight {
            WeightSpec::CustomCsv { path } => {
                let file = std::fs::File::open(path).map_err(|e| config_err(format!("weight file {path}: {e}")))?;
                let (wg, samples) = read_grid_csv(std::io::BufReader::new(file))?;
                if &wg != grid {
                    return Err(config_err(format!("weight file {path} is sampled on a different grid")));
                }
                Weight::custom(grid, samples)
            }
            spec => Weight::from_kind(spec.analytic().unwrap(), grid),
        }
    }

    /// Hex SHA-256 of the canonical JSON form.
    pub fn hash(&self) -> String {
        let text = serde_json::to_string(self).expect("config serializes");
        let digest = Sha256::digest(text.as_bytes());
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn to_pretty_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}
