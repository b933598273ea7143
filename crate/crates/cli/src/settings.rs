//! The single JSON settings file driving every subcommand.
//!
//! One seed governs all stochastic steps. Optional fields resolve to the
//! conventional defaults of the underlying configuration types.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use stldtw_core::dtw::{DtwConfig, LocalCost};
use stldtw_core::impute::{Activation, AutoencoderConfig};
use stldtw_core::panel::{TaxonomyMode, YearBounds};
use stldtw_core::similarity::CompositeWeights;
use stldtw_core::stl::StlConfig;

use crate::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSettings {
    pub input: PathBuf,
    #[serde(default = "default_out_dir")]
    pub out_dir: PathBuf,
    pub target_indicator: String,
    pub reference_country: String,
    #[serde(default = "default_min_years")]
    pub min_years: usize,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub schema: SchemaSettings,
    #[serde(default)]
    pub stl: StlSettings,
    #[serde(default)]
    pub dtw: DtwSettings,
    #[serde(default)]
    pub weights: WeightSettings,
    #[serde(default)]
    pub autoencoder: AutoencoderSettings,
}

fn default_out_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_min_years() -> usize {
    3
}

impl RunSettings {
    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| CliError::Settings(e.to_string()))
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("settings serialize")
    }

    pub fn weights(&self) -> Result<CompositeWeights> {
        CompositeWeights::new(self.weights.trend, self.weights.seasonal).map_err(CliError::Core)
    }

    pub fn stl_config(&self) -> Result<StlConfig> {
        let config = self.stl.to_config();
        config.validate()?;
        Ok(config)
    }

    pub fn dtw_config(&self) -> Result<DtwConfig> {
        let config = self.dtw.to_config();
        config.validate()?;
        Ok(config)
    }

    pub fn autoencoder_config(&self, input_dim: usize) -> Result<AutoencoderConfig> {
        let config = self.autoencoder.to_config(input_dim, self.seed);
        config.validate()?;
        Ok(config)
    }
}

/// Column names of the long-format input CSV, plus year bounds and the
/// optional strict topic table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemaSettings {
    #[serde(default = "default_country_column")]
    pub country: String,
    #[serde(default = "default_indicator_column")]
    pub indicator: String,
    #[serde(default = "default_topic_column")]
    pub topic: String,
    #[serde(default = "default_year_column")]
    pub year: String,
    #[serde(default = "default_value_column")]
    pub value: String,
    #[serde(default = "default_year_min")]
    pub year_min: i32,
    #[serde(default = "default_year_max")]
    pub year_max: i32,
    /// When present, topics must match this table exactly (topic -> group
    /// id); unknown topics become hard errors at ingestion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub strict_topics: Option<BTreeMap<String, u8>>,
}

fn default_country_column() -> String {
    "country".into()
}
fn default_indicator_column() -> String {
    "indicator".into()
}
fn default_topic_column() -> String {
    "topic".into()
}
fn default_year_column() -> String {
    "year".into()
}
fn default_value_column() -> String {
    "value".into()
}
fn default_year_min() -> i32 {
    2000
}
fn default_year_max() -> i32 {
    2023
}

impl Default for SchemaSettings {
    fn default() -> Self {
        Self {
            country: default_country_column(),
            indicator: default_indicator_column(),
            topic: default_topic_column(),
            year: default_year_column(),
            value: default_value_column(),
            year_min: default_year_min(),
            year_max: default_year_max(),
            strict_topics: None,
        }
    }
}

impl SchemaSettings {
    pub fn year_bounds(&self) -> YearBounds {
        YearBounds {
            min: self.year_min,
            max: self.year_max,
        }
    }

    pub fn taxonomy_mode(&self) -> TaxonomyMode {
        match &self.strict_topics {
            Some(map) => TaxonomyMode::Strict(map.clone()),
            None => TaxonomyMode::Standard,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StlSettings {
    #[serde(default = "default_period")]
    pub period: usize,
    #[serde(default = "default_seasonal_smoother")]
    pub seasonal_smoother: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub trend_smoother: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lowpass_smoother: Option<usize>,
    #[serde(default = "default_degree")]
    pub seasonal_degree: usize,
    #[serde(default = "default_degree")]
    pub trend_degree: usize,
    #[serde(default = "default_degree")]
    pub lowpass_degree: usize,
    #[serde(default = "default_inner_iterations")]
    pub inner_iterations: usize,
    #[serde(default)]
    pub outer_iterations: usize,
}

fn default_period() -> usize {
    4
}
fn default_seasonal_smoother() -> usize {
    7
}
fn default_degree() -> usize {
    1
}
fn default_inner_iterations() -> usize {
    2
}

impl Default for StlSettings {
    fn default() -> Self {
        Self {
            period: default_period(),
            seasonal_smoother: default_seasonal_smoother(),
            trend_smoother: None,
            lowpass_smoother: None,
            seasonal_degree: 1,
            trend_degree: 1,
            lowpass_degree: 1,
            inner_iterations: default_inner_iterations(),
            outer_iterations: 0,
        }
    }
}

impl StlSettings {
    pub fn to_config(&self) -> StlConfig {
        let mut config = StlConfig::new(self.period);
        config.seasonal_smoother = self.seasonal_smoother;
        config.trend_smoother = self.trend_smoother.unwrap_or_else(|| {
            StlConfig::default_trend_smoother(self.period, self.seasonal_smoother)
        });
        config.lowpass_smoother = self
            .lowpass_smoother
            .unwrap_or_else(|| StlConfig::default_lowpass_smoother(self.period));
        config.seasonal_degree = self.seasonal_degree;
        config.trend_degree = self.trend_degree;
        config.lowpass_degree = self.lowpass_degree;
        config.inner_iterations = self.inner_iterations;
        config.outer_iterations = self.outer_iterations;
        config
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum CostName {
    #[default]
    Absolute,
    Squared,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DtwSettings {
    #[serde(default)]
    pub local_cost: CostName,
    #[serde(default = "default_radius")]
    pub radius: usize,
    /// Defaults to `2 * radius + 2`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub min_size: Option<usize>,
}

fn default_radius() -> usize {
    1
}

impl Default for DtwSettings {
    fn default() -> Self {
        Self {
            local_cost: CostName::Absolute,
            radius: default_radius(),
            min_size: None,
        }
    }
}

impl DtwSettings {
    pub fn to_config(&self) -> DtwConfig {
        let mut config = DtwConfig::with_radius(self.radius);
        config.local_cost = match self.local_cost {
            CostName::Absolute => LocalCost::Absolute,
            CostName::Squared => LocalCost::Squared,
        };
        if let Some(min_size) = self.min_size {
            config.min_size = min_size;
        }
        config
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightSettings {
    pub trend: f64,
    pub seasonal: f64,
}

impl Default for WeightSettings {
    fn default() -> Self {
        Self {
            trend: 0.7,
            seasonal: 0.3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum ActivationName {
    #[default]
    Tanh,
    Rectifier,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AutoencoderSettings {
    /// Defaults to `max(1, indicator_count / 2)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hidden_width: Option<usize>,
    #[serde(default)]
    pub activation: ActivationName,
    #[serde(default = "default_learning_rate")]
    pub learning_rate: f64,
    #[serde(default = "default_epochs")]
    pub epochs: usize,
    #[serde(default = "default_refinement_rounds")]
    pub refinement_rounds: usize,
    #[serde(default = "default_init_scale")]
    pub init_scale: f64,
}

fn default_learning_rate() -> f64 {
    0.01
}
fn default_epochs() -> usize {
    2000
}
fn default_refinement_rounds() -> usize {
    5
}
fn default_init_scale() -> f64 {
    0.1
}

impl Default for AutoencoderSettings {
    fn default() -> Self {
        Self {
            hidden_width: None,
            activation: ActivationName::Tanh,
            learning_rate: default_learning_rate(),
            epochs: default_epochs(),
            refinement_rounds: default_refinement_rounds(),
            init_scale: default_init_scale(),
        }
    }
}

impl AutoencoderSettings {
    pub fn to_config(&self, input_dim: usize, seed: u64) -> AutoencoderConfig {
        let mut config = AutoencoderConfig::for_input_dim(input_dim);
        if let Some(h) = self.hidden_width {
            config.hidden_width = h;
        }
        config.activation = match self.activation {
            ActivationName::Tanh => Activation::Tanh,
            ActivationName::Rectifier => Activation::Rectifier,
        };
        config.learning_rate = self.learning_rate;
        config.epochs = self.epochs;
        config.refinement_rounds = self.refinement_rounds;
        config.init_scale = self.init_scale;
        config.seed = seed;
        config
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn settings_roundtrip_is_stable() {
        let json = r#"{
            "input": "panel.csv",
            "target_indicator": "I001",
            "reference_country": "REF",
            "seed": 7,
            "stl": { "period": 4 },
            "dtw": { "radius": 2 },
            "autoencoder": { "epochs": 100 }
        }"#;
        let a: RunSettings = serde_json::from_str(json).unwrap();
        let text = a.to_json_pretty();
        let b: RunSettings = serde_json::from_str(&text).unwrap();
        assert_eq!(a, b);
        assert_eq!(b.to_json_pretty(), text);
        assert_eq!(a.min_years, 3);
        assert_eq!(a.dtw.to_config().min_size, 6);
    }

    #[test]
    fn unknown_fields_rejected() {
        let json = r#"{
            "input": "panel.csv",
            "target_indicator": "I001",
            "reference_country": "REF",
            "typo_field": 4
        }"#;
        assert!(serde_json::from_str::<RunSettings>(json).is_err());
    }

    #[test]
    fn stl_defaults_resolve_from_period() {
        let s = StlSettings {
            period: 4,
            ..StlSettings::default()
        };
        let c = s.to_config();
        assert_eq!(c.trend_smoother, 9);
        assert_eq!(c.lowpass_smoother, 5);
    }

    #[test]
    fn seed_flows_into_the_autoencoder() {
        let s = AutoencoderSettings::default();
        let c = s.to_config(10, 99);
        assert_eq!(c.seed, 99);
        assert_eq!(c.hidden_width, 5);
    }
}
