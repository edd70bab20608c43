//! Experiment configuration: a TOML file whose defaults reproduce the
//! standard three-slice setup (size-5 WMF, CPK-weighted combination, slice
//! stack 10x1/512, 5x1/256, 5x1/128).

use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use windcast_core::ensemble::{
    default_slice_configs, Combination, EnsembleConfig, PredictorKind, SliceConfig,
    DESK_HIDDEN, STANDARD_HIDDEN,
};
use windcast_core::lmu::Activation;
use windcast_core::preprocess::WmfFilter;
use windcast_core::training::{OptimizerKind, TrainConfig};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Target site id; empty means the first site in the data file.
    pub target: String,
    /// Sites to use (target plus neighbors); empty means all sites.
    pub sites: Vec<String>,
    pub samples_per_day: usize,
    /// Replicate trials for the study commands; metrics are averaged.
    pub replicates: usize,
    pub seed: u64,
    pub wmf: WmfSection,
    pub model: ModelSection,
    pub training: TrainingSection,
    pub imputation: ImputationSection,
    pub gaps: GapSection,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            target: String::new(),
            sites: Vec::new(),
            samples_per_day: 96,
            replicates: 1,
            seed: 42,
            wmf: WmfSection::default(),
            model: ModelSection::default(),
            training: TrainingSection::default(),
            imputation: ImputationSection::default(),
            gaps: GapSection::default(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WmfSection {
    pub enabled: bool,
    /// Filter weights, newest sample first.
    pub weights: Vec<f64>,
}

impl Default for WmfSection {
    fn default() -> Self {
        WmfSection {
            enabled: true,
            weights: WmfFilter::DEFAULT_WEIGHTS.to_vec(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Profile {
    /// Hidden sizes 512/256/128.
    Standard,
    /// Hidden sizes 64/32/16 for fast desk-scale runs.
    Desk,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModelSection {
    pub slices: usize,
    pub combination: Combination,
    pub predictor: PredictorKind,
    pub activation: Activation,
    pub profile: Profile,
    /// Explicit slice stack; overrides `slices`/`profile` when non-empty.
    #[serde(rename = "slice")]
    pub slice_overrides: Vec<SliceOverride>,
}

impl Default for ModelSection {
    fn default() -> Self {
        ModelSection {
            slices: 3,
            combination: Combination::CpkWeighted,
            predictor: PredictorKind::Lmu,
            activation: Activation::Tanh,
            profile: Profile::Standard,
            slice_overrides: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceOverride {
    pub lookback: usize,
    pub hidden: usize,
    /// Defaults to the lookback length.
    pub theta: Option<f64>,
    /// Defaults to the lookback length.
    pub memory_order: Option<usize>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainingSection {
    pub learning_rate: f64,
    pub max_epochs: usize,
    pub batch_size: usize,
    pub patience: usize,
    pub optimizer: OptimizerKind,
    /// Infinity-norm gradient clip; 0 disables clipping.
    pub grad_clip: f64,
}

impl Default for TrainingSection {
    fn default() -> Self {
        TrainingSection {
            learning_rate: 1e-3,
            max_epochs: 30,
            batch_size: 32,
            patience: 10,
            optimizer: OptimizerKind::Adam,
            grad_clip: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ImputationMethod {
    Maa,
    Cck,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ImputationSection {
    pub method: ImputationMethod,
    /// Autoregressive order of the moving-average fill.
    pub maa_order: usize,
}

impl Default for ImputationSection {
    fn default() -> Self {
        ImputationSection {
            method: ImputationMethod::Cck,
            maa_order: 4,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GapSection {
    /// First missing index; 0 places the gap automatically inside the test
    /// range.
    pub start: usize,
    pub lengths: Vec<usize>,
}

impl Default for GapSection {
    fn default() -> Self {
        GapSection {
            start: 0,
            lengths: vec![5, 10, 15],
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading config {}", path.display()))?;
        let config: ExperimentConfig =
            toml::from_str(&text).with_context(|| format!("parsing config {}", path.display()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.model.slices == 0 {
            bail!("model.slices must be at least 1");
        }
        if self.replicates == 0 {
            bail!("replicates must be at least 1");
        }
        if self.imputation.maa_order == 0 {
            bail!("imputation.maa_order must be at least 1");
        }
        if self.gaps.lengths.iter().any(|&l| l == 0) {
            bail!("gap lengths must be positive");
        }
        Ok(())
    }

    pub fn wmf_filter(&self) -> Result<Option<WmfFilter>> {
        if !self.wmf.enabled {
            return Ok(None);
        }
        Ok(Some(WmfFilter::new(self.wmf.weights.clone())?))
    }

    pub fn train_config(&self, seed: u64) -> TrainConfig {
        let t = &self.training;
        TrainConfig {
            learning_rate: t.learning_rate,
            max_epochs: t.max_epochs,
            batch_size: t.batch_size,
            early_stop_patience: t.patience,
            seed,
            optimizer: t.optimizer,
            grad_clip: (t.grad_clip > 0.0).then_some(t.grad_clip),
        }
    }

    /// Slice stack for an `n`-slice model, honoring explicit overrides, the
    /// profile's hidden sizes, and the configured predictor/activation.
    pub fn slice_configs(&self, n: usize) -> Vec<SliceConfig> {
        let mut configs = if self.model.slice_overrides.is_empty() {
            let hidden: &[usize] = match self.model.profile {
                Profile::Standard => &STANDARD_HIDDEN,
                Profile::Desk => &DESK_HIDDEN,
            };
            default_slice_configs(n, hidden)
        } else {
            self.model
                .slice_overrides
                .iter()
                .take(n)
                .map(|o| SliceConfig {
                    lookback: o.lookback,
                    hidden: o.hidden,
                    theta: o.theta.unwrap_or(o.lookback as f64),
                    memory_order: o.memory_order.unwrap_or(o.lookback),
                    activation: self.model.activation,
                    predictor: self.model.predictor,
                })
                .collect()
        };
        for c in &mut configs {
            c.activation = self.model.activation;
            c.predictor = self.model.predictor;
        }
        configs
    }

    pub fn ensemble_config(&self, n: usize, seed: u64) -> EnsembleConfig {
        EnsembleConfig {
            slice_configs: self.slice_configs(n),
            combination: self.model.combination,
            train: self.train_config(seed),
        }
    }
}
