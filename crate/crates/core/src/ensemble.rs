//! Multi-slice residual ensemble: slice 1 forecasts the target site, each
//! further slice forecasts the previous slice's residual from a neighbor
//! site's history, and the predictions combine either as a plain sum or
//! weighted by the target's CPK row.

use serde::{Deserialize, Serialize};

use crate::cluster::{is_missing, SiteCluster};
use crate::correlation::CpkMatrix;
use crate::error::{Error, Result};
use crate::lmu::{build_delay_network, Activation};
use crate::preprocess::{split, SplitRanges};
use crate::rnn::{train_rnn_slice, TrainedRnn};
use crate::training::{train_slice, TrainConfig, TrainedSlice};

/// How slice predictions are combined into the final forecast.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Combination {
    /// `pred_plus`: plain sum of all slice predictions.
    PlainSum,
    /// `pred_improve`: slice 1 plus CPK-weighted compensation slices.
    CpkWeighted,
}

/// Slice predictor family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PredictorKind {
    Lmu,
    Srnn,
}

/// Per-slice architecture settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SliceConfig {
    pub lookback: usize,
    pub hidden: usize,
    /// Delay-network window; defaults to the lookback length.
    pub theta: f64,
    /// Memory order; defaults to the lookback length.
    pub memory_order: usize,
    pub activation: Activation,
    pub predictor: PredictorKind,
}

impl SliceConfig {
    pub fn lmu(lookback: usize, hidden: usize) -> Self {
        SliceConfig {
            lookback,
            hidden,
            theta: lookback as f64,
            memory_order: lookback,
            activation: Activation::Tanh,
            predictor: PredictorKind::Lmu,
        }
    }
}

/// Hidden sizes of the standard three-slice configuration.
pub const STANDARD_HIDDEN: [usize; 3] = [512, 256, 128];
/// Scaled-down hidden sizes for fast desk-scale runs.
pub const DESK_HIDDEN: [usize; 3] = [64, 32, 16];

/// Default slice stack: slice 1 looks back 10 steps, compensation slices 5,
/// with hidden sizes drawn from `hidden_sizes` (the last entry repeats when
/// `n` exceeds the list).
pub fn default_slice_configs(n: usize, hidden_sizes: &[usize]) -> Vec<SliceConfig> {
    (0..n)
        .map(|s| {
            let lookback = if s == 0 { 10 } else { 5 };
            let hidden = hidden_sizes
                .get(s)
                .or(hidden_sizes.last())
                .copied()
                .unwrap_or(16);
            SliceConfig::lmu(lookback, hidden)
        })
        .collect()
}

/// Ensemble-level settings: the slice stack, the combination rule, and the
/// shared optimizer configuration (per-slice seeds are derived from the base
/// seed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleConfig {
    pub slice_configs: Vec<SliceConfig>,
    pub combination: Combination,
    pub train: TrainConfig,
}

/// One trained slice of either predictor family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum SlicePredictor {
    Lmu(TrainedSlice),
    Srnn(TrainedRnn),
}

impl SlicePredictor {
    pub fn predict(&self, window: &[f64]) -> Result<f64> {
        match self {
            SlicePredictor::Lmu(slice) => slice.predict(window),
            SlicePredictor::Srnn(slice) => slice.predict(window),
        }
    }

    pub fn train_loss_curve(&self) -> &[f64] {
        match self {
            SlicePredictor::Lmu(slice) => &slice.train_loss_curve,
            SlicePredictor::Srnn(slice) => &slice.train_loss_curve,
        }
    }
}

/// Trained residual ensemble for one target site.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleModel {
    pub target: String,
    /// Neighbor site feeding each compensation slice, in slice order.
    pub neighbors: Vec<String>,
    pub slices: Vec<SlicePredictor>,
    pub combination: Combination,
    /// CPK of the target against each neighbor, in slice order.
    pub k_row: Vec<f64>,
    pub slice_configs: Vec<SliceConfig>,
}

/// Supervised pairs for one slice over the training and validation splits.
#[derive(Debug, Clone, PartialEq)]
pub struct SliceDataset {
    pub train: Vec<(Vec<f64>, f64)>,
    pub val: Vec<(Vec<f64>, f64)>,
}

/// Neighbors of `target` sorted by descending CPK weight, ties broken by
/// site id.
pub fn order_neighbors(
    cluster: &SiteCluster,
    target: &str,
    cpk: &CpkMatrix,
) -> Result<Vec<String>> {
    let target_idx = cluster.site_index(target)?;
    if cpk.k.rows() != cluster.num_sites() {
        return Err(Error::DimensionMismatch {
            what: "cpk matrix",
            expected: cluster.num_sites(),
            got: cpk.k.rows(),
        });
    }
    let mut neighbors: Vec<(String, f64)> = cluster
        .site_ids()
        .iter()
        .enumerate()
        .filter(|(i, _)| *i != target_idx)
        .map(|(i, id)| (id.clone(), cpk.k.get(target_idx, i)))
        .collect();
    neighbors.sort_by(|(id_a, k_a), (id_b, k_b)| {
        k_b.partial_cmp(k_a)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| id_a.cmp(id_b))
    });
    Ok(neighbors.into_iter().map(|(id, _)| id).collect())
}

/// Forecast indices shared by every slice: all slices predict the same
/// timestamps, so the first `max_lookback` offsets are discarded.
fn aligned_ranges(
    configs: &[SliceConfig],
    split: &SplitRanges,
) -> Result<(usize, std::ops::Range<usize>, std::ops::Range<usize>)> {
    let max_lb = configs
        .iter()
        .map(|c| c.lookback)
        .max()
        .ok_or(Error::EmptyInput("slice configs"))?;
    if split.train.end <= max_lb {
        return Err(Error::SeriesTooShort {
            needed: max_lb + 1,
            got: split.train.end,
        });
    }
    Ok((max_lb, max_lb..split.train.end, split.val.clone()))
}

fn slice_series<'a>(
    cluster: &'a SiteCluster,
    target_idx: usize,
    neighbor_idx: &[usize],
    slice: usize,
) -> &'a [f64] {
    if slice == 0 {
        cluster.series(target_idx)
    } else {
        cluster.series(neighbor_idx[slice - 1])
    }
}

fn check_complete(cluster: &SiteCluster, site: usize) -> Result<()> {
    if let Some(index) = cluster.first_missing(site) {
        return Err(Error::MissingValue {
            what: "ensemble input series (impute first)",
            index,
        });
    }
    Ok(())
}

/// Builds the per-slice `(window, label)` datasets of the residual chain.
///
/// Slice 1 learns the target's next value; slice `i > 1` learns
/// `error_{i-1} = error_{i-2} - pred_{i-1}` from neighbor `i-1`'s windows,
/// with residuals computed from the already-trained slices in `trained`.
/// Returns datasets for slices `1..=min(configs.len(), trained.len() + 1)` —
/// labels past that point would need an untrained predecessor.
pub fn build_residual_datasets(
    cluster: &SiteCluster,
    target: &str,
    neighbors: &[String],
    configs: &[SliceConfig],
    trained: &[SlicePredictor],
    split: &SplitRanges,
) -> Result<Vec<SliceDataset>> {
    let target_idx = cluster.site_index(target)?;
    let neighbor_idx: Vec<usize> = neighbors
        .iter()
        .map(|id| cluster.site_index(id))
        .collect::<Result<_>>()?;
    if configs.len() > neighbor_idx.len() + 1 {
        return Err(Error::InsufficientNeighbors {
            requested: configs.len(),
            available: neighbor_idx.len(),
        });
    }
    check_complete(cluster, target_idx)?;
    for &idx in &neighbor_idx {
        check_complete(cluster, idx)?;
    }
    let (_, train_j, val_j) = aligned_ranges(configs, split)?;

    let target_series = cluster.series(target_idx);
    let mut labels_train: Vec<f64> = train_j.clone().map(|j| target_series[j]).collect();
    let mut labels_val: Vec<f64> = val_j.clone().map(|j| target_series[j]).collect();

    let count = configs.len().min(trained.len() + 1);
    let mut datasets = Vec::with_capacity(count);
    for s in 0..count {
        let series = slice_series(cluster, target_idx, &neighbor_idx, s);
        let lb = configs[s].lookback;
        let window_at = |j: usize| series[j - lb..j].to_vec();
        let train_ds: Vec<(Vec<f64>, f64)> = train_j
            .clone()
            .zip(&labels_train)
            .map(|(j, &label)| (window_at(j), label))
            .collect();
        let val_ds: Vec<(Vec<f64>, f64)> = val_j
            .clone()
            .zip(&labels_val)
            .map(|(j, &label)| (window_at(j), label))
            .collect();

        // Subtract this slice's predictions to form the next slice's labels.
        if s + 1 < count {
            let model = &trained[s];
            for (pair, label) in train_ds.iter().zip(&mut labels_train) {
                *label -= model.predict(&pair.0)?;
            }
            for (pair, label) in val_ds.iter().zip(&mut labels_val) {
                *label -= model.predict(&pair.0)?;
            }
        }
        datasets.push(SliceDataset {
            train: train_ds,
            val: val_ds,
        });
    }
    Ok(datasets)
}

/// Trains the residual chain sequentially: slice `i`'s labels are the
/// residuals of slices `1..i-1` on the training split. Stores the target's
/// CPK row against the neighbors in slice order.
pub fn train_ensemble(
    cluster: &SiteCluster,
    target: &str,
    cpk: &CpkMatrix,
    config: &EnsembleConfig,
) -> Result<EnsembleModel> {
    let n = config.slice_configs.len();
    if n == 0 {
        return Err(Error::EmptyInput("slice configs"));
    }
    let target_idx = cluster.site_index(target)?;
    let ordered = order_neighbors(cluster, target, cpk)?;
    if ordered.len() < n - 1 {
        return Err(Error::InsufficientNeighbors {
            requested: n,
            available: ordered.len(),
        });
    }
    let neighbors: Vec<String> = ordered.into_iter().take(n - 1).collect();
    let ranges = split(cluster.len())?;

    let mut slices: Vec<SlicePredictor> = Vec::with_capacity(n);
    for s in 0..n {
        let datasets = build_residual_datasets(
            cluster,
            target,
            &neighbors,
            &config.slice_configs,
            &slices,
            &ranges,
        )?;
        let ds = &datasets[s];
        let sc = &config.slice_configs[s];
        // Distinct deterministic seed per slice.
        let train_cfg = TrainConfig {
            seed: config
                .train
                .seed
                .wrapping_add((s as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            ..config.train.clone()
        };
        let predictor = match sc.predictor {
            PredictorKind::Lmu => {
                let dn = build_delay_network(sc.theta, 1.0, sc.memory_order)?;
                SlicePredictor::Lmu(train_slice(
                    &ds.train,
                    &ds.val,
                    &dn,
                    sc.hidden,
                    sc.activation,
                    &train_cfg,
                )?)
            }
            PredictorKind::Srnn => SlicePredictor::Srnn(train_rnn_slice(
                &ds.train,
                &ds.val,
                sc.hidden,
                sc.activation,
                &train_cfg,
            )?),
        };
        slices.push(predictor);
    }

    let neighbor_idx: Vec<usize> = neighbors
        .iter()
        .map(|id| cluster.site_index(id))
        .collect::<Result<_>>()?;
    let k_row = cpk.k_row(target_idx, &neighbor_idx);

    Ok(EnsembleModel {
        target: target.into(),
        neighbors,
        slices,
        combination: config.combination,
        k_row,
        slice_configs: config.slice_configs.clone(),
    })
}

fn check_windows(model: &EnsembleModel, windows: &[Vec<f64>]) -> Result<()> {
    if windows.len() != model.slices.len() {
        return Err(Error::DimensionMismatch {
            what: "slice windows",
            expected: model.slices.len(),
            got: windows.len(),
        });
    }
    for (w, sc) in windows.iter().zip(&model.slice_configs) {
        if w.len() != sc.lookback {
            return Err(Error::DimensionMismatch {
                what: "slice window length",
                expected: sc.lookback,
                got: w.len(),
            });
        }
    }
    Ok(())
}

/// `pred_plus`: plain sum of the slice predictions, in normalized units.
/// The caller denormalizes.
pub fn predict_plus(model: &EnsembleModel, windows: &[Vec<f64>]) -> Result<f64> {
    check_windows(model, windows)?;
    let mut sum = 0.0;
    for (slice, window) in model.slices.iter().zip(windows) {
        sum += slice.predict(window)?;
    }
    Ok(sum)
}

/// `pred_improve`: slice 1 plus CPK-weighted compensation slices.
pub fn predict_improve(model: &EnsembleModel, windows: &[Vec<f64>]) -> Result<f64> {
    check_windows(model, windows)?;
    if model.k_row.len() + 1 < model.slices.len() {
        return Err(Error::InvalidParameter {
            name: "k_row",
            reason: format!(
                "need {} CPK weights for the compensation slices, have {}",
                model.slices.len() - 1,
                model.k_row.len()
            ),
        });
    }
    let mut value = model.slices[0].predict(&windows[0])?;
    for (i, (slice, window)) in model.slices.iter().zip(windows).enumerate().skip(1) {
        value += model.k_row[i - 1] * slice.predict(window)?;
    }
    Ok(value)
}

impl EnsembleModel {
    pub fn max_lookback(&self) -> usize {
        self.slice_configs
            .iter()
            .map(|c| c.lookback)
            .max()
            .unwrap_or(0)
    }

    /// Gathers the per-slice windows feeding forecast index `j` from the
    /// preprocessed cluster.
    pub fn windows_at(&self, cluster: &SiteCluster, j: usize) -> Result<Vec<Vec<f64>>> {
        let target_idx = cluster.site_index(&self.target)?;
        let neighbor_idx: Vec<usize> = self
            .neighbors
            .iter()
            .map(|id| cluster.site_index(id))
            .collect::<Result<_>>()?;
        if j < self.max_lookback() || j >= cluster.len() {
            return Err(Error::InvalidParameter {
                name: "forecast index",
                reason: format!(
                    "index {j} outside [{}, {})",
                    self.max_lookback(),
                    cluster.len()
                ),
            });
        }
        let mut windows = Vec::with_capacity(self.slices.len());
        for (s, sc) in self.slice_configs.iter().enumerate() {
            let series = slice_series(cluster, target_idx, &neighbor_idx, s);
            let window = series[j - sc.lookback..j].to_vec();
            if window.iter().any(|&v| is_missing(v)) {
                return Err(Error::MissingValue {
                    what: "forecast window (impute first)",
                    index: j,
                });
            }
            windows.push(window);
        }
        Ok(windows)
    }

    /// Combined forecast for index `j` using the model's combination rule.
    pub fn predict_at(&self, cluster: &SiteCluster, j: usize) -> Result<f64> {
        let windows = self.windows_at(cluster, j)?;
        match self.combination {
            Combination::PlainSum => predict_plus(self, &windows),
            Combination::CpkWeighted => predict_improve(self, &windows),
        }
    }

    /// Forecasts every index in `range`, in normalized units.
    pub fn predict_series(
        &self,
        cluster: &SiteCluster,
        range: std::ops::Range<usize>,
    ) -> Result<Vec<f64>> {
        range.map(|j| self.predict_at(cluster, j)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::Mat;
    use crate::lmu::LmuParams;

    fn toy_cluster(len: usize, sites: usize) -> SiteCluster {
        let series: Vec<Vec<f64>> = (0..sites)
            .map(|s| {
                (0..len)
                    .map(|t| 0.5 + 0.3 * ((t + s * 3) as f64 * 0.21).sin())
                    .collect()
            })
            .collect();
        let ids = (0..sites).map(|i| format!("s{}", i + 1)).collect();
        SiteCluster::new(ids, series, 0, 900, 8).unwrap()
    }

    fn toy_cpk(sites: usize) -> CpkMatrix {
        let mut r = Mat::identity(sites);
        for a in 0..sites {
            for b in 0..sites {
                if a != b {
                    r.set(a, b, 0.8 - 0.1 * (a as f64 - b as f64).abs());
                }
            }
        }
        CpkMatrix {
            k: crate::correlation::cpk_weights(&r).unwrap(),
            r,
        }
    }

    /// Fixed tiny LMU slice whose predictions are easy to recompute by hand.
    fn fixed_slice(lookback: usize) -> SlicePredictor {
        let dn = build_delay_network(lookback as f64, 1.0, 2).unwrap();
        // Zero hidden path; output bias only -> constant prediction 0.25.
        let params = LmuParams::new(
            1,
            1,
            2,
            vec![0.0],
            vec![0.0],
            vec![0.0, 0.0],
            Mat::zeros(1, 1),
            Mat::zeros(1, 1),
            Mat::zeros(1, 2),
            Activation::Tanh,
            vec![0.0],
            0.25,
        )
        .unwrap();
        SlicePredictor::Lmu(TrainedSlice {
            params,
            dn,
            train_loss_curve: vec![0.0],
            best_epoch: 0,
        })
    }

    #[test]
    fn order_neighbors_by_descending_weight_with_id_ties() {
        let cluster = toy_cluster(64, 3);
        let cpk = toy_cpk(3);
        // k row of s1: s2 gets 0.7-based weight, s3 0.6-based.
        let order = order_neighbors(&cluster, "s1", &cpk).unwrap();
        assert_eq!(order, vec!["s2".to_string(), "s3".to_string()]);

        // Equal weights fall back to lexicographic ids.
        let mut r = Mat::identity(3);
        for (a, b) in [(0, 1), (0, 2), (1, 2)] {
            r.set(a, b, 0.5);
            r.set(b, a, 0.5);
        }
        let cpk_eq = CpkMatrix {
            k: crate::correlation::cpk_weights(&r).unwrap(),
            r,
        };
        let order = order_neighbors(&cluster, "s1", &cpk_eq).unwrap();
        assert_eq!(order, vec!["s2".to_string(), "s3".to_string()]);

        let single = toy_cluster(64, 2);
        let order = order_neighbors(&single, "s1", &toy_cpk(2)).unwrap();
        assert_eq!(order, vec!["s2".to_string()]);
    }

    #[test]
    fn residual_dataset_slice1_targets_are_raw_next_values() {
        let cluster = toy_cluster(64, 3);
        let configs = vec![SliceConfig::lmu(4, 2)];
        let ranges = split(cluster.len()).unwrap();
        let datasets =
            build_residual_datasets(&cluster, "s1", &[], &configs, &[], &ranges).unwrap();
        assert_eq!(datasets.len(), 1);
        let series = cluster.series(0);
        for (i, (window, label)) in datasets[0].train.iter().enumerate() {
            let j = 4 + i;
            assert_eq!(window.as_slice(), &series[j - 4..j]);
            assert_eq!(*label, series[j]);
        }
        // Validation labels continue at the split boundary.
        assert_eq!(datasets[0].val.len(), ranges.val.len());
    }

    #[test]
    fn residual_labels_subtract_trained_slice_predictions() {
        let cluster = toy_cluster(64, 3);
        let configs = vec![SliceConfig::lmu(4, 1), SliceConfig::lmu(3, 1)];
        let neighbors = vec!["s2".to_string()];
        let ranges = split(cluster.len()).unwrap();
        let trained = vec![fixed_slice(4)];
        let datasets =
            build_residual_datasets(&cluster, "s1", &neighbors, &configs, &trained, &ranges)
                .unwrap();
        assert_eq!(datasets.len(), 2);
        let series = cluster.series(0);
        // Fixed slice predicts 0.25 for every window.
        for (i, (window, label)) in datasets[1].train.iter().enumerate() {
            let j = 4 + i;
            assert_eq!(window.len(), 3);
            assert!((label - (series[j] - 0.25)).abs() < 1e-12);
        }
    }

    #[test]
    fn perfect_slice1_gives_zero_slice2_labels() {
        // A slice that predicts the target exactly: constant series, bias head.
        let len = 64;
        let constant = 0.25;
        let series = vec![vec![constant; len], vec![0.1; len]];
        let cluster = SiteCluster::new(vec!["a".into(), "b".into()], series, 0, 900, 8).unwrap();
        let configs = vec![SliceConfig::lmu(4, 1), SliceConfig::lmu(3, 1)];
        let ranges = split(len).unwrap();
        let trained = vec![fixed_slice(4)];
        let datasets = build_residual_datasets(
            &cluster,
            "a",
            &["b".to_string()],
            &configs,
            &trained,
            &ranges,
        )
        .unwrap();
        for (_, label) in &datasets[1].train {
            assert!(label.abs() < 1e-12);
        }
    }

    #[test]
    fn ensemble_requires_enough_neighbors() {
        let cluster = toy_cluster(64, 2);
        let cpk = toy_cpk(2);
        let config = EnsembleConfig {
            slice_configs: vec![
                SliceConfig::lmu(4, 2),
                SliceConfig::lmu(3, 2),
                SliceConfig::lmu(3, 2),
            ],
            combination: Combination::CpkWeighted,
            train: TrainConfig {
                max_epochs: 1,
                ..TrainConfig::default()
            },
        };
        assert!(matches!(
            train_ensemble(&cluster, "s1", &cpk, &config),
            Err(Error::InsufficientNeighbors { .. })
        ));
    }

    #[test]
    fn predict_plus_and_improve_hand_values() {
        // Three fixed slices predicting 0.5, 0.1, -0.05.
        let make = |value: f64, lookback: usize| {
            let dn = build_delay_network(lookback as f64, 1.0, 2).unwrap();
            let params = LmuParams::new(
                1,
                1,
                2,
                vec![0.0],
                vec![0.0],
                vec![0.0, 0.0],
                Mat::zeros(1, 1),
                Mat::zeros(1, 1),
                Mat::zeros(1, 2),
                Activation::Tanh,
                vec![0.0],
                value,
            )
            .unwrap();
            SlicePredictor::Lmu(TrainedSlice {
                params,
                dn,
                train_loss_curve: vec![0.0],
                best_epoch: 0,
            })
        };
        let model = EnsembleModel {
            target: "s1".into(),
            neighbors: vec!["s2".into(), "s3".into()],
            slices: vec![make(0.5, 4), make(0.1, 3), make(-0.05, 3)],
            combination: Combination::CpkWeighted,
            k_row: vec![0.571_43, 0.428_57],
            slice_configs: vec![
                SliceConfig::lmu(4, 1),
                SliceConfig::lmu(3, 1),
                SliceConfig::lmu(3, 1),
            ],
        };
        let windows = vec![vec![0.0; 4], vec![0.0; 3], vec![0.0; 3]];
        let plus = predict_plus(&model, &windows).unwrap();
        assert!((plus - 0.55).abs() < 1e-12);
        let improve = predict_improve(&model, &windows).unwrap();
        assert!((improve - 0.535_714).abs() < 1e-5);

        // All weights 1 reduces pred_improve to pred_plus.
        let mut unit = model.clone();
        unit.k_row = vec![1.0, 1.0];
        let improve_unit = predict_improve(&unit, &windows).unwrap();
        assert_eq!(improve_unit.to_bits(), plus.to_bits());

        // Missing slice window is rejected.
        assert!(predict_plus(&model, &windows[..2].to_vec()).is_err());
    }

    #[test]
    fn single_slice_improve_ignores_k_row() {
        let model = EnsembleModel {
            target: "s1".into(),
            neighbors: vec![],
            slices: vec![fixed_slice(4)],
            combination: Combination::CpkWeighted,
            k_row: vec![],
            slice_configs: vec![SliceConfig::lmu(4, 1)],
        };
        let windows = vec![vec![0.0; 4]];
        assert_eq!(predict_improve(&model, &windows).unwrap(), 0.25);
        assert_eq!(predict_plus(&model, &windows).unwrap(), 0.25);
    }

    #[test]
    fn telescoping_residuals_reconstruct_pred_plus() {
        // real - pred_plus must equal the final residual labels minus the last
        // slice's predictions, by construction of the error chain.
        let cluster = toy_cluster(80, 3);
        let cpk = toy_cpk(3);
        let config = EnsembleConfig {
            slice_configs: vec![
                SliceConfig::lmu(4, 3),
                SliceConfig::lmu(3, 2),
                SliceConfig::lmu(3, 2),
            ],
            combination: Combination::PlainSum,
            train: TrainConfig {
                max_epochs: 3,
                ..TrainConfig::default()
            },
        };
        let model = train_ensemble(&cluster, "s1", &cpk, &config).unwrap();
        let ranges = split(cluster.len()).unwrap();
        let datasets = build_residual_datasets(
            &cluster,
            "s1",
            &model.neighbors,
            &model.slice_configs,
            &model.slices,
            &ranges,
        )
        .unwrap();
        let series = cluster.series(0);
        let max_lb = model.max_lookback();
        for (i, j) in (max_lb..ranges.train.end).enumerate() {
            let windows = model.windows_at(&cluster, j).unwrap();
            let plus = predict_plus(&model, &windows).unwrap();
            let last = &datasets[2].train[i];
            let error_n = last.1 - model.slices[2].predict(&last.0).unwrap();
            assert!(
                ((series[j] - plus) - error_n).abs() < 1e-10,
                "telescoping violated at j={j}"
            );
        }
    }

    #[test]
    fn ensemble_training_is_deterministic() {
        let cluster = toy_cluster(80, 3);
        let cpk = toy_cpk(3);
        let config = EnsembleConfig {
            slice_configs: vec![SliceConfig::lmu(4, 2), SliceConfig::lmu(3, 2)],
            combination: Combination::CpkWeighted,
            train: TrainConfig {
                max_epochs: 2,
                ..TrainConfig::default()
            },
        };
        let a = train_ensemble(&cluster, "s1", &cpk, &config).unwrap();
        let b = train_ensemble(&cluster, "s1", &cpk, &config).unwrap();
        let ranges = split(cluster.len()).unwrap();
        let pa = a.predict_series(&cluster, ranges.test.clone()).unwrap();
        let pb = b.predict_series(&cluster, ranges.test).unwrap();
        assert_eq!(pa, pb);
    }
}
