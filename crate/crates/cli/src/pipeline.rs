//! The shared experiment pipeline: denoise and normalize a complete
//! cluster, fit CPK weights on the raw training split, train the residual
//! ensemble, and map forecasts back to physical units.

use std::collections::BTreeMap;
use std::ops::Range;

use anyhow::{bail, Context, Result};

use windcast_core::cluster::SiteCluster;
use windcast_core::correlation::CpkMatrix;
use windcast_core::ensemble::train_ensemble;
use windcast_core::preprocess::{split, wmf_denoise, Normalizer, SplitRanges, WmfFilter};

use crate::config::ExperimentConfig;
use crate::model_store::ModelBundle;

/// Denoised, normalized view of a complete cluster plus the fitted
/// preprocessing state.
pub struct Prepared {
    pub processed: SiteCluster,
    pub normalizers: BTreeMap<String, Normalizer>,
    pub split: SplitRanges,
}

/// Applies WMF denoising (when configured) and per-site min-max
/// normalization fitted on the training split only.
pub fn prepare(cluster: &SiteCluster, wmf: Option<&WmfFilter>) -> Result<Prepared> {
    if let Some(site) = (0..cluster.num_sites()).find(|&s| cluster.first_missing(s).is_some()) {
        bail!(
            "site `{}` has missing values; run `impute` first",
            cluster.site_ids()[site]
        );
    }
    let ranges = split(cluster.len())?;
    let mut processed = cluster.clone();
    let mut normalizers = BTreeMap::new();
    for s in 0..cluster.num_sites() {
        let id = &cluster.site_ids()[s];
        let denoised = match wmf {
            Some(filter) => wmf_denoise(cluster.series(s), filter)?,
            None => cluster.series(s).to_vec(),
        };
        let normalizer = Normalizer::fit(&denoised[ranges.train.clone()], id)
            .with_context(|| format!("normalizing site `{id}`"))?;
        processed.replace_series(s, normalizer.transform_series(&denoised))?;
        normalizers.insert(id.clone(), normalizer);
    }
    Ok(Prepared {
        processed,
        normalizers,
        split: ranges,
    })
}

/// Trains an `n`-slice ensemble on a complete raw cluster. CPK weights come
/// from the raw (pre-denoising) training split; preprocessing state is
/// captured in the returned bundle.
pub fn train_model(
    cluster: &SiteCluster,
    config: &ExperimentConfig,
    n_slices: usize,
    seed: u64,
) -> Result<(ModelBundle, CpkMatrix)> {
    let target = resolve_target(cluster, config)?;
    let ranges = split(cluster.len())?;
    let cpk = CpkMatrix::compute(cluster, Some(ranges.train.clone()), false)
        .context("computing CPK weights on the training split")?;
    let wmf = config.wmf_filter()?;
    let prepared = prepare(cluster, wmf.as_ref())?;
    let ensemble_config = config.ensemble_config(n_slices, seed);
    let ensemble = train_ensemble(&prepared.processed, &target, &cpk, &ensemble_config)?;
    Ok((
        ModelBundle {
            ensemble,
            wmf,
            normalizers: prepared.normalizers,
            samples_per_day: cluster.samples_per_day(),
        },
        cpk,
    ))
}

pub fn resolve_target(cluster: &SiteCluster, config: &ExperimentConfig) -> Result<String> {
    if config.target.is_empty() {
        Ok(cluster.site_ids()[0].clone())
    } else {
        cluster.site_index(&config.target)?;
        Ok(config.target.clone())
    }
}

/// One forecast row in physical units.
pub struct Forecast {
    pub index: usize,
    pub timestamp: i64,
    /// Cleaned (denoised) series value — the quantity the pipeline forecasts
    /// and reports against.
    pub actual: f64,
    pub predicted: f64,
}

/// Runs the bundle over `range` forecast indices of a complete raw cluster.
/// Predictions are denormalized to m/s; `actual` carries the cleaned series,
/// which is what the trained model forecasts.
pub fn predict_range(
    bundle: &ModelBundle,
    cluster: &SiteCluster,
    range: Range<usize>,
) -> Result<Vec<Forecast>> {
    let target_idx = cluster.site_index(&bundle.ensemble.target)?;
    let target_norm = bundle
        .normalizers
        .get(&bundle.ensemble.target)
        .with_context(|| format!("model has no normalizer for `{}`", bundle.ensemble.target))?;

    // Rebuild the processed view with the stored preprocessing state.
    let mut target_denoised = Vec::new();
    let mut processed = cluster.clone();
    for s in 0..cluster.num_sites() {
        let id = &cluster.site_ids()[s];
        let normalizer = bundle
            .normalizers
            .get(id)
            .with_context(|| format!("model has no normalizer for site `{id}`"))?;
        let denoised = match &bundle.wmf {
            Some(filter) => wmf_denoise(cluster.series(s), filter)?,
            None => cluster.series(s).to_vec(),
        };
        if s == target_idx {
            target_denoised = denoised.clone();
        }
        processed.replace_series(s, normalizer.transform_series(&denoised))?;
    }

    let preds_norm = bundle.ensemble.predict_series(&processed, range.clone())?;
    Ok(range
        .zip(preds_norm)
        .map(|(j, p)| Forecast {
            index: j,
            timestamp: cluster.timestamp_at(j),
            actual: target_denoised[j],
            predicted: target_norm.inverse(p),
        })
        .collect())
}

/// The cleaned view of one site: WMF-denoised when the bundle carries a
/// filter, the raw series otherwise.
pub fn cleaned_series(
    bundle: &ModelBundle,
    cluster: &SiteCluster,
    site: usize,
) -> Result<Vec<f64>> {
    Ok(match &bundle.wmf {
        Some(filter) => wmf_denoise(cluster.series(site), filter)?,
        None => cluster.series(site).to_vec(),
    })
}

/// Test-range forecast indices: the chronological test split, clamped so
/// every slice has a full lookback window.
pub fn test_forecast_range(bundle: &ModelBundle, cluster: &SiteCluster) -> Result<Range<usize>> {
    let ranges = split(cluster.len())?;
    let start = ranges.test.start.max(bundle.ensemble.max_lookback());
    Ok(start..ranges.test.end)
}
