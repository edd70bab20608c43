//! Experiment commands: slice-count ablation, the missing-data comparison,
//! and the denoising study.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;

use windcast_core::cluster::{SiteCluster, MISSING};
use windcast_core::correlation::{find_gaps, impute_cck, impute_maa};
use windcast_core::ensemble::PredictorKind;
use windcast_core::evaluation::{metrics, promotion, MetricsReport};
use windcast_core::preprocess::split;

use crate::cli::{AblateArgs, DenoiseArgs, MissingDataArgs};
use crate::config::ExperimentConfig;
use crate::data;
use crate::pipeline::{predict_range, test_forecast_range, train_model};
use crate::synth::{generate_synthetic, SynthSpec};

use super::basic::maybe_subset;
use super::{cell, ensure_out_dir, load_config, write_metrics_file, MetricsRow, OutputGuard};

/// Spreads replicate seeds apart deterministically.
fn replicate_seed(base: u64, replicate: usize) -> u64 {
    base.wrapping_add((replicate as u64).wrapping_mul(0x100_0003))
}

fn predictor_label(kind: PredictorKind) -> &'static str {
    match kind {
        PredictorKind::Lmu => "lmu",
        PredictorKind::Srnn => "srnn",
    }
}

/// Mean of the replicate reports; MAPE is undefined if any replicate's is.
fn mean_report(reports: &[MetricsReport]) -> MetricsReport {
    let n = reports.len() as f64;
    let mape = reports
        .iter()
        .map(|r| r.mape)
        .collect::<Option<Vec<f64>>>()
        .map(|v| v.iter().sum::<f64>() / n);
    MetricsReport {
        mape,
        mae: reports.iter().map(|r| r.mae).sum::<f64>() / n,
        rmse: reports.iter().map(|r| r.rmse).sum::<f64>() / n,
        count: reports.first().map(|r| r.count).unwrap_or(0),
    }
}

pub fn ablate_slices(args: &AblateArgs, guard: &mut OutputGuard) -> Result<()> {
    let config = load_config(args.common.config.as_deref())?;
    let seed = args.common.seed.unwrap_or(config.seed);
    let cluster = data::ingest(&args.data)?;
    let cluster = maybe_subset(&cluster, &config.sites)?;
    let max_n = args.max_slices.unwrap_or(config.model.slices).max(1);

    let jobs: Vec<(usize, usize)> = (1..=max_n)
        .flat_map(|n| (0..config.replicates).map(move |r| (n, r)))
        .collect();
    let results: Vec<(usize, MetricsReport)> = jobs
        .par_iter()
        .map(|&(n, r)| -> Result<(usize, MetricsReport)> {
            let (bundle, _) = train_model(&cluster, &config, n, replicate_seed(seed, r))?;
            let range = test_forecast_range(&bundle, &cluster)?;
            let forecasts = predict_range(&bundle, &cluster, range)?;
            let actual: Vec<f64> = forecasts.iter().map(|f| f.actual).collect();
            let predicted: Vec<f64> = forecasts.iter().map(|f| f.predicted).collect();
            Ok((n, metrics(&actual, &predicted, None)?))
        })
        .collect::<Result<_>>()?;

    let mut rows = Vec::with_capacity(max_n);
    for n in 1..=max_n {
        let reports: Vec<MetricsReport> = results
            .iter()
            .filter(|(slices, _)| *slices == n)
            .map(|(_, r)| r.clone())
            .collect();
        rows.push(MetricsRow {
            model: predictor_label(config.model.predictor).into(),
            slices: n,
            report: mean_report(&reports),
        });
    }
    for row in &rows {
        println!(
            "{} {}-slice: MAPE={}% MAE={:.4} RMSE={:.4}",
            row.model,
            row.slices,
            cell(row.report.mape_pct()),
            row.report.mae,
            row.report.rmse
        );
    }
    let path = write_metrics_file(guard, &args.common.out_dir, "ablate_metrics.csv", &rows)?;
    println!("wrote slice ablation -> {}", path.display());
    Ok(())
}

/// Clone of the cluster with `[start, start+len)` of one site knocked out.
fn inject_gap(cluster: &SiteCluster, site: usize, start: usize, len: usize) -> Result<SiteCluster> {
    let mut out = cluster.clone();
    let mut series = cluster.series(site).to_vec();
    for v in series
        .iter_mut()
        .skip(start)
        .take(len)
    {
        *v = MISSING;
    }
    out.replace_series(site, series)?;
    Ok(out)
}

fn opt_promotion(m1: Option<f64>, m2: Option<f64>) -> Option<f64> {
    match (m1, m2) {
        (Some(a), Some(b)) => promotion(a, b).ok(),
        _ => None,
    }
}

/// Masked metrics for one gap length: the unmodified pipeline (`normal`),
/// MAA-imputed (`single`), and CCK-imputed (`cluster`) forecasts, evaluated
/// on the gap positions only.
#[derive(Debug, Clone)]
pub struct GapRow {
    pub gap_len: usize,
    pub normal: MetricsReport,
    pub single: MetricsReport,
    pub cluster: MetricsReport,
}

/// Runs the full missing-data comparison once: train on the complete
/// cluster, inject each gap length into the target's test range, impute via
/// MAA and via CCK, forecast, and evaluate within the gap.
pub fn missing_data_once(
    cluster: &SiteCluster,
    config: &ExperimentConfig,
    seed: u64,
) -> Result<(usize, Vec<GapRow>)> {
    if !cluster.is_complete() {
        bail!("the missing-data study needs a complete input; it injects its own gaps");
    }
    let (bundle, cpk) = train_model(cluster, config, config.model.slices, seed)?;
    let target_idx = cluster.site_index(&bundle.ensemble.target)?;
    let f_range = test_forecast_range(&bundle, cluster)?;
    let ranges = split(cluster.len())?;

    let max_len = *config.gaps.lengths.iter().max().context("no gap lengths")?;
    let gap_start = if config.gaps.start == 0 {
        // First day boundary inside the forecastable test range.
        let spd = cluster.samples_per_day();
        f_range.start.div_ceil(spd) * spd
    } else {
        config.gaps.start
    };
    if gap_start < f_range.start.max(ranges.test.start) || gap_start + max_len > cluster.len() {
        bail!(
            "gap spec [{gap_start}, {}) falls outside the forecastable test range [{}, {})",
            gap_start + max_len,
            f_range.start.max(ranges.test.start),
            cluster.len()
        );
    }

    let normal_forecasts = predict_range(&bundle, cluster, f_range.clone())?;
    // Ground truth: the cleaned view of the original complete series.
    let real = crate::pipeline::cleaned_series(&bundle, cluster, target_idx)?;

    let mut rows = Vec::with_capacity(config.gaps.lengths.len());
    for &len in &config.gaps.lengths {
        let mask: Vec<usize> = (gap_start..gap_start + len).collect();
        let masked = |forecasts: &[crate::pipeline::Forecast]| -> Result<MetricsReport> {
            let real_m: Vec<f64> = mask.iter().map(|&j| real[j]).collect();
            let pred_m: Vec<f64> = mask
                .iter()
                .map(|&j| forecasts[j - f_range.start].predicted)
                .collect();
            Ok(metrics(&real_m, &pred_m, None)?)
        };

        let normal = masked(&normal_forecasts)?;

        let gapped = inject_gap(cluster, target_idx, gap_start, len)?;
        let gaps = find_gaps(gapped.series(target_idx));

        let mut single_cluster = gapped.clone();
        single_cluster.replace_series(
            target_idx,
            impute_maa(gapped.series(target_idx), config.imputation.maa_order)?,
        )?;
        let single = masked(&predict_range(&bundle, &single_cluster, f_range.clone())?)?;

        let mut cck_cluster = gapped.clone();
        cck_cluster.replace_series(target_idx, impute_cck(&gapped, target_idx, &gaps, &cpk)?)?;
        let clustered = masked(&predict_range(&bundle, &cck_cluster, f_range.clone())?)?;

        rows.push(GapRow {
            gap_len: len,
            normal,
            single,
            cluster: clustered,
        });
    }
    Ok((gap_start, rows))
}

pub fn missing_data_study(args: &MissingDataArgs, guard: &mut OutputGuard) -> Result<()> {
    let config = load_config(args.common.config.as_deref())?;
    let seed = args.common.seed.unwrap_or(config.seed);
    let cluster = data::ingest(&args.data)?;
    let cluster = maybe_subset(&cluster, &config.sites)?;
    let (gap_start, rows) = missing_data_once(&cluster, &config, seed)?;

    let mut out = String::from(
        "gap_length,metric,normal,single,p_single_vs_normal,cluster,p_cluster_vs_normal,p_single_to_cluster\n",
    );
    for row in &rows {
        let triples = [
            (
                "mape_pct",
                row.normal.mape_pct(),
                row.single.mape_pct(),
                row.cluster.mape_pct(),
            ),
            (
                "rmse",
                Some(row.normal.rmse),
                Some(row.single.rmse),
                Some(row.cluster.rmse),
            ),
            (
                "mae",
                Some(row.normal.mae),
                Some(row.single.mae),
                Some(row.cluster.mae),
            ),
        ];
        for (name, n_v, s_v, c_v) in triples {
            let _ = writeln!(
                out,
                "{},{name},{},{},{},{},{},{}",
                row.gap_len,
                cell(n_v),
                cell(s_v),
                cell(opt_promotion(s_v, n_v)),
                cell(c_v),
                cell(opt_promotion(c_v, n_v)),
                cell(opt_promotion(c_v, s_v)),
            );
        }
        println!(
            "gap {} at {gap_start}: RMSE normal {:.4} | MAA {:.4} | CCK {:.4}",
            row.gap_len, row.normal.rmse, row.single.rmse, row.cluster.rmse
        );
    }

    ensure_out_dir(&args.common.out_dir)?;
    let path = guard.track(args.common.out_dir.join("missing_data_metrics.csv"));
    std::fs::write(&path, out)?;
    println!("wrote missing-data study -> {}", path.display());
    Ok(())
}

/// One denoising trial: synthesize a clean cluster, add white noise at the
/// given SNR, then train a 1-slice model on the WMF-denoised and on the raw
/// noisy data. Both are evaluated against the clean test series, isolating
/// what denoising buys.
pub fn denoise_study_once(
    config: &ExperimentConfig,
    seed: u64,
    length: usize,
    snr_db: f64,
) -> Result<(MetricsReport, MetricsReport)> {
    use rand::{Rng, SeedableRng};

    let clean = generate_synthetic(&SynthSpec {
        seed,
        sites: 3,
        length,
        correlation_strength: 0.9,
        noise_level: 0.0,
        samples_per_day: config.samples_per_day,
        lags: None,
    })?;

    let ranges = split(clean.len())?;
    let mut noisy = clean.clone();
    // Separate stream from the generator's so the injected noise is
    // independent of the latent draws.
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x0DD5_EED5);
    let snr = 10f64.powf(snr_db / 10.0);
    for s in 0..clean.num_sites() {
        let train = &clean.series(s)[ranges.train.clone()];
        let mean = train.iter().sum::<f64>() / train.len() as f64;
        let var = train.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / train.len() as f64;
        let sd = (var / snr).sqrt();
        let series: Vec<f64> = clean
            .series(s)
            .iter()
            .map(|&v| v + sd * rng.sample::<f64, _>(rand_distr::StandardNormal))
            .collect();
        noisy.replace_series(s, series)?;
    }

    let arm = |wmf_enabled: bool| -> Result<MetricsReport> {
        let mut cfg = config.clone();
        cfg.wmf.enabled = wmf_enabled;
        cfg.target = String::new();
        cfg.sites = Vec::new();
        let (bundle, _) = train_model(&noisy, &cfg, 1, seed)?;
        let range = test_forecast_range(&bundle, &noisy)?;
        let forecasts = predict_range(&bundle, &noisy, range.clone())?;
        let target_idx = clean.site_index(&bundle.ensemble.target)?;
        let real: Vec<f64> = range.clone().map(|j| clean.series(target_idx)[j]).collect();
        let predicted: Vec<f64> = forecasts.iter().map(|f| f.predicted).collect();
        Ok(metrics(&real, &predicted, None)?)
    };

    Ok((arm(true)?, arm(false)?))
}

pub fn denoise_study(args: &DenoiseArgs, guard: &mut OutputGuard) -> Result<()> {
    let config = load_config(args.common.config.as_deref())?;
    let seed = args.common.seed.unwrap_or(config.seed);

    let results: Vec<(MetricsReport, MetricsReport)> = (0..config.replicates)
        .into_par_iter()
        .map(|r| denoise_study_once(&config, replicate_seed(seed, r), args.length, args.snr_db))
        .collect::<Result<_>>()?;
    let wmf_reports: Vec<MetricsReport> = results.iter().map(|(w, _)| w.clone()).collect();
    let raw_reports: Vec<MetricsReport> = results.iter().map(|(_, r)| r.clone()).collect();
    let wmf_mean = mean_report(&wmf_reports);
    let raw_mean = mean_report(&raw_reports);

    println!(
        "denoised RMSE {:.4} vs raw RMSE {:.4} (P_RMSE = {:.2}%)",
        wmf_mean.rmse,
        raw_mean.rmse,
        promotion(wmf_mean.rmse, raw_mean.rmse)?
    );
    let rows = vec![
        MetricsRow {
            model: "lmu-wmf".into(),
            slices: 1,
            report: wmf_mean,
        },
        MetricsRow {
            model: "lmu-raw".into(),
            slices: 1,
            report: raw_mean,
        },
    ];
    let path = write_metrics_file(guard, &args.common.out_dir, "denoise_metrics.csv", &rows)?;
    println!("wrote denoising study -> {}", path.display());
    Ok(())
}
