//! Model lifecycle commands: train, predict, evaluate.

use std::fmt::Write as _;

use anyhow::{bail, Context, Result};

use windcast_core::evaluation::metrics;
use windcast_core::preprocess::split;

use crate::cli::{EvaluateArgs, PredictArgs, TrainArgs};
use crate::data;
use crate::model_store::ModelBundle;
use crate::pipeline::{predict_range, train_model};
use crate::plot;

use super::basic::maybe_subset;
use super::{cell, ensure_out_dir, load_config, write_metrics_file, MetricsRow, OutputGuard};

pub fn train(args: &TrainArgs, guard: &mut OutputGuard) -> Result<()> {
    let config = load_config(args.common.config.as_deref())?;
    let seed = args.common.seed.unwrap_or(config.seed);
    let cluster = data::ingest(&args.data)?;
    let cluster = maybe_subset(&cluster, &config.sites)?;

    let (bundle, cpk) = train_model(&cluster, &config, config.model.slices, seed)?;

    let model_dir = args.common.out_dir.join("model");
    guard.track_all(bundle.save(&model_dir)?);

    // Per-slice training curves.
    let mut curves = String::from("slice,epoch,train_mse\n");
    for (i, slice) in bundle.ensemble.slices.iter().enumerate() {
        for (epoch, loss) in slice.train_loss_curve().iter().enumerate() {
            let _ = writeln!(curves, "{},{},{}", i + 1, epoch, loss);
        }
    }
    let curves_path = guard.track(args.common.out_dir.join("training_curves.csv"));
    std::fs::write(&curves_path, curves)?;

    // Pairwise correlation and compensation weights.
    let mut cpk_text = String::from("site_alpha,site_beta,krcc,cpk\n");
    let ids = cluster.site_ids();
    for a in 0..ids.len() {
        for b in 0..ids.len() {
            if a != b {
                let _ = writeln!(
                    cpk_text,
                    "{},{},{},{}",
                    ids[a],
                    ids[b],
                    cpk.r.get(a, b),
                    cpk.k.get(a, b)
                );
            }
        }
    }
    let cpk_path = guard.track(args.common.out_dir.join("cpk.csv"));
    std::fs::write(&cpk_path, cpk_text)?;

    println!(
        "trained {}-slice {} ensemble for `{}` (neighbors: {}) -> {}",
        bundle.ensemble.slices.len(),
        match config.model.predictor {
            windcast_core::ensemble::PredictorKind::Lmu => "LMU",
            windcast_core::ensemble::PredictorKind::Srnn => "SRNN",
        },
        bundle.ensemble.target,
        bundle.ensemble.neighbors.join(", "),
        model_dir.display()
    );
    Ok(())
}

pub fn predict(args: &PredictArgs, guard: &mut OutputGuard) -> Result<()> {
    let bundle = ModelBundle::load(&args.model)?;
    let cluster = data::ingest(&args.data)?;
    if !cluster.is_complete() {
        bail!("data has missing values; run `impute` first");
    }
    let ranges = split(cluster.len())?;
    let max_lb = bundle.ensemble.max_lookback();
    let range = match args.range.as_str() {
        "test" => ranges.test.start.max(max_lb)..ranges.test.end,
        "val" => ranges.val.start.max(max_lb)..ranges.val.end,
        "all" => max_lb..cluster.len(),
        other => bail!("unknown range `{other}`"),
    };
    let forecasts = predict_range(&bundle, &cluster, range)?;

    ensure_out_dir(&args.common.out_dir)?;
    let mut text = String::from("timestamp,actual,predicted\n");
    for f in &forecasts {
        let _ = writeln!(
            text,
            "{},{},{}",
            chrono::DateTime::from_timestamp(f.timestamp, 0)
                .context("timestamp out of range")?
                .naive_utc()
                .format("%Y-%m-%dT%H:%M:%S"),
            f.actual,
            f.predicted
        );
    }
    let pred_path = guard.track(args.common.out_dir.join("predictions.csv"));
    std::fs::write(&pred_path, text)?;

    let actual: Vec<f64> = forecasts.iter().map(|f| f.actual).collect();
    let predicted: Vec<f64> = forecasts.iter().map(|f| f.predicted).collect();
    let svg_path = guard.track(args.common.out_dir.join("predictions.svg"));
    plot::line_chart(
        &svg_path,
        &format!("{}: actual vs predicted wind speed", bundle.ensemble.target),
        "wind speed (m/s)",
        &[("actual", &actual), ("predicted", &predicted)],
    )?;
    println!(
        "wrote {} forecasts -> {} (+ {})",
        forecasts.len(),
        pred_path.display(),
        svg_path.display()
    );
    Ok(())
}

pub fn evaluate(args: &EvaluateArgs, guard: &mut OutputGuard) -> Result<()> {
    let (actual, predicted) = read_predictions(&args.pred)?;
    let mask: Option<Vec<usize>> = match (args.mask_start, args.mask_len) {
        (Some(start), Some(len)) => Some((start..start + len).collect()),
        (Some(start), None) => Some((start..actual.len()).collect()),
        _ => None,
    };
    let report = metrics(&actual, &predicted, mask.as_deref())?;
    println!(
        "T={} MAPE={}% MAE={:.4} m/s RMSE={:.4} m/s",
        report.count,
        cell(report.mape_pct()),
        report.mae,
        report.rmse
    );
    let rows = vec![MetricsRow {
        model: args.label.clone(),
        slices: args.slices,
        report,
    }];
    let path = write_metrics_file(guard, &args.common.out_dir, "metrics.csv", &rows)?;
    println!("wrote metrics -> {}", path.display());
    Ok(())
}

pub(crate) fn read_predictions(path: &std::path::Path) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;
    let mut actual = Vec::new();
    let mut predicted = Vec::new();
    for record in reader.records() {
        let record = record?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != 3 {
            bail!("line {line}: expected `timestamp,actual,predicted`");
        }
        actual.push(
            record
                .get(1)
                .unwrap()
                .parse()
                .with_context(|| format!("line {line}: bad actual"))?,
        );
        predicted.push(
            record
                .get(2)
                .unwrap()
                .parse()
                .with_context(|| format!("line {line}: bad prediction"))?,
        );
    }
    if actual.is_empty() {
        bail!("{}: no prediction rows", path.display());
    }
    Ok((actual, predicted))
}
