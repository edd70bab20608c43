// Scratch probe for tuning the desk-scale experiments. Not a deliverable.

use windcast_cli::config::{ExperimentConfig, Profile};
use windcast_cli::pipeline::{predict_range, prepare, test_forecast_range, train_model};
use windcast_cli::synth::{generate_synthetic, SynthSpec};
use windcast_core::evaluation::metrics;
use windcast_core::preprocess::make_windows;

fn desk_config(max_epochs: usize, patience: usize) -> ExperimentConfig {
    let mut config = ExperimentConfig::default();
    config.model.profile = Profile::Desk;
    config.training.max_epochs = max_epochs;
    config.training.patience = patience;
    config
}

fn rmse_for(
    config: &ExperimentConfig,
    cluster: &windcast_core::cluster::SiteCluster,
    n: usize,
    seed: u64,
) -> f64 {
    let (bundle, _) = train_model(cluster, config, n, seed).unwrap();
    let range = test_forecast_range(&bundle, cluster).unwrap();
    let forecasts = predict_range(&bundle, cluster, range).unwrap();
    let actual: Vec<f64> = forecasts.iter().map(|f| f.actual).collect();
    let predicted: Vec<f64> = forecasts.iter().map(|f| f.predicted).collect();
    metrics(&actual, &predicted, None).unwrap().rmse
}

/// Ridge regression of residuals on neighbor windows: upper bound on what a
/// linear slice-2 could capture.
fn linear_residual_oracle(config: &ExperimentConfig, seed: u64) {
    let cluster = generate_synthetic(&SynthSpec {
        seed,
        ..SynthSpec::default()
    })
    .unwrap();
    let (bundle, _) = train_model(&cluster, config, 1, seed).unwrap();
    let wmf = config.wmf_filter().unwrap();
    let prep = prepare(&cluster, wmf.as_ref()).unwrap();

    // residuals of slice 1 on train and test (normalized units)
    let target_norm = &prep.normalizers[&bundle.ensemble.target];
    let max_lb = 10;
    let proc_target = prep.processed.series(0).to_vec();
    let neighbor = prep.processed.series(1).to_vec(); // s2 (lag 0, leads target)

    let windows_t = make_windows(&proc_target, 10).unwrap();
    let windows_n = make_windows(&neighbor, 5).unwrap();

    let slice1 = &bundle.ensemble.slices[0];
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new(); // (neighbor window, residual)
    let mut test_rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for j in max_lb..cluster.len() {
        let wt = &windows_t[j - 10].0;
        let pred = slice1.predict(wt).unwrap();
        let resid = proc_target[j] - pred;
        let wn = windows_n[j - 5].0.clone();
        if j < 7000 {
            rows.push((wn, resid));
        } else if j >= 9000 {
            test_rows.push((wn, resid));
        }
    }
    // Solve least squares (6 params: 5 lags + intercept) via normal equations.
    let p = 6;
    let mut ata = vec![0.0; p * p];
    let mut atb = vec![0.0; p];
    for (w, r) in &rows {
        let mut x = w.clone();
        x.push(1.0);
        for a in 0..p {
            for b in 0..p {
                ata[a * p + b] += x[a] * x[b];
            }
            atb[a] += x[a] * r;
        }
    }
    for a in 0..p {
        ata[a * p + a] += 1e-8;
    }
    // Gaussian elimination.
    let mut m = ata.clone();
    let mut v = atb.clone();
    for col in 0..p {
        let piv = (col..p).max_by(|&a, &b| m[a * p + col].abs().partial_cmp(&m[b * p + col].abs()).unwrap()).unwrap();
        m.swap(col * p, piv * p); // crude row swap below
        for k in 0..p {
            m.swap(col * p + k, piv * p + k);
        }
        v.swap(col, piv);
        let d = m[col * p + col];
        for k in 0..p {
            m[col * p + k] /= d;
        }
        v[col] /= d;
        for row in 0..p {
            if row != col {
                let f = m[row * p + col];
                for k in 0..p {
                    m[row * p + k] -= f * m[col * p + k];
                }
                v[row] -= f * v[col];
            }
        }
    }
    let beta = v;
    // Test-set residual MSE before/after linear compensation (normalized).
    let scale = target_norm.max - target_norm.min;
    let mut sse_before = 0.0;
    let mut sse_after = 0.0;
    for (w, r) in &test_rows {
        let mut x = w.clone();
        x.push(1.0);
        let fit: f64 = x.iter().zip(&beta).map(|(a, b)| a * b).sum();
        sse_before += r * r;
        sse_after += (r - fit) * (r - fit);
    }
    let n = test_rows.len() as f64;
    println!(
        "seed {seed}: 1-slice test RMSE {:.4} m/s; after linear neighbor compensation {:.4} m/s (lift {:.1}%)",
        (sse_before / n).sqrt() * scale,
        (sse_after / n).sqrt() * scale,
        (1.0 - ((sse_after / n).sqrt() / (sse_before / n).sqrt())) * 100.0
    );
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let mode = args.get(1).map(String::as_str).unwrap_or("oracle");
    match mode {
        "median" => {
            run_median();
        }
        "oracle" => {
            let config = desk_config(35, 5);
            for seed in 0..3 {
                linear_residual_oracle(&config, seed);
            }
        }
        "missing" => { run_missing(); }
        "denoise" => { run_denoise(); }
        "nowmf" => {
            let mut config = desk_config(25, 4);
            config.wmf.enabled = false;
            for seed in 0..3 {
                let cluster = generate_synthetic(&SynthSpec {
                    seed,
                    ..SynthSpec::default()
                })
                .unwrap();
                let r1 = rmse_for(&config, &cluster, 1, seed);
                let r3 = rmse_for(&config, &cluster, 3, seed);
                println!(
                    "no-wmf seed {seed}: 1-slice {r1:.4} | 3-slice {r3:.4} | lift {:.1}%",
                    (1.0 - r3 / r1) * 100.0
                );
            }
        }
        "long" => {
            let mut config = desk_config(60, 8);
            config.training.learning_rate = 3e-3;
            for seed in 0..3 {
                let cluster = generate_synthetic(&SynthSpec {
                    seed,
                    ..SynthSpec::default()
                })
                .unwrap();
                let r1 = rmse_for(&config, &cluster, 1, seed);
                let r3 = rmse_for(&config, &cluster, 3, seed);
                println!(
                    "long seed {seed}: 1-slice {r1:.4} | 3-slice {r3:.4} | lift {:.1}%",
                    (1.0 - r3 / r1) * 100.0
                );
            }
        }
        other => eprintln!("unknown mode {other}"),
    }
}

fn run_median() {
    use rayon::prelude::*;
    use std::time::Instant;
    let t0 = Instant::now();
    let mut config = desk_config(35, 5);
    config.training.learning_rate = 3e-3;
    let seeds: Vec<u64> = (0..10).collect();
    let results: Vec<(f64, f64)> = seeds
        .par_iter()
        .map(|&seed| {
            let cluster = generate_synthetic(&SynthSpec { seed, ..SynthSpec::default() }).unwrap();
            let r1 = rmse_for(&config, &cluster, 1, seed);
            let r3 = rmse_for(&config, &cluster, 3, seed);
            eprintln!("seed {seed}: 1-slice {r1:.4} | 3-slice {r3:.4} | lift {:.1}% [{:.0}s]", (1.0 - r3/r1)*100.0, t0.elapsed().as_secs_f64());
            (r1, r3)
        })
        .collect();
    let mut r1s: Vec<f64> = results.iter().map(|(a, _)| *a).collect();
    let mut r3s: Vec<f64> = results.iter().map(|(_, b)| *b).collect();
    r1s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    r3s.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let med = |v: &[f64]| (v[4] + v[5]) / 2.0;
    println!(
        "median 1-slice {:.4} | median 3-slice {:.4} | median lift {:.1}% | elapsed {:.0}s",
        med(&r1s), med(&r3s), (1.0 - med(&r3s)/med(&r1s))*100.0, t0.elapsed().as_secs_f64()
    );
}

fn run_missing() {
    use rayon::prelude::*;
    use std::time::Instant;
    let t0 = Instant::now();
    let mut config = desk_config(35, 5);
    config.training.learning_rate = 3e-3;
    let seeds: Vec<u64> = (0..10).collect();
    let outcomes: Vec<Vec<windcast_cli::commands::GapRow>> = seeds
        .par_iter()
        .map(|&seed| {
            let cluster = generate_synthetic(&SynthSpec { seed, ..SynthSpec::default() }).unwrap();
            let (start, rows) = windcast_cli::commands::missing_data_once(&cluster, &config, seed).unwrap();
            for r in &rows {
                eprintln!(
                    "seed {seed} gap {} at {start}: normal {:.4} | maa {:.4} | cck {:.4} [{:.0}s]",
                    r.gap_len, r.normal.rmse, r.single.rmse, r.cluster.rmse,
                    t0.elapsed().as_secs_f64()
                );
            }
            rows
        })
        .collect();
    // Criterion-7 checks
    let mut cck_wins_at_15 = 0;
    for rows in &outcomes {
        let r15 = rows.iter().find(|r| r.gap_len == 15).unwrap();
        if r15.cluster.rmse < r15.single.rmse {
            cck_wins_at_15 += 1;
        }
    }
    for len in [5usize, 10, 15] {
        let mut deg_maa: Vec<f64> = outcomes.iter().map(|rows| {
            let r = rows.iter().find(|r| r.gap_len == len).unwrap();
            r.single.rmse - r.normal.rmse
        }).collect();
        let mut deg_cck: Vec<f64> = outcomes.iter().map(|rows| {
            let r = rows.iter().find(|r| r.gap_len == len).unwrap();
            r.cluster.rmse - r.normal.rmse
        }).collect();
        deg_maa.sort_by(|a, b| a.partial_cmp(b).unwrap());
        deg_cck.sort_by(|a, b| a.partial_cmp(b).unwrap());
        println!(
            "gap {len}: median degradation MAA {:.4} vs CCK {:.4} ({})",
            (deg_maa[4]+deg_maa[5])/2.0, (deg_cck[4]+deg_cck[5])/2.0,
            if (deg_cck[4]+deg_cck[5]) < (deg_maa[4]+deg_maa[5]) { "CCK smaller" } else { "MAA smaller!" }
        );
    }
    println!("cck wins at gap 15: {cck_wins_at_15}/10; elapsed {:.0}s", t0.elapsed().as_secs_f64());
}

fn run_denoise() {
    use rayon::prelude::*;
    use std::time::Instant;
    let t0 = Instant::now();
    let mut config = desk_config(35, 5);
    config.training.learning_rate = 3e-3;
    let seeds: Vec<u64> = (0..10).collect();
    let results: Vec<(f64, f64)> = seeds
        .par_iter()
        .map(|&seed| {
            let (wmf, raw) = windcast_cli::commands::denoise_study_once(&config, seed, 4000, 10.0).unwrap();
            eprintln!("seed {seed}: wmf {:.4} | raw {:.4} | reduction {:.1}% [{:.0}s]",
                wmf.rmse, raw.rmse, (1.0 - wmf.rmse/raw.rmse)*100.0, t0.elapsed().as_secs_f64());
            (wmf.rmse, raw.rmse)
        })
        .collect();
    let mut reductions: Vec<f64> = results.iter().map(|(w, r)| (1.0 - w/r) * 100.0).collect();
    reductions.sort_by(|a, b| a.partial_cmp(b).unwrap());
    println!("median reduction {:.1}% (min {:.1}%), elapsed {:.0}s",
        (reductions[4]+reductions[5])/2.0, reductions[0], t0.elapsed().as_secs_f64());
}
