//! Data-handling commands: synth, preprocess, impute, convert.

use anyhow::{bail, Context, Result};

use windcast_core::cluster::SiteCluster;
use windcast_core::correlation::{find_gaps, impute_cck, impute_maa, CpkMatrix};
use windcast_core::preprocess::wmf_denoise;

use crate::cli::{ConvertArgs, ImputeArgs, PreprocessArgs, SynthArgs};
use crate::config::ImputationMethod;
use crate::data;
use crate::synth::{generate_synthetic, SynthSpec};

use super::{ensure_out_dir, load_config, OutputGuard};

pub fn synth(args: &SynthArgs, guard: &mut OutputGuard) -> Result<()> {
    let spec = SynthSpec {
        seed: args.seed,
        sites: args.sites,
        length: args.length,
        correlation_strength: args.strength,
        noise_level: args.noise,
        samples_per_day: args.samples_per_day,
        lags: None,
    };
    let cluster = generate_synthetic(&spec)?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let path = guard.track(args.out.clone());
    data::write(&cluster, &path)?;
    println!(
        "wrote synthetic cluster: {} sites x {} samples -> {}",
        cluster.num_sites(),
        cluster.len(),
        path.display()
    );
    Ok(())
}

pub fn preprocess(args: &PreprocessArgs, guard: &mut OutputGuard) -> Result<()> {
    let config = load_config(args.common.config.as_deref())?;
    let cluster = data::ingest(&args.data)?;
    let cluster = maybe_subset(&cluster, &config.sites)?;
    if let Some(site) = (0..cluster.num_sites()).find(|&s| cluster.first_missing(s).is_some()) {
        bail!(
            "site `{}` has missing values; run `impute` first",
            cluster.site_ids()[site]
        );
    }
    let Some(filter) = config.wmf_filter()? else {
        bail!("wmf.enabled is false; nothing to do");
    };
    let mut denoised = cluster.clone();
    for s in 0..cluster.num_sites() {
        denoised.replace_series(s, wmf_denoise(cluster.series(s), &filter)?)?;
    }
    ensure_out_dir(&args.common.out_dir)?;
    let path = guard.track(args.common.out_dir.join("denoised.csv"));
    data::write(&denoised, &path)?;
    println!("wrote denoised cluster -> {}", path.display());
    Ok(())
}

pub fn impute(args: &ImputeArgs, guard: &mut OutputGuard) -> Result<()> {
    let config = load_config(args.common.config.as_deref())?;
    let cluster = data::ingest(&args.data)?;
    let cluster = maybe_subset(&cluster, &config.sites)?;

    let gapped: Vec<usize> = (0..cluster.num_sites())
        .filter(|&s| cluster.first_missing(s).is_some())
        .collect();
    if gapped.is_empty() {
        println!("no missing values; copying input through");
    }

    let mut completed = cluster.clone();
    match config.imputation.method {
        ImputationMethod::Maa => {
            for &s in &gapped {
                let filled = impute_maa(cluster.series(s), config.imputation.maa_order)?;
                completed.replace_series(s, filled)?;
            }
        }
        ImputationMethod::Cck => {
            // Weights from pairwise-complete rows of the gappy data.
            let cpk = CpkMatrix::compute(&cluster, None, true)
                .context("computing CPK weights on pairwise-complete data")?;
            for &s in &gapped {
                let gaps = find_gaps(cluster.series(s));
                let filled = impute_cck(&cluster, s, &gaps, &cpk)?;
                completed.replace_series(s, filled)?;
            }
        }
    }
    for &s in &gapped {
        let gaps = find_gaps(cluster.series(s));
        let total: usize = gaps.iter().map(|g| g.len).sum();
        println!(
            "site `{}`: filled {} missing samples in {} gaps",
            cluster.site_ids()[s],
            total,
            gaps.len()
        );
    }
    ensure_out_dir(&args.common.out_dir)?;
    let path = guard.track(args.common.out_dir.join("completed.csv"));
    data::write(&completed, &path)?;
    println!("wrote completed cluster -> {}", path.display());
    Ok(())
}

pub fn convert(args: &ConvertArgs, guard: &mut OutputGuard) -> Result<()> {
    let ids: Vec<String> = if args.ids.is_empty() {
        args.inputs
            .iter()
            .map(|p| {
                p.file_stem()
                    .map(|s| s.to_string_lossy().into_owned())
                    .context("input file has no stem to use as a site id")
            })
            .collect::<Result<_>>()?
    } else {
        args.ids.clone()
    };
    if ids.len() != args.inputs.len() {
        bail!(
            "{} ids given for {} input files",
            ids.len(),
            args.inputs.len()
        );
    }
    let inputs: Vec<(String, std::path::PathBuf)> = ids
        .into_iter()
        .zip(args.inputs.iter().cloned())
        .collect();
    let cluster = data::merge_site_files(&inputs)?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let path = guard.track(args.out.clone());
    data::write(&cluster, &path)?;
    println!(
        "merged {} sites x {} samples -> {}",
        cluster.num_sites(),
        cluster.len(),
        path.display()
    );
    Ok(())
}

pub(crate) fn maybe_subset(cluster: &SiteCluster, sites: &[String]) -> Result<SiteCluster> {
    if sites.is_empty() {
        Ok(cluster.clone())
    } else {
        Ok(data::subset_cluster(cluster, sites)?)
    }
}
