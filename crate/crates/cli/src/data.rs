//! Reading and writing the cluster data file: delimited text with a
//! `timestamp,<site>,...` header, ISO-8601 timestamps on a uniform step, and
//! empty fields for missing values.

use std::path::Path;

use anyhow::{bail, Context, Result};
use chrono::NaiveDateTime;

use windcast_core::cluster::{is_missing, SiteCluster, MISSING};

const TIMESTAMP_FORMAT: &str = "%Y-%m-%dT%H:%M:%S";

fn parse_timestamp(text: &str, line: u64) -> Result<i64> {
    let ts = NaiveDateTime::parse_from_str(text.trim(), TIMESTAMP_FORMAT)
        .with_context(|| format!("line {line}: bad timestamp `{text}`"))?;
    Ok(ts.and_utc().timestamp())
}

fn format_timestamp(epoch_s: i64) -> String {
    chrono::DateTime::from_timestamp(epoch_s, 0)
        .expect("cluster timestamps are in range")
        .naive_utc()
        .format(TIMESTAMP_FORMAT)
        .to_string()
}

/// Parses a cluster data file. Rejects malformed rows (with line numbers),
/// non-uniform steps, and duplicate timestamps.
pub fn ingest(path: &Path) -> Result<SiteCluster> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .from_path(path)
        .with_context(|| format!("opening {}", path.display()))?;

    let headers = reader.headers().context("reading header row")?.clone();
    if headers.len() < 2 || headers.get(0) != Some("timestamp") {
        bail!("header must be `timestamp,<site_id>,...`, got `{}`", headers.iter().collect::<Vec<_>>().join(","));
    }
    let site_ids: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    for (i, id) in site_ids.iter().enumerate() {
        if id.is_empty() {
            bail!("empty site id in header column {}", i + 2);
        }
        if site_ids[..i].contains(id) {
            bail!("duplicate site id `{id}` in header");
        }
    }

    let mut series: Vec<Vec<f64>> = vec![Vec::new(); site_ids.len()];
    let mut timestamps: Vec<i64> = Vec::new();
    for record in reader.records() {
        let record = record.context("reading data row")?;
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != site_ids.len() + 1 {
            bail!(
                "line {line}: expected {} fields, got {}",
                site_ids.len() + 1,
                record.len()
            );
        }
        timestamps.push(parse_timestamp(record.get(0).unwrap(), line)?);
        for (s, field) in record.iter().skip(1).enumerate() {
            let field = field.trim();
            if field.is_empty() {
                series[s].push(MISSING);
            } else {
                let value: f64 = field
                    .parse()
                    .with_context(|| format!("line {line}: bad value `{field}`"))?;
                if !value.is_finite() {
                    bail!("line {line}: non-finite value `{field}`");
                }
                series[s].push(value);
            }
        }
    }

    if timestamps.len() < 2 {
        bail!("need at least two data rows, got {}", timestamps.len());
    }
    let step = timestamps[1] - timestamps[0];
    if step == 0 {
        bail!("duplicate timestamp on line 3: {}", format_timestamp(timestamps[1]));
    }
    if step < 0 {
        bail!("timestamps not increasing at line 3");
    }
    for (i, pair) in timestamps.windows(2).enumerate() {
        let line = i as u64 + 3; // header is line 1, first data row line 2
        if pair[1] == pair[0] {
            bail!("duplicate timestamp on line {line}: {}", format_timestamp(pair[1]));
        }
        if pair[1] - pair[0] != step {
            bail!(
                "non-uniform timestamp step on line {line}: expected {step}s, got {}s",
                pair[1] - pair[0]
            );
        }
    }

    let step = u32::try_from(step).context("timestamp step too large")?;
    let samples_per_day = if 86_400 % step == 0 {
        (86_400 / step) as usize
    } else {
        bail!("timestamp step {step}s does not divide one day");
    };
    Ok(SiteCluster::new(
        site_ids,
        series,
        timestamps[0],
        step,
        samples_per_day,
    )?)
}

/// Writes a cluster back out. Values use the shortest round-trip decimal
/// form, so `ingest(write(cluster))` reproduces the cluster bit for bit.
pub fn write(cluster: &SiteCluster, path: &Path) -> Result<()> {
    let mut writer = csv::WriterBuilder::new()
        .has_headers(false)
        .from_path(path)
        .with_context(|| format!("creating {}", path.display()))?;
    let mut header = vec!["timestamp".to_string()];
    header.extend(cluster.site_ids().iter().cloned());
    writer.write_record(&header)?;
    for t in 0..cluster.len() {
        let mut row = Vec::with_capacity(cluster.num_sites() + 1);
        row.push(format_timestamp(cluster.timestamp_at(t)));
        for s in 0..cluster.num_sites() {
            let v = cluster.series(s)[t];
            row.push(if is_missing(v) {
                String::new()
            } else {
                format!("{v}")
            });
        }
        writer.write_record(&row)?;
    }
    writer.flush()?;
    Ok(())
}

/// Restricts a cluster to the given sites, in the given order.
pub fn subset_cluster(cluster: &SiteCluster, ids: &[String]) -> Result<SiteCluster> {
    let mut series = Vec::with_capacity(ids.len());
    for id in ids {
        series.push(cluster.series_by_id(id)?.to_vec());
    }
    Ok(SiteCluster::new(
        ids.to_vec(),
        series,
        cluster.start_epoch_s(),
        cluster.step_s(),
        cluster.samples_per_day(),
    )?)
}

/// Merges per-site `timestamp,value` files into one cluster file. Every
/// input must carry exactly the same timestamp grid.
pub fn merge_site_files(inputs: &[(String, std::path::PathBuf)]) -> Result<SiteCluster> {
    if inputs.is_empty() {
        bail!("no input files");
    }
    let mut all_series: Vec<Vec<f64>> = Vec::new();
    let mut reference: Option<(Vec<i64>, String)> = None;
    for (id, path) in inputs {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .from_path(path)
            .with_context(|| format!("opening {}", path.display()))?;
        let mut timestamps = Vec::new();
        let mut values = Vec::new();
        for record in reader.records() {
            let record = record?;
            let line = record.position().map(|p| p.line()).unwrap_or(0);
            if record.len() != 2 {
                bail!(
                    "{}: line {line}: expected `timestamp,value`",
                    path.display()
                );
            }
            timestamps.push(parse_timestamp(record.get(0).unwrap(), line)?);
            let field = record.get(1).unwrap().trim();
            values.push(if field.is_empty() {
                MISSING
            } else {
                field
                    .parse()
                    .with_context(|| format!("{}: line {line}: bad value", path.display()))?
            });
        }
        match &reference {
            None => reference = Some((timestamps, id.clone())),
            Some((expected, first_id)) => {
                if &timestamps != expected {
                    bail!(
                        "site `{id}` timestamp grid differs from site `{first_id}`; align the downloads first"
                    );
                }
            }
        }
        all_series.push(values);
    }
    let (timestamps, _) = reference.unwrap();
    if timestamps.len() < 2 {
        bail!("need at least two rows per site");
    }
    let step = timestamps[1] - timestamps[0];
    for pair in timestamps.windows(2) {
        if pair[1] - pair[0] != step {
            bail!("non-uniform timestamp step in site files");
        }
    }
    let step = u32::try_from(step).context("timestamp step too large")?;
    let samples_per_day = if step != 0 && 86_400 % step == 0 {
        (86_400 / step) as usize
    } else {
        bail!("timestamp step {step}s does not divide one day");
    };
    Ok(SiteCluster::new(
        inputs.iter().map(|(id, _)| id.clone()).collect(),
        all_series,
        timestamps[0],
        step,
        samples_per_day,
    )?)
}
