//! Aligned multi-site wind-speed series with a missing-value marker.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Missing samples are carried as NaN inside the series.
pub const MISSING: f64 = f64::NAN;

#[inline]
pub fn is_missing(v: f64) -> bool {
    v.is_nan()
}

/// Equal-length per-site series on a shared uniform time grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SiteCluster {
    site_ids: Vec<String>,
    series: Vec<Vec<f64>>,
    /// Timestamp of sample 0, seconds since the Unix epoch.
    start_epoch_s: i64,
    /// Uniform step between samples, in seconds.
    step_s: u32,
    samples_per_day: usize,
}

impl SiteCluster {
    pub fn new(
        site_ids: Vec<String>,
        series: Vec<Vec<f64>>,
        start_epoch_s: i64,
        step_s: u32,
        samples_per_day: usize,
    ) -> Result<Self> {
        if site_ids.is_empty() {
            return Err(Error::EmptyInput("site list"));
        }
        if site_ids.len() != series.len() {
            return Err(Error::DimensionMismatch {
                what: "series per site",
                expected: site_ids.len(),
                got: series.len(),
            });
        }
        let len = series[0].len();
        if len == 0 {
            return Err(Error::EmptyInput("site series"));
        }
        for s in &series {
            if s.len() != len {
                return Err(Error::DimensionMismatch {
                    what: "aligned series length",
                    expected: len,
                    got: s.len(),
                });
            }
        }
        if step_s == 0 {
            return Err(Error::InvalidParameter {
                name: "step_s",
                reason: "timestamp step must be positive".into(),
            });
        }
        if samples_per_day == 0 {
            return Err(Error::InvalidParameter {
                name: "samples_per_day",
                reason: "must be at least 1".into(),
            });
        }
        Ok(SiteCluster {
            site_ids,
            series,
            start_epoch_s,
            step_s,
            samples_per_day,
        })
    }

    pub fn len(&self) -> usize {
        self.series[0].len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn num_sites(&self) -> usize {
        self.site_ids.len()
    }

    pub fn site_ids(&self) -> &[String] {
        &self.site_ids
    }

    pub fn site_index(&self, id: &str) -> Result<usize> {
        self.site_ids
            .iter()
            .position(|s| s == id)
            .ok_or_else(|| Error::UnknownSite(id.into()))
    }

    pub fn series(&self, site: usize) -> &[f64] {
        &self.series[site]
    }

    pub fn series_by_id(&self, id: &str) -> Result<&[f64]> {
        Ok(self.series(self.site_index(id)?))
    }

    /// Swaps in a new series for one site (e.g. after imputation/denoising).
    pub fn replace_series(&mut self, site: usize, series: Vec<f64>) -> Result<()> {
        if series.len() != self.len() {
            return Err(Error::DimensionMismatch {
                what: "replacement series length",
                expected: self.len(),
                got: series.len(),
            });
        }
        self.series[site] = series;
        Ok(())
    }

    pub fn start_epoch_s(&self) -> i64 {
        self.start_epoch_s
    }

    pub fn step_s(&self) -> u32 {
        self.step_s
    }

    pub fn samples_per_day(&self) -> usize {
        self.samples_per_day
    }

    pub fn timestamp_at(&self, index: usize) -> i64 {
        self.start_epoch_s + index as i64 * self.step_s as i64
    }

    /// True where the site's sample is missing.
    pub fn missing_mask(&self, site: usize) -> Vec<bool> {
        self.series[site].iter().map(|&v| is_missing(v)).collect()
    }

    /// Index of the first missing sample of the site, if any.
    pub fn first_missing(&self, site: usize) -> Option<usize> {
        self.series[site].iter().position(|&v| is_missing(v))
    }

    pub fn is_complete(&self) -> bool {
        (0..self.num_sites()).all(|s| self.first_missing(s).is_none())
    }
}
