//! Series preparation: weighted-mean-filter denoising, min-max
//! normalization, sliding windows, chronological splits, and periodic
//! time-series extraction.

use serde::{Deserialize, Serialize};
use std::ops::Range;

use crate::error::{Error, Result};

/// Causal weighted mean filter. Weight index 0 applies to the most recent
/// sample; near the start of the series the window truncates and the weights
/// renormalize over the available samples.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WmfFilter {
    weights: Vec<f64>,
}

impl WmfFilter {
    /// Default size-5 weights, newest sample first.
    pub const DEFAULT_WEIGHTS: [f64; 5] = [0.90, 0.381, 0.73, 0.66, 0.559];

    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::EmptyInput("wmf weights"));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "all weights must be finite and non-negative".into(),
            });
        }
        if weights.iter().all(|&w| w == 0.0) {
            return Err(Error::InvalidParameter {
                name: "weights",
                reason: "at least one weight must be positive".into(),
            });
        }
        Ok(WmfFilter { weights })
    }

    pub fn size(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

impl Default for WmfFilter {
    fn default() -> Self {
        WmfFilter::new(Self::DEFAULT_WEIGHTS.to_vec()).expect("default weights are valid")
    }
}

/// Applies the filter causally: output[t] is the weight-normalized mean of
/// the samples at t, t-1, ... within the window. Output length equals input
/// length; no future samples are used.
pub fn wmf_denoise(series: &[f64], filter: &WmfFilter) -> Result<Vec<f64>> {
    for (i, v) in series.iter().enumerate() {
        if !v.is_finite() {
            return Err(Error::MissingValue {
                what: "wmf input",
                index: i,
            });
        }
    }
    let weights = filter.weights();
    let mut out = Vec::with_capacity(series.len());
    for t in 0..series.len() {
        let avail = (t + 1).min(weights.len());
        let mut num = 0.0;
        let mut den = 0.0;
        for (k, &w) in weights.iter().take(avail).enumerate() {
            num += w * series[t - k];
            den += w;
        }
        out.push(num / den);
    }
    Ok(out)
}

/// Per-site affine normalizer fitted on the training portion only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    pub min: f64,
    pub max: f64,
}

impl Normalizer {
    /// Fits min/max over `train`, typically the training split of one site.
    pub fn fit(train: &[f64], site: &str) -> Result<Self> {
        if train.is_empty() {
            return Err(Error::EmptyInput("normalizer training data"));
        }
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for (i, &v) in train.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::MissingValue {
                    what: "normalizer input",
                    index: i,
                });
            }
            min = min.min(v);
            max = max.max(v);
        }
        if max <= min {
            return Err(Error::DegenerateRange { site: site.into() });
        }
        Ok(Normalizer { min, max })
    }

    #[inline]
    pub fn transform(&self, x: f64) -> f64 {
        (x - self.min) / (self.max - self.min)
    }

    #[inline]
    pub fn inverse(&self, y: f64) -> f64 {
        y * (self.max - self.min) + self.min
    }

    pub fn transform_series(&self, series: &[f64]) -> Vec<f64> {
        series.iter().map(|&x| self.transform(x)).collect()
    }

    pub fn inverse_series(&self, series: &[f64]) -> Vec<f64> {
        series.iter().map(|&y| self.inverse(y)).collect()
    }
}

/// One-step-ahead supervised pairs: pair `i` is
/// `(series[i..i+lookback], series[i+lookback])`.
pub fn make_windows(series: &[f64], lookback: usize) -> Result<Vec<(Vec<f64>, f64)>> {
    if lookback == 0 {
        return Err(Error::InvalidParameter {
            name: "lookback",
            reason: "must be at least 1".into(),
        });
    }
    if series.len() <= lookback {
        return Err(Error::SeriesTooShort {
            needed: lookback + 1,
            got: series.len(),
        });
    }
    Ok((0..series.len() - lookback)
        .map(|i| (series[i..i + lookback].to_vec(), series[i + lookback]))
        .collect())
}

/// Contiguous chronological 70/20/10 split with floor rounding; the
/// remainder goes to the test partition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SplitRanges {
    pub train: Range<usize>,
    pub val: Range<usize>,
    pub test: Range<usize>,
}

pub fn split(len: usize) -> Result<SplitRanges> {
    if len < 10 {
        return Err(Error::SeriesTooShort {
            needed: 10,
            got: len,
        });
    }
    let train_end = len * 7 / 10;
    let val_end = train_end + len * 2 / 10;
    Ok(SplitRanges {
        train: 0..train_end,
        val: train_end..val_end,
        test: val_end..len,
    })
}

/// Splits a series by time into periodic time series: slot `s` collects the
/// samples at indices `s, s + spd, s + 2*spd, ...` (the same moment of each
/// day). A trailing partial day is allowed, so slot lengths differ by at
/// most one.
pub fn extract_pts(series: &[f64], samples_per_day: usize) -> Result<Vec<Vec<f64>>> {
    if samples_per_day < 1 {
        return Err(Error::InvalidParameter {
            name: "samples_per_day",
            reason: "must be at least 1".into(),
        });
    }
    if series.len() < samples_per_day {
        return Err(Error::SeriesTooShort {
            needed: samples_per_day,
            got: series.len(),
        });
    }
    let mut slots: Vec<Vec<f64>> = (0..samples_per_day)
        .map(|s| {
            let days = (series.len() - s).div_ceil(samples_per_day);
            Vec::with_capacity(days)
        })
        .collect();
    for (t, &v) in series.iter().enumerate() {
        slots[t % samples_per_day].push(v);
    }
    Ok(slots)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wmf_preserves_constants() {
        let filter = WmfFilter::default();
        let series = vec![3.7; 20];
        let out = wmf_denoise(&series, &filter).unwrap();
        for v in out {
            assert!((v - 3.7).abs() < 1e-12);
        }
    }

    #[test]
    fn wmf_hand_example_at_t4() {
        let filter = WmfFilter::default();
        let out = wmf_denoise(&[1.0, 2.0, 3.0, 4.0, 5.0], &filter).unwrap();
        let expected = (0.90 * 5.0 + 0.381 * 4.0 + 0.73 * 3.0 + 0.66 * 2.0 + 0.559 * 1.0) / 3.230;
        assert!((out[4] - expected).abs() < 1e-12, "got {}", out[4]);
        assert!((out[4] - 3.1248).abs() < 1e-3);
    }

    #[test]
    fn wmf_single_sample_truncates_to_identity() {
        let filter = WmfFilter::default();
        assert_eq!(wmf_denoise(&[7.0], &filter).unwrap(), vec![7.0]);
    }

    #[test]
    fn wmf_output_length_and_nonnegativity() {
        let filter = WmfFilter::default();
        let series: Vec<f64> = (0..37).map(|i| (i as f64 * 0.3).sin().abs()).collect();
        let out = wmf_denoise(&series, &filter).unwrap();
        assert_eq!(out.len(), series.len());
        assert!(out.iter().all(|&v| v >= 0.0));
    }

    #[test]
    fn wmf_is_causal() {
        let filter = WmfFilter::default();
        let series: Vec<f64> = (0..30).map(|i| (i as f64 * 0.7).cos()).collect();
        let full = wmf_denoise(&series, &filter).unwrap();
        for t in 0..series.len() {
            let truncated = wmf_denoise(&series[..=t], &filter).unwrap();
            for k in 0..=t {
                assert_eq!(full[k], truncated[k], "future sample leaked into t={k}");
            }
        }
    }

    #[test]
    fn wmf_rejects_missing_values() {
        let filter = WmfFilter::default();
        assert!(matches!(
            wmf_denoise(&[1.0, f64::NAN, 2.0], &filter),
            Err(Error::MissingValue { index: 1, .. })
        ));
    }

    #[test]
    fn wmf_rejects_bad_weights() {
        assert!(WmfFilter::new(vec![]).is_err());
        assert!(WmfFilter::new(vec![0.5, -0.1]).is_err());
        assert!(WmfFilter::new(vec![0.0, 0.0]).is_err());
    }

    #[test]
    fn normalizer_endpoints_and_roundtrip() {
        use rand::Rng;
        use rand::SeedableRng;
        let norm = Normalizer::fit(&[2.0, 8.0, 5.0], "s1").unwrap();
        assert_eq!(norm.transform(2.0), 0.0);
        assert_eq!(norm.transform(8.0), 1.0);
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let x: f64 = rng.gen_range(-5.0..15.0);
            assert!((norm.inverse(norm.transform(x)) - x).abs() < 1e-12);
        }
    }

    #[test]
    fn normalizer_rejects_constant_series() {
        assert!(matches!(
            Normalizer::fit(&[4.0, 4.0, 4.0], "flat"),
            Err(Error::DegenerateRange { .. })
        ));
    }

    #[test]
    fn windows_enumeration() {
        let pairs = make_windows(&[1.0, 2.0, 3.0, 4.0, 5.0], 2).unwrap();
        assert_eq!(
            pairs,
            vec![
                (vec![1.0, 2.0], 3.0),
                (vec![2.0, 3.0], 4.0),
                (vec![3.0, 4.0], 5.0),
            ]
        );
    }

    #[test]
    fn windows_count_and_too_short() {
        let series: Vec<f64> = (0..10_000).map(|i| i as f64).collect();
        assert_eq!(make_windows(&series, 10).unwrap().len(), 9990);
        assert!(make_windows(&[1.0, 2.0], 2).is_err());
    }

    #[test]
    fn split_fractions() {
        let s = split(10_000).unwrap();
        assert_eq!(s.train, 0..7000);
        assert_eq!(s.val, 7000..9000);
        assert_eq!(s.test, 9000..10_000);
        let s = split(10).unwrap();
        assert_eq!((s.train.len(), s.val.len(), s.test.len()), (7, 2, 1));
        assert!(split(5).is_err());
    }

    #[test]
    fn pts_slots() {
        let slots = extract_pts(&[1.0, 2.0, 3.0, 4.0], 2).unwrap();
        assert_eq!(slots, vec![vec![1.0, 3.0], vec![2.0, 4.0]]);
        assert!(extract_pts(&[1.0, 2.0], 0).is_err());
    }

    #[test]
    fn pts_reconstructs_series_in_step_order() {
        let series: Vec<f64> = (0..101).map(|i| i as f64 * 0.5).collect();
        let spd = 7;
        let slots = extract_pts(&series, spd).unwrap();
        let max_len = slots.iter().map(|s| s.len()).max().unwrap();
        let min_len = slots.iter().map(|s| s.len()).min().unwrap();
        assert!(max_len - min_len <= 1);
        let mut rebuilt = Vec::new();
        for day in 0..max_len {
            for slot in &slots {
                if day < slot.len() {
                    rebuilt.push(slot[day]);
                }
            }
        }
        assert_eq!(rebuilt, series);
    }
}
