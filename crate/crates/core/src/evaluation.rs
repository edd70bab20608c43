//! Error metrics (MAPE, MAE, RMSE) and promotion percentages, optionally
//! restricted to a masked index range as in the missing-data studies.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Metrics over one evaluation run. MAPE is stored as a fraction and
/// rendered as a percentage in reports; it is `None` when any evaluated real
/// value is (numerically) zero, in which case MAE/RMSE are still produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsReport {
    pub mape: Option<f64>,
    pub mae: f64,
    pub rmse: f64,
    /// Number of evaluated timestamps.
    pub count: usize,
}

impl MetricsReport {
    pub fn mape_pct(&self) -> Option<f64> {
        self.mape.map(|m| m * 100.0)
    }
}

/// Threshold below which a real value makes MAPE undefined.
const MAPE_ZERO_GUARD: f64 = 1e-6;

/// Computes MAPE/MAE/RMSE between `real` and `pred` over `mask` (all indices
/// when `None`).
pub fn metrics(real: &[f64], pred: &[f64], mask: Option<&[usize]>) -> Result<MetricsReport> {
    if real.len() != pred.len() {
        return Err(Error::DimensionMismatch {
            what: "metrics sequences",
            expected: real.len(),
            got: pred.len(),
        });
    }
    let indices: Vec<usize> = match mask {
        Some(m) => {
            for &i in m {
                if i >= real.len() {
                    return Err(Error::InvalidParameter {
                        name: "mask",
                        reason: format!("index {i} out of range for length {}", real.len()),
                    });
                }
            }
            m.to_vec()
        }
        None => (0..real.len()).collect(),
    };
    if indices.is_empty() {
        return Err(Error::EmptyInput("metrics selection"));
    }

    let mut abs_sum = 0.0;
    let mut sq_sum = 0.0;
    let mut ape_sum = 0.0;
    let mut mape_defined = true;
    for &i in &indices {
        let (r, p) = (real[i], pred[i]);
        if !r.is_finite() || !p.is_finite() {
            return Err(Error::NonFinite("metrics input"));
        }
        let err = r - p;
        abs_sum += err.abs();
        sq_sum += err * err;
        if r.abs() < MAPE_ZERO_GUARD {
            mape_defined = false;
        } else {
            ape_sum += (err / r).abs();
        }
    }
    let count = indices.len();
    let t = count as f64;
    Ok(MetricsReport {
        mape: mape_defined.then_some(ape_sum / t),
        mae: abs_sum / t,
        rmse: (sq_sum / t).sqrt(),
        count,
    })
}

/// Promotion percentage `P_M = (m2 - m1) / m2 * 100`. Positive means model 1
/// improves on model 2; negative means model 1's index is larger.
pub fn promotion(m1: f64, m2: f64) -> Result<f64> {
    if m2 == 0.0 {
        return Err(Error::ZeroReferenceMetric);
    }
    Ok((m2 - m1) / m2 * 100.0)
}
