//! Kendall rank correlation over periodic time series, CPK compensation
//! weights, and missing-data imputation (single-site MAA and cluster CCK).

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::cluster::{is_missing, SiteCluster};
use crate::error::{Error, Result};
use crate::linalg::Mat;
use crate::preprocess::extract_pts;

/// Kendall rank correlation coefficient:
/// `r = 2 * sum_{i<j} xi(x_i, x_j, y_i, y_j) / (n (n - 1))`
/// where `xi` is the sign of `(x_i - x_j)(y_i - y_j)` and ties contribute 0.
///
/// Computed in O(n log n) by counting discordant pairs as merge-sort
/// inversions; exact integer arithmetic makes the result identical to the
/// O(n^2) double loop over all pairs.
pub fn krcc(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch {
            what: "krcc sequences",
            expected: x.len(),
            got: y.len(),
        });
    }
    let n = x.len();
    if n < 2 {
        return Err(Error::SeriesTooShort { needed: 2, got: n });
    }
    for (i, v) in x.iter().chain(y.iter()).enumerate() {
        if !v.is_finite() {
            return Err(Error::MissingValue {
                what: "krcc input",
                index: i % n,
            });
        }
    }

    // Order by x, breaking x-ties by y so tied-x pairs never count as
    // inversions.
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| {
        x[a].partial_cmp(&x[b])
            .expect("finite")
            .then(y[a].partial_cmp(&y[b]).expect("finite"))
    });

    let total = (n as i64) * (n as i64 - 1) / 2;
    let tied_x = count_tied_pairs(&idx, |&a, &b| x[a] == x[b]);
    let tied_xy = count_tied_pairs(&idx, |&a, &b| x[a] == x[b] && y[a] == y[b]);

    let mut ys: Vec<f64> = idx.iter().map(|&i| y[i]).collect();
    let discordant = merge_count_inversions(&mut ys);

    let mut y_sorted = y.to_vec();
    y_sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let mut tied_y = 0i64;
    let mut run = 1i64;
    for i in 1..n {
        if y_sorted[i] == y_sorted[i - 1] {
            run += 1;
        } else {
            tied_y += run * (run - 1) / 2;
            run = 1;
        }
    }
    tied_y += run * (run - 1) / 2;

    // concordant - discordant over all pairs; tied pairs contribute zero.
    let signed = total - tied_x - tied_y + tied_xy - 2 * discordant;
    Ok(2.0 * signed as f64 / (n as f64 * (n as f64 - 1.0)))
}

fn count_tied_pairs(sorted_idx: &[usize], eq: impl Fn(&usize, &usize) -> bool) -> i64 {
    let mut pairs = 0i64;
    let mut run = 1i64;
    for w in sorted_idx.windows(2) {
        if eq(&w[0], &w[1]) {
            run += 1;
        } else {
            pairs += run * (run - 1) / 2;
            run = 1;
        }
    }
    pairs + run * (run - 1) / 2
}

/// Counts pairs i < j with a[i] > a[j] (strict), sorting `a` in the process.
fn merge_count_inversions(a: &mut [f64]) -> i64 {
    let n = a.len();
    if n < 2 {
        return 0;
    }
    let mut buf = a.to_vec();
    merge_sort(a, &mut buf)
}

fn merge_sort(a: &mut [f64], buf: &mut [f64]) -> i64 {
    let n = a.len();
    if n < 2 {
        return 0;
    }
    let mid = n / 2;
    let mut inv = {
        let (left, right) = a.split_at_mut(mid);
        merge_sort(left, &mut buf[..mid]) + merge_sort(right, &mut buf[mid..])
    };
    let mut i = 0;
    let mut j = mid;
    for slot in buf[..n].iter_mut() {
        if i < mid && (j >= n || a[i] <= a[j]) {
            *slot = a[i];
            i += 1;
        } else {
            // a[j] < a[i..mid]: each remaining left element forms an inversion.
            inv += (mid - i) as i64;
            *slot = a[j];
            j += 1;
        }
    }
    a.copy_from_slice(&buf[..n]);
    inv
}

/// Mean per-slot KRCC between two sites over their periodic time series
/// (the same moment of each day across days). Errors on missing values and
/// on slots shorter than two days.
pub fn cluster_krcc(cluster: &SiteCluster, a: usize, b: usize) -> Result<f64> {
    cluster_krcc_in(cluster, a, b, 0..cluster.len(), false)
}

/// Same as [`cluster_krcc`] restricted to `range`, optionally skipping
/// timestamps where either series is missing (pairwise-complete mode used
/// when deriving weights from gappy data).
pub fn cluster_krcc_in(
    cluster: &SiteCluster,
    a: usize,
    b: usize,
    range: Range<usize>,
    skip_missing: bool,
) -> Result<f64> {
    let spd = cluster.samples_per_day();
    let xa = &cluster.series(a)[range.clone()];
    let xb = &cluster.series(b)[range];
    let slots_a = extract_pts(xa, spd)?;
    let slots_b = extract_pts(xb, spd)?;
    let mut sum = 0.0;
    for (slot, (sa, sb)) in slots_a.iter().zip(&slots_b).enumerate() {
        let (fa, fb): (Vec<f64>, Vec<f64>) = if skip_missing {
            sa.iter()
                .zip(sb)
                .filter(|(&va, &vb)| !is_missing(va) && !is_missing(vb))
                .map(|(&va, &vb)| (va, vb))
                .unzip()
        } else {
            (sa.clone(), sb.clone())
        };
        if fa.len() < 2 {
            return Err(Error::SeriesTooShort {
                needed: 2,
                got: fa.len(),
            });
        }
        sum += krcc(&fa, &fb).map_err(|e| match e {
            Error::MissingValue { index, .. } => Error::MissingValue {
                what: "cluster series (impute first)",
                index: slot + index * spd,
            },
            other => other,
        })?;
    }
    Ok(sum / slots_a.len() as f64)
}

/// Pairwise KRCC values and the CPK compensation weights derived from them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CpkMatrix {
    /// Symmetric KRCC matrix with unit diagonal.
    pub r: Mat,
    /// CPK weights: `k[alpha][beta] = r[alpha][beta] / sum_{lambda != alpha}
    /// r[alpha][lambda]`, zero diagonal.
    pub k: Mat,
}

impl CpkMatrix {
    /// Computes pairwise mean-of-slots KRCC over `range` (full length if
    /// `None`) and the CPK weights. Requires complete data unless
    /// `skip_missing` is set.
    pub fn compute(
        cluster: &SiteCluster,
        range: Option<Range<usize>>,
        skip_missing: bool,
    ) -> Result<Self> {
        let k = cluster.num_sites();
        let range = range.unwrap_or(0..cluster.len());
        let mut r = Mat::identity(k);
        for a in 0..k {
            for b in (a + 1)..k {
                let v = cluster_krcc_in(cluster, a, b, range.clone(), skip_missing)?;
                r.set(a, b, v);
                r.set(b, a, v);
            }
        }
        let k_mat = cpk_weights(&r)?;
        Ok(CpkMatrix { r, k: k_mat })
    }

    /// CPK row of `site` against the given neighbor indices, in order.
    pub fn k_row(&self, site: usize, neighbors: &[usize]) -> Vec<f64> {
        neighbors.iter().map(|&b| self.k.get(site, b)).collect()
    }
}

/// CPK weights from a square KRCC matrix with unit diagonal:
/// `K[a][b] = r[a][b] / (sum_lambda r[a][lambda] - r[a][a])` off the
/// diagonal, zero on it. A row whose off-diagonal correlations sum to
/// (numerically) zero is degenerate and rejected.
pub fn cpk_weights(r: &Mat) -> Result<Mat> {
    if r.rows() != r.cols() {
        return Err(Error::DimensionMismatch {
            what: "r matrix",
            expected: r.rows(),
            got: r.cols(),
        });
    }
    let n = r.rows();
    let mut k = Mat::zeros(n, n);
    for a in 0..n {
        let denom: f64 = (0..n).map(|l| r.get(a, l)).sum::<f64>() - r.get(a, a);
        if n > 1 {
            if denom.abs() < 1e-9 {
                return Err(Error::DegenerateCpkRow { row: a });
            }
            for b in 0..n {
                if b != a {
                    k.set(a, b, r.get(a, b) / denom);
                }
            }
        }
    }
    Ok(k)
}

/// A maximal run of missing samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Gap {
    pub start: usize,
    pub len: usize,
}

/// Maximal runs of missing markers, sorted by start index.
pub fn find_gaps(series: &[f64]) -> Vec<Gap> {
    let mut gaps = Vec::new();
    let mut current: Option<Gap> = None;
    for (i, &v) in series.iter().enumerate() {
        if is_missing(v) {
            match current.as_mut() {
                Some(g) => g.len += 1,
                None => current = Some(Gap { start: i, len: 1 }),
            }
        } else if let Some(g) = current.take() {
            gaps.push(g);
        }
    }
    if let Some(g) = current {
        gaps.push(g);
    }
    gaps
}

/// Moving-average imputation: each missing value becomes the mean of the `l`
/// immediately preceding values, consuming previously imputed values inside
/// a run. The first gap must start at index `l` or later.
pub fn impute_maa(series: &[f64], l: usize) -> Result<Vec<f64>> {
    if l == 0 {
        return Err(Error::InvalidParameter {
            name: "l",
            reason: "autoregressive order must be at least 1".into(),
        });
    }
    let mut out = series.to_vec();
    for i in 0..out.len() {
        if is_missing(out[i]) {
            if i < l {
                return Err(Error::GapTooEarly { index: i, order: l });
            }
            let window = &out[i - l..i];
            // Everything before i is already filled, so the window is complete.
            debug_assert!(window.iter().all(|v| !is_missing(*v)));
            out[i] = window.iter().sum::<f64>() / l as f64;
        }
    }
    Ok(out)
}

/// Cluster imputation: the missing value of `site` at position `j` becomes
/// the CPK-weighted sum of all other sites' values at `j`
/// (`X[i][j] = sum_{beta != i} K[i][beta] * X[beta][j]`; the self term is
/// excluded since `K[i][i] = 0`). Every neighbor must be present at `j`.
pub fn impute_cck(
    cluster: &SiteCluster,
    site: usize,
    gaps: &[Gap],
    cpk: &CpkMatrix,
) -> Result<Vec<f64>> {
    if cpk.k.rows() != cluster.num_sites() {
        return Err(Error::DimensionMismatch {
            what: "cpk matrix",
            expected: cluster.num_sites(),
            got: cpk.k.rows(),
        });
    }
    let mut out = cluster.series(site).to_vec();
    for gap in gaps {
        for j in gap.start..gap.start + gap.len {
            let mut value = 0.0;
            for beta in 0..cluster.num_sites() {
                if beta == site {
                    continue;
                }
                let neighbor = cluster.series(beta)[j];
                if is_missing(neighbor) {
                    return Err(Error::NeighborMissing {
                        site: cluster.site_ids()[beta].clone(),
                        index: j,
                    });
                }
                value += cpk.k.get(site, beta) * neighbor;
            }
            out[j] = value;
        }
    }
    Ok(out)
}
