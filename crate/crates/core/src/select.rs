//! Screening and subset selection of scale features.
//!
//! Each column is range-transformed to `[0, 1]` and scored by how much of its
//! variance the best two-group split explains. Columns scoring below a
//! quantile of the same score on uniform noise are screened out. Every
//! subset of the surviving columns is then clustered with k-means and the
//! subset minimizing `SSE·(1 + penalty·size)` is selected.

use std::collections::HashMap;
use std::path::Path;
use std::sync::{Mutex, OnceLock};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{kmeans, KMeansConfig};
use crate::dwt::FeatureMatrix;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::{derive_seed, stream};

/// Largest number of screened columns for the exhaustive subset search.
pub const MAX_SUBSET_FEATURES: usize = 16;

/// Minimum column length for [`clusterability_index`].
pub const MIN_OBSERVATIONS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SelectionConfig {
    /// Quantile of the uniform-surrogate index used as screening threshold.
    pub screen_quantile: f64,
    pub penalty: f64,
    /// Number of uniform surrogate columns.
    pub surrogates: usize,
    pub restarts: usize,
}

impl Default for SelectionConfig {
    fn default() -> Self {
        SelectionConfig {
            screen_quantile: 0.5,
            penalty: 0.05,
            surrogates: 200,
            restarts: 10,
        }
    }
}

impl SelectionConfig {
    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.screen_quantile) {
            return Err(Error::invalid(format!(
                "screen quantile must lie in [0, 1], got {}",
                self.screen_quantile
            )));
        }
        if !(self.penalty >= 0.0 && self.penalty.is_finite()) {
            return Err(Error::invalid(format!(
                "penalty must be nonnegative, got {}",
                self.penalty
            )));
        }
        if self.surrogates == 0 || self.restarts == 0 {
            return Err(Error::invalid("surrogates and restarts must be positive"));
        }
        Ok(())
    }
}

/// Maps a column affinely onto `[0, 1]`; constant columns map to zeros.
pub fn range_transform(column: &[f64]) -> Vec<f64> {
    let lo = column.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = column.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if hi > lo {
        column.iter().map(|v| (v - lo) / (hi - lo)).collect()
    } else {
        vec![0.0; column.len()]
    }
}

/// `1 − SSE(best 2-means split) / TSS` of the range-transformed column.
///
/// Returns 0 for a constant column.
pub fn clusterability_index(column: &[f64]) -> Result<f64> {
    let n = column.len();
    if n < MIN_OBSERVATIONS {
        return Err(Error::invalid(format!(
            "need at least {MIN_OBSERVATIONS} values, got {n}"
        )));
    }
    if column.iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("column contains non-finite values"));
    }
    let mut x = range_transform(column);
    x.sort_by(f64::total_cmp);
    let total: f64 = x.iter().sum();
    let total_sq: f64 = x.iter().map(|v| v * v).sum();
    let tss = total_sq - total * total / n as f64;
    if !(tss > 0.0) {
        return Ok(0.0);
    }
    // best 1-D 2-means split is contiguous in sorted order
    let (mut s, mut sq) = (0.0, 0.0);
    let mut best = f64::INFINITY;
    for (i, v) in x[..n - 1].iter().enumerate() {
        s += v;
        sq += v * v;
        let (nl, nr) = ((i + 1) as f64, (n - i - 1) as f64);
        let left = sq - s * s / nl;
        let right = (total_sq - sq) - (total - s) * (total - s) / nr;
        best = best.min(left.max(0.0) + right.max(0.0));
    }
    Ok((1.0 - best / tss).clamp(0.0, 1.0))
}

/// Quantile of [`clusterability_index`] over uniform columns of length `n`.
pub fn uniform_reference_threshold(n: usize, quantile: f64, surrogates: usize) -> Result<f64> {
    type Key = (usize, u64, usize);
    static CACHE: OnceLock<Mutex<HashMap<Key, f64>>> = OnceLock::new();
    let key = (n, quantile.to_bits(), surrogates);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(v) = cache.lock().unwrap().get(&key) {
        return Ok(*v);
    }
    let mut scores: Vec<f64> = (0..surrogates)
        .into_par_iter()
        .map(|s| {
            let mut rng = stream(0x5eed, "uniform-surrogate", s as u64);
            let col: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
            clusterability_index(&col)
        })
        .collect::<Result<_>>()?;
    scores.sort_by(f64::total_cmp);
    let pos = quantile * (surrogates - 1) as f64;
    let (lo, hi) = (pos.floor() as usize, pos.ceil() as usize);
    let v = scores[lo] + (scores[hi] - scores[lo]) * (pos - lo as f64);
    cache.lock().unwrap().insert(key, v);
    Ok(v)
}

/// Best subset of one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubsetScore {
    pub size: usize,
    /// Column indices, ascending.
    pub features: Vec<usize>,
    pub sse: f64,
    pub penalized: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub k: usize,
    /// Clusterability index per column.
    pub index: Vec<f64>,
    pub threshold: f64,
    pub screened: Vec<usize>,
    pub best_per_size: Vec<SubsetScore>,
    pub selected: Vec<usize>,
    /// Scale index `j` of each selected column, when the input carried scales.
    pub selected_scales: Vec<usize>,
    pub penalty: f64,
    /// True when every column was screened out.
    pub no_structure: bool,
    pub seed: u64,
}

impl SelectionReport {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::invalid(e.to_string()))
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        write_json(path, &self.to_json()?)
    }
}

pub(crate) fn write_json(path: &Path, text: &str) -> Result<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    std::fs::write(path, format!("{text}\n")).map_err(|e| Error::io(path, e))
}

/// Screening followed by exhaustive subset search for `k` clusters.
pub fn select_features(
    features: &FeatureMatrix,
    k: usize,
    config: &SelectionConfig,
    seed: u64,
) -> Result<SelectionReport> {
    let mut report = select_columns(features.matrix(), k, config, seed)?;
    report.selected_scales = report
        .selected
        .iter()
        .map(|&c| features.scales()[c])
        .collect();
    Ok(report)
}

/// [`select_features`] on a plain matrix.
pub fn select_columns(
    data: &Matrix,
    k: usize,
    config: &SelectionConfig,
    seed: u64,
) -> Result<SelectionReport> {
    config.validate()?;
    let n = data.rows();
    let p = data.cols();
    if k < 2 {
        return Err(Error::invalid(format!("k must be at least 2, got {k}")));
    }
    if k > n {
        return Err(Error::invalid(format!(
            "k = {k} exceeds the {n} observations"
        )));
    }
    if p == 0 {
        return Err(Error::invalid("no feature columns"));
    }
    let columns: Vec<Vec<f64>> = (0..p).map(|c| data.column(c)).collect();
    let index: Vec<f64> = columns
        .iter()
        .map(|c| clusterability_index(c))
        .collect::<Result<_>>()?;
    let threshold = uniform_reference_threshold(n, config.screen_quantile, config.surrogates)?;
    let screened: Vec<usize> = (0..p)
        .filter(|&c| index[c] > 0.0 && index[c] >= threshold)
        .collect();
    let mut report = SelectionReport {
        k,
        index,
        threshold,
        screened: screened.clone(),
        best_per_size: Vec::new(),
        selected: Vec::new(),
        selected_scales: Vec::new(),
        penalty: config.penalty,
        no_structure: screened.is_empty(),
        seed,
    };
    if screened.is_empty() {
        return Ok(report);
    }
    if screened.len() > MAX_SUBSET_FEATURES {
        return Err(Error::invalid(format!(
            "{} columns survive screening; exhaustive search supports at most {MAX_SUBSET_FEATURES}",
            screened.len()
        )));
    }

    let v = screened.len();
    let scaled: Vec<Vec<f64>> = screened
        .iter()
        .map(|&c| range_transform(&columns[c]))
        .collect();
    let tss: Vec<f64> = scaled
        .iter()
        .map(|c| column_wss(c, &vec![0; n], 1))
        .collect();
    let kcfg = KMeansConfig {
        restarts: config.restarts,
        ..KMeansConfig::default()
    };

    // clustering on each subset's own columns
    let masks: Vec<u32> = (1..(1u32 << v)).collect();
    let own: Vec<Vec<usize>> = masks
        .par_iter()
        .map(|&mask| {
            let cols: Vec<usize> = (0..v).filter(|b| mask >> b & 1 == 1).collect();
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| cols.iter().map(|&b| scaled[b][i]).collect())
                .collect();
            let m = Matrix::from_rows(&rows).unwrap();
            let k = k.min(n);
            kmeans(&m, k, &kcfg, derive_seed(seed, "subset", mask as u64))
                .map(|p| p.labels().to_vec())
        })
        .collect::<Result<_>>()?;

    // SSE over all screened columns: within-cluster for members, total for the rest.
    // Partitions of immediate sub-subsets are also tried, so supersets never score worse.
    let sse_of = |mask: u32, labels: &[usize]| -> f64 {
        (0..v)
            .map(|b| {
                if mask >> b & 1 == 1 {
                    column_wss(&scaled[b], labels, k).min(tss[b])
                } else {
                    tss[b]
                }
            })
            .sum()
    };
    let mut best_labels: Vec<Vec<usize>> = vec![Vec::new(); 1 << v];
    let mut sse = vec![0.0; 1 << v];
    for &mask in &masks {
        let mut best = (
            sse_of(mask, &own[(mask - 1) as usize]),
            (mask - 1) as usize,
            true,
        );
        for b in 0..v {
            let sub = mask & !(1 << b);
            if mask >> b & 1 == 1 && sub != 0 {
                let s = sse_of(mask, &best_labels[sub as usize]);
                if s < best.0 {
                    best = (s, sub as usize, false);
                }
            }
        }
        sse[mask as usize] = best.0;
        best_labels[mask as usize] = if best.2 {
            own[best.1].clone()
        } else {
            best_labels[best.1].clone()
        };
    }

    let subset_of = |mask: u32| -> Vec<usize> {
        (0..v)
            .filter(|b| mask >> b & 1 == 1)
            .map(|b| screened[b])
            .collect()
    };
    let penalized =
        |mask: u32| sse[mask as usize] * (1.0 + config.penalty * mask.count_ones() as f64);
    for size in 1..=v {
        let best = masks
            .iter()
            .copied()
            .filter(|m| m.count_ones() as usize == size)
            .min_by(|&a, &b| {
                sse[a as usize]
                    .total_cmp(&sse[b as usize])
                    .then_with(|| subset_of(a).cmp(&subset_of(b)))
            })
            .unwrap();
        report.best_per_size.push(SubsetScore {
            size,
            features: subset_of(best),
            sse: sse[best as usize],
            penalized: penalized(best),
        });
    }
    let chosen = masks
        .iter()
        .copied()
        .min_by(|&a, &b| {
            penalized(a)
                .total_cmp(&penalized(b))
                .then(a.count_ones().cmp(&b.count_ones()))
                .then_with(|| subset_of(a).cmp(&subset_of(b)))
        })
        .unwrap();
    report.selected = subset_of(chosen);
    report.selected_scales = report.selected.clone();
    Ok(report)
}

/// Within-cluster sum of squares of one column under `labels`.
fn column_wss(column: &[f64], labels: &[usize], k: usize) -> f64 {
    let mut sum = vec![0.0; k];
    let mut count = vec![0usize; k];
    for (v, &l) in column.iter().zip(labels) {
        sum[l] += v;
        count[l] += 1;
    }
    let mean: Vec<f64> = sum
        .iter()
        .zip(&count)
        .map(|(s, &c)| if c > 0 { s / c as f64 } else { 0.0 })
        .collect();
    column
        .iter()
        .zip(labels)
        .map(|(v, &l)| (v - mean[l]).powi(2))
        .sum()
}

/// Selections for every `K` in `2..=k_max` and their most frequent subset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StableSelection {
    pub per_k: Vec<SelectionReport>,
    /// Most frequent selected subset; ties go to the one seen at smaller `K`.
    pub selected: Vec<usize>,
    pub selected_scales: Vec<usize>,
    /// Number of `K` values that chose [`StableSelection::selected`].
    pub support: usize,
}

impl StableSelection {
    pub fn write_json(&self, path: &Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::invalid(e.to_string()))?;
        write_json(path, &text)
    }
}

pub fn select_features_stable(
    features: &FeatureMatrix,
    k_max: usize,
    config: &SelectionConfig,
    seed: u64,
) -> Result<StableSelection> {
    if k_max < 2 {
        return Err(Error::invalid(format!(
            "k_max must be at least 2, got {k_max}"
        )));
    }
    let per_k: Vec<SelectionReport> = (2..=k_max)
        .map(|k| select_features(features, k, config, derive_seed(seed, "select-k", k as u64)))
        .collect::<Result<_>>()?;
    let mut best: Option<(usize, &SelectionReport)> = None;
    for r in &per_k {
        let count = per_k.iter().filter(|o| o.selected == r.selected).count();
        if best.is_none_or(|(c, _)| count > c) {
            best = Some((count, r));
        }
    }
    let (support, mode) = best.unwrap();
    Ok(StableSelection {
        selected: mode.selected.clone(),
        selected_scales: mode.selected_scales.clone(),
        support,
        per_k,
    })
}
