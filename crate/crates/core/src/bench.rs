//! The three-class comparison: k-means on selected wavelet features versus
//! k-means on the raw curves, over seeded benchmark replicates.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cluster::{kmeans, KMeansConfig};
use crate::dwt::{extract_features, FeatureKind, WaveletFilter};
use crate::error::Result;
use crate::eval::ValidationReport;
use crate::matrix::Matrix;
use crate::rng::derive_seed;
use crate::select::{range_transform, select_features, SelectionConfig};
use crate::sim::{gen_benchmark_with, BenchmarkConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ComparisonConfig {
    pub data: BenchmarkConfig,
    pub wavelet: String,
    pub features: FeatureKind,
    pub k: usize,
    pub kmeans: KMeansConfig,
    pub selection: SelectionConfig,
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        ComparisonConfig {
            data: BenchmarkConfig::default(),
            wavelet: "symmlet6".into(),
            features: FeatureKind::LogitRc,
            k: 3,
            kmeans: KMeansConfig::default(),
            selection: SelectionConfig::default(),
        }
    }
}

/// Outcome of one replicate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicateOutcome {
    pub seed: u64,
    /// Scale indices kept by feature selection (all scales when none survive screening).
    pub selected_scales: Vec<usize>,
    pub features: ValidationReport,
    pub raw: ValidationReport,
}

/// Range-transformed copy of the chosen columns, the scaling used by selection.
pub fn scaled_columns(m: &Matrix, cols: &[usize]) -> Matrix {
    let scaled: Vec<Vec<f64>> = cols
        .iter()
        .map(|&c| range_transform(&m.column(c)))
        .collect();
    let mut out = Matrix::zeros(m.rows(), cols.len());
    for (j, col) in scaled.iter().enumerate() {
        for (i, v) in col.iter().enumerate() {
            out.set(i, j, *v);
        }
    }
    out
}

pub fn run_replicate(config: &ComparisonConfig, seed: u64) -> Result<ReplicateOutcome> {
    let data = gen_benchmark_with(&config.data, seed)?;
    let filter = WaveletFilter::by_name(&config.wavelet)?;
    let features = extract_features(&data.dataset, &filter, config.features)?;
    let report = select_features(
        &features,
        config.k,
        &config.selection,
        derive_seed(seed, "select", 0),
    )?;
    let cols: Vec<usize> = if report.no_structure {
        (0..features.cols()).collect()
    } else {
        report.selected.clone()
    };
    let x = scaled_columns(features.matrix(), &cols);
    let on_features = kmeans(
        &x,
        config.k,
        &config.kmeans,
        derive_seed(seed, "kmeans-features", 0),
    )?;
    let on_raw = kmeans(
        &data.dataset.to_matrix(),
        config.k,
        &config.kmeans,
        derive_seed(seed, "kmeans-raw", 0),
    )?;
    Ok(ReplicateOutcome {
        seed,
        selected_scales: cols.iter().map(|&c| features.scales()[c]).collect(),
        features: ValidationReport::new(&data.labels, on_features.labels())?,
        raw: ValidationReport::new(&data.labels, on_raw.labels())?,
    })
}

/// Replicates `seed, seed + 1, …`; the result does not depend on thread count.
pub fn run_comparison(
    config: &ComparisonConfig,
    seed: u64,
    replicates: usize,
) -> Result<Vec<ReplicateOutcome>> {
    (0..replicates as u64)
        .into_par_iter()
        .map(|r| run_replicate(config, seed.wrapping_add(r)))
        .collect()
}

/// One-sided paired t-test of `mean(a − b) > 0`; returns the p-value.
///
/// A zero-variance difference gives p = 0 when the mean is positive and 1
/// otherwise.
pub fn paired_t_test_greater(a: &[f64], b: &[f64]) -> Result<f64> {
    use statrs::distribution::{ContinuousCDF, StudentsT};
    if a.len() != b.len() || a.len() < 2 {
        return Err(crate::Error::invalid(
            "paired test needs two equal samples of size ≥ 2",
        ));
    }
    let n = a.len() as f64;
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = d.iter().sum::<f64>() / n;
    let var = d.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0);
    if var == 0.0 {
        return Ok(if mean > 0.0 { 0.0 } else { 1.0 });
    }
    let t = mean / (var / n).sqrt();
    let dist =
        StudentsT::new(0.0, 1.0, n - 1.0).map_err(|e| crate::Error::Numerical(e.to_string()))?;
    Ok(1.0 - dist.cdf(t))
}

/// Aggregate of [`run_comparison`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonSummary {
    pub replicates: usize,
    pub mean_misclassified_features: f64,
    pub mean_misclassified_raw: f64,
    pub sd_misclassified_features: f64,
    pub sd_misclassified_raw: f64,
    pub mean_ari_features: f64,
    pub mean_ari_raw: f64,
    /// p-value of "features misclassify fewer curves than raw".
    pub p_misclassified: f64,
    /// p-value of "features reach a higher ARI than raw".
    pub p_ari: f64,
    /// Replicates whose selection kept at least two of the three coarsest scales.
    pub coarse_selections: usize,
}

fn mean_sd(v: &[f64]) -> (f64, f64) {
    let n = v.len() as f64;
    let m = v.iter().sum::<f64>() / n;
    let sd = if v.len() > 1 {
        (v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (m, sd)
}

pub fn summarize(outcomes: &[ReplicateOutcome]) -> Result<ComparisonSummary> {
    let mf: Vec<f64> = outcomes
        .iter()
        .map(|o| o.features.misclassified as f64)
        .collect();
    let mr: Vec<f64> = outcomes
        .iter()
        .map(|o| o.raw.misclassified as f64)
        .collect();
    let af: Vec<f64> = outcomes.iter().map(|o| o.features.adjusted_rand).collect();
    let ar: Vec<f64> = outcomes.iter().map(|o| o.raw.adjusted_rand).collect();
    let (mean_f, sd_f) = mean_sd(&mf);
    let (mean_r, sd_r) = mean_sd(&mr);
    Ok(ComparisonSummary {
        replicates: outcomes.len(),
        mean_misclassified_features: mean_f,
        mean_misclassified_raw: mean_r,
        sd_misclassified_features: sd_f,
        sd_misclassified_raw: sd_r,
        mean_ari_features: mean_sd(&af).0,
        mean_ari_raw: mean_sd(&ar).0,
        p_misclassified: paired_t_test_greater(&mr, &mf)?,
        p_ari: paired_t_test_greater(&af, &ar)?,
        coarse_selections: outcomes
            .iter()
            .filter(|o| o.selected_scales.iter().filter(|&&s| s < 3).count() >= 2)
            .count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_test_matches_hand_computation() {
        // differences 1, 2, 3: mean 2, sd 1, t = 2·√3, 2 degrees of freedom
        let p = paired_t_test_greater(&[2.0, 4.0, 6.0], &[1.0, 2.0, 3.0]).unwrap();
        let t: f64 = 2.0 * 3f64.sqrt();
        // closed form for 2 degrees of freedom: P(T > t) = ½(1 − t/√(t² + 2))
        let expected = 0.5 * (1.0 - t / (t * t + 2.0).sqrt());
        assert!((p - expected).abs() < 1e-12, "{p} vs {expected}");
        assert_eq!(
            paired_t_test_greater(&[1.0, 1.0], &[0.0, 0.0]).unwrap(),
            0.0
        );
    }

    #[test]
    fn replicate_is_deterministic() {
        let cfg = ComparisonConfig {
            data: BenchmarkConfig {
                per_class: 10,
                length: 128,
                ..Default::default()
            },
            ..Default::default()
        };
        let a = run_replicate(&cfg, 3).unwrap();
        let b = run_replicate(&cfg, 3).unwrap();
        assert_eq!(a, b);
        assert!(a.features.misclassified <= 20 && a.raw.misclassified <= 20);
    }
}
