//! Pairwise dissimilarities between curves.
//!
//! Spectrum measures compare Morlet CWTs: [`wer_distance`] from smoothed
//! wavelet coherence and [`mca_distance`] from the singular value
//! decomposition of the cross-covariance of two spectra. Euclidean
//! distances on DWT features or raw curves are provided as baselines.

mod coherence;
mod mca;
mod wer;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use coherence::{scale_coherence, wavelet_coherence, CoherenceField, SmoothedSpectrum};
pub use mca::{mca, mca_distance, McaResult, DEFAULT_THETA};
pub use wer::wer_distance;

use crate::csvio;
use crate::cwt::{
    make_scale_grid, read_complex_binary, write_complex_binary, CwtConfig, CwtPlan, ScaleGrid,
    Smoother, SmoothingConfig,
};
use crate::data::FunctionalDataset;
use crate::dwt::{extract_features, FeatureKind, WaveletFilter};
use crate::error::{Error, Result};
use crate::matrix::sq_dist;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Measure {
    Wer,
    Mca,
    EuclidFeatures,
    EuclidRaw,
}

impl Measure {
    pub fn is_spectral(self) -> bool {
        matches!(self, Measure::Wer | Measure::Mca)
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Measure::Wer => "WER",
            Measure::Mca => "MCA",
            Measure::EuclidFeatures => "euclid-features",
            Measure::EuclidRaw => "euclid-raw",
        })
    }
}

impl FromStr for Measure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "wer" => Ok(Measure::Wer),
            "mca" => Ok(Measure::Mca),
            "euclid-features" => Ok(Measure::EuclidFeatures),
            "euclid-raw" => Ok(Measure::EuclidRaw),
            other => Err(Error::invalid(format!("unknown measure '{other}'"))),
        }
    }
}

/// Settings for [`build_dissimilarity_matrix`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DissimilarityConfig {
    pub omin: i32,
    pub omax: i32,
    pub voices: u32,
    pub cwt: CwtConfig,
    pub smoothing: SmoothingConfig,
    pub theta: f64,
    /// Wavelet filter for [`Measure::EuclidFeatures`].
    pub wavelet: String,
    pub features: FeatureKind,
}

impl Default for DissimilarityConfig {
    fn default() -> Self {
        DissimilarityConfig {
            omin: 1,
            omax: 6,
            voices: 8,
            cwt: CwtConfig::default(),
            smoothing: SmoothingConfig::default(),
            theta: DEFAULT_THETA,
            wavelet: "symmlet6".into(),
            features: FeatureKind::LogitRc,
        }
    }
}

impl DissimilarityConfig {
    pub fn grid(&self) -> Result<ScaleGrid> {
        make_scale_grid(self.omin, self.omax, self.voices)
    }
}

/// Symmetric matrix of nonnegative dissimilarities with zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DissimilarityMatrix {
    n: usize,
    values: Vec<f64>,
    measure: Option<Measure>,
}

const SYMMETRY_TOL: f64 = 1e-9;

impl DissimilarityMatrix {
    pub fn new(n: usize, values: Vec<f64>, measure: Option<Measure>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::invalid(format!(
                "expected {} entries for a {n}x{n} matrix, got {}",
                n * n,
                values.len()
            )));
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(Error::invalid(format!("nonzero diagonal entry at {i}")));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !v.is_finite() || v < 0.0 {
                    return Err(Error::invalid(format!(
                        "entry ({i}, {j}) = {v} is not a nonnegative number"
                    )));
                }
                let w = values[j * n + i];
                if (v - w).abs() > SYMMETRY_TOL * v.abs().max(w.abs()).max(1.0) {
                    return Err(Error::invalid(format!(
                        "matrix is not symmetric at ({i}, {j})"
                    )));
                }
            }
        }
        Ok(DissimilarityMatrix { n, values, measure })
    }

    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut values = vec![0.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let v = f(i, j);
                values[i * n + j] = v;
                values[j * n + i] = v;
            }
        }
        Self::new(n, values, None)
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.n..(i + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn measure(&self) -> Option<Measure> {
        self.measure
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csvio::create(path)?;
        if let Some(m) = self.measure {
            csvio::write_line(&mut w, &[format!("# measure={m}")], path)?;
        }
        for i in 0..self.n {
            csvio::write_line(&mut w, &csvio::fmt_row(self.row(i)), path)?;
        }
        csvio::finish(w, path)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let table = csvio::read_numeric_file(path)?;
        let measure = table
            .comments
            .iter()
            .find_map(|c| c.strip_prefix("measure="))
            .map(|m| m.trim().parse::<Measure>())
            .transpose()?;
        let n = table.rows.len();
        if table.rows.iter().any(|r| r.len() != n) {
            return Err(Error::parse(path, "dissimilarity matrix must be square"));
        }
        let values = table.rows.into_iter().flatten().collect();
        Self::new(n, values, measure).map_err(|e| Error::parse(path, e.to_string()))
    }

    /// Same layout as a spectrum file, with zero imaginary parts.
    pub fn write_binary(&self, path: &Path) -> Result<()> {
        let data: Vec<Complex64> = self
            .values
            .iter()
            .map(|&v| Complex64::new(v, 0.0))
            .collect();
        let mut w = csvio::create(path)?;
        write_complex_binary(&mut w, self.n, self.n, &data).map_err(|e| Error::io(path, e))?;
        csvio::finish(w, path)
    }

    pub fn read_binary(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        let m = read_complex_binary(&mut std::io::BufReader::new(file))
            .map_err(|e| Error::parse(path, e.to_string()))?;
        if m.rows != m.cols {
            return Err(Error::parse(path, "dissimilarity matrix must be square"));
        }
        if m.values.iter().any(|c| c.im != 0.0) {
            return Err(Error::parse(path, "dissimilarity entries must be real"));
        }
        let values = m.values.iter().map(|c| c.re).collect();
        Self::new(m.rows, values, None).map_err(|e| Error::parse(path, e.to_string()))
    }
}

fn pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
        .collect()
}

fn assemble(
    n: usize,
    measure: Measure,
    results: Vec<((usize, usize), Result<f64>)>,
) -> Result<DissimilarityMatrix> {
    let mut values = vec![0.0; n * n];
    for ((i, j), r) in results {
        let v = r.map_err(|e| Error::Pair {
            i,
            j,
            source: Box::new(e),
        })?;
        values[i * n + j] = v;
        values[j * n + i] = v;
    }
    DissimilarityMatrix::new(n, values, Some(measure))
}

/// Computes all pairwise dissimilarities in parallel; the result does not
/// depend on the number of threads.
pub fn build_dissimilarity_matrix(
    dataset: &FunctionalDataset,
    measure: Measure,
    config: &DissimilarityConfig,
) -> Result<DissimilarityMatrix> {
    let n = dataset.n_curves();
    let pairs = pairs(n);
    let results: Vec<((usize, usize), Result<f64>)> = match measure {
        Measure::EuclidRaw => pairs
            .par_iter()
            .map(|&(i, j)| {
                (
                    (i, j),
                    Ok(sq_dist(dataset.curve(i), dataset.curve(j)).sqrt()),
                )
            })
            .collect(),
        Measure::EuclidFeatures => {
            let filter = WaveletFilter::by_name(&config.wavelet)?;
            let f = extract_features(dataset, &filter, config.features)?;
            let m = f.matrix();
            pairs
                .par_iter()
                .map(|&(i, j)| ((i, j), Ok(sq_dist(m.row(i), m.row(j)).sqrt())))
                .collect()
        }
        Measure::Wer | Measure::Mca => {
            let grid = config.grid()?;
            let plan = CwtPlan::new(dataset.curve_len(), &grid, &config.cwt)?;
            let spectra: Vec<_> = (0..n)
                .into_par_iter()
                .map(|i| plan.transform(dataset.curve(i)))
                .collect::<Result<_>>()?;
            if measure == Measure::Mca {
                pairs
                    .par_iter()
                    .map(|&(i, j)| ((i, j), mca_distance(&spectra[i], &spectra[j], config.theta)))
                    .collect()
            } else {
                let smoother = Smoother::new(dataset.curve_len(), &grid, &config.smoothing)?;
                let smoothed: Vec<SmoothedSpectrum> = spectra
                    .into_par_iter()
                    .map(|s| SmoothedSpectrum::new(s, &smoother))
                    .collect::<Result<_>>()?;
                pairs
                    .par_iter()
                    .map(|&(i, j)| {
                        (
                            (i, j),
                            wer::wer_from_parts(&smoothed[i], &smoothed[j], &smoother),
                        )
                    })
                    .collect()
            }
        }
    };
    assemble(n, measure, results)
}
