use std::fmt;
use std::path::Path;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{dwt_forward, WaveletDecomposition, WaveletFilter};
use crate::csvio;
use crate::data::FunctionalDataset;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Clamp applied to relative contributions before the logit.
pub const LOGIT_EPS: f64 = 1e-6;

/// Which scale-energy representation a feature matrix holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureKind {
    /// Absolute contribution `‖d_j‖²`.
    #[serde(rename = "ac")]
    Ac,
    /// Relative contribution, a probability vector over scales.
    #[serde(rename = "rc")]
    Rc,
    /// Componentwise logit of the relative contribution.
    #[serde(rename = "logit-rc")]
    LogitRc,
}

impl fmt::Display for FeatureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FeatureKind::Ac => "ac",
            FeatureKind::Rc => "rc",
            FeatureKind::LogitRc => "logit-rc",
        })
    }
}

impl FromStr for FeatureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ac" => Ok(FeatureKind::Ac),
            "rc" => Ok(FeatureKind::Rc),
            "logit-rc" | "logitrc" | "logit_rc" => Ok(FeatureKind::LogitRc),
            other => Err(Error::invalid(format!("unknown feature kind `{other}`"))),
        }
    }
}

/// `cont_j = ‖d_j‖²` for `j = 0..J`; the coarse coefficient is left out.
pub fn energy_contributions(decomp: &WaveletDecomposition) -> Vec<f64> {
    decomp
        .details()
        .iter()
        .map(|d| d.iter().map(|v| v * v).sum())
        .collect()
}

/// Relative contributions and their logit (clamped to `[ε, 1-ε]`).
pub fn relative_contributions(ac: &[f64]) -> Result<(Vec<f64>, Vec<f64>)> {
    if let Some(v) = ac.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
        return Err(Error::invalid(format!(
            "absolute contributions must be finite and nonnegative, got {v}"
        )));
    }
    let total: f64 = ac.iter().sum();
    if total <= 0.0 {
        return Err(Error::degenerate(
            "zero detail energy (constant curve): relative contributions undefined",
        ));
    }
    let rc: Vec<f64> = ac.iter().map(|c| c / total).collect();
    let logit = rc
        .iter()
        .map(|p| {
            let p = p.clamp(LOGIT_EPS, 1.0 - LOGIT_EPS);
            (p / (1.0 - p)).ln()
        })
        .collect();
    Ok((rc, logit))
}

/// `n × J` matrix of scale features with their scale labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    kind: FeatureKind,
    values: Matrix,
    /// Scale index `j` of each column (`0` = coarsest detail).
    scales: Vec<usize>,
    /// Depth `J` of the transform the features came from.
    depth: u32,
}

impl FeatureMatrix {
    pub fn new(kind: FeatureKind, values: Matrix, scales: Vec<usize>, depth: u32) -> Result<Self> {
        if scales.len() != values.cols() {
            return Err(Error::invalid("one scale label per column is required"));
        }
        if values.as_slice().iter().any(|v| !v.is_finite()) {
            return Err(Error::invalid("feature values must be finite"));
        }
        if kind == FeatureKind::Ac && values.as_slice().iter().any(|v| *v < 0.0) {
            return Err(Error::invalid("absolute contributions must be nonnegative"));
        }
        Ok(FeatureMatrix {
            kind,
            values,
            scales,
            depth,
        })
    }

    pub fn kind(&self) -> FeatureKind {
        self.kind
    }

    pub fn matrix(&self) -> &Matrix {
        &self.values
    }

    pub fn rows(&self) -> usize {
        self.values.rows()
    }

    pub fn cols(&self) -> usize {
        self.values.cols()
    }

    pub fn scales(&self) -> &[usize] {
        &self.scales
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    /// Level number in the fine-to-coarse convention (`J - j`), where the
    /// coarsest detail is level `J`.
    pub fn level_of(&self, col: usize) -> u32 {
        self.depth - self.scales[col] as u32
    }

    pub fn column_label(&self, col: usize) -> String {
        format!(
            "{}_j{}_level{}",
            self.kind,
            self.scales[col],
            self.level_of(col)
        )
    }

    pub fn select_columns(&self, cols: &[usize]) -> FeatureMatrix {
        FeatureMatrix {
            kind: self.kind,
            values: self.values.select_columns(cols),
            scales: cols.iter().map(|&c| self.scales[c]).collect(),
            depth: self.depth,
        }
    }

    /// Header: `<kind>_j<j>_level<J-j>` per column. Rows: one curve each.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csvio::create(path)?;
        let header: Vec<String> = (0..self.cols()).map(|c| self.column_label(c)).collect();
        csvio::write_line(&mut w, &header, path)?;
        for r in self.values.iter_rows() {
            csvio::write_line(&mut w, &csvio::fmt_row(r), path)?;
        }
        csvio::finish(w, path)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let table = csvio::read_numeric_file(path)?;
        let header = table
            .header
            .ok_or_else(|| Error::parse(path, "feature CSV needs a header row"))?;
        let mut kind = None;
        let mut scales = Vec::with_capacity(header.len());
        let mut depth = None;
        for h in &header {
            let (k, j, level) = parse_label(h)
                .ok_or_else(|| Error::parse(path, format!("bad column label `{h}`")))?;
            if kind.is_some_and(|prev| prev != k) {
                return Err(Error::parse(path, "columns mix feature kinds"));
            }
            kind = Some(k);
            let d = j as u32 + level;
            if depth.is_some_and(|prev| prev != d) {
                return Err(Error::parse(path, "inconsistent scale labels"));
            }
            depth = Some(d);
            scales.push(j);
        }
        let values = Matrix::from_rows(&table.rows)
            .ok_or_else(|| Error::parse(path, "ragged feature rows"))?;
        if values.rows() == 0 || values.cols() != scales.len() {
            return Err(Error::parse(path, "row width does not match header"));
        }
        FeatureMatrix::new(
            kind.ok_or_else(|| Error::parse(path, "empty header"))?,
            values,
            scales,
            depth.unwrap_or(0),
        )
        .map_err(|e| Error::parse(path, e.to_string()))
    }
}

fn parse_label(label: &str) -> Option<(FeatureKind, usize, u32)> {
    let (rest, level) = label.rsplit_once("_level")?;
    let (kind, j) = rest.rsplit_once("_j")?;
    Some((kind.parse().ok()?, j.parse().ok()?, level.parse().ok()?))
}

/// Transform every curve and collect the requested scale features.
pub fn extract_features(
    dataset: &FunctionalDataset,
    filter: &WaveletFilter,
    kind: FeatureKind,
) -> Result<FeatureMatrix> {
    let rows: Vec<Vec<f64>> = dataset
        .curves()
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let w = dwt_forward(c, filter)?;
            let ac = energy_contributions(&w);
            match kind {
                FeatureKind::Ac => Ok(ac),
                FeatureKind::Rc | FeatureKind::LogitRc => {
                    let (rc, logit) = relative_contributions(&ac).map_err(|e| match e {
                        Error::DegenerateInput(m) => Error::degenerate(format!("curve {i}: {m}")),
                        other => other,
                    })?;
                    Ok(if kind == FeatureKind::Rc { rc } else { logit })
                }
            }
        })
        .collect::<Result<_>>()?;
    let values = Matrix::from_rows(&rows).expect("equal-length curves");
    let depth = values.cols() as u32;
    FeatureMatrix::new(kind, values, (0..depth as usize).collect(), depth)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn haar_alternating_energy() {
        let w = dwt_forward(&[1.0, -1.0, 1.0, -1.0], &WaveletFilter::haar()).unwrap();
        let ac = energy_contributions(&w);
        assert!((ac[0] - 0.0).abs() < 1e-14 && (ac[1] - 4.0).abs() < 1e-14);
    }

    #[test]
    fn relative_contribution_examples() {
        let (rc, lg) = relative_contributions(&[2.0, 2.0]).unwrap();
        assert_eq!(rc, vec![0.5, 0.5]);
        assert_eq!(lg, vec![0.0, 0.0]);

        let (rc, lg) = relative_contributions(&[0.0, 4.0]).unwrap();
        assert_eq!(rc, vec![0.0, 1.0]);
        let e = LOGIT_EPS;
        assert!((lg[0] - (e / (1.0 - e)).ln()).abs() < 1e-8);
        assert!((lg[1] - ((1.0 - e) / e).ln()).abs() < 1e-8);

        let (rc, lg) = relative_contributions(&[1.0, 3.0]).unwrap();
        assert_eq!(rc, vec![0.25, 0.75]);
        assert!((lg[0] + 3f64.ln()).abs() < 1e-14);
        assert!((lg[1] - 3f64.ln()).abs() < 1e-14);
    }

    #[test]
    fn zero_energy_is_degenerate() {
        assert!(matches!(
            relative_contributions(&[0.0, 0.0, 0.0]),
            Err(Error::DegenerateInput(_))
        ));
        assert!(relative_contributions(&[1.0, -1.0]).is_err());
    }

    #[test]
    fn labels_round_trip() {
        assert_eq!(
            parse_label("logit-rc_j3_level7"),
            Some((FeatureKind::LogitRc, 3, 7))
        );
        assert_eq!(parse_label("ac_j0_level10"), Some((FeatureKind::Ac, 0, 10)));
        assert_eq!(parse_label("x"), None);
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let data = FunctionalDataset::new(
            (0..5)
                .map(|i| (0..16).map(|t| ((t * (i + 1)) as f64).sin()).collect())
                .collect(),
        )
        .unwrap();
        let f = extract_features(&data, &WaveletFilter::haar(), FeatureKind::LogitRc).unwrap();
        let path = dir.path().join("f.csv");
        f.write_csv(&path).unwrap();
        assert_eq!(FeatureMatrix::read_csv(&path).unwrap(), f);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("logit-rc_j0_level4,logit-rc_j1_level3"));
    }

    #[test]
    fn constant_curve_reports_index() {
        let data = FunctionalDataset::new(vec![vec![1.0, 2.0, 0.0, 5.0], vec![3.0; 4]]).unwrap();
        let err = extract_features(&data, &WaveletFilter::haar(), FeatureKind::Rc).unwrap_err();
        assert!(err.to_string().contains("curve 1"));
    }
}
