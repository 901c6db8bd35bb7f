//! Sampled signals, functional datasets, slicing into segments and dyadic
//! resampling.

use std::path::Path;

use crate::csvio;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A long, equally spaced recording of one quantity.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledSignal {
    values: Vec<f64>,
    sampling_step: f64,
}

impl SampledSignal {
    pub fn new(values: Vec<f64>, sampling_step: f64) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::invalid("signal is empty"));
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::invalid(format!("signal value {i} is not finite")));
        }
        if !(sampling_step > 0.0 && sampling_step.is_finite()) {
            return Err(Error::invalid("sampling step must be positive"));
        }
        Ok(SampledSignal {
            values,
            sampling_step,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn sampling_step(&self) -> f64 {
        self.sampling_step
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Ordered collection of equally sampled curves.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionalDataset {
    curves: Vec<Vec<f64>>,
    segment_length: usize,
    origins: Option<Vec<usize>>,
}

impl FunctionalDataset {
    pub fn new(curves: Vec<Vec<f64>>) -> Result<Self> {
        let len = curves
            .first()
            .map(Vec::len)
            .ok_or_else(|| Error::invalid("dataset has no curves"))?;
        if len < 2 {
            return Err(Error::invalid("curves need at least 2 samples"));
        }
        for (i, c) in curves.iter().enumerate() {
            if c.len() != len {
                return Err(Error::invalid(format!(
                    "curve {i} has {} samples, expected {len}",
                    c.len()
                )));
            }
            if c.iter().any(|v| !v.is_finite()) {
                return Err(Error::invalid(format!("curve {i} has non-finite values")));
            }
        }
        Ok(FunctionalDataset {
            curves,
            segment_length: len,
            origins: None,
        })
    }

    pub fn with_origins(mut self, origins: Vec<usize>) -> Result<Self> {
        if origins.len() != self.curves.len() {
            return Err(Error::invalid("one origin index per curve is required"));
        }
        self.origins = Some(origins);
        Ok(self)
    }

    pub fn n_curves(&self) -> usize {
        self.curves.len()
    }

    /// Samples per curve.
    pub fn curve_len(&self) -> usize {
        self.curves[0].len()
    }

    /// Segment length δ, in samples of the source signal.
    pub fn segment_length(&self) -> usize {
        self.segment_length
    }

    pub fn curves(&self) -> &[Vec<f64>] {
        &self.curves
    }

    pub fn curve(&self, i: usize) -> &[f64] {
        &self.curves[i]
    }

    pub fn origins(&self) -> Option<&[usize]> {
        self.origins.as_deref()
    }

    /// Curves as rows of a matrix, for clustering the raw vectors.
    pub fn to_matrix(&self) -> Matrix {
        Matrix::from_rows(&self.curves).expect("curves share one length")
    }

    /// Concatenate two datasets with the same curve length.
    pub fn concat(&self, other: &FunctionalDataset) -> Result<Self> {
        if self.curve_len() != other.curve_len() {
            return Err(Error::invalid("datasets have different curve lengths"));
        }
        let mut curves = self.curves.clone();
        curves.extend(other.curves.iter().cloned());
        FunctionalDataset::new(curves)
    }

    /// Resample every curve onto `2^j` points; see [`resample_dyadic`].
    pub fn resample_dyadic(&self, j: u32) -> Result<FunctionalDataset> {
        let curves = self
            .curves
            .iter()
            .map(|c| resample_dyadic(c, j).map(|r| r.values))
            .collect::<Result<Vec<_>>>()?;
        Ok(FunctionalDataset {
            curves,
            segment_length: self.segment_length,
            origins: self.origins.clone(),
        })
    }

    /// Read one curve per row; a header row of sample indices is optional.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let table = csvio::read_numeric_file(path)?;
        if table.rows.is_empty() {
            return Err(Error::parse(path, "no curves"));
        }
        FunctionalDataset::new(table.rows).map_err(|e| Error::parse(path, e.to_string()))
    }

    /// One curve per row, no header.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csvio::create(path)?;
        for c in &self.curves {
            csvio::write_line(&mut w, &csvio::fmt_row(c), path)?;
        }
        csvio::finish(w, path)
    }
}

/// Output of [`slice_series`].
#[derive(Debug, Clone, PartialEq)]
pub struct Sliced {
    pub dataset: FunctionalDataset,
    /// Trailing samples that did not fill a whole segment.
    pub remainder: usize,
}

/// Cut a signal into `⌊len/δ⌋` consecutive, non-overlapping segments.
///
/// The trailing partial segment is dropped and its length reported.
pub fn slice_series(signal: &SampledSignal, delta: usize) -> Result<Sliced> {
    if delta < 2 {
        return Err(Error::invalid("segment length must be at least 2"));
    }
    if delta > signal.len() {
        return Err(Error::invalid(format!(
            "segment length {delta} exceeds signal length {}",
            signal.len()
        )));
    }
    let n = signal.len() / delta;
    let curves: Vec<Vec<f64>> = signal
        .values()
        .chunks_exact(delta)
        .map(<[f64]>::to_vec)
        .collect();
    let origins = (0..n).map(|i| i * delta).collect();
    let dataset = FunctionalDataset::new(curves)?.with_origins(origins)?;
    Ok(Sliced {
        dataset,
        remainder: signal.len() - n * delta,
    })
}

/// Read a long signal stored as one column (an optional header line is
/// skipped).
pub fn read_signal_csv(path: &Path, sampling_step: f64) -> Result<SampledSignal> {
    let table = csvio::read_numeric_file(path)?;
    let mut values = Vec::with_capacity(table.rows.len());
    for (i, row) in table.rows.iter().enumerate() {
        match row.as_slice() {
            [v] => values.push(*v),
            _ => {
                return Err(Error::parse(
                    path,
                    format!("record {} has {} fields, expected 1", i + 1, row.len()),
                ))
            }
        }
    }
    SampledSignal::new(values, sampling_step).map_err(|e| Error::parse(path, e.to_string()))
}

/// Output of [`resample_dyadic`].
#[derive(Debug, Clone, PartialEq)]
pub struct Resampled {
    pub values: Vec<f64>,
    /// Set when the target grid is coarser than the input.
    pub downsampled: bool,
}

/// Natural cubic spline through the samples at abscissae `i/(N-1)`, evaluated
/// at `2^j` equispaced points of `[0, 1]`.
pub fn resample_dyadic(curve: &[f64], j: u32) -> Result<Resampled> {
    let n = curve.len();
    if n < 4 {
        return Err(Error::invalid(format!(
            "spline resampling needs at least 4 samples, got {n}"
        )));
    }
    if j == 0 || j > 30 {
        return Err(Error::invalid(format!("dyadic depth {j} out of range")));
    }
    let target = 1usize << j;
    if target == n {
        return Ok(Resampled {
            values: curve.to_vec(),
            downsampled: false,
        });
    }
    let spline = NaturalCubicSpline::uniform(curve);
    let values = (0..target)
        .map(|k| spline.eval(k as f64 / (target - 1) as f64))
        .collect();
    Ok(Resampled {
        values,
        downsampled: target < n,
    })
}

/// Natural cubic spline on the uniform grid `i/(N-1)`.
struct NaturalCubicSpline<'a> {
    y: &'a [f64],
    h: f64,
    // second derivatives at the knots
    m: Vec<f64>,
}

impl<'a> NaturalCubicSpline<'a> {
    fn uniform(y: &'a [f64]) -> Self {
        let n = y.len();
        let h = 1.0 / (n - 1) as f64;
        let mut m = vec![0.0; n];
        // Interior system: m[i-1] + 4 m[i] + m[i+1] = 6/h^2 (y[i+1] - 2y[i] + y[i-1]),
        // with m[0] = m[n-1] = 0; solved with the Thomas algorithm.
        let k = n - 2;
        let mut c = vec![0.0; k];
        let mut d = vec![0.0; k];
        for i in 0..k {
            let rhs = 6.0 / (h * h) * (y[i + 2] - 2.0 * y[i + 1] + y[i]);
            if i == 0 {
                c[i] = 1.0 / 4.0;
                d[i] = rhs / 4.0;
            } else {
                let denom = 4.0 - c[i - 1];
                c[i] = 1.0 / denom;
                d[i] = (rhs - d[i - 1]) / denom;
            }
        }
        for i in (0..k).rev() {
            let next = if i + 1 < k { m[i + 2] } else { 0.0 };
            m[i + 1] = d[i] - c[i] * next;
        }
        NaturalCubicSpline { y, h, m }
    }

    fn eval(&self, t: f64) -> f64 {
        let n = self.y.len();
        let pos = (t / self.h).clamp(0.0, (n - 1) as f64);
        let i = (pos.floor() as usize).min(n - 2);
        let x0 = i as f64 * self.h;
        let a = (x0 + self.h - t) / self.h;
        let b = (t - x0) / self.h;
        if b == 0.0 {
            return self.y[i];
        }
        if a == 0.0 {
            return self.y[i + 1];
        }
        let h2 = self.h * self.h / 6.0;
        a * self.y[i]
            + b * self.y[i + 1]
            + ((a * a * a - a) * self.m[i] + (b * b * b - b) * self.m[i + 1]) * h2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ramp(n: usize) -> Vec<f64> {
        (0..n).map(|i| i as f64).collect()
    }

    #[test]
    fn slices_exact_partition() {
        let s = SampledSignal::new(ramp(8), 1.0).unwrap();
        let out = slice_series(&s, 4).unwrap();
        assert_eq!(
            out.dataset.curves(),
            &[vec![0., 1., 2., 3.], vec![4., 5., 6., 7.]]
        );
        assert_eq!(out.remainder, 0);
        assert_eq!(out.dataset.origins().unwrap(), &[0, 4]);
    }

    #[test]
    fn slice_reports_remainder() {
        let s = SampledSignal::new(ramp(9), 1.0).unwrap();
        let out = slice_series(&s, 4).unwrap();
        assert_eq!(out.dataset.n_curves(), 2);
        assert_eq!(out.remainder, 1);
    }

    #[test]
    fn half_hourly_year_gives_365_days() {
        let s = SampledSignal::new(ramp(17520), 0.5).unwrap();
        let out = slice_series(&s, 48).unwrap();
        assert_eq!(out.dataset.n_curves(), 365);
        assert_eq!(out.dataset.curve_len(), 48);
        assert_eq!(out.remainder, 0);
    }

    #[test]
    fn slice_rejects_bad_delta() {
        let s = SampledSignal::new(ramp(8), 1.0).unwrap();
        assert!(matches!(
            slice_series(&s, 1),
            Err(Error::InvalidArgument(_))
        ));
        assert!(matches!(
            slice_series(&s, 9),
            Err(Error::InvalidArgument(_))
        ));
    }

    #[test]
    fn signal_rejects_non_finite() {
        assert!(SampledSignal::new(vec![1.0, f64::NAN], 1.0).is_err());
        assert!(SampledSignal::new(vec![], 1.0).is_err());
    }

    #[test]
    fn resample_48_to_64() {
        let c: Vec<f64> = (0..48).map(|i| (i as f64 / 5.0).sin()).collect();
        let r = resample_dyadic(&c, 6).unwrap();
        assert_eq!(r.values.len(), 64);
        assert!(!r.downsampled);
        assert_eq!(r.values[0], c[0]);
        assert_eq!(r.values[63], c[47]);
    }

    #[test]
    fn resample_identity_on_shared_grid() {
        let c: Vec<f64> = (0..64).map(|i| (i as f64).cos()).collect();
        assert_eq!(resample_dyadic(&c, 6).unwrap().values, c);
    }

    #[test]
    fn resample_reproduces_linear_ramp() {
        let c: Vec<f64> = (0..37).map(|i| 2.0 - 3.0 * i as f64 / 36.0).collect();
        for j in 2..9 {
            let r = resample_dyadic(&c, j).unwrap();
            let m = r.values.len();
            for (k, v) in r.values.iter().enumerate() {
                let t = k as f64 / (m - 1) as f64;
                assert!((v - (2.0 - 3.0 * t)).abs() < 1e-9);
            }
            assert_eq!(r.downsampled, m < 37);
        }
    }

    #[test]
    fn spline_interpolates_knots() {
        // N = 6 knots on i/5 and 2^4 = 16 points on k/15 share every third abscissa.
        let c: Vec<f64> = (0..6).map(|i| ((i * i) as f64 * 0.37).sin()).collect();
        let r = resample_dyadic(&c, 4).unwrap();
        for (i, y) in c.iter().enumerate() {
            assert!((r.values[3 * i] - y).abs() < 1e-9);
        }
        let spline = NaturalCubicSpline::uniform(&c);
        for (i, y) in c.iter().enumerate() {
            assert!((spline.eval(i as f64 / 5.0) - y).abs() < 1e-9);
        }
    }

    #[test]
    fn spline_matches_natural_boundary_and_continuity() {
        let c = [0.0, 1.0, 0.0, 2.0, -1.0, 0.5];
        let s = NaturalCubicSpline::uniform(&c);
        assert_eq!(s.m[0], 0.0);
        assert_eq!(s.m[5], 0.0);
        // first derivative continuity at interior knots (finite differences)
        let e = 1e-6;
        for i in 1..5 {
            let x = i as f64 * s.h;
            let left = (s.eval(x) - s.eval(x - e)) / e;
            let right = (s.eval(x + e) - s.eval(x)) / e;
            assert!((left - right).abs() < 1e-3, "kink at knot {i}");
        }
    }

    #[test]
    fn resample_rejects_short_curve() {
        assert!(resample_dyadic(&[1.0, 2.0, 3.0], 3).is_err());
    }
}
