use std::f64::consts::{FRAC_1_SQRT_2, SQRT_2};

use crate::error::{Error, Result};

const ORTHO_TOL: f64 = 1e-10;

// Least-asymmetric Daubechies filter with 6 vanishing moments, computed by
// spectral factorization in 60-digit arithmetic.
#[allow(clippy::excessive_precision)]
const SYMMLET6: [f64; 12] = [
    -0.0078007083250323804142,
    0.001767711864254007741,
    0.044724901770781384663,
    -0.021060292512370847992,
    -0.072637522786376583464,
    0.33792942172816583271,
    0.78764114102865099607,
    0.49105594192797373304,
    -0.048311742585698054971,
    -0.1179901111485200254,
    0.0034907120842221625153,
    0.015404109327044824299,
];

/// Orthonormal compactly supported wavelet, described by its lowpass filter.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletFilter {
    name: String,
    lowpass: Vec<f64>,
}

impl WaveletFilter {
    /// Validates `Σh = √2`, `Σh² = 1` and even-shift orthogonality.
    pub fn new(name: impl Into<String>, lowpass: Vec<f64>) -> Result<Self> {
        let name = name.into();
        if lowpass.len() < 2 || !lowpass.len().is_multiple_of(2) {
            return Err(Error::invalid(format!(
                "filter `{name}` must have an even number of taps"
            )));
        }
        let sum: f64 = lowpass.iter().sum();
        if (sum - SQRT_2).abs() > ORTHO_TOL {
            return Err(Error::invalid(format!(
                "filter `{name}` does not sum to sqrt(2)"
            )));
        }
        for m in 0..lowpass.len() / 2 {
            let dot: f64 = lowpass
                .iter()
                .zip(&lowpass[2 * m..])
                .map(|(a, b)| a * b)
                .sum();
            let expected = if m == 0 { 1.0 } else { 0.0 };
            if (dot - expected).abs() > ORTHO_TOL {
                return Err(Error::invalid(format!(
                    "filter `{name}` fails orthonormality at shift {}",
                    2 * m
                )));
            }
        }
        Ok(WaveletFilter { name, lowpass })
    }

    pub fn haar() -> Self {
        WaveletFilter {
            name: "haar".into(),
            lowpass: vec![FRAC_1_SQRT_2, FRAC_1_SQRT_2],
        }
    }

    pub fn symmlet6() -> Self {
        WaveletFilter {
            name: "symmlet6".into(),
            lowpass: SYMMLET6.to_vec(),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name.to_ascii_lowercase().as_str() {
            "haar" => Ok(Self::haar()),
            "symmlet6" | "sym6" | "s6" => Ok(Self::symmlet6()),
            other => Err(Error::invalid(format!(
                "unknown wavelet `{other}` (expected haar or symmlet6)"
            ))),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn lowpass(&self) -> &[f64] {
        &self.lowpass
    }

    /// Quadrature mirror: `g[n] = (-1)^n h[L-1-n]`.
    pub fn highpass(&self) -> Vec<f64> {
        let l = self.lowpass.len();
        (0..l)
            .map(|n| {
                let s = if n % 2 == 0 { 1.0 } else { -1.0 };
                s * self.lowpass[l - 1 - n]
            })
            .collect()
    }
}

impl Default for WaveletFilter {
    fn default() -> Self {
        Self::symmlet6()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builtin_filters_are_orthonormal() {
        for f in [WaveletFilter::haar(), WaveletFilter::symmlet6()] {
            WaveletFilter::new(f.name(), f.lowpass().to_vec()).unwrap();
        }
    }

    #[test]
    fn highpass_is_orthogonal_to_lowpass_shifts() {
        let f = WaveletFilter::symmlet6();
        let h = f.lowpass();
        let g = f.highpass();
        let l = h.len() as isize;
        for m in -(l / 2)..=(l / 2) {
            let s: f64 = (0..l)
                .filter_map(|n| {
                    let k = n + 2 * m;
                    (0..l).contains(&k).then(|| h[n as usize] * g[k as usize])
                })
                .sum();
            assert!(s.abs() < 1e-12, "shift {m}: {s}");
        }
    }

    #[test]
    fn rejects_non_orthonormal() {
        assert!(WaveletFilter::new("bad", vec![0.5, 0.5]).is_err());
        assert!(WaveletFilter::new("odd", vec![1.0, 0.2, 0.2]).is_err());
        assert!(WaveletFilter::by_name("db99").is_err());
    }
}
