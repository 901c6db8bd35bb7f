//! Periodized orthogonal discrete wavelet transform (pyramidal algorithm) and
//! scale-energy features.
//!
//! Detail vectors are indexed coarse to fine: `d_0` holds one coefficient and
//! `d_{J-1}` holds `2^{J-1}`. The coarse coefficient `c_0` uses the discrete
//! orthonormal convention, so a constant curve `a` gives `c_0 = a·2^{J/2}`.

mod features;
mod filter;

pub use features::{
    energy_contributions, extract_features, relative_contributions, FeatureKind, FeatureMatrix,
    LOGIT_EPS,
};
pub use filter::WaveletFilter;

use crate::error::{Error, Result};

/// Coefficients `{d_0, …, d_{J-1}, c_0}` of one curve.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveletDecomposition {
    details: Vec<Vec<f64>>,
    approx: f64,
    filter: WaveletFilter,
}

impl WaveletDecomposition {
    /// Checks that `details[j]` has `2^j` entries.
    pub fn from_parts(details: Vec<Vec<f64>>, approx: f64, filter: WaveletFilter) -> Result<Self> {
        if details.is_empty() {
            return Err(Error::invalid(
                "decomposition needs at least one detail level",
            ));
        }
        for (j, d) in details.iter().enumerate() {
            if d.len() != 1 << j {
                return Err(Error::invalid(format!(
                    "detail level {j} has {} coefficients, expected {}",
                    d.len(),
                    1usize << j
                )));
            }
        }
        Ok(WaveletDecomposition {
            details,
            approx,
            filter,
        })
    }

    pub fn details(&self) -> &[Vec<f64>] {
        &self.details
    }

    pub fn detail(&self, j: usize) -> &[f64] {
        &self.details[j]
    }

    pub fn approx(&self) -> f64 {
        self.approx
    }

    pub fn filter(&self) -> &WaveletFilter {
        &self.filter
    }

    /// Depth `J`; the transformed curve had `2^J` samples.
    pub fn depth(&self) -> u32 {
        self.details.len() as u32
    }

    /// Coefficients as one vector ordered `(d_0, d_1, …, d_{J-1}, c_0)`.
    pub fn to_vec(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.details.iter().flatten().copied().collect();
        v.push(self.approx);
        v
    }

    pub fn details_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.details
    }

    pub fn set_approx(&mut self, c0: f64) {
        self.approx = c0;
    }
}

/// Depth `J` with `2^J == n`, if `n` is a power of two of at least 2.
pub fn dyadic_depth(n: usize) -> Option<u32> {
    (n >= 2 && n.is_power_of_two()).then(|| n.trailing_zeros())
}

pub fn dwt_forward(curve: &[f64], filter: &WaveletFilter) -> Result<WaveletDecomposition> {
    let depth = dyadic_depth(curve.len()).ok_or_else(|| {
        Error::invalid(format!(
            "curve length {} is not a power of two (>= 2); resample it with resample_dyadic first",
            curve.len()
        ))
    })?;
    let h = filter.lowpass();
    let g = filter.highpass();
    let mut approx = curve.to_vec();
    let mut details = vec![Vec::new(); depth as usize];
    for level in (0..depth as usize).rev() {
        let (a, d) = analysis_step(&approx, h, &g);
        details[level] = d;
        approx = a;
    }
    Ok(WaveletDecomposition {
        details,
        approx: approx[0],
        filter: filter.clone(),
    })
}

pub fn dwt_inverse(decomp: &WaveletDecomposition) -> Result<Vec<f64>> {
    let h = decomp.filter.lowpass();
    let g = decomp.filter.highpass();
    let mut approx = vec![decomp.approx];
    for (j, d) in decomp.details.iter().enumerate() {
        if d.len() != approx.len() || d.len() != 1 << j {
            return Err(Error::invalid(format!(
                "detail level {j} has {} coefficients, expected {}",
                d.len(),
                1usize << j
            )));
        }
        approx = synthesis_step(&approx, d, h, &g);
    }
    Ok(approx)
}

/// One level of circular filtering and downsampling by two.
fn analysis_step(x: &[f64], h: &[f64], g: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let len = x.len();
    let half = len / 2;
    let mut a = vec![0.0; half];
    let mut d = vec![0.0; half];
    for k in 0..half {
        let mut sa = 0.0;
        let mut sd = 0.0;
        for (n, (hn, gn)) in h.iter().zip(g).enumerate() {
            let v = x[(2 * k + n) % len];
            sa += hn * v;
            sd += gn * v;
        }
        a[k] = sa;
        d[k] = sd;
    }
    (a, d)
}

/// Transpose of [`analysis_step`].
fn synthesis_step(a: &[f64], d: &[f64], h: &[f64], g: &[f64]) -> Vec<f64> {
    let len = 2 * a.len();
    let mut x = vec![0.0; len];
    for k in 0..a.len() {
        for (n, (hn, gn)) in h.iter().zip(g).enumerate() {
            x[(2 * k + n) % len] += hn * a[k] + gn * d[k];
        }
    }
    x
}
