use num_complex::Complex64;

use crate::cwt::{ScaleGrid, Smoother, SmoothingConfig, Spectrum};
use crate::error::{Error, Result};

/// Floor below which a smoothed auto-spectrum counts as empty.
const POWER_FLOOR: f64 = 1e-300;

/// Wavelet coherence `R(a, τ) ∈ [0, 1]` of two curves.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherenceField {
    values: Vec<f64>,
    n_time: usize,
    grid: ScaleGrid,
    max_unclipped: f64,
}

impl CoherenceField {
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, j: usize, t: usize) -> f64 {
        self.values[j * self.n_time + t]
    }

    pub fn n_time(&self) -> usize {
        self.n_time
    }

    pub fn grid(&self) -> &ScaleGrid {
        &self.grid
    }

    /// Largest ratio before clipping to `[0, 1]`; exceeds 1 only by rounding.
    pub fn max_unclipped(&self) -> f64 {
        self.max_unclipped
    }

    pub fn mean(&self) -> f64 {
        self.values.iter().sum::<f64>() / self.values.len() as f64
    }
}

pub(crate) fn check_compatible(wz: &Spectrum, wx: &Spectrum) -> Result<()> {
    if wz.grid() != wx.grid() || wz.n_time() != wx.n_time() {
        return Err(Error::invalid(
            "spectra are on different scale grids or lengths",
        ));
    }
    if wz.omega0() != wx.omega0() || wz.normalization() != wx.normalization() {
        return Err(Error::invalid("spectra use different wavelet settings"));
    }
    Ok(())
}

/// A spectrum together with its smoothed power, reused across many pairs.
#[derive(Debug, Clone)]
pub struct SmoothedSpectrum {
    pub spectrum: Spectrum,
    pub power: Vec<f64>,
}

impl SmoothedSpectrum {
    pub fn new(spectrum: Spectrum, smoother: &Smoother) -> Result<Self> {
        let power = smoother.apply(&spectrum.power())?;
        Ok(SmoothedSpectrum { spectrum, power })
    }
}

pub(crate) fn smoothed_cross(
    z: &Spectrum,
    x: &Spectrum,
    smoother: &Smoother,
) -> Result<Vec<Complex64>> {
    let cross: Vec<Complex64> = z
        .values()
        .iter()
        .zip(x.values())
        .map(|(a, b)| a * b.conj())
        .collect();
    smoother.apply(&cross)
}

pub(crate) fn coherence_from_parts(
    z: &SmoothedSpectrum,
    x: &SmoothedSpectrum,
    smoother: &Smoother,
) -> Result<CoherenceField> {
    check_compatible(&z.spectrum, &x.spectrum)?;
    let cross = smoothed_cross(&z.spectrum, &x.spectrum, smoother)?;
    let mut max_unclipped: f64 = 0.0;
    let values = cross
        .iter()
        .zip(z.power.iter().zip(&x.power))
        .map(|(c, (pz, px))| {
            let (pz, px) = (pz.abs(), px.abs());
            if pz < POWER_FLOOR || px < POWER_FLOOR {
                return 0.0;
            }
            let r = c.norm() / (pz.sqrt() * px.sqrt());
            max_unclipped = max_unclipped.max(r);
            r.clamp(0.0, 1.0)
        })
        .collect();
    Ok(CoherenceField {
        values,
        n_time: z.spectrum.n_time(),
        grid: z.spectrum.grid().clone(),
        max_unclipped,
    })
}

/// `R = |S(W_z W_x*)| / (|S(|W_z|²)|^½ |S(|W_x|²)|^½)`, clipped to `[0, 1]`.
pub fn wavelet_coherence(
    wz: &Spectrum,
    wx: &Spectrum,
    smoothing: &SmoothingConfig,
) -> Result<CoherenceField> {
    check_compatible(wz, wx)?;
    let smoother = Smoother::new(wz.n_time(), wz.grid(), smoothing)?;
    let z = SmoothedSpectrum::new(wz.clone(), &smoother)?;
    let x = SmoothedSpectrum::new(wx.clone(), &smoother)?;
    coherence_from_parts(&z, &x, &smoother)
}

/// Time-averaged squared coherence per scale, a diagnostic:
/// `Σ_τ |S(W_zx)|² / Σ_τ |S(W_zz)| |S(W_xx)|`, which lies in `[0, 1]`.
pub fn scale_coherence(
    wz: &Spectrum,
    wx: &Spectrum,
    smoothing: &SmoothingConfig,
) -> Result<Vec<f64>> {
    check_compatible(wz, wx)?;
    let n = wz.n_time();
    let smoother = Smoother::new(n, wz.grid(), smoothing)?;
    let z = SmoothedSpectrum::new(wz.clone(), &smoother)?;
    let x = SmoothedSpectrum::new(wx.clone(), &smoother)?;
    let cross = smoothed_cross(wz, wx, &smoother)?;
    Ok((0..wz.n_scales())
        .map(|j| {
            let r = j * n..(j + 1) * n;
            let num: f64 = cross[r.clone()].iter().map(|c| c.norm_sqr()).sum();
            let den: f64 = z.power[r.clone()]
                .iter()
                .zip(&x.power[r])
                .map(|(a, b)| a.abs() * b.abs())
                .sum();
            if den > 0.0 {
                (num / den).min(1.0)
            } else {
                0.0
            }
        })
        .collect())
}
