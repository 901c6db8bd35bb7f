use super::coherence::{check_compatible, smoothed_cross, SmoothedSpectrum};
use crate::cwt::{Smoother, SmoothingConfig, Spectrum};
use crate::error::{Error, Result};

/// Distance `√(J_s·N·(1 − WER²))` built from smoothed cross- and
/// auto-spectra summed over time and scales.
pub fn wer_distance(wz: &Spectrum, wx: &Spectrum, smoothing: &SmoothingConfig) -> Result<f64> {
    check_compatible(wz, wx)?;
    let smoother = Smoother::new(wz.n_time(), wz.grid(), smoothing)?;
    let z = SmoothedSpectrum::new(wz.clone(), &smoother)?;
    let x = SmoothedSpectrum::new(wx.clone(), &smoother)?;
    wer_from_parts(&z, &x, &smoother)
}

pub(crate) fn wer_from_parts(
    z: &SmoothedSpectrum,
    x: &SmoothedSpectrum,
    smoother: &Smoother,
) -> Result<f64> {
    check_compatible(&z.spectrum, &x.spectrum)?;
    let n = z.spectrum.n_time();
    let rows = z.spectrum.n_scales();
    let cross = smoothed_cross(&z.spectrum, &x.spectrum, smoother)?;
    let mut num = 0.0;
    let mut den = 0.0;
    for j in 0..rows {
        let r = j * n..(j + 1) * n;
        let c: f64 = cross[r.clone()].iter().map(|v| v.norm()).sum();
        let sz: f64 = z.power[r.clone()].iter().map(|v| v.abs()).sum();
        let sx: f64 = x.power[r].iter().map(|v| v.abs()).sum();
        num += c * c;
        den += sz * sx;
    }
    if !(den > 0.0) {
        return Err(Error::degenerate("zero wavelet auto-spectrum"));
    }
    let one_minus = ((den - num) / den).max(0.0);
    Ok((rows as f64 * n as f64 * one_minus).sqrt())
}
