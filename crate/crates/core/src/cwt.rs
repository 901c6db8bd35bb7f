//! Morlet continuous wavelet transform on a voiced dyadic scale grid and the
//! time/scale smoothing operator used by wavelet coherence.
//!
//! All convolutions are circular, matching the periodized DWT; rows whose
//! scale exceeds half the curve length are flagged instead of padded.

use std::f64::consts::PI;
use std::io::{Read, Write};
use std::ops::{Add, Mul};
use std::path::Path;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::csvio;
use crate::error::{Error, Result};

pub const DEFAULT_OMEGA0: f64 = 6.0;

// Morlet envelope is below 1e-31 of its peak beyond this many scale units.
const MORLET_SUPPORT: f64 = 12.0;
// Gaussian smoothing kernel is truncated at this many standard deviations.
const GAUSS_SUPPORT: f64 = 10.0;

/// Scales `2^(o_min + m/voices)` for `m = 0..=(o_max-o_min)·voices`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleGrid {
    scales: Vec<f64>,
    voices: u32,
    octave_min: i32,
    octave_max: i32,
}

pub fn make_scale_grid(octave_min: i32, octave_max: i32, voices: u32) -> Result<ScaleGrid> {
    if octave_min >= octave_max {
        return Err(Error::invalid(format!(
            "octave range [{octave_min}, {octave_max}] is empty"
        )));
    }
    if voices == 0 {
        return Err(Error::invalid("voices per octave must be positive"));
    }
    let count = (octave_max - octave_min) as u32 * voices + 1;
    let scales = (0..count)
        .map(|m| 2f64.powf(octave_min as f64 + m as f64 / voices as f64))
        .collect();
    Ok(ScaleGrid {
        scales,
        voices,
        octave_min,
        octave_max,
    })
}

impl ScaleGrid {
    pub fn scales(&self) -> &[f64] {
        &self.scales
    }

    pub fn len(&self) -> usize {
        self.scales.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scales.is_empty()
    }

    pub fn voices(&self) -> u32 {
        self.voices
    }

    pub fn octaves(&self) -> (i32, i32) {
        (self.octave_min, self.octave_max)
    }
}

/// Prefactor convention of the transform.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub enum Normalization {
    /// `1/a`: the discrete transform's prefactor.
    #[default]
    L1,
    /// `1/√a`: unit-energy analyzing wavelets.
    L2,
}

impl Normalization {
    fn exponent(self) -> f64 {
        match self {
            Normalization::L1 => 1.0,
            Normalization::L2 => 0.5,
        }
    }
}

/// `ψ(u) = π^{-1/4} e^{iω₀u} e^{-u²/2}`.
pub fn morlet(u: f64, omega0: f64) -> Complex64 {
    let env = PI.powf(-0.25) * (-0.5 * u * u).exp();
    Complex64::from_polar(env, omega0 * u)
}

/// Complex `J_s × N` wavelet spectrum of one curve, row-major by scale.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    values: Vec<Complex64>,
    n_time: usize,
    grid: ScaleGrid,
    omega0: f64,
    normalization: Normalization,
    coi_flags: Vec<bool>,
}

impl Spectrum {
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn row(&self, j: usize) -> &[Complex64] {
        &self.values[j * self.n_time..(j + 1) * self.n_time]
    }

    pub fn get(&self, j: usize, t: usize) -> Complex64 {
        self.values[j * self.n_time + t]
    }

    pub fn n_scales(&self) -> usize {
        self.grid.len()
    }

    pub fn n_time(&self) -> usize {
        self.n_time
    }

    pub fn grid(&self) -> &ScaleGrid {
        &self.grid
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    /// Rows whose scale exceeds `N/2` samples; their values wrap around the
    /// whole curve and should not be trusted.
    pub fn coi_flags(&self) -> &[bool] {
        &self.coi_flags
    }

    /// `|W|²` as a real field.
    pub fn power(&self) -> Vec<f64> {
        self.values.iter().map(|w| w.norm_sqr()).collect()
    }

    /// Binary layout: `J_s` and `N` as little-endian `u32`, then row-major
    /// little-endian `f64` pairs `(re, im)`.
    pub fn write_binary<W: Write>(&self, w: &mut W) -> std::io::Result<()> {
        write_complex_binary(w, self.n_scales(), self.n_time, &self.values)
    }

    /// One row per scale: the scale followed by `|W|` at each time.
    pub fn write_magnitude_csv(&self, path: &Path) -> Result<()> {
        let mut w = csvio::create(path)?;
        let mut header = vec!["scale".to_string()];
        header.extend((0..self.n_time).map(|t| format!("t{t}")));
        csvio::write_line(&mut w, &header, path)?;
        for (j, a) in self.grid.scales().iter().enumerate() {
            let mut row = vec![format!("{a}")];
            row.extend(self.row(j).iter().map(|v| format!("{}", v.norm())));
            csvio::write_line(&mut w, &row, path)?;
        }
        csvio::finish(w, path)
    }
}

pub(crate) fn write_complex_binary<W: Write>(
    w: &mut W,
    rows: usize,
    cols: usize,
    values: &[Complex64],
) -> std::io::Result<()> {
    let to_u32 = |v: usize| {
        u32::try_from(v).map_err(|_| {
            std::io::Error::new(std::io::ErrorKind::InvalidInput, "dimension overflow")
        })
    };
    w.write_all(&to_u32(rows)?.to_le_bytes())?;
    w.write_all(&to_u32(cols)?.to_le_bytes())?;
    for v in values {
        w.write_all(&v.re.to_le_bytes())?;
        w.write_all(&v.im.to_le_bytes())?;
    }
    Ok(())
}

/// Complex matrix read back from the binary layout.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    pub rows: usize,
    pub cols: usize,
    pub values: Vec<Complex64>,
}

pub fn read_complex_binary<R: Read>(r: &mut R) -> std::io::Result<ComplexMatrix> {
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let rows = u32::from_le_bytes(b4) as usize;
    r.read_exact(&mut b4)?;
    let cols = u32::from_le_bytes(b4) as usize;
    let mut values = Vec::with_capacity(rows * cols);
    let mut b8 = [0u8; 8];
    for _ in 0..rows * cols {
        r.read_exact(&mut b8)?;
        let re = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let im = f64::from_le_bytes(b8);
        values.push(Complex64::new(re, im));
    }
    let mut rest = [0u8; 1];
    if r.read(&mut rest)? != 0 {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidData,
            "trailing bytes after matrix",
        ));
    }
    Ok(ComplexMatrix { rows, cols, values })
}

/// Transform parameters shared by every curve of a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CwtConfig {
    pub omega0: f64,
    pub normalization: Normalization,
}

impl Default for CwtConfig {
    fn default() -> Self {
        CwtConfig {
            omega0: DEFAULT_OMEGA0,
            normalization: Normalization::L1,
        }
    }
}

/// Precomputed FFTs and periodized wavelet spectra for curves of one length.
#[derive(Clone)]
pub struct CwtPlan {
    n: usize,
    grid: ScaleGrid,
    config: CwtConfig,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    // per scale: FFT of the reversed periodized wavelet, with all prefactors folded in
    kernels: Vec<Vec<Complex64>>,
}

impl CwtPlan {
    pub fn new(n: usize, grid: &ScaleGrid, config: &CwtConfig) -> Result<Self> {
        if n < 8 {
            return Err(Error::invalid(format!(
                "CWT needs at least 8 samples, got {n}"
            )));
        }
        if grid.scales()[0] < 1.0 {
            return Err(Error::invalid("smallest scale must be at least one sample"));
        }
        if !(config.omega0.is_finite() && config.omega0 > 0.0) {
            return Err(Error::invalid("Morlet center frequency must be positive"));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        let p = config.normalization.exponent();
        let kernels = grid
            .scales()
            .iter()
            .map(|&a| {
                let mut phi = periodized_conj_wavelet(n, a, config.omega0);
                forward.process(&mut phi);
                let scale = 1.0 / (n as f64 * a.powf(p));
                (0..n).map(|f| phi[(n - f) % n] * scale).collect()
            })
            .collect();
        Ok(CwtPlan {
            n,
            grid: grid.clone(),
            config: config.clone(),
            forward,
            inverse,
            kernels,
        })
    }

    pub fn n_time(&self) -> usize {
        self.n
    }

    pub fn grid(&self) -> &ScaleGrid {
        &self.grid
    }

    pub fn transform(&self, curve: &[f64]) -> Result<Spectrum> {
        if curve.len() != self.n {
            return Err(Error::invalid(format!(
                "curve has {} samples, plan expects {}",
                curve.len(),
                self.n
            )));
        }
        let mut z: Vec<Complex64> = curve.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward.process(&mut z);
        let mut values = Vec::with_capacity(self.n * self.grid.len());
        let mut buf = vec![Complex64::new(0.0, 0.0); self.n];
        for k in &self.kernels {
            for ((b, zf), kf) in buf.iter_mut().zip(&z).zip(k) {
                *b = zf * kf;
            }
            self.inverse.process(&mut buf);
            values.extend_from_slice(&buf);
        }
        let coi_flags = self
            .grid
            .scales()
            .iter()
            .map(|&a| a > self.n as f64 / 2.0)
            .collect();
        Ok(Spectrum {
            values,
            n_time: self.n,
            grid: self.grid.clone(),
            omega0: self.config.omega0,
            normalization: self.config.normalization,
            coi_flags,
        })
    }
}

/// `φ[m] = Σ_l ψ*((m + lN)/a)`, the wavelet wrapped onto the circle.
fn periodized_conj_wavelet(n: usize, a: f64, omega0: f64) -> Vec<Complex64> {
    let reach = (MORLET_SUPPORT * a / n as f64).ceil() as i64 + 1;
    (0..n)
        .map(|m| {
            (-reach..=reach)
                .map(|l| (m as f64 + (l * n as i64) as f64) / a)
                .filter(|u| u.abs() <= MORLET_SUPPORT)
                .map(|u| morlet(u, omega0).conj())
                .sum()
        })
        .collect()
}

/// `W(j,k) = a_j^{-p} Σ_i z_i ψ*((i-k)/a_j)`, circular in time.
pub fn cwt_morlet(
    curve: &[f64],
    grid: &ScaleGrid,
    omega0: f64,
    normalization: Normalization,
) -> Result<Spectrum> {
    CwtPlan::new(
        curve.len(),
        grid,
        &CwtConfig {
            omega0,
            normalization,
        },
    )?
    .transform(curve)
}

/// Widths of the smoothing windows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothingConfig {
    /// Gaussian standard deviation in time, as a multiple of the row's scale.
    pub time_factor: f64,
    /// Boxcar width across scales, as a fraction of voices per octave.
    pub scale_window: f64,
}

impl Default for SmoothingConfig {
    fn default() -> Self {
        SmoothingConfig {
            time_factor: 1.0,
            scale_window: 0.6,
        }
    }
}

/// Values that can be smoothed: real power fields and complex cross-spectra.
pub trait FieldValue: Copy + Send + Sync + Add<Output = Self> + Mul<f64, Output = Self> {
    fn zero() -> Self;
}

impl FieldValue for f64 {
    fn zero() -> Self {
        0.0
    }
}

impl FieldValue for Complex64 {
    fn zero() -> Self {
        Complex64::new(0.0, 0.0)
    }
}

/// Circular Gaussian smoothing in time followed by a boxcar across scales.
#[derive(Debug, Clone)]
pub struct Smoother {
    n: usize,
    // per row: nonzero (offset, weight) pairs of the periodized unit-sum kernel
    time_kernels: Vec<Vec<(usize, f64)>>,
    half_width: usize,
}

impl Smoother {
    pub fn new(n: usize, grid: &ScaleGrid, config: &SmoothingConfig) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("cannot smooth an empty field"));
        }
        if !(config.time_factor > 0.0 && config.scale_window >= 0.0) {
            return Err(Error::invalid("smoothing widths must be positive"));
        }
        let time_kernels = grid
            .scales()
            .iter()
            .map(|&a| gaussian_circular_kernel(n, config.time_factor * a))
            .collect();
        let width = nearest_odd(config.scale_window * grid.voices() as f64);
        Ok(Smoother {
            n,
            time_kernels,
            half_width: width / 2,
        })
    }

    /// Number of grid rows spanned by the scale boxcar.
    pub fn scale_window_rows(&self) -> usize {
        2 * self.half_width + 1
    }

    pub fn apply<T: FieldValue>(&self, field: &[T]) -> Result<Vec<T>> {
        let rows = self.time_kernels.len();
        if field.len() != rows * self.n {
            return Err(Error::invalid(format!(
                "field has {} entries, expected {rows} x {}",
                field.len(),
                self.n
            )));
        }
        let n = self.n;
        let mut timed = vec![T::zero(); field.len()];
        for (j, kernel) in self.time_kernels.iter().enumerate() {
            let src = &field[j * n..(j + 1) * n];
            let dst = &mut timed[j * n..(j + 1) * n];
            for (t, out) in dst.iter_mut().enumerate() {
                let mut acc = T::zero();
                for &(m, w) in kernel {
                    acc = acc + src[(t + n - m) % n] * w;
                }
                *out = acc;
            }
        }
        if self.half_width == 0 {
            return Ok(timed);
        }
        let w = 1.0 / self.scale_window_rows() as f64;
        let h = self.half_width as isize;
        let mut out = vec![T::zero(); field.len()];
        for j in 0..rows {
            for d in -h..=h {
                let src = reflect(j as isize + d, rows);
                let s = &timed[src * n..(src + 1) * n];
                for (o, v) in out[j * n..(j + 1) * n].iter_mut().zip(s) {
                    *o = *o + *v;
                }
            }
            for o in &mut out[j * n..(j + 1) * n] {
                *o = *o * w;
            }
        }
        Ok(out)
    }
}

/// Smooth a `J_s × N` real or complex field laid out row-major by scale.
pub fn smooth_spectrum<T: FieldValue>(
    field: &[T],
    grid: &ScaleGrid,
    config: &SmoothingConfig,
) -> Result<Vec<T>> {
    if grid.is_empty() || !field.len().is_multiple_of(grid.len()) {
        return Err(Error::invalid("field shape does not match the scale grid"));
    }
    Smoother::new(field.len() / grid.len(), grid, config)?.apply(field)
}

/// Half-sample symmetric extension of the index range `0..len`.
fn reflect(i: isize, len: usize) -> usize {
    let period = 2 * len as isize;
    let r = i.rem_euclid(period) as usize;
    if r < len {
        r
    } else {
        2 * len - 1 - r
    }
}

fn nearest_odd(x: f64) -> usize {
    let k = ((x - 1.0) / 2.0).round().max(0.0) as usize;
    2 * k + 1
}

fn gaussian_circular_kernel(n: usize, sigma: f64) -> Vec<(usize, f64)> {
    let reach = (GAUSS_SUPPORT * sigma / n as f64).ceil() as i64 + 1;
    let raw: Vec<f64> = (0..n)
        .map(|m| {
            (-reach..=reach)
                .map(|l| m as f64 + (l * n as i64) as f64)
                .filter(|x| x.abs() <= GAUSS_SUPPORT * sigma)
                .map(|x| (-x * x / (2.0 * sigma * sigma)).exp())
                .sum()
        })
        .collect();
    let total: f64 = raw.iter().sum();
    raw.into_iter()
        .enumerate()
        .filter(|(_, w)| *w > 0.0)
        .map(|(m, w)| (m, w / total))
        .collect()
}
