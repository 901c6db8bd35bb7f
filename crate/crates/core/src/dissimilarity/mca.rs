use nalgebra::DMatrix;
use num_complex::Complex64;

use super::coherence::check_compatible;
use crate::cwt::Spectrum;
use crate::error::{Error, Result};

pub const DEFAULT_THETA: f64 = 0.95;

const SVD_CHECK_TOL: f64 = 1e-8;

/// Maximum covariance analysis of two wavelet spectra.
#[derive(Debug, Clone)]
pub struct McaResult {
    /// `λ_1 ≥ λ_2 ≥ … ≥ 0`.
    pub singular_values: Vec<f64>,
    /// Left singular vectors (columns), phase-normalized.
    pub u: DMatrix<Complex64>,
    /// Right singular vectors (columns), carrying the same phase as `u`.
    pub v: DMatrix<Complex64>,
    /// Leading patterns `u_j^H W_z`, one row per retained direction.
    pub patterns_z: Vec<Vec<Complex64>>,
    /// Leading patterns `v_j^H W_x`.
    pub patterns_x: Vec<Vec<Complex64>>,
    /// Number of retained directions `D`.
    pub retained: usize,
    pub theta: f64,
    /// `‖Q‖_F²`, equal to `Σλ²`.
    pub frobenius_sq: f64,
    /// `d_j = ‖Δ(L_z^j − L_x^j)‖₂` for the retained directions.
    pub direction_distances: Vec<f64>,
    /// `Σ λ_j² d_j² / Σ λ_j²` over the retained directions.
    pub distance: f64,
}

impl McaResult {
    /// Share of `Σλ²` captured by the retained directions.
    pub fn retained_inertia(&self) -> f64 {
        let total: f64 = self.singular_values.iter().map(|l| l * l).sum();
        let kept: f64 = self.singular_values[..self.retained]
            .iter()
            .map(|l| l * l)
            .sum();
        kept / total
    }
}

pub fn mca_distance(wz: &Spectrum, wx: &Spectrum, theta: f64) -> Result<f64> {
    mca(wz, wx, theta).map(|r| r.distance)
}

/// SVD of `Q = W_z W_x^H`, leading patterns and their first-difference
/// distance.
///
/// Each `u_j` is rotated so that its largest-modulus entry is real and
/// positive, and `v_j` receives the same phase, which fixes the otherwise
/// arbitrary phase of the singular pairs.
pub fn mca(wz: &Spectrum, wx: &Spectrum, theta: f64) -> Result<McaResult> {
    check_compatible(wz, wx)?;
    if !(theta > 0.0 && theta <= 1.0) {
        return Err(Error::invalid(format!(
            "theta must lie in (0, 1], got {theta}"
        )));
    }
    let rows = wz.n_scales();
    let n = wz.n_time();
    let mz = DMatrix::from_row_slice(rows, n, wz.values());
    let mx = DMatrix::from_row_slice(rows, n, wx.values());
    let q = &mz * mx.adjoint();
    let frobenius_sq: f64 = q.iter().map(|c| c.norm_sqr()).sum();
    if !(frobenius_sq > 0.0) {
        return Err(Error::degenerate("zero cross-covariance between spectra"));
    }

    let svd = q.svd(true, true);
    let u_raw = svd
        .u
        .ok_or_else(|| Error::Numerical("SVD returned no U".into()))?;
    let vt_raw = svd
        .v_t
        .ok_or_else(|| Error::Numerical("SVD returned no V".into()))?;
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| {
        svd.singular_values[b]
            .total_cmp(&svd.singular_values[a])
            .then(a.cmp(&b))
    });
    let singular_values: Vec<f64> = order
        .iter()
        .map(|&i| svd.singular_values[i].max(0.0))
        .collect();

    let mut u = DMatrix::<Complex64>::zeros(rows, rows);
    let mut v = DMatrix::<Complex64>::zeros(rows, rows);
    for (k, &src) in order.iter().enumerate() {
        let col_u = u_raw.column(src);
        let pivot = (0..rows).fold(0, |best, i| {
            if col_u[i].norm() > col_u[best].norm() {
                i
            } else {
                best
            }
        });
        let p = col_u[pivot];
        let phase = if p.norm() > 0.0 {
            p.conj() / p.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        for i in 0..rows {
            u[(i, k)] = col_u[i] * phase;
            // V = (V^H)^H: column k of V is the conjugated row of V^H.
            v[(i, k)] = vt_raw[(src, i)].conj() * phase;
        }
        u[(pivot, k)].im = 0.0;
    }

    let lambda_sq: f64 = singular_values.iter().map(|l| l * l).sum();
    if (lambda_sq - frobenius_sq).abs() > SVD_CHECK_TOL * frobenius_sq {
        return Err(Error::Numerical(format!(
            "SVD energy {lambda_sq} does not match ‖Q‖² = {frobenius_sq}"
        )));
    }
    check_orthonormal(&u, "U")?;
    check_orthonormal(&v, "V")?;

    let mut retained = rows;
    let mut acc = 0.0;
    for (k, l) in singular_values.iter().enumerate() {
        acc += l * l;
        if acc / lambda_sq >= theta {
            retained = k + 1;
            break;
        }
    }

    let project =
        |basis: &DMatrix<Complex64>, w: &DMatrix<Complex64>, k: usize| -> Vec<Complex64> {
            (0..n)
                .map(|t| (0..rows).map(|a| basis[(a, k)].conj() * w[(a, t)]).sum())
                .collect()
        };
    let patterns_z: Vec<Vec<Complex64>> = (0..retained).map(|k| project(&u, &mz, k)).collect();
    let patterns_x: Vec<Vec<Complex64>> = (0..retained).map(|k| project(&v, &mx, k)).collect();
    let direction_distances: Vec<f64> = patterns_z
        .iter()
        .zip(&patterns_x)
        .map(|(lz, lx)| {
            let diff: Vec<Complex64> = lz.iter().zip(lx).map(|(a, b)| a - b).collect();
            diff.windows(2)
                .map(|w| (w[1] - w[0]).norm_sqr())
                .sum::<f64>()
                .sqrt()
        })
        .collect();
    let weights: f64 = singular_values[..retained].iter().map(|l| l * l).sum();
    let distance = singular_values[..retained]
        .iter()
        .zip(&direction_distances)
        .map(|(l, d)| l * l * d * d)
        .sum::<f64>()
        / weights;

    Ok(McaResult {
        singular_values,
        u,
        v,
        patterns_z,
        patterns_x,
        retained,
        theta,
        frobenius_sq,
        direction_distances,
        distance,
    })
}

fn check_orthonormal(m: &DMatrix<Complex64>, name: &str) -> Result<()> {
    let gram = m.adjoint() * m;
    for i in 0..gram.nrows() {
        for j in 0..gram.ncols() {
            let expected = if i == j { 1.0 } else { 0.0 };
            if (gram[(i, j)] - Complex64::new(expected, 0.0)).norm() > SVD_CHECK_TOL {
                return Err(Error::Numerical(format!(
                    "singular vectors {name} are not orthonormal"
                )));
            }
        }
    }
    Ok(())
}
