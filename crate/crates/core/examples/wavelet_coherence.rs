//! Morlet spectra of two curves, their coherence and spectral distances.

use wavecluster::cwt::{make_scale_grid, CwtConfig, CwtPlan, SmoothingConfig};
use wavecluster::dissimilarity::{mca, scale_coherence, wavelet_coherence, wer_distance};

fn main() -> Result<(), wavecluster::Error> {
    let n = 256;
    let tau = std::f64::consts::TAU;
    // shared slow cycle, different fast components
    let z: Vec<f64> = (0..n)
        .map(|t| (tau * t as f64 / 64.0).sin() + 0.4 * (tau * t as f64 / 8.0).sin())
        .collect();
    let x: Vec<f64> = (0..n)
        .map(|t| (tau * t as f64 / 64.0 + 0.5).sin() + 0.4 * (tau * t as f64 / 5.0).cos())
        .collect();

    let grid = make_scale_grid(1, 6, 8)?;
    let plan = CwtPlan::new(n, &grid, &CwtConfig::default())?;
    let (wz, wx) = (plan.transform(&z)?, plan.transform(&x)?);
    let smoothing = SmoothingConfig::default();

    let field = wavelet_coherence(&wz, &wx, &smoothing)?;
    println!(
        "{} scales x {} times, mean coherence {:.3}",
        grid.len(),
        field.n_time(),
        field.mean()
    );
    let per_scale = scale_coherence(&wz, &wx, &smoothing)?;
    for (s, c) in grid.scales().iter().zip(&per_scale).step_by(8) {
        println!("  scale {s:7.2}: coherence {c:.3}");
    }
    println!("WER distance {:.3}", wer_distance(&wz, &wx, &smoothing)?);
    let m = mca(&wz, &wx, 0.95)?;
    println!(
        "MCA keeps {} directions ({:.1}% of covariance), distance {:.4}",
        m.retained,
        100.0 * m.retained_inertia(),
        m.distance
    );
    Ok(())
}
