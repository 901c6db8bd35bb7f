use std::path::Path;

use super::kmeans::{kmeans, kmeans_from_centers, KMeansConfig};
use super::{check_data, Partition};
use crate::csvio;
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::rng::derive_seed;

/// Transformed distortion used when `d_K` is zero or the power overflows.
const SATURATED: f64 = f64::MAX / 2.0;

/// Per-dimension distortion `d_K`, its transform `d_K^{-p/2}` and the jumps.
#[derive(Debug, Clone, PartialEq)]
pub struct DistortionCurve {
    pub ks: Vec<usize>,
    pub distortion: Vec<f64>,
    pub transformed: Vec<f64>,
    pub jump: Vec<f64>,
}

impl DistortionCurve {
    /// Columns `k,distortion,transformed,jump`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csvio::create(path)?;
        let header = ["k", "distortion", "transformed", "jump"].map(String::from);
        csvio::write_line(&mut w, &header, path)?;
        for i in 0..self.ks.len() {
            let row = [
                self.ks[i].to_string(),
                format!("{}", self.distortion[i]),
                format!("{}", self.transformed[i]),
                format!("{}", self.jump[i]),
            ];
            csvio::write_line(&mut w, &row, path)?;
        }
        csvio::finish(w, path)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let table = csvio::read_numeric_file(path)?;
        let mut curve = DistortionCurve {
            ks: Vec::new(),
            distortion: Vec::new(),
            transformed: Vec::new(),
            jump: Vec::new(),
        };
        for row in &table.rows {
            let [k, d, t, j] = row.as_slice() else {
                return Err(Error::parse(path, "expected four columns"));
            };
            curve.ks.push(*k as usize);
            curve.distortion.push(*d);
            curve.transformed.push(*t);
            curve.jump.push(*j);
        }
        Ok(curve)
    }
}

#[derive(Debug, Clone)]
pub struct JumpResult {
    pub k_star: usize,
    pub curve: DistortionCurve,
    /// Best partition for each `K = 1..=k_max`.
    pub partitions: Vec<Partition>,
    /// Set when some `d_K` was zero or `d_K^{-p/2}` overflowed and was capped.
    pub saturated: bool,
}

impl JumpResult {
    pub fn best(&self) -> &Partition {
        &self.partitions[self.k_star - 1]
    }
}

/// Jump method over `K = 1..=k_max` with power `p/2`, `p` the data dimension.
///
/// Each `K` keeps the better of `restarts` k-means++ runs and a warm start
/// from the `K−1` solution plus its worst-fitted point, so the distortion
/// never increases with `K`. Ties in the jump go to the smaller `K`.
pub fn choose_k_by_jump(
    data: &Matrix,
    k_max: usize,
    config: &KMeansConfig,
    seed: u64,
) -> Result<JumpResult> {
    check_data(data, k_max)?;
    let n = data.rows();
    let p = data.cols();
    let power = p as f64 / 2.0;
    let mut partitions: Vec<Partition> = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        let k_seed = derive_seed(seed, "jump", k as u64);
        let mut best = kmeans(data, k, config, k_seed)?;
        if let Some(prev) = partitions.last() {
            let prev_centers = prev.centers().expect("k-means partition has centers");
            let worst = (0..n).fold(0, |w, i| {
                if prev.distances()[i] > prev.distances()[w] {
                    i
                } else {
                    w
                }
            });
            let mut rows: Vec<&[f64]> = (0..prev_centers.rows())
                .map(|c| prev_centers.row(c))
                .collect();
            rows.push(data.row(worst));
            let warm = kmeans_from_centers(
                data,
                Matrix::from_rows(&rows).unwrap(),
                config.max_iter,
                k_seed,
            )?;
            if warm.cost() < best.cost() {
                best = warm;
            }
        }
        partitions.push(best);
    }

    let mut saturated = false;
    let distortion: Vec<f64> = partitions
        .iter()
        .map(|q| q.cost() / (n * p) as f64)
        .collect();
    let transformed: Vec<f64> = distortion
        .iter()
        .map(|&d| {
            let y = d.powf(-power);
            if d > 0.0 && y.is_finite() {
                y
            } else {
                saturated = true;
                SATURATED
            }
        })
        .collect();
    let jump: Vec<f64> = (0..k_max)
        .map(|i| transformed[i] - if i == 0 { 0.0 } else { transformed[i - 1] })
        .collect();
    let k_star = 1 + (0..k_max).fold(0, |b, i| if jump[i] > jump[b] { i } else { b });
    Ok(JumpResult {
        k_star,
        curve: DistortionCurve {
            ks: (1..=k_max).collect(),
            distortion,
            transformed,
            jump,
        },
        partitions,
        saturated,
    })
}
