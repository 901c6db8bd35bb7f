use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{check_data, Partition};
use crate::error::{Error, Result};
use crate::matrix::{sq_dist, Matrix};
use crate::rng::{derive_seed, stream, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct KMeansConfig {
    pub restarts: usize,
    pub max_iter: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            restarts: 10,
            max_iter: 100,
        }
    }
}

/// k-means with k-means++ seeding, keeping the best of `restarts` runs.
///
/// Restart `r` draws from its own stream, so the result is the same for any
/// thread count. Ties in cost keep the lowest restart.
pub fn kmeans(data: &Matrix, k: usize, config: &KMeansConfig, seed: u64) -> Result<Partition> {
    check_data(data, k)?;
    if config.restarts == 0 {
        return Err(Error::invalid("restarts must be at least 1"));
    }
    let runs: Vec<Partition> = (0..config.restarts)
        .into_par_iter()
        .map(|r| {
            let run_seed = derive_seed(seed, "kmeans-restart", r as u64);
            let mut rng = stream(run_seed, "kmeans++", 0);
            let init = seed_plus_plus(data, k, &mut rng);
            lloyd(data, init, config.max_iter, seed)
        })
        .collect();
    let mut best = None::<Partition>;
    for p in runs {
        if best.as_ref().is_none_or(|b| p.cost < b.cost) {
            best = Some(p);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// Lloyd iterations from the given initial centers.
pub fn kmeans_from_centers(
    data: &Matrix,
    centers: Matrix,
    max_iter: usize,
    seed: u64,
) -> Result<Partition> {
    check_data(data, centers.rows())?;
    if centers.cols() != data.cols() {
        return Err(Error::invalid("centers and data differ in dimension"));
    }
    Ok(lloyd(data, centers, max_iter, seed))
}

fn seed_plus_plus(data: &Matrix, k: usize, rng: &mut Stream) -> Matrix {
    let n = data.rows();
    let mut chosen = vec![rng.random_range(0..n)];
    let mut d2: Vec<f64> = (0..n)
        .map(|i| sq_dist(data.row(i), data.row(chosen[0])))
        .collect();
    while chosen.len() < k {
        let total: f64 = d2.iter().sum();
        let next = if total > 0.0 {
            let target = rng.random::<f64>() * total;
            let mut acc = 0.0;
            let mut pick = None;
            for (i, &w) in d2.iter().enumerate() {
                acc += w;
                if w > 0.0 && acc > target {
                    pick = Some(i);
                    break;
                }
            }
            // rounding can leave the target just past the last positive weight
            pick.unwrap_or_else(|| d2.iter().rposition(|&w| w > 0.0).unwrap())
        } else {
            (0..n).find(|i| !chosen.contains(i)).unwrap()
        };
        chosen.push(next);
        for (i, d) in d2.iter_mut().enumerate() {
            *d = d.min(sq_dist(data.row(i), data.row(next)));
        }
    }
    let rows: Vec<&[f64]> = chosen.iter().map(|&i| data.row(i)).collect();
    Matrix::from_rows(&rows).unwrap()
}

fn nearest(point: &[f64], centers: &Matrix) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for c in 0..centers.rows() {
        let d = sq_dist(point, centers.row(c));
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn lloyd(data: &Matrix, mut centers: Matrix, max_iter: usize, seed: u64) -> Partition {
    let n = data.rows();
    let k = centers.rows();
    let p = data.cols();
    let mut labels = vec![usize::MAX; n];
    let mut d2 = vec![0.0; n];
    let mut previous_cost = f64::INFINITY;
    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        for i in 0..n {
            let (c, d) = nearest(data.row(i), &centers);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
            d2[i] = d;
        }
        repair_empty(data, &mut centers, &mut labels, &mut d2);
        let cost: f64 = d2.iter().sum();
        debug_assert!(cost <= previous_cost * (1.0 + 1e-12) + 1e-12);
        previous_cost = cost;

        let mut sums = Matrix::zeros(k, p);
        let mut counts = vec![0usize; k];
        for i in 0..n {
            counts[labels[i]] += 1;
            for (s, v) in sums.row_mut(labels[i]).iter_mut().zip(data.row(i)) {
                *s += v;
            }
        }
        for c in 0..k {
            let row = sums.row_mut(c);
            row.iter_mut().for_each(|v| *v /= counts[c] as f64);
        }
        centers = sums;
        if !changed {
            break;
        }
    }
    for i in 0..n {
        d2[i] = sq_dist(data.row(i), centers.row(labels[i]));
    }
    Partition {
        distances: d2.iter().map(|d| d.sqrt()).collect(),
        cost: d2.iter().sum(),
        labels,
        k,
        centers: Some(centers),
        medoids: None,
        seed,
    }
}

/// Gives every empty cluster the point farthest from its own center, taken
/// from a cluster with at least two members.
fn repair_empty(data: &Matrix, centers: &mut Matrix, labels: &mut [usize], d2: &mut [f64]) {
    let k = centers.rows();
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let mut far = None::<usize>;
        for i in 0..labels.len() {
            if counts[labels[i]] > 1 && far.is_none_or(|f| d2[i] > d2[f]) {
                far = Some(i);
            }
        }
        let Some(i) = far else { return };
        labels[i] = empty;
        d2[i] = 0.0;
        centers.row_mut(empty).copy_from_slice(data.row(i));
    }
}
