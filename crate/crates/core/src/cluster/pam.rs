use super::Partition;
use crate::dissimilarity::DissimilarityMatrix;
use crate::error::{Error, Result};

/// Partitioning around medoids: greedy BUILD followed by SWAP until no
/// exchange of a medoid and a non-medoid lowers the total dissimilarity.
///
/// The algorithm is deterministic; `seed` is only recorded in the result.
pub fn pam(diss: &DissimilarityMatrix, k: usize, seed: u64) -> Result<Partition> {
    let n = diss.len();
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must lie in 1..={n}")));
    }
    let d = |i: usize, j: usize| diss.get(i, j);

    // BUILD
    let mut medoids: Vec<usize> = Vec::with_capacity(k);
    let first = (0..n)
        .map(|i| (i, (0..n).map(|j| d(i, j)).sum::<f64>()))
        .fold((0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b })
        .0;
    medoids.push(first);
    let mut nearest: Vec<f64> = (0..n).map(|j| d(first, j)).collect();
    while medoids.len() < k {
        let mut best = (usize::MAX, f64::NEG_INFINITY);
        for i in (0..n).filter(|i| !medoids.contains(i)) {
            let gain: f64 = (0..n).map(|j| (nearest[j] - d(i, j)).max(0.0)).sum();
            if gain > best.1 {
                best = (i, gain);
            }
        }
        medoids.push(best.0);
        for j in 0..n {
            nearest[j] = nearest[j].min(d(best.0, j));
        }
    }

    // SWAP
    let scale: f64 = diss.values().iter().sum::<f64>().max(f64::MIN_POSITIVE);
    loop {
        let (first_d, second_d, owner) = nearest_two(diss, &medoids);
        let mut best = (0usize, 0usize, 0.0f64);
        for (mi, &m) in medoids.iter().enumerate() {
            for h in (0..n).filter(|h| !medoids.contains(h)) {
                let mut delta = 0.0;
                for j in 0..n {
                    let dh = d(h, j);
                    delta += if owner[j] == m {
                        dh.min(second_d[j]) - first_d[j]
                    } else {
                        dh.min(first_d[j]) - first_d[j]
                    };
                }
                if delta < best.2 {
                    best = (mi, h, delta);
                }
            }
        }
        if best.2 < -1e-12 * scale {
            medoids[best.0] = best.1;
        } else {
            break;
        }
    }

    medoids.sort_unstable();
    let mut labels = vec![0; n];
    let mut distances = vec![0.0; n];
    for j in 0..n {
        let (l, dist) = medoids
            .iter()
            .enumerate()
            .fold((0, f64::INFINITY), |b, (l, &m)| {
                if d(m, j) < b.1 {
                    (l, d(m, j))
                } else {
                    b
                }
            });
        labels[j] = l;
        distances[j] = dist;
    }
    Ok(Partition {
        cost: distances.iter().sum(),
        labels,
        k,
        distances,
        centers: None,
        medoids: Some(medoids),
        seed,
    })
}

/// Distance to the nearest and second-nearest medoid, and the nearest medoid.
fn nearest_two(diss: &DissimilarityMatrix, medoids: &[usize]) -> (Vec<f64>, Vec<f64>, Vec<usize>) {
    let n = diss.len();
    let mut first = vec![f64::INFINITY; n];
    let mut second = vec![f64::INFINITY; n];
    let mut owner = vec![usize::MAX; n];
    for j in 0..n {
        for &m in medoids {
            let v = diss.get(m, j);
            if v < first[j] {
                second[j] = first[j];
                first[j] = v;
                owner[j] = m;
            } else if v < second[j] {
                second[j] = v;
            }
        }
    }
    (first, second, owner)
}
