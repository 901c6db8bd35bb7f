use crate::cluster::Partition;
use crate::dissimilarity::DissimilarityMatrix;
use crate::error::{Error, Result};
use crate::matrix::{sq_dist, Matrix};

/// Cluster means of `data` under the partition's labels.
pub fn centroids(data: &Matrix, partition: &Partition) -> Result<Matrix> {
    if data.rows() != partition.len() {
        return Err(Error::invalid(format!(
            "partition has {} labels for {} observations",
            partition.len(),
            data.rows()
        )));
    }
    let k = partition.k();
    let mut sums = Matrix::zeros(k, data.cols());
    let mut counts = vec![0usize; k];
    for (i, &l) in partition.labels().iter().enumerate() {
        counts[l] += 1;
        for (s, v) in sums.row_mut(l).iter_mut().zip(data.row(i)) {
            *s += v;
        }
    }
    if let Some(l) = counts.iter().position(|&c| c == 0) {
        return Err(Error::invalid(format!("cluster {l} is empty")));
    }
    for (l, &c) in counts.iter().enumerate() {
        sums.row_mut(l).iter_mut().for_each(|v| *v /= c as f64);
    }
    Ok(sums)
}

/// `2·d₁ / (d₁ + d₂)` from the distance to the own center and to the
/// nearest other center; points equidistant from both score 1.
pub(crate) fn shadow(d1: f64, d2: f64) -> f64 {
    if d1 + d2 > 0.0 {
        (2.0 * d1 / (d1 + d2)).clamp(0.0, 1.0)
    } else {
        1.0
    }
}

/// Distance to own center and index/distance of the nearest other center.
pub(crate) fn own_and_second(dist: &[f64], own: usize) -> (f64, usize, f64) {
    let mut second = (usize::MAX, f64::INFINITY);
    for (l, &d) in dist.iter().enumerate() {
        if l != own && d < second.1 {
            second = (l, d);
        }
    }
    (dist[own], second.0, second.1)
}

/// Shadow values in feature space, using the partition's centers when it has
/// them and the cluster means otherwise.
pub fn shadow_values(data: &Matrix, partition: &Partition) -> Result<Vec<f64>> {
    if partition.k() < 2 {
        return Err(Error::invalid("shadow values need at least two clusters"));
    }
    let centers = match partition.centers() {
        Some(c) if c.cols() == data.cols() && data.rows() == partition.len() => c.clone(),
        _ => centroids(data, partition)?,
    };
    Ok(partition
        .labels()
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let dist: Vec<f64> = (0..centers.rows())
                .map(|c| sq_dist(data.row(i), centers.row(c)).sqrt())
                .collect();
            let (d1, _, d2) = own_and_second(&dist, l);
            shadow(d1, d2)
        })
        .collect())
}

/// Shadow values from a dissimilarity matrix and a medoid partition.
pub fn shadow_values_dissimilarity(
    diss: &DissimilarityMatrix,
    partition: &Partition,
) -> Result<Vec<f64>> {
    if partition.k() < 2 {
        return Err(Error::invalid("shadow values need at least two clusters"));
    }
    if diss.len() != partition.len() {
        return Err(Error::invalid(
            "partition and dissimilarity matrix differ in size",
        ));
    }
    let medoids = partition
        .medoids()
        .ok_or_else(|| Error::invalid("partition has no medoids"))?;
    Ok(partition
        .labels()
        .iter()
        .enumerate()
        .map(|(i, &l)| {
            let dist: Vec<f64> = medoids.iter().map(|&m| diss.get(m, i)).collect();
            let (d1, _, d2) = own_and_second(&dist, l);
            shadow(d1, d2)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_computed_values() {
        assert_eq!(shadow(0.0, 3.0), 0.0);
        assert_eq!(shadow(2.0, 2.0), 1.0);
        assert!((shadow(1.0, 2.0) - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn one_dimensional_example() {
        // cluster means are 0 and 3
        let data = Matrix::from_vec(4, 1, vec![-1.0, 1.0, 2.0, 4.0]);
        let p = Partition::from_labels(vec![0, 0, 1, 1]).unwrap();
        let s = shadow_values(&data, &p).unwrap();
        // point 1: 2·1/(1+2)
        assert!((s[1] - 2.0 / 3.0).abs() < 1e-15);
        assert!((s[0] - 2.0 / 5.0).abs() < 1e-15);
    }

    #[test]
    fn invariant_under_rescaling() {
        let data = Matrix::from_vec(
            6,
            2,
            vec![0.0, 0.0, 1.0, 0.5, 0.2, 1.0, 5.0, 5.0, 6.0, 4.0, 5.5, 6.0],
        );
        let p = Partition::from_labels(vec![0, 0, 0, 1, 1, 1]).unwrap();
        let a = shadow_values(&data, &p).unwrap();
        let b = shadow_values(&data.scale(7.5), &p).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-12);
        }
        assert!(shadow_values(&data, &Partition::from_labels(vec![0; 6]).unwrap()).is_err());
    }

    #[test]
    fn medoid_version_reads_the_matrix() {
        let d = DissimilarityMatrix::from_fn(4, |i, j| (i as f64 - j as f64).abs()).unwrap();
        let p = crate::cluster::pam(&d, 2, 0).unwrap();
        let s = shadow_values_dissimilarity(&d, &p).unwrap();
        for &m in p.medoids().unwrap() {
            assert_eq!(s[m], 0.0);
        }
        assert!(s.iter().all(|v| (0.0..=1.0).contains(v)));
    }
}
