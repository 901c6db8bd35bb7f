//! Partitioning: k-means on feature matrices, the jump method for the number
//! of clusters, and PAM on dissimilarity matrices.

mod jump;
mod kmeans;
mod pam;

use std::path::Path;

pub use jump::{choose_k_by_jump, DistortionCurve, JumpResult};
pub use kmeans::{kmeans, kmeans_from_centers, KMeansConfig};
pub use pam::pam;

use crate::csvio;
use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// A hard partition of `n` items into `k` clusters.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    labels: Vec<usize>,
    k: usize,
    /// Distance from each item to its center or medoid.
    distances: Vec<f64>,
    /// k-means: sum of squared distances; PAM: sum of dissimilarities.
    cost: f64,
    centers: Option<Matrix>,
    medoids: Option<Vec<usize>>,
    seed: u64,
}

impl Partition {
    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    pub fn distances(&self) -> &[f64] {
        &self.distances
    }

    pub fn cost(&self) -> f64 {
        self.cost
    }

    pub fn centers(&self) -> Option<&Matrix> {
        self.centers.as_ref()
    }

    /// Medoid indices in ascending order; label `l` belongs to `medoids[l]`.
    pub fn medoids(&self) -> Option<&[usize]> {
        self.medoids.as_deref()
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &l in &self.labels {
            sizes[l] += 1;
        }
        sizes
    }

    /// Builds a partition from labels alone, e.g. ground truth.
    pub fn from_labels(labels: Vec<usize>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::invalid("empty label vector"));
        }
        let k = labels.iter().max().map_or(0, |m| m + 1);
        let n = labels.len();
        Ok(Partition {
            labels,
            k,
            distances: vec![0.0; n],
            cost: 0.0,
            centers: None,
            medoids: None,
            seed: 0,
        })
    }

    /// Partition with explicit labels and centers, e.g. from another program.
    pub fn with_centers(data: &Matrix, labels: Vec<usize>, centers: Matrix) -> Result<Self> {
        check_data(data, centers.rows())?;
        if labels.len() != data.rows() || centers.cols() != data.cols() {
            return Err(Error::invalid("labels, data and centers do not conform"));
        }
        let k = centers.rows();
        if let Some(l) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::invalid(format!("label {l} has no center")));
        }
        let d2: Vec<f64> = labels
            .iter()
            .enumerate()
            .map(|(i, &l)| crate::matrix::sq_dist(data.row(i), centers.row(l)))
            .collect();
        Ok(Partition {
            distances: d2.iter().map(|d| d.sqrt()).collect(),
            cost: d2.iter().sum(),
            labels,
            k,
            centers: Some(centers),
            medoids: None,
            seed: 0,
        })
    }

    /// Columns `id,label,distance`; medoid partitions add a `# medoids=`
    /// comment line listing the medoid of each label.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csvio::create(path)?;
        if let Some(m) = &self.medoids {
            let list: Vec<String> = m.iter().map(|v| v.to_string()).collect();
            csvio::write_line(&mut w, &[format!("# medoids={}", list.join(" "))], path)?;
        }
        let header = ["id", "label", "distance"].map(String::from);
        csvio::write_line(&mut w, &header, path)?;
        for (i, (l, d)) in self.labels.iter().zip(&self.distances).enumerate() {
            csvio::write_line(
                &mut w,
                &[i.to_string(), l.to_string(), format!("{d}")],
                path,
            )?;
        }
        csvio::finish(w, path)
    }

    pub fn read_csv(path: &Path) -> Result<Self> {
        let table = csvio::read_numeric_file(path)?;
        let mut labels = Vec::with_capacity(table.rows.len());
        let mut distances = Vec::with_capacity(table.rows.len());
        for (i, row) in table.rows.iter().enumerate() {
            let (id, label) = match row.as_slice() {
                [id, label] | [id, label, _] => (*id, *label),
                _ => {
                    return Err(Error::parse(
                        path,
                        format!("row {i}: expected id,label[,distance]"),
                    ))
                }
            };
            if id != i as f64 || label < 0.0 || label.fract() != 0.0 {
                return Err(Error::parse(path, format!("row {i}: bad id or label")));
            }
            labels.push(label as usize);
            distances.push(row.get(2).copied().unwrap_or(0.0));
        }
        let mut p =
            Partition::from_labels(labels).map_err(|e| Error::parse(path, e.to_string()))?;
        p.distances = distances;
        if let Some(list) = table
            .comments
            .iter()
            .find_map(|c| c.strip_prefix("medoids="))
        {
            let medoids: std::result::Result<Vec<usize>, _> =
                list.split_whitespace().map(str::parse).collect();
            let medoids =
                medoids.map_err(|e| Error::parse(path, format!("bad medoid list: {e}")))?;
            if medoids.len() != p.k || medoids.iter().any(|&m| m >= p.len()) {
                return Err(Error::parse(path, "medoid list does not match the labels"));
            }
            p.medoids = Some(medoids);
        }
        Ok(p)
    }
}

fn check_data(data: &Matrix, k: usize) -> Result<()> {
    let n = data.rows();
    if n == 0 || data.cols() == 0 {
        return Err(Error::invalid("empty data matrix"));
    }
    if k == 0 || k > n {
        return Err(Error::invalid(format!("k = {k} must lie in 1..={n}")));
    }
    if data.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(Error::invalid("data matrix contains non-finite values"));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_keeps_labels_and_medoids() {
        let d = crate::dissimilarity::DissimilarityMatrix::from_fn(6, |i, j| {
            (i as f64 - j as f64).abs()
        })
        .unwrap();
        let p = pam(&d, 2, 0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        p.write_csv(&path).unwrap();
        let back = Partition::read_csv(&path).unwrap();
        assert_eq!(back.labels(), p.labels());
        assert_eq!(back.medoids(), p.medoids());
        assert_eq!(back.distances(), p.distances());
    }
}
