use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of clusters handled by the exact label matching.
pub const MAX_MATCH_CLUSTERS: usize = 12;

/// `r × c` table of label co-occurrences, rows indexed by `a`, columns by `b`.
pub fn contingency(a: &[usize], b: &[usize]) -> Result<Vec<Vec<u64>>> {
    if a.len() != b.len() {
        return Err(Error::invalid(format!(
            "label vectors differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::invalid("empty label vectors"));
    }
    let r = a.iter().max().unwrap() + 1;
    let c = b.iter().max().unwrap() + 1;
    let mut t = vec![vec![0u64; c]; r];
    for (&x, &y) in a.iter().zip(b) {
        t[x][y] += 1;
    }
    Ok(t)
}

/// Smallest number of items whose predicted label disagrees with the truth
/// under the best one-to-one matching of labels.
pub fn misclassification(truth: &[usize], predicted: &[usize]) -> Result<usize> {
    best_matching(truth, predicted).map(|(m, _)| m)
}

/// Optimal matching by dynamic programming over subsets of columns.
/// Returns the misclassified count and, per predicted label, its true class.
fn best_matching(truth: &[usize], predicted: &[usize]) -> Result<(usize, Vec<Option<usize>>)> {
    let t = contingency(truth, predicted)?;
    let (r, c) = (t.len(), t[0].len());
    let size = r.max(c);
    if size > MAX_MATCH_CLUSTERS {
        return Err(Error::invalid(format!(
            "exact matching supports at most {MAX_MATCH_CLUSTERS} labels, got {size}"
        )));
    }
    let weight = |i: usize, j: usize| if i < r && j < c { t[i][j] } else { 0 };
    // best[mask]: largest matched count assigning rows 0..popcount(mask) to the columns in mask
    let mut best = vec![None::<(u64, usize)>; 1 << size];
    best[0] = Some((0, 0));
    for mask in 0..(1usize << size) {
        let Some((v, _)) = best[mask] else { continue };
        let row = mask.count_ones() as usize;
        if row == size {
            continue;
        }
        for col in 0..size {
            if mask >> col & 1 == 0 {
                let next = mask | 1 << col;
                let cand = v + weight(row, col);
                if best[next].is_none_or(|(b, _)| cand > b) {
                    best[next] = Some((cand, col));
                }
            }
        }
    }
    let mut matching = vec![None; c];
    let mut mask = (1usize << size) - 1;
    for row in (0..size).rev() {
        let col = best[mask].unwrap().1;
        if row < r && col < c {
            matching[col] = Some(row);
        }
        mask &= !(1 << col);
    }
    let matched = best[(1 << size) - 1].unwrap().0 as usize;
    Ok((truth.len() - matched, matching))
}

fn choose2(x: u64) -> f64 {
    (x as f64) * (x.saturating_sub(1) as f64) / 2.0
}

/// Rand index and Hubert–Arabie adjusted Rand index.
///
/// When the adjustment is undefined (both partitions trivial in the same
/// way), ARI is 1 for identical partitions and 0 otherwise.
pub fn rand_indices(a: &[usize], b: &[usize]) -> Result<(f64, f64)> {
    if a.len() < 2 {
        return Err(Error::invalid(
            "Rand indices need at least two observations",
        ));
    }
    let t = contingency(a, b)?;
    let n = a.len() as u64;
    let total = choose2(n);
    let sum_cells: f64 = t.iter().flatten().map(|&x| choose2(x)).sum();
    let sum_rows: f64 = t.iter().map(|r| choose2(r.iter().sum())).sum();
    let cols = t[0].len();
    let sum_cols: f64 = (0..cols)
        .map(|j| choose2(t.iter().map(|r| r[j]).sum()))
        .sum();
    let rand = (total + 2.0 * sum_cells - sum_rows - sum_cols) / total;
    let expected = sum_rows * sum_cols / total;
    let max = 0.5 * (sum_rows + sum_cols);
    let ari = if max - expected == 0.0 {
        if rand == 1.0 {
            1.0
        } else {
            0.0
        }
    } else {
        (sum_cells - expected) / (max - expected)
    };
    Ok((rand, ari))
}

/// External validation of a partition against known classes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub n: usize,
    pub misclassified: usize,
    pub misclassification_rate: f64,
    pub rand: f64,
    pub adjusted_rand: f64,
    /// Rows: true classes; columns: predicted clusters.
    pub contingency: Vec<Vec<u64>>,
    /// True class matched to each predicted cluster (`None` when unmatched).
    pub matching: Vec<Option<usize>>,
}

impl ValidationReport {
    pub fn new(truth: &[usize], predicted: &[usize]) -> Result<Self> {
        let (misclassified, matching) = best_matching(truth, predicted)?;
        let (rand, adjusted_rand) = rand_indices(truth, predicted)?;
        Ok(ValidationReport {
            n: truth.len(),
            misclassified,
            misclassification_rate: misclassified as f64 / truth.len() as f64,
            rand,
            adjusted_rand,
            contingency: contingency(truth, predicted)?,
            matching,
        })
    }

    pub fn write_json(&self, path: &std::path::Path) -> Result<()> {
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::invalid(e.to_string()))?;
        crate::select::write_json(path, &text)
    }
}
