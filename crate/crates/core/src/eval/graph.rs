use std::fmt::Write as _;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use super::shadow::{centroids, own_and_second, shadow};
use crate::cluster::Partition;
use crate::csvio;
use crate::error::{Error, Result};
use crate::matrix::{sq_dist, Matrix};

/// Multiplier of the median member distance defining the outer region.
pub const OUTER_FACTOR: f64 = 2.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub from: usize,
    pub to: usize,
    /// Mean shadow value of the observations whose two nearest centers are `from` and `to`.
    pub weight: f64,
    pub count: usize,
}

/// Cluster centers in the principal plane, linked by mean shadow values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeighborhoodGraph {
    /// Projected centers, one `[pc1, pc2]` per cluster.
    pub nodes: Vec<[f64; 2]>,
    /// Projected observations.
    pub points: Vec<[f64; 2]>,
    pub labels: Vec<usize>,
    pub edges: Vec<GraphEdge>,
    /// Per cluster: median distance of members to their center (full space).
    pub median_distance: Vec<f64>,
    /// Observations within the median distance of their center.
    pub inner: Vec<Vec<usize>>,
    /// Observations within `2.5 ×` the median distance.
    pub outer: Vec<Vec<usize>>,
    /// Convex hull vertices of `inner` / `outer`, counter-clockwise.
    pub inner_hull: Vec<Vec<usize>>,
    pub outer_hull: Vec<Vec<usize>>,
    /// Set when the covariance has rank below two; the second axis is then zero.
    pub degenerate: bool,
}

/// Builds the neighborhood graph of a partition of the rows of `data`.
pub fn neighborhood_graph(data: &Matrix, partition: &Partition) -> Result<NeighborhoodGraph> {
    let n = data.rows();
    let k = partition.k();
    if k < 2 {
        return Err(Error::invalid(
            "a neighborhood graph needs at least two clusters",
        ));
    }
    if n < k + 2 {
        return Err(Error::invalid(format!(
            "need at least {} observations for {k} clusters, got {n}",
            k + 2
        )));
    }
    let centers = match partition.centers() {
        Some(c) if c.cols() == data.cols() && partition.len() == n => c.clone(),
        _ => centroids(data, partition)?,
    };

    let (axes, degenerate) = principal_axes(data);
    let mean = data.column_means();
    let project = |x: &[f64]| -> [f64; 2] {
        let mut out = [0.0; 2];
        for (o, axis) in out.iter_mut().zip(&axes) {
            *o = x
                .iter()
                .zip(&mean)
                .zip(axis)
                .map(|((v, m), a)| (v - m) * a)
                .sum();
        }
        out
    };

    let labels = partition.labels().to_vec();
    let mut sums = vec![vec![(0.0, 0usize); k]; k];
    let mut own_dist = vec![0.0; n];
    for i in 0..n {
        let dist: Vec<f64> = (0..k)
            .map(|c| sq_dist(data.row(i), centers.row(c)).sqrt())
            .collect();
        let (d1, second, d2) = own_and_second(&dist, labels[i]);
        own_dist[i] = d1;
        let (a, b) = (labels[i].min(second), labels[i].max(second));
        sums[a][b].0 += shadow(d1, d2);
        sums[a][b].1 += 1;
    }
    let mut edges = Vec::new();
    for a in 0..k {
        for b in (a + 1)..k {
            let (s, c) = sums[a][b];
            if c > 0 {
                edges.push(GraphEdge {
                    from: a,
                    to: b,
                    weight: s / c as f64,
                    count: c,
                });
            }
        }
    }

    let points: Vec<[f64; 2]> = (0..n).map(|i| project(data.row(i))).collect();
    let mut median_distance = Vec::with_capacity(k);
    let (mut inner, mut outer, mut inner_hull, mut outer_hull) = (vec![], vec![], vec![], vec![]);
    for c in 0..k {
        let members: Vec<usize> = (0..n).filter(|&i| labels[i] == c).collect();
        let mut d: Vec<f64> = members.iter().map(|&i| own_dist[i]).collect();
        d.sort_by(f64::total_cmp);
        let m = if d.is_empty() {
            0.0
        } else if d.len() % 2 == 1 {
            d[d.len() / 2]
        } else {
            0.5 * (d[d.len() / 2 - 1] + d[d.len() / 2])
        };
        median_distance.push(m);
        let inside = |f: f64| -> Vec<usize> {
            members
                .iter()
                .copied()
                .filter(|&i| own_dist[i] <= f * m)
                .collect()
        };
        let (i_set, o_set) = (inside(1.0), inside(OUTER_FACTOR));
        inner_hull.push(convex_hull(&points, &i_set));
        outer_hull.push(convex_hull(&points, &o_set));
        inner.push(i_set);
        outer.push(o_set);
    }

    Ok(NeighborhoodGraph {
        nodes: (0..k).map(|c| project(centers.row(c))).collect(),
        points,
        labels,
        edges,
        median_distance,
        inner,
        outer,
        inner_hull,
        outer_hull,
        degenerate,
    })
}

/// Two leading eigenvectors of the sample covariance, each with its
/// largest-magnitude component made positive.
fn principal_axes(data: &Matrix) -> ([Vec<f64>; 2], bool) {
    let (n, p) = (data.rows(), data.cols());
    let mean = data.column_means();
    let centered = DMatrix::from_fn(n, p, |i, j| data.get(i, j) - mean[j]);
    let cov = centered.transpose() * &centered / (n.max(2) - 1) as f64;
    let eig = SymmetricEigen::new(cov);
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b]
            .total_cmp(&eig.eigenvalues[a])
            .then(a.cmp(&b))
    });
    let top = eig.eigenvalues[order[0]].max(0.0);
    let tol = 1e-12 * top.max(f64::MIN_POSITIVE);
    let mut axes: [Vec<f64>; 2] = [vec![0.0; p], vec![0.0; p]];
    let mut rank = 0;
    for (slot, &idx) in order.iter().take(2).enumerate() {
        if eig.eigenvalues[idx] > tol {
            let mut v: Vec<f64> = eig.eigenvectors.column(idx).iter().copied().collect();
            let pivot = (0..p).fold(0, |b, i| if v[i].abs() > v[b].abs() { i } else { b });
            if v[pivot] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            axes[slot] = v;
            rank += 1;
        }
    }
    (axes, rank < 2)
}

/// Andrew's monotone chain over a subset of points; returns point indices.
fn convex_hull(points: &[[f64; 2]], subset: &[usize]) -> Vec<usize> {
    let mut idx = subset.to_vec();
    idx.sort_by(|&a, &b| {
        points[a][0]
            .total_cmp(&points[b][0])
            .then(points[a][1].total_cmp(&points[b][1]))
            .then(a.cmp(&b))
    });
    idx.dedup_by(|a, b| points[*a] == points[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let cross = |o: usize, a: usize, b: usize| {
        (points[a][0] - points[o][0]) * (points[b][1] - points[o][1])
            - (points[a][1] - points[o][1]) * (points[b][0] - points[o][0])
    };
    let mut hull: Vec<usize> = Vec::with_capacity(2 * idx.len());
    for pass in 0..2 {
        let start = hull.len();
        let iter: Box<dyn Iterator<Item = &usize>> = if pass == 0 {
            Box::new(idx.iter())
        } else {
            Box::new(idx.iter().rev())
        };
        for &p in iter {
            while hull.len() >= start + 2
                && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0.0
            {
                hull.pop();
            }
            hull.push(p);
        }
        hull.pop();
    }
    hull
}

impl NeighborhoodGraph {
    /// Graphviz description; centers carry their projected position.
    pub fn to_dot(&self) -> String {
        let mut s = String::from("graph neighborhood {\n");
        for (c, [x, y]) in self.nodes.iter().enumerate() {
            let _ = writeln!(s, "  {c} [label=\"{c}\", pos=\"{x},{y}!\"];");
        }
        for e in &self.edges {
            let _ = writeln!(
                s,
                "  {} -- {} [weight={}, penwidth={}];",
                e.from,
                e.to,
                e.weight,
                1.0 + 9.0 * e.weight
            );
        }
        s.push_str("}\n");
        s
    }

    pub fn write_dot(&self, path: &Path) -> Result<()> {
        let mut w = csvio::create(path)?;
        std::io::Write::write_all(&mut w, self.to_dot().as_bytes())
            .map_err(|e| Error::io(path, e))?;
        csvio::finish(w, path)
    }

    /// Columns `kind,id,cluster,pc1,pc2,inner,outer,inner_hull,outer_hull`;
    /// `kind` is `center` or `point`, membership columns are 0/1.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = csvio::create(path)?;
        let header = [
            "kind",
            "id",
            "cluster",
            "pc1",
            "pc2",
            "inner",
            "outer",
            "inner_hull",
            "outer_hull",
        ]
        .map(String::from);
        csvio::write_line(&mut w, &header, path)?;
        for (c, [x, y]) in self.nodes.iter().enumerate() {
            let row = [
                "center".into(),
                c.to_string(),
                c.to_string(),
                format!("{x}"),
                format!("{y}"),
                "0".into(),
                "0".into(),
                "0".into(),
                "0".into(),
            ];
            csvio::write_line(&mut w, &row, path)?;
        }
        let flag = |sets: &[Vec<usize>], c: usize, i: usize| {
            if sets[c].contains(&i) { "1" } else { "0" }.to_string()
        };
        for (i, [x, y]) in self.points.iter().enumerate() {
            let c = self.labels[i];
            let row = [
                "point".into(),
                i.to_string(),
                c.to_string(),
                format!("{x}"),
                format!("{y}"),
                flag(&self.inner, c, i),
                flag(&self.outer, c, i),
                flag(&self.inner_hull, c, i),
                flag(&self.outer_hull, c, i),
            ];
            csvio::write_line(&mut w, &row, path)?;
        }
        csvio::finish(w, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn blob(cx: f64, cy: f64, n: usize, r: f64) -> Vec<Vec<f64>> {
        (0..n)
            .map(|i| {
                let t = i as f64 * 2.399;
                vec![
                    cx + r * t.cos() * (i as f64 / n as f64).sqrt(),
                    cy + r * t.sin() * (i as f64 / n as f64).sqrt(),
                ]
            })
            .collect()
    }

    #[test]
    fn two_far_blobs_give_one_light_edge() {
        let mut rows = blob(0.0, 0.0, 20, 0.5);
        rows.extend(blob(50.0, 0.0, 20, 0.5));
        let data = Matrix::from_rows(&rows).unwrap();
        let p = Partition::from_labels((0..40).map(|i| i / 20).collect()).unwrap();
        let g = neighborhood_graph(&data, &p).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert!(g.edges[0].weight < 0.2);
        assert!(!g.degenerate);
    }

    #[test]
    fn collinear_centers_link_only_neighbors() {
        let mut rows = blob(0.0, 0.0, 15, 1.0);
        rows.extend(blob(10.0, 0.0, 15, 1.0));
        rows.extend(blob(20.0, 0.0, 15, 1.0));
        let data = Matrix::from_rows(&rows).unwrap();
        let p = Partition::from_labels((0..45).map(|i| i / 15).collect()).unwrap();
        let g = neighborhood_graph(&data, &p).unwrap();
        let pairs: Vec<(usize, usize)> = g.edges.iter().map(|e| (e.from, e.to)).collect();
        assert_eq!(pairs, vec![(0, 1), (1, 2)]);
        assert!(g.edges.iter().all(|e| (0.0..=1.0).contains(&e.weight)));
    }

    #[test]
    fn equidistant_points_weigh_one() {
        // every point lies on the bisector of the centers (±1, 0)
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![0.0, i as f64 - 2.5]).collect();
        let data = Matrix::from_rows(&rows).unwrap();
        let centers = Matrix::from_vec(2, 2, vec![-1.0, 0.0, 1.0, 0.0]);
        let p = Partition::with_centers(&data, vec![0, 1, 0, 1, 0, 1], centers).unwrap();
        let g = neighborhood_graph(&data, &p).unwrap();
        assert_eq!(g.edges.len(), 1);
        assert_eq!(g.edges[0].weight, 1.0);
    }

    #[test]
    fn hulls_are_subsets_of_members() {
        let mut rows = blob(0.0, 0.0, 30, 2.0);
        rows.extend(blob(6.0, 3.0, 30, 2.0));
        let data = Matrix::from_rows(&rows).unwrap();
        let p = crate::cluster::kmeans(&data, 2, &Default::default(), 1).unwrap();
        let g = neighborhood_graph(&data, &p).unwrap();
        for c in 0..2 {
            assert!(g.inner_hull[c].iter().all(|i| g.inner[c].contains(i)));
            assert!(g.outer_hull[c].iter().all(|i| g.outer[c].contains(i)));
            assert!(g.inner[c].iter().all(|i| g.outer[c].contains(i)));
            assert!(g.outer_hull[c].len() >= 3);
        }
        let dot = g.to_dot();
        assert!(dot.contains("0 -- 1 [weight="));
    }

    #[test]
    fn hull_of_square_with_interior_point() {
        let pts = [[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]];
        let h = convex_hull(&pts, &[0, 1, 2, 3, 4]);
        assert_eq!(h, vec![0, 1, 2, 3]);
    }

    #[test]
    fn rank_one_data_is_flagged() {
        let rows: Vec<Vec<f64>> = (0..8).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let data = Matrix::from_rows(&rows).unwrap();
        let p = Partition::from_labels((0..8).map(|i| i / 4).collect()).unwrap();
        let g = neighborhood_graph(&data, &p).unwrap();
        assert!(g.degenerate);
        assert!(g.points.iter().all(|q| q[1] == 0.0));
    }
}
