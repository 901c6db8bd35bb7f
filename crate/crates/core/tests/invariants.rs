use proptest::prelude::*;

use wavecluster::cluster::{kmeans, KMeansConfig, Partition};
use wavecluster::dissimilarity::DissimilarityMatrix;
use wavecluster::dwt::{
    dwt_forward, dwt_inverse, energy_contributions, relative_contributions, WaveletFilter,
};
use wavecluster::eval::{misclassification, rand_indices, ValidationReport};
use wavecluster::select::range_transform;
use wavecluster::Matrix;

fn dyadic_curve() -> impl Strategy<Value = Vec<f64>> {
    (2u32..8).prop_flat_map(|j| prop::collection::vec(-100.0f64..100.0, 1usize << j))
}

fn labels(n: usize, k: usize) -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(0..k, n)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn dwt_round_trips(z in dyadic_curve()) {
        for f in [WaveletFilter::haar(), WaveletFilter::symmlet6()] {
            let back = dwt_inverse(&dwt_forward(&z, &f).unwrap()).unwrap();
            let scale = z.iter().fold(1.0f64, |m, v| m.max(v.abs()));
            for (a, b) in z.iter().zip(&back) {
                prop_assert!((a - b).abs() <= 1e-10 * scale);
            }
        }
    }

    #[test]
    fn relative_contributions_sum_to_one(z in dyadic_curve()) {
        let ac = energy_contributions(&dwt_forward(&z, &WaveletFilter::symmlet6()).unwrap());
        prop_assume!(ac.iter().sum::<f64>() > 1e-9);
        let (rc, logit) = relative_contributions(&ac).unwrap();
        prop_assert!((rc.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(logit.iter().all(|v| v.is_finite()));
    }

    #[test]
    fn range_transform_lands_in_unit_interval(col in prop::collection::vec(-1e6f64..1e6, 1..50)) {
        let t = range_transform(&col);
        prop_assert!(t.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn rand_indices_are_symmetric_and_bounded(pair in (2usize..40).prop_flat_map(|n| (labels(n, 4), labels(n, 4)))) {
        let (a, b) = pair;
        let (r1, x1) = rand_indices(&a, &b).unwrap();
        let (r2, x2) = rand_indices(&b, &a).unwrap();
        prop_assert!((r1 - r2).abs() < 1e-15 && (x1 - x2).abs() < 1e-12);
        prop_assert!((0.0..=1.0).contains(&r1));
        prop_assert!(x1 <= 1.0 + 1e-12);
    }

    #[test]
    fn relabeling_is_a_perfect_match(a in labels(30, 5), perm in Just([3usize, 0, 4, 1, 2])) {
        let b: Vec<usize> = a.iter().map(|&l| perm[l]).collect();
        prop_assert_eq!(misclassification(&a, &b).unwrap(), 0);
        let (r, _) = rand_indices(&a, &b).unwrap();
        prop_assert_eq!(r, 1.0);
    }

    #[test]
    fn misclassification_is_bounded(pair in (2usize..40).prop_flat_map(|n| (labels(n, 3), labels(n, 4)))) {
        let (a, b) = pair;
        let m = misclassification(&a, &b).unwrap();
        prop_assert!(m <= a.len());
        let report = ValidationReport::new(&a, &b).unwrap();
        prop_assert_eq!(report.misclassified, m);
    }

    #[test]
    fn kmeans_labels_nearest_center(rows in prop::collection::vec(prop::collection::vec(-10.0f64..10.0, 3), 6..30), k in 1usize..4) {
        let data = Matrix::from_rows(&rows).unwrap();
        let cfg = KMeansConfig { restarts: 2, ..Default::default() };
        let p = kmeans(&data, k, &cfg, 1).unwrap();
        let centers = p.centers().unwrap();
        for (i, row) in rows.iter().enumerate() {
            let d = |c: usize| -> f64 { row.iter().zip(centers.row(c)).map(|(x, y)| (x - y) * (x - y)).sum() };
            let own = d(p.labels()[i]);
            prop_assert!((0..centers.rows()).all(|c| own <= d(c) + 1e-9));
        }
    }

    #[test]
    fn partition_csv_round_trips(l in labels(20, 4)) {
        let p = Partition::from_labels(l).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        p.write_csv(&path).unwrap();
        let back = Partition::read_csv(&path).unwrap();
        prop_assert_eq!(back.labels(), p.labels());
    }

    #[test]
    fn dissimilarity_csv_round_trips(points in prop::collection::vec(-1e3f64..1e3, 2..12)) {
        let n = points.len();
        let d = DissimilarityMatrix::from_fn(n, |i, j| (points[i] - points[j]).abs()).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        d.write_csv(&path).unwrap();
        let back = DissimilarityMatrix::read_csv(&path).unwrap();
        prop_assert_eq!(back.values(), d.values());
    }
}
