//! Features, selection and k-means on the three-class benchmark, scored
//! against the known classes.

use wavecluster::bench::scaled_columns;
use wavecluster::cluster::{kmeans, KMeansConfig};
use wavecluster::dwt::{extract_features, FeatureKind, WaveletFilter};
use wavecluster::eval::ValidationReport;
use wavecluster::select::{select_features, SelectionConfig};
use wavecluster::sim::gen_benchmark;

fn main() -> Result<(), wavecluster::Error> {
    let data = gen_benchmark(11)?;
    let filter = WaveletFilter::symmlet6();
    let cfg = KMeansConfig::default();
    for kind in [FeatureKind::Ac, FeatureKind::LogitRc] {
        let features = extract_features(&data.dataset, &filter, kind)?;
        let report = select_features(&features, 3, &SelectionConfig::default(), 11)?;
        let cols = if report.no_structure {
            (0..features.cols()).collect()
        } else {
            report.selected.clone()
        };
        let x = scaled_columns(features.matrix(), &cols);
        let p = kmeans(&x, 3, &cfg, 11)?;
        let v = ValidationReport::new(&data.labels, p.labels())?;
        println!(
            "{kind:>8}: scales {:?}, {} of {} misclassified, ARI {:.3}",
            report.selected_scales, v.misclassified, v.n, v.adjusted_rand
        );
    }
    let raw = kmeans(&data.dataset.to_matrix(), 3, &cfg, 11)?;
    let v = ValidationReport::new(&data.labels, raw.labels())?;
    println!(
        "     raw: {} of {} misclassified, ARI {:.3}",
        v.misclassified, v.n, v.adjusted_rand
    );
    Ok(())
}
