//! Screen scale features for cluster structure and pick a subset.

use wavecluster::dwt::{extract_features, FeatureKind, WaveletFilter};
use wavecluster::select::{select_features, select_features_stable, SelectionConfig};
use wavecluster::sim::gen_benchmark;

fn main() -> Result<(), wavecluster::Error> {
    let data = gen_benchmark(7)?;
    let features = extract_features(
        &data.dataset,
        &WaveletFilter::symmlet6(),
        FeatureKind::LogitRc,
    )?;
    let cfg = SelectionConfig::default();

    let report = select_features(&features, 3, &cfg, 7)?;
    println!("screening threshold {:.3}", report.threshold);
    for (col, idx) in report.index.iter().enumerate() {
        let mark = if report.screened.contains(&col) {
            "kept"
        } else {
            "dropped"
        };
        println!("  {:<14} index {idx:.3} {mark}", features.column_label(col));
    }
    for s in &report.best_per_size {
        println!(
            "  best subset of size {}: {:?} (SSE {:.3})",
            s.size, s.features, s.sse
        );
    }
    println!("selected scales {:?}", report.selected_scales);

    let stable = select_features_stable(&features, 5, &cfg, 7)?;
    println!(
        "stable over K = 2..5: scales {:?}, chosen for {} values of K",
        stable.selected_scales, stable.support
    );
    Ok(())
}
