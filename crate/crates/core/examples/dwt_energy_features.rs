//! Scale energies of a curve and the absolute and relative feature matrices.

use wavecluster::dwt::{
    dwt_forward, energy_contributions, extract_features, relative_contributions, FeatureKind,
    WaveletFilter,
};
use wavecluster::sim::gen_benchmark;

fn main() -> Result<(), wavecluster::Error> {
    let filter = WaveletFilter::symmlet6();
    let data = gen_benchmark(1)?;
    let w = dwt_forward(data.dataset.curve(0), &filter)?;
    let ac = energy_contributions(&w);
    let (rc, _) = relative_contributions(&ac)?;
    println!("depth J = {}", w.depth());
    for (j, (a, r)) in ac.iter().zip(&rc).enumerate() {
        println!("scale {j}: energy {a:10.3}  share {r:.4}");
    }

    for kind in [FeatureKind::Ac, FeatureKind::LogitRc] {
        let f = extract_features(&data.dataset, &filter, kind)?;
        println!(
            "{kind}: {} x {} matrix, columns {:?}",
            f.rows(),
            f.cols(),
            (0..f.cols()).map(|c| f.column_label(c)).collect::<Vec<_>>()
        );
    }
    Ok(())
}
