//! Shadow values and the neighborhood graph of a k-means partition.

use wavecluster::bench::scaled_columns;
use wavecluster::cluster::{kmeans, KMeansConfig};
use wavecluster::dwt::{extract_features, FeatureKind, WaveletFilter};
use wavecluster::eval::{neighborhood_graph, shadow_values};
use wavecluster::sim::gen_benchmark;

fn main() -> Result<(), wavecluster::Error> {
    let data = gen_benchmark(5)?;
    let f = extract_features(&data.dataset, &WaveletFilter::symmlet6(), FeatureKind::Ac)?;
    let x = scaled_columns(f.matrix(), &[0, 1, 2]);
    let p = kmeans(&x, 3, &KMeansConfig::default(), 5)?;

    let s = shadow_values(&x, &p)?;
    for c in 0..p.k() {
        let own: Vec<f64> = s
            .iter()
            .zip(p.labels())
            .filter(|(_, &l)| l == c)
            .map(|(v, _)| *v)
            .collect();
        let mean = own.iter().sum::<f64>() / own.len() as f64;
        println!("cluster {c}: {} curves, mean shadow {mean:.3}", own.len());
    }

    let g = neighborhood_graph(&x, &p)?;
    for e in &g.edges {
        println!(
            "edge {} - {}: weight {:.3} from {} points",
            e.from, e.to, e.weight, e.count
        );
    }
    print!("{}", g.to_dot());
    Ok(())
}
