//! Pick the number of clusters from the jumps of the transformed distortion.

use rand_distr::{Distribution, StandardNormal};
use wavecluster::cluster::{choose_k_by_jump, KMeansConfig};
use wavecluster::rng::stream;
use wavecluster::Matrix;

fn main() -> Result<(), wavecluster::Error> {
    let mut rng = stream(3, "example-blobs", 0);
    let centers = [[0.0, 0.0], [6.0, 0.0], [0.0, 6.0], [6.0, 6.0]];
    let rows: Vec<Vec<f64>> = centers
        .iter()
        .flat_map(|c| std::iter::repeat_n(c, 80))
        .map(|c| {
            c.iter()
                .map(|m| {
                    let e: f64 = StandardNormal.sample(&mut rng);
                    m + 0.8 * e
                })
                .collect::<Vec<f64>>()
        })
        .collect();
    let data = Matrix::from_rows(&rows).expect("equal row lengths");

    let r = choose_k_by_jump(&data, 8, &KMeansConfig::default(), 3)?;
    println!("   K  distortion  transformed      jump");
    for i in 0..r.curve.ks.len() {
        println!(
            "{:>4} {:>11.4} {:>12.4} {:>9.4}",
            r.curve.ks[i], r.curve.distortion[i], r.curve.transformed[i], r.curve.jump[i]
        );
    }
    println!(
        "chosen K = {} (cluster sizes {:?})",
        r.k_star,
        r.best().cluster_sizes()
    );
    Ok(())
}
