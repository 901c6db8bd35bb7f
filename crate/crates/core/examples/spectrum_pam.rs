//! WER and MCA dissimilarities between benchmark curves and PAM partitions.

use wavecluster::cluster::{pam, Partition};
use wavecluster::dissimilarity::{
    build_dissimilarity_matrix, DissimilarityConfig, DissimilarityMatrix, Measure,
};
use wavecluster::eval::{shadow_values_dissimilarity, ValidationReport};
use wavecluster::sim::{gen_benchmark_with, BenchmarkConfig};

fn main() -> Result<(), wavecluster::Error> {
    let cfg = BenchmarkConfig {
        per_class: 10,
        length: 256,
        ..Default::default()
    };
    let data = gen_benchmark_with(&cfg, 2)?;
    // the sinus periods span 100-256 samples, so extend the grid to octave 8;
    // independent FAR draws are mutually incoherent, so only the sinus class is tight
    let dcfg = DissimilarityConfig {
        omin: 3,
        omax: 8,
        ..Default::default()
    };
    for measure in [Measure::Wer, Measure::Mca] {
        let diss = build_dissimilarity_matrix(&data.dataset, measure, &dcfg)?;
        let p = pam(&diss, 3, 2)?;
        println!("{measure}:");
        report(&data.labels, &diss, &p)?;
    }
    Ok(())
}

fn report(
    truth: &[usize],
    diss: &DissimilarityMatrix,
    p: &Partition,
) -> Result<(), wavecluster::Error> {
    println!(
        "  medoids {:?}, cost {:.2}, sizes {:?}",
        p.medoids().unwrap_or_default(),
        p.cost(),
        p.cluster_sizes()
    );
    let v = ValidationReport::new(truth, p.labels())?;
    println!(
        "  {} of {} misclassified, ARI {:.3}",
        v.misclassified, v.n, v.adjusted_rand
    );
    let shadows = shadow_values_dissimilarity(diss, p)?;
    println!(
        "  mean shadow value {:.3}",
        shadows.iter().sum::<f64>() / shadows.len() as f64
    );
    Ok(())
}
