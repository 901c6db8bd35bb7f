//! A few replicates of the features-versus-raw comparison.

use wavecluster::bench::{run_comparison, summarize, ComparisonConfig};

fn main() -> Result<(), wavecluster::Error> {
    let outcomes = run_comparison(&ComparisonConfig::default(), 100, 10)?;
    for o in &outcomes {
        println!(
            "seed {}: scales {:?}, features {} errors, raw {} errors",
            o.seed, o.selected_scales, o.features.misclassified, o.raw.misclassified
        );
    }
    let s = summarize(&outcomes)?;
    println!(
        "mean misclassified {:.2} (features) vs {:.2} (raw), one-sided p = {:.3}",
        s.mean_misclassified_features, s.mean_misclassified_raw, s.p_misclassified
    );
    println!(
        "mean ARI {:.3} vs {:.3}, p = {:.3}",
        s.mean_ari_features, s.mean_ari_raw, s.p_ari
    );
    Ok(())
}
