//! External validation and internal diagnostics of partitions.

mod graph;
mod shadow;
mod validation;

pub use graph::{neighborhood_graph, GraphEdge, NeighborhoodGraph, OUTER_FACTOR};
pub use shadow::{centroids, shadow_values, shadow_values_dissimilarity};
pub use validation::{
    contingency, misclassification, rand_indices, ValidationReport, MAX_MATCH_CLUSTERS,
};
