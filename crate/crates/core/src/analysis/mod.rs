//! Evaluation machinery over embeddings: k-means clustering, internal
//! cluster-quality metrics, nearest-neighbor retrieval, pairwise distance
//! matrices, average-linkage trees, and the temporal train/test split
//! enumerator.

mod distance;
mod kmeans;
mod linkage;
mod metrics;
mod retrieve;
mod temporal;

pub use distance::{embedding_distances, pairwise_distances, DistanceMatrix, Metric};
pub use kmeans::{kmeans, ClusterAssignment};
pub use linkage::{upgma, LinkageTree};
pub use metrics::{davies_bouldin, silhouette, Silhouette};
pub use retrieve::knn_retrieve;
pub use temporal::temporal_splits;
