use super::distance::Metric;
use crate::{Error, Result};

/// Silhouette analysis of one labeling.
#[derive(Debug, Clone)]
pub struct Silhouette {
    /// `(b - a) / max(a, b)` per point; singletons score 0.
    pub per_point: Vec<f64>,
    pub mean: f64,
    pub cluster_means: Vec<f64>,
    /// Population standard deviation of the per-cluster means.
    pub std_across_clusters: f64,
}

fn cluster_sizes(labels: &[usize]) -> Result<Vec<usize>> {
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut sizes = vec![0usize; k];
    for &label in labels {
        sizes[label] += 1;
    }
    if let Some(empty) = sizes.iter().position(|&s| s == 0) {
        return Err(Error::InvalidParameter(format!("cluster {empty} is empty")));
    }
    Ok(sizes)
}

/// Per-point silhouette values with the aggregates the clustering reports
/// use: the mean over points, per-cluster means, and their spread.
///
/// `a` is the mean intra-cluster distance excluding the point itself; `b`
/// is the smallest mean distance to any other cluster. Euclidean distances.
pub fn silhouette(points: &[Vec<f64>], labels: &[usize]) -> Result<Silhouette> {
    if points.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} points vs {} labels",
            points.len(),
            labels.len()
        )));
    }
    let sizes = cluster_sizes(labels)?;
    let k = sizes.len();
    if k < 2 {
        return Err(Error::InvalidParameter(
            "silhouette needs at least two clusters".into(),
        ));
    }
    let n = points.len();
    let mut per_point = Vec::with_capacity(n);
    for i in 0..n {
        if sizes[labels[i]] == 1 {
            per_point.push(0.0);
            continue;
        }
        // Mean distance from point i to every cluster.
        let mut sums = vec![0.0; k];
        for j in 0..n {
            if i == j {
                continue;
            }
            sums[labels[j]] += Metric::Euclidean.distance(&points[i], &points[j]);
        }
        let own = labels[i];
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        per_point.push(if denom == 0.0 { 0.0 } else { (b - a) / denom });
    }
    let mean = per_point.iter().sum::<f64>() / n as f64;
    let mut cluster_means = vec![0.0; k];
    for (&label, s) in labels.iter().zip(&per_point) {
        cluster_means[label] += s;
    }
    for (m, &size) in cluster_means.iter_mut().zip(&sizes) {
        *m /= size as f64;
    }
    let grand = cluster_means.iter().sum::<f64>() / k as f64;
    let std_across_clusters = (cluster_means
        .iter()
        .map(|m| (m - grand) * (m - grand))
        .sum::<f64>()
        / k as f64)
        .sqrt();
    Ok(Silhouette {
        per_point,
        mean,
        cluster_means,
        std_across_clusters,
    })
}

/// Davies-Bouldin index: mean over clusters of the worst
/// `(S_i + S_j) / M_ij`, with `S` the mean distance to the centroid and `M`
/// the centroid distance. Lower is better. Euclidean throughout.
pub fn davies_bouldin(points: &[Vec<f64>], labels: &[usize]) -> Result<f64> {
    if points.len() != labels.len() {
        return Err(Error::DimensionMismatch(format!(
            "{} points vs {} labels",
            points.len(),
            labels.len()
        )));
    }
    let sizes = cluster_sizes(labels)?;
    let k = sizes.len();
    if k < 2 {
        return Err(Error::InvalidParameter(
            "davies-bouldin needs at least two clusters".into(),
        ));
    }
    let dim = points[0].len();
    let mut centroids = vec![vec![0.0; dim]; k];
    for (p, &label) in points.iter().zip(labels) {
        for (c, v) in centroids[label].iter_mut().zip(p) {
            *c += v;
        }
    }
    for (c, &size) in centroids.iter_mut().zip(&sizes) {
        for v in c.iter_mut() {
            *v /= size as f64;
        }
    }
    let mut dispersion = vec![0.0; k];
    for (p, &label) in points.iter().zip(labels) {
        dispersion[label] += Metric::Euclidean.distance(p, &centroids[label]);
    }
    for (s, &size) in dispersion.iter_mut().zip(&sizes) {
        *s /= size as f64;
    }
    let mut total = 0.0;
    for i in 0..k {
        let mut worst = 0.0f64;
        for j in 0..k {
            if i == j {
                continue;
            }
            let m = Metric::Euclidean.distance(&centroids[i], &centroids[j]);
            if m == 0.0 {
                return Err(Error::Degenerate(format!(
                    "clusters {i} and {j} have coincident centroids"
                )));
            }
            worst = worst.max((dispersion[i] + dispersion[j]) / m);
        }
        total += worst;
    }
    Ok(total / k as f64)
}
