use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

use crate::matcher::mix_seed;
use crate::{Error, Result};

/// How many independent k-means++ starts each call makes; the lowest-inertia
/// run wins.
pub const RESTARTS: usize = 5;

#[derive(Debug, Clone)]
pub struct ClusterAssignment {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub inertia: f64,
    pub iterations: usize,
}

/// Seeded k-means++ with Lloyd iterations to a label fixpoint.
///
/// Runs [`RESTARTS`] restarts and keeps the best inertia. Restarts that end
/// up with an empty cluster are retried with fresh sub-seeds; every cluster
/// of the returned assignment is non-empty.
pub fn kmeans(
    points: &[Vec<f64>],
    k: usize,
    seed: u64,
    max_iter: usize,
) -> Result<ClusterAssignment> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyInput("no points to cluster"));
    }
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!(
            "k = {k} must be in 1..={n}"
        )));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch("points of differing dims".into()));
    }

    let mut best: Option<ClusterAssignment> = None;
    let mut successes = 0;
    let mut attempt = 0u64;
    // Allow extra attempts so empty-cluster runs do not eat the restart
    // budget on degenerate inputs.
    while successes < RESTARTS && attempt < (RESTARTS * 8) as u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, attempt));
        attempt += 1;
        if let Some(result) = lloyd(points, k, max_iter, &mut rng) {
            if best.as_ref().map_or(true, |b| result.inertia < b.inertia) {
                best = Some(result);
            }
            successes += 1;
        }
    }
    best.ok_or_else(|| {
        Error::Degenerate(format!(
            "k-means could not find {k} non-empty clusters (too few distinct points?)"
        ))
    })
}

fn lloyd(
    points: &[Vec<f64>],
    k: usize,
    max_iter: usize,
    rng: &mut ChaCha8Rng,
) -> Option<ClusterAssignment> {
    let n = points.len();
    let mut centroids = plus_plus_init(points, k, rng);
    let mut labels = vec![usize::MAX; n];
    let mut iterations = 0;
    loop {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let label = nearest(p, &centroids);
            if labels[i] != label {
                labels[i] = label;
                changed = true;
            }
        }
        if !changed || iterations >= max_iter {
            break;
        }
        let mut sums = vec![vec![0.0; points[0].len()]; k];
        let mut counts = vec![0usize; k];
        for (p, &label) in points.iter().zip(&labels) {
            counts[label] += 1;
            for (s, v) in sums[label].iter_mut().zip(p) {
                *s += v;
            }
        }
        if counts.iter().any(|&c| c == 0) {
            return None;
        }
        for (c, (sum, count)) in centroids.iter_mut().zip(sums.iter().zip(&counts)) {
            for (cv, s) in c.iter_mut().zip(sum) {
                *cv = s / *count as f64;
            }
        }
        iterations += 1;
    }
    let mut counts = vec![0usize; k];
    for &label in &labels {
        counts[label] += 1;
    }
    if counts.iter().any(|&c| c == 0) {
        return None;
    }
    let inertia = points
        .iter()
        .zip(&labels)
        .map(|(p, &label)| sq_dist(p, &centroids[label]))
        .sum();
    Some(ClusterAssignment {
        labels,
        centroids,
        inertia,
        iterations,
    })
}

fn plus_plus_init(points: &[Vec<f64>], k: usize, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = Vec::with_capacity(k);
    centroids.push(points[rng.gen_range(0..n)].clone());
    let mut dist_sq: Vec<f64> = points
        .iter()
        .map(|p| sq_dist(p, &centroids[0]))
        .collect();
    while centroids.len() < k {
        let total: f64 = dist_sq.iter().sum();
        let next = if total > 0.0 {
            let mut draw = rng.gen_range(0.0..total);
            let mut chosen = n - 1;
            for (i, d) in dist_sq.iter().enumerate() {
                if draw < *d {
                    chosen = i;
                    break;
                }
                draw -= d;
            }
            chosen
        } else {
            // All remaining points coincide with a centroid.
            rng.gen_range(0..n)
        };
        centroids.push(points[next].clone());
        for (d, p) in dist_sq.iter_mut().zip(points) {
            *d = d.min(sq_dist(p, centroids.last().unwrap()));
        }
    }
    centroids
}

fn nearest(p: &[f64], centroids: &[Vec<f64>]) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (i, c) in centroids.iter().enumerate() {
        let d = sq_dist(p, c);
        if d < best_d {
            best_d = d;
            best = i;
        }
    }
    best
}

fn sq_dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
