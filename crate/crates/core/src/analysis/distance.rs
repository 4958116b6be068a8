use crate::embed::EmbeddingRecord;
use crate::{Error, Result};

/// Distance metric over feature vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    Euclidean,
    /// `1 - cos(a, b)`; a zero vector is treated as orthogonal to everything.
    Cosine,
}

impl Metric {
    pub fn distance(&self, a: &[f64], b: &[f64]) -> f64 {
        match self {
            Metric::Euclidean => a
                .iter()
                .zip(b)
                .map(|(x, y)| (x - y) * (x - y))
                .sum::<f64>()
                .sqrt(),
            Metric::Cosine => {
                let mut dot = 0.0;
                let mut na = 0.0;
                let mut nb = 0.0;
                for (x, y) in a.iter().zip(b) {
                    dot += x * y;
                    na += x * x;
                    nb += y * y;
                }
                if na == 0.0 || nb == 0.0 {
                    return 1.0;
                }
                1.0 - dot / (na.sqrt() * nb.sqrt())
            }
        }
    }
}

impl std::str::FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "euclidean" => Ok(Metric::Euclidean),
            "cosine" => Ok(Metric::Cosine),
            _ => Err(Error::InvalidParameter(format!(
                "unknown metric {s:?} (expected euclidean or cosine)"
            ))),
        }
    }
}

/// Symmetric distance matrix with a zero diagonal.
#[derive(Debug, Clone)]
pub struct DistanceMatrix {
    n: usize,
    data: Vec<f64>,
}

impl DistanceMatrix {
    /// Validate and wrap a full `n x n` matrix.
    pub fn from_entries(n: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {n}x{n} matrix",
                data.len()
            )));
        }
        for i in 0..n {
            if data[i * n + i] != 0.0 {
                return Err(Error::InvalidParameter("nonzero diagonal".into()));
            }
            for j in 0..i {
                let (a, b) = (data[i * n + j], data[j * n + i]);
                if !a.is_finite() || !b.is_finite() {
                    return Err(Error::NonFinite("distance matrix"));
                }
                if (a - b).abs() > 1e-9 {
                    return Err(Error::InvalidParameter(format!(
                        "asymmetric at ({i},{j}): {a} vs {b}"
                    )));
                }
                if a < 0.0 {
                    return Err(Error::InvalidParameter(format!(
                        "negative distance at ({i},{j}): {a}"
                    )));
                }
            }
        }
        Ok(Self { n, data })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

/// Distances between all pairs of points; symmetric by construction.
pub fn pairwise_distances(points: &[Vec<f64>], metric: Metric) -> Result<DistanceMatrix> {
    let n = points.len();
    if n == 0 {
        return Err(Error::EmptyInput("no points"));
    }
    let dim = points[0].len();
    if points.iter().any(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch("points of differing dims".into()));
    }
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..i {
            let d = metric.distance(&points[i], &points[j]);
            data[i * n + j] = d;
            data[j * n + i] = d;
        }
    }
    DistanceMatrix::from_entries(n, data)
}

/// Pairwise distances over full embeddings (image part plus text part).
pub fn embedding_distances(records: &[EmbeddingRecord], metric: Metric) -> Result<DistanceMatrix> {
    let points: Vec<Vec<f64>> = records.iter().map(|r| r.full()).collect();
    pairwise_distances(&points, metric)
}
