//! The l1-penalized reconstruction underneath template matching.
//!
//! A target is expressed over a dictionary of unit-norm exemplar columns by
//! minimizing `0.5 * ||A x - y||^2 + lambda * ||x||_1` (the penalized
//! relaxation of equality-constrained l1 recovery, which stays well-posed
//! when the target contains an overlay no dictionary column can explain).
//! The solver is cyclic coordinate descent with soft thresholding: each
//! coordinate update is an exact minimization, so the objective never
//! increases.

use crate::image::PixelVector;
use crate::{Error, Result};

/// Default convergence tolerance on the max per-sweep coefficient change.
pub const DEFAULT_TOL: f64 = 1e-6;
/// Default cap on coordinate-descent sweeps.
pub const DEFAULT_MAX_ITER: usize = 1000;

/// Matrix of unit-l2 exemplar columns, grouped by template class.
///
/// Column `j` belongs to template `template_ids[j]`; ids are contiguous from
/// zero and columns of one template are adjacent. The Gram matrix is
/// precomputed once since dictionaries are immutable and solves are many.
#[derive(Debug, Clone)]
pub struct Dictionary {
    n: usize,
    columns: Vec<f64>, // column-major, n * m
    template_ids: Vec<usize>,
    class_counts: Vec<usize>,
    gram: Vec<f64>, // m * m
}

impl Dictionary {
    /// Build from unit-norm columns. Norms must already be 1 within 1e-9.
    pub fn new(columns: Vec<PixelVector>, template_ids: Vec<usize>) -> Result<Self> {
        if columns.is_empty() {
            return Err(Error::EmptyInput("dictionary needs at least one column"));
        }
        if columns.len() != template_ids.len() {
            return Err(Error::DimensionMismatch(format!(
                "{} columns but {} template ids",
                columns.len(),
                template_ids.len()
            )));
        }
        let n = columns[0].dim();
        let mut flat = Vec::with_capacity(n * columns.len());
        for col in &columns {
            if col.dim() != n {
                return Err(Error::DimensionMismatch(format!(
                    "column dim {} != {}",
                    col.dim(),
                    n
                )));
            }
            let norm = col.norm_l2();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidParameter(format!(
                    "dictionary column has l2 norm {norm}, expected 1"
                )));
            }
            flat.extend_from_slice(col.values());
        }
        let k = template_ids.iter().copied().max().unwrap() + 1;
        let mut class_counts = vec![0usize; k];
        let mut prev = 0usize;
        for &id in &template_ids {
            if id < prev {
                return Err(Error::InvalidParameter(
                    "dictionary columns must be grouped by template id".into(),
                ));
            }
            if id > prev && id != prev + 1 {
                return Err(Error::InvalidParameter(
                    "template ids must be contiguous from 0".into(),
                ));
            }
            prev = id;
            class_counts[id] += 1;
        }
        if template_ids[0] != 0 {
            return Err(Error::InvalidParameter(
                "template ids must start at 0".into(),
            ));
        }
        let gram = compute_gram(&flat, n, columns.len());
        Ok(Self {
            n,
            columns: flat,
            template_ids,
            class_counts,
            gram,
        })
    }

    /// Normalize arbitrary columns to unit l2 and build; zero columns fail.
    pub fn from_unnormalized(columns: Vec<PixelVector>, template_ids: Vec<usize>) -> Result<Self> {
        let unit = columns
            .iter()
            .map(|c| c.unit())
            .collect::<Result<Vec<_>>>()?;
        Self::new(unit, template_ids)
    }

    /// Signal dimension n.
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Number of columns m.
    pub fn num_columns(&self) -> usize {
        self.template_ids.len()
    }

    /// Number of template classes k.
    pub fn num_templates(&self) -> usize {
        self.class_counts.len()
    }

    /// Columns per template class.
    pub fn class_counts(&self) -> &[usize] {
        &self.class_counts
    }

    pub fn template_ids(&self) -> &[usize] {
        &self.template_ids
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.columns[j * self.n..(j + 1) * self.n]
    }

    /// `A^T y`.
    pub fn correlations(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.n {
            return Err(Error::DimensionMismatch(format!(
                "target dim {} != dictionary dim {}",
                y.len(),
                self.n
            )));
        }
        Ok((0..self.num_columns())
            .map(|j| dot(self.column(j), y))
            .collect())
    }

    /// `A x` for a coefficient vector.
    pub fn synthesize(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        if coeffs.len() != self.num_columns() {
            return Err(Error::DimensionMismatch(format!(
                "{} coefficients for {} columns",
                coeffs.len(),
                self.num_columns()
            )));
        }
        let mut out = vec![0.0; self.n];
        for (j, &c) in coeffs.iter().enumerate() {
            if c != 0.0 {
                for (o, a) in out.iter_mut().zip(self.column(j)) {
                    *o += c * a;
                }
            }
        }
        Ok(out)
    }
}

fn compute_gram(flat: &[f64], n: usize, m: usize) -> Vec<f64> {
    let mut gram = vec![0.0; m * m];
    for i in 0..m {
        for j in i..m {
            let g = dot(&flat[i * n..(i + 1) * n], &flat[j * n..(j + 1) * n]);
            gram[i * m + j] = g;
            gram[j * m + i] = g;
        }
    }
    gram
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Solver output: coefficients plus diagnostics.
#[derive(Debug, Clone)]
pub struct SparseCode {
    pub coeffs: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Final value of `0.5 * ||A x - y||^2 + lambda * ||x||_1`.
    pub objective: f64,
}

fn soft_threshold(z: f64, t: f64) -> f64 {
    if z > t {
        z - t
    } else if z < -t {
        z + t
    } else {
        0.0
    }
}

/// Minimize `0.5 * ||A x - y||^2 + lambda * ||x||_1` by cyclic coordinate
/// descent. Converged means the largest coefficient change over a sweep
/// dropped below `tol` within `max_iter` sweeps.
pub fn solve_l1(
    dict: &Dictionary,
    y: &PixelVector,
    lambda: f64,
    tol: f64,
    max_iter: usize,
) -> Result<SparseCode> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "lambda must be positive and finite, got {lambda}"
        )));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "tol must be positive and finite, got {tol}"
        )));
    }
    if y.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("solver target"));
    }
    let m = dict.num_columns();
    let corr = dict.correlations(y.values())?;
    let gram = &dict.gram;

    let mut x = vec![0.0; m];
    // q = G x, maintained incrementally; one coordinate update costs O(m).
    let mut q = vec![0.0; m];
    let mut iterations = 0;
    let mut converged = false;
    while iterations < max_iter {
        let mut max_change: f64 = 0.0;
        for j in 0..m {
            let gjj = gram[j * m + j];
            let z = corr[j] - (q[j] - gjj * x[j]);
            let x_new = soft_threshold(z, lambda) / gjj;
            let delta = x_new - x[j];
            if delta != 0.0 {
                let row = &gram[j * m..(j + 1) * m];
                for (qv, g) in q.iter_mut().zip(row) {
                    *qv += delta * g;
                }
                x[j] = x_new;
            }
            max_change = max_change.max(delta.abs());
        }
        iterations += 1;
        if max_change < tol {
            converged = true;
            break;
        }
    }

    let objective = objective_value(dict, &x, y.values(), lambda)?;
    Ok(SparseCode {
        coeffs: x,
        iterations,
        converged,
        objective,
    })
}

/// `0.5 * ||A x - y||^2 + lambda * ||x||_1`, computed from the columns
/// directly rather than through the Gram identity.
pub fn objective_value(dict: &Dictionary, coeffs: &[f64], y: &[f64], lambda: f64) -> Result<f64> {
    let recon = dict.synthesize(coeffs)?;
    if y.len() != recon.len() {
        return Err(Error::DimensionMismatch(format!(
            "target dim {} != dictionary dim {}",
            y.len(),
            recon.len()
        )));
    }
    let sq: f64 = recon
        .iter()
        .zip(y)
        .map(|(r, t)| (r - t) * (r - t))
        .sum();
    let l1: f64 = coeffs.iter().map(|c| c.abs()).sum();
    Ok(0.5 * sq + lambda * l1)
}

/// `||A x - y||_2`.
pub fn residual_norm(dict: &Dictionary, code: &SparseCode, y: &PixelVector) -> Result<f64> {
    let recon = dict.synthesize(&code.coeffs)?;
    if y.dim() != recon.len() {
        return Err(Error::DimensionMismatch(format!(
            "target dim {} != dictionary dim {}",
            y.dim(),
            recon.len()
        )));
    }
    Ok(recon
        .iter()
        .zip(y.values())
        .map(|(r, t)| (r - t) * (r - t))
        .sum::<f64>()
        .sqrt())
}
