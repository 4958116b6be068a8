//! Independent reference solver for the penalized l1 problem, used to check
//! the coordinate-descent implementation. It never iterates: for every sign
//! pattern in {-1, 0, +1}^m it solves the stationarity equations on the
//! active set directly and keeps the KKT-consistent candidate with the best
//! objective. Exact for any convex instance small enough to enumerate.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn synthesize(cols: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    let n = cols[0].len();
    let mut out = vec![0.0; n];
    for (col, &c) in cols.iter().zip(x) {
        if c != 0.0 {
            for (o, a) in out.iter_mut().zip(col) {
                *o += c * a;
            }
        }
    }
    out
}

pub fn objective(cols: &[Vec<f64>], x: &[f64], y: &[f64], lambda: f64) -> f64 {
    let recon = synthesize(cols, x);
    let sq: f64 = recon.iter().zip(y).map(|(r, t)| (r - t) * (r - t)).sum();
    let l1: f64 = x.iter().map(|v| v.abs()).sum();
    0.5 * sq + lambda * l1
}

/// Gaussian elimination with partial pivoting on an augmented matrix;
/// `None` when singular.
fn gauss_solve(mut m: Vec<Vec<f64>>) -> Option<Vec<f64>> {
    let n = m.len();
    for col in 0..n {
        let pivot = (col..n).max_by(|&a, &b| m[a][col].abs().total_cmp(&m[b][col].abs()))?;
        if m[pivot][col].abs() < 1e-12 {
            return None;
        }
        m.swap(col, pivot);
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = m[row][col] / m[col][col];
            for k in col..=n {
                let v = m[col][k];
                m[row][k] -= factor * v;
            }
        }
    }
    Some((0..n).map(|i| m[i][n] / m[i][i]).collect())
}

/// Global optimum of `0.5 ||A x - y||^2 + lambda ||x||_1` by sign-pattern
/// enumeration; returns `(x, objective)`.
pub fn lasso_optimum(cols: &[Vec<f64>], y: &[f64], lambda: f64) -> (Vec<f64>, f64) {
    let m = cols.len();
    assert!(m <= 8, "enumeration oracle is for tiny instances");
    let mut best: Option<(Vec<f64>, f64)> = None;
    for pattern in 0..3usize.pow(m as u32) {
        let mut signs = vec![0i8; m];
        let mut p = pattern;
        for s in signs.iter_mut() {
            *s = match p % 3 {
                0 => 0,
                1 => 1,
                _ => -1,
            };
            p /= 3;
        }
        let active: Vec<usize> = (0..m).filter(|&j| signs[j] != 0).collect();
        let mut x = vec![0.0; m];
        if !active.is_empty() {
            let s = active.len();
            let mut system = vec![vec![0.0; s + 1]; s];
            for (r, &j) in active.iter().enumerate() {
                for (c, &l) in active.iter().enumerate() {
                    system[r][c] = dot(&cols[j], &cols[l]);
                }
                system[r][s] = dot(&cols[j], y) - lambda * signs[j] as f64;
            }
            let Some(solution) = gauss_solve(system) else {
                continue;
            };
            let mut consistent = true;
            for (r, &j) in active.iter().enumerate() {
                if solution[r] * signs[j] as f64 <= 0.0 {
                    consistent = false;
                    break;
                }
                x[j] = solution[r];
            }
            if !consistent {
                continue;
            }
        }
        let recon = synthesize(cols, &x);
        let residual: Vec<f64> = y.iter().zip(&recon).map(|(t, r)| t - r).collect();
        let dual_ok = (0..m)
            .filter(|&j| signs[j] == 0)
            .all(|j| dot(&cols[j], &residual).abs() <= lambda * (1.0 + 1e-9) + 1e-12);
        if !dual_ok {
            continue;
        }
        let obj = objective(cols, &x, y, lambda);
        if best.as_ref().map_or(true, |(_, b)| obj < *b) {
            best = Some((x, obj));
        }
    }
    best.expect("at least one sign pattern satisfies the optimality conditions")
}

/// Random orthonormal columns via Gram-Schmidt on Gaussian draws.
pub fn orthonormal_columns(
    rng: &mut rand_chacha::ChaCha8Rng,
    n: usize,
    m: usize,
) -> Vec<Vec<f64>> {
    use rand::Rng;
    assert!(m <= n);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(m);
    while cols.len() < m {
        let mut v: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for prev in &cols {
            let proj = dot(&v, prev);
            for (x, p) in v.iter_mut().zip(prev) {
                *x -= proj * p;
            }
        }
        let norm = dot(&v, &v).sqrt();
        if norm < 1e-6 {
            continue;
        }
        for x in v.iter_mut() {
            *x /= norm;
        }
        cols.push(v);
    }
    cols
}
