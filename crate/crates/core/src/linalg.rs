//! Minimal dense linear algebra: Householder QR least squares and
//! triangular inversion. Internal to the regression module.

// Index loops match the matrix notation throughout.
#![allow(clippy::needless_range_loop)]

#[derive(Debug, Clone)]
pub(crate) struct Mat {
    pub rows: usize,
    pub cols: usize,
    data: Vec<f64>,
}

impl Mat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Mat {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

#[derive(Debug)]
pub(crate) struct LeastSquares {
    pub solution: Vec<f64>,
    /// Upper-triangular factor R (p x p); R^T R equals the normal matrix.
    pub r: Mat,
}

/// Least squares via Householder reflections applied to `[a | b]`.
///
/// Returns `Err(k)` when diagonal k of R collapses, i.e. column k is
/// numerically dependent on the preceding columns.
pub(crate) fn least_squares_qr(a: &Mat, b: &[f64]) -> Result<LeastSquares, usize> {
    let m = a.rows;
    let p = a.cols;
    assert_eq!(b.len(), m);
    assert!(m >= p, "need at least as many rows as columns");

    let mut work = a.clone();
    let mut rhs = b.to_vec();

    for k in 0..p {
        // Householder vector for column k below the diagonal.
        let mut norm = 0.0;
        for i in k..m {
            norm += work.at(i, k) * work.at(i, k);
        }
        let norm = norm.sqrt();
        if norm == 0.0 {
            return Err(k);
        }
        let alpha = if work.at(k, k) >= 0.0 { -norm } else { norm };
        let mut v: Vec<f64> = (k..m).map(|i| work.at(i, k)).collect();
        v[0] -= alpha;
        let vtv: f64 = v.iter().map(|x| x * x).sum();
        if vtv > 0.0 {
            // Apply I - 2vv^T/v^Tv to the remaining columns and the rhs.
            for j in k..p {
                let dot: f64 = (k..m).map(|i| v[i - k] * work.at(i, j)).sum();
                let scale = 2.0 * dot / vtv;
                for i in k..m {
                    *work.at_mut(i, j) -= scale * v[i - k];
                }
            }
            let dot: f64 = (k..m).map(|i| v[i - k] * rhs[i]).sum();
            let scale = 2.0 * dot / vtv;
            for i in k..m {
                rhs[i] -= scale * v[i - k];
            }
        }
        *work.at_mut(k, k) = alpha;
        for i in k + 1..m {
            *work.at_mut(i, k) = 0.0;
        }
    }

    let mut r = Mat::zeros(p, p);
    let mut max_diag = 0.0f64;
    for i in 0..p {
        for j in i..p {
            *r.at_mut(i, j) = work.at(i, j);
        }
        max_diag = max_diag.max(r.at(i, i).abs());
    }
    let tol = f64::EPSILON * m as f64 * max_diag;
    for k in 0..p {
        if r.at(k, k).abs() <= tol {
            return Err(k);
        }
    }

    // Back substitution on R x = Q^T b (top p rows).
    let mut x = vec![0.0; p];
    for i in (0..p).rev() {
        let mut acc = rhs[i];
        for j in i + 1..p {
            acc -= r.at(i, j) * x[j];
        }
        x[i] = acc / r.at(i, i);
    }

    Ok(LeastSquares { solution: x, r })
}

/// Inverse of an upper-triangular matrix by back substitution.
pub(crate) fn invert_upper(r: &Mat) -> Mat {
    let p = r.rows;
    let mut inv = Mat::zeros(p, p);
    for col in 0..p {
        for i in (0..=col).rev() {
            let mut acc = if i == col { 1.0 } else { 0.0 };
            for j in i + 1..=col {
                acc -= r.at(i, j) * inv.at(j, col);
            }
            *inv.at_mut(i, col) = acc / r.at(i, i);
        }
    }
    inv
}

/// Symmetric product R^{-1} R^{-T}; only the upper triangle is computed and
/// mirrored, so the result is exactly symmetric.
pub(crate) fn inverse_gram_from_r(r: &Mat) -> Mat {
    let rinv = invert_upper(r);
    let p = r.rows;
    let mut out = Mat::zeros(p, p);
    for i in 0..p {
        for j in i..p {
            let mut acc = 0.0;
            for k in j..p {
                acc += rinv.at(i, k) * rinv.at(j, k);
            }
            *out.at_mut(i, j) = acc;
            *out.at_mut(j, i) = acc;
        }
    }
    out
}
