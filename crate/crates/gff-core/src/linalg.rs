//! Sparse symmetric matrices, conjugate-gradient solves, and extreme
//! eigenvalue estimates for the reduced Dirichlet forms.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{GffError, Result};

/// Relative residual demanded from iterative solves. The structural
/// identities checked downstream are exact, so this sits far below every
/// Monte Carlo tolerance in the crate.
pub const CG_TOLERANCE: f64 = 1e-12;

/// Symmetric sparse matrix in CSR form. Both triangles are stored.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    /// Build from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; n + 1];
        for &(r, _, _) in triplets {
            counts[r + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let mut col_idx = vec![0usize; triplets.len()];
        let mut values = vec![0.0f64; triplets.len()];
        let mut cursor = counts.clone();
        for &(r, c, v) in triplets {
            let k = cursor[r];
            col_idx[k] = c;
            values[k] = v;
            cursor[r] += 1;
        }
        // sort each row and merge duplicates
        let mut out_col = Vec::with_capacity(col_idx.len());
        let mut out_val = Vec::with_capacity(values.len());
        let mut row_ptr = vec![0usize; n + 1];
        for r in 0..n {
            let lo = counts[r];
            let hi = counts[r + 1];
            let mut row: Vec<(usize, f64)> = (lo..hi).map(|k| (col_idx[k], values[k])).collect();
            row.sort_by_key(|&(c, _)| c);
            for (c, v) in row {
                if let Some(last) = out_col.last() {
                    if *last == c && out_col.len() > row_ptr[r] {
                        let j = out_val.len() - 1;
                        out_val[j] += v;
                        continue;
                    }
                }
                out_col.push(c);
                out_val.push(v);
            }
            row_ptr[r + 1] = out_col.len();
        }
        Self {
            n,
            row_ptr,
            col_idx: out_col,
            values: out_val,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for r in 0..self.n {
            let mut acc = 0.0;
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n, self.n);
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                m[(r, self.col_idx[k])] += self.values[k];
            }
        }
        m
    }
}

/// Subtract the mean, i.e. project onto the mean-zero subspace.
pub fn project_mean_zero(x: &mut [f64]) {
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    for v in x.iter_mut() {
        *v -= mean;
    }
}

#[derive(Debug, Clone, Copy)]
pub struct CgReport {
    pub iterations: usize,
    pub rel_residual: f64,
}

/// Conjugate gradients for SPD systems. When `mean_zero` is set the solve is
/// restricted to the mean-zero subspace (right-hand side and iterates are
/// projected), which computes pseudoinverse applications for singular
/// Laplacians whose kernel is the constants.
pub fn conjugate_gradient(
    a: &CsrMatrix,
    b: &[f64],
    mean_zero: bool,
) -> Result<(Vec<f64>, CgReport)> {
    let n = a.n();
    let mut rhs = b.to_vec();
    if mean_zero {
        project_mean_zero(&mut rhs);
    }
    let b_norm = rhs.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut x = vec![0.0; n];
    if b_norm == 0.0 {
        return Ok((
            x,
            CgReport {
                iterations: 0,
                rel_residual: 0.0,
            },
        ));
    }
    let mut r = rhs.clone();
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    let mut rs_old: f64 = r.iter().map(|v| v * v).sum();
    let max_iter = 20 * n + 200;
    for iter in 0..max_iter {
        a.matvec(&p, &mut ap);
        if mean_zero {
            project_mean_zero(&mut ap);
        }
        let p_ap: f64 = p.iter().zip(&ap).map(|(u, v)| u * v).sum();
        if p_ap <= 0.0 {
            return Err(GffError::Numerical(format!(
                "conjugate gradient hit non-positive curvature p'Ap = {p_ap:.3e}; \
                 the quadratic form is not positive definite on the solve subspace"
            )));
        }
        let alpha = rs_old / p_ap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        if mean_zero {
            project_mean_zero(&mut r);
        }
        let rs_new: f64 = r.iter().map(|v| v * v).sum();
        let rel = rs_new.sqrt() / b_norm;
        if rel < CG_TOLERANCE {
            if mean_zero {
                project_mean_zero(&mut x);
            }
            return Ok((
                x,
                CgReport {
                    iterations: iter + 1,
                    rel_residual: rel,
                },
            ));
        }
        let beta = rs_new / rs_old;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
        rs_old = rs_new;
    }
    Err(GffError::Numerical(format!(
        "conjugate gradient failed to reach {CG_TOLERANCE:.1e} within {max_iter} iterations \
         (last relative residual {:.3e})",
        rs_old.sqrt() / b_norm
    )))
}

/// Extreme eigenvalues (lowest, highest) of a symmetric operator.
#[derive(Debug, Clone, Copy)]
pub struct SpectrumBounds {
    pub min: f64,
    pub max: f64,
}

/// Exact extremes of a dense symmetric matrix, optionally after deflating the
/// constant vector (for the mean-zero form the kernel of the Laplacian is
/// skipped and the smallest nonzero Ritz value is reported).
pub fn dense_spectrum_bounds(m: &DMatrix<f64>, deflate_constant: bool) -> SpectrumBounds {
    let eig = SymmetricEigen::new(m.clone());
    let mut vals: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let max = *vals.last().unwrap();
    let min = if deflate_constant {
        // the constant direction carries eigenvalue ~0; skip the one closest to it
        vals[1]
    } else {
        vals[0]
    };
    SpectrumBounds { min, max }
}

/// Lanczos with full reorthogonalization; deterministic start vector.
/// Ritz values estimate the extreme eigenvalues of large sparse forms where
/// a dense decomposition is out of reach. `deflate_constant` keeps all
/// iterates orthogonal to the constant vector.
pub fn lanczos_spectrum_bounds(
    a: &CsrMatrix,
    deflate_constant: bool,
    steps: usize,
) -> SpectrumBounds {
    let n = a.n();
    let steps = steps
        .min(n.saturating_sub(if deflate_constant { 1 } else { 0 }))
        .max(2);
    // fixed quasi-random start vector
    let mut v = vec![0.0f64; n];
    let mut state: u64 = 0x9e3779b97f4a7c15;
    for vi in v.iter_mut() {
        state = state
            .wrapping_mul(6364136223846793005)
            .wrapping_add(1442695040888963407);
        *vi = ((state >> 11) as f64 / (1u64 << 53) as f64) - 0.5;
    }
    let orth_constant = |x: &mut [f64]| {
        if deflate_constant {
            project_mean_zero(x);
        }
    };
    orth_constant(&mut v);
    normalize(&mut v);

    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut alphas = Vec::with_capacity(steps);
    let mut betas: Vec<f64> = Vec::new();
    let mut w = vec![0.0f64; n];
    for step in 0..steps {
        basis.push(v.clone());
        a.matvec(&v, &mut w);
        orth_constant(&mut w);
        let alpha: f64 = v.iter().zip(&w).map(|(x, y)| x * y).sum();
        alphas.push(alpha);
        // full reorthogonalization against the basis (twice for stability)
        for _ in 0..2 {
            for b in &basis {
                let c: f64 = b.iter().zip(&w).map(|(x, y)| x * y).sum();
                for i in 0..n {
                    w[i] -= c * b[i];
                }
            }
        }
        let beta = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        if step + 1 == steps || beta < 1e-14 {
            break;
        }
        betas.push(beta);
        for i in 0..n {
            v[i] = w[i] / beta;
        }
    }
    let k = alphas.len();
    let mut t = DMatrix::zeros(k, k);
    for i in 0..k {
        t[(i, i)] = alphas[i];
        if i + 1 < k && i < betas.len() {
            t[(i, i + 1)] = betas[i];
            t[(i + 1, i)] = betas[i];
        }
    }
    dense_spectrum_bounds(&t, false)
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm > 0.0 {
        for v in x.iter_mut() {
            *v /= norm;
        }
    }
}

/// Draw a vector with covariance `A^{-1}` given dense SPD `A`:
/// with `A = C C^T` (Cholesky), returns `C^{-T} z`.
pub fn sample_with_precision(a: &DMatrix<f64>, z: &DVector<f64>) -> Result<DVector<f64>> {
    let chol = nalgebra::Cholesky::new(a.clone()).ok_or_else(|| {
        let bounds = dense_spectrum_bounds(a, false);
        GffError::Numerical(format!(
            "Cholesky factorization failed; spectrum [{:.3e}, {:.3e}]",
            bounds.min, bounds.max
        ))
    })?;
    chol.l()
        .tr_solve_lower_triangular(z)
        .ok_or_else(|| GffError::Numerical("triangular solve failed".into()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn laplacian_path(n: usize) -> CsrMatrix {
        // path graph reduced Laplacian (Dirichlet at both virtual ends)
        let mut t = Vec::new();
        for i in 0..n {
            t.push((i, i, 2.0));
            if i + 1 < n {
                t.push((i, i + 1, -1.0));
                t.push((i + 1, i, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, &t)
    }

    #[test]
    fn csr_merges_duplicates() {
        let m = CsrMatrix::from_triplets(2, &[(0, 1, 1.0), (0, 1, 2.0), (1, 0, 3.0), (0, 0, 1.0)]);
        let d = m.to_dense();
        assert_eq!(d[(0, 1)], 3.0);
        assert_eq!(d[(1, 0)], 3.0);
        assert_eq!(d[(0, 0)], 1.0);
    }

    #[test]
    fn cg_solves_tridiagonal_exactly() {
        let n = 50;
        let a = laplacian_path(n);
        let b: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).cos()).collect();
        let (x, report) = conjugate_gradient(&a, &b, false).unwrap();
        assert!(report.rel_residual < CG_TOLERANCE);
        let mut ax = vec![0.0; n];
        a.matvec(&x, &mut ax);
        for i in 0..n {
            assert_relative_eq!(ax[i], b[i], epsilon = 1e-9);
        }
    }

    #[test]
    fn cg_pseudoinverse_on_cycle() {
        // cycle graph Laplacian is singular with constant kernel
        let n = 16;
        let mut t = Vec::new();
        for i in 0..n {
            let j = (i + 1) % n;
            t.push((i, i, 2.0));
            t.push((i, j, -1.0));
            t.push((j, i, -1.0));
        }
        let a = CsrMatrix::from_triplets(n, &t);
        let mut b = vec![0.0; n];
        b[0] = 1.0;
        let (x, _) = conjugate_gradient(&a, &b, true).unwrap();
        // result must be mean-zero and satisfy A x = P b
        assert!(x.iter().sum::<f64>().abs() < 1e-10);
        let mut ax = vec![0.0; n];
        a.matvec(&x, &mut ax);
        let pb: Vec<f64> = b.iter().map(|v| v - 1.0 / n as f64).collect();
        for i in 0..n {
            assert_relative_eq!(ax[i], pb[i], epsilon = 1e-9);
        }
    }

    #[test]
    fn lanczos_brackets_dense_spectrum() {
        let n = 80;
        let a = laplacian_path(n);
        let sparse = lanczos_spectrum_bounds(&a, false, 60);
        let dense = dense_spectrum_bounds(&a.to_dense(), false);
        assert_relative_eq!(sparse.max, dense.max, max_relative = 5e-3);
        // lowest Ritz value upper-bounds the true minimum and is close here
        assert!(sparse.min >= dense.min - 1e-12);
        assert!(sparse.min < dense.min * 10.0 + 1e-6);
    }

    #[test]
    fn precision_sampling_has_right_first_column() {
        // For A = L L^T, pushing the unit vector through C^{-T} reproduces
        // a column of the covariance factor: cov = C^{-T} C^{-1} = A^{-1}.
        let a = laplacian_path(3).to_dense();
        let z = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let x = sample_with_precision(&a, &z).unwrap();
        let z2 = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        let y = sample_with_precision(&a, &z2).unwrap();
        // covariance of (x, y) columns assembles to inv(a)
        let ainv = a.clone().try_inverse().unwrap();
        let mut recon = DMatrix::zeros(3, 3);
        let z3 = DVector::from_vec(vec![0.0, 0.0, 1.0]);
        let w = sample_with_precision(&a, &z3).unwrap();
        for i in 0..3 {
            for j in 0..3 {
                recon[(i, j)] = x[i] * x[j] + y[i] * y[j] + w[i] * w[j];
            }
        }
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(recon[(i, j)], ainv[(i, j)], epsilon = 1e-10);
            }
        }
    }
}
