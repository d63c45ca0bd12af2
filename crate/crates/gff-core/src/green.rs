//! Discrete Green's functions: exact covariances by linear solve, the
//! random-walk occupation-time estimator, and harmonic extensions.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::Exp;
use rayon::prelude::*;

use crate::error::{GffError, Result};
use crate::lattice::{FieldFunction, WeightedGraph};
use crate::linalg::{conjugate_gradient, dense_spectrum_bounds};
use crate::rng::{stream_rng, StreamDomain};
use crate::stats::RunningStats;

/// Dense Green's matrices are limited to this many interior vertices; use
/// [`greens_column`] or [`functional_covariance`] above it.
pub const DENSE_GREENS_CAP: usize = 4000;

/// Covariance matrix of the field: inverse of the reduced Laplacian on
/// boundary-pinned graphs, pseudoinverse of the full Laplacian on zero-mean
/// graphs. `vertex_ids[i]` names the graph vertex behind row/column `i`.
#[derive(Debug, Clone)]
pub struct GreensMatrix {
    pub vertex_ids: Vec<usize>,
    pub matrix: DMatrix<f64>,
}

impl GreensMatrix {
    /// Entry by graph vertex ids.
    pub fn entry(&self, x: usize, y: usize) -> Option<f64> {
        let i = self.vertex_ids.binary_search(&x).ok()?;
        let j = self.vertex_ids.binary_search(&y).ok()?;
        Some(self.matrix[(i, j)])
    }
}

/// Exact Green's matrix `G = L_red^{-1}` (or the Laplacian pseudoinverse on
/// zero-mean graphs).
pub fn greens_matrix(g: &WeightedGraph) -> Result<GreensMatrix> {
    if g.zero_mean_mode() {
        let n = g.n_vertices();
        if n > DENSE_GREENS_CAP {
            return Err(GffError::Resource(format!(
                "dense Green's matrix capped at {DENSE_GREENS_CAP} vertices (graph has {n}); \
                 use greens_column instead"
            )));
        }
        let l = g.laplacian_csr().to_dense();
        let eig = nalgebra::SymmetricEigen::new(l);
        let max_eig = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let tol = 1e-12 * max_eig;
        let mut pinv = DMatrix::zeros(n, n);
        for (k, &lambda) in eig.eigenvalues.iter().enumerate() {
            if lambda > tol {
                let v = eig.eigenvectors.column(k);
                pinv.ger(1.0 / lambda, &v, &v, 1.0);
            }
        }
        // enforce exact symmetry against roundoff
        for i in 0..n {
            for j in (i + 1)..n {
                let s = 0.5 * (pinv[(i, j)] + pinv[(j, i)]);
                pinv[(i, j)] = s;
                pinv[(j, i)] = s;
            }
        }
        Ok(GreensMatrix {
            vertex_ids: (0..n).collect(),
            matrix: pinv,
        })
    } else {
        let m = g.n_interior();
        if m > DENSE_GREENS_CAP {
            return Err(GffError::Resource(format!(
                "dense Green's matrix capped at {DENSE_GREENS_CAP} interior vertices \
                 (graph has {m}); use greens_column instead"
            )));
        }
        let l = g.reduced_laplacian_dense();
        let chol = nalgebra::Cholesky::new(l.clone()).ok_or_else(|| {
            let bounds = dense_spectrum_bounds(&l, false);
            GffError::Numerical(format!(
                "reduced Laplacian is not positive definite; spectrum [{:.3e}, {:.3e}]",
                bounds.min, bounds.max
            ))
        })?;
        let mut inv = chol.inverse();
        // enforce exact symmetry against factorization roundoff
        for i in 0..m {
            for j in (i + 1)..m {
                let s = 0.5 * (inv[(i, j)] + inv[(j, i)]);
                inv[(i, j)] = s;
                inv[(j, i)] = s;
            }
        }
        Ok(GreensMatrix {
            vertex_ids: g.interior().to_vec(),
            matrix: inv,
        })
    }
}

/// One column of the Green's function, `G delta_x`, by conjugate gradients.
/// Returned in the order of `g.interior()` (all vertices on zero-mean
/// graphs).
pub fn greens_column(g: &WeightedGraph, x: usize) -> Result<Vec<f64>> {
    if g.zero_mean_mode() {
        let mut rhs = vec![0.0; g.n_vertices()];
        rhs[x] = 1.0;
        let (col, _) = conjugate_gradient(&g.laplacian_csr(), &rhs, true)?;
        Ok(col)
    } else {
        let ix = g
            .interior_index(x)
            .ok_or_else(|| GffError::InvalidInput(format!("vertex {x} is on the boundary")))?;
        let mut rhs = vec![0.0; g.n_interior()];
        rhs[ix] = 1.0;
        let (col, _) = conjugate_gradient(&g.reduced_laplacian_csr(), &rhs, false)?;
        Ok(col)
    }
}

/// Covariance of two linear functionals of the field, `rho1^T G rho2`,
/// without forming `G`. Functionals are given over all vertices; boundary
/// entries are ignored (the field is pinned there).
pub fn functional_covariance(
    g: &WeightedGraph,
    rho1: &FieldFunction,
    rho2: &FieldFunction,
) -> Result<f64> {
    if rho1.len() != g.n_vertices() || rho2.len() != g.n_vertices() {
        return Err(GffError::InvalidInput("functional length mismatch".into()));
    }
    if g.zero_mean_mode() {
        let (x, _) = conjugate_gradient(&g.laplacian_csr(), &rho2.values, true)?;
        Ok(rho1.values.iter().zip(&x).map(|(a, b)| a * b).sum())
    } else {
        let rhs: Vec<f64> = g.interior().iter().map(|&v| rho2.values[v]).collect();
        let (x, _) = conjugate_gradient(&g.reduced_laplacian_csr(), &rhs, false)?;
        Ok(g.interior()
            .iter()
            .zip(&x)
            .map(|(&v, b)| rho1.values[v] * b)
            .sum())
    }
}

/// Variance of a linear functional of the field, `rho^T G rho`.
pub fn functional_variance(g: &WeightedGraph, rho: &FieldFunction) -> Result<f64> {
    functional_covariance(g, rho, rho)
}

/// Monte Carlo estimate of `G(x, y)` as the expected time the
/// continuous-time walk started at `x` spends at `y` before absorption:
/// each edge fires with an exponential clock of intensity `w(e)`, so the walk
/// holds at `v` for `Exp(sum of incident weights)` and jumps proportionally
/// to the weights.
pub fn greens_by_walk(
    g: &WeightedGraph,
    x: usize,
    y: usize,
    n_walks: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    if g.boundary().is_empty() {
        return Err(GffError::Unsupported(
            "walk estimator needs an absorbing boundary".into(),
        ));
    }
    if g.edges().iter().any(|e| e.w <= 0.0) {
        return Err(GffError::Unsupported(
            "walk estimator requires strictly positive weights (exact solver still available)"
                .into(),
        ));
    }
    if g.is_boundary(x) {
        return Err(GffError::InvalidInput(format!(
            "start vertex {x} is absorbing"
        )));
    }
    if n_walks == 0 {
        return Err(GffError::InvalidInput("need at least one walk".into()));
    }

    let times: Vec<f64> = (0..n_walks as u64)
        .into_par_iter()
        .map(|replica| {
            let mut rng = stream_rng(seed, StreamDomain::Walk, replica);
            occupation_time(g, x, y, &mut rng)
        })
        .collect();
    let mut stats = RunningStats::new();
    for t in times {
        stats.push(t);
    }
    Ok((stats.mean(), stats.std_error()))
}

fn occupation_time(g: &WeightedGraph, x: usize, y: usize, rng: &mut impl Rng) -> f64 {
    let mut at = x;
    let mut total = 0.0;
    while !g.is_boundary(at) {
        let rate = g.weighted_degree(at);
        let hold: f64 = rng.sample(Exp::new(rate).expect("positive rate"));
        if at == y {
            total += hold;
        }
        // jump proportionally to edge weights
        let mut pick = rng.gen::<f64>() * rate;
        let mut next = at;
        for (nb, w) in g.neighbors(at) {
            pick -= w;
            next = nb;
            if pick <= 0.0 {
                break;
            }
        }
        at = next;
    }
    total
}

/// Solution of the discrete Dirichlet problem: agrees with `boundary_values`
/// on the boundary and is discrete-harmonic (the weighted-average fixed
/// point) at every interior vertex.
pub fn harmonic_extension(
    g: &WeightedGraph,
    boundary_values: &FieldFunction,
) -> Result<FieldFunction> {
    if g.boundary().is_empty() {
        return Err(GffError::InvalidInput(
            "harmonic extension needs a non-empty boundary".into(),
        ));
    }
    if boundary_values.len() != g.n_vertices() {
        return Err(GffError::InvalidInput(
            "boundary values length mismatch".into(),
        ));
    }
    let mut out = boundary_values.values.clone();
    if g.n_interior() == 0 {
        return Ok(FieldFunction::new(out));
    }
    // rhs_i = sum over boundary neighbors of w * value
    let mut rhs = vec![0.0; g.n_interior()];
    for (k, &v) in g.interior().iter().enumerate() {
        for (nb, w) in g.neighbors(v) {
            if g.is_boundary(nb) {
                rhs[k] += w * boundary_values.values[nb];
            }
        }
    }
    let (x, _) = conjugate_gradient(&g.reduced_laplacian_csr(), &rhs, false)?;
    for (k, &v) in g.interior().iter().enumerate() {
        out[v] = x[k];
    }
    Ok(FieldFunction::new(out))
}

/// The one-point conditional law at an interior vertex: neighbor weights
/// normalized to the coefficients of the conditional mean, and conditional
/// variance `1 / sum of incident weights`.
pub fn one_point_conditional(g: &WeightedGraph, y: usize) -> Result<(Vec<(usize, f64)>, f64)> {
    if g.interior_index(y).is_none() && !g.zero_mean_mode() {
        return Err(GffError::InvalidInput(format!(
            "vertex {y} is not interior"
        )));
    }
    let total = g.weighted_degree(y);
    if g.neighbors(y).next().is_none() {
        return Err(GffError::InvalidInput(format!("vertex {y} is isolated")));
    }
    if total <= 0.0 {
        return Err(GffError::Numerical(format!(
            "total incident weight at {y} is {total:.3e}; conditional variance undefined"
        )));
    }
    let weights = g.neighbors(y).map(|(nb, w)| (nb, w / total)).collect();
    Ok((weights, 1.0 / total))
}

/// Exact `G(x, y)` on the path `0..=length` with unit weights pinned at both
/// ends: `x (L - y) / L` for `x <= y`. Kept here as an independent oracle for
/// the solver tests.
pub fn path_greens_closed_form(length: usize, x: usize, y: usize) -> f64 {
    let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
    lo as f64 * (length - hi) as f64 / length as f64
}
