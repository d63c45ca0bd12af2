//! Gaussian moments by Wick pairings: exact mixed moments as sums over
//! perfect matchings of covariance products, Schwinger functions from Green
//! kernels, and streaming Monte Carlo cross-checks.

use nalgebra::DMatrix;

use crate::error::{GffError, Result};
use crate::green::GreensMatrix;
use crate::stats::RunningStats;

/// Hard cap on the moment order: (13 - 1)!! matchings would already be
/// 135135 products.
pub const DEFAULT_ORDER_CAP: usize = 12;

/// Result of a pairing expansion.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingSum {
    /// Moment order `k`.
    pub order: usize,
    /// Number of perfect matchings visited: `(k-1)!!` for even `k`, zero for
    /// odd `k`.
    pub matchings: usize,
    pub value: f64,
}

/// Double factorial `(k-1)!!` counting perfect matchings of `k` items.
pub fn perfect_matching_count(k: usize) -> usize {
    if k % 2 == 1 {
        return 0;
    }
    let mut acc = 1usize;
    let mut j = k.saturating_sub(1);
    while j > 1 {
        acc *= j;
        j -= 2;
    }
    acc
}

fn check_symmetric(c: &DMatrix<f64>) -> Result<()> {
    if c.nrows() != c.ncols() {
        return Err(GffError::InvalidInput(
            "covariance matrix must be square".into(),
        ));
    }
    let scale = c.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
    for i in 0..c.nrows() {
        for j in (i + 1)..c.ncols() {
            if (c[(i, j)] - c[(j, i)]).abs() > 1e-12 * scale {
                return Err(GffError::InvalidInput(format!(
                    "covariance matrix is not symmetric at ({i}, {j})"
                )));
            }
        }
    }
    Ok(())
}

/// Enumerate perfect matchings of `0..k` by repeatedly pairing the smallest
/// unmatched index, calling `visit` with each matching as index pairs.
fn for_each_matching(k: usize, visit: &mut impl FnMut(&[(usize, usize)])) {
    let mut used = vec![false; k];
    let mut pairs: Vec<(usize, usize)> = Vec::with_capacity(k / 2);
    fn recurse(
        used: &mut [bool],
        pairs: &mut Vec<(usize, usize)>,
        visit: &mut impl FnMut(&[(usize, usize)]),
    ) {
        let Some(first) = used.iter().position(|&u| !u) else {
            visit(pairs);
            return;
        };
        used[first] = true;
        for second in (first + 1)..used.len() {
            if !used[second] {
                used[second] = true;
                pairs.push((first, second));
                recurse(used, pairs, visit);
                pairs.pop();
                used[second] = false;
            }
        }
        used[first] = false;
    }
    recurse(&mut used, &mut pairs, visit);
}

/// Exact Gaussian mixed moment `E[X_{i_1} ... X_{i_k}]` for a centered
/// vector with covariance `C`: the sum over perfect matchings of products of
/// covariance entries. Odd orders return zero without enumeration. Repeated
/// indices are allowed (moments of powers).
pub fn wick_moment(c: &DMatrix<f64>, indices: &[usize]) -> Result<PairingSum> {
    check_symmetric(c)?;
    let k = indices.len();
    if k == 0 {
        return Err(GffError::InvalidInput("need at least one index".into()));
    }
    if k > DEFAULT_ORDER_CAP {
        return Err(GffError::Resource(format!(
            "moment order {k} above the cap {DEFAULT_ORDER_CAP}"
        )));
    }
    for &i in indices {
        if i >= c.nrows() {
            return Err(GffError::InvalidInput(format!("index {i} out of range")));
        }
    }
    if k % 2 == 1 {
        return Ok(PairingSum {
            order: k,
            matchings: 0,
            value: 0.0,
        });
    }
    let mut value = 0.0;
    let mut matchings = 0usize;
    for_each_matching(k, &mut |pairs| {
        matchings += 1;
        let mut prod = 1.0;
        for &(a, b) in pairs {
            prod *= c[(indices[a], indices[b])];
        }
        value += prod;
    });
    Ok(PairingSum {
        order: k,
        matchings,
        value,
    })
}

/// Schwinger function `S_k` at interior vertices: the pairing expansion over
/// the Green kernel, with `S_2(x1, x2) = G(x1, x2)` directly.
pub fn schwinger(points: &[usize], g: &GreensMatrix) -> Result<f64> {
    let local: Vec<usize> = points
        .iter()
        .map(|&p| {
            g.vertex_ids.binary_search(&p).map_err(|_| {
                GffError::InvalidInput(format!("vertex {p} is not covered by the Green's matrix"))
            })
        })
        .collect::<Result<_>>()?;
    if local.len() == 2 {
        return Ok(g.matrix[(local[0], local[1])]);
    }
    Ok(wick_moment(&g.matrix, &local)?.value)
}

/// All perfect matchings with their weights `prod C` and normalized
/// probabilities. Refused when any pairing weight is non-positive (the
/// probabilistic interpretation needs positive weights; values are still
/// available through [`wick_moment`]).
pub fn matching_partition_weights(
    c: &DMatrix<f64>,
    indices: &[usize],
) -> Result<Vec<(Vec<(usize, usize)>, f64, f64)>> {
    check_symmetric(c)?;
    let k = indices.len();
    if k == 0 || k % 2 == 1 {
        return Err(GffError::InvalidInput(
            "matching weights need a positive even order".into(),
        ));
    }
    if k > DEFAULT_ORDER_CAP {
        return Err(GffError::Resource(format!(
            "moment order {k} above the cap {DEFAULT_ORDER_CAP}"
        )));
    }
    let mut rows: Vec<(Vec<(usize, usize)>, f64, f64)> = Vec::new();
    let mut bad: Option<f64> = None;
    for_each_matching(k, &mut |pairs| {
        let mut prod = 1.0;
        for &(a, b) in pairs {
            prod *= c[(indices[a], indices[b])];
        }
        if prod <= 0.0 {
            bad.get_or_insert(prod);
        }
        rows.push((pairs.to_vec(), prod, 0.0));
    });
    if let Some(w) = bad {
        return Err(GffError::InvalidInput(format!(
            "matching weight {w:.3e} is not positive; no probabilistic interpretation"
        )));
    }
    let total: f64 = rows.iter().map(|r| r.1).sum();
    for row in rows.iter_mut() {
        row.2 = row.1 / total;
    }
    Ok(rows)
}

/// Covariance matrix of linear functionals of the field:
/// `C[i][j] = rho_i^T G rho_j`, the discrete counterpart of pairing test
/// densities through the Green kernel. Functionals are given over the
/// vertices covered by `g.vertex_ids`.
pub fn functional_covariance_matrix(
    g: &GreensMatrix,
    functionals: &[Vec<f64>],
) -> Result<DMatrix<f64>> {
    let m = g.vertex_ids.len();
    for rho in functionals {
        if rho.len() != m {
            return Err(GffError::InvalidInput(format!(
                "functional length {} does not match the {} kernel vertices",
                rho.len(),
                m
            )));
        }
    }
    let n = functionals.len();
    let mut out = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let mut acc = 0.0;
            for a in 0..m {
                let ra = functionals[i][a];
                if ra == 0.0 {
                    continue;
                }
                for b in 0..m {
                    acc += ra * g.matrix[(a, b)] * functionals[j][b];
                }
            }
            out[(i, j)] = acc;
            out[(j, i)] = acc;
        }
    }
    Ok(out)
}

/// Streaming product-moment estimate over a sample stream: for each sample
/// the functionals named by `tuple` are evaluated and multiplied; returns the
/// mean of the products and its standard error (for the sample mean the
/// jackknife standard error reduces to exactly this).
pub fn empirical_moment<'a>(
    samples: impl Iterator<Item = &'a [f64]>,
    functionals: &[Vec<f64>],
    tuple: &[usize],
) -> Result<(f64, f64)> {
    for &t in tuple {
        if t >= functionals.len() {
            return Err(GffError::InvalidInput(format!(
                "functional index {t} out of range"
            )));
        }
    }
    let mut stats = RunningStats::new();
    for sample in samples {
        let mut prod = 1.0;
        for &t in tuple {
            let rho = &functionals[t];
            if rho.len() != sample.len() {
                return Err(GffError::InvalidInput("sample length mismatch".into()));
            }
            let v: f64 = rho.iter().zip(sample).map(|(a, b)| a * b).sum();
            prod *= v;
        }
        stats.push(prod);
    }
    if stats.count() < 2 {
        return Err(GffError::InvalidInput("need at least two samples".into()));
    }
    Ok((stats.mean(), stats.std_error()))
}
