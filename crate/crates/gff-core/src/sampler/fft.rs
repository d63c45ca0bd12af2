//! Spectral samplers: the torus FFT sampler, the sine-transform sampler for
//! square grids with zero boundary, and conditioning a torus sample onto a
//! subgraph by discrete harmonic interpolation.

use std::collections::HashMap;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex;
use rustfft::{FftDirection, FftPlanner};

use crate::error::{GffError, Result};
use crate::green::harmonic_extension;
use crate::lattice::{torus_vertex_id, FieldFunction, GraphBuilder, Positions, WeightedGraph};
use crate::rng::{stream_rng, StreamDomain};
use crate::sampler::{FieldSample, SampleMethod};

/// Calibration constant for [`sample_torus_fft`]. Under the unitary DFT the
/// raw spectral recipe (coefficient `1/sqrt(sin^2 + sin^2)`, zero at the zero
/// mode) produces covariance `4 L^+`, because the unit-weight torus Laplacian
/// eigenvalue of mode `(j, k)` is `4 [sin^2(pi j/m) + sin^2(pi k/n)]`.
/// Multiplying the output by `1/2` makes the law exactly the mean-zero
/// harmonic crystal on the torus.
pub const TORUS_FFT_CALIBRATION: f64 = 0.5;

/// Spectral sample of the torus field: an `m x n` array of complex standard
/// Gaussians (drawn row-major, real part before imaginary), entry `(j, k)`
/// scaled by `1/sqrt(sin^2(pi j/m) + sin^2(pi k/n))` (zero at the zero
/// mode), inverse-transformed; the real part is returned with its mean
/// removed. When `calibrated` the output is scaled by
/// [`TORUS_FFT_CALIBRATION`] so the covariance is the Laplacian
/// pseudoinverse.
pub fn sample_torus_fft(m: usize, n: usize, seed: u64, calibrated: bool) -> Result<FieldSample> {
    if m < 3 || n < 3 {
        return Err(GffError::InvalidLattice("torus requires m, n >= 3".into()));
    }
    let mut rng = stream_rng(seed, StreamDomain::Fft, 0);
    let mut a = vec![Complex::new(0.0, 0.0); m * n];
    for (idx, slot) in a.iter_mut().enumerate() {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        let (j, k) = (idx / n, idx % n);
        let coeff = if j == 0 && k == 0 {
            0.0
        } else {
            let s = (std::f64::consts::PI * j as f64 / m as f64).sin().powi(2)
                + (std::f64::consts::PI * k as f64 / n as f64).sin().powi(2);
            1.0 / s.sqrt()
        };
        *slot = Complex::new(re * coeff, im * coeff);
    }
    fft_2d(&mut a, m, n, FftDirection::Inverse);
    let unitary = 1.0 / ((m * n) as f64).sqrt();
    let scale = unitary
        * if calibrated {
            TORUS_FFT_CALIBRATION
        } else {
            1.0
        };
    let mut values: Vec<f64> = a.iter().map(|c| c.re * scale).collect();
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    for v in values.iter_mut() {
        *v -= mean;
    }
    Ok(FieldSample {
        values,
        seed,
        method: SampleMethod::Fft,
    })
}

/// Analytic covariance of [`sample_torus_fft`] between vertices `x` and `y`,
/// by direct summation over modes. Depends on the displacement only.
pub fn torus_fft_covariance(m: usize, n: usize, calibrated: bool) -> DMatrix<f64> {
    let total = m * n;
    let scale2 = if calibrated {
        TORUS_FFT_CALIBRATION * TORUS_FFT_CALIBRATION
    } else {
        1.0
    };
    // covariance as a function of the displacement (di, dj)
    let mut by_shift = vec![0.0f64; total];
    for di in 0..m {
        for dj in 0..n {
            let mut acc = 0.0;
            for a in 0..m {
                for b in 0..n {
                    if a == 0 && b == 0 {
                        continue;
                    }
                    let s = (std::f64::consts::PI * a as f64 / m as f64).sin().powi(2)
                        + (std::f64::consts::PI * b as f64 / n as f64).sin().powi(2);
                    let phase = 2.0
                        * std::f64::consts::PI
                        * (a as f64 * di as f64 / m as f64 + b as f64 * dj as f64 / n as f64);
                    acc += phase.cos() / s;
                }
            }
            by_shift[di * n + dj] = scale2 * acc / total as f64;
        }
    }
    DMatrix::from_fn(total, total, |x, y| {
        let (xi, xj) = (x / n, x % n);
        let (yi, yj) = (y / n, y % n);
        let di = (xi + m - yi) % m;
        let dj = (xj + n - yj) % n;
        by_shift[di * n + dj]
    })
}

fn fft_2d(data: &mut [Complex<f64>], m: usize, n: usize, direction: FftDirection) {
    let mut planner = FftPlanner::new();
    let row_fft = planner.plan_fft(n, direction);
    for row in data.chunks_exact_mut(n) {
        row_fft.process(row);
    }
    let col_fft = planner.plan_fft(m, direction);
    let mut col = vec![Complex::new(0.0, 0.0); m];
    for j in 0..n {
        for i in 0..m {
            col[i] = data[i * n + j];
        }
        col_fft.process(&mut col);
        for i in 0..m {
            data[i * n + j] = col[i];
        }
    }
}

/// Exact harmonic-crystal sample on a `side x side` unit-weight square grid
/// with zero boundary, through the sine eigenbasis of the reduced Laplacian
/// (an exact factorization, so this is the direct sampler specialized to
/// square grids; it scales to large sides where the dense path cannot).
/// Values are row-major over the full grid, rim included.
pub fn sample_square_zero_boundary(side: usize, seed: u64) -> Result<FieldSample> {
    if side < 3 {
        return Err(GffError::InvalidLattice(
            "grid side must be at least 3".into(),
        ));
    }
    let interior = side - 2;
    let nf = interior + 1; // sine transform period
    let mut rng = stream_rng(seed, StreamDomain::Direct, 0);
    // coefficients z / sqrt(lambda_jk), modes row-major
    let mut coeff = vec![0.0f64; interior * interior];
    for j in 1..=interior {
        let sj = (std::f64::consts::PI * j as f64 / (2.0 * nf as f64))
            .sin()
            .powi(2);
        for k in 1..=interior {
            let sk = (std::f64::consts::PI * k as f64 / (2.0 * nf as f64))
                .sin()
                .powi(2);
            let lambda = 4.0 * (sj + sk);
            let z: f64 = rng.sample(StandardNormal);
            coeff[(j - 1) * interior + (k - 1)] = z / lambda.sqrt();
        }
    }
    dst_2d(&mut coeff, interior);
    let norm = 2.0 / nf as f64;
    let mut values = vec![0.0f64; side * side];
    for x in 1..=interior {
        for y in 1..=interior {
            values[x * side + y] = norm * coeff[(x - 1) * interior + (y - 1)];
        }
    }
    Ok(FieldSample {
        values,
        seed,
        method: SampleMethod::Direct,
    })
}

/// DST-I along both axes of a square array (`size x size`, row-major):
/// `out[a] = sum_b in[b] sin(pi a b / (size + 1))` per axis.
fn dst_2d(data: &mut [f64], size: usize) {
    let nf = size + 1;
    let len = 2 * nf;
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft(len, FftDirection::Forward);
    let mut buf = vec![Complex::new(0.0, 0.0); len];
    let mut dst_line = |line: &mut [f64]| {
        for slot in buf.iter_mut() {
            *slot = Complex::new(0.0, 0.0);
        }
        for (j, &v) in line.iter().enumerate() {
            buf[j + 1] = Complex::new(v, 0.0);
            buf[len - 1 - j] = Complex::new(-v, 0.0);
        }
        fft.process(&mut buf);
        for (k, slot) in line.iter_mut().enumerate() {
            *slot = -buf[k + 1].im / 2.0;
        }
    };
    // rows
    for row in data.chunks_exact_mut(size) {
        dst_line(row);
    }
    // columns
    let mut col = vec![0.0f64; size];
    for j in 0..size {
        for i in 0..size {
            col[i] = data[i * size + j];
        }
        dst_line(&mut col);
        for i in 0..size {
            data[i * size + j] = col[i];
        }
    }
}

/// An axis-aligned block of the torus as an induced subgraph with its rim as
/// boundary. Returns the subgraph and the embedding (sub vertex -> torus
/// vertex). The block must not wrap, so `rows <= m - 1` and `cols <= n - 1`.
pub fn torus_block_subgraph(
    torus: &WeightedGraph,
    m: usize,
    n: usize,
    row0: usize,
    col0: usize,
    rows: usize,
    cols: usize,
) -> Result<(WeightedGraph, Vec<usize>)> {
    if torus.n_vertices() != m * n {
        return Err(GffError::InvalidInput("torus dimensions mismatch".into()));
    }
    if rows < 3 || cols < 3 {
        return Err(GffError::InvalidInput(
            "block needs at least 3x3 vertices".into(),
        ));
    }
    if row0 + rows > m || col0 + cols > n || rows > m - 1 || cols > n - 1 {
        return Err(GffError::InvalidInput(
            "block must fit inside the torus without wrapping".into(),
        ));
    }
    let sub_id = |r: usize, c: usize| r * cols + c;
    let mut embedding = Vec::with_capacity(rows * cols);
    let mut positions = Vec::with_capacity(2 * rows * cols);
    for r in 0..rows {
        for c in 0..cols {
            embedding.push(torus_vertex_id(n, row0 + r, col0 + c));
            positions.push((row0 + r) as f64);
            positions.push((col0 + c) as f64);
        }
    }
    let weight_of = |t1: usize, t2: usize| -> Option<f64> {
        torus
            .neighbors(t1)
            .find(|&(nb, _)| nb == t2)
            .map(|(_, w)| w)
    };
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if r + 1 < rows {
                let w = weight_of(embedding[sub_id(r, c)], embedding[sub_id(r + 1, c)])
                    .ok_or_else(|| GffError::InvalidInput("missing torus edge".into()))?;
                edges.push((sub_id(r, c), sub_id(r + 1, c), w));
            }
            if c + 1 < cols {
                let w = weight_of(embedding[sub_id(r, c)], embedding[sub_id(r, c + 1)])
                    .ok_or_else(|| GffError::InvalidInput("missing torus edge".into()))?;
                edges.push((sub_id(r, c), sub_id(r, c + 1), w));
            }
        }
    }
    let boundary = (0..rows * cols).filter(|&v| {
        let (r, c) = (v / cols, v % cols);
        r == 0 || c == 0 || r == rows - 1 || c == cols - 1
    });
    let sub = GraphBuilder::new(rows * cols)
        .edges(edges)
        .boundary(boundary)
        .positions(Positions {
            dim: 2,
            coords: positions,
        })
        .build()?;
    Ok((sub, embedding))
}

/// Condition a torus sample onto an induced subgraph with prescribed
/// boundary values: returns `h + ht` on the subgraph where `ht` is the
/// discrete harmonic interpolation of `boundary_values - h` from the
/// subgraph boundary. The result has the harmonic-crystal law on the
/// subgraph with those boundary values.
pub fn impose_boundary(
    torus_field: &FieldSample,
    torus: &WeightedGraph,
    sub: &WeightedGraph,
    embedding: &[usize],
    boundary_values: &FieldFunction,
) -> Result<FieldSample> {
    if torus_field.values.len() != torus.n_vertices() {
        return Err(GffError::InvalidInput("torus field length mismatch".into()));
    }
    if embedding.len() != sub.n_vertices() {
        return Err(GffError::InvalidInput("embedding length mismatch".into()));
    }
    if boundary_values.len() != sub.n_vertices() {
        return Err(GffError::InvalidInput(
            "boundary values length mismatch".into(),
        ));
    }
    if sub.boundary().is_empty() {
        return Err(GffError::InvalidInput(
            "subgraph needs a non-empty boundary".into(),
        ));
    }
    // embedding must be injective and in range
    let mut torus_to_sub: HashMap<usize, usize> = HashMap::with_capacity(embedding.len());
    for (s, &t) in embedding.iter().enumerate() {
        if t >= torus.n_vertices() {
            return Err(GffError::InvalidInput(format!(
                "embedded vertex {t} out of range"
            )));
        }
        if torus_to_sub.insert(t, s).is_some() {
            return Err(GffError::InvalidInput("embedding is not injective".into()));
        }
    }
    // induced: sub edges = torus edges restricted to the image
    let mut sub_edge_set: HashMap<(usize, usize), f64> = HashMap::new();
    for e in sub.edges() {
        let (a, b) = (
            embedding[e.u].min(embedding[e.v]),
            embedding[e.u].max(embedding[e.v]),
        );
        sub_edge_set.insert((a, b), e.w);
    }
    let mut covered = 0usize;
    for e in torus.edges() {
        let (su, sv) = (torus_to_sub.get(&e.u), torus_to_sub.get(&e.v));
        if su.is_some() && sv.is_some() {
            match sub_edge_set.get(&(e.u.min(e.v), e.u.max(e.v))) {
                Some(&w) if w == e.w => covered += 1,
                _ => {
                    return Err(GffError::InvalidInput(format!(
                        "subgraph is not induced: torus edge ({}, {}) missing or reweighted",
                        e.u, e.v
                    )))
                }
            }
        }
    }
    if covered != sub.n_edges() {
        return Err(GffError::InvalidInput(
            "subgraph is not induced: it carries edges absent from the torus".into(),
        ));
    }

    let h: Vec<f64> = embedding.iter().map(|&t| torus_field.values[t]).collect();
    let mut diff = FieldFunction::zeros(sub.n_vertices());
    for &b in sub.boundary() {
        diff.values[b] = boundary_values.values[b] - h[b];
    }
    let ht = harmonic_extension(sub, &diff)?;
    let mut values: Vec<f64> = h.iter().zip(&ht.values).map(|(a, b)| a + b).collect();
    for &b in sub.boundary() {
        values[b] = boundary_values.values[b];
    }
    Ok(FieldSample {
        values,
        seed: torus_field.seed,
        method: SampleMethod::FftConditioned,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::green::greens_matrix;
    use crate::lattice::{build_box_lattice, build_torus_grid};
    use crate::stats::{covariance_entry_std_error, CovarianceAccumulator};
    use approx::assert_relative_eq;

    #[test]
    fn fft_sample_is_mean_zero_and_deterministic() {
        let s = sample_torus_fft(8, 8, 7, true).unwrap();
        let mean = s.values.iter().sum::<f64>() / s.values.len() as f64;
        let rms = (s.values.iter().map(|v| v * v).sum::<f64>() / s.values.len() as f64).sqrt();
        assert!(mean.abs() <= 1e-12 * rms);
        let s2 = sample_torus_fft(8, 8, 7, true).unwrap();
        assert_eq!(s.values, s2.values);
    }

    #[test]
    fn calibrated_fft_covariance_equals_pseudoinverse() {
        let g = build_torus_grid(4, 4, 1.0).unwrap();
        let pinv = greens_matrix(&g).unwrap().matrix;
        let analytic = torus_fft_covariance(4, 4, true);
        for i in 0..16 {
            for j in 0..16 {
                assert!(
                    (analytic[(i, j)] - pinv[(i, j)]).abs() <= 1e-10,
                    "entry ({i},{j}): {} vs {}",
                    analytic[(i, j)],
                    pinv[(i, j)]
                );
            }
        }
    }

    #[test]
    fn rectangular_torus_covariance_is_exact() {
        // m != n guards the row/column index conventions
        let g = build_torus_grid(4, 6, 1.0).unwrap();
        let pinv = greens_matrix(&g).unwrap().matrix;
        let analytic = torus_fft_covariance(4, 6, true);
        for i in 0..24 {
            for j in 0..24 {
                assert!(
                    (analytic[(i, j)] - pinv[(i, j)]).abs() <= 1e-10,
                    "entry ({i},{j}): {} vs {}",
                    analytic[(i, j)],
                    pinv[(i, j)]
                );
            }
        }
        // empirical variance of one vertex agrees too
        let mut stats = crate::stats::RunningStats::new();
        for seed in 0..30_000u64 {
            let s = sample_torus_fft(4, 6, seed, true).unwrap();
            stats.push(s.values[7]);
        }
        let exact = pinv[(7, 7)];
        let se = exact * (2.0 / stats.count() as f64).sqrt();
        assert!((stats.variance() - exact).abs() < 5.0 * se);
    }

    #[test]
    fn uncalibrated_fft_covariance_is_constant_multiple() {
        let g = build_torus_grid(4, 4, 1.0).unwrap();
        let pinv = greens_matrix(&g).unwrap().matrix;
        let analytic = torus_fft_covariance(4, 4, false);
        // fit kappa^2 on the diagonal and confirm it is 4 = calibration^{-2}
        let kappa2 = analytic[(0, 0)] / pinv[(0, 0)];
        assert_relative_eq!(kappa2, 4.0, epsilon = 1e-10);
        for i in 0..16 {
            for j in 0..16 {
                assert!((analytic[(i, j)] - kappa2 * pinv[(i, j)]).abs() <= 1e-10);
            }
        }
    }

    #[test]
    fn fft_empirical_covariance_matches_pseudoinverse() {
        let g = build_torus_grid(4, 4, 1.0).unwrap();
        let pinv = greens_matrix(&g).unwrap().matrix;
        let k = 100_000u64;
        let mut acc = CovarianceAccumulator::new(16);
        for seed in 0..k {
            let s = sample_torus_fft(4, 4, seed, true).unwrap();
            acc.push(&s.values);
        }
        let cov = acc.covariance();
        for i in 0..16 {
            for j in 0..16 {
                let se = covariance_entry_std_error(pinv[(i, i)], pinv[(j, j)], pinv[(i, j)], k);
                assert!(
                    (cov[(i, j)] - pinv[(i, j)]).abs() < 5.0 * se,
                    "entry ({i},{j}): {} vs {} (se {se})",
                    cov[(i, j)],
                    pinv[(i, j)]
                );
            }
        }
    }

    #[test]
    fn square_sampler_covariance_is_exact() {
        // push unit vectors through the sampling map; A A^T must equal the
        // dense Green's matrix of the 5x5 box
        let side = 5usize;
        let interior = side - 2;
        let nf = interior + 1;
        let g = build_box_lattice(2, 2, 1.0).unwrap();
        let gm = greens_matrix(&g).unwrap();
        let m = interior * interior;
        let mut a = DMatrix::zeros(m, m);
        for col in 0..m {
            let mut coeff = vec![0.0f64; m];
            let (j, k) = (col / interior + 1, col % interior + 1);
            let sj = (std::f64::consts::PI * j as f64 / (2.0 * nf as f64))
                .sin()
                .powi(2);
            let sk = (std::f64::consts::PI * k as f64 / (2.0 * nf as f64))
                .sin()
                .powi(2);
            coeff[col] = 1.0 / (4.0 * (sj + sk)).sqrt();
            dst_2d(&mut coeff, interior);
            for row in 0..m {
                a[(row, col)] = 2.0 / nf as f64 * coeff[row];
            }
        }
        let cov = &a * a.transpose();
        // map grid interior (x, y) -> box vertex id
        for xi in 0..interior {
            for yi in 0..interior {
                for xj in 0..interior {
                    for yj in 0..interior {
                        let row = xi * interior + yi;
                        let col = xj * interior + yj;
                        let vx =
                            crate::lattice::box_vertex_id(2, 2, &[xi as i64 - 1, yi as i64 - 1]);
                        let vy =
                            crate::lattice::box_vertex_id(2, 2, &[xj as i64 - 1, yj as i64 - 1]);
                        let expect = gm.entry(vx, vy).unwrap();
                        assert!(
                            (cov[(row, col)] - expect).abs() <= 1e-10,
                            "({xi},{yi})x({xj},{yj}): {} vs {}",
                            cov[(row, col)],
                            expect
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn square_sampler_rim_is_zero() {
        let s = sample_square_zero_boundary(9, 4).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                if i == 0 || j == 0 || i == 8 || j == 8 {
                    assert_eq!(s.values[i * 9 + j], 0.0);
                }
            }
        }
    }

    #[test]
    fn impose_own_boundary_is_identity() {
        let torus = build_torus_grid(8, 8, 1.0).unwrap();
        let field = sample_torus_fft(8, 8, 21, true).unwrap();
        let (sub, embedding) = torus_block_subgraph(&torus, 8, 8, 1, 2, 5, 5).unwrap();
        let mut own = FieldFunction::zeros(sub.n_vertices());
        for &b in sub.boundary() {
            own.values[b] = field.values[embedding[b]];
        }
        let out = impose_boundary(&field, &torus, &sub, &embedding, &own).unwrap();
        for (s, &t) in embedding.iter().enumerate() {
            assert_relative_eq!(out.values[s], field.values[t], epsilon = 1e-9);
        }
    }

    #[test]
    fn impose_constant_on_zero_field_is_constant() {
        let torus = build_torus_grid(8, 8, 1.0).unwrap();
        let zero = FieldSample {
            values: vec![0.0; 64],
            seed: 0,
            method: SampleMethod::Fft,
        };
        let (sub, embedding) = torus_block_subgraph(&torus, 8, 8, 0, 0, 5, 5).unwrap();
        let c = FieldFunction::constant(sub.n_vertices(), 1.75);
        let out = impose_boundary(&zero, &torus, &sub, &embedding, &c).unwrap();
        for v in out.values {
            assert_relative_eq!(v, 1.75, epsilon = 1e-10);
        }
    }

    #[test]
    fn conditioned_law_matches_direct_sampler() {
        let torus = build_torus_grid(8, 8, 1.0).unwrap();
        let (sub, embedding) = torus_block_subgraph(&torus, 8, 8, 1, 1, 5, 5).unwrap();
        let gm = greens_matrix(&sub).unwrap();
        let zero_bv = FieldFunction::zeros(sub.n_vertices());
        let k = 100_000u64;
        let m = sub.n_interior();
        let mut acc = CovarianceAccumulator::new(m);
        let mut buf = vec![0.0; m];
        for seed in 0..k {
            let field = sample_torus_fft(8, 8, seed, true).unwrap();
            let out = impose_boundary(&field, &torus, &sub, &embedding, &zero_bv).unwrap();
            for (i, &v) in sub.interior().iter().enumerate() {
                buf[i] = out.values[v];
            }
            acc.push(&buf);
        }
        let cov = acc.covariance();
        for i in 0..m {
            for j in 0..m {
                let se = covariance_entry_std_error(
                    gm.matrix[(i, i)],
                    gm.matrix[(j, j)],
                    gm.matrix[(i, j)],
                    k,
                );
                assert!(
                    (cov[(i, j)] - gm.matrix[(i, j)]).abs() < 5.0 * se,
                    "entry ({i},{j}): {} vs {}",
                    cov[(i, j)],
                    gm.matrix[(i, j)]
                );
            }
        }
    }

    #[test]
    fn non_induced_subgraph_is_rejected() {
        let torus = build_torus_grid(8, 8, 1.0).unwrap();
        let field = sample_torus_fft(8, 8, 0, true).unwrap();
        let (_, embedding) = torus_block_subgraph(&torus, 8, 8, 0, 0, 4, 4).unwrap();
        // rebuild the block with an extra diagonal edge: no longer induced
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        for r in 0..4usize {
            for c in 0..4usize {
                if r + 1 < 4 {
                    edges.push((r * 4 + c, (r + 1) * 4 + c, 1.0));
                }
                if c + 1 < 4 {
                    edges.push((r * 4 + c, r * 4 + c + 1, 1.0));
                }
            }
        }
        edges.push((0, 5, 1.0));
        let bad = GraphBuilder::new(16)
            .edges(edges)
            .boundary((0..16).filter(|&v| {
                let (r, c) = (v / 4, v % 4);
                r == 0 || c == 0 || r == 3 || c == 3
            }))
            .build()
            .unwrap();
        let bv = FieldFunction::zeros(16);
        assert!(matches!(
            impose_boundary(&field, &torus, &bad, &embedding, &bv).unwrap_err(),
            GffError::InvalidInput(_)
        ));
    }
}
