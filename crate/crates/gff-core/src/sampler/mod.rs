//! Field samplers: exact Gaussian sampling on graphs, FFT sampling on torus
//! grids, boundary conditioning, continuum eigenbasis partial sums, the
//! massive variant, and Ornstein-Uhlenbeck dynamics.
//!
//! Every sampler is a pure function of its inputs and a 64-bit seed; see
//! [`crate::rng`] for the stream-splitting contract.

mod fft;
mod spectral;

pub use fft::{
    impose_boundary, sample_square_zero_boundary, sample_torus_fft, torus_block_subgraph,
    torus_fft_covariance, TORUS_FFT_CALIBRATION,
};
pub use spectral::{
    hilbert_schmidt_sum, sample_square_eigenbasis, EigenbasisSample, SpectralBasis,
};

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{GffError, Result};
use crate::green::{harmonic_extension, DENSE_GREENS_CAP};
use crate::lattice::{FieldFunction, WeightedGraph};
use crate::linalg::sample_with_precision;
use crate::rng::{stream_rng, StreamDomain};

/// How a field realization was produced.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleMethod {
    Direct,
    Fft,
    FftConditioned,
    Eigenbasis,
    Massive,
    Ou,
}

impl SampleMethod {
    pub fn tag(self) -> u8 {
        match self {
            SampleMethod::Direct => 0,
            SampleMethod::Fft => 1,
            SampleMethod::FftConditioned => 2,
            SampleMethod::Eigenbasis => 3,
            SampleMethod::Massive => 4,
            SampleMethod::Ou => 5,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        Some(match tag {
            0 => SampleMethod::Direct,
            1 => SampleMethod::Fft,
            2 => SampleMethod::FftConditioned,
            3 => SampleMethod::Eigenbasis,
            4 => SampleMethod::Massive,
            5 => SampleMethod::Ou,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            SampleMethod::Direct => "direct",
            SampleMethod::Fft => "fft",
            SampleMethod::FftConditioned => "fft-conditioned",
            SampleMethod::Eigenbasis => "eigenbasis",
            SampleMethod::Massive => "massive",
            SampleMethod::Ou => "ou",
        }
    }
}

/// One realization of a field: a value per vertex (boundary vertices carry
/// exactly the imposed boundary values).
#[derive(Debug, Clone)]
pub struct FieldSample {
    pub values: Vec<f64>,
    pub seed: u64,
    pub method: SampleMethod,
}

impl FieldSample {
    pub fn as_function(&self) -> FieldFunction {
        FieldFunction::new(self.values.clone())
    }
}

/// Exact sample of the harmonic crystal: mean = harmonic extension of the
/// boundary values (zero when omitted), fluctuation drawn with covariance
/// equal to the inverse reduced Laplacian. Normals are consumed in ascending
/// interior-vertex order (on zero-mean graphs: one per Laplacian eigenpair
/// in ascending-eigenvalue order, the kernel mode drawn but discarded).
pub fn sample_dgff_direct(
    g: &WeightedGraph,
    seed: u64,
    boundary_values: Option<&FieldFunction>,
) -> Result<FieldSample> {
    sample_gaussian(g, 0.0, seed, boundary_values, SampleMethod::Direct)
}

/// Exact sample with covariance `(L + m^2 M)^{-1}` where `M` is the identity
/// mass matrix on interior vertices; `mass2 = 0` reduces to
/// [`sample_dgff_direct`] (same seed, identical output).
pub fn sample_massive(g: &WeightedGraph, mass2: f64, seed: u64) -> Result<FieldSample> {
    if !(mass2 >= 0.0) {
        return Err(GffError::InvalidInput("mass^2 must be non-negative".into()));
    }
    sample_gaussian(g, mass2, seed, None, SampleMethod::Massive)
}

fn sample_gaussian(
    g: &WeightedGraph,
    mass2: f64,
    seed: u64,
    boundary_values: Option<&FieldFunction>,
    method: SampleMethod,
) -> Result<FieldSample> {
    let mut rng = stream_rng(seed, StreamDomain::Direct, 0);

    if g.zero_mean_mode() {
        if boundary_values.is_some() {
            return Err(GffError::InvalidInput(
                "zero-mean graphs take no boundary values".into(),
            ));
        }
        let n = g.n_vertices();
        if n > DENSE_GREENS_CAP {
            return Err(GffError::Resource(format!(
                "direct sampling capped at {DENSE_GREENS_CAP} vertices"
            )));
        }
        let values = if mass2 == 0.0 {
            // factor through the Laplacian eigenbasis, skipping the kernel
            let eig = nalgebra::SymmetricEigen::new(g.laplacian_csr().to_dense());
            let mut order: Vec<usize> = (0..n).collect();
            order.sort_by(|&a, &b| {
                eig.eigenvalues[a]
                    .partial_cmp(&eig.eigenvalues[b])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let max_eig = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
            let tol = 1e-12 * max_eig;
            let mut values = vec![0.0f64; n];
            for &k in &order {
                let z: f64 = rng.sample(StandardNormal);
                let lambda = eig.eigenvalues[k];
                if lambda > tol {
                    let scale = z / lambda.sqrt();
                    for i in 0..n {
                        values[i] += scale * eig.eigenvectors[(i, k)];
                    }
                }
            }
            values
        } else {
            // L + m^2 I is positive definite on the whole space
            let mut a = g.laplacian_csr().to_dense();
            for i in 0..n {
                a[(i, i)] += mass2;
            }
            let z = DVector::from_fn(n, |_, _| rng.sample(StandardNormal));
            sample_with_precision(&a, &z)?.as_slice().to_vec()
        };
        let mut values = values;
        if mass2 == 0.0 {
            // pin the mean to zero at machine precision
            let mean = values.iter().sum::<f64>() / n as f64;
            for v in values.iter_mut() {
                *v -= mean;
            }
        }
        return Ok(FieldSample {
            values,
            seed,
            method,
        });
    }

    let m = g.n_interior();
    if m > DENSE_GREENS_CAP {
        return Err(GffError::Resource(format!(
            "direct sampling capped at {DENSE_GREENS_CAP} interior vertices (graph has {m}); \
             use sample_square_zero_boundary for large square grids"
        )));
    }
    if let Some(bv) = boundary_values {
        if bv.len() != g.n_vertices() {
            return Err(GffError::InvalidInput(
                "boundary values length mismatch".into(),
            ));
        }
    }

    let mut values = vec![0.0f64; g.n_vertices()];
    if let Some(bv) = boundary_values {
        for &b in g.boundary() {
            values[b] = bv.values[b];
        }
    }

    if m > 0 {
        let mut a = g.reduced_laplacian_dense();
        for i in 0..m {
            a[(i, i)] += mass2;
        }
        let z = DVector::from_fn(m, |_, _| rng.sample(StandardNormal));
        let fluct = sample_with_precision(&a, &z)?;

        let nonzero_boundary = boundary_values
            .map(|bv| g.boundary().iter().any(|&b| bv.values[b] != 0.0))
            .unwrap_or(false);
        if nonzero_boundary {
            // mean part: harmonic extension of the boundary data under the
            // massive operator is only harmonic for mass2 = 0; for the
            // massive field the conditional mean solves (L + m^2 I) x = rhs
            let bv = boundary_values.unwrap();
            if mass2 == 0.0 {
                let mean = harmonic_extension(g, bv)?;
                for (k, &v) in g.interior().iter().enumerate() {
                    values[v] = mean.values[v] + fluct[k];
                }
            } else {
                let mut rhs = DVector::zeros(m);
                for (k, &v) in g.interior().iter().enumerate() {
                    for (nb, w) in g.neighbors(v) {
                        if g.is_boundary(nb) {
                            rhs[k] += w * bv.values[nb];
                        }
                    }
                }
                let chol = nalgebra::Cholesky::new(a.clone())
                    .ok_or_else(|| GffError::Numerical("massive operator not SPD".into()))?;
                let mean = chol.solve(&rhs);
                for (k, &v) in g.interior().iter().enumerate() {
                    values[v] = mean[k] + fluct[k];
                }
            }
        } else {
            for (k, &v) in g.interior().iter().enumerate() {
                values[v] = fluct[k];
            }
        }
    }

    Ok(FieldSample {
        values,
        seed,
        method,
    })
}

/// Exact Ornstein-Uhlenbeck transition for the field: every Laplacian
/// eigenmode coefficient is moved to `e^{-t} * current` plus independent
/// Gaussian noise of variance `(1 - e^{-2t}) *` its stationary variance.
/// The harmonic-crystal law is invariant; `t = 0` returns the input exactly.
pub fn ou_evolve(g: &WeightedGraph, start: &FieldSample, t: f64, seed: u64) -> Result<FieldSample> {
    if !(t >= 0.0) {
        return Err(GffError::InvalidInput("time must be non-negative".into()));
    }
    if start.values.len() != g.n_vertices() {
        return Err(GffError::InvalidInput("field length mismatch".into()));
    }
    for &b in g.boundary() {
        if start.values[b] != 0.0 {
            return Err(GffError::InvalidInput(
                "ou_evolve requires zero boundary values".into(),
            ));
        }
    }
    if t == 0.0 {
        return Ok(FieldSample {
            values: start.values.clone(),
            seed,
            method: SampleMethod::Ou,
        });
    }

    let decay = (-t).exp();
    let noise_scale = (1.0 - (-2.0 * t).exp()).sqrt();
    let mut rng = stream_rng(seed, StreamDomain::Ou, 0);
    let mut values: Vec<f64> = start.values.iter().map(|v| v * decay).collect();

    if g.zero_mean_mode() {
        let n = g.n_vertices();
        if n > DENSE_GREENS_CAP {
            return Err(GffError::Resource("ou_evolve capped at dense sizes".into()));
        }
        let eig = nalgebra::SymmetricEigen::new(g.laplacian_csr().to_dense());
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            eig.eigenvalues[a]
                .partial_cmp(&eig.eigenvalues[b])
                .unwrap()
                .then(a.cmp(&b))
        });
        let max_eig = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
        let tol = 1e-12 * max_eig;
        for &k in &order {
            let z: f64 = rng.sample(StandardNormal);
            let lambda = eig.eigenvalues[k];
            if lambda > tol {
                let scale = noise_scale * z / lambda.sqrt();
                for i in 0..n {
                    values[i] += scale * eig.eigenvectors[(i, k)];
                }
            }
        }
        let mean = values.iter().sum::<f64>() / n as f64;
        for v in values.iter_mut() {
            *v -= mean;
        }
    } else {
        let m = g.n_interior();
        if m > DENSE_GREENS_CAP {
            return Err(GffError::Resource("ou_evolve capped at dense sizes".into()));
        }
        if m > 0 {
            let eig = nalgebra::SymmetricEigen::new(g.reduced_laplacian_dense());
            let mut order: Vec<usize> = (0..m).collect();
            order.sort_by(|&a, &b| {
                eig.eigenvalues[a]
                    .partial_cmp(&eig.eigenvalues[b])
                    .unwrap()
                    .then(a.cmp(&b))
            });
            for &k in &order {
                let z: f64 = rng.sample(StandardNormal);
                let lambda = eig.eigenvalues[k];
                let scale = noise_scale * z / lambda.sqrt();
                for (row, &v) in g.interior().iter().enumerate() {
                    values[v] += scale * eig.eigenvectors[(row, k)];
                }
            }
        }
    }

    Ok(FieldSample {
        values,
        seed,
        method: SampleMethod::Ou,
    })
}

/// Analytic covariance matrix of [`sample_dgff_direct`] over interior
/// vertices (used by exact, no-Monte-Carlo comparisons): columns of the
/// factor map assembled into `A A^T`.
pub fn direct_sampler_covariance(g: &WeightedGraph, mass2: f64) -> Result<DMatrix<f64>> {
    let m = g.n_interior();
    let mut a = g.reduced_laplacian_dense();
    for i in 0..m {
        a[(i, i)] += mass2;
    }
    let mut cols = DMatrix::zeros(m, m);
    for j in 0..m {
        let mut z = DVector::zeros(m);
        z[j] = 1.0;
        let col = sample_with_precision(&a, &z)?;
        cols.set_column(j, &col);
    }
    Ok(&cols * cols.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::error::GffError;
    use crate::green::greens_matrix;
    use crate::lattice::{build_box_lattice, build_path, build_torus_grid};
    use crate::stats::{covariance_entry_std_error, CovarianceAccumulator, RunningStats};

    #[test]
    fn direct_sampler_is_deterministic() {
        let g = build_box_lattice(2, 2, 1.0).unwrap();
        let a = sample_dgff_direct(&g, 42, None).unwrap();
        let b = sample_dgff_direct(&g, 42, None).unwrap();
        assert_eq!(a.values, b.values);
        let c = sample_dgff_direct(&g, 43, None).unwrap();
        assert_ne!(a.values, c.values);
    }

    #[test]
    fn path_center_variance_is_one() {
        let g = build_path(4, 1.0).unwrap();
        let mut stats = RunningStats::new();
        for seed in 0..100_000u64 {
            let s = sample_dgff_direct(&g, seed, None).unwrap();
            stats.push(s.values[2]);
        }
        // Var phi(2) = G(2,2) = 1; variance of the sample variance for a
        // Gaussian is 2 sigma^4 / K
        let se = (2.0 / stats.count() as f64).sqrt();
        assert!((stats.variance() - 1.0).abs() < 3.0 * se);
    }

    #[test]
    fn single_interior_vertex_variance() {
        let g = build_box_lattice(2, 1, 1.0).unwrap();
        let center = g.interior()[0];
        let mut stats = RunningStats::new();
        for seed in 0..50_000u64 {
            let s = sample_dgff_direct(&g, seed, None).unwrap();
            stats.push(s.values[center]);
        }
        let se = 0.25 * (2.0 / stats.count() as f64).sqrt();
        assert!((stats.variance() - 0.25).abs() < 4.0 * se);
    }

    #[test]
    fn direct_covariance_matches_green_empirically() {
        let g = build_box_lattice(2, 2, 1.0).unwrap();
        let gm = greens_matrix(&g).unwrap();
        let m = g.n_interior();
        let mut acc = CovarianceAccumulator::new(m);
        let k = 100_000u64;
        let mut buf = vec![0.0; m];
        for seed in 0..k {
            let s = sample_dgff_direct(&g, seed, None).unwrap();
            for (i, &v) in g.interior().iter().enumerate() {
                buf[i] = s.values[v];
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
                    "entry ({i}, {j}): {} vs {}",
                    cov[(i, j)],
                    gm.matrix[(i, j)]
                );
            }
        }
    }

    #[test]
    fn boundary_values_shift_the_mean() {
        let g = build_path(4, 1.0).unwrap();
        let mut bv = FieldFunction::zeros(5);
        bv.values[0] = 0.0;
        bv.values[4] = 4.0;
        let s = sample_dgff_direct(&g, 5, Some(&bv)).unwrap();
        assert_eq!(s.values[0], 0.0);
        assert_eq!(s.values[4], 4.0);
        // mean over many seeds approaches the linear interpolation
        let mut stats = RunningStats::new();
        for seed in 0..20_000u64 {
            let s = sample_dgff_direct(&g, seed, Some(&bv)).unwrap();
            stats.push(s.values[2]);
        }
        assert!((stats.mean() - 2.0).abs() < 4.0 * stats.std_error());
    }

    #[test]
    fn massive_zero_mass_identical_to_direct() {
        let g = build_box_lattice(2, 2, 1.0).unwrap();
        let a = sample_dgff_direct(&g, 7, None).unwrap();
        let b = sample_massive(&g, 0.0, 7).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn massive_single_vertex_variance() {
        // 3x3 grid: reduced Laplacian is the scalar 4; with m^2 = 1 the
        // variance is 1/5
        let g = build_box_lattice(2, 1, 1.0).unwrap();
        let center = g.interior()[0];
        let mut stats = RunningStats::new();
        for seed in 0..60_000u64 {
            let s = sample_massive(&g, 1.0, seed).unwrap();
            stats.push(s.values[center]);
        }
        let se = 0.2 * (2.0 / stats.count() as f64).sqrt();
        assert!((stats.variance() - 0.2).abs() < 4.0 * se);
    }

    #[test]
    fn massive_covariance_matches_exact_operator() {
        let g = build_box_lattice(2, 2, 1.0).unwrap();
        let mass2 = 1.0;
        let exact = direct_sampler_covariance(&g, mass2).unwrap();
        let m = g.n_interior();
        let k = 60_000u64;
        let mut acc = CovarianceAccumulator::new(m);
        let mut buf = vec![0.0; m];
        for seed in 0..k {
            let s = sample_massive(&g, mass2, seed).unwrap();
            for (i, &v) in g.interior().iter().enumerate() {
                buf[i] = s.values[v];
            }
            acc.push(&buf);
        }
        let cov = acc.covariance();
        for i in 0..m {
            for j in 0..m {
                let se = covariance_entry_std_error(exact[(i, i)], exact[(j, j)], exact[(i, j)], k);
                assert!(
                    (cov[(i, j)] - exact[(i, j)]).abs() < 5.0 * se,
                    "entry ({i},{j}): {} vs {}",
                    cov[(i, j)],
                    exact[(i, j)]
                );
            }
        }
    }

    #[test]
    fn massive_variance_decreases_in_mass() {
        let g = build_box_lattice(2, 4, 1.0).unwrap();
        let center = crate::lattice::box_vertex_id(2, 4, &[0, 0]);
        let ic = g.interior_index(center).unwrap();
        let var_at = |mass2: f64| direct_sampler_covariance(&g, mass2).unwrap()[(ic, ic)];
        let v0 = var_at(0.0);
        let v1 = var_at(1.0);
        let v4 = var_at(4.0);
        assert!(v0 > v1 && v1 > v4, "{v0} > {v1} > {v4}");
    }

    #[test]
    fn torus_direct_sample_is_mean_zero() {
        let g = build_torus_grid(4, 4, 1.0).unwrap();
        let s = sample_dgff_direct(&g, 3, None).unwrap();
        let mean = s.values.iter().sum::<f64>() / s.values.len() as f64;
        let rms = (s.values.iter().map(|v| v * v).sum::<f64>() / s.values.len() as f64).sqrt();
        assert!(mean.abs() < 1e-12 * rms);
    }

    #[test]
    fn torus_direct_covariance_is_the_pseudoinverse() {
        // the mean-zero-constrained direct sampler reduces to the Laplacian
        // pseudoinverse, like the calibrated FFT sampler
        let g = build_torus_grid(4, 4, 1.0).unwrap();
        let pinv = greens_matrix(&g).unwrap().matrix;
        let k = 60_000u64;
        let mut acc = CovarianceAccumulator::new(16);
        for seed in 0..k {
            let s = sample_dgff_direct(&g, seed, None).unwrap();
            acc.push(&s.values);
        }
        let cov = acc.covariance();
        for i in 0..16 {
            for j in 0..16 {
                let se = covariance_entry_std_error(pinv[(i, i)], pinv[(j, j)], pinv[(i, j)], k);
                assert!(
                    (cov[(i, j)] - pinv[(i, j)]).abs() < 5.0 * se,
                    "entry ({i},{j}): {} vs {}",
                    cov[(i, j)],
                    pinv[(i, j)]
                );
            }
        }
    }

    #[test]
    fn ou_identity_at_zero_time() {
        let g = build_box_lattice(2, 2, 1.0).unwrap();
        let start = sample_dgff_direct(&g, 9, None).unwrap();
        let out = ou_evolve(&g, &start, 0.0, 1).unwrap();
        assert_eq!(out.values, start.values);
    }

    #[test]
    fn ou_preserves_the_dgff_law() {
        let g = build_box_lattice(2, 2, 1.0).unwrap();
        let gm = greens_matrix(&g).unwrap();
        let m = g.n_interior();
        let mut acc = CovarianceAccumulator::new(m);
        let k = 60_000u64;
        let mut buf = vec![0.0; m];
        for seed in 0..k {
            let start = sample_dgff_direct(&g, seed, None).unwrap();
            let out = ou_evolve(&g, &start, 0.7, seed.wrapping_add(1 << 40)).unwrap();
            for (i, &v) in g.interior().iter().enumerate() {
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
                    "entry ({i},{j})"
                );
            }
        }
    }

    #[test]
    fn ou_relaxes_from_zero() {
        // from the zero field at large t the law is the stationary one
        let g = build_box_lattice(2, 1, 1.0).unwrap();
        let center = g.interior()[0];
        let zero = FieldSample {
            values: vec![0.0; g.n_vertices()],
            seed: 0,
            method: SampleMethod::Direct,
        };
        let mut stats = RunningStats::new();
        for seed in 0..50_000u64 {
            let out = ou_evolve(&g, &zero, 50.0, seed).unwrap();
            stats.push(out.values[center]);
        }
        let se = 0.25 * (2.0 / stats.count() as f64).sqrt();
        assert!((stats.variance() - 0.25).abs() < 4.0 * se);
    }

    #[test]
    fn ou_rejects_negative_time() {
        let g = build_box_lattice(2, 1, 1.0).unwrap();
        let start = sample_dgff_direct(&g, 0, None).unwrap();
        assert!(ou_evolve(&g, &start, -1.0, 0).is_err());
    }

    #[test]
    fn ou_requires_zero_boundary_values() {
        let g = build_path(4, 1.0).unwrap();
        let mut bv = FieldFunction::zeros(5);
        bv.values[4] = 1.0;
        let start = sample_dgff_direct(&g, 0, Some(&bv)).unwrap();
        assert!(ou_evolve(&g, &start, 0.5, 0).is_err());
    }

    #[test]
    fn boundary_values_rejected_on_zero_mean_graphs() {
        let g = build_torus_grid(4, 4, 1.0).unwrap();
        let bv = FieldFunction::zeros(16);
        assert!(sample_dgff_direct(&g, 0, Some(&bv)).is_err());
    }

    #[test]
    fn factorization_failure_reports_numerical_error() {
        // indefinite form slipped past validation: the factorization must
        // fail with a condition diagnostic rather than return garbage
        let g = crate::lattice::GraphBuilder::new(3)
            .edge(0, 1, 1.0)
            .edge(0, 2, -2.0)
            .boundary([1, 2])
            .validation(crate::lattice::Validation::SkipDefiniteness)
            .build()
            .unwrap();
        match sample_dgff_direct(&g, 0, None).unwrap_err() {
            GffError::Numerical(msg) => assert!(msg.contains("spectrum")),
            other => panic!("expected a numerical error, got {other:?}"),
        }
    }
}
