//! Laplacian eigenbasis of the unit square with Dirichlet boundary:
//! truncated field expansions, pairings against test densities by
//! Gauss-Legendre quadrature, and the Hilbert-Schmidt convergence
//! diagnostic for fractional Laplacian norms.

use std::f64::consts::PI;

use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{GffError, Result};
use crate::rng::{stream_rng, StreamDomain};

/// Sine eigenbasis `e_{jk}(x, y) = 2 sin(j pi x) sin(k pi y)` with
/// eigenvalues `-(pi^2)(j^2 + k^2)`, modes `1 <= j, k <= cutoff` ordered by
/// non-increasing eigenvalue (increasing `j^2 + k^2`, ties lexicographic).
#[derive(Debug, Clone)]
pub struct SpectralBasis {
    cutoff: usize,
    modes: Vec<(usize, usize)>,
    quad_nodes: Vec<f64>,
    quad_weights: Vec<f64>,
}

impl SpectralBasis {
    pub fn unit_square(cutoff: usize) -> Result<Self> {
        if cutoff == 0 {
            return Err(GffError::InvalidInput(
                "mode cutoff must be at least 1".into(),
            ));
        }
        let mut modes: Vec<(usize, usize)> = (1..=cutoff)
            .flat_map(|j| (1..=cutoff).map(move |k| (j, k)))
            .collect();
        modes.sort_by_key(|&(j, k)| (j * j + k * k, j, k));
        // quadrature order so that mode products are integrated far below
        // the 1e-10 orthonormality budget
        let (quad_nodes, quad_weights) = gauss_legendre_unit(2 * cutoff + 16);
        Ok(Self {
            cutoff,
            modes,
            quad_nodes,
            quad_weights,
        })
    }

    pub fn cutoff(&self) -> usize {
        self.cutoff
    }

    /// Modes in eigenvalue order.
    pub fn modes(&self) -> &[(usize, usize)] {
        &self.modes
    }

    pub fn eigenvalue(j: usize, k: usize) -> f64 {
        -(PI * PI) * (j * j + k * k) as f64
    }

    pub fn eigenfunction(j: usize, k: usize, x: f64, y: f64) -> f64 {
        2.0 * (j as f64 * PI * x).sin() * (k as f64 * PI * y).sin()
    }

    /// `(f, g)` over the unit square by tensor Gauss-Legendre quadrature.
    pub fn inner_product(&self, f: impl Fn(f64, f64) -> f64, g: impl Fn(f64, f64) -> f64) -> f64 {
        let mut acc = 0.0;
        for (&x, &wx) in self.quad_nodes.iter().zip(&self.quad_weights) {
            for (&y, &wy) in self.quad_nodes.iter().zip(&self.quad_weights) {
                acc += wx * wy * f(x, y) * g(x, y);
            }
        }
        acc
    }

    /// `(e_{jk}, rho)` by quadrature.
    pub fn mode_coefficient(&self, j: usize, k: usize, rho: impl Fn(f64, f64) -> f64) -> f64 {
        self.inner_product(|x, y| Self::eigenfunction(j, k, x, y), rho)
    }

    /// Truncated-series variance of the pairing `(h, rho)`:
    /// `sum (e_{jk}, rho)^2 / (-lambda_{jk})` over the first `n_modes` modes.
    /// With the full mode set this converges to `integral rho G rho`.
    pub fn pairing_variance(&self, rho: impl Fn(f64, f64) -> f64, n_modes: usize) -> f64 {
        let mut acc = 0.0;
        for &(j, k) in self.modes.iter().take(n_modes) {
            let c = self.mode_coefficient(j, k, &rho);
            acc += c * c / (-Self::eigenvalue(j, k));
        }
        acc
    }

    /// Variance of the partial sums of the field at a point:
    /// `sum e_{jk}(x, y)^2 / (-lambda_{jk})` over the first `n_modes` modes.
    /// Diverges logarithmically with the cutoff in two dimensions.
    pub fn pointwise_variance(&self, x: f64, y: f64, n_modes: usize) -> f64 {
        self.modes
            .iter()
            .take(n_modes)
            .map(|&(j, k)| {
                let e = Self::eigenfunction(j, k, x, y);
                e * e / (-Self::eigenvalue(j, k))
            })
            .sum()
    }
}

/// Truncated field expansion: i.i.d. standard normal coefficients over the
/// basis modes, drawn in eigenvalue order.
#[derive(Debug, Clone)]
pub struct EigenbasisSample {
    pub basis: SpectralBasis,
    pub coefficients: Vec<f64>,
    pub seed: u64,
}

pub fn sample_square_eigenbasis(cutoff: usize, seed: u64) -> Result<EigenbasisSample> {
    let basis = SpectralBasis::unit_square(cutoff)?;
    let mut rng = stream_rng(seed, StreamDomain::Eigenbasis, 0);
    let coefficients = (0..basis.modes().len())
        .map(|_| rng.sample(StandardNormal))
        .collect();
    Ok(EigenbasisSample {
        basis,
        coefficients,
        seed,
    })
}

impl EigenbasisSample {
    /// Partial sum of the field at a point over the first `n_modes` modes:
    /// `sum alpha_{jk} (-lambda)^{-1/2} e_{jk}(x, y)`.
    pub fn evaluate_partial(&self, x: f64, y: f64, n_modes: usize) -> f64 {
        self.basis
            .modes()
            .iter()
            .take(n_modes)
            .zip(&self.coefficients)
            .map(|(&(j, k), &alpha)| {
                alpha * SpectralBasis::eigenfunction(j, k, x, y)
                    / (-SpectralBasis::eigenvalue(j, k)).sqrt()
            })
            .sum()
    }

    pub fn evaluate(&self, x: f64, y: f64) -> f64 {
        self.evaluate_partial(x, y, self.basis.modes().len())
    }

    /// Pairing `(h, rho) = sum alpha (-lambda)^{-1/2} (e_{jk}, rho)`.
    pub fn pair(&self, rho: impl Fn(f64, f64) -> f64) -> f64 {
        self.basis
            .modes()
            .iter()
            .zip(&self.coefficients)
            .map(|(&(j, k), &alpha)| {
                alpha * self.basis.mode_coefficient(j, k, &rho)
                    / (-SpectralBasis::eigenvalue(j, k)).sqrt()
            })
            .sum()
    }
}

/// Partial sum `sum_{j=1}^{J} j^{2(2a-2b)/d}` together with the analytic
/// verdict: the series (a Hilbert-Schmidt norm over the Laplacian eigenbasis,
/// by Weyl growth) converges exactly when the exponent is below -1, i.e.
/// `a < b - d/4`. The dimension must be at least 1.
pub fn hilbert_schmidt_sum(a: f64, b: f64, d: u32, j_cutoff: usize) -> (f64, bool) {
    assert!(d >= 1, "dimension must be at least 1");
    let exponent = 2.0 * (2.0 * a - 2.0 * b) / d as f64;
    let sum = (1..=j_cutoff).map(|j| (j as f64).powf(exponent)).sum();
    (sum, exponent < -1.0)
}

/// Gauss-Legendre nodes and weights on [0, 1] by Newton iteration on the
/// Legendre recurrence.
fn gauss_legendre_unit(order: usize) -> (Vec<f64>, Vec<f64>) {
    let n = order;
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    for i in 0..n.div_ceil(2) {
        // initial guess on [-1, 1]
        let mut x = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            // Legendre P_n and derivative by recurrence
            let mut p0 = 1.0;
            let mut p1 = x;
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    // map [-1, 1] -> [0, 1]
    for i in 0..n {
        nodes[i] = 0.5 * (nodes[i] + 1.0);
        weights[i] *= 0.5;
    }
    (nodes, weights)
}
