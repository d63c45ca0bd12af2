//! Named verification suites behind `gff-lab verify`: each check compares a
//! measured quantity against an independent oracle at a pinned tolerance.

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::green::{greens_matrix, one_point_conditional};
use crate::lattice::{
    build_box_lattice_capped, build_torus_grid, cotangent_weights, dilation_energy_ratio,
    dirichlet_energy, dirichlet_inner, pl_energy, FieldFunction, GraphBuilder, Triangulation,
    Validation,
};
use crate::linalg::dense_spectrum_bounds;
use crate::markov::{
    boustrophedon_ordering, conditional_law, decompose, default_exploration_functional, explore,
    explore_functional, harmonic_on,
};
use crate::moments::{perfect_matching_count, wick_moment};
use crate::rng::{stream_rng, StreamDomain};
use crate::sampler::{sample_dgff_direct, sample_torus_fft, torus_fft_covariance};
use crate::stats::{covariance_entry_std_error, fit_line, CovarianceAccumulator, RunningStats};

/// One check: a measured value, its oracle, the tolerance the comparison ran
/// at, and the verdict.
#[derive(Debug, Clone)]
pub struct VerifyRow {
    pub check: String,
    pub measured: f64,
    pub oracle: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl VerifyRow {
    fn abs(check: &str, measured: f64, oracle: f64, tolerance: f64) -> Self {
        Self {
            check: check.to_string(),
            measured,
            oracle,
            tolerance,
            pass: (measured - oracle).abs() <= tolerance,
        }
    }

    fn rel(check: &str, measured: f64, oracle: f64, tolerance: f64) -> Self {
        let scale = oracle.abs().max(1e-300);
        Self {
            check: check.to_string(),
            measured,
            oracle,
            tolerance,
            pass: (measured - oracle).abs() / scale <= tolerance,
        }
    }

    fn below(check: &str, measured: f64, bound: f64) -> Self {
        Self {
            check: check.to_string(),
            measured,
            oracle: 0.0,
            tolerance: bound,
            pass: measured <= bound,
        }
    }

    fn above(check: &str, measured: f64, bound: f64) -> Self {
        Self {
            check: check.to_string(),
            measured,
            oracle: bound,
            tolerance: 0.0,
            pass: measured >= bound,
        }
    }
}

pub fn all_pass(rows: &[VerifyRow]) -> bool {
    rows.iter().all(|r| r.pass)
}

/// Jittered square-grid triangulation with random diagonals; always valid and
/// positive definite (its Dirichlet form is the energy of the piecewise
/// linear interpolant).
pub fn random_triangulation(cells: usize, rng: &mut impl Rng) -> Triangulation {
    let side = cells + 1;
    let jitter = 0.3;
    let id = |r: usize, c: usize| r * side + c;
    let mut vertices = Vec::with_capacity(side * side);
    for r in 0..side {
        for c in 0..side {
            let dr: f64 = rng.gen_range(-jitter..jitter);
            let dc: f64 = rng.gen_range(-jitter..jitter);
            vertices.push([c as f64 + dc, r as f64 + dr]);
        }
    }
    let mut triangles = Vec::with_capacity(2 * cells * cells);
    for r in 0..cells {
        for c in 0..cells {
            if rng.gen::<bool>() {
                triangles.push([id(r, c), id(r, c + 1), id(r + 1, c + 1)]);
                triangles.push([id(r, c), id(r + 1, c + 1), id(r + 1, c)]);
            } else {
                triangles.push([id(r, c), id(r, c + 1), id(r + 1, c)]);
                triangles.push([id(r, c + 1), id(r + 1, c + 1), id(r + 1, c)]);
            }
        }
    }
    let boundary = (0..side * side)
        .filter(|&v| {
            let (r, c) = (v / side, v % side);
            r == 0 || c == 0 || r == cells || c == cells
        })
        .collect();
    Triangulation::new(vertices, triangles, boundary).expect("jittered grid stays valid")
}

/// Finite-element coupling checks: the PL/cotangent energy identity, the
/// square-grid degeneracy, the equilateral weight, dilation scaling, and the
/// definiteness validator.
pub fn suite_fem(seed: u64) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    let mut rng = stream_rng(seed, StreamDomain::Harness, 0);

    // 100 random triangulation/field pairs
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let cells = rng.gen_range(2..6);
        let tri = random_triangulation(cells, &mut rng);
        let f = FieldFunction::new(
            (0..tri.n_vertices())
                .map(|_| rng.sample(StandardNormal))
                .collect(),
        );
        let pl = pl_energy(&tri, &f)?;
        let graph = cotangent_weights(&tri)?;
        let ge = dirichlet_energy(&graph, &f)?;
        worst = worst.max((pl - ge).abs() / pl.abs().max(1e-300));
    }
    rows.push(VerifyRow::below(
        "fem/pl-equals-cotangent-rel-err-100-cases",
        worst,
        1e-12,
    ));

    // square-grid split: diagonals exactly 0, interior axis edges exactly 1
    let tri = square_split_triangulation(4);
    let g = cotangent_weights(&tri)?;
    let side = 5;
    let mut max_diag = 0.0f64;
    let mut max_axis_dev = 0.0f64;
    for e in g.edges() {
        let (ru, cu) = (e.u / side, e.u % side);
        let (rv, cv) = (e.v / side, e.v % side);
        if ru != rv && cu != cv {
            max_diag = max_diag.max(e.w.abs());
        } else {
            let rim = (ru == rv && (ru == 0 || ru == side - 1))
                || (cu == cv && (cu == 0 || cu == side - 1));
            if !rim {
                max_axis_dev = max_axis_dev.max((e.w - 1.0).abs());
            }
        }
    }
    rows.push(VerifyRow::below(
        "fem/square-grid-diagonal-weight",
        max_diag,
        0.0,
    ));
    rows.push(VerifyRow::below(
        "fem/square-grid-axis-weight-deviation",
        max_axis_dev,
        0.0,
    ));

    // equilateral lattice: a hexagonal patch so every spoke edge at the
    // center is shared by two equilateral triangles; interior weight
    // 3^{-1/2}, and the cotangent Green function is sqrt(3) times the
    // unit-weight one (the 3^{1/4} field factor)
    let mut verts = vec![[0.0f64, 0.0f64]];
    for k in 0..6 {
        let theta = k as f64 * std::f64::consts::PI / 3.0;
        verts.push([theta.cos(), theta.sin()]);
    }
    let triangles: Vec<[usize; 3]> = (0..6).map(|k| [0, k + 1, (k + 1) % 6 + 1]).collect();
    let tri = Triangulation::new(verts, triangles, (1..=6).collect())?;
    let g = cotangent_weights(&tri)?;
    let spoke = g.edges().iter().find(|e| e.u == 0).unwrap();
    rows.push(VerifyRow::abs(
        "fem/equilateral-interior-weight",
        spoke.w,
        1.0 / 3.0f64.sqrt(),
        1e-14,
    ));
    let g_unit = GraphBuilder::new(7)
        .edges(g.edges().iter().map(|e| (e.u, e.v, 1.0)))
        .boundary(1usize..=6)
        .build()?;
    let var_cot = greens_matrix(&g)?.matrix[(0, 0)];
    let var_unit = greens_matrix(&g_unit)?.matrix[(0, 0)];
    rows.push(VerifyRow::rel(
        "fem/equilateral-field-variance-factor",
        var_cot / var_unit,
        3.0f64.sqrt(),
        1e-14,
    ));

    // dilation scaling
    let tri = random_triangulation(4, &mut rng);
    let f = FieldFunction::new(
        (0..tri.n_vertices())
            .map(|_| rng.sample(StandardNormal))
            .collect(),
    );
    rows.push(VerifyRow::abs(
        "fem/dilation-ratio-2d-c2",
        dilation_energy_ratio(&tri, &f, 2.0)?,
        1.0,
        0.0,
    ));
    rows.push(VerifyRow::abs(
        "fem/dilation-ratio-2d-c0.5",
        dilation_energy_ratio(&tri, &f, 0.5)?,
        1.0,
        0.0,
    ));
    // 1d analog by direct summation: weights 1/spacing
    let path_energy = |spacing: f64, f: &[f64]| {
        f.windows(2)
            .map(|w| (w[1] - w[0]).powi(2) / spacing)
            .sum::<f64>()
    };
    let f1: Vec<f64> = (0..9).map(|_| rng.sample(StandardNormal)).collect();
    let ratio = path_energy(2.0, &f1) / path_energy(1.0, &f1);
    rows.push(VerifyRow::abs(
        "fem/dilation-ratio-1d-c2",
        ratio,
        0.5,
        1e-12,
    ));

    // the definiteness validator agrees with a direct eigenvalue check
    let indefinite = GraphBuilder::new(3)
        .edge(0, 1, 1.0)
        .edge(0, 2, -2.0)
        .boundary([1, 2])
        .validation(Validation::SkipDefiniteness)
        .build()?;
    let verdict_rejects = indefinite.check_positive_definite().is_err();
    let eig_min = dense_spectrum_bounds(&indefinite.reduced_laplacian_dense(), false).min;
    let agrees = verdict_rejects == (eig_min <= 0.0);
    rows.push(VerifyRow::abs(
        "fem/definiteness-validator-agrees-with-eigencheck",
        agrees as u8 as f64,
        1.0,
        0.0,
    ));
    Ok(rows)
}

/// Rectangular grid of unit squares split by main diagonals (rim boundary).
fn square_split_triangulation(cells: usize) -> Triangulation {
    let side = cells + 1;
    let id = |r: usize, c: usize| r * side + c;
    let mut vertices = Vec::new();
    for r in 0..side {
        for c in 0..side {
            vertices.push([c as f64, r as f64]);
        }
    }
    let mut triangles = Vec::new();
    for r in 0..cells {
        for c in 0..cells {
            triangles.push([id(r, c), id(r, c + 1), id(r + 1, c + 1)]);
            triangles.push([id(r, c), id(r + 1, c + 1), id(r + 1, c)]);
        }
    }
    let boundary = (0..side * side)
        .filter(|&v| {
            let (r, c) = (v / side, v % side);
            r == 0 || c == 0 || r == cells || c == cells
        })
        .collect();
    Triangulation::new(vertices, triangles, boundary).unwrap()
}

/// Covariance-law checks: direct sampler against the Green's matrix, the
/// calibrated FFT sampler against the Laplacian pseudoinverse (Monte Carlo
/// and exact), and the calibration constant itself.
pub fn suite_covariance(grid_n: i64, samples: u64, seed: u64) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();

    let g = build_box_lattice_capped(2, grid_n, 1.0, usize::MAX, Validation::Check)?;
    let gm = greens_matrix(&g)?;
    let m = g.n_interior();
    let mut acc = CovarianceAccumulator::new(m);
    let mut buf = vec![0.0; m];
    for i in 0..samples {
        let s = sample_dgff_direct(&g, seed.wrapping_add(i), None)?;
        for (k, &v) in g.interior().iter().enumerate() {
            buf[k] = s.values[v];
        }
        acc.push(&buf);
    }
    let cov = acc.covariance();
    let mut max_z = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let se = covariance_entry_std_error(
                gm.matrix[(i, i)],
                gm.matrix[(j, j)],
                gm.matrix[(i, j)],
                samples,
            );
            max_z = max_z.max((cov[(i, j)] - gm.matrix[(i, j)]).abs() / se);
        }
    }
    rows.push(VerifyRow::below(
        "covariance/direct-sampler-max-z",
        max_z,
        5.0,
    ));

    // FFT sampler on the 4x4 torus
    let torus = build_torus_grid(4, 4, 1.0)?;
    let pinv = greens_matrix(&torus)?.matrix;
    let mut acc = CovarianceAccumulator::new(16);
    for i in 0..samples {
        let s = sample_torus_fft(4, 4, seed.wrapping_add(i), true)?;
        acc.push(&s.values);
    }
    let cov = acc.covariance();
    let mut max_z = 0.0f64;
    for i in 0..16 {
        for j in 0..16 {
            let se = covariance_entry_std_error(pinv[(i, i)], pinv[(j, j)], pinv[(i, j)], samples);
            max_z = max_z.max((cov[(i, j)] - pinv[(i, j)]).abs() / se);
        }
    }
    rows.push(VerifyRow::below("covariance/fft-sampler-max-z", max_z, 5.0));

    // exact comparison, no Monte Carlo
    let analytic = torus_fft_covariance(4, 4, true);
    let max_abs = (0..16)
        .flat_map(|i| (0..16).map(move |j| (i, j)))
        .map(|(i, j)| (analytic[(i, j)] - pinv[(i, j)]).abs())
        .fold(0.0f64, f64::max);
    rows.push(VerifyRow::below(
        "covariance/fft-analytic-vs-pseudoinverse",
        max_abs,
        1e-10,
    ));

    let raw = torus_fft_covariance(4, 4, false);
    rows.push(VerifyRow::abs(
        "covariance/fft-calibration-kappa-squared",
        raw[(0, 0)] / pinv[(0, 0)],
        4.0,
        1e-10,
    ));
    Ok(rows)
}

/// Markov-property checks: orthogonality/Pythagoras of the decomposition,
/// exterior-independence of the conditional covariance, the empirical
/// conditional law, and the one-point conditional.
pub fn suite_markov(samples: u64, seed: u64) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    let g = build_box_lattice_capped(2, 3, 1.0, usize::MAX, Validation::Check)?;
    let mut rng = stream_rng(seed, StreamDomain::Harness, 1);

    // orthogonality + Pythagoras over 100 random (U, field) pairs
    let mut worst_orth = 0.0f64;
    let mut worst_pyth = 0.0f64;
    for i in 0..100u64 {
        let interior = g.interior();
        let size = rng.gen_range(1..=interior.len());
        let mut u: Vec<usize> = interior.to_vec();
        for k in (1..u.len()).rev() {
            let j = rng.gen_range(0..=k);
            u.swap(k, j);
        }
        u.truncate(size);
        let field = sample_dgff_direct(&g, seed.wrapping_add(1000 + i), None)?.as_function();
        let (harm, rem) = decompose(&g, &u, &field)?;
        let total = dirichlet_energy(&g, &field)?;
        let cross = dirichlet_inner(&g, &harm, &rem)?.abs();
        let defect = (total - dirichlet_energy(&g, &harm)? - dirichlet_energy(&g, &rem)?).abs();
        worst_orth = worst_orth.max(cross / total);
        worst_pyth = worst_pyth.max(defect / total);
    }
    rows.push(VerifyRow::below(
        "markov/decompose-orthogonality-rel",
        worst_orth,
        1e-10,
    ));
    rows.push(VerifyRow::below(
        "markov/decompose-pythagoras-rel",
        worst_pyth,
        1e-10,
    ));

    // conditional covariance must not depend on the exterior values
    let u: Vec<usize> = g
        .interior()
        .iter()
        .copied()
        .filter(|&v| {
            let p = g.positions().unwrap().vertex(v);
            p[0].abs() <= 1.0 && p[1].abs() <= 1.0
        })
        .collect();
    let base = conditional_law(&g, &u, &FieldFunction::zeros(g.n_vertices()))?;
    let mut max_dev = 0.0f64;
    for trial in 0..5u64 {
        let mut ext = FieldFunction::zeros(g.n_vertices());
        for v in ext.values.iter_mut() {
            *v = rng.sample::<f64, _>(StandardNormal) * (trial as f64 + 1.0);
        }
        let law = conditional_law(&g, &u, &ext)?;
        let dev = (&law.covariance.matrix - &base.covariance.matrix)
            .abs()
            .max();
        max_dev = max_dev.max(dev);
    }
    rows.push(VerifyRow::below(
        "markov/conditional-covariance-exterior-independent",
        max_dev,
        0.0,
    ));

    // empirical conditional covariance of residuals
    let m = u.len();
    let mut acc = CovarianceAccumulator::new(m);
    let mut buf = vec![0.0; m];
    for i in 0..samples {
        let field = sample_dgff_direct(&g, seed.wrapping_add(50_000 + i), None)?.as_function();
        let law = conditional_law(&g, &u, &field)?;
        for k in 0..m {
            buf[k] = field.values[law.u_vertices[k]] - law.mean[k];
        }
        acc.push(&buf);
    }
    let cov = acc.covariance();
    let mut max_z = 0.0f64;
    for i in 0..m {
        for j in 0..m {
            let se = covariance_entry_std_error(
                base.covariance.matrix[(i, i)],
                base.covariance.matrix[(j, j)],
                base.covariance.matrix[(i, j)],
                samples,
            );
            max_z = max_z.max((cov[(i, j)] - base.covariance.matrix[(i, j)]).abs() / se);
        }
    }
    rows.push(VerifyRow::below(
        "markov/conditional-covariance-max-z",
        max_z,
        5.0,
    ));

    // one-point Markov property at the center
    let center = crate::lattice::box_vertex_id(2, 3, &[0, 0]);
    let (weights, variance) = one_point_conditional(&g, center)?;
    let mut residuals = RunningStats::new();
    let others: Vec<usize> = g
        .interior()
        .iter()
        .copied()
        .filter(|&v| v != center)
        .collect();
    let mut cross: Vec<RunningStats> = vec![RunningStats::new(); others.len()];
    let mut other_vars: Vec<RunningStats> = vec![RunningStats::new(); others.len()];
    for i in 0..samples {
        let s = sample_dgff_direct(&g, seed.wrapping_add(200_000 + i), None)?;
        let y: f64 = weights.iter().map(|&(nb, w)| w * s.values[nb]).sum();
        let r = s.values[center] - y;
        residuals.push(r);
        for (k, &v) in others.iter().enumerate() {
            cross[k].push(r * s.values[v]);
            other_vars[k].push(s.values[v]);
        }
    }
    let var_se = variance * (2.0 / samples as f64).sqrt();
    rows.push(VerifyRow::abs(
        "markov/one-point-residual-variance",
        residuals.variance(),
        variance,
        5.0 * var_se,
    ));
    let mut max_corr_z = 0.0f64;
    for (k, c) in cross.iter().enumerate() {
        let se = (residuals.variance() * other_vars[k].variance() / samples as f64).sqrt();
        max_corr_z = max_corr_z.max(c.mean().abs() / se);
    }
    rows.push(VerifyRow::below(
        "markov/one-point-cross-correlation-max-z",
        max_corr_z,
        5.0,
    ));
    Ok(rows)
}

/// Wick-moment checks: the matching enumerator counts, the exact order-4
/// expansion, and Monte Carlo agreement on random index tuples.
pub fn suite_wick(samples: u64, seed: u64) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    let mut rng = stream_rng(seed, StreamDomain::Harness, 2);

    let mut count_mismatch = 0.0;
    for k in [2usize, 4, 6, 8] {
        let c = DMatrix::identity(k, k);
        let indices: Vec<usize> = (0..k).collect();
        let sum = wick_moment(&c, &indices)?;
        if sum.matchings != perfect_matching_count(k) {
            count_mismatch += 1.0;
        }
    }
    rows.push(VerifyRow::below(
        "wick/matching-counts-k2-k8",
        count_mismatch,
        0.0,
    ));

    // exact k=4 expansion against the hand formula
    let g = build_box_lattice_capped(2, 2, 1.0, usize::MAX, Validation::Check)?;
    let gm = greens_matrix(&g)?;
    let c = &gm.matrix;
    let idx = [0usize, 2, 5, 8];
    let expansion = c[(idx[0], idx[1])] * c[(idx[2], idx[3])]
        + c[(idx[0], idx[2])] * c[(idx[1], idx[3])]
        + c[(idx[0], idx[3])] * c[(idx[1], idx[2])];
    rows.push(VerifyRow::rel(
        "wick/k4-three-pairing-expansion",
        wick_moment(c, &idx)?.value,
        expansion,
        1e-14,
    ));

    // Monte Carlo agreement on 10 random tuples of order <= 6
    let m = g.n_interior();
    let all_samples: Vec<Vec<f64>> = (0..samples)
        .map(|i| {
            let s = sample_dgff_direct(&g, seed.wrapping_add(i), None).unwrap();
            g.interior().iter().map(|&v| s.values[v]).collect()
        })
        .collect();
    let mut within = 0usize;
    for _ in 0..10 {
        let k = 2 * rng.gen_range(1..=3usize);
        let tuple: Vec<usize> = (0..k).map(|_| rng.gen_range(0..m)).collect();
        let exact = wick_moment(c, &tuple)?.value;
        let mut stats = RunningStats::new();
        for s in &all_samples {
            stats.push(tuple.iter().map(|&t| s[t]).product());
        }
        if (stats.mean() - exact).abs() < 5.0 * stats.std_error() {
            within += 1;
        }
    }
    rows.push(VerifyRow::above(
        "wick/monte-carlo-tuples-within-5se",
        within as f64,
        9.0,
    ));
    Ok(rows)
}

/// Variance-of-the-origin scaling in the box size, per dimension: linear in
/// `n` for d=1, logarithmic for d=2, saturating for d=3.
pub fn suite_scaling(d: usize) -> Result<Vec<VerifyRow>> {
    let var_origin = |d: usize, n: i64| -> Result<f64> {
        let g = build_box_lattice_capped(d, n, 1.0, usize::MAX, Validation::SkipDefiniteness)?;
        let origin = crate::lattice::box_vertex_id(d, n, &vec![0i64; d]);
        let col = crate::green::greens_column(&g, origin)?;
        Ok(col[g.interior_index(origin).unwrap()])
    };
    let mut rows = Vec::new();
    match d {
        1 => {
            let v64 = var_origin(1, 64)?;
            let v128 = var_origin(1, 128)?;
            rows.push(VerifyRow::rel(
                "scaling/d1-doubling-ratio",
                v128 / v64,
                2.0,
                0.05,
            ));
        }
        2 => {
            let ns = [8i64, 16, 32, 64];
            let mut logs = Vec::new();
            let mut vars = Vec::new();
            for &n in &ns {
                logs.push((n as f64).ln());
                vars.push(var_origin(2, n)?);
            }
            let fit = fit_line(&logs, &vars);
            rows.push(VerifyRow::above(
                "scaling/d2-log-fit-r-squared",
                fit.r_squared,
                0.99,
            ));
            rows.push(VerifyRow::above(
                "scaling/d2-log-slope-positive",
                fit.slope,
                0.0,
            ));
        }
        3 => {
            let v6 = var_origin(3, 6)?;
            let v12 = var_origin(3, 12)?;
            rows.push(VerifyRow::below(
                "scaling/d3-saturation-relative-growth",
                (v12 - v6) / v6,
                0.10,
            ));
        }
        other => {
            return Err(crate::error::GffError::InvalidInput(format!(
                "scaling suite covers d in {{1, 2, 3}}, got {other}"
            )))
        }
    }
    Ok(rows)
}

/// Exploration-martingale checks: increment variances match the time change,
/// disjoint increments decorrelate, conditional means vanish, and the
/// projected-functional identity holds exactly.
pub fn suite_explore(samples: u64, seed: u64) -> Result<Vec<VerifyRow>> {
    let mut rows = Vec::new();
    let g = build_box_lattice_capped(2, 2, 1.0, usize::MAX, Validation::Check)?;
    let f0 = default_exploration_functional(&g)?;
    let ordering = boustrophedon_ordering(&g);
    let m = g.n_interior();

    let mut traces_times: Vec<f64> = Vec::new();
    let mut increment_stats = vec![RunningStats::new(); m];
    let mut disjoint = RunningStats::new();
    let mut w_mid: Vec<f64> = Vec::with_capacity(samples as usize);
    let mut inc_mid: Vec<f64> = Vec::with_capacity(samples as usize);
    let mut functional_err = 0.0f64;
    let mid = m / 2;
    for i in 0..samples {
        let field = sample_dgff_direct(&g, seed.wrapping_add(i), None)?.as_function();
        let trace = explore(&g, &f0, &ordering, &field)?;
        if traces_times.is_empty() {
            traces_times = trace.times.clone();
        }
        for k in 0..m {
            increment_stats[k].push(trace.values[k + 1] - trace.values[k]);
        }
        disjoint
            .push((trace.values[1] - trace.values[0]) * (trace.values[m] - trace.values[m - 1]));
        w_mid.push(trace.values[mid]);
        inc_mid.push(trace.values[mid + 1] - trace.values[mid]);
        if i == 0 {
            // exact identity W_f(t) = a W(min(s, t)) for f = a P_s(f0)
            let s = mid;
            let a = -1.5;
            let wf = explore_functional(&trace, &[(s, a)])?;
            let unrevealed: Vec<usize> = ordering[s..].to_vec();
            let ps_f0 = harmonic_on(&g, &unrevealed, &f0)?;
            for k in 0..=m {
                let u_k: Vec<usize> = ordering[k..].to_vec();
                let revealed = harmonic_on(&g, &u_k, &field)?;
                let direct = a * dirichlet_inner(&g, &revealed, &ps_f0)?;
                functional_err = functional_err
                    .max((wf[k] - a * trace.values[s.min(k)]).abs())
                    .max((direct - wf[k]).abs());
            }
        }
    }
    let mut max_var_z = 0.0f64;
    for k in 0..m {
        let dt = traces_times[k + 1] - traces_times[k];
        let se = dt * (2.0 / samples as f64).sqrt();
        max_var_z = max_var_z.max((increment_stats[k].variance() - dt).abs() / se.max(1e-300));
    }
    rows.push(VerifyRow::below(
        "explore/increment-variance-max-z",
        max_var_z,
        5.0,
    ));
    let se =
        (increment_stats[0].variance() * increment_stats[m - 1].variance() / samples as f64).sqrt();
    rows.push(VerifyRow::below(
        "explore/disjoint-increment-correlation-z",
        disjoint.mean().abs() / se,
        5.0,
    ));
    rows.push(VerifyRow::below(
        "explore/functional-identity-max-err",
        functional_err,
        1e-10,
    ));

    // martingale property: conditional mean of the next increment, binned on W_k
    let mut order: Vec<usize> = (0..w_mid.len()).collect();
    order.sort_by(|&a, &b| w_mid[a].partial_cmp(&w_mid[b]).unwrap());
    let n_bins = 8;
    let mut max_bin_z = 0.0f64;
    for bin in 0..n_bins {
        let lo = bin * order.len() / n_bins;
        let hi = (bin + 1) * order.len() / n_bins;
        let mut stats = RunningStats::new();
        for &idx in &order[lo..hi] {
            stats.push(inc_mid[idx]);
        }
        max_bin_z = max_bin_z.max(stats.mean().abs() / stats.std_error());
    }
    rows.push(VerifyRow::below(
        "explore/martingale-binned-mean-max-z",
        max_bin_z,
        5.0,
    ));

    // time change: t_final equals the squared norm of f0
    let f0_energy = dirichlet_energy(&g, &f0)?;
    rows.push(VerifyRow::abs(
        "explore/final-time-equals-f0-energy",
        *traces_times.last().unwrap(),
        f0_energy,
        1e-10,
    ));
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fem_suite_passes() {
        let rows = suite_fem(1).unwrap();
        assert!(all_pass(&rows), "{rows:?}");
    }

    #[test]
    fn scaling_suites_pass() {
        for d in 1..=3 {
            let rows = suite_scaling(d).unwrap();
            assert!(all_pass(&rows), "d = {d}: {rows:?}");
        }
    }

    #[test]
    fn wick_suite_passes() {
        let rows = suite_wick(200_000, 5).unwrap();
        assert!(all_pass(&rows), "{rows:?}");
    }
}
