//! The Markov structure of the field: conditional laws given exterior
//! values, the orthogonal decomposition into a harmonic part plus an
//! independent field on a subset, and the exploration martingale obtained by
//! revealing vertices one at a time.

use std::collections::HashSet;

use crate::error::{GffError, Result};
use crate::green::{greens_matrix, harmonic_extension, GreensMatrix};
use crate::lattice::{
    dirichlet_energy, dirichlet_inner, FieldFunction, GraphBuilder, WeightedGraph,
};
use crate::linalg::conjugate_gradient;

/// Conditional law of the field on `u` given the values outside:
/// mean = harmonic extension of the exterior values into `u`, covariance =
/// Green's matrix of the induced subproblem (a function of the graph and `u`
/// only).
#[derive(Debug, Clone)]
pub struct ConditionalLaw {
    /// The conditioned set, sorted by vertex id.
    pub u_vertices: Vec<usize>,
    /// Conditional mean, indexed like `u_vertices`.
    pub mean: Vec<f64>,
    /// Conditional covariance with `vertex_ids` in the graph's numbering.
    pub covariance: GreensMatrix,
}

fn sorted_interior_subset(g: &WeightedGraph, u: &[usize]) -> Result<Vec<usize>> {
    let mut set = u.to_vec();
    set.sort_unstable();
    set.dedup();
    if set.len() != u.len() {
        return Err(GffError::InvalidInput(
            "subset contains duplicate vertices".into(),
        ));
    }
    for &v in &set {
        if v >= g.n_vertices() {
            return Err(GffError::InvalidInput(format!("vertex {v} out of range")));
        }
        if g.is_boundary(v) {
            return Err(GffError::InvalidInput(format!(
                "vertex {v} is on the boundary, not interior"
            )));
        }
    }
    Ok(set)
}

/// The induced subproblem on `u`: local graph whose interior is `u` and whose
/// boundary is every vertex outside `u` adjacent to `u`. Returns the graph
/// and the local -> global vertex map.
fn subproblem(g: &WeightedGraph, u: &[usize]) -> Result<(WeightedGraph, Vec<usize>)> {
    let in_u: HashSet<usize> = u.iter().copied().collect();
    let mut exterior: Vec<usize> = u
        .iter()
        .flat_map(|&v| g.neighbors(v).map(|(nb, _)| nb))
        .filter(|nb| !in_u.contains(nb))
        .collect();
    exterior.sort_unstable();
    exterior.dedup();
    if exterior.is_empty() {
        return Err(GffError::InvalidInput(
            "the subset touches no exterior vertex; the conditional problem is unpinned".into(),
        ));
    }
    let mut local_of = vec![usize::MAX; g.n_vertices()];
    let mut global: Vec<usize> = Vec::with_capacity(u.len() + exterior.len());
    for &v in u.iter().chain(&exterior) {
        local_of[v] = global.len();
        global.push(v);
    }
    let mut edges = Vec::new();
    for e in g.edges() {
        if in_u.contains(&e.u) || in_u.contains(&e.v) {
            edges.push((local_of[e.u], local_of[e.v], e.w));
        }
    }
    // the subproblem form is the parent form restricted to the coordinates
    // in `u`, so it inherits strict positive definiteness; skip the eigensolve
    let sub = GraphBuilder::new(global.len())
        .edges(edges)
        .boundary((u.len()..global.len()).collect::<Vec<_>>())
        .validation(crate::lattice::Validation::SkipDefiniteness)
        .build()?;
    Ok((sub, global))
}

/// Conditional law of the field restricted to `u`, given `exterior_values`
/// on the complement (entries of `exterior_values` on `u` are ignored).
pub fn conditional_law(
    g: &WeightedGraph,
    u: &[usize],
    exterior_values: &FieldFunction,
) -> Result<ConditionalLaw> {
    if exterior_values.len() != g.n_vertices() {
        return Err(GffError::InvalidInput(
            "exterior values length mismatch".into(),
        ));
    }
    let u_sorted = sorted_interior_subset(g, u)?;
    let (sub, global) = subproblem(g, &u_sorted)?;
    let mut bv = FieldFunction::zeros(sub.n_vertices());
    for &b in sub.boundary() {
        bv.values[b] = exterior_values.values[global[b]];
    }
    let ext = harmonic_extension(&sub, &bv)?;
    let mean: Vec<f64> = (0..u_sorted.len()).map(|k| ext.values[k]).collect();
    let mut covariance = greens_matrix(&sub)?;
    covariance.vertex_ids = u_sorted.clone();
    Ok(ConditionalLaw {
        u_vertices: u_sorted,
        mean,
        covariance,
    })
}

/// The function that agrees with `f` off `u` and is discrete-harmonic on
/// `u`: the projection of `f` onto the subspace determined outside `u`.
pub fn harmonic_on(g: &WeightedGraph, u: &[usize], f: &FieldFunction) -> Result<FieldFunction> {
    if f.len() != g.n_vertices() {
        return Err(GffError::InvalidInput("field length mismatch".into()));
    }
    if u.is_empty() {
        return Ok(f.clone());
    }
    let u_sorted = sorted_interior_subset(g, u)?;
    let in_u: HashSet<usize> = u_sorted.iter().copied().collect();
    let (sub, _global) = subproblem(g, &u_sorted)?;
    // rhs from the fixed values outside u
    let m = u_sorted.len();
    let mut rhs = vec![0.0; m];
    for (k, &v) in u_sorted.iter().enumerate() {
        for (nb, w) in g.neighbors(v) {
            if !in_u.contains(&nb) {
                rhs[k] += w * f.values[nb];
            }
        }
    }
    let (x, _) = conjugate_gradient(&sub.reduced_laplacian_csr(), &rhs, false)?;
    let mut out = f.clone();
    for (k, &v) in u_sorted.iter().enumerate() {
        out.values[v] = x[k];
    }
    Ok(out)
}

/// Orthogonal decomposition of a field: `harmonic_part` agrees with the
/// field off `u` and is harmonic on `u`; `remainder` is supported on `u`.
/// The two parts are Dirichlet-orthogonal and their energies satisfy
/// Pythagoras.
pub fn decompose(
    g: &WeightedGraph,
    u: &[usize],
    field: &FieldFunction,
) -> Result<(FieldFunction, FieldFunction)> {
    let harmonic = harmonic_on(g, u, field)?;
    let remainder = FieldFunction::new(
        field
            .values
            .iter()
            .zip(&harmonic.values)
            .map(|(a, b)| a - b)
            .collect(),
    );
    Ok((harmonic, remainder))
}

/// The martingale trace of revealing a field along a vertex ordering:
/// `times[k]` is the squared Dirichlet norm of the projection of the test
/// function onto the revealed data, `values[k]` the conditional expectation
/// of the pairing given the first `k` reveals.
#[derive(Debug, Clone)]
pub struct ExplorationTrace {
    pub ordering: Vec<usize>,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl ExplorationTrace {
    pub fn steps(&self) -> usize {
        self.ordering.len()
    }
}

/// Reveal `field` along `ordering` and track the conditional expectation of
/// `(field, f0)` in the Dirichlet inner product. After `k` reveals the
/// conditional expectation is the pairing of the harmonic extension of the
/// revealed data with `f0`, and the associated time is
/// `t_k = |P_k f0|^2` where `P_k` projects onto functions determined by the
/// revealed set.
pub fn explore(
    g: &WeightedGraph,
    f0: &FieldFunction,
    ordering: &[usize],
    field: &FieldFunction,
) -> Result<ExplorationTrace> {
    if f0.len() != g.n_vertices() || field.len() != g.n_vertices() {
        return Err(GffError::InvalidInput("field length mismatch".into()));
    }
    for &b in g.boundary() {
        if f0.values[b] != 0.0 {
            return Err(GffError::InvalidInput(
                "test function must vanish on the boundary".into(),
            ));
        }
    }
    let m = g.n_interior();
    if ordering.len() != m {
        return Err(GffError::InvalidInput(format!(
            "ordering covers {} vertices, interior has {m}",
            ordering.len()
        )));
    }
    let mut seen = vec![false; g.n_vertices()];
    for &v in ordering {
        if g.interior_index(v).is_none() {
            return Err(GffError::InvalidInput(format!(
                "vertex {v} is not interior"
            )));
        }
        if seen[v] {
            return Err(GffError::InvalidInput(format!(
                "vertex {v} repeats in the ordering"
            )));
        }
        seen[v] = true;
    }

    let mut times = Vec::with_capacity(m + 1);
    let mut values = Vec::with_capacity(m + 1);
    for k in 0..=m {
        let unrevealed: Vec<usize> = ordering[k..].to_vec();
        let projected_f0 = harmonic_on(g, &unrevealed, f0)?;
        let revealed_field = harmonic_on(g, &unrevealed, field)?;
        times.push(dirichlet_energy(g, &projected_f0)?);
        values.push(dirichlet_inner(g, &revealed_field, f0)?);
    }
    Ok(ExplorationTrace {
        ordering: ordering.to_vec(),
        times,
        values,
    })
}

/// Evaluate the martingale of a test function expressed as a combination of
/// projections of `f0` at reveal indices: for
/// `f = sum_i a_i P_{s_i}(f0)` the martingale is
/// `W_f(t_k) = sum_i a_i W(min(s_i, k))`.
pub fn explore_functional(
    trace: &ExplorationTrace,
    components: &[(usize, f64)],
) -> Result<Vec<f64>> {
    let k_max = trace.steps();
    for &(s, _) in components {
        if s > k_max {
            return Err(GffError::InvalidInput(format!(
                "{s} is not a reveal index (trace has {k_max} steps)"
            )));
        }
    }
    Ok((0..=k_max)
        .map(|k| {
            components
                .iter()
                .map(|&(s, a)| a * trace.values[s.min(k)])
                .sum()
        })
        .collect())
}

/// The default test function: solves `L f = const` on the interior (so its
/// Laplacian is a negative constant there), scaled to unit Dirichlet norm.
pub fn default_exploration_functional(g: &WeightedGraph) -> Result<FieldFunction> {
    if g.zero_mean_mode() {
        return Err(GffError::InvalidInput(
            "exploration needs a boundary-pinned graph".into(),
        ));
    }
    let m = g.n_interior();
    let rhs = vec![1.0; m];
    let (x, _) = conjugate_gradient(&g.reduced_laplacian_csr(), &rhs, false)?;
    // |f|^2 = x^T L x = x^T 1
    let energy: f64 = x.iter().sum();
    let scale = 1.0 / energy.sqrt();
    let mut f0 = FieldFunction::zeros(g.n_vertices());
    for (k, &v) in g.interior().iter().enumerate() {
        f0.values[v] = x[k] * scale;
    }
    Ok(f0)
}

/// Row-sweep ordering of the interior for graphs with 2D positions,
/// alternating direction per row; falls back to ascending ids without
/// positions.
pub fn boustrophedon_ordering(g: &WeightedGraph) -> Vec<usize> {
    let Some(pos) = g.positions().filter(|p| p.dim == 2) else {
        return g.interior().to_vec();
    };
    let mut rows: Vec<(i64, i64, usize)> = g
        .interior()
        .iter()
        .map(|&v| {
            let p = pos.vertex(v);
            (p[0].round() as i64, p[1].round() as i64, v)
        })
        .collect();
    rows.sort_unstable();
    let mut out = Vec::with_capacity(rows.len());
    let mut i = 0;
    let mut flip = false;
    while i < rows.len() {
        let row = rows[i].0;
        let mut j = i;
        while j < rows.len() && rows[j].0 == row {
            j += 1;
        }
        if flip {
            out.extend(rows[i..j].iter().rev().map(|&(_, _, v)| v));
        } else {
            out.extend(rows[i..j].iter().map(|&(_, _, v)| v));
        }
        flip = !flip;
        i = j;
    }
    out
}
