//! Weighted graphs with a distinguished boundary, the arena for every
//! discrete field in this crate.

use crate::error::{GffError, Result};
use crate::linalg::{dense_spectrum_bounds, lanczos_spectrum_bounds, CsrMatrix};

/// Default cap on vertex counts for the lattice builders.
pub const DEFAULT_VERTEX_CAP: usize = 10_000_000;

/// Reduced forms up to this size get an exact dense eigenvalue check at
/// construction; larger ones fall back to a Lanczos estimate.
const DENSE_CHECK_LIMIT: usize = 2048;

/// Relative threshold for the positive-definiteness verdict: the smallest
/// eigenvalue of the reduced form must exceed `PD_RTOL * largest`.
pub(crate) const PD_RTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub w: f64,
}

/// Vertex coordinates, row-major, `dim` entries per vertex.
#[derive(Debug, Clone, PartialEq)]
pub struct Positions {
    pub dim: usize,
    pub coords: Vec<f64>,
}

impl Positions {
    pub fn vertex(&self, id: usize) -> &[f64] {
        &self.coords[id * self.dim..(id + 1) * self.dim]
    }
}

/// A real-valued function on all vertices of a graph.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldFunction {
    pub values: Vec<f64>,
}

impl FieldFunction {
    pub fn new(values: Vec<f64>) -> Self {
        Self { values }
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![0.0; n],
        }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        Self { values: vec![c; n] }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// Whether to run the positive-definiteness eigensolve at construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Validation {
    #[default]
    Check,
    /// Skip the eigensolve (intended for large graphs that are positive
    /// definite by construction, e.g. the lattice builders).
    SkipDefiniteness,
}

/// Immutable weighted graph with boundary. Construct through [`GraphBuilder`]
/// or one of the lattice builders; after construction the graph is safe to
/// share across threads.
#[derive(Debug, Clone)]
pub struct WeightedGraph {
    n_vertices: usize,
    edges: Vec<Edge>,
    boundary: Vec<usize>,
    is_boundary: Vec<bool>,
    positions: Option<Positions>,
    zero_mean: bool,
    // CSR adjacency over all vertices
    adj_ptr: Vec<usize>,
    adj_vert: Vec<usize>,
    adj_weight: Vec<f64>,
    interior: Vec<usize>,
    interior_index: Vec<usize>, // usize::MAX on boundary vertices
}

pub struct GraphBuilder {
    n_vertices: usize,
    edges: Vec<Edge>,
    boundary: Vec<usize>,
    positions: Option<Positions>,
    zero_mean: bool,
    validation: Validation,
}

impl GraphBuilder {
    pub fn new(n_vertices: usize) -> Self {
        Self {
            n_vertices,
            edges: Vec::new(),
            boundary: Vec::new(),
            positions: None,
            zero_mean: false,
            validation: Validation::Check,
        }
    }

    pub fn edge(mut self, u: usize, v: usize, w: f64) -> Self {
        self.edges.push(Edge { u, v, w });
        self
    }

    pub fn edges(mut self, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Self {
        self.edges
            .extend(edges.into_iter().map(|(u, v, w)| Edge { u, v, w }));
        self
    }

    pub fn boundary(mut self, boundary: impl IntoIterator<Item = usize>) -> Self {
        self.boundary.extend(boundary);
        self
    }

    pub fn positions(mut self, positions: Positions) -> Self {
        self.positions = Some(positions);
        self
    }

    pub fn zero_mean(mut self, flag: bool) -> Self {
        self.zero_mean = flag;
        self
    }

    pub fn validation(mut self, validation: Validation) -> Self {
        self.validation = validation;
        self
    }

    pub fn build(self) -> Result<WeightedGraph> {
        WeightedGraph::from_parts(
            self.n_vertices,
            self.edges,
            self.boundary,
            self.positions,
            self.zero_mean,
            self.validation,
        )
    }
}

impl WeightedGraph {
    fn from_parts(
        n_vertices: usize,
        mut edges: Vec<Edge>,
        mut boundary: Vec<usize>,
        positions: Option<Positions>,
        zero_mean: bool,
        validation: Validation,
    ) -> Result<Self> {
        if n_vertices == 0 {
            return Err(GffError::InvalidLattice("graph has no vertices".into()));
        }
        if let Some(p) = &positions {
            if p.coords.len() != n_vertices * p.dim || p.dim == 0 {
                return Err(GffError::InvalidInput(format!(
                    "positions carry {} coords for {} vertices of dimension {}",
                    p.coords.len(),
                    n_vertices,
                    p.dim
                )));
            }
        }
        for e in edges.iter_mut() {
            if e.u >= n_vertices || e.v >= n_vertices {
                return Err(GffError::InvalidInput(format!(
                    "edge ({}, {}) out of range for {} vertices",
                    e.u, e.v, n_vertices
                )));
            }
            if e.u == e.v {
                return Err(GffError::InvalidLattice(format!(
                    "self-loop at vertex {}",
                    e.u
                )));
            }
            if !e.w.is_finite() {
                return Err(GffError::InvalidInput(format!(
                    "non-finite weight on edge ({}, {})",
                    e.u, e.v
                )));
            }
            if e.u > e.v {
                std::mem::swap(&mut e.u, &mut e.v);
            }
        }
        edges.sort_by_key(|e| (e.u, e.v));
        for pair in edges.windows(2) {
            if pair[0].u == pair[1].u && pair[0].v == pair[1].v {
                return Err(GffError::InvalidLattice(format!(
                    "duplicate edge ({}, {})",
                    pair[0].u, pair[0].v
                )));
            }
        }
        boundary.sort_unstable();
        boundary.dedup();
        if let Some(&b) = boundary.last() {
            if b >= n_vertices {
                return Err(GffError::InvalidInput(format!(
                    "boundary vertex {b} out of range"
                )));
            }
        }
        if zero_mean && !boundary.is_empty() {
            return Err(GffError::InvalidLattice(
                "zero-mean graphs cannot also carry a boundary".into(),
            ));
        }
        if !zero_mean && boundary.is_empty() {
            return Err(GffError::InvalidLattice(
                "boundary is empty and zero-mean mode is off; the quadratic form is degenerate"
                    .into(),
            ));
        }

        let mut is_boundary = vec![false; n_vertices];
        for &b in &boundary {
            is_boundary[b] = true;
        }
        // fully-pinned graphs (no interior) are allowed; their field space is
        // empty and the reduced form is vacuously positive definite
        let interior: Vec<usize> = (0..n_vertices).filter(|v| !is_boundary[*v]).collect();
        let mut interior_index = vec![usize::MAX; n_vertices];
        for (k, &v) in interior.iter().enumerate() {
            interior_index[v] = k;
        }

        // CSR adjacency
        let mut deg = vec![0usize; n_vertices + 1];
        for e in &edges {
            deg[e.u + 1] += 1;
            deg[e.v + 1] += 1;
        }
        for i in 0..n_vertices {
            deg[i + 1] += deg[i];
        }
        let mut adj_vert = vec![0usize; edges.len() * 2];
        let mut adj_weight = vec![0.0f64; edges.len() * 2];
        let mut cursor = deg.clone();
        for e in &edges {
            adj_vert[cursor[e.u]] = e.v;
            adj_weight[cursor[e.u]] = e.w;
            cursor[e.u] += 1;
            adj_vert[cursor[e.v]] = e.u;
            adj_weight[cursor[e.v]] = e.w;
            cursor[e.v] += 1;
        }

        let graph = Self {
            n_vertices,
            edges,
            boundary,
            is_boundary,
            positions,
            zero_mean,
            adj_ptr: deg,
            adj_vert,
            adj_weight,
            interior,
            interior_index,
        };

        if validation == Validation::Check {
            graph.check_positive_definite()?;
        }
        Ok(graph)
    }

    /// Verdict on strict positive definiteness of the reduced quadratic form:
    /// smallest eigenvalue must exceed `1e-10 *` largest.
    pub fn check_positive_definite(&self) -> Result<()> {
        let bounds = if self.zero_mean {
            if self.n_vertices < 2 {
                return Ok(());
            }
            let l = self.laplacian_csr();
            if self.n_vertices <= DENSE_CHECK_LIMIT {
                dense_spectrum_bounds(&l.to_dense(), true)
            } else {
                lanczos_spectrum_bounds(&l, true, 160)
            }
        } else {
            if self.interior.is_empty() {
                return Ok(());
            }
            let l = self.reduced_laplacian_csr();
            if self.interior.len() <= DENSE_CHECK_LIMIT {
                dense_spectrum_bounds(&l.to_dense(), false)
            } else {
                lanczos_spectrum_bounds(&l, false, 160)
            }
        };
        if !(bounds.min > PD_RTOL * bounds.max.max(0.0)) {
            return Err(GffError::InvalidLattice(format!(
                "quadratic form is not strictly positive definite: \
                 eigenvalue range [{:.6e}, {:.6e}]",
                bounds.min, bounds.max
            )));
        }
        Ok(())
    }

    pub fn n_vertices(&self) -> usize {
        self.n_vertices
    }

    pub fn n_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    pub fn is_boundary(&self, v: usize) -> bool {
        self.is_boundary[v]
    }

    pub fn zero_mean_mode(&self) -> bool {
        self.zero_mean
    }

    pub fn positions(&self) -> Option<&Positions> {
        self.positions.as_ref()
    }

    /// Interior vertex ids, ascending.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn n_interior(&self) -> usize {
        self.interior.len()
    }

    /// Position of `v` in [`Self::interior`], or `None` for boundary vertices.
    pub fn interior_index(&self, v: usize) -> Option<usize> {
        let k = self.interior_index[v];
        (k != usize::MAX).then_some(k)
    }

    /// Neighbors of `v` with edge weights.
    pub fn neighbors(&self, v: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        (self.adj_ptr[v]..self.adj_ptr[v + 1]).map(|k| (self.adj_vert[k], self.adj_weight[k]))
    }

    /// Total incident weight at `v`.
    pub fn weighted_degree(&self, v: usize) -> f64 {
        self.neighbors(v).map(|(_, w)| w).sum()
    }

    /// Full Laplacian over all vertices.
    pub fn laplacian_csr(&self) -> CsrMatrix {
        let mut t = Vec::with_capacity(self.edges.len() * 4 + self.n_vertices);
        for e in &self.edges {
            t.push((e.u, e.u, e.w));
            t.push((e.v, e.v, e.w));
            t.push((e.u, e.v, -e.w));
            t.push((e.v, e.u, -e.w));
        }
        CsrMatrix::from_triplets(self.n_vertices, &t)
    }

    /// Laplacian restricted to interior rows/columns.
    pub fn reduced_laplacian_csr(&self) -> CsrMatrix {
        let m = self.interior.len();
        let mut t = Vec::with_capacity(self.edges.len() * 4);
        for e in &self.edges {
            let iu = self.interior_index[e.u];
            let iv = self.interior_index[e.v];
            if iu != usize::MAX {
                t.push((iu, iu, e.w));
            }
            if iv != usize::MAX {
                t.push((iv, iv, e.w));
            }
            if iu != usize::MAX && iv != usize::MAX {
                t.push((iu, iv, -e.w));
                t.push((iv, iu, -e.w));
            }
        }
        CsrMatrix::from_triplets(m, &t)
    }

    pub fn reduced_laplacian_dense(&self) -> nalgebra::DMatrix<f64> {
        self.reduced_laplacian_csr().to_dense()
    }
}

/// Dirichlet energy `sum_e w(e) (f(v) - f(u))^2`.
pub fn dirichlet_energy(g: &WeightedGraph, f: &FieldFunction) -> Result<f64> {
    dirichlet_inner(g, f, f)
}

/// Dirichlet inner product `sum_e w(e) (f1(v) - f1(u)) (f2(v) - f2(u))`.
pub fn dirichlet_inner(g: &WeightedGraph, f1: &FieldFunction, f2: &FieldFunction) -> Result<f64> {
    if f1.len() != g.n_vertices() || f2.len() != g.n_vertices() {
        return Err(GffError::InvalidInput(format!(
            "field length {} / {} does not match {} vertices",
            f1.len(),
            f2.len(),
            g.n_vertices()
        )));
    }
    let mut acc = 0.0;
    for e in g.edges() {
        let d1 = f1.values[e.v] - f1.values[e.u];
        let d2 = f2.values[e.v] - f2.values[e.u];
        acc += e.w * d1 * d2;
    }
    Ok(acc)
}

/// Vertex id of the point `coords` in `[-n, n]^d`, row-major.
pub fn box_vertex_id(d: usize, n: i64, coords: &[i64]) -> usize {
    debug_assert_eq!(coords.len(), d);
    let side = (2 * n + 1) as usize;
    let mut id = 0usize;
    for &c in coords {
        debug_assert!(c.abs() <= n);
        id = id * side + (c + n) as usize;
    }
    id
}

/// Nearest-neighbor lattice on `[-n, n]^d` with constant edge weight.
/// Boundary: vertices with any coordinate of absolute value `n`.
pub fn build_box_lattice(d: usize, n: i64, weight: f64) -> Result<WeightedGraph> {
    build_box_lattice_capped(d, n, weight, DEFAULT_VERTEX_CAP, Validation::Check)
}

pub fn build_box_lattice_capped(
    d: usize,
    n: i64,
    weight: f64,
    cap: usize,
    validation: Validation,
) -> Result<WeightedGraph> {
    if d < 1 {
        return Err(GffError::InvalidInput(
            "dimension must be at least 1".into(),
        ));
    }
    if n < 1 {
        return Err(GffError::InvalidInput("radius must be at least 1".into()));
    }
    let side = (2 * n + 1) as usize;
    let mut count: usize = 1;
    for _ in 0..d {
        count = count
            .checked_mul(side)
            .filter(|&c| c <= cap)
            .ok_or_else(|| {
                GffError::Resource(format!(
                    "box lattice [-{n}, {n}]^{d} exceeds the vertex cap {cap}"
                ))
            })?;
    }

    let n_vertices = count;
    let mut edges = Vec::new();
    let mut boundary = Vec::new();
    let mut coords_buf = vec![-n; d];
    let mut positions = Vec::with_capacity(n_vertices * d);
    for id in 0..n_vertices {
        // decode row-major id -> coords
        let mut rem = id;
        for k in (0..d).rev() {
            coords_buf[k] = (rem % side) as i64 - n;
            rem /= side;
        }
        positions.extend(coords_buf.iter().map(|&c| c as f64));
        if coords_buf.iter().any(|c| c.abs() == n) {
            boundary.push(id);
        }
        for k in 0..d {
            if coords_buf[k] < n {
                coords_buf[k] += 1;
                let nb = box_vertex_id(d, n, &coords_buf);
                coords_buf[k] -= 1;
                edges.push((id, nb, weight));
            }
        }
    }

    GraphBuilder::new(n_vertices)
        .edges(edges)
        .boundary(boundary)
        .positions(Positions {
            dim: d,
            coords: positions,
        })
        .validation(validation)
        .build()
}

/// Vertex id of `(row, col)` on the `m x n` torus, row-major.
pub fn torus_vertex_id(n_cols: usize, row: usize, col: usize) -> usize {
    row * n_cols + col
}

/// The `m x n` torus grid graph: wraparound nearest neighbors, no boundary,
/// zero-mean mode.
pub fn build_torus_grid(m: usize, n: usize, weight: f64) -> Result<WeightedGraph> {
    if m < 3 || n < 3 {
        return Err(GffError::InvalidLattice(format!(
            "torus grid requires m, n >= 3 (got {m} x {n}); smaller sides create multi-edges"
        )));
    }
    let n_vertices = m
        .checked_mul(n)
        .filter(|&c| c <= DEFAULT_VERTEX_CAP)
        .ok_or_else(|| GffError::Resource("torus grid exceeds the vertex cap".into()))?;
    let mut edges = Vec::with_capacity(2 * n_vertices);
    let mut positions = Vec::with_capacity(2 * n_vertices);
    for i in 0..m {
        for j in 0..n {
            let v = torus_vertex_id(n, i, j);
            positions.push(i as f64);
            positions.push(j as f64);
            edges.push((v, torus_vertex_id(n, (i + 1) % m, j), weight));
            edges.push((v, torus_vertex_id(n, i, (j + 1) % n), weight));
        }
    }
    GraphBuilder::new(n_vertices)
        .edges(edges)
        .zero_mean(true)
        .positions(Positions {
            dim: 2,
            coords: positions,
        })
        .build()
}

/// Path on `0..=length` with constant edge weight; boundary `{0, length}`.
pub fn build_path(length: usize, weight: f64) -> Result<WeightedGraph> {
    if length < 2 {
        return Err(GffError::InvalidLattice(
            "path needs length >= 2 for a non-empty interior".into(),
        ));
    }
    let n = length + 1;
    let positions: Vec<f64> = (0..n).map(|i| i as f64).collect();
    GraphBuilder::new(n)
        .edges((0..length).map(|i| (i, i + 1, weight)))
        .boundary([0, length])
        .positions(Positions {
            dim: 1,
            coords: positions,
        })
        .build()
}

/// Cycle on `n` vertices with constant edge weight, zero-mean mode.
pub fn build_cycle(n: usize, weight: f64) -> Result<WeightedGraph> {
    if n < 3 {
        return Err(GffError::InvalidLattice(
            "cycle needs at least 3 vertices".into(),
        ));
    }
    let positions: Vec<f64> = (0..n).map(|i| i as f64).collect();
    GraphBuilder::new(n)
        .edges((0..n).map(|i| (i, (i + 1) % n, weight)))
        .zero_mean(true)
        .positions(Positions {
            dim: 1,
            coords: positions,
        })
        .build()
}
