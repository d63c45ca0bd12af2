//! Planar triangulations, cotangent edge weights, and piecewise-linear
//! Dirichlet energies.

use std::collections::HashMap;

use crate::error::{GffError, Result};
use crate::lattice::graph::{FieldFunction, GraphBuilder, Positions, WeightedGraph};

/// Triangulated planar domain: 2D vertices, triangles by vertex id, and a
/// declared boundary vertex set.
#[derive(Debug, Clone)]
pub struct Triangulation {
    vertices: Vec<[f64; 2]>,
    triangles: Vec<[usize; 3]>,
    boundary: Vec<usize>,
}

impl Triangulation {
    pub fn new(
        vertices: Vec<[f64; 2]>,
        triangles: Vec<[usize; 3]>,
        boundary: Vec<usize>,
    ) -> Result<Self> {
        let n = vertices.len();
        let scale = vertices
            .iter()
            .flat_map(|p| p.iter())
            .fold(0.0f64, |m, &c| m.max(c.abs()))
            .max(1.0);
        let mut edge_count: HashMap<(usize, usize), usize> = HashMap::new();
        for (t, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= n {
                    return Err(GffError::InvalidInput(format!(
                        "triangle {t} references vertex {v} out of range"
                    )));
                }
            }
            if tri[0] == tri[1] || tri[1] == tri[2] || tri[0] == tri[2] {
                return Err(GffError::InvalidInput(format!(
                    "triangle {t} repeats a vertex"
                )));
            }
            let area2 = signed_area2(vertices[tri[0]], vertices[tri[1]], vertices[tri[2]]);
            if area2.abs() <= 1e-12 * scale * scale {
                return Err(GffError::InvalidInput(format!(
                    "triangle {t} is degenerate (area {:.3e})",
                    area2.abs() / 2.0
                )));
            }
            for (a, b) in [(tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])] {
                let key = (a.min(b), a.max(b));
                *edge_count.entry(key).or_insert(0) += 1;
            }
        }
        for (&(a, b), &count) in &edge_count {
            if count > 2 {
                return Err(GffError::InvalidInput(format!(
                    "edge ({a}, {b}) is shared by {count} triangles"
                )));
            }
        }
        let mut boundary = boundary;
        boundary.sort_unstable();
        boundary.dedup();
        if boundary.last().is_some_and(|&b| b >= n) {
            return Err(GffError::InvalidInput(
                "boundary vertex out of range".into(),
            ));
        }
        Ok(Self {
            vertices,
            triangles,
            boundary,
        })
    }

    pub fn n_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn vertices(&self) -> &[[f64; 2]] {
        &self.vertices
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }
}

fn signed_area2(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

/// cot of the angle at `apex` in the triangle (`apex`, `p`, `q`).
fn cot_at(apex: [f64; 2], p: [f64; 2], q: [f64; 2]) -> f64 {
    let u = [p[0] - apex[0], p[1] - apex[1]];
    let v = [q[0] - apex[0], q[1] - apex[1]];
    let dot = u[0] * v[0] + u[1] * v[1];
    let cross = (u[0] * v[1] - u[1] * v[0]).abs();
    dot / cross
}

/// Graph whose Dirichlet energy equals the continuum energy of piecewise
/// linear interpolation: each edge gets `cot(theta)/2` from every incident
/// triangle's opposite angle. Edges with a single incident triangle keep the
/// one-sided weight. Obtuse angles make weights negative; the overall form
/// stays positive definite and construction verifies that.
pub fn cotangent_weights(tri: &Triangulation) -> Result<WeightedGraph> {
    let mut weights: HashMap<(usize, usize), f64> = HashMap::new();
    for t in tri.triangles() {
        let [i, j, k] = *t;
        for (a, b, apex) in [(i, j, k), (j, k, i), (k, i, j)] {
            let cot = cot_at(tri.vertices()[apex], tri.vertices()[a], tri.vertices()[b]);
            *weights.entry((a.min(b), a.max(b))).or_insert(0.0) += cot / 2.0;
        }
    }
    let mut edges: Vec<(usize, usize, f64)> =
        weights.into_iter().map(|((u, v), w)| (u, v, w)).collect();
    edges.sort_by_key(|&(u, v, _)| (u, v));
    let coords: Vec<f64> = tri.vertices().iter().flat_map(|p| [p[0], p[1]]).collect();
    GraphBuilder::new(tri.n_vertices())
        .edges(edges)
        .boundary(tri.boundary().iter().copied())
        .positions(Positions { dim: 2, coords })
        .build()
}

/// Continuum Dirichlet energy of the piecewise-linear extension of `f`:
/// per-triangle `area * |grad|^2` with the affine interpolant's gradient.
pub fn pl_energy(tri: &Triangulation, f: &FieldFunction) -> Result<f64> {
    if f.len() != tri.n_vertices() {
        return Err(GffError::InvalidInput(format!(
            "field length {} does not match {} vertices",
            f.len(),
            tri.n_vertices()
        )));
    }
    let mut energy = 0.0;
    for t in tri.triangles() {
        let [i, j, k] = *t;
        let p1 = tri.vertices()[i];
        let e2 = [tri.vertices()[j][0] - p1[0], tri.vertices()[j][1] - p1[1]];
        let e3 = [tri.vertices()[k][0] - p1[0], tri.vertices()[k][1] - p1[1]];
        let det = e2[0] * e3[1] - e2[1] * e3[0];
        if det == 0.0 {
            return Err(GffError::InvalidInput("degenerate triangle".into()));
        }
        let df2 = f.values[j] - f.values[i];
        let df3 = f.values[k] - f.values[i];
        let gx = (df2 * e3[1] - df3 * e2[1]) / det;
        let gy = (df3 * e2[0] - df2 * e3[0]) / det;
        energy += det.abs() / 2.0 * (gx * gx + gy * gy);
    }
    Ok(energy)
}

/// The same triangulation with all coordinates multiplied by `c`.
pub fn scale_triangulation(tri: &Triangulation, c: f64) -> Result<Triangulation> {
    if !(c > 0.0) {
        return Err(GffError::InvalidInput(
            "scale factor must be positive".into(),
        ));
    }
    Triangulation::new(
        tri.vertices()
            .iter()
            .map(|p| [p[0] * c, p[1] * c])
            .collect(),
        tri.triangles().to_vec(),
        tri.boundary().to_vec(),
    )
}

/// Energy of the same nodal values on the dilated domain, relative to the
/// original: in two dimensions this ratio is exactly 1 (the `c^{d-2}` scaling
/// law at `d = 2`).
pub fn dilation_energy_ratio(tri: &Triangulation, f: &FieldFunction, c: f64) -> Result<f64> {
    let base = pl_energy(tri, f)?;
    if base == 0.0 {
        return Err(GffError::InvalidInput(
            "field has zero Dirichlet energy; the dilation ratio is undefined".into(),
        ));
    }
    let scaled = scale_triangulation(tri, c)?;
    Ok(pl_energy(&scaled, f)? / base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lattice::graph::dirichlet_energy;
    use approx::assert_relative_eq;

    /// Unit square split into two triangles by the main diagonal.
    fn unit_square_cell() -> Triangulation {
        Triangulation::new(
            vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]],
            vec![[0, 1, 2], [0, 2, 3]],
            vec![0, 1, 2, 3],
        )
        .unwrap()
    }

    /// `cells x cells` unit squares, each split by its main diagonal;
    /// boundary = outer rim.
    pub(crate) fn square_grid_triangulation(cells: usize) -> Triangulation {
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

    #[test]
    fn degenerate_triangle_rejected() {
        let err = Triangulation::new(
            vec![[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
            vec![[0, 1, 2]],
            vec![0, 2],
        )
        .unwrap_err();
        assert!(matches!(err, GffError::InvalidInput(_)));
    }

    #[test]
    fn square_grid_weights_are_exact() {
        let tri = square_grid_triangulation(2);
        let g = cotangent_weights(&tri).unwrap();
        let side = 3;
        for e in g.edges() {
            let (ru, cu) = (e.u / side, e.u % side);
            let (rv, cv) = (e.v / side, e.v % side);
            let diagonal = ru != rv && cu != cv;
            if diagonal {
                assert_eq!(e.w, 0.0, "diagonal edge ({}, {})", e.u, e.v);
            } else {
                // axis edges interior to the triangulated region have two
                // incident triangles and weight exactly 1; rim edges have one
                // and weight 1/2
                let rim = (ru == rv && (ru == 0 || ru == 2)) || (cu == cv && (cu == 0 || cu == 2));
                let expect = if rim { 0.5 } else { 1.0 };
                assert_eq!(e.w, expect, "axis edge ({}, {})", e.u, e.v);
            }
        }
    }

    #[test]
    fn equilateral_interior_weight() {
        // two equilateral triangles sharing an interior edge
        let h = 3.0f64.sqrt() / 2.0;
        let tri = Triangulation::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.5, h], [0.5, -h]],
            vec![[0, 1, 2], [0, 3, 1]],
            vec![0, 1, 2, 3],
        )
        .unwrap();
        let g = cotangent_weights(&tri).unwrap();
        let shared = g.edges().iter().find(|e| e.u == 0 && e.v == 1).unwrap();
        assert_relative_eq!(shared.w, 1.0 / 3.0f64.sqrt(), epsilon = 1e-14);
    }

    #[test]
    fn right_angle_gives_zero_weight() {
        // single right isoceles triangle: hypotenuse opposite the right angle
        let tri = Triangulation::new(
            vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]],
            vec![[0, 1, 2]],
            vec![0, 1, 2],
        )
        .unwrap();
        let g = cotangent_weights(&tri).unwrap();
        let hyp = g.edges().iter().find(|e| e.u == 1 && e.v == 2).unwrap();
        assert_eq!(hyp.w, 0.0);
    }

    #[test]
    fn pl_energy_matches_cotangent_energy() {
        let tri = square_grid_triangulation(3);
        let g = cotangent_weights(&tri).unwrap();
        let f = FieldFunction::new(
            (0..tri.n_vertices())
                .map(|v| ((v * 37 % 11) as f64 - 5.0) * 0.3)
                .collect(),
        );
        let pl = pl_energy(&tri, &f).unwrap();
        let graph_energy = dirichlet_energy(&g, &f).unwrap();
        assert_relative_eq!(pl, graph_energy, max_relative = 1e-12);
    }

    #[test]
    fn pl_energy_of_coordinate_function_is_one() {
        let tri = unit_square_cell();
        let f = FieldFunction::new(tri.vertices().iter().map(|p| p[0]).collect());
        assert_relative_eq!(pl_energy(&tri, &f).unwrap(), 1.0, epsilon = 1e-14);
        let constant = FieldFunction::constant(4, 2.0);
        assert_eq!(pl_energy(&tri, &constant).unwrap(), 0.0);
    }

    #[test]
    fn dilation_ratio_is_exactly_one_in_2d() {
        let tri = square_grid_triangulation(3);
        let f = FieldFunction::new((0..16).map(|v| (v as f64 * 0.7).sin()).collect());
        assert_eq!(dilation_energy_ratio(&tri, &f, 2.0).unwrap(), 1.0);
        assert_eq!(dilation_energy_ratio(&tri, &f, 0.5).unwrap(), 1.0);
        assert_relative_eq!(
            dilation_energy_ratio(&tri, &f, 3.7).unwrap(),
            1.0,
            epsilon = 1e-12
        );
    }

    #[test]
    fn dilation_ratio_rejects_flat_fields() {
        let tri = unit_square_cell();
        let constant = FieldFunction::constant(4, 1.0);
        assert!(dilation_energy_ratio(&tri, &constant, 2.0).is_err());
    }
}
