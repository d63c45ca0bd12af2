//! Weighted graphs, lattices and triangulations carrying discrete fields.

mod graph;
mod tri;

pub use graph::{
    box_vertex_id, build_box_lattice, build_box_lattice_capped, build_cycle, build_path,
    build_torus_grid, dirichlet_energy, dirichlet_inner, torus_vertex_id, Edge, FieldFunction,
    GraphBuilder, Positions, Validation, WeightedGraph, DEFAULT_VERTEX_CAP,
};
pub use tri::{
    cotangent_weights, dilation_energy_ratio, pl_energy, scale_triangulation, Triangulation,
};
