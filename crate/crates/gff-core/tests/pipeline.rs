//! End-to-end flow through the public API: triangulate, couple to a weighted
//! graph, sample, decompose, and cross-check moments — every identity at its
//! structural tolerance.

use gff_core::green::{functional_variance, greens_matrix};
use gff_core::lattice::{
    cotangent_weights, dirichlet_energy, dirichlet_inner, pl_energy, FieldFunction,
};
use gff_core::markov::{
    boustrophedon_ordering, decompose, default_exploration_functional, explore,
};
use gff_core::moments::wick_moment;
use gff_core::rng::{stream_rng, StreamDomain};
use gff_core::sampler::sample_dgff_direct;
use gff_core::stats::RunningStats;
use gff_core::verify::random_triangulation;
use rand::Rng;

#[test]
fn triangulation_to_moments_pipeline() {
    let mut rng = stream_rng(90210, StreamDomain::Harness, 0);
    let tri = random_triangulation(5, &mut rng);
    let graph = cotangent_weights(&tri).unwrap();

    // sample the crystal on the cotangent graph
    let sample = sample_dgff_direct(&graph, 4, None).unwrap();
    for &b in graph.boundary() {
        assert_eq!(sample.values[b], 0.0);
    }

    // the finite-element identity holds on the sampled field itself
    let field = sample.as_function();
    let pl = pl_energy(&tri, &field).unwrap();
    let graph_energy = dirichlet_energy(&graph, &field).unwrap();
    assert!((pl - graph_energy).abs() <= 1e-12 * pl.abs());

    // orthogonal decomposition over a random interior subset
    let interior = graph.interior();
    let u: Vec<usize> = interior
        .iter()
        .copied()
        .filter(|_| rng.gen::<bool>())
        .take(interior.len().saturating_sub(1).max(1))
        .collect();
    let u = if u.is_empty() { vec![interior[0]] } else { u };
    let (harmonic, remainder) = decompose(&graph, &u, &field).unwrap();
    let cross = dirichlet_inner(&graph, &harmonic, &remainder).unwrap();
    assert!(cross.abs() <= 1e-10 * graph_energy);

    // exploring the field recovers the full pairing at the final time
    let f0 = default_exploration_functional(&graph).unwrap();
    let ordering = boustrophedon_ordering(&graph);
    let trace = explore(&graph, &f0, &ordering, &field).unwrap();
    let pairing = dirichlet_inner(&graph, &field, &f0).unwrap();
    assert!((trace.values.last().unwrap() - pairing).abs() <= 1e-10);

    // Gaussian fourth moment of one interior value: 3 G(x,x)^2, checked by
    // the Wick enumerator and by Monte Carlo
    let green = greens_matrix(&graph).unwrap();
    let x = interior[interior.len() / 2];
    let ix = green.vertex_ids.binary_search(&x).unwrap();
    let exact4 = wick_moment(&green.matrix, &[ix, ix, ix, ix]).unwrap().value;
    let gxx = green.entry(x, x).unwrap();
    assert!((exact4 - 3.0 * gxx * gxx).abs() <= 1e-12 * exact4);

    let mut stats = RunningStats::new();
    for seed in 0..60_000u64 {
        let s = sample_dgff_direct(&graph, seed, None).unwrap();
        stats.push(s.values[x].powi(4));
    }
    assert!(
        (stats.mean() - exact4).abs() < 5.0 * stats.std_error(),
        "fourth moment {} vs {exact4} (se {})",
        stats.mean(),
        stats.std_error()
    );

    // the variance of the delta functional agrees with the sparse route
    let mut delta = FieldFunction::zeros(graph.n_vertices());
    delta.values[x] = 1.0;
    let sparse_var = functional_variance(&graph, &delta).unwrap();
    assert!((sparse_var - gxx).abs() <= 1e-9 * gxx);
}
