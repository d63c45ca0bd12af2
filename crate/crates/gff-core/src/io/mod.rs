//! File formats: the `GFFG 1` graph and `GFFT 1` triangulation text formats,
//! the `FLD1` binary field format with its text sidecar, `P5` PGM heatmaps,
//! and CSV table writers. Floating-point text is printed with 17 significant
//! digits so round-trips are exact.

mod field;
mod graph_text;
mod pgm;
mod tables;

pub use field::{read_field, write_field, write_field_meta, FieldMeta};
pub use graph_text::{
    parse_graph, parse_triangulation, read_graph, read_triangulation, render_graph,
    render_triangulation, write_graph, write_triangulation,
};
pub use pgm::{write_field_pgm, write_mask_pgm, PgmScale};
pub use tables::{greens_csv, moments_csv, profile_csv, trace_csv, verify_csv};

/// 17-significant-digit decimal rendering; parses back to the same `f64`.
pub fn fmt_g17(x: f64) -> String {
    format!("{x:.16e}")
}
