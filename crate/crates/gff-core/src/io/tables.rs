//! CSV table writers. Values carry 17 significant digits.

use std::fmt::Write as _;

use crate::analysis::AverageProfile;
use crate::green::GreensMatrix;
use crate::io::fmt_g17;
use crate::markov::ExplorationTrace;

/// Green's matrix as CSV: a header row of vertex ids, then one row per
/// vertex (id first).
pub fn greens_csv(g: &GreensMatrix) -> String {
    let mut out = String::new();
    out.push_str("id");
    for &v in &g.vertex_ids {
        write!(out, ",{v}").unwrap();
    }
    out.push('\n');
    for (i, &v) in g.vertex_ids.iter().enumerate() {
        write!(out, "{v}").unwrap();
        for j in 0..g.vertex_ids.len() {
            write!(out, ",{}", fmt_g17(g.matrix[(i, j)])).unwrap();
        }
        out.push('\n');
    }
    out
}

/// Exploration trace as CSV rows `(k, t_k, W_k)`.
pub fn trace_csv(trace: &ExplorationTrace) -> String {
    let mut out = String::from("k,t,w\n");
    for (k, (t, w)) in trace.times.iter().zip(&trace.values).enumerate() {
        writeln!(out, "{k},{},{}", fmt_g17(*t), fmt_g17(*w)).unwrap();
    }
    out
}

/// Average profile as CSV rows `(t, radius, circle_mean, disc_mean)`.
pub fn profile_csv(profile: &AverageProfile) -> String {
    let mut out = String::from("t,radius,circle_mean,disc_mean\n");
    for i in 0..profile.t_grid.len() {
        writeln!(
            out,
            "{},{},{},{}",
            fmt_g17(profile.t_grid[i]),
            fmt_g17(profile.radii[i]),
            fmt_g17(profile.circle_means[i]),
            fmt_g17(profile.disc_means[i]),
        )
        .unwrap();
    }
    out
}

/// Moment table as CSV rows `(tuple, exact, empirical, std_error)`;
/// empirical columns are empty when no Monte Carlo run was requested.
pub fn moments_csv(rows: &[(String, f64, Option<(f64, f64)>)]) -> String {
    let mut out = String::from("tuple,exact,empirical,std_error\n");
    for (tuple, exact, empirical) in rows {
        match empirical {
            Some((est, se)) => writeln!(
                out,
                "{tuple},{},{},{}",
                fmt_g17(*exact),
                fmt_g17(*est),
                fmt_g17(*se)
            )
            .unwrap(),
            None => writeln!(out, "{tuple},{},,", fmt_g17(*exact)).unwrap(),
        }
    }
    out
}

/// Generic verification report rows `(check, measured, oracle, tolerance, pass)`.
pub fn verify_csv(rows: &[crate::verify::VerifyRow]) -> String {
    let mut out = String::from("check,measured,oracle,tolerance,pass\n");
    for row in rows {
        writeln!(
            out,
            "{},{},{},{},{}",
            row.check,
            fmt_g17(row.measured),
            fmt_g17(row.oracle),
            fmt_g17(row.tolerance),
            row.pass
        )
        .unwrap();
    }
    out
}
