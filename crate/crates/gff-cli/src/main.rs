//! `gff-lab`: sample discrete Gaussian free fields on lattices, graphs and
//! triangulations, compute Green's functions and exploration traces, and run
//! the verification suites.
//!
//! Exit codes: 0 success, 1 verification-suite failure, 2 usage error,
//! 3 numerical failure.

mod manifest;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use gff_core::analysis::{disc_average_profile, GridField, ThickAnalysis, THICK_SCALES};
use gff_core::error::GffError;
use gff_core::green::{greens_by_walk, greens_column, greens_matrix};
use gff_core::io::{
    fmt_g17, greens_csv, moments_csv, profile_csv, read_graph, read_triangulation, trace_csv,
    verify_csv, write_field, write_field_meta, write_field_pgm, write_graph, write_mask_pgm,
    FieldMeta,
};
use gff_core::lattice::{
    build_box_lattice_capped, build_cycle, build_path, build_torus_grid, cotangent_weights,
    Validation, WeightedGraph, DEFAULT_VERTEX_CAP,
};
use gff_core::markov::{boustrophedon_ordering, default_exploration_functional, explore};
use gff_core::moments::{empirical_moment, wick_moment};
use gff_core::sampler::{
    sample_dgff_direct, sample_massive, sample_square_zero_boundary, sample_torus_fft, FieldSample,
};
use gff_core::verify::{
    all_pass, suite_covariance, suite_explore, suite_fem, suite_markov, suite_scaling, suite_wick,
    VerifyRow,
};
use manifest::RunManifest;

#[derive(Parser)]
#[command(
    name = "gff-lab",
    version,
    about = "Discrete Gaussian free field laboratory"
)]
struct Cli {
    /// Worker threads for parallel sections; results are independent of this.
    #[arg(long, global = true, default_value_t = 1)]
    threads: usize,
    /// Manifest path (default: `<first output>.manifest.json`).
    #[arg(long, global = true)]
    manifest: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a lattice graph and write it as GFFG text.
    Lattice(LatticeArgs),
    /// Sample a field realization and write it as FLD1 (+ sidecar).
    Sample(SampleArgs),
    /// Green's functions: exact matrix/column solves or walk estimates.
    Green(GreenArgs),
    /// Reveal a sampled field along an ordering; write the martingale trace.
    Explore(ExploreArgs),
    /// Exact Wick moments with optional Monte Carlo cross-check.
    Moments(MomentsArgs),
    /// Thick-point mask and box-counting dimension of a sampled field.
    Thick(ThickArgs),
    /// Run a named verification suite (fem, covariance, markov, wick,
    /// scaling, explore); exit 0 iff all checks pass.
    Verify(VerifyArgs),
}

#[derive(Args)]
struct LatticeArgs {
    /// box | torus | path | cycle | cotangent
    #[arg(long)]
    kind: String,
    /// Dimension (box).
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Box radius, torus columns, path length, or cycle size.
    #[arg(long)]
    n: Option<i64>,
    /// Torus rows.
    #[arg(long)]
    m: Option<usize>,
    /// Edge weight.
    #[arg(long, default_value_t = 1.0)]
    weight: f64,
    /// Triangulation file (cotangent).
    #[arg(long)]
    tri: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    /// box | torus | tri-file
    #[arg(long)]
    lattice: String,
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Box radius or torus columns.
    #[arg(long)]
    n: Option<i64>,
    /// Torus rows.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 1.0)]
    weight: f64,
    /// Triangulation file (tri-file).
    #[arg(long)]
    tri: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Squared mass of the massive variant (0 = massless).
    #[arg(long, default_value_t = 0.0)]
    mass2: f64,
    /// direct | fft (default: fft on torus, direct otherwise).
    #[arg(long)]
    method: Option<String>,
    /// Emit the raw FFT law instead of the calibrated one.
    #[arg(long, default_value_t = false)]
    uncalibrated: bool,
    #[arg(long)]
    out: PathBuf,
    /// Optional grayscale heatmap (PGM, 2D lattices only).
    #[arg(long)]
    heatmap: Option<PathBuf>,
}

#[derive(Args)]
struct GreenArgs {
    #[arg(long)]
    graph: PathBuf,
    /// Dense Green's matrix (CSV).
    #[arg(long, default_value_t = false)]
    exact: bool,
    /// One column `G delta_x` by sparse solve.
    #[arg(long)]
    column: Option<usize>,
    /// Walk occupation-time estimate of G(x, y).
    #[arg(long, default_value_t = false)]
    walk: bool,
    #[arg(long)]
    x: Option<usize>,
    #[arg(long)]
    y: Option<usize>,
    #[arg(long, default_value_t = 100_000)]
    walks: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ExploreArgs {
    /// Grid side (odd, >= 3); the field is sampled on this square grid.
    #[arg(long, default_value_t = 5)]
    grid: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MomentsArgs {
    /// Grid side for the default covariance kernel.
    #[arg(long, default_value_t = 5)]
    grid: usize,
    /// Graph file overriding the grid kernel.
    #[arg(long)]
    graph: Option<PathBuf>,
    /// Comma-separated row indices into the Green kernel.
    #[arg(long)]
    indices: String,
    /// Expected order; checked against the index count when given.
    #[arg(long)]
    k: Option<usize>,
    /// Monte Carlo cross-check sample count (0 = exact only).
    #[arg(long, default_value_t = 0)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ThickArgs {
    /// Thickness level in [0, 2].
    #[arg(long)]
    a: f64,
    /// Grid side (odd, >= 65).
    #[arg(long, default_value_t = 513)]
    size: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Comma-separated box-counting scales.
    #[arg(long)]
    scales: Option<String>,
    /// Output prefix: writes `<prefix>.mask.pgm`, `<prefix>.field.pgm`,
    /// `<prefix>.dim.csv`.
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// fem | covariance | markov | wick | scaling | explore
    suite: String,
    #[arg(long, default_value_t = 5)]
    grid: usize,
    /// Monte Carlo sample count (the explore suite caps this at 20000; each
    /// of its samples costs a full trace of solves).
    #[arg(long, default_value_t = 100_000)]
    samples: u64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Dimension (scaling suite).
    #[arg(long, default_value_t = 2)]
    d: usize,
    /// Report CSV path (default `verify_<suite>.csv`).
    #[arg(long)]
    out: Option<PathBuf>,
}

fn vertex_cap() -> usize {
    std::env::var("GFFLAB_MAX_VERTICES")
        .ok()
        .and_then(|v| v.parse().ok())
        .unwrap_or(DEFAULT_VERTEX_CAP)
}

/// Exact eigensolve validation is cheap on small graphs; large lattices from
/// the builders are positive definite by construction and skip it.
fn validation_for(n_vertices: usize) -> Validation {
    if n_vertices <= 50_000 {
        Validation::Check
    } else {
        Validation::SkipDefiniteness
    }
}

fn usage(msg: impl Into<String>) -> GffError {
    GffError::InvalidInput(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads == 0 {
        eprintln!("gff-lab: --threads must be at least 1");
        return ExitCode::from(2);
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build_global()
        .ok();

    let command_line: Vec<String> = std::env::args().skip(1).collect();
    let started = Instant::now();
    let result = run(&cli.command, command_line);
    match result {
        Ok((mut manifest, failed_checks)) => {
            manifest.wall_time_seconds = started.elapsed().as_secs_f64();
            let path = cli.manifest.unwrap_or_else(|| manifest.default_path());
            if let Err(err) = manifest.write(&path) {
                eprintln!("gff-lab: cannot write manifest: {err}");
                return ExitCode::from(3);
            }
            if failed_checks {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(err) => {
            eprintln!("gff-lab: {err}");
            match err {
                GffError::Numerical(_) => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn run(command: &Command, command_line: Vec<String>) -> gff_core::Result<(RunManifest, bool)> {
    match command {
        Command::Lattice(args) => cmd_lattice(args, command_line).map(|m| (m, false)),
        Command::Sample(args) => cmd_sample(args, command_line).map(|m| (m, false)),
        Command::Green(args) => cmd_green(args, command_line).map(|m| (m, false)),
        Command::Explore(args) => cmd_explore(args, command_line).map(|m| (m, false)),
        Command::Moments(args) => cmd_moments(args, command_line).map(|m| (m, false)),
        Command::Thick(args) => cmd_thick(args, command_line).map(|m| (m, false)),
        Command::Verify(args) => cmd_verify(args, command_line),
    }
}

fn cmd_lattice(args: &LatticeArgs, command_line: Vec<String>) -> gff_core::Result<RunManifest> {
    let mut manifest = RunManifest::new(command_line, 0);
    let cap = vertex_cap();
    let graph = match args.kind.as_str() {
        "box" => {
            let n = args.n.ok_or_else(|| usage("box lattices need --n"))?;
            let side = (2 * n + 1) as usize;
            build_box_lattice_capped(
                args.d,
                n,
                args.weight,
                cap,
                validation_for(side.pow(args.d as u32)),
            )?
        }
        "torus" => {
            let m = args.m.ok_or_else(|| usage("torus grids need --m"))?;
            let n = args.n.ok_or_else(|| usage("torus grids need --n"))? as usize;
            if m.saturating_mul(n) > cap {
                return Err(GffError::Resource(format!(
                    "torus {m} x {n} exceeds the vertex cap {cap}"
                )));
            }
            build_torus_grid(m, n, args.weight)?
        }
        "path" => {
            let n = args.n.ok_or_else(|| usage("paths need --n"))? as usize;
            build_path(n, args.weight)?
        }
        "cycle" => {
            let n = args.n.ok_or_else(|| usage("cycles need --n"))? as usize;
            build_cycle(n, args.weight)?
        }
        "cotangent" => {
            let tri_path = args
                .tri
                .as_ref()
                .ok_or_else(|| usage("cotangent graphs need --tri"))?;
            manifest.hash_input(tri_path)?;
            cotangent_weights(&read_triangulation(tri_path)?)?
        }
        other => return Err(usage(format!("unknown lattice kind `{other}`"))),
    };
    write_graph(&args.out, &graph)?;
    manifest.record_output(&args.out);
    Ok(manifest)
}

fn cmd_sample(args: &SampleArgs, command_line: Vec<String>) -> gff_core::Result<RunManifest> {
    let mut manifest = RunManifest::new(command_line, args.seed);
    let cap = vertex_cap();
    let method = match (args.method.as_deref(), args.lattice.as_str()) {
        (Some("direct"), _) => "direct",
        (Some("fft"), "torus") => "fft",
        (Some("fft"), other) => {
            return Err(usage(format!(
                "--method fft requires a torus lattice, got `{other}`"
            )))
        }
        (Some(other), _) => return Err(usage(format!("unknown method `{other}`"))),
        (None, "torus") => "fft",
        (None, _) => "direct",
    };
    if method == "fft" && args.mass2 != 0.0 {
        return Err(usage("--mass2 is not supported by the FFT sampler"));
    }

    let mut heat_dims: Option<(usize, usize)> = None;
    let (sample, graph_desc): (FieldSample, String) = match args.lattice.as_str() {
        "torus" => {
            let m = args.m.ok_or_else(|| usage("torus sampling needs --m"))?;
            let n = args.n.ok_or_else(|| usage("torus sampling needs --n"))? as usize;
            if m.saturating_mul(n) > cap {
                return Err(GffError::Resource(format!(
                    "torus {m} x {n} exceeds the vertex cap {cap}"
                )));
            }
            heat_dims = Some((m, n));
            let desc = format!("torus m={m} n={n} w={}", args.weight);
            if method == "fft" {
                if args.weight != 1.0 {
                    return Err(usage("the FFT sampler covers unit-weight torus grids"));
                }
                (sample_torus_fft(m, n, args.seed, !args.uncalibrated)?, desc)
            } else {
                let g = build_torus_grid(m, n, args.weight)?;
                let s = if args.mass2 > 0.0 {
                    sample_massive(&g, args.mass2, args.seed)?
                } else {
                    sample_dgff_direct(&g, args.seed, None)?
                };
                (s, desc)
            }
        }
        "box" => {
            let n = args.n.ok_or_else(|| usage("box sampling needs --n"))?;
            let desc = format!("box d={} n={n} w={}", args.d, args.weight);
            let side = (2 * n + 1) as usize;
            if args.d == 2 && args.mass2 == 0.0 {
                // exact spectral factorization; scales to large grids
                if side * side > cap {
                    return Err(GffError::Resource(format!(
                        "box side {side} exceeds the vertex cap {cap}"
                    )));
                }
                heat_dims = Some((side, side));
                let mut s = sample_square_zero_boundary(side, args.seed)?;
                if args.weight != 1.0 {
                    let scale = 1.0 / args.weight.sqrt();
                    for v in s.values.iter_mut() {
                        *v *= scale;
                    }
                }
                (s, desc)
            } else {
                let g = build_box_lattice_capped(
                    args.d,
                    n,
                    args.weight,
                    cap,
                    validation_for(side.pow(args.d as u32)),
                )?;
                if args.d == 2 {
                    heat_dims = Some((side, side));
                }
                let s = if args.mass2 > 0.0 {
                    sample_massive(&g, args.mass2, args.seed)?
                } else {
                    sample_dgff_direct(&g, args.seed, None)?
                };
                (s, desc)
            }
        }
        "tri-file" => {
            let tri_path = args
                .tri
                .as_ref()
                .ok_or_else(|| usage("tri-file sampling needs --tri"))?;
            manifest.hash_input(tri_path)?;
            let tri = read_triangulation(tri_path)?;
            let g = cotangent_weights(&tri)?;
            let s = if args.mass2 > 0.0 {
                sample_massive(&g, args.mass2, args.seed)?
            } else {
                sample_dgff_direct(&g, args.seed, None)?
            };
            (s, format!("cotangent {}", tri_path.display()))
        }
        other => return Err(usage(format!("unknown lattice `{other}`"))),
    };

    write_field(&args.out, &sample)?;
    manifest.record_output(&args.out);
    let meta = FieldMeta {
        graph: graph_desc,
        method: sample.method.name().to_string(),
        params: vec![
            ("seed".into(), args.seed.to_string()),
            ("mass2".into(), fmt_g17(args.mass2)),
            ("n_values".into(), sample.values.len().to_string()),
        ],
    };
    let meta_path = write_field_meta(&args.out, &meta)?;
    manifest.record_output(&meta_path);

    if let Some(heatmap) = &args.heatmap {
        let (rows, cols) =
            heat_dims.ok_or_else(|| usage("--heatmap needs a 2D lattice (torus or box d=2)"))?;
        let grid = GridField::new(rows, cols, sample.values.clone())?;
        write_field_pgm(heatmap, &grid)?;
        manifest.record_output(heatmap);
        manifest.record_output(&heatmap.with_extension("pgm.meta"));
    }
    Ok(manifest)
}

fn cmd_green(args: &GreenArgs, command_line: Vec<String>) -> gff_core::Result<RunManifest> {
    let mut manifest = RunManifest::new(command_line, args.seed);
    manifest.hash_input(&args.graph)?;
    let g = read_graph(&args.graph)?;
    let modes = args.exact as u8 + args.walk as u8 + args.column.is_some() as u8;
    if modes != 1 {
        return Err(usage("pick exactly one of --exact, --column, --walk"));
    }
    let csv = if args.exact {
        greens_csv(&greens_matrix(&g)?)
    } else if let Some(x) = args.column {
        let col = greens_column(&g, x)?;
        let ids: Vec<usize> = if g.zero_mean_mode() {
            (0..g.n_vertices()).collect()
        } else {
            g.interior().to_vec()
        };
        let mut out = String::from("id,value\n");
        for (id, v) in ids.iter().zip(&col) {
            out.push_str(&format!("{id},{}\n", fmt_g17(*v)));
        }
        out
    } else {
        let x = args.x.ok_or_else(|| usage("--walk needs --x"))?;
        let y = args.y.ok_or_else(|| usage("--walk needs --y"))?;
        let (est, se) = greens_by_walk(&g, x, y, args.walks, args.seed)?;
        format!(
            "x,y,walks,estimate,std_error\n{x},{y},{},{},{}\n",
            args.walks,
            fmt_g17(est),
            fmt_g17(se)
        )
    };
    std::fs::write(&args.out, csv)?;
    manifest.record_output(&args.out);
    Ok(manifest)
}

fn cmd_explore(args: &ExploreArgs, command_line: Vec<String>) -> gff_core::Result<RunManifest> {
    let mut manifest = RunManifest::new(command_line, args.seed);
    if args.grid < 3 || args.grid % 2 == 0 {
        return Err(usage("--grid must be an odd side of at least 3"));
    }
    let n = ((args.grid - 1) / 2) as i64;
    let g = build_box_lattice_capped(
        2,
        n,
        1.0,
        vertex_cap(),
        validation_for(args.grid * args.grid),
    )?;
    let f0 = default_exploration_functional(&g)?;
    let ordering = boustrophedon_ordering(&g);
    let field = sample_dgff_direct(&g, args.seed, None)?.as_function();
    let trace = explore(&g, &f0, &ordering, &field)?;
    std::fs::write(&args.out, trace_csv(&trace))?;
    manifest.record_output(&args.out);
    Ok(manifest)
}

fn cmd_moments(args: &MomentsArgs, command_line: Vec<String>) -> gff_core::Result<RunManifest> {
    let mut manifest = RunManifest::new(command_line, args.seed);
    let g: WeightedGraph = match &args.graph {
        Some(path) => {
            manifest.hash_input(path)?;
            read_graph(path)?
        }
        None => {
            if args.grid < 3 || args.grid % 2 == 0 {
                return Err(usage("--grid must be an odd side of at least 3"));
            }
            build_box_lattice_capped(
                2,
                ((args.grid - 1) / 2) as i64,
                1.0,
                vertex_cap(),
                Validation::Check,
            )?
        }
    };
    let gm = greens_matrix(&g)?;
    let indices: Vec<usize> = args
        .indices
        .split(',')
        .map(|s| {
            s.trim()
                .parse()
                .map_err(|_| usage(format!("bad index `{s}` in --indices")))
        })
        .collect::<gff_core::Result<_>>()?;
    if let Some(k) = args.k {
        if k != indices.len() {
            return Err(usage(format!(
                "--k {} does not match {} indices",
                k,
                indices.len()
            )));
        }
    }
    for &i in &indices {
        if i >= gm.vertex_ids.len() {
            return Err(usage(format!(
                "index {i} out of range for {} kernel rows",
                gm.vertex_ids.len()
            )));
        }
    }
    let exact = wick_moment(&gm.matrix, &indices)?.value;
    let empirical = if args.samples > 0 {
        let mut functionals = Vec::new();
        for &i in &indices {
            let mut delta = vec![0.0; g.n_vertices()];
            delta[gm.vertex_ids[i]] = 1.0;
            functionals.push(delta);
        }
        let samples: Vec<Vec<f64>> = (0..args.samples)
            .map(|i| sample_dgff_direct(&g, args.seed.wrapping_add(i), None).map(|s| s.values))
            .collect::<gff_core::Result<_>>()?;
        let tuple: Vec<usize> = (0..indices.len()).collect();
        Some(empirical_moment(
            samples.iter().map(|s| s.as_slice()),
            &functionals,
            &tuple,
        )?)
    } else {
        None
    };
    let tuple_name = args.indices.replace(',', " ");
    let csv = moments_csv(&[(tuple_name, exact, empirical)]);
    std::fs::write(&args.out, csv)?;
    manifest.record_output(&args.out);
    Ok(manifest)
}

fn cmd_thick(args: &ThickArgs, command_line: Vec<String>) -> gff_core::Result<RunManifest> {
    let mut manifest = RunManifest::new(command_line, args.seed);
    let scales: Vec<usize> = match &args.scales {
        Some(text) => text
            .split(',')
            .map(|s| {
                s.trim()
                    .parse()
                    .map_err(|_| usage(format!("bad scale `{s}` in --scales")))
            })
            .collect::<gff_core::Result<_>>()?,
        None => THICK_SCALES.to_vec(),
    };
    let analysis = ThickAnalysis::prepare(args.size, args.seed)?;
    let points = analysis.points(args.a)?;
    let dim = analysis.dimension(args.a, &scales)?;

    let prefix = args.out_prefix.display();
    let mask_path = PathBuf::from(format!("{prefix}.mask.pgm"));
    write_mask_pgm(&mask_path, args.size, args.size, &points)?;
    manifest.record_output(&mask_path);
    manifest.record_output(&mask_path.with_extension("pgm.meta"));

    // thick points as a sorted vertex-id list (row-major ids)
    let points_path = PathBuf::from(format!("{prefix}.points.csv"));
    let mut points_csv = String::from("vertex_id,row,col\n");
    for &(r, c) in &points {
        points_csv.push_str(&format!("{},{r},{c}\n", r * args.size + c));
    }
    std::fs::write(&points_path, points_csv)?;
    manifest.record_output(&points_path);

    // circle/disc profile at the center, over depths inside the cutoff
    let center = ((args.size - 1) / 2, (args.size - 1) / 2);
    let s_max = (analysis.field.reference_radius() / 2.0).ln();
    let t_grid: Vec<f64> = (0..10)
        .map(|i| 0.3 + i as f64 * (0.85 * s_max - 0.3) / 9.0)
        .collect();
    let profile = disc_average_profile(&analysis.field, center, &t_grid)?;
    let profile_path = PathBuf::from(format!("{prefix}.profile.csv"));
    std::fs::write(&profile_path, profile_csv(&profile))?;
    manifest.record_output(&profile_path);

    let field_path = PathBuf::from(format!("{prefix}.field.pgm"));
    write_field_pgm(&field_path, &analysis.field)?;
    manifest.record_output(&field_path);
    manifest.record_output(&field_path.with_extension("pgm.meta"));

    let mut csv = String::from("key,value\n");
    csv.push_str(&format!("a,{}\n", fmt_g17(args.a)));
    csv.push_str(&format!("t,{}\n", fmt_g17(analysis.t)));
    csv.push_str(&format!("sigma,{}\n", fmt_g17(analysis.sigma)));
    csv.push_str(&format!("eligible,{}\n", analysis.eligible));
    csv.push_str(&format!("points,{}\n", points.len()));
    csv.push_str(&format!("dimension,{}\n", fmt_g17(dim.estimate)));
    csv.push_str(&format!("r_squared,{}\n", fmt_g17(dim.fit.r_squared)));
    for (scale, count) in &dim.counts {
        csv.push_str(&format!("boxes_at_{scale},{count}\n"));
    }
    let csv_path = PathBuf::from(format!("{prefix}.dim.csv"));
    std::fs::write(&csv_path, csv)?;
    manifest.record_output(&csv_path);
    Ok(manifest)
}

fn cmd_verify(
    args: &VerifyArgs,
    command_line: Vec<String>,
) -> gff_core::Result<(RunManifest, bool)> {
    let mut manifest = RunManifest::new(command_line, args.seed);
    let rows: Vec<VerifyRow> = match args.suite.as_str() {
        "fem" => suite_fem(args.seed)?,
        "covariance" => {
            suite_covariance(((args.grid.max(3) - 1) / 2) as i64, args.samples, args.seed)?
        }
        "markov" => suite_markov(args.samples, args.seed)?,
        "wick" => suite_wick(args.samples, args.seed)?,
        "scaling" => suite_scaling(args.d)?,
        "explore" => suite_explore(args.samples.min(20_000), args.seed)?,
        other => return Err(usage(format!("unknown verify suite `{other}`"))),
    };
    let width = rows.iter().map(|r| r.check.len()).max().unwrap_or(8);
    for row in &rows {
        println!(
            "{:<width$}  measured {:>14.6e}  oracle {:>14.6e}  tol {:>9.3e}  {}",
            row.check,
            row.measured,
            row.oracle,
            row.tolerance,
            if row.pass { "pass" } else { "FAIL" },
        );
    }
    let passed = all_pass(&rows);
    println!(
        "suite {}: {} ({} checks)",
        args.suite,
        if passed { "pass" } else { "FAIL" },
        rows.len()
    );
    let out = args
        .out
        .clone()
        .unwrap_or_else(|| PathBuf::from(format!("verify_{}.csv", args.suite)));
    std::fs::write(&out, verify_csv(&rows))?;
    manifest.record_output(&out);
    Ok((manifest, !passed))
}
