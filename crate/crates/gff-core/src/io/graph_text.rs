//! Line-oriented text formats for graphs and triangulations.
//!
//! `GFFG 1`: header `GFFG 1 <n_vertices> <n_edges> <zero_mean:0|1>`, then
//! `V <id> [x y ...]` vertex lines, `B <id>` boundary lines, and
//! `E <u> <v> <w>` edge lines.
//!
//! `GFFT 1`: header `GFFT 1 <n_vertices> <n_triangles>`, then `V <id> <x> <y>`,
//! `B <id>`, and `T <i> <j> <k>` lines.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{GffError, Result};
use crate::io::fmt_g17;
use crate::lattice::{GraphBuilder, Positions, Triangulation, Validation, WeightedGraph};

pub fn render_graph(g: &WeightedGraph) -> String {
    let mut out = String::new();
    let zm = if g.zero_mean_mode() { 1 } else { 0 };
    writeln!(out, "GFFG 1 {} {} {}", g.n_vertices(), g.n_edges(), zm).unwrap();
    for v in 0..g.n_vertices() {
        match g.positions() {
            Some(p) => {
                let coords: Vec<String> = p.vertex(v).iter().map(|&c| fmt_g17(c)).collect();
                writeln!(out, "V {v} {}", coords.join(" ")).unwrap();
            }
            None => writeln!(out, "V {v}").unwrap(),
        }
    }
    for &b in g.boundary() {
        writeln!(out, "B {b}").unwrap();
    }
    for e in g.edges() {
        writeln!(out, "E {} {} {}", e.u, e.v, fmt_g17(e.w)).unwrap();
    }
    out
}

pub fn write_graph(path: &Path, g: &WeightedGraph) -> Result<()> {
    std::fs::write(path, render_graph(g))?;
    Ok(())
}

pub fn parse_graph(text: &str) -> Result<WeightedGraph> {
    parse_graph_with(text, Validation::Check)
}

pub fn parse_graph_with(text: &str, validation: Validation) -> Result<WeightedGraph> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| GffError::Format("empty graph file".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 5 || head[0] != "GFFG" || head[1] != "1" {
        return Err(GffError::Format(
            "expected header `GFFG 1 <n> <m> <zm>`".into(),
        ));
    }
    let n_vertices: usize = parse_field(head[2], 1, "vertex count")?;
    let n_edges: usize = parse_field(head[3], 1, "edge count")?;
    let zero_mean = match head[4] {
        "0" => false,
        "1" => true,
        other => {
            return Err(GffError::Format(format!(
                "zero_mean flag must be 0 or 1, got {other}"
            )))
        }
    };

    let mut coords: Vec<Option<Vec<f64>>> = vec![None; n_vertices];
    let mut boundary = Vec::new();
    let mut edges = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        match fields[0] {
            "V" => {
                if fields.len() < 2 {
                    return Err(GffError::Format(format!("line {lineno}: V needs an id")));
                }
                let id: usize = parse_field(fields[1], lineno, "vertex id")?;
                if id >= n_vertices {
                    return Err(GffError::Format(format!(
                        "line {lineno}: vertex {id} out of range"
                    )));
                }
                let c: Vec<f64> = fields[2..]
                    .iter()
                    .map(|f| parse_field(f, lineno, "coordinate"))
                    .collect::<Result<_>>()?;
                coords[id] = Some(c);
            }
            "B" => {
                if fields.len() != 2 {
                    return Err(GffError::Format(format!("line {lineno}: B takes one id")));
                }
                boundary.push(parse_field::<usize>(fields[1], lineno, "boundary id")?);
            }
            "E" => {
                if fields.len() != 4 {
                    return Err(GffError::Format(format!("line {lineno}: E takes `u v w`")));
                }
                let u: usize = parse_field(fields[1], lineno, "edge endpoint")?;
                let v: usize = parse_field(fields[2], lineno, "edge endpoint")?;
                let w: f64 = parse_field(fields[3], lineno, "edge weight")?;
                edges.push((u, v, w));
            }
            other => {
                return Err(GffError::Format(format!(
                    "line {lineno}: unknown record `{other}`"
                )))
            }
        }
    }
    if edges.len() != n_edges {
        return Err(GffError::Format(format!(
            "header declares {n_edges} edges, found {}",
            edges.len()
        )));
    }

    let dims: Vec<usize> = coords
        .iter()
        .filter_map(|c| c.as_ref().map(|v| v.len()))
        .collect();
    let positions = if !dims.is_empty() && dims.iter().all(|&d| d > 0) {
        let dim = dims[0];
        if dims.len() != n_vertices || dims.iter().any(|&d| d != dim) {
            return Err(GffError::Format(
                "positions must be given for all vertices with one dimension".into(),
            ));
        }
        let mut flat = Vec::with_capacity(n_vertices * dim);
        for c in coords {
            flat.extend(c.unwrap());
        }
        Some(Positions { dim, coords: flat })
    } else {
        None
    };

    let mut builder = GraphBuilder::new(n_vertices)
        .edges(edges)
        .boundary(boundary)
        .zero_mean(zero_mean)
        .validation(validation);
    if let Some(p) = positions {
        builder = builder.positions(p);
    }
    builder.build()
}

pub fn read_graph(path: &Path) -> Result<WeightedGraph> {
    parse_graph(&std::fs::read_to_string(path)?)
}

pub fn render_triangulation(tri: &Triangulation) -> String {
    let mut out = String::new();
    writeln!(out, "GFFT 1 {} {}", tri.n_vertices(), tri.triangles().len()).unwrap();
    for (v, p) in tri.vertices().iter().enumerate() {
        writeln!(out, "V {v} {} {}", fmt_g17(p[0]), fmt_g17(p[1])).unwrap();
    }
    for &b in tri.boundary() {
        writeln!(out, "B {b}").unwrap();
    }
    for t in tri.triangles() {
        writeln!(out, "T {} {} {}", t[0], t[1], t[2]).unwrap();
    }
    out
}

pub fn write_triangulation(path: &Path, tri: &Triangulation) -> Result<()> {
    std::fs::write(path, render_triangulation(tri))?;
    Ok(())
}

pub fn parse_triangulation(text: &str) -> Result<Triangulation> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| GffError::Format("empty triangulation file".into()))?;
    let head: Vec<&str> = header.split_whitespace().collect();
    if head.len() != 4 || head[0] != "GFFT" || head[1] != "1" {
        return Err(GffError::Format("expected header `GFFT 1 <n> <t>`".into()));
    }
    let n_vertices: usize = parse_field(head[2], 1, "vertex count")?;
    let n_triangles: usize = parse_field(head[3], 1, "triangle count")?;
    let mut vertices: Vec<Option<[f64; 2]>> = vec![None; n_vertices];
    let mut boundary = Vec::new();
    let mut triangles = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.is_empty() {
            continue;
        }
        match fields[0] {
            "V" => {
                if fields.len() != 4 {
                    return Err(GffError::Format(format!("line {lineno}: V takes `id x y`")));
                }
                let id: usize = parse_field(fields[1], lineno, "vertex id")?;
                if id >= n_vertices {
                    return Err(GffError::Format(format!(
                        "line {lineno}: vertex {id} out of range"
                    )));
                }
                vertices[id] = Some([
                    parse_field(fields[2], lineno, "x")?,
                    parse_field(fields[3], lineno, "y")?,
                ]);
            }
            "B" => {
                if fields.len() != 2 {
                    return Err(GffError::Format(format!("line {lineno}: B takes one id")));
                }
                boundary.push(parse_field::<usize>(fields[1], lineno, "boundary id")?);
            }
            "T" => {
                if fields.len() != 4 {
                    return Err(GffError::Format(format!("line {lineno}: T takes `i j k`")));
                }
                triangles.push([
                    parse_field(fields[1], lineno, "triangle vertex")?,
                    parse_field(fields[2], lineno, "triangle vertex")?,
                    parse_field(fields[3], lineno, "triangle vertex")?,
                ]);
            }
            other => {
                return Err(GffError::Format(format!(
                    "line {lineno}: unknown record `{other}`"
                )))
            }
        }
    }
    if triangles.len() != n_triangles {
        return Err(GffError::Format(format!(
            "header declares {n_triangles} triangles, found {}",
            triangles.len()
        )));
    }
    let vertices: Vec<[f64; 2]> = vertices
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| GffError::Format(format!("vertex {i} has no V line"))))
        .collect::<Result<_>>()?;
    Triangulation::new(vertices, triangles, boundary)
}

pub fn read_triangulation(path: &Path) -> Result<Triangulation> {
    parse_triangulation(&std::fs::read_to_string(path)?)
}

fn parse_field<T: std::str::FromStr>(s: &str, lineno: usize, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| GffError::Format(format!("line {lineno}: bad {what} `{s}`")))
}
