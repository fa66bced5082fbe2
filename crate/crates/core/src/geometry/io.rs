//! Plain-text `tmesh2d v1` mesh files.
//!
//! Layout: a `tmesh2d` header line, a counts line `n_nodes n_tris n_bedges`,
//! then one line per node (`x y`), triangle (`i j k`, 0-based, CCW) and
//! boundary edge (`a b face_id`). Lines starting with `#` are ignored.

use super::{BoundaryEdge, Point, TriMesh};
use crate::error::{Error, Result};
use std::fmt::Write as _;
use std::path::Path;

pub fn write_tmesh(mesh: &TriMesh) -> String {
    let mut s = String::new();
    writeln!(s, "tmesh2d").unwrap();
    writeln!(
        s,
        "{} {} {}",
        mesh.n_nodes(),
        mesh.n_triangles(),
        mesh.boundary_edges.len()
    )
    .unwrap();
    for p in &mesh.nodes {
        writeln!(s, "{:.17e} {:.17e}", p.x, p.y).unwrap();
    }
    for t in &mesh.triangles {
        writeln!(s, "{} {} {}", t[0], t[1], t[2]).unwrap();
    }
    for e in &mesh.boundary_edges {
        writeln!(s, "{} {} {}", e.a, e.b, e.face).unwrap();
    }
    s
}

fn parse_err(line: usize, msg: &str) -> Error {
    Error::Parse(format!("tmesh2d line {line}: {msg}"))
}

fn fields<T: std::str::FromStr>(line: usize, text: &str, n: usize) -> Result<Vec<T>> {
    let v: Vec<T> = text
        .split_whitespace()
        .map(|w| w.parse::<T>().map_err(|_| parse_err(line, &format!("bad token `{w}`"))))
        .collect::<Result<_>>()?;
    if v.len() != n {
        return Err(parse_err(line, &format!("expected {n} fields, found {}", v.len())));
    }
    Ok(v)
}

pub fn read_tmesh(text: &str) -> Result<TriMesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (ln, head) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    if head != "tmesh2d" {
        return Err(parse_err(ln, "missing `tmesh2d` header"));
    }
    let (ln, counts) = lines.next().ok_or_else(|| parse_err(ln, "missing counts line"))?;
    let c: Vec<usize> = fields(ln, counts, 3)?;
    let mut next = |what: &str| {
        lines
            .next()
            .ok_or_else(|| Error::Parse(format!("tmesh2d: file ends before all {what} were read")))
    };
    let mut nodes = Vec::with_capacity(c[0]);
    for _ in 0..c[0] {
        let (ln, l) = next("nodes")?;
        let v: Vec<f64> = fields(ln, l, 2)?;
        nodes.push(Point::new(v[0], v[1]));
    }
    let mut tris = Vec::with_capacity(c[1]);
    for _ in 0..c[1] {
        let (ln, l) = next("triangles")?;
        let v: Vec<usize> = fields(ln, l, 3)?;
        tris.push([v[0], v[1], v[2]]);
    }
    let mut bedges = Vec::with_capacity(c[2]);
    for _ in 0..c[2] {
        let (ln, l) = next("boundary edges")?;
        let v: Vec<usize> = fields(ln, l, 3)?;
        bedges.push(BoundaryEdge { a: v[0], b: v[1], face: v[2] });
    }
    if let Ok((ln, _)) = next("") {
        return Err(parse_err(ln, "trailing data after boundary edges"));
    }
    TriMesh::from_parts(nodes, tris, bedges)
}

pub fn load_tmesh(path: &Path) -> Result<TriMesh> {
    read_tmesh(&std::fs::read_to_string(path)?)
}

pub fn save_tmesh(mesh: &TriMesh, path: &Path) -> Result<()> {
    std::fs::write(path, write_tmesh(mesh))?;
    Ok(())
}
