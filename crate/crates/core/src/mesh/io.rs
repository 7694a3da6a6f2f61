//! Plain-text mesh files.
//!
//! ```text
//! mdmesh 1
//! node <id> <x> <y>
//! cell <id> <n1> <n2> <n3>
//! bface <n1> <n2> <tag>
//! fracface <n1> <n2>
//! ```
//!
//! `fracface` records mark interior edges that are cut open on import.
//! Already slit meshes list their fracture faces as `bface` records tagged
//! `slit_plus`/`slit_minus`; this is the form written by [`export_mesh`].

use std::collections::BTreeMap;
use std::fmt::Write;

use super::build::slit;
use super::triangle::{BoundaryTag, TriangleMesh};
use super::MixedDimMesh;
use crate::error::MeshError;

pub fn import_mesh(text: &str) -> Result<MixedDimMesh, MeshError> {
    let mut header = false;
    let mut nodes: BTreeMap<i64, (usize, [f64; 2])> = BTreeMap::new();
    let mut cells: BTreeMap<i64, (usize, [i64; 3])> = BTreeMap::new();
    let mut bfaces: Vec<(usize, [i64; 2], BoundaryTag)> = Vec::new();
    let mut fracfaces: Vec<(usize, [i64; 2])> = Vec::new();

    for (i, raw) in text.lines().enumerate() {
        let line_no = i + 1;
        let err = |message: String| MeshError::Parse { line: line_no, message };
        let line = raw.split('#').next().unwrap().trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        let int = |s: &str| s.parse::<i64>().map_err(|_| err(format!("expected an integer, found `{s}`")));
        let float = |s: &str| s.parse::<f64>().map_err(|_| err(format!("expected a number, found `{s}`")));
        let arity = |n: usize| {
            if fields.len() == n {
                Ok(())
            } else {
                Err(err(format!("`{}` record takes {} fields, found {}", fields[0], n - 1, fields.len() - 1)))
            }
        };
        match fields[0] {
            "mdmesh" => {
                arity(2)?;
                if fields[1] != "1" {
                    return Err(err(format!("unsupported mesh format version {}", fields[1])));
                }
                header = true;
            }
            _ if !header => return Err(err("missing `mdmesh 1` header".into())),
            "node" => {
                arity(4)?;
                let id = int(fields[1])?;
                if nodes.insert(id, (line_no, [float(fields[2])?, float(fields[3])?])).is_some() {
                    return Err(err(format!("duplicate node id {id}")));
                }
            }
            "cell" => {
                arity(5)?;
                let id = int(fields[1])?;
                let conn = [int(fields[2])?, int(fields[3])?, int(fields[4])?];
                if cells.insert(id, (line_no, conn)).is_some() {
                    return Err(err(format!("duplicate cell id {id}")));
                }
            }
            "bface" => {
                arity(4)?;
                let tag = BoundaryTag::parse(fields[3]).ok_or_else(|| err(format!("unknown boundary tag `{}`", fields[3])))?;
                bfaces.push((line_no, [int(fields[1])?, int(fields[2])?], tag));
            }
            "fracface" => {
                arity(3)?;
                fracfaces.push((line_no, [int(fields[1])?, int(fields[2])?]));
            }
            other => return Err(err(format!("unknown record `{other}`"))),
        }
    }
    if !header {
        return Err(MeshError::Parse { line: 0, message: "empty file: missing `mdmesh 1` header".into() });
    }

    let index: BTreeMap<i64, usize> = nodes.keys().enumerate().map(|(i, &id)| (id, i)).collect();
    let resolve = |entity: &'static str, id: usize, node: i64| {
        index.get(&node).copied().ok_or(MeshError::DanglingNode { entity, id, node: node.max(0) as usize })
    };
    let mut coords: Vec<[f64; 2]> = nodes.values().map(|&(_, p)| p).collect();
    let mut conn = Vec::with_capacity(cells.len());
    for (&id, &(_, c)) in &cells {
        let id = id.max(0) as usize;
        conn.push([resolve("cell", id, c[0])?, resolve("cell", id, c[1])?, resolve("cell", id, c[2])?]);
    }
    let mut tags = Vec::with_capacity(bfaces.len());
    for (k, &(_, [a, b], tag)) in bfaces.iter().enumerate() {
        tags.push(([resolve("bface", k, a)?, resolve("bface", k, b)?], tag));
    }
    if !fracfaces.is_empty() {
        let mut edges = Vec::with_capacity(fracfaces.len());
        for (k, &(_, [a, b])) in fracfaces.iter().enumerate() {
            edges.push([resolve("fracface", k, a)?, resolve("fracface", k, b)?]);
        }
        tags.extend(slit(&mut coords, &mut conn, &edges)?);
    }
    let matrix = TriangleMesh::from_parts(coords, conn, &tags)?;
    MixedDimMesh::from_matrix(matrix)
}

/// Writes the matrix in slit form with full round-trip precision.
pub fn export_mesh(mesh: &MixedDimMesh) -> String {
    let m = &mesh.matrix;
    let mut out = String::from("mdmesh 1\n");
    for (i, p) in m.nodes.iter().enumerate() {
        writeln!(out, "node {i} {:.16e} {:.16e}", p[0], p[1]).unwrap();
    }
    for (i, c) in m.cells.iter().enumerate() {
        writeln!(out, "cell {i} {} {} {}", c[0], c[1], c[2]).unwrap();
    }
    for (f, tag) in m.boundary_tags.iter().enumerate() {
        if let Some(tag) = tag {
            let [a, b] = m.faces[f].nodes;
            writeln!(out, "bface {a} {b} {}", tag.as_str()).unwrap();
        }
    }
    out
}
