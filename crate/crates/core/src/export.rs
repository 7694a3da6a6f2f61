//! Legacy ASCII VTK files per subdomain and a CSV step summary.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Error;
use crate::mesh::{LowerDimGrid, Side, TriangleMesh};
use crate::scenario::StepRecord;
use crate::splitting::{Problem, SimulationState};

const VTK_TRIANGLE: u8 = 5;
const VTK_LINE: u8 = 3;

fn header(s: &mut String, title: &str) {
    s.push_str("# vtk DataFile Version 2.0\n");
    let _ = writeln!(s, "{title}");
    s.push_str("ASCII\nDATASET UNSTRUCTURED_GRID\n");
}

fn points(s: &mut String, pts: &[[f64; 2]]) {
    let _ = writeln!(s, "POINTS {} double", pts.len());
    for p in pts {
        let _ = writeln!(s, "{:.16e} {:.16e} 0", p[0], p[1]);
    }
}

fn cells(s: &mut String, conn: &[Vec<usize>], kind: u8) {
    let size: usize = conn.iter().map(|c| c.len() + 1).sum();
    let _ = writeln!(s, "CELLS {} {size}", conn.len());
    for c in conn {
        let ids: Vec<String> = c.iter().map(|i| i.to_string()).collect();
        let _ = writeln!(s, "{} {}", c.len(), ids.join(" "));
    }
    let _ = writeln!(s, "CELL_TYPES {}", conn.len());
    for _ in conn {
        let _ = writeln!(s, "{kind}");
    }
}

fn cell_data(s: &mut String, arrays: &[(&str, &[f64])]) {
    let Some((_, first)) = arrays.first() else { return };
    let _ = writeln!(s, "CELL_DATA {}", first.len());
    for (name, values) in arrays {
        debug_assert_eq!(values.len(), first.len());
        let _ = writeln!(s, "SCALARS {name} double 1\nLOOKUP_TABLE default");
        for v in *values {
            let _ = writeln!(s, "{v:.16e}");
        }
    }
}

/// Triangles of the matrix with one scalar array per entry of `arrays`.
pub fn vtk_triangles(mesh: &TriangleMesh, arrays: &[(&str, &[f64])]) -> String {
    let mut s = String::new();
    header(&mut s, "matrix");
    points(&mut s, &mesh.nodes);
    let conn: Vec<Vec<usize>> = mesh.cells.iter().map(|c| c.to_vec()).collect();
    cells(&mut s, &conn, VTK_TRIANGLE);
    cell_data(&mut s, arrays);
    s
}

/// Segments of a one-dimensional grid drawn along its center line.
pub fn vtk_segments(grid: &LowerDimGrid, title: &str, arrays: &[(&str, &[f64])]) -> String {
    let mut s = String::new();
    header(&mut s, title);
    points(&mut s, &grid.points);
    let conn: Vec<Vec<usize>> = (0..grid.n_segments()).map(|i| vec![i, i + 1]).collect();
    cells(&mut s, &conn, VTK_LINE);
    cell_data(&mut s, arrays);
    s
}

/// The pieces of a legacy VTK file needed for checks.
#[derive(Debug, Clone, PartialEq)]
pub struct VtkData {
    pub n_points: usize,
    pub n_cells: usize,
    pub arrays: BTreeMap<String, Vec<f64>>,
}

/// Reads files written by this module.
pub fn read_vtk(text: &str) -> Result<VtkData, Error> {
    let bad = |what: &str| Error::Sample(format!("malformed VTK file: {what}"));
    if !text.starts_with("# vtk DataFile Version 2.0\n") {
        return Err(bad("missing version header"));
    }
    let mut tokens = text.lines().skip(2).flat_map(|l| l.split_whitespace());
    let mut data = VtkData { n_points: 0, n_cells: 0, arrays: BTreeMap::new() };
    let mut cell_values = 0;
    let count = |tokens: &mut dyn Iterator<Item = &str>, what: &str| -> Result<usize, Error> {
        tokens.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad(what))
    };
    while let Some(tok) = tokens.next() {
        match tok {
            "ASCII" | "DATASET" | "UNSTRUCTURED_GRID" | "LOOKUP_TABLE" | "default" => {}
            "POINTS" => {
                data.n_points = count(&mut tokens, "POINTS")?;
                tokens.next();
                for _ in 0..3 * data.n_points {
                    tokens.next().ok_or_else(|| bad("truncated POINTS"))?;
                }
            }
            "CELLS" => {
                data.n_cells = count(&mut tokens, "CELLS")?;
                let size = count(&mut tokens, "CELLS size")?;
                for _ in 0..size {
                    tokens.next().ok_or_else(|| bad("truncated CELLS"))?;
                }
            }
            "CELL_TYPES" => {
                let n = count(&mut tokens, "CELL_TYPES")?;
                for _ in 0..n {
                    tokens.next().ok_or_else(|| bad("truncated CELL_TYPES"))?;
                }
            }
            "CELL_DATA" => cell_values = count(&mut tokens, "CELL_DATA")?,
            "SCALARS" => {
                let name = tokens.next().ok_or_else(|| bad("SCALARS name"))?.to_string();
                tokens.next();
                tokens.next();
                if tokens.next() != Some("LOOKUP_TABLE") {
                    return Err(bad("expected LOOKUP_TABLE"));
                }
                tokens.next();
                let values = (0..cell_values)
                    .map(|_| tokens.next().and_then(|t| t.parse().ok()).ok_or_else(|| bad("truncated SCALARS")))
                    .collect::<Result<Vec<f64>, _>>()?;
                data.arrays.insert(name, values);
            }
            other => return Err(bad(&format!("unexpected token {other:?}"))),
        }
    }
    Ok(data)
}

/// Writes `matrix`, `fracture` and (multilayer) `layer_plus`/`layer_minus`
/// files named `<stem>_<subdomain>.vtk` into `dir`.
pub fn export_fields(problem: &Problem, state: &SimulationState, dir: &Path, stem: &str) -> Result<Vec<PathBuf>, Error> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mesh = &problem.mesh;
    let g = &state.geometry;
    let n = mesh.n_fracture();
    let zeros_m = vec![0.0; mesh.matrix.n_cells()];
    let zeros_f = vec![0.0; n];
    let flow = state.flow.as_ref();
    let mut files = vec![(
        "matrix",
        vtk_triangles(
            &mesh.matrix,
            &[
                ("p", flow.map_or(&zeros_m[..], |f| &f.p_matrix[..])),
                ("u", &state.u.matrix),
                ("w", &state.w.matrix),
                ("phi", &g.phi_matrix),
            ],
        ),
    )];
    files.push((
        "fracture",
        vtk_segments(
            &mesh.fracture,
            "fracture",
            &[
                ("p", flow.map_or(&zeros_f[..], |f| &f.p_fracture[..])),
                ("u", &state.u.fracture),
                ("w", &state.w.fracture),
                ("eps", &g.aperture),
            ],
        ),
    ));
    if let (Some(grids), Some(u), Some(w), Some(phi), Some(eps)) =
        (&mesh.layers, &state.u.layers, &state.w.layers, &g.phi_layers, &g.thickness)
    {
        for side in Side::BOTH {
            let s = side.index();
            let p = flow.and_then(|f| f.p_layers.as_ref()).map_or(&zeros_f[..], |p| &p[s][..]);
            let name = if side == Side::Plus { "layer_plus" } else { "layer_minus" };
            files.push((
                name,
                vtk_segments(&grids[s], name, &[("p", p), ("u", &u[s]), ("w", &w[s]), ("phi", &phi[s]), ("eps", &eps[s])]),
            ));
        }
    }
    let mut paths = Vec::new();
    for (name, text) in files {
        let path = dir.join(format!("{stem}_{name}.vtk"));
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

pub const SUMMARY_HEADER: &str = "n,t,content,boundary_influx,balance_error,reaction_clamps,extrapolation_clamps,thickness_floor_hits,min_phi_matrix,min_aperture,max_thickness";

pub fn summary_csv(records: &[StepRecord]) -> String {
    let mut s = String::from(SUMMARY_HEADER);
    s.push('\n');
    for r in records {
        let _ = writeln!(
            s,
            "{},{:.16e},{:.16e},{:.16e},{:.16e},{},{},{},{:.16e},{:.16e},{:.16e}",
            r.n,
            r.t,
            r.content,
            r.boundary_influx,
            r.balance_error,
            r.reaction_clamps,
            r.extrapolation_clamps,
            r.thickness_floor_hits,
            r.min_phi_matrix,
            r.min_aperture,
            r.max_thickness
        );
    }
    s
}
