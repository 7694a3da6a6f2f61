use std::collections::HashMap;

use super::triangle::{BoundaryTag, TriangleMesh};
use super::MixedDimMesh;
use crate::error::MeshError;

/// Boundary condition type on each side of the rectangular domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryLayout {
    pub bottom: BoundaryTag,
    pub top: BoundaryTag,
    pub left: BoundaryTag,
    pub right: BoundaryTag,
}

impl Default for BoundaryLayout {
    fn default() -> Self {
        Self {
            bottom: BoundaryTag::Inflow,
            top: BoundaryTag::Outflow,
            left: BoundaryTag::NoFlow,
            right: BoundaryTag::NoFlow,
        }
    }
}

impl BoundaryLayout {
    /// Inflow on the left, outflow on the right, closed top and bottom.
    pub fn left_to_right() -> Self {
        Self {
            bottom: BoundaryTag::NoFlow,
            top: BoundaryTag::NoFlow,
            left: BoundaryTag::Inflow,
            right: BoundaryTag::Outflow,
        }
    }

    fn tag_at(&self, p: [f64; 2], width: f64, height: f64) -> BoundaryTag {
        let tol = 1e-9 * width.max(height);
        if p[1] < tol {
            self.bottom
        } else if p[1] > height - tol {
            self.top
        } else if p[0] < tol {
            self.left
        } else {
            debug_assert!(p[0] > width - tol);
            self.right
        }
    }
}

/// Lattice triangulation of `[0, width] x [0, height]`; every square is cut
/// along its (1,1) diagonal.
fn lattice(nx: usize, ny: usize, width: f64, height: f64) -> (Vec<[f64; 2]>, Vec<[usize; 3]>) {
    let id = |i: usize, j: usize| j * (nx + 1) + i;
    let mut nodes = Vec::with_capacity((nx + 1) * (ny + 1));
    for j in 0..=ny {
        for i in 0..=nx {
            nodes.push([width * i as f64 / nx as f64, height * j as f64 / ny as f64]);
        }
    }
    let mut cells = Vec::with_capacity(2 * nx * ny);
    for j in 0..ny {
        for i in 0..nx {
            cells.push([id(i, j), id(i + 1, j), id(i + 1, j + 1)]);
            cells.push([id(i, j), id(i + 1, j + 1), id(i, j + 1)]);
        }
    }
    (nodes, cells)
}

/// Unfractured triangulation of a rectangle with `2 nx ny` cells.
pub fn build_rectangle(
    nx: usize,
    ny: usize,
    width: f64,
    height: f64,
    layout: BoundaryLayout,
) -> Result<MixedDimMesh, MeshError> {
    if nx == 0 || ny == 0 {
        return Err(MeshError::EmptyLattice);
    }
    let (nodes, cells) = lattice(nx, ny, width, height);
    let mut matrix = TriangleMesh::from_parts(nodes, cells, &[])?;
    matrix.retag_outer(|p| layout.tag_at(p, width, height));
    MixedDimMesh::from_matrix(matrix)
}

/// Unit-square triangulation with `n_per_unit` squares per side, slit along
/// the lattice diagonal between the two fracture endpoints.
pub fn build_structured(
    n_per_unit: usize,
    endpoints: [[f64; 2]; 2],
    layout: BoundaryLayout,
) -> Result<MixedDimMesh, MeshError> {
    if n_per_unit == 0 {
        return Err(MeshError::EmptyLattice);
    }
    let n = n_per_unit;
    let mut lattice_pts = [[0usize; 2]; 2];
    for (k, p) in endpoints.iter().enumerate() {
        if !(0.0..=1.0).contains(&p[0]) || !(0.0..=1.0).contains(&p[1]) {
            return Err(MeshError::OutsideDomain { x: p[0], y: p[1] });
        }
        for (axis, &value) in p.iter().enumerate() {
            let scaled = value * n as f64;
            if (scaled - scaled.round()).abs() > 1e-9 {
                return Err(MeshError::OffLattice { axis: if axis == 0 { 'x' } else { 'y' }, value, n });
            }
            lattice_pts[k][axis] = scaled.round() as usize;
        }
    }
    lattice_pts.sort();
    let [[i0, j0], [i1, j1]] = lattice_pts;
    let steps = i1 - i0;
    if steps == 0 || j1 < j0 || j1 - j0 != steps {
        let [a, b] = endpoints;
        return Err(MeshError::OffDiagonal { x0: a[0], y0: a[1], x1: b[0], y1: b[1] });
    }

    let (mut nodes, mut cells) = lattice(n, n, 1.0, 1.0);
    let id = |i: usize, j: usize| j * (n + 1) + i;
    let fracture: Vec<[usize; 2]> = (0..steps).map(|s| [id(i0 + s, j0 + s), id(i0 + s + 1, j0 + s + 1)]).collect();
    let slit_tags = slit(&mut nodes, &mut cells, &fracture)?;
    let mut matrix = TriangleMesh::from_parts(nodes, cells, &slit_tags)?;
    matrix.retag_outer(|p| layout.tag_at(p, 1.0, 1.0));
    MixedDimMesh::from_matrix(matrix)
}

/// Cuts the triangulation open along `fracture` (a path of edges).
///
/// Every fracture node whose surrounding cells fall apart into two groups
/// once the fracture edges are removed is duplicated; the copy is used by the
/// cells to the right of the path, which starts at its lexicographically
/// smaller endpoint. Immersed tips keep a single node. Returns the slit face
/// tags.
pub(crate) fn slit(
    nodes: &mut Vec<[f64; 2]>,
    cells: &mut [[usize; 3]],
    fracture: &[[usize; 2]],
) -> Result<Vec<([usize; 2], BoundaryTag)>, MeshError> {
    for (id, e) in fracture.iter().enumerate() {
        for &node in e {
            if node >= nodes.len() {
                return Err(MeshError::DanglingNode { entity: "fracface", id, node });
            }
        }
    }
    let (mut path, _) = super::chain(fracture)?;
    let (a, b) = (nodes[path[0]], nodes[*path.last().unwrap()]);
    if (b[0], b[1]) < (a[0], a[1]) {
        path.reverse();
    }
    let is_fracture_edge = {
        let set: std::collections::HashSet<(usize, usize)> =
            fracture.iter().map(|&[a, b]| (a.min(b), a.max(b))).collect();
        move |a: usize, b: usize| set.contains(&(a.min(b), a.max(b)))
    };
    let mut node_cells: HashMap<usize, Vec<usize>> = HashMap::new();
    for (c, cell) in cells.iter().enumerate() {
        for &v in cell {
            node_cells.entry(v).or_default().push(c);
        }
    }

    let mut replacements: Vec<(usize, usize, usize)> = Vec::new();
    let mut copy_of: HashMap<usize, usize> = HashMap::new();
    for (k, &v) in path.iter().enumerate() {
        let around = &node_cells[&v];
        let groups = fans(v, around, cells, &is_fracture_edge);
        match groups.len() {
            1 => continue,
            2 => {}
            _ => return Err(MeshError::BadFracture(format!("node {v} is surrounded by {} cell groups", groups.len()))),
        }
        // a path edge at v, oriented along the path
        let (p, q) = if k + 1 < path.len() { (path[k], path[k + 1]) } else { (path[k - 1], path[k]) };
        let (pp, pq) = (nodes[p], nodes[q]);
        let left = [-(pq[1] - pp[1]), pq[0] - pp[0]];
        let side_of = |c: usize| {
            let cell = cells[c];
            let cx = (nodes[cell[0]][0] + nodes[cell[1]][0] + nodes[cell[2]][0]) / 3.0;
            let cy = (nodes[cell[0]][1] + nodes[cell[1]][1] + nodes[cell[2]][1]) / 3.0;
            (cx - pp[0]) * left[0] + (cy - pp[1]) * left[1]
        };
        let touching = |group: &Vec<usize>| {
            group.iter().copied().find(|&c| cells[c].contains(&p) && cells[c].contains(&q))
        };
        let right_group = match (touching(&groups[0]), touching(&groups[1])) {
            (Some(c0), _) if side_of(c0) < 0.0 => 0,
            (_, Some(c1)) if side_of(c1) < 0.0 => 1,
            _ => return Err(MeshError::BadFracture(format!("cannot tell the sides of the fracture apart at node {v}"))),
        };
        let copy = nodes.len() + copy_of.len();
        copy_of.insert(v, copy);
        for &c in &groups[right_group] {
            replacements.push((c, v, copy));
        }
    }
    let mut new_nodes: Vec<(usize, usize)> = copy_of.iter().map(|(&v, &c)| (c, v)).collect();
    new_nodes.sort();
    for (_, v) in new_nodes {
        nodes.push(nodes[v]);
    }
    for (c, v, copy) in replacements {
        for slot in cells[c].iter_mut() {
            if *slot == v {
                *slot = copy;
            }
        }
    }

    let mut tags = Vec::with_capacity(2 * fracture.len());
    for w in path.windows(2) {
        let (a, b) = (w[0], w[1]);
        tags.push(([a, b], BoundaryTag::SlitPlus));
        let (ca, cb) = (copy_of.get(&a).copied().unwrap_or(a), copy_of.get(&b).copied().unwrap_or(b));
        tags.push(([ca, cb], BoundaryTag::SlitMinus));
    }
    Ok(tags)
}

/// Groups the cells around `v` that stay connected through non-fracture edges at `v`.
fn fans(v: usize, around: &[usize], cells: &[[usize; 3]], is_fracture_edge: &impl Fn(usize, usize) -> bool) -> Vec<Vec<usize>> {
    let mut group = vec![usize::MAX; around.len()];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for start in 0..around.len() {
        if group[start] != usize::MAX {
            continue;
        }
        let g = groups.len();
        groups.push(Vec::new());
        let mut stack = vec![start];
        group[start] = g;
        while let Some(i) = stack.pop() {
            let ci = around[i];
            groups[g].push(ci);
            for (j, &cj) in around.iter().enumerate() {
                if group[j] != usize::MAX {
                    continue;
                }
                let shared = cells[ci].iter().find(|&&x| x != v && cells[cj].contains(&x));
                if let Some(&x) = shared {
                    if !is_fracture_edge(v, x) {
                        group[j] = g;
                        stack.push(j);
                    }
                }
            }
        }
        groups[g].sort();
    }
    groups
}

#[cfg(test)]
mod tests {
    use super::super::{EndTag, Mode, Side};
    use super::*;

    fn diagonal_mesh(n: usize) -> MixedDimMesh {
        build_structured(n, [[0.1, 0.0], [0.9, 0.8]], BoundaryLayout::default()).unwrap()
    }

    #[test]
    fn counts_for_offset_fracture() {
        let m = diagonal_mesh(10).with_layers();
        assert_eq!(m.matrix.n_cells(), 200);
        assert_eq!(m.n_fracture(), 8);
        let layers = m.layers.as_ref().unwrap();
        assert_eq!(layers[0].n_segments(), 8);
        assert_eq!(layers[1].n_segments(), 8);
        assert_eq!(m.mode, Mode::Multilayer);
        // the bottom end is duplicated, the tip is not
        assert_eq!(m.matrix.nodes.len(), 121 + 8);
        assert_eq!(m.fracture.end_tags, [EndTag::Boundary(BoundaryTag::Inflow), EndTag::Tip]);
    }

    #[test]
    fn full_diagonal() {
        let m = build_structured(10, [[1.0, 1.0], [0.0, 0.0]], BoundaryLayout::default()).unwrap();
        assert_eq!(m.n_fracture(), 10);
        assert_eq!(m.matrix.nodes.len(), 121 + 11);
        assert!(m.fracture.end_tags.iter().all(|t| matches!(t, EndTag::Boundary(_))));
        assert_eq!(m.fracture.points[0], [0.0, 0.0]);
    }

    #[test]
    fn off_lattice_rejected() {
        let err = build_structured(10, [[0.15, 0.0], [0.9, 0.75]], BoundaryLayout::default()).unwrap_err();
        assert!(matches!(err, MeshError::OffLattice { axis: 'x', .. }));
        assert!(err.to_string().contains("0.15"));
    }

    #[test]
    fn off_diagonal_rejected() {
        let err = build_structured(10, [[0.1, 0.0], [0.9, 0.5]], BoundaryLayout::default()).unwrap_err();
        assert!(matches!(err, MeshError::OffDiagonal { .. }));
    }

    #[test]
    fn plus_side_is_upper_left() {
        let m = diagonal_mesh(10);
        for side in Side::BOTH {
            for seg in 0..m.n_fracture() {
                let f = m.slit_face(side, seg);
                let c = m.matrix.cell_centroids[m.matrix.faces[f].cells.0];
                let x = m.fracture.segment_centroid(seg);
                let n = m.fracture.normals[seg];
                let s = (c[0] - x[0]) * n[0] + (c[1] - x[1]) * n[1];
                assert_eq!(s > 0.0, side == Side::Plus);
            }
        }
        let n = m.fracture.normals[0];
        assert!((n[0] + 0.5f64.sqrt()).abs() < 1e-15 && (n[1] - 0.5f64.sqrt()).abs() < 1e-15);
    }

    #[test]
    fn slit_faces_are_boundary_and_disconnected() {
        let m = diagonal_mesh(20);
        let plus = m.matrix.faces_tagged(BoundaryTag::SlitPlus).count();
        let minus = m.matrix.faces_tagged(BoundaryTag::SlitMinus).count();
        assert_eq!((plus, minus), (16, 16));
        for f in m.matrix.faces_tagged(BoundaryTag::SlitPlus) {
            assert!(m.matrix.faces[f].is_boundary());
        }
    }

    #[test]
    fn interior_cells_have_zero_divergence_of_constants() {
        let m = diagonal_mesh(10);
        let v = [0.3, -1.7];
        for c in 0..m.matrix.n_cells() {
            let div: f64 = m.matrix.cell_faces[c]
                .iter()
                .map(|&f| {
                    let face = &m.matrix.faces[f];
                    m.matrix.orientation(c, f) * face.area * (v[0] * face.normal[0] + v[1] * face.normal[1])
                })
                .sum();
            assert!(div.abs() < 1e-12);
        }
    }

    #[test]
    fn interface_maps_compose() {
        let m = diagonal_mesh(10).with_layers();
        let gamma = m.maps_gamma.as_ref().unwrap();
        for side in Side::BOTH {
            for &(layer_seg, face) in &m.maps_m[side.index()].pairs {
                let frac = gamma[side.index()].pairs[layer_seg].1;
                let a = m.matrix.faces[face].centroid;
                let b = m.fracture.segment_centroid(frac);
                assert!((a[0] - b[0]).hypot(a[1] - b[1]) <= 1e-12);
            }
        }
    }

    #[test]
    fn rectangle_layout() {
        let m = build_rectangle(4, 2, 2.0, 1.0, BoundaryLayout::left_to_right()).unwrap();
        assert_eq!(m.matrix.n_cells(), 16);
        assert!(m.fracture.is_empty());
        assert_eq!(m.matrix.faces_tagged(BoundaryTag::Inflow).count(), 2);
        assert_eq!(m.matrix.faces_tagged(BoundaryTag::Outflow).count(), 2);
    }
}
