use std::collections::HashMap;

use crate::error::MeshError;

/// Label carried by every boundary face of the matrix grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BoundaryTag {
    Inflow,
    Outflow,
    NoFlow,
    SlitPlus,
    SlitMinus,
}

impl BoundaryTag {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundaryTag::Inflow => "inflow",
            BoundaryTag::Outflow => "outflow",
            BoundaryTag::NoFlow => "noflow",
            BoundaryTag::SlitPlus => "slit_plus",
            BoundaryTag::SlitMinus => "slit_minus",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "inflow" => BoundaryTag::Inflow,
            "outflow" => BoundaryTag::Outflow,
            "noflow" => BoundaryTag::NoFlow,
            "slit_plus" => BoundaryTag::SlitPlus,
            "slit_minus" => BoundaryTag::SlitMinus,
            _ => return None,
        })
    }

    pub fn is_slit(self) -> bool {
        matches!(self, BoundaryTag::SlitPlus | BoundaryTag::SlitMinus)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Face {
    pub nodes: [usize; 2],
    /// Owner cell and, for interior faces, the neighbour.
    pub cells: (usize, Option<usize>),
    /// Length of the edge.
    pub area: f64,
    /// Unit normal pointing out of the owner cell.
    pub normal: [f64; 2],
    pub centroid: [f64; 2],
}

impl Face {
    pub fn is_boundary(&self) -> bool {
        self.cells.1.is_none()
    }
}

/// Conforming triangulation of the matrix domain.
///
/// Cells are stored counter-clockwise. `cell_faces[c][k]` is the face
/// opposite local vertex `k`.
#[derive(Debug, Clone, PartialEq)]
pub struct TriangleMesh {
    pub nodes: Vec<[f64; 2]>,
    pub cells: Vec<[usize; 3]>,
    pub faces: Vec<Face>,
    pub cell_faces: Vec<[usize; 3]>,
    pub cell_volumes: Vec<f64>,
    pub cell_centroids: Vec<[f64; 2]>,
    /// `None` for interior faces.
    pub boundary_tags: Vec<Option<BoundaryTag>>,
}

pub(crate) fn signed_area(a: [f64; 2], b: [f64; 2], c: [f64; 2]) -> f64 {
    0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (c[0] - a[0]) * (b[1] - a[1]))
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    if a < b {
        (a, b)
    } else {
        (b, a)
    }
}

impl TriangleMesh {
    /// Builds faces and geometry from raw connectivity.
    ///
    /// Boundary faces listed in `tags` get that tag; other boundary faces
    /// default to [`BoundaryTag::NoFlow`].
    pub fn from_parts(
        nodes: Vec<[f64; 2]>,
        mut cells: Vec<[usize; 3]>,
        tags: &[([usize; 2], BoundaryTag)],
    ) -> Result<Self, MeshError> {
        let mut cell_volumes = Vec::with_capacity(cells.len());
        let mut cell_centroids = Vec::with_capacity(cells.len());
        for (id, cell) in cells.iter_mut().enumerate() {
            for &node in cell.iter() {
                if node >= nodes.len() {
                    return Err(MeshError::DanglingNode { entity: "cell", id, node });
                }
            }
            let [a, b, c] = cell.map(|i| nodes[i]);
            let mut area = signed_area(a, b, c);
            if area < 0.0 {
                cell.swap(1, 2);
                area = -area;
            }
            if !(area > 1e-14) {
                return Err(MeshError::DegenerateCell { id, area });
            }
            cell_volumes.push(area);
            cell_centroids.push([(a[0] + b[0] + c[0]) / 3.0, (a[1] + b[1] + c[1]) / 3.0]);
        }

        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut faces: Vec<Face> = Vec::new();
        let mut cell_faces = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let mut local = [0; 3];
            for k in 0..3 {
                let (a, b) = (cell[(k + 1) % 3], cell[(k + 2) % 3]);
                let key = edge_key(a, b);
                let f = match lookup.get(&key) {
                    Some(&f) => {
                        if faces[f].cells.1.is_some() {
                            return Err(MeshError::NonManifoldFace { n0: key.0, n1: key.1 });
                        }
                        faces[f].cells.1 = Some(c);
                        f
                    }
                    None => {
                        let (pa, pb) = (nodes[a], nodes[b]);
                        let (dx, dy) = (pb[0] - pa[0], pb[1] - pa[1]);
                        let area = dx.hypot(dy);
                        // counter-clockwise cell: outward normal is the edge rotated clockwise
                        let normal = [dy / area, -dx / area];
                        faces.push(Face {
                            nodes: [a, b],
                            cells: (c, None),
                            area,
                            normal,
                            centroid: [0.5 * (pa[0] + pb[0]), 0.5 * (pa[1] + pb[1])],
                        });
                        lookup.insert(key, faces.len() - 1);
                        faces.len() - 1
                    }
                };
                local[k] = f;
            }
            cell_faces.push(local);
        }

        let mut boundary_tags: Vec<Option<BoundaryTag>> =
            faces.iter().map(|f| f.is_boundary().then_some(BoundaryTag::NoFlow)).collect();
        for (id, &([a, b], tag)) in tags.iter().enumerate() {
            for node in [a, b] {
                if node >= nodes.len() {
                    return Err(MeshError::DanglingNode { entity: "bface", id, node });
                }
            }
            match lookup.get(&edge_key(a, b)) {
                Some(&f) if faces[f].is_boundary() => boundary_tags[f] = Some(tag),
                _ => return Err(MeshError::UnknownBoundaryFace { n0: a, n1: b }),
            }
        }

        Ok(Self { nodes, cells, faces, cell_faces, cell_volumes, cell_centroids, boundary_tags })
    }

    pub fn n_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn n_faces(&self) -> usize {
        self.faces.len()
    }

    /// +1 when the stored normal of `face` points out of `cell`, -1 otherwise.
    pub fn orientation(&self, cell: usize, face: usize) -> f64 {
        if self.faces[face].cells.0 == cell {
            1.0
        } else {
            -1.0
        }
    }

    /// Retags the non-slit boundary faces from their centroids.
    pub fn retag_outer(&mut self, mut tag_at: impl FnMut([f64; 2]) -> BoundaryTag) {
        for (f, tag) in self.boundary_tags.iter_mut().enumerate() {
            if let Some(t) = tag {
                if !t.is_slit() {
                    *t = tag_at(self.faces[f].centroid);
                }
            }
        }
    }

    /// Cell containing `point` (ties resolved towards the lowest index).
    pub fn locate(&self, point: [f64; 2]) -> Option<usize> {
        let tol = 1e-12;
        self.cells.iter().position(|cell| {
            let [a, b, c] = cell.map(|i| self.nodes[i]);
            let scale = signed_area(a, b, c);
            signed_area(point, b, c) >= -tol * scale
                && signed_area(a, point, c) >= -tol * scale
                && signed_area(a, b, point) >= -tol * scale
        })
    }

    /// Normal distance from the cell centroid to the line of `face`.
    pub fn centroid_distance(&self, cell: usize, face: usize) -> f64 {
        let f = &self.faces[face];
        let c = self.cell_centroids[cell];
        ((f.centroid[0] - c[0]) * f.normal[0] + (f.centroid[1] - c[1]) * f.normal[1]).abs()
    }

    /// Faces carrying the given boundary tag.
    pub fn faces_tagged(&self, tag: BoundaryTag) -> impl Iterator<Item = usize> + '_ {
        self.boundary_tags.iter().enumerate().filter(move |(_, t)| **t == Some(tag)).map(|(f, _)| f)
    }
}
