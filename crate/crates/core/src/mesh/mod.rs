//! Mixed-dimensional geometry: a slit triangulation of the matrix, 1D grids
//! for the fracture and its two layers, and the interface maps between them.
//!
//! The plus side of the fracture is the one to the left of the fracture
//! polyline, which always starts at its lexicographically smaller endpoint
//! for meshes made by [`build_structured`]. Interface normals point from the
//! plus side to the minus side.

mod build;
mod io;
mod triangle;

pub use build::{build_rectangle, build_structured, BoundaryLayout};
pub use io::{export_mesh, import_mesh};
pub use triangle::{BoundaryTag, Face, TriangleMesh};

use crate::error::MeshError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Side {
    Plus,
    Minus,
}

impl Side {
    pub const BOTH: [Side; 2] = [Side::Plus, Side::Minus];

    pub fn index(self) -> usize {
        match self {
            Side::Plus => 0,
            Side::Minus => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::Plus => "plus",
            Side::Minus => "minus",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Mode {
    FractureOnly,
    Multilayer,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::FractureOnly => "fracture_only",
            Mode::Multilayer => "multilayer",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "fracture_only" => Some(Mode::FractureOnly),
            "multilayer" => Some(Mode::Multilayer),
            _ => None,
        }
    }
}

/// What sits at an end of a 1D grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EndTag {
    /// The end lies on the outer boundary with this tag.
    Boundary(BoundaryTag),
    /// Immersed tip inside the matrix.
    Tip,
}

/// Polyline grid for the fracture or a layer.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerDimGrid {
    pub points: Vec<[f64; 2]>,
    /// Arc length of each vertex.
    pub arc: Vec<f64>,
    pub lengths: Vec<f64>,
    pub tangents: Vec<[f64; 2]>,
    /// Unit normal pointing to the plus side.
    pub normals: Vec<[f64; 2]>,
    pub end_tags: [EndTag; 2],
}

impl LowerDimGrid {
    pub fn empty() -> Self {
        Self {
            points: Vec::new(),
            arc: Vec::new(),
            lengths: Vec::new(),
            tangents: Vec::new(),
            normals: Vec::new(),
            end_tags: [EndTag::Tip, EndTag::Tip],
        }
    }

    pub fn from_polyline(points: Vec<[f64; 2]>, end_tags: [EndTag; 2]) -> Result<Self, MeshError> {
        if points.len() == 1 {
            return Err(MeshError::BadFracture("a single vertex is not a polyline".into()));
        }
        let mut arc = vec![0.0; points.len()];
        let mut lengths = Vec::new();
        let mut tangents = Vec::new();
        let mut normals = Vec::new();
        for i in 1..points.len() {
            let (a, b) = (points[i - 1], points[i]);
            let len = (b[0] - a[0]).hypot(b[1] - a[1]);
            if !(len > 0.0) {
                return Err(MeshError::BadFracture(format!("segment {} has zero length", i - 1)));
            }
            let t = [(b[0] - a[0]) / len, (b[1] - a[1]) / len];
            arc[i] = arc[i - 1] + len;
            lengths.push(len);
            tangents.push(t);
            normals.push([-t[1], t[0]]);
        }
        Ok(Self { points, arc, lengths, tangents, normals, end_tags })
    }

    pub fn n_segments(&self) -> usize {
        self.lengths.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lengths.is_empty()
    }

    pub fn segment_centroid(&self, i: usize) -> [f64; 2] {
        let (a, b) = (self.points[i], self.points[i + 1]);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    }

    pub fn total_length(&self) -> f64 {
        self.arc.last().copied().unwrap_or(0.0)
    }
}

/// Pairs of matched entities across one side of an interface.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceMap {
    pub side: Side,
    /// (lower-dimensional segment, matrix slit face or other segment).
    pub pairs: Vec<(usize, usize)>,
    /// Projection weights; all ones on conforming grids.
    pub weights: Vec<f64>,
}

impl InterfaceMap {
    fn identity_like(side: Side, pairs: Vec<(usize, usize)>) -> Self {
        let weights = vec![1.0; pairs.len()];
        Self { side, pairs, weights }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MixedDimMesh {
    pub matrix: TriangleMesh,
    pub fracture: LowerDimGrid,
    /// Layer grids indexed by [`Side::index`]; present in multilayer mode.
    pub layers: Option<[LowerDimGrid; 2]>,
    /// Matrix slit faces matched to layer segments (multilayer) or fracture
    /// segments (fracture only), indexed by side.
    pub maps_m: [InterfaceMap; 2],
    /// Layer segments matched to fracture segments; multilayer only.
    pub maps_gamma: Option<[InterfaceMap; 2]>,
    pub mode: Mode,
}

impl MixedDimMesh {
    /// Derives the fracture and interface maps from the slit faces of `matrix`.
    pub fn from_matrix(matrix: TriangleMesh) -> Result<Self, MeshError> {
        let plus: Vec<usize> = matrix.faces_tagged(BoundaryTag::SlitPlus).collect();
        let minus: Vec<usize> = matrix.faces_tagged(BoundaryTag::SlitMinus).collect();

        let mut partner = vec![usize::MAX; plus.len()];
        let mut taken = vec![false; minus.len()];
        for (i, &fp) in plus.iter().enumerate() {
            let cp = matrix.faces[fp].centroid;
            let found = minus.iter().enumerate().find(|(j, &fm)| {
                let cm = matrix.faces[fm].centroid;
                !taken[*j] && (cp[0] - cm[0]).hypot(cp[1] - cm[1]) <= 1e-12
            });
            match found {
                Some((j, &fm)) => {
                    taken[j] = true;
                    partner[i] = fm;
                }
                None => return Err(MeshError::UnpairedSlitFace { face: fp, side: "plus" }),
            }
        }
        if let Some(j) = taken.iter().position(|t| !t) {
            return Err(MeshError::UnpairedSlitFace { face: minus[j], side: "minus" });
        }

        if plus.is_empty() {
            return Ok(Self {
                matrix,
                fracture: LowerDimGrid::empty(),
                layers: None,
                maps_m: [InterfaceMap::identity_like(Side::Plus, vec![]), InterfaceMap::identity_like(Side::Minus, vec![])],
                maps_gamma: None,
                mode: Mode::FractureOnly,
            });
        }

        let edges: Vec<[usize; 2]> = plus.iter().map(|&f| matrix.faces[f].nodes).collect();
        let (mut path, mut order) = chain(&edges)?;
        // orient so that the plus cells lie to the left
        {
            let f = &matrix.faces[plus[order[0]]];
            let (a, b) = (matrix.nodes[path[0]], matrix.nodes[path[1]]);
            let n = [-(b[1] - a[1]), b[0] - a[0]];
            let c = matrix.cell_centroids[f.cells.0];
            if (c[0] - a[0]) * n[0] + (c[1] - a[1]) * n[1] < 0.0 {
                path.reverse();
                order.reverse();
            }
        }

        let end_tag = |node: usize| -> EndTag {
            matrix
                .faces
                .iter()
                .zip(&matrix.boundary_tags)
                .find(|(face, tag)| matches!(tag, Some(t) if !t.is_slit()) && face.nodes.contains(&node))
                .map(|(_, tag)| EndTag::Boundary(tag.unwrap()))
                .unwrap_or(EndTag::Tip)
        };
        let end_tags = [end_tag(path[0]), end_tag(*path.last().unwrap())];
        let points = path.iter().map(|&v| matrix.nodes[v]).collect();
        let fracture = LowerDimGrid::from_polyline(points, end_tags)?;

        let plus_pairs = order.iter().enumerate().map(|(s, &i)| (s, plus[i])).collect();
        let minus_pairs = order.iter().enumerate().map(|(s, &i)| (s, partner[i])).collect();
        let mesh = Self {
            matrix,
            fracture,
            layers: None,
            maps_m: [InterfaceMap::identity_like(Side::Plus, plus_pairs), InterfaceMap::identity_like(Side::Minus, minus_pairs)],
            maps_gamma: None,
            mode: Mode::FractureOnly,
        };
        mesh.check_coincidence()?;
        Ok(mesh)
    }

    /// Switches to multilayer mode: both layers reuse the fracture grid.
    pub fn with_layers(mut self) -> Self {
        let n = self.fracture.n_segments();
        let ident: Vec<(usize, usize)> = (0..n).map(|i| (i, i)).collect();
        self.layers = Some([self.fracture.clone(), self.fracture.clone()]);
        self.maps_gamma = Some([
            InterfaceMap::identity_like(Side::Plus, ident.clone()),
            InterfaceMap::identity_like(Side::Minus, ident),
        ]);
        self.mode = Mode::Multilayer;
        self
    }

    pub fn with_mode(self, mode: Mode) -> Self {
        match mode {
            Mode::Multilayer if self.mode != Mode::Multilayer => self.with_layers(),
            Mode::FractureOnly => Self { layers: None, maps_gamma: None, mode, ..self },
            _ => self,
        }
    }

    /// Matrix slit face matched to lower-dimensional segment `seg` on `side`.
    pub fn slit_face(&self, side: Side, seg: usize) -> usize {
        self.maps_m[side.index()].pairs[seg].1
    }

    pub fn n_fracture(&self) -> usize {
        self.fracture.n_segments()
    }

    fn check_coincidence(&self) -> Result<(), MeshError> {
        for side in Side::BOTH {
            for &(seg, face) in &self.maps_m[side.index()].pairs {
                let a = self.fracture.segment_centroid(seg);
                let b = self.matrix.faces[face].centroid;
                if (a[0] - b[0]).hypot(a[1] - b[1]) > 1e-12 {
                    return Err(MeshError::BadFracture(format!(
                        "segment {seg} does not coincide with slit face {face}"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Orders edges into a single path. Returns the node path and, for each
/// path segment, the index of the edge it came from.
pub(crate) fn chain(edges: &[[usize; 2]]) -> Result<(Vec<usize>, Vec<usize>), MeshError> {
    use std::collections::BTreeMap;
    let mut incident: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (e, &[a, b]) in edges.iter().enumerate() {
        incident.entry(a).or_default().push(e);
        incident.entry(b).or_default().push(e);
    }
    if let Some((node, _)) = incident.iter().find(|(_, es)| es.len() > 2) {
        return Err(MeshError::BadFracture(format!("node {node} joins more than two fracture faces")));
    }
    let ends: Vec<usize> = incident.iter().filter(|(_, es)| es.len() == 1).map(|(&n, _)| n).collect();
    if ends.len() != 2 {
        return Err(MeshError::BadFracture(format!("expected two endpoints, found {}", ends.len())));
    }
    let mut path = vec![ends[0]];
    let mut order = Vec::with_capacity(edges.len());
    let mut used = vec![false; edges.len()];
    let mut current = ends[0];
    while let Some(&e) = incident[&current].iter().find(|&&e| !used[e]) {
        used[e] = true;
        let [a, b] = edges[e];
        current = if a == current { b } else { a };
        path.push(current);
        order.push(e);
    }
    if order.len() != edges.len() {
        return Err(MeshError::BadFracture("fracture faces are not connected".into()));
    }
    Ok((path, order))
}

/// Jump and average of two traces: `(plus - minus, (plus + minus)/2)`.
pub fn jump_average<T: Scalar>(plus: T, minus: T) -> (T, T) {
    (plus - minus, T::half() * (plus + minus))
}

/// Orders the traces around a layer into (plus, minus) for [`jump_average`].
///
/// For the minus layer the fracture lies on its plus side, so the jump is
/// `p_γ - tr p_Ω`; for the plus layer it is `tr p_Ω - p_γ`.
pub fn layer_traces<T>(side: Side, matrix_trace: T, fracture_value: T) -> (T, T) {
    match side {
        Side::Plus => (matrix_trace, fracture_value),
        Side::Minus => (fracture_value, matrix_trace),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn jump_average_examples() {
        assert_eq!(jump_average(2.0, 1.0), (1.0, 1.5));
        assert_eq!(jump_average(0.25f32, 0.25), (0.0, 0.25));
        let (p, m) = layer_traces(Side::Minus, 1.0, 3.0);
        assert_eq!(jump_average(p, m).0, 2.0);
        let (p, m) = layer_traces(Side::Plus, 1.0, 3.0);
        assert_eq!(jump_average(p, m).0, -2.0);
    }

    #[test]
    fn chain_orders_shuffled_edges() {
        let (path, order) = chain(&[[2, 3], [0, 1], [1, 2]]).unwrap();
        assert!(path == vec![0, 1, 2, 3] || path == vec![3, 2, 1, 0]);
        assert_eq!(order.len(), 3);
    }

    #[test]
    fn chain_rejects_branches_and_loops() {
        assert!(chain(&[[0, 1], [0, 2], [0, 3]]).is_err());
        assert!(chain(&[[0, 1], [1, 2], [2, 0]]).is_err());
        assert!(chain(&[[0, 1], [2, 3]]).is_err());
    }
}
