//! Mixed-dimensional Darcy flow.
//!
//! The matrix uses lowest-order Raviart–Thomas fluxes with piecewise
//! constant pressures. On a triangle `T` with vertices `P_i` the flux basis
//! attached to the face opposite `P_i` is `σ_i (x - P_i) / (2|T|)`, where
//! `σ_i = ±1` orients the global face normal; its degree of freedom is the
//! total flux through the face. The fracture and the layers are 1D Darcy
//! problems on segments with conductivity `ε k`, discretized by two-point
//! fluxes.
//!
//! Across an interface of width `ε` and normal permeability `κ` each side
//! exchanges the flux `(2κ/ε)(p_side - p_mid)` with the mid-surface unknown.
//! Between a layer and the fracture both half-widths act in series.

use crate::error::SolveError;
use crate::linsolve::SparseSystem;
use crate::mesh::{BoundaryTag, EndTag, LowerDimGrid, Mode, MixedDimMesh, Side};
use crate::scalar::Scalar;

/// Permeability of a porous or open region that has shrunk from `g0` to `g`:
/// `k0 (g/g0)²`.
pub fn power_law<T: Scalar>(k0: T, g: T, g0: T) -> T {
    let r = g / g0;
    k0 * r * r
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowBoundary {
    /// Pressure on matrix faces tagged inflow.
    pub p_inflow: f64,
    /// Pressure on outflow faces and outflow ends of the 1D domains.
    pub p_outflow: f64,
    /// Outward normal flux density on noflow faces.
    pub q_noflow: f64,
    pub p_fracture_inflow: f64,
    pub p_layer_inflow: f64,
}

/// Coefficients of a 1D subdomain.
#[derive(Debug, Clone, PartialEq)]
pub struct LowerDimFlow {
    /// Tangential permeability.
    pub k: Vec<f64>,
    /// Normal permeability.
    pub kappa: Vec<f64>,
    /// Aperture or thickness.
    pub width: Vec<f64>,
    /// Sink term `f` per unit length.
    pub source: Vec<f64>,
}

impl LowerDimFlow {
    pub fn uniform(n: usize, k: f64, kappa: f64, width: f64) -> Self {
        Self { k: vec![k; n], kappa: vec![kappa; n], width: vec![width; n], source: vec![0.0; n] }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowProperties {
    pub k_matrix: Vec<f64>,
    /// Sink term `f` per unit area.
    pub f_matrix: Vec<f64>,
    pub fracture: LowerDimFlow,
    /// Indexed by [`Side::index`].
    pub layers: Option<[LowerDimFlow; 2]>,
    pub boundary: FlowBoundary,
}

/// Porosities and widths that drive the permeability update.
#[derive(Debug, Clone, PartialEq)]
pub struct Geometry {
    pub phi_matrix: Vec<f64>,
    pub aperture: Vec<f64>,
    pub phi_layers: Option<[Vec<f64>; 2]>,
}

/// Storage rates (time derivative of porosity or width) entering the mass balances.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowRates {
    pub matrix: Vec<f64>,
    pub fracture: Vec<f64>,
    pub layers: Option<[Vec<f64>; 2]>,
}

impl FlowRates {
    pub fn zero(mesh: &MixedDimMesh) -> Self {
        let n = mesh.n_fracture();
        Self {
            matrix: vec![0.0; mesh.matrix.n_cells()],
            fracture: vec![0.0; n],
            layers: mesh.layers.as_ref().map(|_| [vec![0.0; n], vec![0.0; n]]),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FlowState {
    pub p_matrix: Vec<f64>,
    /// Total flux through each matrix face along its stored normal.
    pub q_matrix: Vec<f64>,
    pub p_fracture: Vec<f64>,
    /// Total tangential flux at each fracture vertex, along the tangent.
    pub q_fracture: Vec<f64>,
    pub p_layers: Option<[Vec<f64>; 2]>,
    pub q_layers: Option<[Vec<f64>; 2]>,
    /// Total flux leaving the matrix through the slit face of each segment,
    /// into the layer (multilayer) or the fracture (fracture only).
    pub mortar_m: [Vec<f64>; 2],
    /// Total flux from the fracture into each layer segment.
    pub mortar_gamma: Option<[Vec<f64>; 2]>,
}

impl FlowState {
    /// Net volumetric inflow through the outer boundary of all subdomains.
    pub fn boundary_inflow(&self, mesh: &MixedDimMesh) -> f64 {
        let m = &mesh.matrix;
        let mut inflow = 0.0;
        for (f, tag) in m.boundary_tags.iter().enumerate() {
            if matches!(tag, Some(t) if !t.is_slit()) {
                inflow -= self.q_matrix[f];
            }
        }
        let ends = |q: &[f64]| if q.is_empty() { 0.0 } else { q[0] - q[q.len() - 1] };
        inflow += ends(&self.q_fracture);
        if let Some(layers) = &self.q_layers {
            inflow += ends(&layers[0]) + ends(&layers[1]);
        }
        inflow
    }
}

fn tag_pressure(tag: BoundaryTag, boundary: &FlowBoundary, inflow: f64) -> Option<f64> {
    match tag {
        BoundaryTag::Inflow => Some(inflow),
        BoundaryTag::Outflow => Some(boundary.p_outflow),
        _ => None,
    }
}

/// Positive-valued check with an error naming the entity.
fn positive(values: &[f64], what: &'static str, subdomain: &'static str) -> Result<(), SolveError> {
    match values.iter().position(|&v| !(v > 0.0)) {
        Some(index) => Err(SolveError::NonPositive { what, subdomain, index, value: values[index] }),
        None => Ok(()),
    }
}

fn check_len(field: &'static str, expected: usize, got: usize) -> Result<(), SolveError> {
    if expected == got {
        Ok(())
    } else {
        Err(SolveError::Mismatch { field, expected, got })
    }
}

/// `k0 (φ/φ0)²` in the matrix and layers, `k0 (ε/ε0)²` (tangential and
/// normal) and the aperture itself in the fracture. Layer widths are kept.
pub fn update_permeability(props0: &FlowProperties, now: &Geometry, reference: &Geometry) -> Result<FlowProperties, SolveError> {
    positive(&now.phi_matrix, "porosity", "matrix")?;
    positive(&now.aperture, "aperture", "fracture")?;
    let mut props = props0.clone();
    for (c, k) in props.k_matrix.iter_mut().enumerate() {
        *k = power_law(props0.k_matrix[c], now.phi_matrix[c], reference.phi_matrix[c]);
    }
    let fr = &mut props.fracture;
    for i in 0..fr.k.len() {
        let (e, e0) = (now.aperture[i], reference.aperture[i]);
        fr.k[i] = power_law(props0.fracture.k[i], e, e0);
        fr.kappa[i] = power_law(props0.fracture.kappa[i], e, e0);
        fr.width[i] = e;
    }
    if let (Some(layers), Some(phi), Some(phi0), Some(layers0)) =
        (props.layers.as_mut(), &now.phi_layers, &reference.phi_layers, &props0.layers)
    {
        for s in 0..2 {
            positive(&phi[s], "porosity", "layer")?;
            for i in 0..layers[s].k.len() {
                layers[s].k[i] = power_law(layers0[s].k[i], phi[s][i], phi0[s][i]);
                layers[s].kappa[i] = power_law(layers0[s].kappa[i], phi[s][i], phi0[s][i]);
            }
        }
    }
    Ok(props)
}

/// Local RT0 mass matrix of `cell`, including the global orientation signs.
pub fn local_mass(mesh: &crate::mesh::TriangleMesh, cell: usize, k: f64) -> [[f64; 3]; 3] {
    let verts = mesh.cells[cell].map(|v| mesh.nodes[v]);
    let area = mesh.cell_volumes[cell];
    let sigma: [f64; 3] = std::array::from_fn(|i| mesh.orientation(cell, mesh.cell_faces[cell][i]));
    let mids: [[f64; 2]; 3] = std::array::from_fn(|e| {
        let (a, b) = (verts[(e + 1) % 3], verts[(e + 2) % 3]);
        [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1])]
    });
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            // edge-midpoint rule is exact for the quadratic integrand
            let integral: f64 = mids
                .iter()
                .map(|x| {
                    (x[0] - verts[i][0]) * (x[0] - verts[j][0]) + (x[1] - verts[i][1]) * (x[1] - verts[j][1])
                })
                .sum::<f64>()
                * area
                / 3.0;
            m[i][j] = sigma[i] * sigma[j] * integral / (4.0 * area * area * k);
        }
    }
    m
}

/// Two-point conductances of a 1D grid: interior vertices and the two ends.
struct Conductances {
    interior: Vec<f64>,
    ends: [Option<(f64, f64)>; 2],
}

fn conductances(grid: &LowerDimGrid, props: &LowerDimFlow, boundary: &FlowBoundary, inflow: f64) -> Conductances {
    let n = grid.n_segments();
    let c = |i: usize| props.width[i] * props.k[i];
    let interior = (1..n).map(|v| 1.0 / (0.5 * grid.lengths[v - 1] / c(v - 1) + 0.5 * grid.lengths[v] / c(v))).collect();
    let end = |k: usize, seg: usize| match grid.end_tags[k] {
        EndTag::Boundary(tag) => tag_pressure(tag, boundary, inflow).map(|p| (c(seg) / (0.5 * grid.lengths[seg]), p)),
        EndTag::Tip => None,
    };
    let ends = if n == 0 { [None, None] } else { [end(0, 0), end(1, n - 1)] };
    Conductances { interior, ends }
}

/// Adds `net tangential outflow` to rows `offset..offset+n` acting on the
/// pressures at the same offsets.
fn add_tangential(sys: &mut SparseSystem, rhs: &mut [f64], offset: usize, cond: &Conductances) {
    for (v, &t) in cond.interior.iter().enumerate() {
        let (a, b) = (offset + v, offset + v + 1);
        sys.add(a, a, t);
        sys.add(a, b, -t);
        sys.add(b, b, t);
        sys.add(b, a, -t);
    }
    let n = cond.interior.len() + 1;
    for (k, end) in cond.ends.iter().enumerate() {
        if let Some((t, p)) = end {
            let row = offset + if k == 0 { 0 } else { n - 1 };
            sys.add(row, row, *t);
            rhs[row] += t * p;
        }
    }
}

fn tangential_fluxes(p: &[f64], cond: &Conductances) -> Vec<f64> {
    let n = p.len();
    if n == 0 {
        return Vec::new();
    }
    let mut q = vec![0.0; n + 1];
    for (v, &t) in cond.interior.iter().enumerate() {
        q[v + 1] = t * (p[v] - p[v + 1]);
    }
    if let Some((t, pb)) = cond.ends[0] {
        q[0] = t * (pb - p[0]);
    }
    if let Some((t, pb)) = cond.ends[1] {
        q[n] = t * (p[n - 1] - pb);
    }
    q
}

struct Layout {
    n_faces: usize,
    n_cells: usize,
    n_seg: usize,
    multilayer: bool,
}

impl Layout {
    fn q(&self, f: usize) -> usize {
        f
    }
    fn p(&self, c: usize) -> usize {
        self.n_faces + c
    }
    fn p_fracture(&self, i: usize) -> usize {
        self.n_faces + self.n_cells + i
    }
    fn p_layer(&self, side: Side, i: usize) -> usize {
        self.n_faces + self.n_cells + self.n_seg * (1 + side.index()) + i
    }
    fn lambda(&self, side: Side, i: usize) -> usize {
        self.n_faces + self.n_cells + self.n_seg * (3 + side.index()) + i
    }
    fn size(&self) -> usize {
        self.n_faces + self.n_cells + self.n_seg * if self.multilayer { 5 } else { 1 }
    }
}

fn check_inputs(mesh: &MixedDimMesh, props: &FlowProperties, rates: &FlowRates) -> Result<(), SolveError> {
    let (nc, ns) = (mesh.matrix.n_cells(), mesh.n_fracture());
    check_len("k_matrix", nc, props.k_matrix.len())?;
    check_len("f_matrix", nc, props.f_matrix.len())?;
    check_len("porosity_rate", nc, rates.matrix.len())?;
    check_len("fracture permeability", ns, props.fracture.k.len())?;
    check_len("aperture_rate", ns, rates.fracture.len())?;
    positive(&props.k_matrix, "permeability", "matrix")?;
    positive(&props.fracture.k, "tangential permeability", "fracture")?;
    positive(&props.fracture.kappa, "normal permeability", "fracture")?;
    positive(&props.fracture.width, "aperture", "fracture")?;
    if mesh.mode == Mode::Multilayer {
        let layers = props.layers.as_ref().ok_or(SolveError::Mismatch { field: "layer properties", expected: 2, got: 0 })?;
        let layer_rates = rates.layers.as_ref().ok_or(SolveError::Mismatch { field: "layer rates", expected: 2, got: 0 })?;
        for s in 0..2 {
            check_len("layer permeability", ns, layers[s].k.len())?;
            check_len("layer rate", ns, layer_rates[s].len())?;
            positive(&layers[s].k, "tangential permeability", "layer")?;
            positive(&layers[s].kappa, "normal permeability", "layer")?;
            positive(&layers[s].width, "thickness", "layer")?;
        }
    }
    Ok(())
}

/// Assembles and solves the coupled flow problem.
pub fn assemble_and_solve(mesh: &MixedDimMesh, props: &FlowProperties, rates: &FlowRates) -> Result<FlowState, SolveError> {
    check_inputs(mesh, props, rates)?;
    let m = &mesh.matrix;
    let multilayer = mesh.mode == Mode::Multilayer;
    let lay = Layout { n_faces: m.n_faces(), n_cells: m.n_cells(), n_seg: mesh.n_fracture(), multilayer };
    let bc = &props.boundary;
    let mut sys = SparseSystem::new(lay.size());
    let mut rhs = vec![0.0; lay.size()];
    let mut has_pressure = false;

    // face rows: k⁻¹ q + ∇p = 0 tested with each flux basis function
    for c in 0..m.n_cells() {
        let mass = local_mass(m, c, props.k_matrix[c]);
        for i in 0..3 {
            let fi = m.cell_faces[c][i];
            for j in 0..3 {
                sys.add(lay.q(fi), lay.q(m.cell_faces[c][j]), mass[i][j]);
            }
            sys.add(lay.q(fi), lay.p(c), -m.orientation(c, fi));
        }
    }
    let mut slit_side = vec![None; m.n_faces()];
    for side in Side::BOTH {
        for &(seg, f) in &mesh.maps_m[side.index()].pairs {
            slit_side[f] = Some((side, seg));
        }
    }
    for (f, tag) in m.boundary_tags.iter().enumerate() {
        let Some(tag) = *tag else { continue };
        let area = m.faces[f].area;
        match tag_pressure(tag, bc, bc.p_inflow) {
            Some(p) => {
                has_pressure = true;
                rhs[lay.q(f)] -= p;
            }
            None if tag.is_slit() => {
                let (side, seg) = slit_side[f].expect("slit face without interface pair");
                let (mid, resistance) = if multilayer {
                    let l = &props.layers.as_ref().unwrap()[side.index()];
                    (lay.p_layer(side, seg), l.width[seg] / (2.0 * l.kappa[seg] * area))
                } else {
                    let fr = &props.fracture;
                    (lay.p_fracture(seg), fr.width[seg] / (2.0 * fr.kappa[seg] * area))
                };
                sys.add(lay.q(f), mid, 1.0);
                sys.add(lay.q(f), lay.q(f), resistance);
            }
            // flux conditions replace the whole row below
            None => {}
        }
    }
    let flux_faces: Vec<usize> = m
        .boundary_tags
        .iter()
        .enumerate()
        .filter(|(_, t)| matches!(t, Some(t) if !t.is_slit() && tag_pressure(*t, bc, 0.0).is_none()))
        .map(|(f, _)| f)
        .collect();

    // cell rows: div q + |T| (rate + f) = 0
    for c in 0..m.n_cells() {
        for &f in &m.cell_faces[c] {
            sys.add(lay.p(c), lay.q(f), m.orientation(c, f));
        }
        rhs[lay.p(c)] = -m.cell_volumes[c] * (rates.matrix[c] + props.f_matrix[c]);
    }

    // fracture rows
    let frac_cond = conductances(&mesh.fracture, &props.fracture, bc, bc.p_fracture_inflow);
    has_pressure |= frac_cond.ends.iter().any(Option::is_some);
    if lay.n_seg > 0 {
        add_tangential(&mut sys, &mut rhs, lay.p_fracture(0), &frac_cond);
    }
    for i in 0..lay.n_seg {
        let row = lay.p_fracture(i);
        let h = mesh.fracture.lengths[i];
        rhs[row] -= h * (rates.fracture[i] + props.fracture.source[i]);
        for side in Side::BOTH {
            if multilayer {
                sys.add(row, lay.lambda(side, i), 1.0);
            } else {
                sys.add(row, lay.q(mesh.slit_face(side, i)), -1.0);
            }
        }
    }

    let mut layer_cond = Vec::new();
    if multilayer {
        let layers = props.layers.as_ref().unwrap();
        let layer_rates = rates.layers.as_ref().unwrap();
        let grids = mesh.layers.as_ref().unwrap();
        for side in Side::BOTH {
            let s = side.index();
            let cond = conductances(&grids[s], &layers[s], bc, bc.p_layer_inflow);
            has_pressure |= cond.ends.iter().any(Option::is_some);
            if lay.n_seg > 0 {
                add_tangential(&mut sys, &mut rhs, lay.p_layer(side, 0), &cond);
            }
            for i in 0..lay.n_seg {
                let h = grids[s].lengths[i];
                let row = lay.p_layer(side, i);
                rhs[row] -= h * (layer_rates[s][i] + layers[s].source[i]);
                sys.add(row, lay.q(mesh.slit_face(side, i)), -1.0);
                sys.add(row, lay.lambda(side, i), -1.0);

                // fracture-to-layer law with both half widths in series
                let fr = &props.fracture;
                let r = (fr.width[i] / (2.0 * fr.kappa[i]) + layers[s].width[i] / (2.0 * layers[s].kappa[i])) / h;
                let row = lay.lambda(side, i);
                sys.add(row, row, r);
                sys.add(row, lay.p_fracture(i), -1.0);
                sys.add(row, lay.p_layer(side, i), 1.0);
            }
            layer_cond.push(cond);
        }
    }

    if !has_pressure {
        return Err(SolveError::MissingPressureCondition);
    }

    let sys = override_flux_rows(sys, &flux_faces, &lay);
    for &f in &flux_faces {
        rhs[lay.q(f)] = bc.q_noflow * m.faces[f].area;
    }
    let x = sys.solve(&rhs)?;

    let q_matrix = x[..lay.n_faces].to_vec();
    let p_matrix = x[lay.n_faces..lay.n_faces + lay.n_cells].to_vec();
    let p_fracture: Vec<f64> = (0..lay.n_seg).map(|i| x[lay.p_fracture(i)]).collect();
    let q_fracture = tangential_fluxes(&p_fracture, &frac_cond);
    let mortar_m = Side::BOTH.map(|side| (0..lay.n_seg).map(|i| q_matrix[mesh.slit_face(side, i)]).collect());
    let (p_layers, q_layers, mortar_gamma) = if multilayer {
        let p: [Vec<f64>; 2] = Side::BOTH.map(|side| (0..lay.n_seg).map(|i| x[lay.p_layer(side, i)]).collect());
        let q = [tangential_fluxes(&p[0], &layer_cond[0]), tangential_fluxes(&p[1], &layer_cond[1])];
        let l = Side::BOTH.map(|side| (0..lay.n_seg).map(|i| x[lay.lambda(side, i)]).collect());
        (Some(p), Some(q), Some(l))
    } else {
        (None, None, None)
    };
    Ok(FlowState { p_matrix, q_matrix, p_fracture, q_fracture, p_layers, q_layers, mortar_m, mortar_gamma })
}

/// Replaces the rows of flux-condition faces by `q_f = value`.
fn override_flux_rows(sys: SparseSystem, faces: &[usize], lay: &Layout) -> SparseSystem {
    if faces.is_empty() {
        return sys;
    }
    let mut blocked = vec![false; lay.size()];
    for &f in faces {
        blocked[lay.q(f)] = true;
    }
    let mut out = SparseSystem::new(sys.n);
    for (r, c, v) in sys.entries() {
        if !blocked[r] {
            out.add(r, c, v);
        }
    }
    for &f in faces {
        out.add(lay.q(f), lay.q(f), 1.0);
    }
    out
}

/// Which lower-dimensional slab an interface residual belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Slab {
    Fracture,
    Layer(Side),
}

/// Residuals of the two interface conditions on one slab segment:
/// `(ε/κ) {q·n} - [p]` and `(ε/4κ) [q·n] + p_mid - {p}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceResidual {
    pub slab: Slab,
    pub segment: usize,
    pub jump_law: f64,
    pub average_law: f64,
}

/// Both interface conditions for one slab, with `n` pointing from the plus
/// trace to the minus trace and `q_plus`, `q_minus` flux densities along `n`.
pub fn slab_residual(a: f64, p_plus: f64, p_minus: f64, p_mid: f64, q_plus: f64, q_minus: f64) -> (f64, f64) {
    let (q_jump, q_avg) = crate::mesh::jump_average(q_plus, q_minus);
    let (p_jump, p_avg) = crate::mesh::jump_average(p_plus, p_minus);
    (a * q_avg - p_jump, 0.25 * a * q_jump + p_mid - p_avg)
}

/// Pressure trace on a boundary face recovered from its RT0 row.
pub fn matrix_trace(mesh: &MixedDimMesh, props: &FlowProperties, state: &FlowState, face: usize) -> f64 {
    let m = &mesh.matrix;
    let c = m.faces[face].cells.0;
    let mass = local_mass(m, c, props.k_matrix[c]);
    let i = m.cell_faces[c].iter().position(|&f| f == face).unwrap();
    let mq: f64 = (0..3).map(|j| mass[i][j] * state.q_matrix[m.cell_faces[c][j]]).sum();
    // row: M q - σ p_T + p_trace = 0 with σ = +1 on boundary faces
    state.p_matrix[c] - mq
}

/// Re-evaluates the interface conditions on every slab segment.
///
/// In multilayer mode the pressure where a layer meets the fracture is
/// recovered from the layer side of the series law, so the layer slab checks
/// the matrix–layer law and the fracture slab checks the layer–fracture law.
pub fn interface_flux_residual(mesh: &MixedDimMesh, props: &FlowProperties, state: &FlowState) -> Vec<InterfaceResidual> {
    let mut out = Vec::new();
    let fr = &props.fracture;
    for i in 0..mesh.n_fracture() {
        let face = |side: Side| mesh.slit_face(side, i);
        let area = mesh.matrix.faces[face(Side::Plus)].area;
        let trace = |side: Side| matrix_trace(mesh, props, state, face(side));
        // matrix-outward fluxes turned into densities along n (plus to minus)
        let q_plus_m = state.mortar_m[0][i] / area;
        let q_minus_m = -state.mortar_m[1][i] / area;
        match (&state.mortar_gamma, &state.p_layers, &props.layers) {
            (Some(lambda), Some(p_layers), Some(layers)) => {
                let h = mesh.fracture.lengths[i];
                let mut gamma_trace = [0.0; 2];
                for side in Side::BOTH {
                    let s = side.index();
                    let a = layers[s].width[i] / layers[s].kappa[i];
                    let p_mu = p_layers[s][i];
                    let (jump_law, average_law) = match side {
                        Side::Plus => {
                            // minus face of μ+ touches the fracture; flux there along n is -λ/h
                            let q_gamma = -lambda[s][i] / h;
                            gamma_trace[s] = p_mu - 0.5 * a * q_gamma;
                            slab_residual(a, trace(side), gamma_trace[s], p_mu, q_plus_m, q_gamma)
                        }
                        Side::Minus => {
                            let q_gamma = lambda[s][i] / h;
                            gamma_trace[s] = p_mu + 0.5 * a * q_gamma;
                            slab_residual(a, gamma_trace[s], trace(side), p_mu, q_gamma, q_minus_m)
                        }
                    };
                    out.push(InterfaceResidual { slab: Slab::Layer(side), segment: i, jump_law, average_law });
                }
                let a = fr.width[i] / fr.kappa[i];
                let (jump_law, average_law) = slab_residual(
                    a,
                    gamma_trace[0],
                    gamma_trace[1],
                    state.p_fracture[i],
                    -lambda[0][i] / h,
                    lambda[1][i] / h,
                );
                out.push(InterfaceResidual { slab: Slab::Fracture, segment: i, jump_law, average_law });
            }
            _ => {
                let a = fr.width[i] / fr.kappa[i];
                let (jump_law, average_law) =
                    slab_residual(a, trace(Side::Plus), trace(Side::Minus), state.p_fracture[i], q_plus_m, q_minus_m);
                out.push(InterfaceResidual { slab: Slab::Fracture, segment: i, jump_law, average_law });
            }
        }
    }
    out
}
