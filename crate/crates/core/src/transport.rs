//! Implicit advection–diffusion of the solute on all subdomains.
//!
//! Cell-centred finite volumes: two-point diffusive fluxes, weighted
//! upstream advection and backward Euler in time. The accumulation term is
//! written in mass form, `V (c_new u_new - c_old u_old) / dt`, where `c` is
//! the storage capacity (porosity in the matrix, aperture in the fracture,
//! thickness times porosity in a layer). Combined with a flow field whose
//! storage sources were computed from the same capacities this keeps
//! constant states constant and the global solute balance exact.

use crate::error::SolveError;
use crate::flow::FlowState;
use crate::linsolve::SparseSystem;
use crate::mesh::{BoundaryTag, EndTag, LowerDimGrid, Mode, MixedDimMesh, Side};
use crate::scalar::Scalar;

/// Two-point transmissibility `area / (d1/k1 + d2/k2)`, zero if either conductivity vanishes.
pub fn tpfa_transmissibility<T: Scalar>(k1: T, k2: T, d1: T, d2: T, area: T) -> Result<T, SolveError> {
    if !(d1 > T::zero()) || !(d2 > T::zero()) {
        return Err(SolveError::NonPositive {
            what: "centroid-to-face distance",
            subdomain: "transport",
            index: usize::from(d1 > T::zero()),
            value: d1.min(d2).to_f64().unwrap_or(f64::NAN),
        });
    }
    if k1 == T::zero() || k2 == T::zero() {
        return Ok(T::zero());
    }
    Ok(area / (d1 / k1 + d2 / k2))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportBoundary {
    pub u_inflow: f64,
    pub u_outflow: f64,
    /// Outward total flux density on noflow faces.
    pub chi_noflow: f64,
    pub u_fracture_inflow: f64,
    pub u_layer_inflow: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransportProperties {
    pub d_matrix: f64,
    /// Tangential and normal diffusivity of the fracture.
    pub d_fracture: f64,
    pub delta_fracture: f64,
    pub d_layer: f64,
    pub delta_layer: f64,
    /// Upstream weight in `[1/2, 1]`; 1 is full upwind.
    pub upwind_weight: f64,
    pub boundary: TransportBoundary,
}

/// Porosity and width fields at one time level.
#[derive(Debug, Clone, PartialEq)]
pub struct Capacities {
    pub phi_matrix: Vec<f64>,
    pub aperture: Vec<f64>,
    pub phi_layers: Option<[Vec<f64>; 2]>,
    pub thickness: Option<[Vec<f64>; 2]>,
}

impl Capacities {
    fn layer(&self, s: usize, i: usize) -> f64 {
        self.thickness.as_ref().unwrap()[s][i] * self.phi_layers.as_ref().unwrap()[s][i]
    }
}

/// Solute concentrations, one vector per subdomain.
#[derive(Debug, Clone, PartialEq)]
pub struct Concentrations {
    pub matrix: Vec<f64>,
    pub fracture: Vec<f64>,
    pub layers: Option<[Vec<f64>; 2]>,
}

impl Concentrations {
    pub fn zeros(mesh: &MixedDimMesh) -> Self {
        let n = mesh.n_fracture();
        Self {
            matrix: vec![0.0; mesh.matrix.n_cells()],
            fracture: vec![0.0; n],
            layers: (mesh.mode == Mode::Multilayer).then(|| [vec![0.0; n], vec![0.0; n]]),
        }
    }

    pub fn filled(mesh: &MixedDimMesh, value: f64) -> Self {
        let mut c = Self::zeros(mesh);
        c.for_each_mut(|v| *v = value);
        c
    }

    pub fn for_each_mut(&mut self, mut f: impl FnMut(&mut f64)) {
        self.matrix.iter_mut().for_each(&mut f);
        self.fracture.iter_mut().for_each(&mut f);
        if let Some(layers) = &mut self.layers {
            layers.iter_mut().flatten().for_each(&mut f);
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = f64> + '_ {
        let layers = self.layers.iter().flat_map(|l| l.iter().flatten());
        self.matrix.iter().chain(&self.fracture).chain(layers).copied()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TransportState {
    pub u: Concentrations,
    /// Total solute flux from the matrix into the lower-dimensional domain per slit face pair.
    pub chi_m: [Vec<f64>; 2],
    /// Total solute flux from the fracture into each layer segment.
    pub chi_gamma: Option<[Vec<f64>; 2]>,
    /// Solute that entered through the outer boundary during the step.
    pub boundary_influx: f64,
}

/// Total solute content `Σ measure · capacity · u`.
pub fn content(mesh: &MixedDimMesh, cap: &Capacities, u: &Concentrations) -> f64 {
    let m = &mesh.matrix;
    let mut total = 0.0;
    for c in 0..m.n_cells() {
        total += m.cell_volumes[c] * cap.phi_matrix[c] * u.matrix[c];
    }
    for i in 0..mesh.n_fracture() {
        total += mesh.fracture.lengths[i] * cap.aperture[i] * u.fracture[i];
    }
    if let Some(layers) = &u.layers {
        let grids = mesh.layers.as_ref().unwrap();
        for s in 0..2 {
            for i in 0..grids[s].n_segments() {
                total += grids[s].lengths[i] * cap.layer(s, i) * layers[s][i];
            }
        }
    }
    total
}

/// Flux between two unknowns or an unknown and a boundary value, split into
/// its advective and diffusive parts.
#[derive(Clone, Copy)]
struct Link {
    /// Volumetric flux from `a` to `b`.
    flux: f64,
    transmissibility: f64,
}

struct Assembler {
    sys: SparseSystem,
    rhs: Vec<f64>,
    weight: f64,
    influx: Vec<(usize, Link, f64)>,
}

impl Assembler {
    /// Coefficients of the flux from `a` to `b`, `χ = F u_up + T (u_a - u_b)`.
    fn coefficients(&self, l: Link) -> (f64, f64) {
        let w = self.weight;
        let (ca, cb) = if l.flux >= 0.0 { (w, 1.0 - w) } else { (1.0 - w, w) };
        (l.flux * ca + l.transmissibility, l.flux * cb - l.transmissibility)
    }

    fn connect(&mut self, a: usize, b: usize, l: Link) {
        let (ca, cb) = self.coefficients(l);
        self.sys.add(a, a, ca);
        self.sys.add(a, b, cb);
        self.sys.add(b, a, -ca);
        self.sys.add(b, b, -cb);
    }

    /// Outflow from `a` across a boundary held at concentration `value`.
    fn dirichlet(&mut self, a: usize, l: Link, value: f64) {
        let (ca, cb) = self.coefficients(l);
        self.sys.add(a, a, ca);
        self.rhs[a] -= cb * value;
        self.influx.push((a, l, value));
    }
}

fn one_d_links(grid: &LowerDimGrid, q: &[f64], conductivity: impl Fn(usize) -> f64) -> Vec<Link> {
    (1..grid.n_segments())
        .map(|v| {
            let (c0, c1) = (conductivity(v - 1), conductivity(v));
            let t = if c0 == 0.0 || c1 == 0.0 { 0.0 } else { 1.0 / (0.5 * grid.lengths[v - 1] / c0 + 0.5 * grid.lengths[v] / c1) };
            Link { flux: q[v], transmissibility: t }
        })
        .collect()
}

fn end_value(tag: EndTag, bc: &TransportBoundary, inflow: f64) -> Option<f64> {
    match tag {
        EndTag::Boundary(BoundaryTag::Inflow) => Some(inflow),
        EndTag::Boundary(BoundaryTag::Outflow) => Some(bc.u_outflow),
        _ => None,
    }
}

/// Concentration conditions at the two ends of a 1D grid; `ends` holds the
/// unknown and the conductivity of the end segments.
fn add_ends(asm: &mut Assembler, grid: &LowerDimGrid, q: &[f64], ends: [(usize, f64); 2], bc: &TransportBoundary, inflow: f64) {
    let last = grid.n_segments() - 1;
    for (k, (unknown, conductivity)) in ends.into_iter().enumerate() {
        if let Some(value) = end_value(grid.end_tags[k], bc, inflow) {
            let (seg, flux) = if k == 0 { (0, -q[0]) } else { (last, q[last + 1]) };
            let t = conductivity / (0.5 * grid.lengths[seg]);
            asm.dirichlet(unknown, Link { flux, transmissibility: t }, value);
        }
    }
}

fn check(mesh: &MixedDimMesh, flow: &FlowState, u_old: &Concentrations, cap: &Capacities) -> Result<(), SolveError> {
    let mismatch = |field, expected, got| if expected == got { Ok(()) } else { Err(SolveError::Mismatch { field, expected, got }) };
    mismatch("matrix concentration", mesh.matrix.n_cells(), u_old.matrix.len())?;
    mismatch("fracture concentration", mesh.n_fracture(), u_old.fracture.len())?;
    mismatch("matrix flux", mesh.matrix.n_faces(), flow.q_matrix.len())?;
    mismatch("matrix porosity", mesh.matrix.n_cells(), cap.phi_matrix.len())?;
    if mesh.mode == Mode::Multilayer && (u_old.layers.is_none() || cap.thickness.is_none() || flow.mortar_gamma.is_none()) {
        return Err(SolveError::Mismatch { field: "layer data", expected: 2, got: 0 });
    }
    let positive = |v: &[f64], what, subdomain| match v.iter().position(|&x| !(x > 0.0)) {
        Some(index) => Err(SolveError::NonPositive { what, subdomain, index, value: v[index] }),
        None => Ok(()),
    };
    positive(&cap.phi_matrix, "capacity", "matrix")?;
    positive(&cap.aperture, "capacity", "fracture")?;
    Ok(())
}

/// One backward-Euler step of advection–diffusion without reaction.
///
/// `cap_old` weighs `u_old`; `cap_new` is the capacity at the end of the
/// step (the predicted geometry in the splitting loop).
pub fn advect_diffuse_step(
    mesh: &MixedDimMesh,
    props: &TransportProperties,
    flow: &FlowState,
    u_old: &Concentrations,
    cap_old: &Capacities,
    cap_new: &Capacities,
    dt: f64,
) -> Result<TransportState, SolveError> {
    if !(dt > 0.0) {
        return Err(SolveError::BadTimeStep(dt));
    }
    check(mesh, flow, u_old, cap_old)?;
    check(mesh, flow, u_old, cap_new)?;
    let m = &mesh.matrix;
    let nc = m.n_cells();
    let ns = mesh.n_fracture();
    let multilayer = mesh.mode == Mode::Multilayer;
    let frac = |i: usize| nc + i;
    let layer = |side: Side, i: usize| nc + ns * (1 + side.index()) + i;
    let n = nc + ns * if multilayer { 3 } else { 1 };
    let bc = &props.boundary;
    let mut asm = Assembler {
        sys: SparseSystem::new(n),
        rhs: vec![0.0; n],
        weight: props.upwind_weight,
        influx: Vec::new(),
    };

    // accumulation
    for c in 0..nc {
        let v = m.cell_volumes[c] / dt;
        asm.sys.add(c, c, v * cap_new.phi_matrix[c]);
        asm.rhs[c] += v * cap_old.phi_matrix[c] * u_old.matrix[c];
    }
    for i in 0..ns {
        let v = mesh.fracture.lengths[i] / dt;
        asm.sys.add(frac(i), frac(i), v * cap_new.aperture[i]);
        asm.rhs[frac(i)] += v * cap_old.aperture[i] * u_old.fracture[i];
    }
    if multilayer {
        let old = u_old.layers.as_ref().unwrap();
        for side in Side::BOTH {
            let s = side.index();
            for i in 0..ns {
                let v = mesh.fracture.lengths[i] / dt;
                asm.sys.add(layer(side, i), layer(side, i), v * cap_new.layer(s, i));
                asm.rhs[layer(side, i)] += v * cap_old.layer(s, i) * old[s][i];
            }
        }
    }

    // matrix faces
    let mut slit = vec![None; m.n_faces()];
    for side in Side::BOTH {
        for &(seg, f) in &mesh.maps_m[side.index()].pairs {
            slit[f] = Some((side, seg));
        }
    }
    let diff = |c: usize| cap_new.phi_matrix[c] * props.d_matrix;
    let mut chi_links: Vec<(Side, usize, usize, usize, Link)> = Vec::new();
    for (f, face) in m.faces.iter().enumerate() {
        let a = face.cells.0;
        let da = m.centroid_distance(a, f);
        let flux = flow.q_matrix[f];
        match (face.cells.1, m.boundary_tags[f]) {
            (Some(b), _) => {
                let t = tpfa_transmissibility(diff(a), diff(b), da, m.centroid_distance(b, f), face.area)?;
                asm.connect(a, b, Link { flux, transmissibility: t });
            }
            (None, Some(tag)) if tag.is_slit() => {
                let (side, seg) = slit[f].expect("slit face without interface pair");
                let (target, k, half) = if multilayer {
                    (layer(side, seg), props.delta_layer, 0.5 * cap_new.thickness.as_ref().unwrap()[side.index()][seg])
                } else {
                    (frac(seg), props.delta_fracture, 0.5 * cap_new.aperture[seg])
                };
                let t = tpfa_transmissibility(diff(a), k, da, half, face.area)?;
                let l = Link { flux, transmissibility: t };
                asm.connect(a, target, l);
                chi_links.push((side, seg, a, target, l));
            }
            (None, Some(tag)) => {
                let value = match tag {
                    BoundaryTag::Inflow => Some(bc.u_inflow),
                    BoundaryTag::Outflow => Some(bc.u_outflow),
                    _ => None,
                };
                match value {
                    Some(value) => {
                        let t = face.area * diff(a) / da;
                        asm.dirichlet(a, Link { flux, transmissibility: t }, value);
                    }
                    None => asm.rhs[a] -= bc.chi_noflow * face.area,
                }
            }
            (None, None) => unreachable!("boundary face without tag"),
        }
    }

    // fracture
    let eps_d = |i: usize| cap_new.aperture[i] * props.d_fracture;
    for (v, l) in one_d_links(&mesh.fracture, &flow.q_fracture, eps_d).into_iter().enumerate() {
        asm.connect(frac(v), frac(v + 1), l);
    }
    if ns > 0 {
        let ends = [(frac(0), eps_d(0)), (frac(ns - 1), eps_d(ns - 1))];
        add_ends(&mut asm, &mesh.fracture, &flow.q_fracture, ends, bc, bc.u_fracture_inflow);
    }

    let mut chi_gamma_links: Vec<(Side, usize, Link)> = Vec::new();
    if multilayer {
        let grids = mesh.layers.as_ref().unwrap();
        let q_layers = flow.q_layers.as_ref().unwrap();
        let lambda = flow.mortar_gamma.as_ref().unwrap();
        for side in Side::BOTH {
            let s = side.index();
            let cond = |i: usize| cap_new.layer(s, i) * props.d_layer;
            for (v, l) in one_d_links(&grids[s], &q_layers[s], cond).into_iter().enumerate() {
                asm.connect(layer(side, v), layer(side, v + 1), l);
            }
            for i in 0..ns {
                let half_mu = 0.5 * cap_new.thickness.as_ref().unwrap()[s][i];
                let t = tpfa_transmissibility(props.delta_fracture, props.delta_layer, 0.5 * cap_new.aperture[i], half_mu, mesh.fracture.lengths[i])?;
                let l = Link { flux: lambda[s][i], transmissibility: t };
                asm.connect(frac(i), layer(side, i), l);
                chi_gamma_links.push((side, i, l));
            }
            if ns > 0 {
                let ends = [(layer(side, 0), cond(0)), (layer(side, ns - 1), cond(ns - 1))];
                add_ends(&mut asm, &grids[s], &q_layers[s], ends, bc, bc.u_layer_inflow);
            }
        }
    }

    let x = asm.sys.solve(&asm.rhs)?;

    let mut boundary_influx = 0.0;
    for &(a, l, value) in &asm.influx {
        let (ca, cb) = asm.coefficients(l);
        boundary_influx -= ca * x[a] + cb * value;
    }
    for (f, tag) in m.boundary_tags.iter().enumerate() {
        if *tag == Some(BoundaryTag::NoFlow) {
            boundary_influx -= bc.chi_noflow * m.faces[f].area;
        }
    }
    let flux_of = |a: usize, b: usize, l: Link| {
        let (ca, cb) = asm.coefficients(l);
        ca * x[a] + cb * x[b]
    };
    let mut chi_m = [vec![0.0; ns], vec![0.0; ns]];
    for (side, seg, a, b, l) in chi_links {
        chi_m[side.index()][seg] = flux_of(a, b, l);
    }
    let chi_gamma = multilayer.then(|| {
        let mut out = [vec![0.0; ns], vec![0.0; ns]];
        for (side, i, l) in chi_gamma_links {
            out[side.index()][i] = flux_of(frac(i), layer(side, i), l);
        }
        out
    });

    let u = Concentrations {
        matrix: x[..nc].to_vec(),
        fracture: x[nc..nc + ns].to_vec(),
        layers: multilayer.then(|| [x[nc + ns..nc + 2 * ns].to_vec(), x[nc + 2 * ns..nc + 3 * ns].to_vec()]),
    };
    Ok(TransportState { u, chi_m, chi_gamma, boundary_influx: boundary_influx * dt })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{assemble_and_solve, FlowBoundary, FlowProperties, FlowRates, LowerDimFlow};
    use crate::mesh::{build_rectangle, build_structured, BoundaryLayout};

    fn props(d: f64) -> TransportProperties {
        TransportProperties {
            d_matrix: d,
            d_fracture: 1e-6,
            delta_fracture: 1e-6,
            d_layer: 1e-6,
            delta_layer: 1e-6,
            upwind_weight: 1.0,
            boundary: TransportBoundary { u_inflow: 2.0, u_outflow: 0.0, chi_noflow: 0.0, u_fracture_inflow: 2.0, u_layer_inflow: 2.0 },
        }
    }

    fn flow_props(mesh: &MixedDimMesh) -> FlowProperties {
        let n = mesh.n_fracture();
        FlowProperties {
            k_matrix: vec![1.0; mesh.matrix.n_cells()],
            f_matrix: vec![0.0; mesh.matrix.n_cells()],
            fracture: LowerDimFlow::uniform(n, 1e2, 1e2, 1e-3),
            layers: mesh.layers.as_ref().map(|_| [LowerDimFlow::uniform(n, 1.0, 1.0, 1e-8), LowerDimFlow::uniform(n, 1.0, 1.0, 1e-8)]),
            boundary: FlowBoundary { p_inflow: 1.0, p_outflow: 0.0, q_noflow: 0.0, p_fracture_inflow: 1.0, p_layer_inflow: 1.0 },
        }
    }

    fn capacities(mesh: &MixedDimMesh, phi: f64, eps_mu: f64) -> Capacities {
        let n = mesh.n_fracture();
        let layered = mesh.mode == Mode::Multilayer;
        Capacities {
            phi_matrix: vec![phi; mesh.matrix.n_cells()],
            aperture: vec![1e-3; n],
            phi_layers: layered.then(|| [vec![phi; n], vec![phi; n]]),
            thickness: layered.then(|| [vec![eps_mu; n], vec![eps_mu; n]]),
        }
    }

    fn still(mesh: &MixedDimMesh) -> FlowState {
        let n = mesh.n_fracture();
        FlowState {
            p_matrix: vec![0.0; mesh.matrix.n_cells()],
            q_matrix: vec![0.0; mesh.matrix.n_faces()],
            p_fracture: vec![0.0; n],
            q_fracture: vec![0.0; n + usize::from(n > 0)],
            p_layers: None,
            q_layers: None,
            mortar_m: [vec![0.0; n], vec![0.0; n]],
            mortar_gamma: None,
        }
    }

    #[test]
    fn tpfa_examples() {
        assert_eq!(tpfa_transmissibility(1.0, 1.0, 0.5, 0.5, 1.0).unwrap(), 1.0);
        assert!((tpfa_transmissibility(1.0f64, 3.0, 0.5, 0.5, 1.0).unwrap() - 1.5).abs() < 1e-15);
        assert_eq!(tpfa_transmissibility(1.0, 0.0, 0.5, 0.5, 1.0).unwrap(), 0.0);
        assert!(tpfa_transmissibility(1.0, 1.0, 0.0, 0.5, 1.0).is_err());
        assert!(tpfa_transmissibility(1.0f32, 1.0, 0.5, -0.5, 1.0).is_err());
    }

    #[test]
    fn no_velocity_no_diffusion_is_identity() {
        let mesh = build_structured(10, [[0.1, 0.0], [0.9, 0.8]], BoundaryLayout::default()).unwrap();
        let cap = capacities(&mesh, 0.2, 1e-8);
        let mut u = Concentrations::zeros(&mesh);
        u.for_each_mut(|v| *v = 0.5);
        u.matrix[7] = 1.3;
        let mut p = props(0.0);
        p.d_fracture = 0.0;
        p.delta_fracture = 0.0;
        let out = advect_diffuse_step(&mesh, &p, &still(&mesh), &u, &cap, &cap, 0.1).unwrap();
        for (a, b) in out.u.iter().zip(u.iter()) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_bad_step() {
        let mesh = build_rectangle(2, 2, 1.0, 1.0, BoundaryLayout::left_to_right()).unwrap();
        let cap = capacities(&mesh, 0.2, 1e-8);
        let u = Concentrations::zeros(&mesh);
        let err = advect_diffuse_step(&mesh, &props(0.0), &still(&mesh), &u, &cap, &cap, 0.0).unwrap_err();
        assert_eq!(err, SolveError::BadTimeStep(0.0));
    }

    #[test]
    fn column_is_monotone_and_bounded() {
        let mesh = build_rectangle(40, 1, 1.0, 0.025, BoundaryLayout::left_to_right()).unwrap();
        let flow = assemble_and_solve(&mesh, &flow_props(&mesh), &FlowRates::zero(&mesh)).unwrap();
        let cap = capacities(&mesh, 0.2, 1e-8);
        let mut p = props(0.0);
        p.boundary.u_inflow = 1.0;
        let mut u = Concentrations::zeros(&mesh);
        let mut order: Vec<usize> = (0..mesh.matrix.n_cells()).collect();
        order.sort_by(|&a, &b| mesh.matrix.cell_centroids[a][0].total_cmp(&mesh.matrix.cell_centroids[b][0]));
        for _ in 0..10 {
            u = advect_diffuse_step(&mesh, &p, &flow, &u, &cap, &cap, 0.02).unwrap().u;
            assert!(u.iter().all(|v| (-1e-14..=1.0 + 1e-14).contains(&v)));
            for w in order.windows(2) {
                assert!(u.matrix[w[0]] >= u.matrix[w[1]] - 1e-14);
            }
        }
    }

    #[test]
    fn two_cells_relax_and_conserve() {
        let layout = BoundaryLayout {
            bottom: BoundaryTag::NoFlow,
            top: BoundaryTag::NoFlow,
            left: BoundaryTag::NoFlow,
            right: BoundaryTag::NoFlow,
        };
        let mesh = build_rectangle(1, 1, 1.0, 1.0, layout).unwrap();
        let cap = capacities(&mesh, 0.2, 1e-8);
        let mut u = Concentrations::zeros(&mesh);
        u.matrix = vec![2.0, 0.0];
        let p = props(1.0);
        let total = content(&mesh, &cap, &u);
        // oracle: the 2x2 system by hand, T = φ D |diag| / (2 d) with d the centroid distance to the diagonal
        let diag = mesh.matrix.faces.iter().position(|f| !f.is_boundary()).unwrap();
        let dist = mesh.matrix.centroid_distance(0, diag);
        let t = 0.2 * 1.0 * mesh.matrix.faces[diag].area / (2.0 * dist);
        let dt = 0.05;
        let v = 0.5 * 0.2 / dt;
        let mut gap = 2.0;
        for _ in 0..5 {
            let next = advect_diffuse_step(&mesh, &p, &still(&mesh), &u, &cap, &cap, dt).unwrap().u;
            // difference obeys v g' + 2 T g' = v g
            gap *= v / (v + 2.0 * t);
            assert!(((next.matrix[0] - next.matrix[1]) - gap).abs() < 1e-12);
            assert!((content(&mesh, &cap, &next) - total).abs() < 1e-12);
            assert!(next.matrix[0] > next.matrix[1] && next.matrix[1] > u.matrix[1]);
            u = next;
        }
    }

    #[test]
    fn global_balance_with_changing_capacity() {
        for layered in [false, true] {
            let mut mesh = build_structured(10, [[0.1, 0.0], [0.9, 0.8]], BoundaryLayout::default()).unwrap();
            if layered {
                mesh = mesh.with_layers();
            }
            let dt = 0.01;
            let old = capacities(&mesh, 0.2, 1e-3);
            let mut new = old.clone();
            for (c, phi) in new.phi_matrix.iter_mut().enumerate() {
                *phi = 0.2 / (1.0 + 0.05 * (c % 5) as f64);
            }
            new.aperture.iter_mut().enumerate().for_each(|(i, e)| *e *= 1.0 - 0.01 * i as f64);
            if let Some(phi) = new.phi_layers.as_mut() {
                phi[0][2] = 0.15;
            }
            let mut rates = FlowRates::zero(&mesh);
            for c in 0..rates.matrix.len() {
                rates.matrix[c] = (new.phi_matrix[c] - old.phi_matrix[c]) / dt;
            }
            for i in 0..rates.fracture.len() {
                rates.fracture[i] = (new.aperture[i] - old.aperture[i]) / dt;
            }
            if let Some(layer_rates) = rates.layers.as_mut() {
                for s in 0..2 {
                    for i in 0..layer_rates[s].len() {
                        layer_rates[s][i] = (new.layer(s, i) - old.layer(s, i)) / dt;
                    }
                }
            }
            let mut fp = flow_props(&mesh);
            if let Some(layers) = fp.layers.as_mut() {
                layers.iter_mut().for_each(|l| l.width.iter_mut().for_each(|w| *w = 1e-3));
            }
            let flow = assemble_and_solve(&mesh, &fp, &rates).unwrap();
            let mut u = Concentrations::zeros(&mesh);
            u.for_each_mut(|v| *v = 0.3);
            let p = props(1e-3);
            let before = content(&mesh, &old, &u);
            let out = advect_diffuse_step(&mesh, &p, &flow, &u, &old, &new, dt).unwrap();
            let after = content(&mesh, &new, &out.u);
            let scale = before.abs() + out.boundary_influx.abs();
            assert!((after - before - out.boundary_influx).abs() <= 1e-10 * scale, "layered={layered}");
        }
    }

    #[test]
    fn constant_state_is_preserved_by_consistent_storage() {
        let mesh = build_structured(10, [[0.1, 0.0], [0.9, 0.8]], BoundaryLayout::default()).unwrap().with_layers();
        let dt = 0.01;
        let old = capacities(&mesh, 0.2, 1e-3);
        let mut new = old.clone();
        new.phi_matrix.iter_mut().step_by(3).for_each(|p| *p = 0.19);
        let mut rates = FlowRates::zero(&mesh);
        for c in 0..rates.matrix.len() {
            rates.matrix[c] = (new.phi_matrix[c] - old.phi_matrix[c]) / dt;
        }
        let flow = assemble_and_solve(&mesh, &flow_props(&mesh), &rates).unwrap();
        let mut p = props(1e-3);
        p.boundary = TransportBoundary { u_inflow: 0.4, u_outflow: 0.4, chi_noflow: 0.0, u_fracture_inflow: 0.4, u_layer_inflow: 0.4 };
        let u = Concentrations::filled(&mesh, 0.4);
        let out = advect_diffuse_step(&mesh, &p, &flow, &u, &old, &new, dt).unwrap();
        assert!(out.u.iter().all(|v| (v - 0.4).abs() < 1e-10));
    }
}
