//! Turns a scenario configuration into a problem and runs it.

use std::path::Path;

use crate::chemistry::ReactionModel;
use crate::config::{MeshSource, ScenarioConfig};
use crate::error::{Error, MeshError};
use crate::flow::{FlowBoundary, FlowProperties, LowerDimFlow};
use crate::mesh::{build_structured, import_mesh, BoundaryLayout, Mode, MixedDimMesh};
use crate::splitting::{self, Eta, Problem, SimulationState, StepReport};
use crate::transport::{Capacities, Concentrations, TransportBoundary, TransportProperties};

/// One line of the per-step summary.
#[derive(Debug, Clone, PartialEq)]
pub struct StepRecord {
    pub n: usize,
    pub t: f64,
    pub content: f64,
    pub boundary_influx: f64,
    pub balance_error: f64,
    pub reaction_clamps: usize,
    pub extrapolation_clamps: usize,
    pub thickness_floor_hits: usize,
    pub min_phi_matrix: f64,
    pub min_aperture: f64,
    pub max_thickness: f64,
}

impl StepRecord {
    fn new(state: &SimulationState, report: &StepReport) -> Self {
        let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
        let g = &state.geometry;
        Self {
            n: state.n,
            t: state.t,
            content: report.content_after,
            boundary_influx: report.boundary_influx,
            balance_error: report.balance_error(),
            reaction_clamps: report.events.reaction_clamps,
            extrapolation_clamps: report.events.extrapolation_clamps,
            thickness_floor_hits: report.events.thickness_floor_hits,
            min_phi_matrix: min(&g.phi_matrix),
            min_aperture: min(&g.aperture),
            max_thickness: g.thickness.iter().flatten().flatten().copied().fold(0.0, f64::max),
        }
    }
}

#[derive(Debug, Clone)]
pub struct OutputBundle {
    pub problem: Problem,
    pub records: Vec<StepRecord>,
    pub state: SimulationState,
}

pub fn build_mesh(c: &ScenarioConfig) -> Result<MixedDimMesh, Error> {
    let mesh = match &c.mesh.source {
        MeshSource::Structured { n, fracture } => {
            let b = &c.boundary;
            let layout = BoundaryLayout { bottom: b.bottom, top: b.top, left: b.left, right: b.right };
            build_structured(*n, *fracture, layout)?
        }
        MeshSource::File(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            import_mesh(&text)?
        }
    };
    if mesh.n_fracture() == 0 {
        return Err(MeshError::Parse { line: 0, message: "the mesh has no fracture".into() }.into());
    }
    Ok(mesh.with_mode(c.mesh.mode))
}

pub fn build_problem(c: &ScenarioConfig, mesh: MixedDimMesh) -> Problem {
    let p = &c.physics;
    let b = &c.boundary;
    let (nc, n) = (mesh.matrix.n_cells(), mesh.n_fracture());
    let layered = mesh.mode == Mode::Multilayer;
    let lower = |k: f64, kappa: f64, width: f64, f: f64| LowerDimFlow {
        source: vec![f; n],
        ..LowerDimFlow::uniform(n, k / p.viscosity, kappa / p.viscosity, width)
    };
    let flow = FlowProperties {
        k_matrix: vec![p.k_matrix / p.viscosity; nc],
        f_matrix: vec![p.f_matrix; nc],
        fracture: lower(p.k_fracture, p.kappa_fracture, p.aperture, p.f_fracture),
        layers: layered.then(|| std::array::from_fn(|_| lower(p.k_layer, p.kappa_layer, p.thickness, p.f_layer))),
        boundary: FlowBoundary {
            p_inflow: b.p_inflow,
            p_outflow: b.p_outflow,
            q_noflow: b.q_noflow,
            p_fracture_inflow: b.p_fracture_inflow,
            p_layer_inflow: b.p_layer_inflow,
        },
    };
    let transport = TransportProperties {
        d_matrix: p.d_matrix,
        d_fracture: p.d_fracture,
        delta_fracture: p.delta_fracture,
        d_layer: p.d_layer,
        delta_layer: p.delta_layer,
        upwind_weight: p.upwind_weight,
        boundary: TransportBoundary {
            u_inflow: b.u_inflow,
            u_outflow: b.u_outflow,
            chi_noflow: b.chi_noflow,
            u_fracture_inflow: b.u_fracture_inflow,
            u_layer_inflow: b.u_layer_inflow,
        },
    };
    let ch = &c.chemistry;
    let reaction = ReactionModel { kinetics: ch.reaction, lambda: ch.lambda, rate_fn: ch.rate_fn, heaviside: ch.heaviside };
    let reference = Capacities {
        phi_matrix: vec![p.phi_matrix; nc],
        aperture: vec![p.aperture; n],
        phi_layers: layered.then(|| [vec![p.phi_layer; n], vec![p.phi_layer; n]]),
        thickness: layered.then(|| [vec![p.thickness; n], vec![p.thickness; n]]),
    };
    Problem {
        mesh,
        flow,
        transport,
        reaction,
        eta: Eta { matrix: p.eta_matrix, fracture: p.eta_fracture, layer: p.eta_layer },
        delta: ch.delta,
        thickness_floor: p.thickness,
        porosity_rate_lag: p.porosity_rate_lag,
        reference,
    }
}

pub fn initial_state(c: &ScenarioConfig, problem: &Problem) -> SimulationState {
    let b = &c.boundary;
    let mut u0 = Concentrations::zeros(&problem.mesh);
    u0.matrix.fill(b.u_matrix_init);
    u0.fracture.fill(b.u_fracture_init);
    if let Some(l) = u0.layers.as_mut() {
        l.iter_mut().for_each(|v| v.fill(b.u_layer_init));
    }
    SimulationState::initial(problem, &u0, &Concentrations::zeros(&problem.mesh))
}

/// Runs the scenario, calling `observe` after every step.
pub fn run_observed(
    c: &ScenarioConfig,
    mut observe: impl FnMut(&Problem, &SimulationState, &StepRecord) -> Result<(), Error>,
) -> Result<OutputBundle, Error> {
    let problem = build_problem(c, build_mesh(c)?);
    let mut state = initial_state(c, &problem);
    let mut records = Vec::with_capacity(c.time.n_steps);
    let dt = c.time.t_final / c.time.n_steps as f64;
    for index in 0..c.time.n_steps {
        let report = splitting::advance(&problem, &mut state, dt)
            .map_err(|e| crate::error::SplitError::AtTime { index, source: Box::new(e) })?;
        let record = StepRecord::new(&state, &report);
        observe(&problem, &state, &record)?;
        records.push(record);
    }
    Ok(OutputBundle { problem, records, state })
}

pub fn run(c: &ScenarioConfig) -> Result<OutputBundle, Error> {
    run_observed(c, |_, _, _| Ok(()))
}

/// Reads and parses a scenario file.
pub fn load_config(path: &Path) -> Result<ScenarioConfig, Error> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(crate::config::parse_config(&text)?)
}
