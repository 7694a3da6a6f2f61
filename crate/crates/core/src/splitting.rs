//! Sequential time stepping of geometry, flow, transport and reaction.
//!
//! One step from `t^n` to `t^{n+1}`:
//!
//! 1. extrapolate the precipitate, `w* = max(2wⁿ - wⁿ⁻¹, 0)`;
//! 2. predict porosities and aperture, `g* = gⁿ / (1 + η (w* - wⁿ))`;
//! 3. update permeabilities from the predicted geometry;
//! 4. solve the flow with storage sources `(g* - gⁿ)/Δt`;
//! 5. advect and diffuse the solute into the predicted pore space;
//! 6. carry the precipitate over, `w^{n+½} = wⁿ gⁿ / g*`;
//! 7. react cell by cell;
//! 8. correct the geometry with the reacted precipitate and grow the layers;
//! 9. rescale both species to the corrected pore space.
//!
//! Layer capacities are thickness times porosity; the thickness is only
//! changed in step 8.

use crate::chemistry::{Kinetics, ReactionModel};
use crate::error::SplitError;
use crate::flow::{assemble_and_solve, update_permeability, FlowProperties, FlowRates, FlowState, Geometry};
use crate::layer::{thickness_linear, LayerInputs};
use crate::mesh::{Mode, MixedDimMesh, Side};
use crate::scalar::Scalar;
use crate::transport::{advect_diffuse_step, content, Capacities, Concentrations, TransportProperties, TransportState};

/// `max(2w - w_prev, 0)` and whether the clamp was active.
pub fn extrapolate<T: Scalar>(w: T, w_prev: T) -> (T, bool) {
    let raw = T::two() * w - w_prev;
    if raw < T::zero() {
        (T::zero(), true)
    } else {
        (raw, false)
    }
}

/// `g / (1 + η (w_new - w))`, `None` when the denominator is not positive.
pub fn predict<T: Scalar>(g: T, eta: T, w_new: T, w: T) -> Option<T> {
    let denominator = T::one() + eta * (w_new - w);
    (denominator > T::zero()).then(|| g / denominator)
}

/// Concentration after its pore space changed from `cap_old` to `cap_new` at fixed mass.
pub fn rescale<T: Scalar>(value: T, cap_old: T, cap_new: T) -> T {
    value * cap_old / cap_new
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eta {
    pub matrix: f64,
    pub fracture: f64,
    pub layer: f64,
}

/// Everything that stays fixed during a simulation.
#[derive(Debug, Clone)]
pub struct Problem {
    pub mesh: MixedDimMesh,
    /// Properties at the reference geometry.
    pub flow: FlowProperties,
    pub transport: TransportProperties,
    pub reaction: ReactionModel<f64>,
    pub eta: Eta,
    /// Cutoff offset of the layer thickness model.
    pub delta: f64,
    /// Initial and minimal layer thickness.
    pub thickness_floor: f64,
    /// Storage rate paired with the geometry two levels back.
    pub porosity_rate_lag: bool,
    pub reference: Capacities,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Events {
    pub reaction_clamps: usize,
    pub extrapolation_clamps: usize,
    pub thickness_floor_hits: usize,
}

#[derive(Debug, Clone)]
pub struct SimulationState {
    pub n: usize,
    pub t: f64,
    pub u: Concentrations,
    pub w: Concentrations,
    pub w_prev: Concentrations,
    pub geometry: Capacities,
    pub geometry_prev: Capacities,
    /// Time each layer segment has spent growing, indexed by side.
    pub growth_time: Option<[Vec<f64>; 2]>,
    pub flow: Option<FlowState>,
    pub transport: Option<TransportState>,
    pub events: Events,
}

/// Budget of one step, for the global balance check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepReport {
    pub content_before: f64,
    pub content_after: f64,
    pub boundary_influx: f64,
    pub events: Events,
}

impl StepReport {
    /// `|Δcontent - influx|` relative to the largest term.
    pub fn balance_error(&self) -> f64 {
        let scale = self.content_before.abs().max(self.content_after.abs()).max(self.boundary_influx.abs());
        let err = (self.content_after - self.content_before - self.boundary_influx).abs();
        if scale > 0.0 {
            err / scale
        } else {
            err
        }
    }
}

impl SimulationState {
    /// Initial state with the reference geometry and uniform concentrations.
    pub fn initial(problem: &Problem, u0: &Concentrations, w0: &Concentrations) -> Self {
        let n = problem.mesh.n_fracture();
        Self {
            n: 0,
            t: 0.0,
            u: u0.clone(),
            w: w0.clone(),
            w_prev: w0.clone(),
            geometry: problem.reference.clone(),
            geometry_prev: problem.reference.clone(),
            growth_time: (problem.mesh.mode == Mode::Multilayer).then(|| [vec![0.0; n], vec![0.0; n]]),
            flow: None,
            transport: None,
            events: Events::default(),
        }
    }

    /// Solute plus precipitate content.
    pub fn species_content(&self, mesh: &MixedDimMesh) -> f64 {
        content(mesh, &self.geometry, &self.u) + content(mesh, &self.geometry, &self.w)
    }
}

/// Step 1 on every field; returns the number of clamped entries.
pub fn extrapolate_w(w: &Concentrations, w_prev: &Concentrations) -> (Concentrations, usize) {
    let mut out = w.clone();
    let prev: Vec<f64> = w_prev.iter().collect();
    let mut clamps = 0;
    let mut k = 0;
    out.for_each_mut(|v| {
        let (value, clamped) = extrapolate(*v, prev[k]);
        *v = value;
        clamps += usize::from(clamped);
        k += 1;
    });
    (out, clamps)
}

fn geometry_error(step: u8, subdomain: &'static str, index: usize, value: f64) -> SplitError {
    SplitError::Geometry { step, what: "geometry update", subdomain, index, value }
}

/// Steps 2 and 8: porosities and aperture after the precipitate moved from
/// `w` to `w_new`. Layer thicknesses are copied.
pub fn predict_geometry(
    geometry: &Capacities,
    eta: &Eta,
    w_new: &Concentrations,
    w: &Concentrations,
    step: u8,
) -> Result<Capacities, SplitError> {
    let mut out = geometry.clone();
    let update = |g: &mut [f64], eta: f64, new: &[f64], old: &[f64], subdomain: &'static str| {
        for i in 0..g.len() {
            g[i] = predict(g[i], eta, new[i], old[i])
                .ok_or_else(|| geometry_error(step, subdomain, i, 1.0 + eta * (new[i] - old[i])))?;
        }
        Ok::<(), SplitError>(())
    };
    update(&mut out.phi_matrix, eta.matrix, &w_new.matrix, &w.matrix, "matrix")?;
    update(&mut out.aperture, eta.fracture, &w_new.fracture, &w.fracture, "fracture")?;
    if let (Some(phi), Some(new), Some(old)) = (out.phi_layers.as_mut(), &w_new.layers, &w.layers) {
        for s in 0..2 {
            update(&mut phi[s], eta.layer, &new[s], &old[s], "layer")?;
        }
    }
    Ok(out)
}

/// Storage capacity per entity in field order: φ, ε_γ, ε_μ φ_μ.
pub fn capacity_vector(geometry: &Capacities) -> Vec<f64> {
    let mut out = geometry.phi_matrix.clone();
    out.extend_from_slice(&geometry.aperture);
    if let (Some(phi), Some(eps)) = (&geometry.phi_layers, &geometry.thickness) {
        for s in 0..2 {
            out.extend(phi[s].iter().zip(&eps[s]).map(|(p, e)| p * e));
        }
    }
    out
}

/// Steps 6 and 9: keeps `capacity · concentration` fixed while the capacity
/// moves from `old` to `new`.
pub fn rescale_concentrations(
    fields: &mut Concentrations,
    old: &Capacities,
    new: &Capacities,
    step: u8,
) -> Result<(), SplitError> {
    let (co, cn) = (capacity_vector(old), capacity_vector(new));
    if let Some(k) = co.iter().chain(&cn).position(|&c| !(c > 0.0)) {
        let value = if k < co.len() { co[k] } else { cn[k - co.len()] };
        return Err(SplitError::Geometry { step, what: "rescaling", subdomain: "capacity", index: k % co.len(), value });
    }
    let mut k = 0;
    fields.for_each_mut(|v| {
        *v = rescale(*v, co[k], cn[k]);
        k += 1;
    });
    Ok(())
}

fn flow_rates(problem: &Problem, state: &SimulationState, predicted: &Capacities, dt: f64) -> FlowRates {
    let (base, span) = if problem.porosity_rate_lag && state.n > 0 {
        (&state.geometry_prev, 2.0 * dt)
    } else {
        (&state.geometry, dt)
    };
    let rate = |new: &[f64], old: &[f64]| new.iter().zip(old).map(|(a, b)| (a - b) / span).collect::<Vec<f64>>();
    let layers = match (&predicted.phi_layers, &base.phi_layers, &state.geometry.thickness) {
        (Some(new), Some(old), Some(eps)) => Some(std::array::from_fn(|s| {
            rate(&new[s], &old[s]).into_iter().zip(&eps[s]).map(|(r, e)| r * e).collect()
        })),
        _ => None,
    };
    FlowRates {
        matrix: rate(&predicted.phi_matrix, &base.phi_matrix),
        fracture: rate(&predicted.aperture, &base.aperture),
        layers,
    }
}

/// Step 8 for the layers: thickness from the linear growth law, never shrinking
/// and never below the floor. Returns the number of floor hits.
fn grow_layers(problem: &Problem, state: &mut SimulationState, flow: &FlowState, u_fracture: &[f64], next: &mut Capacities, dt: f64) -> usize {
    let (Some(lambda), Some(thickness), Some(phi), Some(growth)) =
        (&flow.mortar_gamma, next.thickness.as_mut(), &next.phi_layers, state.growth_time.as_mut())
    else {
        return 0;
    };
    let mut floor_hits = 0;
    for side in Side::BOTH {
        let s = side.index();
        for i in 0..thickness[s].len() {
            let h = problem.mesh.fracture.lengths[i];
            let q = lambda[s][i] / h;
            let u_gamma = u_fracture[i];
            if q > 0.0 && u_gamma > problem.delta {
                growth[s][i] += dt;
            }
            let inputs = LayerInputs {
                q,
                phi: phi[s][i],
                lambda: problem.reaction.lambda,
                delta: problem.delta,
                u_gamma,
                t: growth[s][i],
            };
            let model = thickness_linear(&inputs);
            if model < problem.thickness_floor {
                floor_hits += 1;
            }
            thickness[s][i] = thickness[s][i].max(model).max(problem.thickness_floor);
        }
    }
    floor_hits
}

/// Advances `state` by `dt`.
pub fn advance(problem: &Problem, state: &mut SimulationState, dt: f64) -> Result<StepReport, SplitError> {
    if !(dt > 0.0) {
        return Err(SplitError::Setup(format!("time step must be positive, got {dt:e}")));
    }
    let multilayer = problem.mesh.mode == Mode::Multilayer;
    if multilayer && problem.reaction.kinetics != Kinetics::Linear {
        return Err(SplitError::Setup("layer growth is only modelled for linear kinetics".into()));
    }
    let content_before = state.species_content(&problem.mesh);

    // 1-2
    let (w_star, extrapolation_clamps) = extrapolate_w(&state.w, &state.w_prev);
    let predicted = predict_geometry(&state.geometry, &problem.eta, &w_star, &state.w, 2)?;

    // 3-4
    let now = Geometry {
        phi_matrix: predicted.phi_matrix.clone(),
        aperture: predicted.aperture.clone(),
        phi_layers: predicted.phi_layers.clone(),
    };
    let reference = Geometry {
        phi_matrix: problem.reference.phi_matrix.clone(),
        aperture: problem.reference.aperture.clone(),
        phi_layers: problem.reference.phi_layers.clone(),
    };
    let props = update_permeability(&problem.flow, &now, &reference).map_err(|source| SplitError::Flow { step: 3, source })?;
    let rates = flow_rates(problem, state, &predicted, dt);
    let flow = assemble_and_solve(&problem.mesh, &props, &rates).map_err(|source| SplitError::Flow { step: 4, source })?;

    // 5
    let transport = advect_diffuse_step(&problem.mesh, &problem.transport, &flow, &state.u, &state.geometry, &predicted, dt)
        .map_err(|source| SplitError::Transport { step: 5, source })?;
    let mut u = transport.u.clone();

    // 6
    let mut w = state.w.clone();
    rescale_concentrations(&mut w, &state.geometry, &predicted, 6)?;

    // 7; transport may leave round-off negatives behind
    u.for_each_mut(|v| *v = v.max(0.0));
    let mut reaction_clamps = 0;
    let react = |u: &mut [f64], w: &mut [f64]| problem.reaction.react_field(u, w, dt);
    let err = |source| SplitError::Reaction { step: 7, source };
    reaction_clamps += react(&mut u.matrix, &mut w.matrix).map_err(err)?;
    reaction_clamps += react(&mut u.fracture, &mut w.fracture).map_err(err)?;
    if let (Some(ul), Some(wl)) = (u.layers.as_mut(), w.layers.as_mut()) {
        for s in 0..2 {
            reaction_clamps += react(&mut ul[s], &mut wl[s]).map_err(err)?;
        }
    }

    // 8
    let mut next = predict_geometry(&state.geometry, &problem.eta, &w, &state.w, 8)?;
    let thickness_floor_hits = grow_layers(problem, state, &flow, &u.fracture, &mut next, dt);

    // 9
    rescale_concentrations(&mut u, &predicted, &next, 9)?;
    rescale_concentrations(&mut w, &predicted, &next, 9)?;

    let events = Events { reaction_clamps, extrapolation_clamps, thickness_floor_hits };
    state.events.reaction_clamps += reaction_clamps;
    state.events.extrapolation_clamps += extrapolation_clamps;
    state.events.thickness_floor_hits += thickness_floor_hits;
    state.w_prev = std::mem::replace(&mut state.w, w);
    state.u = u;
    state.geometry_prev = std::mem::replace(&mut state.geometry, next);
    state.n += 1;
    state.t += dt;
    let boundary_influx = transport.boundary_influx;
    state.flow = Some(flow);
    state.transport = Some(transport);
    Ok(StepReport { content_before, content_after: state.species_content(&problem.mesh), boundary_influx, events })
}

/// Runs `n_steps` equal steps up to `t_final`, calling `observe` after each one.
pub fn run(
    problem: &Problem,
    state: &mut SimulationState,
    t_final: f64,
    n_steps: usize,
    mut observe: impl FnMut(&SimulationState, &StepReport),
) -> Result<(), SplitError> {
    if n_steps == 0 {
        return Ok(());
    }
    let dt = t_final / n_steps as f64;
    for index in 0..n_steps {
        let report = advance(problem, state, dt).map_err(|e| SplitError::AtTime { index, source: Box::new(e) })?;
        observe(state, &report);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::{FlowBoundary, LowerDimFlow};
    use crate::mesh::{build_structured, BoundaryLayout};
    use crate::transport::TransportBoundary;
    use proptest::prelude::*;

    fn problem(mode: Mode, eta: f64, d: f64, p_in: f64) -> Problem {
        let mesh = build_structured(10, [[0.1, 0.0], [0.9, 0.8]], BoundaryLayout::default()).unwrap().with_mode(mode);
        let n = mesh.n_fracture();
        let nc = mesh.matrix.n_cells();
        let layered = mode == Mode::Multilayer;
        let floor = 1e-6;
        Problem {
            flow: FlowProperties {
                k_matrix: vec![1.0; nc],
                f_matrix: vec![0.0; nc],
                fracture: LowerDimFlow::uniform(n, 1e2, 1e2, 1e-3),
                layers: layered.then(|| [LowerDimFlow::uniform(n, 1.0, 1.0, floor), LowerDimFlow::uniform(n, 1.0, 1.0, floor)]),
                boundary: FlowBoundary { p_inflow: p_in, p_outflow: 0.0, q_noflow: 0.0, p_fracture_inflow: p_in, p_layer_inflow: p_in },
            },
            transport: TransportProperties {
                d_matrix: d,
                d_fracture: d,
                delta_fracture: d,
                d_layer: d,
                delta_layer: d,
                upwind_weight: 1.0,
                boundary: TransportBoundary { u_inflow: 1.0, u_outflow: 0.0, chi_noflow: 0.0, u_fracture_inflow: 1.0, u_layer_inflow: 1.0 },
            },
            reaction: ReactionModel::linear(1.0),
            eta: Eta { matrix: eta, fracture: eta, layer: eta },
            delta: 0.1,
            thickness_floor: floor,
            porosity_rate_lag: false,
            reference: Capacities {
                phi_matrix: vec![0.2; nc],
                aperture: vec![1e-3; n],
                phi_layers: layered.then(|| [vec![0.2; n], vec![0.2; n]]),
                thickness: layered.then(|| [vec![floor; n], vec![floor; n]]),
            },
            mesh,
        }
    }

    #[test]
    fn pointwise_kernels() {
        assert_eq!(extrapolate(0.3, 0.1), (0.5, false));
        assert_eq!(extrapolate(0.1, 0.3), (0.0, true));
        assert_eq!(predict(0.2, 0.5, 0.4, 0.4), Some(0.2));
        assert!((predict(0.2f64, 1.0, 0.5, 0.0).unwrap() - 0.2 / 1.5).abs() < 1e-16);
        assert_eq!(predict(0.2, 2.0, 0.0, 0.5), None);
        assert_eq!(rescale(1.0, 0.2, 0.1), 2.0);
    }

    #[test]
    fn zero_eta_keeps_geometry_and_flow() {
        for mode in [Mode::FractureOnly, Mode::Multilayer] {
            let p = problem(mode, 0.0, 1e-3, 1.0);
            let mut s = SimulationState::initial(&p, &Concentrations::zeros(&p.mesh), &Concentrations::zeros(&p.mesh));
            advance(&p, &mut s, 0.05).unwrap();
            let first = s.flow.clone().unwrap();
            for _ in 0..3 {
                advance(&p, &mut s, 0.05).unwrap();
            }
            assert_eq!(s.geometry.phi_matrix, p.reference.phi_matrix);
            assert_eq!(s.geometry.aperture, p.reference.aperture);
            assert_eq!(s.geometry.phi_layers, p.reference.phi_layers);
            let last = s.flow.as_ref().unwrap();
            assert_eq!(first.q_matrix, last.q_matrix);
            assert_eq!(first.p_fracture, last.p_fracture);
            assert_eq!(first.mortar_m, last.mortar_m);
        }
    }

    #[test]
    fn closed_box_follows_pointwise_reaction() {
        // no pressure drop and no diffusion: every cell is an isolated batch reactor
        let p = problem(Mode::FractureOnly, 0.0, 0.0, 0.0);
        let u0 = Concentrations::filled(&p.mesh, 0.8);
        let mut s = SimulationState::initial(&p, &u0, &Concentrations::zeros(&p.mesh));
        let (mut u, mut w) = (0.8, 0.0);
        for _ in 0..5 {
            advance(&p, &mut s, 0.1).unwrap();
            let r = p.reaction.react_step(u, w, 0.1).unwrap();
            (u, w) = (r.u, r.w);
        }
        for (a, b) in s.u.iter().zip(s.w.iter()) {
            assert!((a - u).abs() < 1e-13 && (b - w).abs() < 1e-13, "{a} {b} vs {u} {w}");
        }
    }

    #[test]
    fn correction_with_predicted_precipitate_reproduces_prediction() {
        let p = problem(Mode::Multilayer, 0.7, 1e-3, 1.0);
        let mut w = Concentrations::zeros(&p.mesh);
        let mut prev = Concentrations::zeros(&p.mesh);
        let mut k = 0.0f64;
        w.for_each_mut(|v| {
            k += 1.0;
            *v = (k * 0.37).sin().abs() * 0.3;
        });
        prev.for_each_mut(|v| {
            k += 1.0;
            *v = (k * 0.11).cos().abs() * 0.3;
        });
        let (w_star, _) = extrapolate_w(&w, &prev);
        let a = predict_geometry(&p.reference, &p.eta, &w_star, &w, 2).unwrap();
        let b = predict_geometry(&p.reference, &p.eta, &w_star, &w, 8).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rescaling_keeps_content() {
        let p = problem(Mode::Multilayer, 0.5, 1e-3, 1.0);
        let mut other = p.reference.clone();
        other.phi_matrix.iter_mut().enumerate().for_each(|(i, v)| *v *= 1.0 + 0.01 * i as f64);
        other.aperture.iter_mut().for_each(|v| *v *= 0.7);
        if let Some(t) = other.thickness.as_mut() {
            t[1].iter_mut().for_each(|v| *v *= 3.0);
        }
        let mut u = Concentrations::filled(&p.mesh, 0.4);
        let before = content(&p.mesh, &p.reference, &u);
        rescale_concentrations(&mut u, &p.reference, &other, 9).unwrap();
        let after = content(&p.mesh, &other, &u);
        assert!((before - after).abs() < 1e-14 * before);
    }

    #[test]
    fn global_balance_each_step() {
        for mode in [Mode::FractureOnly, Mode::Multilayer] {
            let p = problem(mode, 0.5, 1e-3, 1.0);
            let mut s = SimulationState::initial(&p, &Concentrations::zeros(&p.mesh), &Concentrations::zeros(&p.mesh));
            let mut worst = 0.0f64;
            run(&p, &mut s, 1.0, 10, |_, r| worst = worst.max(r.balance_error())).unwrap();
            assert!(worst <= 1e-8, "{mode:?}: {worst:e}");
            assert!(s.geometry.phi_matrix.iter().any(|&v| v < 0.2), "precipitation should clog");
            if let Some(t) = &s.geometry.thickness {
                assert!(t.iter().flatten().all(|&v| v >= p.thickness_floor));
            }
        }
    }

    #[test]
    fn layers_grow_monotonically() {
        let p = problem(Mode::Multilayer, 0.1, 1e-3, 1.0);
        let mut s = SimulationState::initial(&p, &Concentrations::zeros(&p.mesh), &Concentrations::zeros(&p.mesh));
        let mut last = s.geometry.thickness.clone().unwrap();
        for _ in 0..8 {
            advance(&p, &mut s, 0.1).unwrap();
            let now = s.geometry.thickness.clone().unwrap();
            for (a, b) in now.iter().flatten().zip(last.iter().flatten()) {
                assert!(a >= b);
            }
            last = now;
        }
    }

    #[test]
    fn nonpositive_step_rejected() {
        let p = problem(Mode::FractureOnly, 0.0, 1e-3, 1.0);
        let mut s = SimulationState::initial(&p, &Concentrations::zeros(&p.mesh), &Concentrations::zeros(&p.mesh));
        assert!(matches!(advance(&p, &mut s, 0.0), Err(SplitError::Setup(_))));
    }

    proptest! {
        #[test]
        fn prediction_is_identity_without_change(g in 1e-3f64..1.0, eta in 0.0f64..10.0, w in 0.0f64..1.0) {
            prop_assert_eq!(predict(g, eta, w, w), Some(g));
        }

        #[test]
        fn extrapolation_nonnegative(w in 0.0f64..1.0, prev in 0.0f64..1.0) {
            let (v, clamped) = extrapolate(w, prev);
            prop_assert!(v >= 0.0);
            prop_assert_eq!(clamped, 2.0 * w < prev);
        }

        #[test]
        fn rescale_keeps_mass(u in 0.0f64..10.0, a in 1e-3f64..1.0, b in 1e-3f64..1.0) {
            prop_assert!((rescale(u, a, b) * b - u * a).abs() <= 1e-14 * (u * a).max(1e-300));
        }
    }
}
