//! Closed-form thickness of the reactive layers flanking the fracture.
//!
//! Near the fracture the solute is assumed to move one-dimensionally along
//! the normal direction `s` with the constant outward Darcy velocity `Q`,
//! entering at `s = 0` with the fracture concentration `u_γ` into clean rock:
//!
//! ```text
//! φ ∂_t u + Q ∂_s u = -φ r_w(u),   u(0, t) = u_γ,   u(s, 0) = 0
//! ```
//!
//! For the linear law the characteristic solution is
//! `u = u_γ exp(-λφ s / Q)` behind the front `s = Q t / φ` and zero ahead of
//! it; the layer is where `u > δ`. For the precipitation law with `r(u) = u²`
//! only the steady profile is available and the layer is where `u > 1 + δ`.
//!
//! [`oracle_1d`] integrates the same 1D problem numerically (explicit
//! upwind transport followed by the Heun reaction substep) and serves as an
//! independent check of both formulas.

use crate::chemistry::{Kinetics, ReactionModel};
use crate::error::LayerError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LayerInputs<T> {
    /// Normal Darcy velocity leaving the fracture.
    pub q: T,
    pub phi: T,
    pub lambda: T,
    /// Cutoff offset.
    pub delta: T,
    pub u_gamma: T,
    /// Elapsed growth time.
    pub t: T,
}

/// Steady nonlinear thickness together with the subsaturation flag.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SteadyThickness<T> {
    pub thickness: T,
    /// The fracture concentration is at or below equilibrium: no layer forms.
    pub subsaturated: bool,
}

impl<T: Scalar> LayerInputs<T> {
    /// Time after which the linear layer stops growing, `ln(u_γ/δ)/λ`.
    pub fn saturation_time(&self) -> T {
        (self.u_gamma / self.delta).ln() / self.lambda
    }

    /// The constant `C = (u_γ - 1)/(u_γ + 1)` of the steady nonlinear profile.
    pub fn profile_constant(&self) -> T {
        (self.u_gamma - T::one()) / (self.u_gamma + T::one())
    }
}

/// Layer thickness for linear kinetics: `(Q/φ) min(t, ln(u_γ/δ)/λ)`.
///
/// Degenerate inputs (no outflow, fracture concentration at or below the
/// cutoff) give zero.
pub fn thickness_linear<T: Scalar>(inputs: &LayerInputs<T>) -> T {
    if !(inputs.q > T::zero()) || !(inputs.u_gamma > inputs.delta) {
        return T::zero();
    }
    inputs.q / inputs.phi * inputs.t.min(inputs.saturation_time())
}

/// Steady layer thickness for the precipitation law with `r(u) = u²`:
/// `Q/(2λφ) ln(C (2+δ)/δ)`, zero when the cutoff is already met at the wall.
pub fn thickness_nonlinear_steady<T: Scalar>(inputs: &LayerInputs<T>) -> SteadyThickness<T> {
    if !(inputs.u_gamma > T::one()) {
        return SteadyThickness { thickness: T::zero(), subsaturated: true };
    }
    if !(inputs.q > T::zero()) {
        return SteadyThickness { thickness: T::zero(), subsaturated: false };
    }
    let argument = inputs.profile_constant() * (T::two() + inputs.delta) / inputs.delta;
    let thickness = if argument > T::one() {
        inputs.q / (T::two() * inputs.lambda * inputs.phi) * argument.ln()
    } else {
        T::zero()
    };
    SteadyThickness { thickness, subsaturated: false }
}

/// Transient solute profile for linear kinetics at distance `s` from the fracture.
pub fn profile_linear<T: Scalar>(inputs: &LayerInputs<T>, s: T) -> T {
    let front = inputs.q * inputs.t / inputs.phi;
    if s <= front {
        inputs.u_gamma * (-inputs.lambda * inputs.phi * s / inputs.q).exp()
    } else {
        T::zero()
    }
}

/// Steady solute profile for the precipitation law, `(C + e^x)/(e^x - C)` with
/// `x = 2λφs/Q`.
pub fn profile_nonlinear_steady<T: Scalar>(inputs: &LayerInputs<T>, s: T) -> Result<T, LayerError> {
    let c = inputs.profile_constant();
    // divide through by e^x so large s does not overflow
    let decay = c * (-T::two() * inputs.lambda * inputs.phi * s / inputs.q).exp();
    let denominator = T::one() - decay;
    if !(denominator > T::zero()) {
        return Err(LayerError::NegativeDistance { s: s.to_f64().unwrap_or(f64::NAN) });
    }
    Ok((T::one() + decay) / denominator)
}

/// Settings of the numerical 1D layer oracle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleSettings<T> {
    pub n_cells: usize,
    pub t_end: T,
    /// Domain length; `None` picks three times the predicted steady thickness.
    pub length: Option<T>,
    /// Courant number of the explicit upwind step.
    pub courant: T,
}

impl<T: Scalar> OracleSettings<T> {
    pub fn new(n_cells: usize, t_end: T) -> Self {
        Self { n_cells, t_end, length: None, courant: T::lit(0.9) }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThicknessSample<T> {
    pub t: T,
    pub thickness: T,
}

/// Cutoff concentration that bounds the layer for a given kinetic law.
pub fn cutoff<T: Scalar>(model: &ReactionModel<T>, delta: T) -> T {
    match model.kinetics {
        Kinetics::Linear => delta,
        Kinetics::Precipitation => T::one() + delta,
    }
}

/// Predicted steady thickness for the kinetic law, infinite when the layer never stops growing.
pub fn predicted_steady_thickness<T: Scalar>(model: &ReactionModel<T>, inputs: &LayerInputs<T>) -> T {
    match model.kinetics {
        Kinetics::Linear => {
            let mut steady = *inputs;
            steady.lambda = model.lambda;
            steady.t = T::infinity();
            if model.lambda > T::zero() {
                thickness_linear(&steady)
            } else {
                T::infinity()
            }
        }
        Kinetics::Precipitation => {
            let mut steady = *inputs;
            steady.lambda = model.lambda;
            thickness_nonlinear_steady(&steady).thickness
        }
    }
}

/// Brute-force 1D layer simulation.
///
/// Returns, after every time step, the largest distance at which the solute
/// exceeds the cutoff, found by linear interpolation between cell centres
/// (the inflow boundary value sits at `s = 0`). The reaction rate constant is
/// taken from `model`; `inputs.lambda` and `inputs.t` are ignored.
pub fn oracle_1d<T: Scalar>(
    model: &ReactionModel<T>,
    inputs: &LayerInputs<T>,
    settings: &OracleSettings<T>,
) -> Result<Vec<ThicknessSample<T>>, LayerError> {
    if settings.n_cells == 0 {
        return Err(LayerError::NoCells);
    }
    if !(inputs.q > T::zero()) {
        return Err(LayerError::NoOutflow(inputs.q.to_f64().unwrap_or(f64::NAN)));
    }
    let speed = inputs.q / inputs.phi;
    let length = settings.length.unwrap_or_else(|| {
        let steady = predicted_steady_thickness(model, inputs);
        if steady.is_finite() && steady > T::zero() {
            T::lit(3.0) * steady
        } else {
            T::lit(1.5) * speed * settings.t_end
        }
    });
    let n = settings.n_cells;
    let ds = length / T::from_usize(n).unwrap();
    let dt_max = settings.courant * ds / speed;
    let steps = (settings.t_end / dt_max).ceil().to_usize().unwrap_or(1).max(1);
    let dt = settings.t_end / T::from_usize(steps).unwrap();
    let courant = speed * dt / ds;
    let level = cutoff(model, inputs.delta);

    let mut u = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let mut history = Vec::with_capacity(steps);
    for step in 1..=steps {
        let mut upstream = inputs.u_gamma;
        for ui in u.iter_mut() {
            let old = *ui;
            *ui = old - courant * (old - upstream);
            upstream = old;
        }
        model.react_field(&mut u, &mut w, dt)?;
        let t = dt * T::from_usize(step).unwrap();
        if u[n - 1] > level {
            return Err(LayerError::DomainTooShort {
                length: length.to_f64().unwrap_or(f64::NAN),
                t: t.to_f64().unwrap_or(f64::NAN),
            });
        }
        let thickness = crossing(&u, inputs.u_gamma, ds, level);
        history.push(ThicknessSample { t, thickness });
    }
    Ok(history)
}

fn crossing<T: Scalar>(u: &[T], boundary: T, ds: T, level: T) -> T {
    let centre = |i: usize| (T::from_usize(i).unwrap() + T::half()) * ds;
    match u.iter().rposition(|&v| v > level) {
        Some(i) => {
            let (a, b) = (u[i], u[i + 1]);
            centre(i) + (a - level) / (a - b) * ds
        }
        None if boundary > level => {
            let a = boundary;
            let b = u[0];
            (a - level) / (a - b) * centre(0)
        }
        None => T::zero(),
    }
}
