//! Temporal convergence studies: the reaction integrator, the splitting on a
//! lumped two-cell problem, and the layer-thickness oracle.

use crate::chemistry::{RateFn, ReactionModel};
use crate::error::Error;
use crate::layer::{oracle_1d, predicted_steady_thickness, profile_nonlinear_steady, thickness_linear, LayerInputs, OracleSettings};
use crate::splitting::{extrapolate, predict, rescale};

/// Errors at successively halved steps and the observed orders between them.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderStudy {
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
    pub orders: Vec<f64>,
}

impl OrderStudy {
    fn new(steps: Vec<f64>, errors: Vec<f64>) -> Self {
        let orders = errors.windows(2).zip(steps.windows(2)).map(|(e, h)| (e[0] / e[1]).ln() / (h[0] / h[1]).ln()).collect();
        Self { steps, errors, orders }
    }

    pub fn min_order(&self) -> f64 {
        self.orders.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReactionStudy {
    pub order: OrderStudy,
    /// Largest per-step change of `u + w`.
    pub max_sum_drift: f64,
}

/// Heun against the exact solution `u = e^{-λt}` of linear kinetics with λ = 1.
pub fn reaction_order() -> Result<ReactionStudy, Error> {
    let model = ReactionModel::<f64>::linear(1.0);
    let t_end = 1.0f64;
    let steps = vec![0.1, 0.05, 0.025, 0.0125];
    let mut errors = Vec::new();
    let mut drift = 0.0f64;
    for &dt in &steps {
        let n = (t_end / dt).round() as usize;
        let (mut u, mut w) = (1.0, 0.0);
        for _ in 0..n {
            let r = model.react_step(u, w, dt)?;
            drift = drift.max(((r.u + r.w) - (u + w)).abs());
            (u, w) = (r.u, r.w);
        }
        errors.push((u - (-t_end).exp()).abs());
    }
    Ok(ReactionStudy { order: OrderStudy::new(steps, errors), max_sum_drift: drift })
}

/// Two well-mixed cells exchanging solute, with forcing, linear
/// precipitation and porosity feedback.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LumpedProblem {
    pub exchange: f64,
    pub lambda: f64,
    pub eta: f64,
    pub phi0: [f64; 2],
    pub u0: [f64; 2],
    pub t_end: f64,
}

impl Default for LumpedProblem {
    fn default() -> Self {
        Self { exchange: 0.5, lambda: 1.0, eta: 0.1, phi0: [0.3, 0.2], u0: [0.5, 1.0], t_end: 1.0 }
    }
}

impl LumpedProblem {
    /// Solute supplied to each cell per unit time.
    pub fn forcing(&self, t: f64) -> [f64; 2] {
        [0.2 + 0.1 * (2.0 * std::f64::consts::PI * t).sin(), 0.1 + 0.05 * (std::f64::consts::PI * t).cos()]
    }

    /// Right-hand side of the monolithic system in `(u, w, φ)` per cell.
    fn rhs(&self, t: f64, y: &[f64; 6]) -> [f64; 6] {
        let s = self.forcing(t);
        let mut out = [0.0; 6];
        for i in 0..2 {
            let (u, w, phi) = (y[i], y[2 + i], y[4 + i]);
            let r = self.lambda * u;
            let dw = r / (1.0 - self.eta * w);
            let dphi = -self.eta * phi * dw;
            let exchange = -self.exchange * (u - y[1 - i]);
            out[i] = (exchange + s[i] - phi * r - dphi * u) / phi;
            out[2 + i] = dw;
            out[4 + i] = dphi;
        }
        out
    }

    /// Classical RK4 on the monolithic system.
    pub fn reference(&self, n_steps: usize) -> [f64; 6] {
        let mut y = [self.u0[0], self.u0[1], 0.0, 0.0, self.phi0[0], self.phi0[1]];
        let h = self.t_end / n_steps as f64;
        let axpy = |y: &[f64; 6], k: &[f64; 6], a: f64| std::array::from_fn::<f64, 6, _>(|j| y[j] + a * k[j]);
        for n in 0..n_steps {
            let t = n as f64 * h;
            let k1 = self.rhs(t, &y);
            let k2 = self.rhs(t + h / 2.0, &axpy(&y, &k1, h / 2.0));
            let k3 = self.rhs(t + h / 2.0, &axpy(&y, &k2, h / 2.0));
            let k4 = self.rhs(t + h, &axpy(&y, &k3, h));
            y = std::array::from_fn(|j| y[j] + h / 6.0 * (k1[j] + 2.0 * k2[j] + 2.0 * k3[j] + k4[j]));
        }
        y
    }

    /// The sequential scheme with the same pointwise kernels as the field solver;
    /// the transport step is backward Euler on the exchange.
    pub fn split(&self, n_steps: usize) -> Result<[f64; 6], Error> {
        let model = ReactionModel::<f64>::linear(self.lambda);
        let dt = self.t_end / n_steps as f64;
        let (mut u, mut w, mut w_prev, mut phi) = (self.u0, [0.0; 2], [0.0; 2], self.phi0);
        let singular = || Error::Sample("lumped problem: porosity update denominator not positive".into());
        for n in 0..n_steps {
            let t_new = (n + 1) as f64 * dt;
            let mut phi_star = [0.0; 2];
            for i in 0..2 {
                let (w_star, _) = extrapolate(w[i], w_prev[i]);
                phi_star[i] = predict(phi[i], self.eta, w_star, w[i]).ok_or_else(singular)?;
            }
            // φ*ᵢ uᵢ' - φᵢ uᵢ = dt (-K (uᵢ' - uⱼ') + sᵢ)
            let s = self.forcing(t_new);
            let k = dt * self.exchange;
            let a = [[phi_star[0] + k, -k], [-k, phi_star[1] + k]];
            let b = [phi[0] * u[0] + dt * s[0], phi[1] * u[1] + dt * s[1]];
            let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
            let mut half = [(b[0] * a[1][1] - a[0][1] * b[1]) / det, (a[0][0] * b[1] - a[1][0] * b[0]) / det];
            let mut w_half = [rescale(w[0], phi[0], phi_star[0]), rescale(w[1], phi[1], phi_star[1])];
            for i in 0..2 {
                let r = model.react_step(half[i].max(0.0), w_half[i], dt)?;
                (half[i], w_half[i]) = (r.u, r.w);
            }
            let mut phi_new = [0.0; 2];
            for i in 0..2 {
                phi_new[i] = predict(phi[i], self.eta, w_half[i], w[i]).ok_or_else(singular)?;
            }
            w_prev = w;
            for i in 0..2 {
                u[i] = rescale(half[i], phi_star[i], phi_new[i]);
                w[i] = rescale(w_half[i], phi_star[i], phi_new[i]);
            }
            phi = phi_new;
        }
        Ok([u[0], u[1], w[0], w[1], phi[0], phi[1]])
    }
}

/// Splitting error against an RK4 reference for step counts 20, 40, ..., 320.
pub fn splitting_order(problem: &LumpedProblem) -> Result<OrderStudy, Error> {
    let reference = problem.reference(20_000);
    let counts = [20usize, 40, 80, 160, 320];
    let mut errors = Vec::new();
    for &n in &counts {
        let y = problem.split(n)?;
        errors.push(y.iter().zip(&reference).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    let steps = counts.iter().map(|&n| problem.t_end / n as f64).collect();
    Ok(OrderStudy::new(steps, errors))
}

/// One oracle measurement against its closed-form value.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleCheck {
    pub name: &'static str,
    pub measured: f64,
    pub expected: f64,
}

impl OracleCheck {
    pub fn relative_error(&self) -> f64 {
        (self.measured - self.expected).abs() / self.expected.abs()
    }
}

/// Reference layer data: Q = 1, φ = 0.2, λ = 100, δ = 0.1, u_γ = 2.
pub fn reference_inputs() -> LayerInputs<f64> {
    LayerInputs { q: 1.0, phi: 0.2, lambda: 100.0, delta: 0.1, u_gamma: 2.0, t: 0.0 }
}

/// Linear steady and half-saturation thickness against the growth law.
pub fn linear_oracle(n_cells: usize) -> Result<Vec<OracleCheck>, Error> {
    let inputs = reference_inputs();
    let model = ReactionModel::linear(inputs.lambda);
    let t_bar = inputs.saturation_time();
    let steady_t = 4.0 * t_bar;
    let steady = oracle_1d(&model, &inputs, &OracleSettings::new(n_cells, steady_t))?;
    let half = t_bar / 2.0;
    let early = oracle_1d(&model, &inputs, &OracleSettings::new(n_cells, half))?;
    let last = |v: &[crate::layer::ThicknessSample<f64>]| v.last().map_or(0.0, |s| s.thickness);
    Ok(vec![
        OracleCheck {
            name: "linear steady",
            measured: last(&steady),
            expected: thickness_linear(&LayerInputs { t: steady_t, ..inputs }),
        },
        OracleCheck { name: "linear half saturation", measured: last(&early), expected: inputs.q * half / inputs.phi },
    ])
}

/// Steady thickness for `r(u) = u²` precipitation kinetics, plus the value
/// of the closed-form profile at the predicted thickness.
pub fn nonlinear_oracle(n_cells: usize, t_end: f64) -> Result<(OracleCheck, f64), Error> {
    let inputs = reference_inputs();
    let model = ReactionModel::precipitation(inputs.lambda, RateFn::Square);
    let expected = predicted_steady_thickness(&model, &inputs);
    let samples = oracle_1d(&model, &inputs, &OracleSettings::new(n_cells, t_end))?;
    let measured = samples.last().map_or(0.0, |s| s.thickness);
    let at_edge = profile_nonlinear_steady(&inputs, expected)?;
    Ok((OracleCheck { name: "nonlinear steady", measured, expected }, at_edge))
}
