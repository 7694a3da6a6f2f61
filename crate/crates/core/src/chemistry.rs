//! Solute/precipitate kinetics and the explicit second-order reaction substep.
//!
//! The solute `u` turns into precipitate `w` at rate `r_w(u, w)`:
//!
//! ```text
//! du/dt = -r_w(u, w)      dw/dt = +r_w(u, w)
//! ```
//!
//! Two laws are provided. The linear law `r_w = λ u` consumes solute until it
//! is exhausted. The precipitation/dissolution law
//!
//! ```text
//! r_w = λ ( max(r(u) - 1, 0) + H(w) min(r(u) - 1, 0) )
//! ```
//!
//! drives `r(u)` towards the equilibrium value 1 and stops dissolving once no
//! precipitate is left. The reaction substep uses Heun's method, so the
//! species sum `u + w` is preserved exactly: both increments are the same
//! number with opposite sign.

use crate::error::ChemistryError;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Kinetics {
    Linear,
    Precipitation,
}

/// The activity function `r(u)` inside the precipitation law.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateFn {
    Identity,
    Square,
}

/// Switch on the dissolution branch.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Heaviside {
    /// `H(w) = 1` for `w > 0`, else 0.
    Step,
    /// `H(w) = max(w, 0)`.
    Ramp,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReactionModel<T> {
    pub kinetics: Kinetics,
    pub lambda: T,
    pub rate_fn: RateFn,
    pub heaviside: Heaviside,
}

/// Result of one reaction substep on a single cell.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Reacted<T> {
    pub u: T,
    pub w: T,
    /// A component went negative and was reset to zero.
    pub clamped: bool,
}

impl<T: Scalar> ReactionModel<T> {
    pub fn linear(lambda: T) -> Self {
        Self { kinetics: Kinetics::Linear, lambda, rate_fn: RateFn::Identity, heaviside: Heaviside::Step }
    }

    pub fn precipitation(lambda: T, rate_fn: RateFn) -> Self {
        Self { kinetics: Kinetics::Precipitation, lambda, rate_fn, heaviside: Heaviside::Step }
    }

    pub fn activity(&self, u: T) -> T {
        match self.rate_fn {
            RateFn::Identity => u,
            RateFn::Square => u * u,
        }
    }

    fn heaviside(&self, w: T) -> T {
        match self.heaviside {
            Heaviside::Step => {
                if w > T::zero() {
                    T::one()
                } else {
                    T::zero()
                }
            }
            Heaviside::Ramp => w.max(T::zero()),
        }
    }

    /// Reaction rate `r_w(u, w)`; positive values turn solute into precipitate.
    pub fn rate(&self, u: T, w: T) -> Result<T, ChemistryError> {
        if u < T::zero() || w < T::zero() || u.is_nan() || w.is_nan() {
            return Err(ChemistryError::NegativeConcentration {
                u: u.to_f64().unwrap_or(f64::NAN),
                w: w.to_f64().unwrap_or(f64::NAN),
            });
        }
        Ok(self.rate_unchecked(u, w))
    }

    fn rate_unchecked(&self, u: T, w: T) -> T {
        match self.kinetics {
            Kinetics::Linear => self.lambda * u,
            Kinetics::Precipitation => {
                let excess = self.activity(u) - T::one();
                self.lambda * (excess.max(T::zero()) + self.heaviside(w) * excess.min(T::zero()))
            }
        }
    }

    /// One Heun step of `du/dt = -r_w`, `dw/dt = +r_w`.
    ///
    /// The corrector slope is evaluated at the predictor clipped to the
    /// nonnegative quadrant. A negative final component is reset to zero and
    /// reported through [`Reacted::clamped`]; the clipped amount is not moved
    /// to the other species.
    pub fn react_step(&self, u: T, w: T, dt: T) -> Result<Reacted<T>, ChemistryError> {
        if !(dt > T::zero()) {
            return Err(ChemistryError::BadTimeStep(dt.to_f64().unwrap_or(f64::NAN)));
        }
        let r1 = self.rate(u, w)?;
        let u_pred = (u - dt * r1).max(T::zero());
        let w_pred = (w + dt * r1).max(T::zero());
        let r2 = self.rate_unchecked(u_pred, w_pred);
        let increment = dt * T::half() * (r1 + r2);
        let mut out = Reacted { u: u - increment, w: w + increment, clamped: false };
        if out.u < T::zero() {
            out.u = T::zero();
            out.clamped = true;
        }
        if out.w < T::zero() {
            out.w = T::zero();
            out.clamped = true;
        }
        Ok(out)
    }

    /// Applies [`react_step`](Self::react_step) cell by cell and returns the
    /// number of clamp events.
    pub fn react_field(&self, u: &mut [T], w: &mut [T], dt: T) -> Result<usize, ChemistryError> {
        debug_assert_eq!(u.len(), w.len());
        let mut clamps = 0;
        for (ui, wi) in u.iter_mut().zip(w.iter_mut()) {
            let r = self.react_step(*ui, *wi, dt)?;
            *ui = r.u;
            *wi = r.w;
            clamps += usize::from(r.clamped);
        }
        Ok(clamps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn linear_rate_is_lambda_u() {
        let m = ReactionModel::linear(100.0);
        assert_eq!(m.rate(2.0, 0.0).unwrap(), 200.0);
    }

    #[test]
    fn dissolution_blocked_without_precipitate() {
        let m = ReactionModel::<f64>::precipitation(100.0, RateFn::Square);
        assert_eq!(m.rate(0.5, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn dissolution_with_precipitate() {
        let m = ReactionModel::<f64>::precipitation(100.0, RateFn::Square);
        // 100 * min(0.25 - 1, 0)
        assert!((m.rate(0.5, 1.0).unwrap() + 75.0).abs() < 1e-12);
    }

    #[test]
    fn ramp_heaviside_scales_dissolution() {
        let mut m = ReactionModel::<f64>::precipitation(100.0, RateFn::Square);
        m.heaviside = Heaviside::Ramp;
        assert!((m.rate(0.5, 0.5).unwrap() + 37.5).abs() < 1e-12);
    }

    #[test]
    fn negative_input_rejected() {
        let m = ReactionModel::linear(1.0);
        assert!(matches!(m.rate(-1e-3, 0.0), Err(ChemistryError::NegativeConcentration { .. })));
        assert!(m.rate(1.0, -1.0).is_err());
    }

    #[test]
    fn heun_step_hand_value() {
        // slopes 1 and 0.9 averaged: 1 - 0.1 * 0.95
        let m = ReactionModel::<f64>::linear(1.0);
        let r = m.react_step(1.0, 0.0, 0.1).unwrap();
        assert!((r.u - 0.905).abs() < 1e-15);
        assert!((r.w - 0.095).abs() < 1e-15);
        assert!((r.u - (-0.1f64).exp()).abs() < 2e-4);
        assert!(!r.clamped);
    }

    #[test]
    fn zero_rate_constant_is_identity() {
        let m = ReactionModel::linear(0.0);
        let r = m.react_step(0.7, 0.3, 0.5).unwrap();
        assert_eq!((r.u, r.w), (0.7, 0.3));
    }

    #[test]
    fn equilibrium_is_fixed_point() {
        let m = ReactionModel::<f64>::precipitation(100.0, RateFn::Square);
        let r = m.react_step(1.0, 0.4, 0.01).unwrap();
        assert_eq!((r.u, r.w), (1.0, 0.4));
    }

    #[test]
    fn bad_time_step() {
        let m = ReactionModel::linear(1.0);
        assert!(m.react_step(1.0, 0.0, 0.0).is_err());
        assert!(m.react_step(1.0, 0.0, -1.0).is_err());
    }

    #[test]
    fn large_step_clamps_and_reports() {
        let m = ReactionModel::linear(100.0);
        // predictor overshoots far below zero
        let r = m.react_step(1.0, 0.0, 1.0).unwrap();
        assert!(r.clamped);
        assert!(r.u >= 0.0 && r.w >= 0.0);
    }

    #[test]
    fn works_in_single_precision() {
        let m = ReactionModel::<f32>::linear(1.0);
        let r = m.react_step(1.0, 0.0, 0.1).unwrap();
        assert!((r.u - 0.905).abs() < 1e-6);
    }

    #[test]
    fn field_counts_clamps() {
        let m = ReactionModel::linear(100.0);
        let mut u = vec![1.0, 0.0, 2.0];
        let mut w = vec![0.0; 3];
        let clamps = m.react_field(&mut u, &mut w, 1.0).unwrap();
        assert_eq!(clamps, 2);
    }

    /// Global error of Heun against exp(-t) at t = 1.
    fn heun_error(dt: f64) -> f64 {
        let m = ReactionModel::linear(1.0);
        let steps = (1.0 / dt).round() as usize;
        let (mut u, mut w) = (1.0, 0.0);
        for _ in 0..steps {
            let r = m.react_step(u, w, dt).unwrap();
            u = r.u;
            w = r.w;
        }
        (u - (-1.0f64).exp()).abs()
    }

    #[test]
    fn heun_is_second_order() {
        let dts = [0.1, 0.05, 0.025, 0.0125];
        let errs: Vec<f64> = dts.iter().map(|&dt| heun_error(dt)).collect();
        for pair in errs.windows(2) {
            let order = (pair[0] / pair[1]).log2();
            assert!(order >= 1.9, "observed order {order}");
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn species_sum_conserved(u in 0.0f64..3.0, w in 0.0f64..3.0, lambda in 0.0f64..50.0, dt in 1e-4f64..1e-2,
                                     square in any::<bool>(), linear in any::<bool>()) {
                let m = if linear {
                    ReactionModel::linear(lambda)
                } else {
                    ReactionModel::precipitation(lambda, if square { RateFn::Square } else { RateFn::Identity })
                };
                let r = m.react_step(u, w, dt).unwrap();
                prop_assert!(r.u >= 0.0 && r.w >= 0.0);
                if !r.clamped {
                    prop_assert!(((r.u + r.w) - (u + w)).abs() <= 1e-14 * (1.0 + u + w));
                }
            }

            #[test]
            fn precipitation_drives_towards_equilibrium(u in 0.0f64..3.0, w in 0.0f64..3.0, square in any::<bool>()) {
                let m = ReactionModel::precipitation(10.0, if square { RateFn::Square } else { RateFn::Identity });
                let r = m.rate(u, w).unwrap();
                if m.activity(u) >= 1.0 { prop_assert!(r >= 0.0); }
                if m.activity(u) <= 1.0 { prop_assert!(r <= 0.0); }
            }
        }
    }
}
