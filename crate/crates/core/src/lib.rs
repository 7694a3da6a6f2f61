//! Reactive flow and transport in fractured porous media with thin
//! precipitation layers along the fracture.

pub mod chemistry;
pub mod cli;
pub mod config;
pub mod convergence;
pub mod error;
pub mod export;
pub mod flow;
pub mod layer;
pub mod linsolve;
pub mod mesh;
pub mod profile;
pub mod scalar;
pub mod scenario;
pub mod splitting;
pub mod transport;

pub use chemistry::{Heaviside, Kinetics, RateFn, ReactionModel};
pub use error::{ChemistryError, ConfigError, Error, LayerError, MeshError, SolveError, SplitError};
pub use scalar::Scalar;

pub type ReactionModelF64 = ReactionModel<f64>;
pub type ReactionModelF32 = ReactionModel<f32>;
pub type LayerInputsF64 = layer::LayerInputs<f64>;
