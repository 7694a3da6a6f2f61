use std::path::PathBuf;

use thiserror::Error;

/// Errors raised by mesh construction and mesh file parsing.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeshError {
    #[error("fracture endpoint coordinate {value} ({axis}) is not on the lattice of spacing 1/{n}")]
    OffLattice { axis: char, value: f64, n: usize },
    #[error("fracture from ({x0}, {y0}) to ({x1}, {y1}) is not parallel to (1,1)")]
    OffDiagonal { x0: f64, y0: f64, x1: f64, y1: f64 },
    #[error("fracture endpoint ({x}, {y}) lies outside the unit square")]
    OutsideDomain { x: f64, y: f64 },
    #[error("n_per_unit must be positive")]
    EmptyLattice,
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("{entity} {id} references missing node {node}")]
    DanglingNode { entity: &'static str, id: usize, node: usize },
    #[error("cell {id} has zero or negative area {area:e}")]
    DegenerateCell { id: usize, area: f64 },
    #[error("slit face {face} ({side}) has no geometrically coincident partner on the other side")]
    UnpairedSlitFace { face: usize, side: &'static str },
    #[error("face ({n0}, {n1}) is shared by more than two cells")]
    NonManifoldFace { n0: usize, n1: usize },
    #[error("boundary face ({n0}, {n1}) tagged in the file is not a boundary face of the mesh")]
    UnknownBoundaryFace { n0: usize, n1: usize },
    #[error("fracture faces do not form a single non-self-intersecting polyline: {0}")]
    BadFracture(String),
}

/// Errors raised while assembling or solving a linear system.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolveError {
    #[error("no pressure (Dirichlet) condition anywhere: the flow problem is singular up to a constant")]
    MissingPressureCondition,
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("linear solve residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },
    #[error("nonpositive {what} {value:e} at {subdomain} entity {index}")]
    NonPositive { what: &'static str, subdomain: &'static str, index: usize, value: f64 },
    #[error("time step must be positive, got {0:e}")]
    BadTimeStep(f64),
    #[error("field `{field}` has length {got}, mesh expects {expected}")]
    Mismatch { field: &'static str, expected: usize, got: usize },
    #[error("{0}")]
    Singular(String),
}

/// Errors from the pointwise kinetics.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ChemistryError {
    #[error("negative concentration passed to the rate law: u = {u:e}, w = {w:e}")]
    NegativeConcentration { u: f64, w: f64 },
    #[error("time step must be positive, got {0:e}")]
    BadTimeStep(f64),
}

/// Errors from the layer-thickness models and the 1D oracle.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum LayerError {
    #[error("nonpositive denominator in steady profile at s = {s:e}")]
    NegativeDistance { s: f64 },
    #[error("oracle needs positive outward velocity, got Q = {0:e}")]
    NoOutflow(f64),
    #[error("cutoff front reached the end of the oracle domain (length {length:e}) at t = {t:e}")]
    DomainTooShort { length: f64, t: f64 },
    #[error("oracle needs at least one cell")]
    NoCells,
    #[error(transparent)]
    Chemistry(#[from] ChemistryError),
}

/// Errors raised while parsing a scenario configuration. All problems are collected.
#[derive(Debug, Error, Clone, PartialEq)]
#[error("invalid configuration:\n  {}", .problems.join("\n  "))]
pub struct ConfigError {
    pub problems: Vec<String>,
}

/// Errors from one step of the splitting loop, tagged with the step where they happened.
#[derive(Debug, Error)]
pub enum SplitError {
    #[error("step {step} ({what}): nonpositive denominator {value:e} at {subdomain} entity {index}")]
    Geometry { step: u8, what: &'static str, subdomain: &'static str, index: usize, value: f64 },
    #[error("step {step} (flow): {source}")]
    Flow { step: u8, source: SolveError },
    #[error("step {step} (transport): {source}")]
    Transport { step: u8, source: SolveError },
    #[error("step {step} (reaction): {source}")]
    Reaction { step: u8, source: ChemistryError },
    #[error("time index {index}: {source}")]
    AtTime { index: usize, source: Box<SplitError> },
    #[error("{0}")]
    Setup(String),
}

/// Top-level error used by the scenario driver and the command line.
#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Mesh(#[from] MeshError),
    #[error(transparent)]
    Solve(#[from] SolveError),
    #[error(transparent)]
    Chemistry(#[from] ChemistryError),
    #[error(transparent)]
    Layer(#[from] LayerError),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Split(#[from] SplitError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("{0}")]
    Sample(String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io { path: path.into(), source }
    }
}
