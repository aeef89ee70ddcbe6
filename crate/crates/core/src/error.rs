use std::fmt;

use thiserror::Error;

/// Location of an owned grid node, used in diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NodeId {
    pub chart: usize,
    pub i: isize,
    pub j: isize,
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "chart {} node ({}, {})", self.chart, self.i, self.j)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("point ({u}, {v}) lies outside the domain of chart {chart}")]
    OutsideDomain { chart: usize, u: f64, v: f64 },
    #[error("grid resolution {0} is below the minimum of 16")]
    ResolutionTooSmall(usize),
    #[error("halo node {0} has no donor chart with an interior stencil")]
    OrphanHalo(NodeId),
    #[error("derivative order {0} is not supported (maximum 4)")]
    UnsupportedOrder(usize),
    #[error("field halos are stale; exchange before differentiating")]
    StaleHalo,
    #[error("non-finite coefficient {value} at {node}")]
    Assembly { node: NodeId, value: f64 },
    #[error("height sup {sup} left the tubular neighbourhood of radius {limit}")]
    TubularExit { sup: f64, limit: f64 },
    #[error("resolvent near-singular at {node}: det(I - rho L) = {det:e}")]
    NearSingular { node: NodeId, det: f64 },
    #[error("degenerate metric at {node}: det = {det:e}")]
    DegenerateMetric { node: NodeId, det: f64 },
    #[error("slope factor {beta:e} below threshold at {node}")]
    SlopeBlowup { node: NodeId, beta: f64 },
    #[error("nonpositive principal symbol (min contraction {0:e})")]
    EllipticityLoss(f64),
    #[error("Krylov solver stalled: relative residual {residual:e} after {iterations} iterations")]
    SolverFailure { iterations: usize, residual: f64 },
    #[error("sparse factorization failed: {0}")]
    Factorization(String),
    #[error("shift |mu| = {norm} exceeds admissible radius {limit}")]
    InadmissibleShift { norm: f64, limit: f64 },
    #[error("time shift |lambda| = {value} exceeds admissible bound {limit}")]
    InadmissibleTimeShift { value: f64, limit: f64 },
    #[error("Newton inversion of the truncated translation stalled at ({u}, {v})")]
    InversionStall { u: f64, v: f64 },
    #[error("time {0} falls outside the stored trajectory")]
    TimeOutOfRange(f64),
    #[error("trajectory needs at least {needed} samples, has {have}")]
    InsufficientSamples { needed: usize, have: usize },
    #[error("least-squares fit is ill-conditioned (condition {0:e})")]
    IllConditioned(f64),
    #[error("config parse error: {0}")]
    ConfigParse(String),
    #[error("invalid config field `{field}`: {reason}")]
    ConfigValidation { field: String, reason: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
