//! Command-line front end: configuration, orchestration and file output.

pub mod commands;
pub mod config;
pub mod output;

pub use commands::{cmd_energy, cmd_probe, cmd_run, EnergySummary, ProbeSummary, RunReport};
pub use config::{parse_config, RunConfig};

use crate::error::Error;
use crate::flow::FlowEventKind;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_INADMISSIBLE: i32 = 2;
pub const EXIT_SOLVER: i32 = 3;
pub const EXIT_IO: i32 = 4;

pub fn exit_code_for_event(kind: FlowEventKind) -> i32 {
    match kind {
        FlowEventKind::ReachedTEnd | FlowEventKind::Equilibrium => EXIT_OK,
        FlowEventKind::TubularExit | FlowEventKind::DegenerateMetric => EXIT_INADMISSIBLE,
        FlowEventKind::SolverFailure | FlowEventKind::DtUnderflow => EXIT_SOLVER,
    }
}

pub fn exit_code_for_error(e: &Error) -> i32 {
    match e {
        Error::Io(_) | Error::Json(_) => EXIT_IO,
        Error::TubularExit { .. }
        | Error::NearSingular { .. }
        | Error::DegenerateMetric { .. }
        | Error::SlopeBlowup { .. }
        | Error::EllipticityLoss(_) => EXIT_INADMISSIBLE,
        Error::SolverFailure { .. } | Error::Factorization(_) | Error::IllConditioned(_) | Error::InversionStall { .. } => {
            EXIT_SOLVER
        }
        _ => EXIT_CONFIG,
    }
}
