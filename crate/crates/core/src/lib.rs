//! Willmore flow of surfaces written as normal graphs over a closed reference
//! surface, discretized on overset chart grids.

pub mod cli;
pub mod curvature;
pub mod cutoff;
pub mod energy;
pub mod error;
pub mod flow;
pub mod grid;
pub mod krylov;
pub mod operator;
pub mod par;
pub mod sparse;
pub mod surface;
pub mod tensor;
pub mod translation;

pub use error::{Error, Result};
