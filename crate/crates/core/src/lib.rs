//! Compile continuous piecewise-linear functions on `[0, 1]` into explicit
//! ReLU networks and verify them exactly.

pub mod approx;
pub mod compiler;
pub mod cpwl;
pub mod error;
pub mod io;
pub mod network;
pub mod plot;
pub mod riesz;

pub use compiler::CompileReport;
pub use cpwl::Cpwl;
pub use error::{Error, Result};
pub use network::{AffineLayer, Network, ReluNetwork, SpecialNetwork};
pub use riesz::Kind;
