//! Files, clocks and networks around `warpell-core`: Matrix Market IO, the
//! benchmark matrix cache, parameter sweeps, break-even measurements, CSV and
//! JSON reports, and the FEM demo driver behind the `warpell` binary.

pub mod alpha;
pub mod bench;
mod error;
pub mod fem_demo;
pub mod fetch;
pub mod mm;
pub mod report;

pub use error::{LabError, Result};
