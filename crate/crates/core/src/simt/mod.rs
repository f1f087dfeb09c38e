//! Lockstep warp configuration and the memory-segment transaction model.
//!
//! Kernels report, for every lockstep step of every warp, which elements of
//! which array their active lanes touch. A [`TransactionTracer`] turns those
//! into segment transactions: the number of distinct `segment_bytes`-aligned
//! segments touched by the step. Every array starts on a segment boundary.

mod config;
mod report;
mod trace;

pub use config::WarpModelConfig;
pub use report::{effective_bandwidth_proxy, TransactionReport};
pub use trace::{
    trace_warp_step, AccessKind, MemAccess, NoTrace, Space, Tracer, TransactionTracer,
};

/// Bytes per matrix value (double precision).
pub const VALUE_BYTES: usize = 8;
/// Bytes per stored column or row index.
pub const INDEX_BYTES: usize = 4;
