use alloc::vec::Vec;

use super::TransactionReport;
use crate::{Error, Result};

/// Which array an access targets. Every array is segment-aligned at offset 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Space {
    MatrixValues,
    ColIndices,
    XVector,
    YVector,
    /// Per-warp bookkeeping, row maps, row pointers and COO row indices.
    Metadata,
}

impl Space {
    pub const COUNT: usize = 5;
    pub const ALL: [Space; Space::COUNT] = [
        Space::MatrixValues,
        Space::ColIndices,
        Space::XVector,
        Space::YVector,
        Space::Metadata,
    ];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        match self {
            Space::MatrixValues => "values",
            Space::ColIndices => "col_indices",
            Space::XVector => "x",
            Space::YVector => "y",
            Space::Metadata => "metadata",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AccessKind {
    Load,
    Store,
}

/// One lane's access in a warp step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MemAccess {
    pub space: Space,
    pub byte_address: u64,
    pub byte_width: u8,
    pub kind: AccessKind,
}

impl MemAccess {
    pub fn element(space: Space, kind: AccessKind, index: usize, width: usize) -> Self {
        Self {
            space,
            byte_address: (index * width) as u64,
            byte_width: width as u8,
            kind,
        }
    }
}

/// Number of distinct segments touched by one warp step.
///
/// All accesses must share the same kind and space.
pub fn trace_warp_step(accesses: &[MemAccess], segment_bytes: usize) -> Result<usize> {
    let Some(first) = accesses.first() else {
        return Ok(0);
    };
    if accesses
        .iter()
        .any(|a| a.kind != first.kind || a.space != first.space)
    {
        return Err(Error::MixedWarpStep);
    }
    let mut segments: Vec<u64> = accesses
        .iter()
        .flat_map(|a| {
            let lo = a.byte_address / segment_bytes as u64;
            let hi = (a.byte_address + a.byte_width.max(1) as u64 - 1) / segment_bytes as u64;
            lo..=hi
        })
        .collect();
    segments.sort_unstable();
    segments.dedup();
    Ok(segments.len())
}

/// Sink for the accesses a kernel performs.
///
/// Kernels are generic over the tracer; with [`NoTrace`] the instrumentation
/// compiles away.
pub trait Tracer {
    const ENABLED: bool;

    /// One lockstep iteration of one warp.
    fn warp_step(&mut self);

    /// The active lanes of the current step touch `elements` of `space`,
    /// each `width` bytes wide.
    fn access(&mut self, space: Space, kind: AccessKind, width: usize, elements: &[usize]);
}

/// Tracer that records nothing.
#[derive(Debug, Default, Clone, Copy)]
pub struct NoTrace;

impl Tracer for NoTrace {
    const ENABLED: bool = false;

    #[inline(always)]
    fn warp_step(&mut self) {}

    #[inline(always)]
    fn access(&mut self, _: Space, _: AccessKind, _: usize, _: &[usize]) {}
}

/// Counts segment transactions per space.
#[derive(Debug, Clone)]
pub struct TransactionTracer {
    report: TransactionReport,
    cache: IdealCache,
    scratch: Vec<u64>,
}

impl TransactionTracer {
    pub fn new(segment_bytes: usize, x_cache_lines: usize) -> Self {
        Self {
            report: TransactionReport::new(segment_bytes),
            cache: IdealCache::new(x_cache_lines),
            scratch: Vec::with_capacity(64),
        }
    }

    pub fn report(&self) -> &TransactionReport {
        &self.report
    }

    pub fn into_report(self) -> TransactionReport {
        self.report
    }
}

impl Tracer for TransactionTracer {
    const ENABLED: bool = true;

    fn warp_step(&mut self) {
        self.report.total_warp_steps += 1;
    }

    fn access(&mut self, space: Space, kind: AccessKind, width: usize, elements: &[usize]) {
        if elements.is_empty() {
            return;
        }
        let seg = self.report.segment_bytes as u64;
        self.scratch.clear();
        for &e in elements {
            let lo = (e * width) as u64;
            let hi = lo + width as u64 - 1;
            self.scratch.push(lo / seg);
            if hi / seg != lo / seg {
                self.scratch.push(hi / seg);
            }
        }
        self.scratch.sort_unstable();
        self.scratch.dedup();
        let slot = space.index();
        self.report.requested_bytes[slot] += (elements.len() * width) as u64;
        if space == Space::XVector && kind == AccessKind::Load && self.cache.enabled() {
            for &s in &self.scratch {
                if self.cache.touch(s) {
                    self.report.cache_hits += 1;
                } else {
                    self.report.transactions[slot] += 1;
                }
            }
        } else {
            self.report.transactions[slot] += self.scratch.len() as u64;
        }
    }
}

/// Fully associative LRU cache of segment lines.
#[derive(Debug, Clone)]
struct IdealCache {
    capacity: usize,
    lines: Vec<u64>,
}

impl IdealCache {
    fn new(capacity: usize) -> Self {
        Self {
            capacity,
            lines: Vec::with_capacity(capacity),
        }
    }

    fn enabled(&self) -> bool {
        self.capacity > 0
    }

    /// Returns true on a hit; inserts the line either way.
    fn touch(&mut self, line: u64) -> bool {
        if let Some(pos) = self.lines.iter().position(|&l| l == line) {
            let l = self.lines.remove(pos);
            self.lines.push(l);
            true
        } else {
            if self.lines.len() == self.capacity {
                self.lines.remove(0);
            }
            self.lines.push(line);
            false
        }
    }
}
