use crate::{Error, Result};

use super::Space;

/// Transaction counts gathered from one traced kernel invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TransactionReport {
    pub segment_bytes: usize,
    /// Segment transactions per [`Space`], indexed by [`Space::index`].
    pub transactions: [u64; Space::COUNT],
    /// Bytes the lanes asked for per space (before coalescing).
    pub requested_bytes: [u64; Space::COUNT],
    /// Matrix bytes charged to the kernel: 20 per stored nonzero.
    pub useful_bytes: u64,
    pub total_warp_steps: u64,
    /// x-vector segment loads served by the ideal cache.
    pub cache_hits: u64,
}

impl TransactionReport {
    pub fn new(segment_bytes: usize) -> Self {
        Self {
            segment_bytes,
            transactions: [0; Space::COUNT],
            requested_bytes: [0; Space::COUNT],
            useful_bytes: 0,
            total_warp_steps: 0,
            cache_hits: 0,
        }
    }

    pub fn transactions(&self, space: Space) -> u64 {
        self.transactions[space.index()]
    }

    pub fn total_transactions(&self) -> u64 {
        self.transactions.iter().sum()
    }

    /// Value and column-index transactions only.
    pub fn matrix_transactions(&self) -> u64 {
        self.transactions(Space::MatrixValues) + self.transactions(Space::ColIndices)
    }

    /// Fraction of the moved matrix-array bytes (values and column indices)
    /// that the lanes actually requested.
    pub fn matrix_utilization(&self) -> f64 {
        let moved = self.matrix_transactions() * self.segment_bytes as u64;
        if moved == 0 {
            return 0.0;
        }
        (self.requested_bytes[Space::MatrixValues.index()]
            + self.requested_bytes[Space::ColIndices.index()]) as f64
            / moved as f64
    }

    /// Adds another report's counts (same segment size) into this one.
    pub fn accumulate(&mut self, other: &TransactionReport) {
        for i in 0..Space::COUNT {
            self.transactions[i] += other.transactions[i];
            self.requested_bytes[i] += other.requested_bytes[i];
        }
        self.useful_bytes += other.useful_bytes;
        self.total_warp_steps += other.total_warp_steps;
        self.cache_hits += other.cache_hits;
    }
}

/// Useful matrix bytes per byte of memory traffic:
/// `useful_bytes / (total_transactions * segment_bytes)`.
pub fn effective_bandwidth_proxy(report: &TransactionReport) -> Result<f64> {
    let total = report.total_transactions();
    if total == 0 {
        return Err(Error::InvalidParameter(
            "effective bandwidth needs at least one transaction".into(),
        ));
    }
    Ok(report.useful_bytes as f64 / (total as f64 * report.segment_bytes as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scattered_loads_bound() {
        // one nonzero per transaction in each of values, indices and x
        let mut r = TransactionReport::new(128);
        r.useful_bytes = 20 * 100;
        r.transactions[Space::MatrixValues.index()] = 100;
        r.transactions[Space::ColIndices.index()] = 100;
        r.transactions[Space::XVector.index()] = 100;
        let u = effective_bandwidth_proxy(&r).unwrap();
        assert!(u <= 8.0 / 128.0, "{u}");
    }

    #[test]
    fn empty_report_is_an_error() {
        assert!(effective_bandwidth_proxy(&TransactionReport::new(128)).is_err());
    }
}
