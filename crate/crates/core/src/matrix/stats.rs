use alloc::collections::BTreeMap;

use super::SparseCsr;

/// Bytes charged per stored nonzero: an 8-byte value, a 4-byte column index
/// and the amortized row pointer share.
pub const BYTES_PER_NONZERO: u64 = 20;

/// Row-length statistics of a matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixStats {
    pub nnz: usize,
    pub nrows: usize,
    pub ncols: usize,
    pub bytes: u64,
    pub minrow: usize,
    pub maxrow: usize,
    pub mean_nnz_per_row: f64,
    /// Row length -> number of rows with that length.
    pub histogram: BTreeMap<usize, usize>,
}

impl MatrixStats {
    /// Median row length (lower median).
    pub fn median_row(&self) -> usize {
        if self.nrows == 0 {
            return 0;
        }
        let target = (self.nrows - 1) / 2;
        let mut seen = 0;
        for (&len, &count) in &self.histogram {
            seen += count;
            if seen > target {
                return len;
            }
        }
        self.maxrow
    }
}

pub fn matrix_stats(m: &SparseCsr) -> MatrixStats {
    let mut histogram = BTreeMap::new();
    for len in m.row_lengths() {
        *histogram.entry(len).or_insert(0usize) += 1;
    }
    let nnz = m.nnz();
    MatrixStats {
        nnz,
        nrows: m.nrows(),
        ncols: m.ncols(),
        bytes: nnz as u64 * BYTES_PER_NONZERO,
        minrow: m.min_row_len(),
        maxrow: m.max_row_len(),
        mean_nnz_per_row: if m.nrows() == 0 {
            0.0
        } else {
            nnz as f64 / m.nrows() as f64
        },
        histogram,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_stats() {
        let s = matrix_stats(&SparseCsr::identity(3));
        assert_eq!(s.nnz, 3);
        assert_eq!((s.minrow, s.maxrow), (1, 1));
        assert_eq!(s.histogram.into_iter().collect::<Vec<_>>(), vec![(1, 3)]);
        assert_eq!(s.bytes, 60);
    }

    #[test]
    fn histogram_mass_equals_nnz() {
        let m = SparseCsr::new(4, 4, vec![0, 0, 3, 4, 6], vec![0, 1, 2, 3, 0, 1], vec![1.0; 6])
            .unwrap();
        let s = matrix_stats(&m);
        let mass: usize = s.histogram.iter().map(|(l, c)| l * c).sum();
        assert_eq!(mass, s.nnz);
        assert_eq!((s.minrow, s.maxrow), (0, 3));
        assert!(s.minrow as f64 <= s.mean_nnz_per_row && s.mean_nnz_per_row <= s.maxrow as f64);
    }

    #[test]
    fn circuit_byte_accounting() {
        // 958,936 nonzeros at 20 bytes each
        assert_eq!(958_936 * BYTES_PER_NONZERO, 19_178_720);
    }
}
