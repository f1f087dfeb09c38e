use alloc::format;

use crate::{Error, Result};

/// Parameters of the emulated SIMT machine.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WarpModelConfig {
    /// Lanes per warp; a power of two.
    pub warp_size: usize,
    /// Threads per block; a multiple of `warp_size`. Recorded for sweeps, it
    /// does not change the per-warp transaction counts.
    pub block_size: usize,
    /// Memory segment (transaction) size in bytes.
    pub segment_bytes: usize,
    /// Round every warp's start offset in the warp layouts up to a segment
    /// boundary of both the value and the index array.
    pub align_warp_offsets: bool,
    /// Lines of the optional ideal (fully associative, LRU) cache for
    /// x-vector loads; 0 disables it.
    pub x_cache_lines: usize,
}

impl Default for WarpModelConfig {
    fn default() -> Self {
        Self {
            warp_size: 32,
            block_size: 128,
            segment_bytes: 128,
            align_warp_offsets: false,
            x_cache_lines: 0,
        }
    }
}

impl WarpModelConfig {
    pub fn with_warp_size(warp_size: usize) -> Self {
        Self {
            warp_size,
            block_size: warp_size.max(128),
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.warp_size == 0 || !self.warp_size.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "warp_size must be a power of two, got {}",
                self.warp_size
            )));
        }
        if self.block_size < self.warp_size || !self.block_size.is_multiple_of(self.warp_size) {
            return Err(Error::InvalidParameter(format!(
                "block_size {} must be a positive multiple of warp_size {}",
                self.block_size, self.warp_size
            )));
        }
        if self.segment_bytes == 0 || !self.segment_bytes.is_multiple_of(8) {
            return Err(Error::InvalidParameter(format!(
                "segment_bytes must be a positive multiple of 8, got {}",
                self.segment_bytes
            )));
        }
        Ok(())
    }

    /// Slot granularity of warp offsets when alignment is on: both the
    /// 8-byte value array and the 4-byte index array start on a segment.
    pub(crate) fn offset_alignment(&self) -> usize {
        if self.align_warp_offsets {
            (self.segment_bytes / super::INDEX_BYTES).max(1)
        } else {
            1
        }
    }
}
