use alloc::string::String;
use core::fmt::Write;

use super::{WarpLayoutK1, WarpLayoutK2};

/// One line per warp: `warp <w> offset <o> maxrows <h> reduction 1 rows <first>..<end>`.
pub fn dump_k1(l: &WarpLayoutK1) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "k1 nrows {} ncols {} warp_size {} warps {}",
        l.nrows,
        l.ncols,
        l.warp_size,
        l.nwarps()
    );
    for w in 0..l.nwarps() {
        let first = w * l.warp_size;
        let end = (first + l.warp_size).min(l.nrows);
        let _ = writeln!(
            out,
            "warp {w} offset {} maxrows {} reduction 1 rows {first}..{end}",
            l.warp_offset[w], l.maxrows[w]
        );
    }
    out
}

pub fn dump_k2(l: &WarpLayoutK2) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "k2 nrows {} ncols {} warp_size {} threshold {} warps {}",
        l.nrows,
        l.ncols,
        l.warp_size,
        l.threshold,
        l.nwarps()
    );
    for w in 0..l.nwarps() {
        let first = l.rows_offset_warp[w];
        let _ = writeln!(
            out,
            "warp {w} offset {} maxrows {} reduction {} rows {first}..{}",
            l.warp_offset[w],
            l.maxrows[w],
            l.reduction[w],
            first + l.rows_in_warp[w]
        );
    }
    out
}
