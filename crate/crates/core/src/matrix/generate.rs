//! Deterministic synthetic matrices standing in for the benchmark collection.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use rand::seq::index;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{SparseCoo, SparseCsr};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum SyntheticKind {
    /// 7-point finite-difference Laplacian on an `nx x ny x nz` grid
    /// (diagonal 6, off-diagonals -1, Dirichlet truncation).
    Laplacian3d { nx: usize, ny: usize, nz: usize },
    /// Symmetric, diagonally dominant node-adjacency pattern with every row
    /// length in `[minrow, maxrow]` and both bounds attained, shaped like a
    /// tetrahedral mesh graph.
    FemTetGraph {
        n: usize,
        minrow: usize,
        maxrow: usize,
    },
    /// Heavy-tailed row lengths `P(k) ~ k^-alpha` on `[1, maxrow]`; row 0
    /// always has exactly `maxrow` entries.
    PowerlawRows {
        nrows: usize,
        alpha: f64,
        maxrow: usize,
    },
    /// Symmetric circulant band: every row has exactly `2 * half_width + 1` entries.
    UniformBand { n: usize, half_width: usize },
    /// Exactly the given row lengths with random distinct columns.
    RowProfile { lengths: Vec<usize>, ncols: usize },
    /// Independent Bernoulli fill with the given density.
    Random {
        nrows: usize,
        ncols: usize,
        density: f64,
    },
}

pub fn generate_synthetic(kind: &SyntheticKind, seed: u64) -> Result<SparseCsr> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match *kind {
        SyntheticKind::Laplacian3d { nx, ny, nz } => laplacian3d(nx, ny, nz),
        SyntheticKind::FemTetGraph { n, minrow, maxrow } => {
            fem_tet_graph(n, minrow, maxrow, &mut rng)
        }
        SyntheticKind::PowerlawRows {
            nrows,
            alpha,
            maxrow,
        } => powerlaw_rows(nrows, alpha, maxrow, &mut rng),
        SyntheticKind::UniformBand { n, half_width } => uniform_band(n, half_width),
        SyntheticKind::RowProfile { ref lengths, ncols } => row_profile(lengths, ncols, &mut rng),
        SyntheticKind::Random {
            nrows,
            ncols,
            density,
        } => random(nrows, ncols, density, &mut rng),
    }
}

pub fn laplacian3d(nx: usize, ny: usize, nz: usize) -> Result<SparseCsr> {
    if nx == 0 || ny == 0 || nz == 0 {
        return Err(Error::InvalidParameter(format!(
            "laplacian3d needs positive dimensions, got {nx}x{ny}x{nz}"
        )));
    }
    let n = nx * ny * nz;
    let id = |x: usize, y: usize, z: usize| x + nx * (y + ny * z);
    let mut row_offsets = Vec::with_capacity(n + 1);
    let mut cols = Vec::with_capacity(7 * n);
    let mut vals = Vec::with_capacity(7 * n);
    row_offsets.push(0);
    for z in 0..nz {
        for y in 0..ny {
            for x in 0..nx {
                // ascending column order: z-1, y-1, x-1, self, x+1, y+1, z+1
                let mut push = |c: usize, v: f64| {
                    cols.push(c);
                    vals.push(v);
                };
                if z > 0 {
                    push(id(x, y, z - 1), -1.0);
                }
                if y > 0 {
                    push(id(x, y - 1, z), -1.0);
                }
                if x > 0 {
                    push(id(x - 1, y, z), -1.0);
                }
                push(id(x, y, z), 6.0);
                if x + 1 < nx {
                    push(id(x + 1, y, z), -1.0);
                }
                if y + 1 < ny {
                    push(id(x, y + 1, z), -1.0);
                }
                if z + 1 < nz {
                    push(id(x, y, z + 1), -1.0);
                }
                row_offsets.push(cols.len());
            }
        }
    }
    Ok(SparseCsr::from_parts_unchecked(n, n, row_offsets, cols, vals))
}

fn fem_tet_graph(n: usize, minrow: usize, maxrow: usize, rng: &mut ChaCha8Rng) -> Result<SparseCsr> {
    if minrow == 0 || minrow > maxrow || n < maxrow + 1 {
        return Err(Error::InvalidParameter(format!(
            "fem_tet_graph needs 1 <= minrow <= maxrow < n, got n={n} minrow={minrow} maxrow={maxrow}"
        )));
    }
    // off-diagonal degree bounds
    let lo = minrow - 1;
    let hi = maxrow - 1;
    // bell-shaped targets, mean a little under the midpoint like a tet mesh
    let targets: Vec<usize> = (0..n)
        .map(|_| lo + (0..hi - lo).filter(|_| rng.gen_bool(0.43)).count())
        .collect();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    let window = (3 * maxrow).min(n - 1).max(1);
    let link = |adj: &mut Vec<Vec<usize>>, a: usize, b: usize| {
        adj[a].push(b);
        adj[b].push(a);
    };
    let mut candidates: Vec<usize> = Vec::with_capacity(window);
    for i in 0..n {
        candidates.clear();
        candidates.extend((1..=window).map(|d| (i + d) % n));
        // Fisher-Yates on the local window keeps the graph mesh-like
        for k in (1..candidates.len()).rev() {
            let j = rng.gen_range(0..=k);
            candidates.swap(k, j);
        }
        for &j in &candidates {
            if adj[i].len() >= targets[i] {
                break;
            }
            if j != i && adj[j].len() < targets[j] && !adj[i].contains(&j) {
                link(&mut adj, i, j);
            }
        }
    }
    // lift any node still below the lower bound using nearby nodes with room
    for i in 0..n {
        let mut d = 1;
        while adj[i].len() < lo && d < n {
            for j in [(i + d) % n, (i + n - d % n) % n] {
                if adj[i].len() < lo && j != i && adj[j].len() < hi && !adj[i].contains(&j) {
                    link(&mut adj, i, j);
                }
            }
            d += 1;
        }
        if adj[i].len() < lo {
            return Err(Error::InvalidParameter(format!(
                "fem_tet_graph could not reach row length {minrow} for node {i}"
            )));
        }
    }
    attain_degree_bounds(&mut adj, lo, hi);
    let mut coo = SparseCoo::with_capacity(n, n, n * (hi + 1));
    let mut diag = vec![1.0; n];
    for i in 0..n {
        for &j in &adj[i] {
            if j > i {
                let w = -(0.1 + 0.9 * rng.gen::<f64>());
                coo.push(i, j, w)?;
                coo.push(j, i, w)?;
                diag[i] -= w;
                diag[j] -= w;
            }
        }
    }
    for (i, d) in diag.into_iter().enumerate() {
        coo.push(i, i, d)?;
    }
    Ok(coo.to_csr())
}

/// Grows node 0 to degree `hi` and trims a node far from it to degree `lo`,
/// never pushing another node outside `[lo, hi]`.
fn attain_degree_bounds(adj: &mut [Vec<usize>], lo: usize, hi: usize) {
    let n = adj.len();
    let mut d = 1;
    while adj[0].len() < hi && d < n {
        for j in [d, n - d] {
            if adj[0].len() < hi && j != 0 && adj[j].len() < hi && !adj[0].contains(&j) {
                adj[0].push(j);
                adj[j].push(0);
            }
        }
        d += 1;
    }
    if adj.iter().any(|a| a.len() == lo) {
        return;
    }
    for k in (n / 2..n).chain(1..n / 2) {
        let removable: Vec<usize> = adj[k]
            .iter()
            .copied()
            .filter(|&j| j != 0 && adj[j].len() > lo)
            .collect();
        if adj[k].len() - lo > removable.len() {
            continue;
        }
        for j in removable.into_iter().take(adj[k].len() - lo) {
            adj[k].retain(|&v| v != j);
            adj[j].retain(|&v| v != k);
        }
        return;
    }
}

fn powerlaw_rows(nrows: usize, alpha: f64, maxrow: usize, rng: &mut ChaCha8Rng) -> Result<SparseCsr> {
    if nrows == 0 || maxrow == 0 || alpha.is_nan() || alpha <= 0.0 {
        return Err(Error::InvalidParameter(format!(
            "powerlaw_rows needs nrows, maxrow > 0 and alpha > 0, got {nrows}, {maxrow}, {alpha}"
        )));
    }
    let mut cdf = Vec::with_capacity(maxrow);
    let mut acc = 0.0;
    for k in 1..=maxrow {
        acc += libm::pow(k as f64, -alpha);
        cdf.push(acc);
    }
    let lengths: Vec<usize> = (0..nrows)
        .map(|r| {
            if r == 0 {
                maxrow
            } else {
                let u = rng.gen::<f64>() * acc;
                cdf.partition_point(|&c| c < u) + 1
            }
        })
        .map(|k| k.min(maxrow))
        .collect();
    row_profile(&lengths, nrows.max(maxrow), rng)
}

fn uniform_band(n: usize, half_width: usize) -> Result<SparseCsr> {
    let len = 2 * half_width + 1;
    if len > n {
        return Err(Error::InvalidParameter(format!(
            "uniform_band row length {len} exceeds dimension {n}"
        )));
    }
    let mut coo = SparseCoo::with_capacity(n, n, n * len);
    for i in 0..n {
        let mut diag = 1.0;
        for d in 1..=half_width {
            let w = -1.0 / (1.0 + d as f64);
            coo.push(i, (i + d) % n, w)?;
            coo.push(i, (i + n - d) % n, w)?;
            diag -= 2.0 * w;
        }
        coo.push(i, i, diag)?;
    }
    Ok(coo.to_csr())
}

fn row_profile(lengths: &[usize], ncols: usize, rng: &mut ChaCha8Rng) -> Result<SparseCsr> {
    if let Some(&too_long) = lengths.iter().find(|&&l| l > ncols) {
        return Err(Error::InvalidParameter(format!(
            "row length {too_long} exceeds column count {ncols}"
        )));
    }
    let nnz = lengths.iter().sum();
    let mut row_offsets = Vec::with_capacity(lengths.len() + 1);
    let mut cols = Vec::with_capacity(nnz);
    let mut vals = Vec::with_capacity(nnz);
    row_offsets.push(0);
    for &len in lengths {
        let mut picked = index::sample(rng, ncols, len).into_vec();
        picked.sort_unstable();
        for c in picked {
            cols.push(c);
            vals.push(nonzero_value(rng));
        }
        row_offsets.push(cols.len());
    }
    Ok(SparseCsr::from_parts_unchecked(
        lengths.len(),
        ncols,
        row_offsets,
        cols,
        vals,
    ))
}

fn random(nrows: usize, ncols: usize, density: f64, rng: &mut ChaCha8Rng) -> Result<SparseCsr> {
    if !(0.0..=1.0).contains(&density) {
        return Err(Error::InvalidParameter(format!(
            "density must be in [0, 1], got {density}"
        )));
    }
    let mut row_offsets = Vec::with_capacity(nrows + 1);
    let mut cols = Vec::new();
    let mut vals = Vec::new();
    row_offsets.push(0);
    for _ in 0..nrows {
        for c in 0..ncols {
            if rng.gen_bool(density) {
                cols.push(c);
                vals.push(nonzero_value(rng));
            }
        }
        row_offsets.push(cols.len());
    }
    Ok(SparseCsr::from_parts_unchecked(nrows, ncols, row_offsets, cols, vals))
}

fn nonzero_value(rng: &mut ChaCha8Rng) -> f64 {
    let v: f64 = rng.gen_range(-1.0..1.0);
    if v == 0.0 {
        0.5
    } else {
        v
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::matrix_stats;

    #[test]
    fn laplacian_2x2x2() {
        let m = laplacian3d(2, 2, 2).unwrap();
        assert_eq!(m.nrows(), 8);
        for r in 0..8 {
            let (cols, vals) = m.row(r);
            assert_eq!(cols.len(), 4);
            for (&c, &v) in cols.iter().zip(vals) {
                assert_eq!(v, if c == r { 6.0 } else { -1.0 });
            }
        }
        assert_eq!(m, m.transpose());
    }

    #[test]
    fn fem_graph_respects_bounds() {
        let kind = SyntheticKind::FemTetGraph {
            n: 3129,
            minrow: 5,
            maxrow: 21,
        };
        let m = generate_synthetic(&kind, 1).unwrap();
        let s = matrix_stats(&m);
        assert_eq!((s.minrow, s.maxrow), (5, 21));
        assert!(m.is_pattern_symmetric());
        assert_eq!(m, m.transpose());
        assert_eq!(m, generate_synthetic(&kind, 1).unwrap());
    }

    #[test]
    fn fem_graph_attains_bounds_for_every_seed() {
        for (n, lo, hi) in [(4563, 6, 22), (28_639, 6, 24), (200, 3, 12)] {
            for seed in 0..4 {
                let kind = SyntheticKind::FemTetGraph { n, minrow: lo, maxrow: hi };
                let s = matrix_stats(&generate_synthetic(&kind, seed).unwrap());
                assert_eq!((s.minrow, s.maxrow), (lo, hi), "n={n} seed={seed}");
            }
        }
    }

    #[test]
    fn powerlaw_is_skewed() {
        let kind = SyntheticKind::PowerlawRows {
            nrows: 1000,
            alpha: 2.0,
            maxrow: 4700,
        };
        let s = matrix_stats(&generate_synthetic(&kind, 7).unwrap());
        assert_eq!(s.maxrow, 4700);
        assert!(s.maxrow as f64 / s.median_row() as f64 > 100.0);
    }

    #[test]
    fn uniform_band_rows_are_equal() {
        let m = uniform_band(100, 19).unwrap();
        let s = matrix_stats(&m);
        assert_eq!((s.minrow, s.maxrow), (39, 39));
        assert_eq!(m, m.transpose());
    }

    #[test]
    fn invalid_dimensions_error() {
        assert!(laplacian3d(0, 1, 1).is_err());
        assert!(uniform_band(5, 3).is_err());
        assert!(generate_synthetic(
            &SyntheticKind::FemTetGraph {
                n: 10,
                minrow: 5,
                maxrow: 21
            },
            0
        )
        .is_err());
    }
}
