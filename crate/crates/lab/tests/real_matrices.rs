//! Checks against the published matrix statistics. Matrices are read from
//! the cache directory only; absent ones are reported and skipped.

use warpell_core::matrix::matrix_stats;
use warpell_lab::fetch::{default_cache_dir, CATALOG};
use warpell_lab::mm::read_matrix_market_file;

#[test]
fn cached_matrices_match_catalog_statistics() {
    let dir = default_cache_dir();
    let mut checked = 0;
    for e in &CATALOG {
        let Some((_, file)) = e.source else { continue };
        let path = dir.join(format!("{file}.mtx"));
        if !path.is_file() {
            println!("{}: not cached at {}, skipped", e.name, path.display());
            continue;
        }
        let m = read_matrix_market_file(&path).unwrap();
        let s = matrix_stats(&m);
        assert_eq!(s.nrows, e.nrows, "{}", e.name);
        assert_eq!((s.minrow, s.maxrow), (e.minrow, e.maxrow), "{}", e.name);
        let rel = (s.nnz as f64 - e.nnz as f64).abs() / e.nnz as f64;
        assert!(rel < 0.01, "{}: nnz {} vs {}", e.name, s.nnz, e.nnz);
        checked += 1;
    }
    println!("{checked} cached matrices checked");
}
