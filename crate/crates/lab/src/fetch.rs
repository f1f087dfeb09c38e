//! Benchmark matrix catalog, download cache and synthetic stand-ins.

use std::fs;
use std::io::{Cursor, Read};
use std::path::{Path, PathBuf};

use flate2::read::GzDecoder;
use warpell_core::matrix::{generate_synthetic, SyntheticKind};
use warpell_core::SparseCsr;

use crate::error::{io_err, LabError, Result};
use crate::mm::read_matrix_market_file;

/// Environment variable overriding the default cache directory.
pub const CACHE_ENV: &str = "WARPELL_CACHE_DIR";

const COLLECTION_URL: &str = "https://sparse.tamu.edu/MM";

/// One benchmark matrix with its published statistics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CatalogEntry {
    pub name: &'static str,
    /// Collection group and matrix name; `None` for matrices only available
    /// as synthetic stand-ins.
    pub source: Option<(&'static str, &'static str)>,
    pub nnz: usize,
    pub nrows: usize,
    pub minrow: usize,
    pub maxrow: usize,
}

const fn entry(
    name: &'static str,
    source: Option<(&'static str, &'static str)>,
    nnz: usize,
    nrows: usize,
    minrow: usize,
    maxrow: usize,
) -> CatalogEntry {
    CatalogEntry {
        name,
        source,
        nnz,
        nrows,
        minrow,
        maxrow,
    }
}

pub const CATALOG: [CatalogEntry; 15] = [
    entry("Circuit", Some(("Hamm", "scircuit")), 958_936, 170_998, 1, 353),
    entry("Economics", Some(("Williams", "mac_econ_fwd500")), 1_273_389, 206_500, 1, 44),
    entry("Epidemiology", Some(("Williams", "mc2depi")), 2_100_225, 525_825, 2, 4),
    entry("FEMAccelerator", Some(("Williams", "cop20k_A")), 2_624_331, 121_192, 8, 81),
    entry("FEMCantilever", Some(("Williams", "cant")), 4_007_383, 62_451, 1, 78),
    entry("FEMHarbor", Some(("Bova", "rma10")), 2_374_001, 46_835, 4, 145),
    entry("FEMShip", Some(("DNVS", "shipsec1")), 7_813_404, 140_874, 24, 102),
    entry("FEMSpheres", Some(("Williams", "consph")), 6_010_480, 83_334, 1, 81),
    entry("Heart3K", None, 37_035, 3_129, 5, 21),
    entry("Heart5K", None, 52_715, 4_563, 6, 22),
    entry("Heart30K", None, 367_443, 28_639, 6, 24),
    entry("Protein", Some(("Williams", "pdb1HYS")), 4_344_765, 36_417, 18, 204),
    entry("QCD", Some(("QCD", "conf5_4-8x8-05")), 1_916_928, 49_152, 39, 39),
    entry("Webbase", Some(("Williams", "webbase-1M")), 3_105_536, 1_000_005, 1, 4700),
    entry("WindTunnel", Some(("Boeing", "pwtk")), 11_634_424, 217_918, 2, 180),
];

pub fn catalog_entry(name: &str) -> Option<&'static CatalogEntry> {
    CATALOG.iter().find(|e| e.name.eq_ignore_ascii_case(name))
}

fn known_names() -> String {
    let mut names: Vec<&str> = CATALOG.iter().map(|e| e.name).collect();
    names.push("synthetic:<kind>[:args]");
    names.join(", ")
}

/// Byte source for downloads; tests inject stubs.
pub trait Transport {
    fn get(&self, url: &str) -> Result<Vec<u8>>;
}

/// HTTPS transport.
#[derive(Debug, Default, Clone, Copy)]
pub struct HttpTransport;

impl Transport for HttpTransport {
    fn get(&self, url: &str) -> Result<Vec<u8>> {
        let net = |message: String| LabError::Network {
            url: url.to_string(),
            message,
        };
        let response = ureq::get(url).call().map_err(|e| net(e.to_string()))?;
        let mut body = Vec::new();
        response
            .into_reader()
            .read_to_end(&mut body)
            .map_err(|e| net(e.to_string()))?;
        Ok(body)
    }
}

/// `$WARPELL_CACHE_DIR`, else `$HOME/.cache/warpell`, else `./.warpell-cache`.
pub fn default_cache_dir() -> PathBuf {
    if let Some(dir) = std::env::var_os(CACHE_ENV) {
        return PathBuf::from(dir);
    }
    match std::env::var_os("HOME") {
        Some(home) => PathBuf::from(home).join(".cache").join("warpell"),
        None => PathBuf::from(".warpell-cache"),
    }
}

/// Path of a catalog matrix in the cache, downloading and unpacking it on
/// a miss. The parsed row count is checked against the catalog.
pub fn fetch_matrix(name: &str, cache_dir: &Path, transport: &dyn Transport) -> Result<PathBuf> {
    let entry = catalog_entry(name).ok_or_else(|| LabError::UnknownMatrix {
        name: name.to_string(),
        known: known_names(),
    })?;
    let Some((group, file)) = entry.source else {
        return Err(LabError::UnknownMatrix {
            name: format!("{name} (no public download; use synthetic:{})", name.to_ascii_lowercase()),
            known: known_names(),
        });
    };
    let target = cache_dir.join(format!("{file}.mtx"));
    if target.is_file() {
        return Ok(target);
    }
    fs::create_dir_all(cache_dir).map_err(io_err(cache_dir))?;
    let url = format!("{COLLECTION_URL}/{group}/{file}.tar.gz");
    let bytes = transport.get(&url)?;
    let wanted = format!("{file}.mtx");
    let mut archive = tar::Archive::new(GzDecoder::new(Cursor::new(bytes)));
    let partial = cache_dir.join(format!("{file}.mtx.partial"));
    let mut found = false;
    for item in archive.entries().map_err(io_err(&url))? {
        let mut item = item.map_err(io_err(&url))?;
        let path = item.path().map_err(io_err(&url))?.into_owned();
        if path.file_name().is_some_and(|n| n == wanted.as_str()) {
            let mut out = fs::File::create(&partial).map_err(io_err(&partial))?;
            std::io::copy(&mut item, &mut out).map_err(io_err(&partial))?;
            found = true;
            break;
        }
    }
    if !found {
        return Err(LabError::MissingArchiveEntry(wanted));
    }
    let m = read_matrix_market_file(&partial)?;
    if m.nrows() != entry.nrows {
        let _ = fs::remove_file(&partial);
        return Err(LabError::Mismatch {
            name: entry.name.to_string(),
            expected: format!("{} rows", entry.nrows),
            found: format!("{} rows", m.nrows()),
        });
    }
    fs::rename(&partial, &target).map_err(io_err(&target))?;
    Ok(target)
}

/// Generator for a `synthetic:` name.
///
/// Recognized forms: `heart3k`, `heart5k`, `heart30k`, `laplacian:<n>`,
/// `powerlaw:<rows>[:<maxrow>]`, `band:<n>:<half_width>`,
/// `random:<rows>:<cols>:<density>`.
pub fn synthetic_kind(spec: &str) -> Result<SyntheticKind> {
    let bad = || LabError::UnknownMatrix {
        name: format!("synthetic:{spec}"),
        known: "synthetic:heart3k, heart5k, heart30k, laplacian:<n>, powerlaw:<rows>[:<maxrow>], band:<n>:<hw>, random:<rows>:<cols>:<density>".into(),
    };
    let parts: Vec<&str> = spec.split(':').collect();
    let num = |i: usize| -> Result<usize> { parts.get(i).and_then(|s| s.parse().ok()).ok_or_else(bad) };
    let heart = |n, minrow, maxrow| SyntheticKind::FemTetGraph { n, minrow, maxrow };
    Ok(match parts[0].to_ascii_lowercase().as_str() {
        "heart3k" => heart(3_129, 5, 21),
        "heart5k" => heart(4_563, 6, 22),
        "heart30k" => heart(28_639, 6, 24),
        "laplacian" => {
            let n = num(1)?;
            SyntheticKind::Laplacian3d { nx: n, ny: n, nz: n }
        }
        "powerlaw" => {
            let nrows = num(1)?;
            let maxrow = if parts.len() > 2 { num(2)? } else { (nrows / 10).clamp(1, 4700) };
            SyntheticKind::PowerlawRows {
                nrows,
                alpha: 2.0,
                maxrow,
            }
        }
        "band" => SyntheticKind::UniformBand {
            n: num(1)?,
            half_width: num(2)?,
        },
        "random" => SyntheticKind::Random {
            nrows: num(1)?,
            ncols: num(2)?,
            density: parts.get(3).and_then(|s| s.parse().ok()).ok_or_else(bad)?,
        },
        _ => return Err(bad()),
    })
}

/// Resolves a matrix argument: `synthetic:<spec>`, an existing file, or a
/// catalog name (fetched into `cache_dir`). Catalog names without a public
/// download resolve to their synthetic stand-in.
pub fn load_matrix(
    spec: &str,
    cache_dir: &Path,
    transport: &dyn Transport,
    seed: u64,
) -> Result<SparseCsr> {
    if let Some(rest) = spec.strip_prefix("synthetic:") {
        return Ok(generate_synthetic(&synthetic_kind(rest)?, seed)?);
    }
    let path = Path::new(spec);
    if path.is_file() {
        return read_matrix_market_file(path);
    }
    if let Some(e) = catalog_entry(spec) {
        if e.source.is_none() {
            return Ok(generate_synthetic(&synthetic_kind(&e.name.to_ascii_lowercase())?, seed)?);
        }
    }
    read_matrix_market_file(&fetch_matrix(spec, cache_dir, transport)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::cell::Cell;

    struct Refuse;

    impl Transport for Refuse {
        fn get(&self, url: &str) -> Result<Vec<u8>> {
            panic!("unexpected network access to {url}");
        }
    }

    /// Serves one tarball and counts requests.
    struct Stub {
        body: Vec<u8>,
        calls: Cell<usize>,
    }

    impl Transport for Stub {
        fn get(&self, _: &str) -> Result<Vec<u8>> {
            self.calls.set(self.calls.get() + 1);
            Ok(self.body.clone())
        }
    }

    fn tarball(inner: &str, text: &str) -> Vec<u8> {
        let mut builder = tar::Builder::new(flate2::write::GzEncoder::new(
            Vec::new(),
            flate2::Compression::fast(),
        ));
        let mut header = tar::Header::new_gnu();
        header.set_size(text.len() as u64);
        header.set_mode(0o644);
        header.set_cksum();
        builder.append_data(&mut header, inner, text.as_bytes()).unwrap();
        builder.into_inner().unwrap().finish().unwrap()
    }

    fn qcd_like_text(nrows: usize) -> String {
        let mut s = format!("%%MatrixMarket matrix coordinate real general\n{nrows} {nrows} {nrows}\n");
        for i in 1..=nrows {
            s.push_str(&format!("{i} {i} 1.0\n"));
        }
        s
    }

    #[test]
    fn cached_file_needs_no_network() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("scircuit.mtx"), "x").unwrap();
        let p = fetch_matrix("circuit", dir.path(), &Refuse).unwrap();
        assert_eq!(p, dir.path().join("scircuit.mtx"));
    }

    #[test]
    fn download_extracts_and_caches() {
        let dir = tempfile::tempdir().unwrap();
        let stub = Stub {
            body: tarball("conf5_4-8x8-05/conf5_4-8x8-05.mtx", &qcd_like_text(49_152)),
            calls: Cell::new(0),
        };
        let p = fetch_matrix("QCD", dir.path(), &stub).unwrap();
        assert!(p.is_file());
        fetch_matrix("QCD", dir.path(), &stub).unwrap();
        assert_eq!(stub.calls.get(), 1);
    }

    #[test]
    fn wrong_dimensions_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let stub = Stub {
            body: tarball("conf5_4-8x8-05/conf5_4-8x8-05.mtx", &qcd_like_text(10)),
            calls: Cell::new(0),
        };
        assert!(matches!(
            fetch_matrix("QCD", dir.path(), &stub),
            Err(LabError::Mismatch { .. })
        ));
        assert!(!dir.path().join("conf5_4-8x8-05.mtx").exists());
    }

    #[test]
    fn unknown_name_lists_catalog() {
        let dir = tempfile::tempdir().unwrap();
        let e = fetch_matrix("nope", dir.path(), &Refuse).unwrap_err().to_string();
        assert!(e.contains("Webbase") && e.contains("synthetic:"), "{e}");
    }

    #[test]
    fn synthetic_dispatch() {
        let dir = tempfile::tempdir().unwrap();
        let m = load_matrix("synthetic:heart3k", dir.path(), &Refuse, 1).unwrap();
        assert_eq!((m.nrows(), m.min_row_len(), m.max_row_len()), (3129, 5, 21));
        let m = load_matrix("Heart3K", dir.path(), &Refuse, 1).unwrap();
        assert_eq!(m.nrows(), 3129);
        let m = load_matrix("synthetic:laplacian:3", dir.path(), &Refuse, 0).unwrap();
        assert_eq!(m.nrows(), 27);
        assert!(load_matrix("synthetic:bogus", dir.path(), &Refuse, 0).is_err());
    }
}
