//! Matrix Market coordinate files (`real`, `integer` or `pattern`;
//! `general`, `symmetric` or `skew-symmetric`), optionally gzip-compressed.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use flate2::read::GzDecoder;
use warpell_core::{SparseCoo, SparseCsr};

use crate::error::{io_err, LabError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Field {
    Real,
    Integer,
    Pattern,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Symmetry {
    General,
    Symmetric,
    Skew,
}

fn parse_err(line: usize, message: impl Into<String>) -> LabError {
    LabError::Parse {
        line,
        message: message.into(),
    }
}

/// Parses a Matrix Market stream into canonical CSR. Symmetric storage is
/// expanded; duplicate entries are summed.
pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<SparseCsr> {
    let mut lines = reader.lines().enumerate().map(|(i, l)| (i + 1, l));
    let (_, header) = lines
        .next()
        .ok_or_else(|| parse_err(1, "empty file"))?;
    let header = header.map_err(|e| parse_err(1, e.to_string()))?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, format!("not a Matrix Market header: '{header}'")));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported layout '{}'", tokens[2])));
    }
    let field = match tokens[3].as_str() {
        "real" | "double" => Field::Real,
        "integer" => Field::Integer,
        "pattern" => Field::Pattern,
        other => return Err(parse_err(1, format!("unsupported field '{other}'"))),
    };
    let symmetry = match tokens[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        "skew-symmetric" => Symmetry::Skew,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut coo = SparseCoo::new(0, 0);
    let mut seen = 0usize;
    for (lineno, line) in lines {
        let line = line.map_err(|e| parse_err(lineno, e.to_string()))?;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let mut parts = t.split_whitespace();
        let mut next_usize = |what: &str| -> Result<usize> {
            let s = parts
                .next()
                .ok_or_else(|| parse_err(lineno, format!("missing {what}")))?;
            s.parse::<usize>()
                .map_err(|_| parse_err(lineno, format!("bad {what} '{s}'")))
        };
        match size {
            None => {
                let nrows = next_usize("row count")?;
                let ncols = next_usize("column count")?;
                let nnz = next_usize("entry count")?;
                size = Some((nrows, ncols, nnz));
                let cap = if symmetry == Symmetry::General { nnz } else { 2 * nnz };
                coo = SparseCoo::with_capacity(nrows, ncols, cap);
            }
            Some((nrows, ncols, nnz)) => {
                if seen == nnz {
                    return Err(parse_err(lineno, format!("more than the declared {nnz} entries")));
                }
                let i = next_usize("row index")?;
                let j = next_usize("column index")?;
                if i == 0 || j == 0 || i > nrows || j > ncols {
                    return Err(parse_err(
                        lineno,
                        format!("entry ({i}, {j}) outside {nrows}x{ncols}"),
                    ));
                }
                let v = match field {
                    Field::Pattern => 1.0,
                    Field::Real | Field::Integer => {
                        let s = parts
                            .next()
                            .ok_or_else(|| parse_err(lineno, "missing value"))?;
                        s.parse::<f64>()
                            .map_err(|_| parse_err(lineno, format!("bad value '{s}'")))?
                    }
                };
                let (r, c) = (i - 1, j - 1);
                coo.push(r, c, v)?;
                if r != c {
                    match symmetry {
                        Symmetry::General => {}
                        Symmetry::Symmetric => coo.push(c, r, v)?,
                        Symmetry::Skew => coo.push(c, r, -v)?,
                    }
                }
                seen += 1;
            }
        }
    }
    let Some((_, _, nnz)) = size else {
        return Err(parse_err(1, "missing size line"));
    };
    if seen != nnz {
        return Err(parse_err(0, format!("declared {nnz} entries but found {seen}")));
    }
    Ok(coo.to_csr())
}

/// Reads a `.mtx` or `.mtx.gz` file.
pub fn read_matrix_market_file(path: &Path) -> Result<SparseCsr> {
    let file = File::open(path).map_err(io_err(path))?;
    let gz = path.extension().is_some_and(|e| e == "gz");
    let reader: Box<dyn Read> = if gz {
        Box::new(GzDecoder::new(file))
    } else {
        Box::new(file)
    };
    read_matrix_market(BufReader::new(reader))
}

/// Writes `real general` coordinate format with round-trip exact values.
pub fn write_matrix_market<W: Write>(m: &SparseCsr, mut out: W) -> std::io::Result<()> {
    writeln!(out, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(out, "{} {} {}", m.nrows(), m.ncols(), m.nnz())?;
    for r in 0..m.nrows() {
        let (cols, vals) = m.row(r);
        for (c, v) in cols.iter().zip(vals) {
            writeln!(out, "{} {} {:e}", r + 1, c + 1, v)?;
        }
    }
    out.flush()
}

pub fn write_matrix_market_file(m: &SparseCsr, path: &Path) -> Result<()> {
    let file = File::create(path).map_err(io_err(path))?;
    write_matrix_market(m, BufWriter::new(file)).map_err(io_err(path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: &str) -> Result<SparseCsr> {
        read_matrix_market(s.as_bytes())
    }

    #[test]
    fn general_real() {
        let m = parse(
            "%%MatrixMarket matrix coordinate real general\n% comment\n2 3 3\n1 1 1.5\n2 3 -2\n1 2 4e0\n",
        )
        .unwrap();
        assert_eq!((m.nrows(), m.ncols(), m.nnz()), (2, 3, 3));
        assert_eq!(m.row(0), (&[0usize, 1][..], &[1.5, 4.0][..]));
        assert_eq!(m.row(1), (&[2usize][..], &[-2.0][..]));
    }

    #[test]
    fn symmetric_pattern_expands() {
        let m = parse("%%MatrixMarket matrix coordinate pattern symmetric\n3 3 3\n1 1\n2 1\n3 2\n")
            .unwrap();
        assert_eq!(m.nnz(), 5);
        assert!(m.is_pattern_symmetric());
        assert!(m.values().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn skew_negates_mirror() {
        let m = parse("%%MatrixMarket matrix coordinate integer skew-symmetric\n2 2 1\n2 1 3\n").unwrap();
        assert_eq!(m.find(1, 0).map(|k| m.values()[k]), Some(3.0));
        assert_eq!(m.find(0, 1).map(|k| m.values()[k]), Some(-3.0));
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n3 1 2\n").unwrap_err();
        assert!(matches!(e, LabError::Parse { line: 4, .. }), "{e}");
        let e = parse("%%MatrixMarket matrix coordinate real general\n2 2 1\n1 x 1\n").unwrap_err();
        assert!(matches!(e, LabError::Parse { line: 3, .. }), "{e}");
        assert!(parse("%%MatrixMarket matrix array real general\n1 1\n1\n").is_err());
        assert!(parse("hello\n").is_err());
        assert!(parse("%%MatrixMarket matrix coordinate real general\n2 2 2\n1 1 1\n").is_err());
    }

    #[test]
    fn round_trip() {
        let m = warpell_core::matrix::generate_synthetic(
            &warpell_core::matrix::SyntheticKind::Random {
                nrows: 30,
                ncols: 20,
                density: 0.2,
            },
            4,
        )
        .unwrap();
        let mut buf = Vec::new();
        write_matrix_market(&m, &mut buf).unwrap();
        assert_eq!(read_matrix_market(&buf[..]).unwrap(), m);
    }
}
