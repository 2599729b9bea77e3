//! MatrixMarket coordinate format (`real`, `general` or `symmetric`), 1-based indices.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::sparse::SparseMatrix;
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Reads a real coordinate matrix. Symmetric files store one triangle; the
/// mirrored entries are restored.
pub fn read_matrix_market<R: Read>(reader: R) -> Result<SparseMatrix> {
    let mut lines = BufReader::new(reader).lines().enumerate();

    let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty input"))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(str::to_ascii_lowercase).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(parse_err(1, "expected '%%MatrixMarket matrix coordinate real <symmetry>'"));
    }
    if tokens[2] != "coordinate" {
        return Err(parse_err(1, format!("unsupported format '{}'", tokens[2])));
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(parse_err(1, format!("unsupported field '{}'", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(parse_err(lineno, "size line must hold rows, cols and nnz"));
                }
                let parse = |s: &str| s.parse::<usize>().map_err(|_| parse_err(lineno, format!("bad integer '{s}'")));
                let (m, n, nnz) = (parse(fields[0])?, parse(fields[1])?, parse(fields[2])?);
                if m == 0 || n == 0 {
                    return Err(parse_err(lineno, "dimensions must be positive"));
                }
                if symmetric && m != n {
                    return Err(parse_err(lineno, "symmetric matrix must be square"));
                }
                triplets.reserve(if symmetric { 2 * nnz } else { nnz });
                size = Some((m, n, nnz));
            }
            Some((m, n, _)) => {
                if fields.len() != 3 {
                    return Err(parse_err(lineno, "entry line must hold row, col and value"));
                }
                let i: usize = fields[0].parse().map_err(|_| parse_err(lineno, "bad row index"))?;
                let j: usize = fields[1].parse().map_err(|_| parse_err(lineno, "bad column index"))?;
                let v: f64 = fields[2].parse().map_err(|_| parse_err(lineno, "bad value"))?;
                if i == 0 || j == 0 || i > m || j > n {
                    return Err(parse_err(lineno, format!("index ({i}, {j}) out of range")));
                }
                triplets.push((i - 1, j - 1, v));
                if symmetric && i != j {
                    triplets.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (m, n, nnz) = size.ok_or_else(|| parse_err(0, "missing size line"))?;
    let stored = if symmetric {
        triplets.iter().filter(|&&(i, j, _)| i >= j).count()
    } else {
        triplets.len()
    };
    if stored != nnz {
        return Err(parse_err(0, format!("expected {nnz} entries, found {stored}")));
    }
    SparseMatrix::from_triplets(m, n, &triplets)
}

/// Writes `m` in coordinate format. With `symmetric` only the lower triangle
/// is emitted; the caller is responsible for `m` actually being symmetric.
pub fn write_matrix_market<W: Write>(m: &SparseMatrix, symmetric: bool, writer: W) -> Result<()> {
    let mut w = BufWriter::new(writer);
    let kind = if symmetric { "symmetric" } else { "general" };
    writeln!(w, "%%MatrixMarket matrix coordinate real {kind}")?;
    let keep = |i: usize, j: usize| !symmetric || j <= i;
    let count = (0..m.n_rows()).map(|i| m.row(i).filter(|&(j, _)| keep(i, j)).count()).sum::<usize>();
    writeln!(w, "{} {} {}", m.n_rows(), m.n_cols(), count)?;
    for i in 0..m.n_rows() {
        for (j, v) in m.row(i).filter(|&(j, _)| keep(i, j)) {
            writeln!(w, "{} {} {:e}", i + 1, j + 1, v)?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn read_matrix_market_file(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    read_matrix_market(file)
}

pub fn write_matrix_market_file(m: &SparseMatrix, symmetric: bool, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    write_matrix_market(m, symmetric, file)
}
