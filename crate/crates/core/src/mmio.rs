//! MatrixMarket coordinate format.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{MmioError, OperatorError};
use crate::operator::SparseSymMatrix;

const SYM_RTOL: f64 = 1e-12;

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseSymMatrix, MmioError> {
    let f = File::open(path)?;
    parse_matrix_market(BufReader::new(f))
}

pub fn parse_matrix_market<R: BufRead>(reader: R) -> Result<SparseSymMatrix, MmioError> {
    let mut lines = reader.lines().enumerate();
    let (_, header) = lines
        .next()
        .ok_or_else(|| MmioError::Header("empty file".into()))?;
    let header = header?;
    let tokens: Vec<String> = header.split_whitespace().map(|t| t.to_ascii_lowercase()).collect();
    if tokens.len() != 5 || tokens[0] != "%%matrixmarket" || tokens[1] != "matrix" {
        return Err(MmioError::Header(header));
    }
    if tokens[2] != "coordinate" {
        return Err(MmioError::Header(format!("format '{}' unsupported", tokens[2])));
    }
    if tokens[3] != "real" && tokens[3] != "integer" {
        return Err(MmioError::Header(format!("field '{}' unsupported", tokens[3])));
    }
    let symmetric = match tokens[4].as_str() {
        "symmetric" => true,
        "general" => false,
        other => return Err(MmioError::Header(format!("symmetry '{other}' unsupported"))),
    };

    let mut size: Option<(usize, usize, usize)> = None;
    let mut entries: Vec<(usize, usize, f64)> = Vec::new();
    for (idx, line) in lines {
        let line = line?;
        let lineno = idx + 1;
        let t = line.trim();
        if t.is_empty() || t.starts_with('%') {
            continue;
        }
        let parse_err = |msg: &str| MmioError::Parse {
            line: lineno,
            msg: format!("{msg}: '{t}'"),
        };
        let fields: Vec<&str> = t.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(parse_err("expected size line 'rows cols nnz'"));
                }
                let p = |s: &str| s.parse::<usize>().map_err(|_| parse_err("bad integer"));
                let (r, c, nz) = (p(fields[0])?, p(fields[1])?, p(fields[2])?);
                if r != c {
                    return Err(OperatorError::NotSquare { rows: r, cols: c }.into());
                }
                if r == 0 {
                    return Err(OperatorError::EmptyDimension.into());
                }
                entries.reserve(nz);
                size = Some((r, c, nz));
            }
            Some((n, _, _)) => {
                if fields.len() != 3 {
                    return Err(parse_err("expected entry 'row col value'"));
                }
                let i: usize = fields[0].parse().map_err(|_| parse_err("bad row index"))?;
                let j: usize = fields[1].parse().map_err(|_| parse_err("bad column index"))?;
                let v: f64 = fields[2].parse().map_err(|_| parse_err("bad value"))?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(parse_err("index out of range"));
                }
                if !v.is_finite() {
                    return Err(OperatorError::NonFinite.into());
                }
                if symmetric && j > i {
                    return Err(parse_err("upper-triangle entry in symmetric file"));
                }
                entries.push((i - 1, j - 1, v));
            }
        }
    }
    let (n, _, nz) = size.ok_or_else(|| MmioError::Header("missing size line".into()))?;
    if entries.len() != nz {
        return Err(MmioError::Parse {
            line: 0,
            msg: format!("expected {nz} entries, found {}", entries.len()),
        });
    }
    if symmetric {
        Ok(SparseSymMatrix::from_sym_triplets(n, &entries)?)
    } else {
        Ok(symmetrize_general(n, entries)?)
    }
}

/// Sums duplicates and averages `a` with its transpose, provided the two
/// agree to a relative tolerance.
fn symmetrize_general(
    n: usize,
    mut entries: Vec<(usize, usize, f64)>,
) -> Result<SparseSymMatrix, OperatorError> {
    entries.sort_by_key(|e| (e.0, e.1));
    let mut merged: Vec<(usize, usize, f64)> = Vec::with_capacity(entries.len());
    for (i, j, v) in entries {
        match merged.last_mut() {
            Some(last) if (last.0, last.1) == (i, j) => last.2 += v,
            _ => merged.push((i, j, v)),
        }
    }
    let scale = merged.iter().map(|e| e.2.abs()).fold(0.0, f64::max);
    let lookup = |i: usize, j: usize| {
        merged
            .binary_search_by(|e| (e.0, e.1).cmp(&(i, j)))
            .map(|p| merged[p].2)
            .unwrap_or(0.0)
    };
    let mut lower = Vec::new();
    for &(i, j, v) in &merged {
        let t = lookup(j, i);
        if (v - t).abs() > SYM_RTOL * scale {
            return Err(OperatorError::NotSymmetric { row: i, col: j });
        }
        if j <= i {
            lower.push((i, j, if i == j { v } else { 0.5 * (v + t) }));
        } else if t == 0.0 {
            // Upper entry with no stored mirror (within tolerance of zero).
            lower.push((j, i, 0.5 * v));
        }
    }
    SparseSymMatrix::from_sym_triplets(n, &lower)
}

/// Writes the lower triangle in `coordinate real symmetric` form with enough
/// digits to round-trip every value exactly.
pub fn write_matrix_market(m: &SparseSymMatrix, path: impl AsRef<Path>) -> Result<(), MmioError> {
    let f = File::create(path)?;
    let mut w = BufWriter::new(f);
    write_matrix_market_to(m, &mut w)?;
    w.flush()?;
    Ok(())
}

pub fn write_matrix_market_to<W: Write>(m: &SparseSymMatrix, w: &mut W) -> std::io::Result<()> {
    let n = m.n();
    let lower: usize = (0..n).map(|i| m.row(i).filter(|&(j, _)| j <= i).count()).sum();
    writeln!(w, "%%MatrixMarket matrix coordinate real symmetric")?;
    writeln!(w, "{n} {n} {lower}")?;
    for i in 0..n {
        for (j, v) in m.row(i).filter(|&(j, _)| j <= i) {
            writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
        }
    }
    Ok(())
}
