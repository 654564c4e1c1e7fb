//! MatrixMarket coordinate I/O.
//!
//! Only the `matrix coordinate real general` flavour is accepted. Indices in
//! the file are 1-based. Explicit zeros and repeated positions are rejected
//! rather than silently merged, since either usually means a malformed
//! instance.

use std::collections::HashSet;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::matrix::SparseNonnegMatrix;

const BANNER: &str = "%%MatrixMarket";

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

pub fn read_matrix_market<R: BufRead>(reader: R) -> Result<SparseNonnegMatrix> {
    let mut lines = reader.lines().enumerate().map(|(k, l)| (k + 1, l));

    let (lineno, header) = match lines.next() {
        Some((k, Ok(l))) => (k, l),
        Some((_, Err(e))) => return Err(Error::Io(e.to_string())),
        None => return Err(parse_err(1, "empty input")),
    };
    let tokens: Vec<String> = header
        .split_whitespace()
        .map(|t| t.to_ascii_lowercase())
        .collect();
    if tokens.first().map(String::as_str) != Some(&BANNER.to_ascii_lowercase()) {
        return Err(parse_err(lineno, "missing %%MatrixMarket banner"));
    }
    if tokens[1..] != ["matrix", "coordinate", "real", "general"] {
        return Err(parse_err(
            lineno,
            format!(
                "unsupported header `{}`; expected `{BANNER} matrix coordinate real general`",
                header.trim()
            ),
        ));
    }

    let mut size: Option<(usize, usize, usize)> = None;
    let mut triplets = Vec::new();
    let mut seen = HashSet::new();
    let mut last_line = lineno;

    for (lineno, line) in lines {
        last_line = lineno;
        let line = line.map_err(|e| Error::Io(e.to_string()))?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        match size {
            None => {
                if fields.len() != 3 {
                    return Err(parse_err(lineno, "size line must be `rows cols nnz`"));
                }
                let parse = |s: &str| {
                    s.parse::<usize>()
                        .map_err(|_| parse_err(lineno, format!("bad size field `{s}`")))
                };
                size = Some((parse(fields[0])?, parse(fields[1])?, parse(fields[2])?));
            }
            Some((m, n, nnz)) => {
                if fields.len() != 3 {
                    return Err(parse_err(lineno, "entry line must be `row col value`"));
                }
                if triplets.len() == nnz {
                    return Err(parse_err(lineno, format!("more than {nnz} entries")));
                }
                let index = |s: &str, bound: usize, what: &str| -> Result<usize> {
                    let k = s
                        .parse::<usize>()
                        .map_err(|_| parse_err(lineno, format!("bad {what} index `{s}`")))?;
                    if k == 0 || k > bound {
                        return Err(parse_err(
                            lineno,
                            format!("{what} index {k} outside 1..={bound}"),
                        ));
                    }
                    Ok(k - 1)
                };
                let i = index(fields[0], m, "row")?;
                let j = index(fields[1], n, "column")?;
                let v: f64 = fields[2]
                    .parse()
                    .map_err(|_| parse_err(lineno, format!("bad value `{}`", fields[2])))?;
                if !v.is_finite() {
                    return Err(parse_err(lineno, "value is not finite"));
                }
                if v == 0.0 {
                    return Err(parse_err(
                        lineno,
                        format!("explicit zero at ({}, {})", i + 1, j + 1),
                    ));
                }
                if v < 0.0 {
                    return Err(parse_err(
                        lineno,
                        format!("negative value {v} at ({}, {})", i + 1, j + 1),
                    ));
                }
                if !seen.insert((i, j)) {
                    return Err(parse_err(
                        lineno,
                        format!("duplicate entry at ({}, {})", i + 1, j + 1),
                    ));
                }
                triplets.push((i, j, v));
            }
        }
    }

    let (m, n, nnz) = size.ok_or_else(|| parse_err(last_line, "missing size line"))?;
    if triplets.len() != nnz {
        return Err(parse_err(
            last_line,
            format!("size line promises {nnz} entries, found {}", triplets.len()),
        ));
    }
    SparseNonnegMatrix::from_triplets(m, n, triplets)
}

/// Writes `a` with 17 significant digits per value, so reading the file
/// back reproduces the matrix exactly.
pub fn write_matrix_market<W: Write>(mut out: W, a: &SparseNonnegMatrix) -> Result<()> {
    let io = |e: std::io::Error| Error::Io(e.to_string());
    writeln!(out, "{BANNER} matrix coordinate real general").map_err(io)?;
    writeln!(out, "{} {} {}", a.rows(), a.cols(), a.nnz()).map_err(io)?;
    for (i, j, v) in a.triplets() {
        writeln!(out, "{} {} {:.16e}", i + 1, j + 1, v).map_err(io)?;
    }
    Ok(())
}
