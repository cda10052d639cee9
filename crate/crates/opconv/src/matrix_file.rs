//! Plain-text matrix files.
//!
//! The first line holds the dimension `d`; each of the next `d` lines holds
//! `d` whitespace-separated complex entries written `re+imj` (`1.5`, `-2j`
//! and `0.3-1e-2j` are all accepted). Blank lines and lines starting with
//! `#` are skipped.

use std::fmt::Write as _;
use std::path::Path;

use opconv_core::{CMatrix, Complex64, HermitianMatrix, PositiveDefiniteMatrix};

use crate::error::{AppError, AppResult};

fn parse_entry(token: &str, line: usize) -> AppResult<Complex64> {
    token
        .parse::<Complex64>()
        .ok()
        .filter(|z| z.re.is_finite() && z.im.is_finite())
        .ok_or_else(|| AppError::Parse(format!("line {line}: bad matrix entry `{token}`")))
}

/// Parses a square complex matrix without any symmetry requirement.
pub fn parse_raw(text: &str) -> AppResult<CMatrix> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
    let (first, header) = lines
        .next()
        .ok_or_else(|| AppError::Parse("empty matrix file".into()))?;
    let d: usize = header
        .parse()
        .ok()
        .filter(|&d| d > 0)
        .ok_or_else(|| AppError::Parse(format!("line {first}: expected a positive dimension, found `{header}`")))?;
    let mut entries = Vec::with_capacity(d * d);
    for row in 0..d {
        let (n, line) = lines
            .next()
            .ok_or_else(|| AppError::Parse(format!("expected {d} rows, found {row}")))?;
        let before = entries.len();
        for token in line.split_whitespace() {
            entries.push(parse_entry(token, n)?);
        }
        let found = entries.len() - before;
        if found != d {
            return Err(AppError::Parse(format!("line {n}: expected {d} entries, found {found}")));
        }
    }
    if let Some((n, _)) = lines.next() {
        return Err(AppError::Parse(format!("line {n}: trailing content after {d} rows")));
    }
    Ok(CMatrix::from_row_slice(d, d, &entries))
}

/// Parses and symmetrizes; entries more than `ASYM_TOL` from Hermitian are
/// rejected.
pub fn parse_hermitian(text: &str) -> AppResult<HermitianMatrix> {
    Ok(HermitianMatrix::new(&parse_raw(text)?)?)
}

pub fn parse_positive(text: &str) -> AppResult<PositiveDefiniteMatrix> {
    Ok(PositiveDefiniteMatrix::new(parse_hermitian(text)?)?)
}

fn read(path: &Path) -> AppResult<String> {
    std::fs::read_to_string(path).map_err(|e| AppError::io(path, e))
}

fn in_file<T>(path: &Path, r: AppResult<T>) -> AppResult<T> {
    r.map_err(|e| match e {
        AppError::Io { .. } => e,
        other => AppError::Parse(format!("{}: {other}", path.display())),
    })
}

pub fn read_raw(path: &Path) -> AppResult<CMatrix> {
    in_file(path, parse_raw(&read(path)?))
}

pub fn read_hermitian(path: &Path) -> AppResult<HermitianMatrix> {
    in_file(path, parse_hermitian(&read(path)?))
}

pub fn read_positive(path: &Path) -> AppResult<PositiveDefiniteMatrix> {
    in_file(path, parse_positive(&read(path)?))
}

pub fn render(m: &CMatrix) -> String {
    let mut out = format!("{}\n", m.nrows());
    for i in 0..m.nrows() {
        let row: Vec<String> = (0..m.ncols())
            .map(|j| {
                let z = m[(i, j)];
                format!("{}{:+}j", z.re, z.im)
            })
            .collect();
        writeln!(out, "{}", row.join(" ")).expect("write to String");
    }
    out
}

pub fn write(path: &Path, m: &CMatrix) -> AppResult<()> {
    std::fs::write(path, render(m)).map_err(|e| AppError::io(path, e))
}
