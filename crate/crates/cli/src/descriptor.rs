//! Sequence descriptor mini-language:
//!
//! - `diag:<expr>`    sampling of a symbol expression
//! - `shuffle:<expr>` seeded shuffle of the sampling
//! - `diag:1/i`       the harmonic diagonal
//! - `file:<path>`    explicit per-size diagonals from a CSV with columns
//!   `n,i,re,im` (comment lines starting with `#` are skipped)

use std::collections::HashMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use diagsym_core::{Complex64, DiagonalSequence, Error as CoreError};

use crate::expr::{parse_symbol, SymbolExpr};
use crate::CliError;

#[derive(Debug, Clone)]
pub enum SeqDescriptor {
    Diag(SymbolExpr),
    Shuffle(SymbolExpr),
    Harmonic,
    File(PathBuf),
}

pub fn parse_descriptor(text: &str) -> Result<SeqDescriptor, CliError> {
    if let Some(rest) = text.strip_prefix("diag:") {
        if rest.trim() == "1/i" {
            return Ok(SeqDescriptor::Harmonic);
        }
        return Ok(SeqDescriptor::Diag(parse_symbol(rest).map_err(CliError::expr(text))?));
    }
    if let Some(rest) = text.strip_prefix("shuffle:") {
        return Ok(SeqDescriptor::Shuffle(parse_symbol(rest).map_err(CliError::expr(text))?));
    }
    if let Some(rest) = text.strip_prefix("file:") {
        return Ok(SeqDescriptor::File(PathBuf::from(rest)));
    }
    Err(CliError::usage(format!(
        "unknown sequence descriptor `{text}` (expected diag:<expr>, shuffle:<expr>, diag:1/i or file:<path>)"
    )))
}

/// Build the generator for a descriptor; `seed` drives `shuffle:` forms.
pub fn build_sequence(desc: &SeqDescriptor, seed: u64) -> Result<DiagonalSequence, CliError> {
    match desc {
        SeqDescriptor::Diag(expr) => Ok(DiagonalSequence::sampling(&expr.to_symbol())),
        SeqDescriptor::Shuffle(expr) => {
            Ok(DiagonalSequence::shuffled_sampling(&expr.to_symbol(), seed))
        }
        SeqDescriptor::Harmonic => Ok(DiagonalSequence::harmonic()),
        SeqDescriptor::File(path) => load_diagonal_file(path),
    }
}

/// Read explicit diagonals from a `n,i,re,im` CSV.
pub fn load_diagonal_file(path: &Path) -> Result<DiagonalSequence, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::usage(format!("cannot read `{}`: {e}", path.display())))?;
    let mut by_size: HashMap<usize, Vec<(usize, Complex64)>> = HashMap::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || line.starts_with("n,") {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 {
            return Err(CliError::usage(format!(
                "{}:{}: expected 4 fields `n,i,re,im`, found {}",
                path.display(),
                lineno + 1,
                fields.len()
            )));
        }
        let parse_err = |what: &str| {
            CliError::usage(format!("{}:{}: invalid {what}", path.display(), lineno + 1))
        };
        let n: usize = fields[0].trim().parse().map_err(|_| parse_err("size"))?;
        let i: usize = fields[1].trim().parse().map_err(|_| parse_err("index"))?;
        let re: f64 = fields[2].trim().parse().map_err(|_| parse_err("real part"))?;
        let im: f64 = fields[3].trim().parse().map_err(|_| parse_err("imaginary part"))?;
        if i == 0 || i > n {
            return Err(parse_err("index (must be 1..=n)"));
        }
        by_size.entry(n).or_default().push((i, Complex64::new(re, im)));
    }
    let mut table: HashMap<usize, Vec<Complex64>> = HashMap::new();
    for (n, mut entries) in by_size {
        entries.sort_by_key(|&(i, _)| i);
        if entries.len() != n || entries.iter().enumerate().any(|(k, &(i, _))| i != k + 1) {
            return Err(CliError::usage(format!(
                "diagonal for size {n} in `{}` is incomplete",
                path.display()
            )));
        }
        table.insert(n, entries.into_iter().map(|(_, v)| v).collect());
    }
    let table = Arc::new(table);
    let descriptor = format!("file:{}", path.display());
    Ok(DiagonalSequence::new(descriptor, move |n| {
        table.get(&n).cloned().ok_or(CoreError::MissingSize { n })
    }))
}
