//! The bundled example algorithms, specifications and the reference tuple sequence.

use crate::model::{Algorithm, TransId};
use thiserror::Error;

pub const FRANKLIN: &str = include_str!("../corpus/franklin.rda");
pub const DKR: &str = include_str!("../corpus/dkr.rda");
pub const PHI1: &str = include_str!("../corpus/phi1.rvs");
pub const PHI2: &str = include_str!("../corpus/phi2.rvs");
pub const PHI3: &str = include_str!("../corpus/phi3.rvs");
pub const FIG4_TUPLES: &str = include_str!("../corpus/fig4.tuples");

/// File name and contents of every corpus file.
pub const FILES: [(&str, &str); 6] = [
    ("franklin.rda", FRANKLIN),
    ("dkr.rda", DKR),
    ("phi1.rvs", PHI1),
    ("phi2.rvs", PHI2),
    ("phi3.rvs", PHI3),
    ("fig4.tuples", FIG4_TUPLES),
];

/// The pids of the reference ring for [`FIG4_TUPLES`].
pub const FIG4_RING: [u64; 7] = [4, 8, 3, 1, 6, 5, 7];

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TuplesError {
    #[error("line {line}: unknown transition {name}")]
    UnknownTransition { line: usize, name: String },
    #[error("line {line}: expected {expected} transitions, found {found}")]
    Width { line: usize, expected: usize, found: usize },
    #[error("no rounds given")]
    Empty,
}

/// Parses a tuple file: one round per line, one transition name per process.
pub fn parse_tuples(algo: &Algorithm, src: &str) -> Result<Vec<Vec<TransId>>, TuplesError> {
    let mut rows: Vec<Vec<TransId>> = Vec::new();
    for (no, raw) in src.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("");
        let names: Vec<&str> = line.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()).collect();
        if names.is_empty() {
            continue;
        }
        let row = names
            .iter()
            .map(|n| algo.transition(n).ok_or_else(|| TuplesError::UnknownTransition { line: no + 1, name: n.to_string() }))
            .collect::<Result<Vec<_>, _>>()?;
        if let Some(first) = rows.first() {
            if first.len() != row.len() {
                return Err(TuplesError::Width { line: no + 1, expected: first.len(), found: row.len() });
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(TuplesError::Empty);
    }
    Ok(rows)
}

pub fn fig4_tuples(algo: &Algorithm) -> Result<Vec<Vec<TransId>>, TuplesError> {
    parse_tuples(algo, FIG4_TUPLES)
}
