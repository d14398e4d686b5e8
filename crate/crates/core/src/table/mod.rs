//! Symbolic runs (tables), LCPDL formulas over them, and a direct model checker.

mod eval;
mod lcpdl;
mod text;

pub use eval::{eval_lcpdl, path_rel, Evaluator};
pub use lcpdl::{AutoId, LLocal, LPath, LocalId, PathAutomaton, PathId, Step, Store};
pub use text::{emit, parse_lcpdl, LcpdlParseError};

use crate::model::{Algorithm, Run, TransId, DUMMY_NAME};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TableError {
    #[error("a table needs at least one column and a height index of at least 1")]
    Shape,
    #[error("column {column} has {found} cells, expected {expected}")]
    Ragged { column: usize, found: usize, expected: usize },
    #[error("unknown transition {0}")]
    UnknownTransition(String),
    #[error("the algorithm has no dummy transition")]
    NotExtended,
    #[error("invalid table JSON: {0}")]
    Json(String),
}

/// A table `(n, k, λ)`: `n` columns of `k + 1` transitions each.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Table {
    width: usize,
    k: usize,
    /// Column-major: cell `(i, j)` is at `i * (k + 1) + j`.
    cells: Vec<TransId>,
}

impl Table {
    pub fn new(width: usize, k: usize, cells: Vec<TransId>) -> Result<Table, TableError> {
        if width == 0 || k == 0 {
            return Err(TableError::Shape);
        }
        if cells.len() != width * (k + 1) {
            return Err(TableError::Ragged { column: 0, found: cells.len(), expected: width * (k + 1) });
        }
        Ok(Table { width, k, cells })
    }

    pub fn from_columns(columns: &[Vec<TransId>]) -> Result<Table, TableError> {
        let rows = columns.first().map_or(0, Vec::len);
        if columns.is_empty() || rows < 2 {
            return Err(TableError::Shape);
        }
        for (i, c) in columns.iter().enumerate() {
            if c.len() != rows {
                return Err(TableError::Ragged { column: i, found: c.len(), expected: rows });
            }
        }
        Ok(Table { width: columns.len(), k: rows - 1, cells: columns.concat() })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    /// The height index `k`; rows are `0..=k`.
    pub fn height(&self) -> usize {
        self.k
    }

    pub fn rows(&self) -> usize {
        self.k + 1
    }

    /// Number of positions.
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn pos(&self, i: usize, j: usize) -> usize {
        i * (self.k + 1) + j
    }

    pub fn coords(&self, x: usize) -> (usize, usize) {
        (x / (self.k + 1), x % (self.k + 1))
    }

    pub fn get(&self, i: usize, j: usize) -> TransId {
        self.cells[self.pos(i, j)]
    }

    pub fn at(&self, x: usize) -> TransId {
        self.cells[x]
    }

    pub fn column(&self, i: usize) -> &[TransId] {
        &self.cells[i * (self.k + 1)..(i + 1) * (self.k + 1)]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[TransId]> {
        self.cells.chunks(self.k + 1)
    }

    /// Cells in column-major order, which is also the word encoding of the table.
    pub fn cells(&self) -> &[TransId] {
        &self.cells
    }

    /// The table without column `i`; `None` if it is the only column.
    pub fn without_column(&self, i: usize) -> Option<Table> {
        if self.width == 1 {
            return None;
        }
        let cols: Vec<Vec<TransId>> = self.columns().enumerate().filter(|&(c, _)| c != i).map(|(_, c)| c.to_vec()).collect();
        Table::from_columns(&cols).ok()
    }

    pub fn to_json(&self, algo: &Algorithm) -> TableJson {
        TableJson {
            width: self.width,
            height: self.k,
            columns: self.columns().map(|c| c.iter().map(|&t| algo.trans(t).name.clone()).collect()).collect(),
        }
    }

    pub fn from_json(algo: &Algorithm, json: &TableJson) -> Result<Table, TableError> {
        let columns = json
            .columns
            .iter()
            .map(|c| {
                c.iter()
                    .map(|n| algo.transition(n).ok_or_else(|| TableError::UnknownTransition(n.clone())))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?;
        let t = Table::from_columns(&columns)?;
        if t.width != json.width || t.k != json.height {
            return Err(TableError::Json(format!(
                "declared {}x{} but columns give {}x{}",
                json.width, json.height, t.width, t.k
            )));
        }
        Ok(t)
    }

    pub fn parse_json(algo: &Algorithm, text: &str) -> Result<Table, TableError> {
        let json: TableJson = serde_json::from_str(text).map_err(|e| TableError::Json(e.to_string()))?;
        Table::from_json(algo, &json)
    }

    /// Renders the table with one row per line.
    pub fn render(&self, algo: &Algorithm) -> String {
        let names: Vec<Vec<&str>> = self.columns().map(|c| c.iter().map(|&t| algo.trans(t).name.as_str()).collect()).collect();
        let w = names.iter().flatten().map(|s| s.len()).max().unwrap_or(1);
        let mut out = String::new();
        for j in 0..self.rows() {
            let row: Vec<String> = names.iter().map(|c| format!("{:w$}", c[j])).collect();
            out += row.join(" ").trim_end();
            out.push('\n');
        }
        out
    }
}

/// Serialised form of a table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TableJson {
    pub width: usize,
    pub height: usize,
    pub columns: Vec<Vec<String>>,
}

/// The symbolic run `T_χ`: the dummy transition followed by each process's transitions.
pub fn table_of_run(algo: &Algorithm, run: &Run) -> Result<Table, TableError> {
    let dummy = algo.transition(DUMMY_NAME).ok_or(TableError::NotExtended)?;
    if run.is_empty() {
        return Err(TableError::Shape);
    }
    let columns: Vec<Vec<TransId>> =
        (0..run.size()).map(|i| std::iter::once(dummy).chain(run.tuples.iter().map(|t| t[i])).collect()).collect();
    Table::from_columns(&columns)
}

/// The table with cell `(i, j)` replaced by `t`.
pub fn mutate_table(table: &Table, (i, j): (usize, usize), t: TransId) -> Table {
    let mut out = table.clone();
    let x = out.pos(i, j);
    out.cells[x] = t;
    out
}

#[cfg(test)]
mod tests;
