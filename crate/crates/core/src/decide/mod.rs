//! Deciding round-bounded correctness.
//!
//! A table of height index `k` is written column after column as a word. For each
//! `k ≤ b` the violation formula becomes an alternating two-way automaton over such
//! words, and emptiness of that automaton decides the bound. When the emptiness search
//! runs out of budget the check falls back to enumerating tables up to a width cap.
//! Every reported counterexample is replayed and re-evaluated before it is returned.

pub mod a2a;
pub mod bounded;
pub mod emptiness;
pub mod membership;
pub mod nfa;
pub mod realize;

pub use a2a::{Letter, A2A};
pub use emptiness::{Budget, Emptiness};
pub use realize::{find_violating_run, realize_ring};

use crate::compile::{compile, CompileError, CompiledAlgorithm};
use crate::dataspec::{check_fragment, eval_local, Spec};
use crate::model::{Algorithm, Ring, Run, TransId};
use crate::table::{LocalId, Store, Table, TableError};
use rayon::prelude::*;
use serde_json::{json, Value};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecideError {
    #[error("word length {len} is not a multiple of {height}")]
    Decode { len: usize, height: usize },
    #[error("the bound must be at least 1")]
    ZeroBound,
    #[error("the spec is outside the decidable fragment: {}", .0.join("; "))]
    Fragment(Vec<String>),
    #[error(transparent)]
    Compile(#[from] CompileError),
    #[error(transparent)]
    Table(#[from] TableError),
    #[error("emptiness search exceeded its budget after {spent} nodes")]
    ResourceBudgetExceeded { spent: usize },
    #[error("internal error: the order forced by the table has a cycle through column {column}")]
    NotAPartialOrder { column: usize },
    #[error("internal error: the realized run does not match its table: {reason}")]
    RunReverificationFailed { reason: String },
    #[error("internal error: no realization of the witness table violates the spec")]
    ExhaustedWithoutViolation,
}

/// The table's cells, column by column.
pub fn encode(table: &Table) -> Vec<TransId> {
    table.cells().to_vec()
}

/// Inverse of [`encode`] for height index `k`.
pub fn decode(word: &[TransId], k: usize) -> Result<Table, DecideError> {
    let height = k + 1;
    if word.is_empty() || word.len() % height != 0 {
        return Err(DecideError::Decode { len: word.len(), height });
    }
    Ok(Table::new(word.len() / height, k, word.to_vec())?)
}

/// The encoding between end markers, as read by the automaton.
pub fn tape(word: &[TransId]) -> Vec<Letter> {
    std::iter::once(Letter::Start).chain(word.iter().map(|&t| Letter::T(t))).chain(std::iter::once(Letter::End)).collect()
}

/// The automaton accepting the encodings of height-`k` tables satisfying `psi` at `(0, 0)`.
pub fn compile_a2a(store: Arc<Store>, ext: Arc<Algorithm>, psi: LocalId, k: usize) -> A2A {
    A2A::new(store, ext, psi, k)
}

/// Whether the automaton accepts `encode(table)`.
pub fn a2a_accepts(a: &mut A2A, table: &Table) -> bool {
    membership::accepts(a, &tape(&encode(table)))
}

/// Emptiness with a shortest witness word.
pub fn a2a_is_empty(a: &mut A2A, budget: Budget) -> Result<Emptiness, DecideError> {
    emptiness::emptiness(a, budget).map_err(|e| DecideError::ResourceBudgetExceeded { spent: e.spent })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    Holds,
    Violated,
    /// No counterexample up to the width cap; not a proof.
    Unknown,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Automaton,
    BoundedWidth,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Automaton => "automaton",
            Mode::BoundedWidth => "bounded-width",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counterexample {
    pub table: Table,
    pub ring: Ring,
    pub run: Run,
    /// 0-based index of the marked process; always 0.
    pub marked: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub result: Outcome,
    pub mode: Mode,
    pub bound: usize,
    pub width_cap: Option<usize>,
    pub counterexample: Option<Counterexample>,
    /// Warnings such as fallbacks and assumed unambiguity.
    pub notes: Vec<String>,
}

impl Verdict {
    pub fn to_json(&self, algo: &Algorithm) -> Value {
        let result = match self.result {
            Outcome::Holds => "holds",
            Outcome::Violated => "violated",
            Outcome::Unknown => "unknown",
        };
        let mut v = json!({ "result": result, "bound": self.bound, "mode": self.mode.name() });
        if let Some(w) = self.width_cap {
            v["width_cap"] = json!(w);
        }
        if !self.notes.is_empty() {
            v["notes"] = json!(self.notes);
        }
        if let Some(cx) = &self.counterexample {
            let ext = crate::compile::dummy_extend(algo);
            let tuples: Vec<Vec<&str>> =
                cx.run.tuples.iter().map(|t| t.iter().map(|&x| algo.trans(x).name.as_str()).collect()).collect();
            v["counterexample"] = json!({
                "table": serde_json::to_value(cx.table.to_json(&ext)).expect("table json"),
                "ring": cx.ring.pids(),
                "tuples": tuples,
                "marked": cx.marked + 1,
            });
        }
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CheckOptions {
    pub mode: Mode,
    /// Widest table tried in bounded-width mode and after a fallback.
    pub width_cap: usize,
    pub budget: Budget,
    pub waive_unambiguity: bool,
}

impl Default for CheckOptions {
    fn default() -> CheckOptions {
        CheckOptions { mode: Mode::Automaton, width_cap: 5, budget: Budget::default(), waive_unambiguity: false }
    }
}

enum Height {
    Empty,
    Witness(Table),
    /// Nothing up to the width cap.
    Exhausted,
}

struct HeightResult {
    outcome: Height,
    fell_back: Option<usize>,
}

fn search_height(store: &Arc<Store>, ext: &Arc<Algorithm>, psi: LocalId, k: usize, opts: &CheckOptions) -> HeightResult {
    let bounded = || match bounded::first_model(store, ext, psi, k, opts.width_cap) {
        Some(t) => Height::Witness(t),
        None => Height::Exhausted,
    };
    match opts.mode {
        Mode::BoundedWidth => HeightResult { outcome: bounded(), fell_back: None },
        Mode::Automaton => {
            let mut a = compile_a2a(store.clone(), ext.clone(), psi, k);
            match a2a_is_empty(&mut a, opts.budget) {
                Ok(Emptiness::Empty) => HeightResult { outcome: Height::Empty, fell_back: None },
                Ok(Emptiness::Witness(w)) => {
                    let t = decode(&w, k).expect("accepted words encode tables");
                    HeightResult { outcome: Height::Witness(t), fell_back: None }
                }
                Err(DecideError::ResourceBudgetExceeded { spent }) => HeightResult { outcome: bounded(), fell_back: Some(spent) },
                Err(e) => unreachable!("emptiness only fails on budget: {e}"),
            }
        }
    }
}

/// Decides whether every run of `algo` with at most `bound` rounds, on every ring,
/// satisfies `spec` for every marked process.
pub fn check(algo: &Algorithm, spec: &Spec, bound: usize, opts: &CheckOptions) -> Result<Verdict, DecideError> {
    if bound == 0 {
        return Err(DecideError::ZeroBound);
    }
    let report = check_fragment(spec, opts.waive_unambiguity);
    if !report.admissible() {
        return Err(DecideError::Fragment(report.diagnostics));
    }
    let mut notes = if report.waived() { report.diagnostics.clone() } else { Vec::new() };
    let mut c = compile(algo);
    let psi = c.violation_formula(spec)?;
    let store = Arc::new(std::mem::take(&mut c.store));
    let ext = Arc::new(c.dummy_extended.clone());
    let results: Vec<HeightResult> = (1..=bound).into_par_iter().map(|k| search_height(&store, &ext, psi, k, opts)).collect();
    // Restore the store so realization can evaluate π_< on witnesses.
    c.store = Arc::try_unwrap(store).unwrap_or_else(|s| (*s).clone());

    let mut mode = opts.mode;
    let mut unknown = false;
    for (k, r) in (1..=bound).zip(results) {
        if let Some(spent) = r.fell_back {
            mode = Mode::BoundedWidth;
            notes.push(format!(
                "emptiness search for height {k} stopped after {spent} nodes; fell back to tables of width at most {}",
                opts.width_cap
            ));
        }
        match r.outcome {
            Height::Empty => {}
            Height::Exhausted => unknown = true,
            Height::Witness(t) => {
                let cx = counterexample(algo, &c, spec, psi, t)?;
                return Ok(Verdict {
                    result: Outcome::Violated,
                    mode,
                    bound,
                    width_cap: (mode == Mode::BoundedWidth).then_some(opts.width_cap),
                    counterexample: Some(cx),
                    notes,
                });
            }
        }
    }
    let (result, width_cap) = if unknown {
        notes.push(format!("no counterexample up to width {}", opts.width_cap));
        (Outcome::Unknown, Some(opts.width_cap))
    } else {
        (Outcome::Holds, None)
    };
    Ok(Verdict { result, mode, bound, width_cap, counterexample: None, notes })
}

/// Minimizes a witness table, realizes it and re-verifies the result end to end.
fn counterexample(
    algo: &Algorithm,
    c: &CompiledAlgorithm,
    spec: &Spec,
    psi: LocalId,
    table: Table,
) -> Result<Counterexample, DecideError> {
    let table = bounded::minimize(&c.store, &c.dummy_extended, psi, table);
    let (ring, run) = find_violating_run(algo, c, spec, &table)?;
    let replayed = Run::replay(algo, ring.clone(), &run.tuples)
        .map_err(|round| DecideError::RunReverificationFailed { reason: format!("round {round} does not replay") })?;
    if replayed != run || eval_local(algo, &run, 0, (0, 0), &spec.body) {
        return Err(DecideError::RunReverificationFailed { reason: "the run does not violate the spec".into() });
    }
    Ok(Counterexample { table, ring, run, marked: 0 })
}
