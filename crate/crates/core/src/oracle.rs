//! Explicit-state reference checker: every ring up to a size, every run up to a
//! length, every marked process.

use crate::compile::dummy_extend;
use crate::dataspec::{eval_local, Spec};
use crate::model::{enumerate_runs, Algorithm, Pid, Ring, Run};
use crate::table::table_of_run;
use rayon::prelude::*;
use serde_json::{json, Value};

/// Rings with pids `1..=n` up to rotation: pid `n` sits at index 0, the rest follow
/// in every order, lexicographically. There are `(n-1)!` of them.
pub fn enumerate_rings(n: usize) -> impl Iterator<Item = Ring> {
    assert!(n >= 1, "rings have at least one process");
    let mut rest: Vec<Pid> = (1..n as Pid).collect();
    let mut first = true;
    std::iter::from_fn(move || {
        if !first && !next_permutation(&mut rest) {
            return None;
        }
        first = false;
        let pids = std::iter::once(n as Pid).chain(rest.iter().copied()).collect();
        Some(Ring::new(pids).expect("distinct pids"))
    })
}

fn next_permutation(v: &mut [Pid]) -> bool {
    let Some(i) = (1..v.len()).rev().find(|&i| v[i - 1] < v[i]) else {
        return false;
    };
    let j = (i..v.len()).rev().find(|&j| v[j] > v[i - 1]).expect("a larger element exists");
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleCounterexample {
    pub ring: Ring,
    pub run: Run,
    /// 0-based index of the marked process.
    pub marked: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OracleVerdict {
    pub bound: usize,
    pub n_max: usize,
    pub counterexample: Option<OracleCounterexample>,
}

impl OracleVerdict {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }

    /// The verdict in the same shape as a symbolic check, with `n_max` added.
    pub fn to_json(&self, algo: &Algorithm) -> Value {
        let result = if self.holds() { "holds" } else { "violated" };
        let mut v = json!({ "result": result, "bound": self.bound, "mode": "oracle", "n_max": self.n_max });
        if let Some(cx) = &self.counterexample {
            let ext = dummy_extend(algo);
            let table = table_of_run(&ext, &cx.run).expect("runs have at least one round");
            let tuples: Vec<Vec<&str>> =
                cx.run.tuples.iter().map(|t| t.iter().map(|&x| algo.trans(x).name.as_str()).collect()).collect();
            v["counterexample"] = json!({
                "table": serde_json::to_value(table.to_json(&ext)).expect("table json"),
                "ring": cx.ring.pids(),
                "tuples": tuples,
                "marked": cx.marked + 1,
            });
        }
        v
    }
}

/// The first violation on `ring`, in run-enumeration order.
pub fn check_ring(algo: &Algorithm, spec: &Spec, ring: &Ring, bound: usize) -> Option<OracleCounterexample> {
    for run in enumerate_runs(algo, ring, bound) {
        if let Some(m) = (0..run.size()).find(|&m| !eval_local(algo, &run, m, (m, 0), &spec.body)) {
            return Some(OracleCounterexample { ring: ring.clone(), run, marked: m });
        }
    }
    None
}

/// Checks `spec` on every ring of size at most `n_max` and every run of length at most
/// `bound`. Rings are checked in parallel; the reported counterexample is the first in
/// (size, ring, run, marked) order regardless of scheduling.
pub fn oracle_check(algo: &Algorithm, spec: &Spec, bound: usize, n_max: usize) -> OracleVerdict {
    let rings: Vec<Ring> = (1..=n_max).flat_map(enumerate_rings).collect();
    let counterexample = rings.par_iter().find_map_first(|ring| check_ring(algo, spec, ring, bound));
    OracleVerdict { bound, n_max, counterexample }
}
