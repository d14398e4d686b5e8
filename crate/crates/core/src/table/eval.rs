//! Direct evaluation of LCPDL on a table.
//!
//! Local formulas denote sets of positions and paths denote relations; both are
//! memoised by node id. Automaton paths are evaluated by a worklist over
//! (automaton state, position) pairs from each start position.

use super::{LLocal, LPath, LocalId, PathId, Step, Store, Table};
use crate::model::Algorithm;
use crate::rel::{BitSet, Rel};
use std::collections::HashMap;

pub struct Evaluator<'a> {
    store: &'a Store,
    algo: &'a Algorithm,
    table: &'a Table,
    sats: HashMap<LocalId, BitSet>,
    rels: HashMap<PathId, Rel>,
}

impl<'a> Evaluator<'a> {
    pub fn new(store: &'a Store, algo: &'a Algorithm, table: &'a Table) -> Evaluator<'a> {
        Evaluator { store, algo, table, sats: HashMap::new(), rels: HashMap::new() }
    }

    pub fn table(&self) -> &Table {
        self.table
    }

    fn n(&self) -> usize {
        self.table.len()
    }

    /// Does `a` hold at position `x`? Conjunctions are evaluated left to right and
    /// stop at the first false conjunct.
    pub fn holds(&mut self, a: LocalId, x: usize) -> bool {
        if let Some(s) = self.sats.get(&a) {
            return s.contains(x);
        }
        match self.store.local(a) {
            LLocal::And(l, r) => self.holds(l, x) && self.holds(r, x),
            LLocal::Not(b) => !self.holds(b, x),
            _ => self.sat(a).contains(x),
        }
    }

    /// The set of positions satisfying `a`.
    pub fn sat(&mut self, a: LocalId) -> BitSet {
        if let Some(s) = self.sats.get(&a) {
            return s.clone();
        }
        let n = self.n();
        let out = match self.store.local(a) {
            LLocal::True => BitSet::full(n),
            LLocal::Exact(t) => {
                let mut s = BitSet::empty(n);
                for x in 0..n {
                    if self.table.at(x) == t {
                        s.insert(x);
                    }
                }
                s
            }
            LLocal::Atom(c) => {
                let mut s = BitSet::empty(n);
                for x in 0..n {
                    if self.algo.trans(self.table.at(x)).contains(&c) {
                        s.insert(x);
                    }
                }
                s
            }
            LLocal::Not(b) => self.sat(b).complement(),
            LLocal::And(l, r) => {
                let mut s = self.sat(l);
                if !s.is_empty() {
                    s.intersect_with(&self.sat(r));
                }
                s
            }
            LLocal::Diamond(p, b) => {
                let target = self.sat(b);
                if target.is_empty() {
                    target
                } else {
                    self.rel(p).preimage(&target)
                }
            }
            LLocal::Loop(p) => self.rel(p).loops(),
        };
        self.sats.insert(a, out.clone());
        out
    }

    /// The relation denoted by `p`.
    pub fn rel(&mut self, p: PathId) -> Rel {
        if let Some(r) = self.rels.get(&p) {
            return r.clone();
        }
        let n = self.n();
        let t = self.table;
        let out = match self.store.path(p) {
            LPath::Test(a) => Rel::diagonal(&self.sat(a)),
            LPath::Step(Step::Eps) => Rel::identity(n),
            LPath::Step(Step::Right) => Rel::from_pairs(
                n,
                (0..n).filter_map(|x| {
                    let (i, j) = t.coords(x);
                    (i + 1 < t.width()).then(|| (x, t.pos(i + 1, j)))
                }),
            ),
            LPath::Step(Step::Down) => Rel::from_pairs(
                n,
                (0..n).filter_map(|x| {
                    let (i, j) = t.coords(x);
                    (j < t.height()).then(|| (x, t.pos(i, j + 1)))
                }),
            ),
            LPath::Union(a, b) => {
                let mut r = self.rel(a);
                r.union_with(&self.rel(b));
                r
            }
            LPath::Concat(a, b) => {
                let ra = self.rel(a);
                if ra.is_empty() {
                    ra
                } else {
                    ra.compose(&self.rel(b))
                }
            }
            LPath::Star(a) => self.rel(a).star(),
            LPath::Converse(a) => self.rel(a).transpose(),
            LPath::Automaton(id) => {
                let aut = self.store.automaton(id).clone();
                let edge_rels: Vec<Rel> = aut.edges.iter().map(|e| self.rel(e.1)).collect();
                let mut out = Rel::empty(n);
                for x in 0..n {
                    let mut reach: Vec<BitSet> = vec![BitSet::empty(n); aut.states];
                    let mut delta: Vec<BitSet> = vec![BitSet::empty(n); aut.states];
                    reach[aut.initial].insert(x);
                    delta[aut.initial].insert(x);
                    let mut dirty = true;
                    while dirty {
                        dirty = false;
                        let current = std::mem::replace(&mut delta, vec![BitSet::empty(n); aut.states]);
                        for (ei, &(q, _, q2)) in aut.edges.iter().enumerate() {
                            if current[q].is_empty() {
                                continue;
                            }
                            let mut img = edge_rels[ei].image_of(&current[q]);
                            img.intersect_with(&reach[q2].complement());
                            if !img.is_empty() {
                                reach[q2].union_with(&img);
                                delta[q2].union_with(&img);
                                dirty = true;
                            }
                        }
                    }
                    for &f in &aut.finals {
                        for y in reach[f].iter() {
                            out.insert(x, y);
                        }
                    }
                }
                out
            }
        };
        self.rels.insert(p, out.clone());
        out
    }
}

/// Does `root` hold at position `(i, j)` of `table`?
pub fn eval_lcpdl(store: &Store, algo: &Algorithm, table: &Table, root: LocalId, (i, j): (usize, usize)) -> bool {
    Evaluator::new(store, algo, table).holds(root, table.pos(i, j))
}

/// The relation denoted by `p` on `table`.
pub fn path_rel(store: &Store, algo: &Algorithm, table: &Table, p: PathId) -> Rel {
    Evaluator::new(store, algo, table).rel(p)
}
