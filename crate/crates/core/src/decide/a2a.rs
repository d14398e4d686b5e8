//! Alternating two-way automata for LCPDL formulas over word-encoded tables.
//!
//! The input is `⊢ w ⊣` where `w` lists the table column by column. States carry the
//! row of the position they sit on. Transitions are positive boolean formulas over
//! `(move, state)` atoms, kept in disjunctive or conjunctive normal form.
//!
//! Acceptance: every finite branch must end in `true`; an infinite branch is
//! accepting iff it eventually stays in universal walk or loop states. Every cycle of
//! configurations stays inside one walk or loop family, so each strongly connected
//! part of the configuration graph is uniformly least or greatest.

use super::nfa::{compile_path, Label, Nfa};
use crate::model::{Algorithm, TransId};
use crate::table::{LLocal, LocalId, PathId, Store};
use std::collections::HashMap;
use std::sync::Arc;

pub type StateId = u32;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum StateKey {
    Root,
    /// Length check at the first letter.
    LenStart,
    /// Length check: the current letter is at row `c`.
    Len(u16),
    /// Whether the current symbol is a letter (or, negated, an end marker).
    Letter {
        neg: bool,
        row: u16,
    },
    Eval {
        f: LocalId,
        neg: bool,
        row: u16,
    },
    /// Walking the path automaton `nfa` in state `q`; on acceptance evaluate `cont`.
    Walk {
        nfa: u32,
        q: u32,
        cont: LocalId,
        neg: bool,
        row: u16,
    },
    /// A path of `nfa` from `p` to `q` that starts and ends at the current position.
    Loop {
        nfa: u32,
        p: u32,
        q: u32,
        neg: bool,
        row: u16,
    },
}

impl StateKey {
    /// Greatest-fixpoint states: infinite branches through them are accepting.
    pub fn is_nu(self) -> bool {
        matches!(self, StateKey::Walk { neg: true, .. } | StateKey::Loop { neg: true, .. })
    }

    pub fn row(self) -> Option<u16> {
        match self {
            StateKey::Root | StateKey::LenStart => None,
            StateKey::Len(c) => Some(c),
            StateKey::Letter { row, .. } => Some(row),
            StateKey::Eval { row, .. } | StateKey::Walk { row, .. } | StateKey::Loop { row, .. } => Some(row),
        }
    }

    /// The state accepting the complement language, where one exists.
    pub fn dual(self) -> Option<StateKey> {
        match self {
            StateKey::Letter { neg, row } => Some(StateKey::Letter { neg: !neg, row }),
            StateKey::Eval { f, neg, row } => Some(StateKey::Eval { f, neg: !neg, row }),
            StateKey::Walk { nfa, q, cont, neg, row } => Some(StateKey::Walk { nfa, q, cont, neg: !neg, row }),
            StateKey::Loop { nfa, p, q, neg, row } => Some(StateKey::Loop { nfa, p, q, neg: !neg, row }),
            _ => None,
        }
    }
}

/// Letters of the tape alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Letter {
    Start,
    End,
    T(TransId),
}

pub type Atom = (i8, StateId);

/// A positive boolean formula in normal form. `Dnf([])` is false and `Cnf([])` is true.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Formula {
    Dnf(Vec<Vec<Atom>>),
    Cnf(Vec<Vec<Atom>>),
}

impl Formula {
    pub fn tt() -> Formula {
        Formula::Cnf(Vec::new())
    }

    pub fn ff() -> Formula {
        Formula::Dnf(Vec::new())
    }

    pub fn constant(b: bool) -> Formula {
        if b {
            Formula::tt()
        } else {
            Formula::ff()
        }
    }

    pub fn atom(a: Atom) -> Formula {
        Formula::Dnf(vec![vec![a]])
    }

    pub fn clauses(&self) -> &[Vec<Atom>] {
        match self {
            Formula::Dnf(c) | Formula::Cnf(c) => c,
        }
    }

    pub fn is_cnf(&self) -> bool {
        matches!(self, Formula::Cnf(_))
    }

    /// Every atom mentioned.
    pub fn atoms(&self) -> impl Iterator<Item = Atom> + '_ {
        self.clauses().iter().flatten().copied()
    }
}

/// An alternating two-way automaton accepting `{encode(T) : T, (1,0) ⊨ ψ}` for tables
/// of height index `k`. States and transitions are built on demand.
pub struct A2A {
    store: Arc<Store>,
    algo: Arc<Algorithm>,
    root_formula: LocalId,
    k: usize,
    nfas: Vec<Nfa>,
    nfa_ids: HashMap<PathId, u32>,
    states: Vec<StateKey>,
    ids: HashMap<StateKey, StateId>,
    /// Cached transitions, per state and letter index.
    delta: Vec<Vec<Option<Arc<Formula>>>>,
}

impl A2A {
    pub fn new(store: Arc<Store>, algo: Arc<Algorithm>, psi: LocalId, k: usize) -> A2A {
        assert!(k >= 1, "tables have at least one round");
        let mut a = A2A {
            store,
            algo,
            root_formula: psi,
            k,
            nfas: Vec::new(),
            nfa_ids: HashMap::new(),
            states: Vec::new(),
            ids: HashMap::new(),
            delta: Vec::new(),
        };
        a.intern(StateKey::Root);
        a
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn algo(&self) -> &Algorithm {
        &self.algo
    }

    pub fn initial(&self) -> StateId {
        0
    }

    /// The letters a table cell may carry.
    pub fn alphabet(&self) -> Vec<TransId> {
        self.algo.trans_ids().collect()
    }

    /// Number of states created so far.
    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn key(&self, s: StateId) -> StateKey {
        self.states[s as usize]
    }

    /// The id of an existing state.
    pub fn lookup(&self, key: StateKey) -> Option<StateId> {
        self.ids.get(&key).copied()
    }

    pub fn nfa(&self, id: u32) -> &Nfa {
        &self.nfas[id as usize]
    }

    pub fn intern(&mut self, key: StateKey) -> StateId {
        if let Some(&id) = self.ids.get(&key) {
            return id;
        }
        let id = self.states.len() as StateId;
        self.states.push(key);
        self.ids.insert(key, id);
        id
    }

    fn nfa_of(&mut self, p: PathId) -> u32 {
        if let Some(&id) = self.nfa_ids.get(&p) {
            return id;
        }
        let nfa = compile_path(&self.store, p, self.k);
        let id = self.nfas.len() as u32;
        self.nfas.push(nfa);
        self.nfa_ids.insert(p, id);
        id
    }

    fn wrap(&self, row: u16, d: i8) -> u16 {
        let m = self.k as i32 + 1;
        ((row as i32 + d as i32).rem_euclid(m)) as u16
    }

    /// The transition formula of `s` on `letter`.
    pub fn delta(&mut self, s: StateId, letter: Letter) -> Arc<Formula> {
        let li = match letter {
            Letter::Start => 0,
            Letter::End => 1,
            Letter::T(t) => t.0 as usize + 2,
        };
        if let Some(Some(f)) = self.delta.get(s as usize).and_then(|row| row.get(li)) {
            return f.clone();
        }
        let f = Arc::new(self.compute_delta(self.key(s), letter));
        if self.delta.len() <= s as usize {
            self.delta.resize(s as usize + 1, Vec::new());
        }
        let row = &mut self.delta[s as usize];
        if row.len() <= li {
            row.resize(li + 1, None);
        }
        row[li] = Some(f.clone());
        f
    }

    fn compute_delta(&mut self, key: StateKey, letter: Letter) -> Formula {
        let t = match letter {
            Letter::T(t) => Some(t),
            _ => None,
        };
        match key {
            StateKey::Root => {
                if letter != Letter::Start {
                    return Formula::ff();
                }
                let e = self.intern(StateKey::Eval { f: self.root_formula, neg: false, row: 0 });
                let l = self.intern(StateKey::LenStart);
                Formula::Dnf(vec![vec![(1, e), (1, l)]])
            }
            StateKey::LenStart => match t {
                Some(_) => {
                    let next = self.intern(StateKey::Len(self.wrap(0, 1)));
                    Formula::atom((1, next))
                }
                None => Formula::ff(),
            },
            StateKey::Len(c) => match letter {
                Letter::End => Formula::constant(c == 0),
                Letter::Start => Formula::ff(),
                Letter::T(_) => {
                    let next = self.intern(StateKey::Len(self.wrap(c, 1)));
                    Formula::atom((1, next))
                }
            },
            StateKey::Letter { neg, .. } => Formula::constant(t.is_some() != neg),
            StateKey::Eval { f, neg, row } => match t {
                Some(t) => self.eval_delta(f, neg, row, t),
                None => Formula::constant(neg),
            },
            StateKey::Walk { nfa, q, cont, neg, row } => {
                if t.is_none() {
                    return Formula::constant(neg);
                }
                self.walk_delta(nfa, q, cont, neg, row)
            }
            StateKey::Loop { nfa, p, q, neg, row } => {
                if t.is_none() {
                    return Formula::constant(neg);
                }
                self.loop_delta(nfa, p, q, neg, row)
            }
        }
    }

    fn eval_delta(&mut self, f: LocalId, neg: bool, row: u16, t: TransId) -> Formula {
        let lit = |b: bool| Formula::constant(b != neg);
        match self.store.local(f) {
            LLocal::True => lit(true),
            LLocal::Exact(u) => lit(u == t),
            LLocal::Atom(c) => lit(self.algo.trans(t).contains(&c)),
            LLocal::Not(a) => {
                let s = self.intern(StateKey::Eval { f: a, neg: !neg, row });
                Formula::atom((0, s))
            }
            LLocal::And(a, b) => {
                let sa = self.intern(StateKey::Eval { f: a, neg, row });
                let sb = self.intern(StateKey::Eval { f: b, neg, row });
                if neg {
                    Formula::Dnf(vec![vec![(0, sa)], vec![(0, sb)]])
                } else {
                    Formula::Dnf(vec![vec![(0, sa), (0, sb)]])
                }
            }
            LLocal::Diamond(p, c) => {
                let nfa = self.nfa_of(p);
                let q = self.nfas[nfa as usize].init as u32;
                let s = self.intern(StateKey::Walk { nfa, q, cont: c, neg, row });
                Formula::atom((0, s))
            }
            LLocal::Loop(p) => {
                let nfa = self.nfa_of(p);
                let n = &self.nfas[nfa as usize];
                let init = n.init;
                let finals: Vec<usize> = n.final_states().filter(|&f| n.reach[init].contains(f)).collect();
                let atoms: Vec<Atom> = finals
                    .into_iter()
                    .map(|f| (0, self.intern(StateKey::Loop { nfa, p: init as u32, q: f as u32, neg, row })))
                    .collect();
                if neg {
                    Formula::Cnf(atoms.into_iter().map(|a| vec![a]).collect())
                } else {
                    Formula::Dnf(atoms.into_iter().map(|a| vec![a]).collect())
                }
            }
        }
    }

    fn walk_delta(&mut self, nfa: u32, q: u32, cont: LocalId, neg: bool, row: u16) -> Formula {
        let n = &self.nfas[nfa as usize];
        let is_final = n.finals[q as usize];
        let edges = n.out[q as usize].clone();
        let mut clauses = Vec::new();
        if is_final {
            let c = self.intern(StateKey::Eval { f: cont, neg, row });
            clauses.push(vec![(0, c)]);
        }
        for (l, q2) in edges {
            match l {
                Label::Test(a) => {
                    let e = self.intern(StateKey::Eval { f: a, neg, row });
                    let w = self.intern(StateKey::Walk { nfa, q: q2 as u32, cont, neg, row });
                    clauses.push(vec![(0, e), (0, w)]);
                }
                Label::Move(d, cond) => {
                    if cond.holds(row as usize, self.k) {
                        let row2 = self.wrap(row, d);
                        let w = self.intern(StateKey::Walk { nfa, q: q2 as u32, cont, neg, row: row2 });
                        clauses.push(vec![(d, w)]);
                    }
                }
            }
        }
        if neg {
            Formula::Cnf(clauses)
        } else {
            Formula::Dnf(clauses)
        }
    }

    fn loop_delta(&mut self, nfa: u32, p: u32, q: u32, neg: bool, row: u16) -> Formula {
        let (p, q) = (p as usize, q as usize);
        let n = &self.nfas[nfa as usize];
        if p == q {
            return Formula::constant(!neg);
        }
        let mut plan: Vec<Vec<(i8, StateKey)>> = Vec::new();
        for &(l, p2) in &n.out[p] {
            match l {
                Label::Test(a) => {
                    if n.reach[p2].contains(q) {
                        plan.push(vec![
                            (0, StateKey::Eval { f: a, neg, row }),
                            (0, StateKey::Loop { nfa, p: p2 as u32, q: q as u32, neg, row }),
                        ]);
                    }
                }
                Label::Move(d, cond) => {
                    if !cond.holds(row as usize, self.k) {
                        continue;
                    }
                    let row2 = self.wrap(row, d);
                    // Leave in direction d, loop out there, and come back with the first
                    // move that returns to this position.
                    for q2 in n.reach[p2].iter() {
                        for &(l2, m) in &n.out[q2] {
                            let Label::Move(d2, cond2) = l2 else { continue };
                            if d2 != -d || !cond2.holds(row2 as usize, self.k) || !n.reach[m].contains(q) {
                                continue;
                            }
                            let mut clause = vec![(0, StateKey::Loop { nfa, p: m as u32, q: q as u32, neg, row })];
                            if p2 != q2 {
                                clause.insert(0, (d, StateKey::Loop { nfa, p: p2 as u32, q: q2 as u32, neg, row: row2 }));
                            } else {
                                // An empty excursion still has to land on a letter.
                                clause.insert(0, (d, StateKey::Letter { neg, row: row2 }));
                            }
                            if m == q {
                                clause.pop();
                            }
                            plan.push(clause);
                        }
                    }
                }
            }
        }
        let mut clauses: Vec<Vec<Atom>> =
            plan.into_iter().map(|c| c.into_iter().map(|(d, k)| (d, self.intern(k))).collect()).collect();
        clauses.sort();
        clauses.dedup();
        // Planned atoms already carry the polarity, so the negative case is the dual CNF.
        if neg {
            Formula::Cnf(clauses)
        } else {
            Formula::Dnf(clauses)
        }
    }
}
