//! Path formulas as unit-step automata over the word encoding.
//!
//! Every edge either tests a local formula at the current position or moves one
//! letter left or right, possibly only from certain rows. A column step is `k + 1`
//! letter moves; a row step is one move that may not cross a column boundary.

use crate::rel::BitSet;
use crate::table::{LPath, LocalId, PathId, Step, Store};
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RowCond {
    Any,
    /// Not the last row.
    NotLast,
    /// Not row 0.
    NotFirst,
}

impl RowCond {
    pub fn holds(self, row: usize, k: usize) -> bool {
        match self {
            RowCond::Any => true,
            RowCond::NotLast => row < k,
            RowCond::NotFirst => row > 0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Label {
    Test(LocalId),
    /// Move by `+1` or `-1`, allowed from rows satisfying the condition.
    Move(i8, RowCond),
}

/// An ε-free automaton with a single initial state.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Nfa {
    pub init: usize,
    pub finals: Vec<bool>,
    /// Outgoing edges per state, sorted.
    pub out: Vec<Vec<(Label, usize)>>,
    /// Incoming edges per state, as `(label, source)`, sorted.
    pub inc: Vec<Vec<(Label, usize)>>,
    /// `reach[p]` contains every state reachable from `p`, including `p`.
    pub reach: Vec<BitSet>,
}

impl Nfa {
    pub fn len(&self) -> usize {
        self.out.len()
    }

    pub fn is_empty(&self) -> bool {
        self.out.is_empty()
    }

    pub fn final_states(&self) -> impl Iterator<Item = usize> + '_ {
        self.finals.iter().enumerate().filter(|(_, &f)| f).map(|(q, _)| q)
    }
}

#[derive(Default)]
struct Builder {
    eps: Vec<Vec<usize>>,
    edges: Vec<Vec<(Label, usize)>>,
}

impl Builder {
    fn fresh(&mut self) -> usize {
        self.eps.push(Vec::new());
        self.edges.push(Vec::new());
        self.eps.len() - 1
    }

    fn eps(&mut self, a: usize, b: usize) {
        self.eps[a].push(b);
    }

    fn edge(&mut self, a: usize, l: Label, b: usize) {
        self.edges[a].push((l, b));
    }

    fn moves(&mut self, d: i8, cond: RowCond, count: usize) -> (usize, usize) {
        let start = self.fresh();
        let mut cur = start;
        for _ in 0..count {
            let next = self.fresh();
            self.edge(cur, Label::Move(d, cond), next);
            cur = next;
        }
        (start, cur)
    }

    /// Thompson construction; `rev` builds the converse.
    fn build(&mut self, s: &Store, p: PathId, rev: bool, k: usize) -> (usize, usize) {
        let dir = if rev { -1 } else { 1 };
        match s.path(p) {
            LPath::Test(a) => {
                let (x, y) = (self.fresh(), self.fresh());
                self.edge(x, Label::Test(a), y);
                (x, y)
            }
            LPath::Step(Step::Eps) => {
                let x = self.fresh();
                (x, x)
            }
            LPath::Step(Step::Right) => self.moves(dir, RowCond::Any, k + 1),
            LPath::Step(Step::Down) => {
                let cond = if rev { RowCond::NotFirst } else { RowCond::NotLast };
                self.moves(dir, cond, 1)
            }
            LPath::Union(a, b) => {
                let (x, y) = (self.fresh(), self.fresh());
                for q in [a, b] {
                    let (qa, qb) = self.build(s, q, rev, k);
                    self.eps(x, qa);
                    self.eps(qb, y);
                }
                (x, y)
            }
            LPath::Concat(a, b) => {
                let (first, second) = if rev { (b, a) } else { (a, b) };
                let (x1, y1) = self.build(s, first, rev, k);
                let (x2, y2) = self.build(s, second, rev, k);
                self.eps(y1, x2);
                (x1, y2)
            }
            LPath::Star(a) => {
                let x = self.fresh();
                let (qa, qb) = self.build(s, a, rev, k);
                self.eps(x, qa);
                self.eps(qb, x);
                (x, x)
            }
            LPath::Converse(a) => self.build(s, a, !rev, k),
            LPath::Automaton(id) => {
                let aut = s.automaton(id).clone();
                let st: Vec<usize> = (0..aut.states).map(|_| self.fresh()).collect();
                for &(q, lab, q2) in &aut.edges {
                    let (qa, qb) = self.build(s, lab, rev, k);
                    let (from, to) = if rev { (st[q2], st[q]) } else { (st[q], st[q2]) };
                    self.eps(from, qa);
                    self.eps(qb, to);
                }
                let (x, y) = (self.fresh(), self.fresh());
                if rev {
                    for &f in &aut.finals {
                        self.eps(x, st[f]);
                    }
                    self.eps(st[aut.initial], y);
                } else {
                    self.eps(x, st[aut.initial]);
                    for &f in &aut.finals {
                        self.eps(st[f], y);
                    }
                }
                (x, y)
            }
        }
    }
}

/// Compiles `p` for tables of height index `k`: removes ε-edges, trims useless
/// states and merges bisimilar states in both directions.
pub fn compile_path(s: &Store, p: PathId, k: usize) -> Nfa {
    let mut b = Builder::default();
    let (start, end) = b.build(s, p, false, k);
    let n = b.eps.len();

    // ε-closures.
    let mut closure: Vec<Vec<usize>> = Vec::with_capacity(n);
    for q in 0..n {
        let mut seen = vec![false; n];
        let mut stack = vec![q];
        seen[q] = true;
        let mut out = Vec::new();
        while let Some(x) = stack.pop() {
            out.push(x);
            for &y in &b.eps[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        closure.push(out);
    }
    let mut out: Vec<Vec<(Label, usize)>> = vec![Vec::new(); n];
    let mut finals = vec![false; n];
    for q in 0..n {
        for &c in &closure[q] {
            out[q].extend(b.edges[c].iter().copied());
            finals[q] |= c == end;
        }
        out[q].sort();
        out[q].dedup();
    }
    let (out, finals, init) = trim(out, finals, start);
    let (out, finals, init) = reduce(out, finals, init);
    finish(out, finals, init)
}

/// Keeps states that are reachable from `init` and can reach a final state.
fn trim(out: Vec<Vec<(Label, usize)>>, finals: Vec<bool>, init: usize) -> (Vec<Vec<(Label, usize)>>, Vec<bool>, usize) {
    let n = out.len();
    let mut fwd = vec![false; n];
    let mut stack = vec![init];
    fwd[init] = true;
    while let Some(x) = stack.pop() {
        for &(_, y) in &out[x] {
            if !fwd[y] {
                fwd[y] = true;
                stack.push(y);
            }
        }
    }
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (x, es) in out.iter().enumerate() {
        for &(_, y) in es {
            preds[y].push(x);
        }
    }
    let mut bwd = finals.clone();
    let mut stack: Vec<usize> = (0..n).filter(|&q| finals[q]).collect();
    while let Some(y) = stack.pop() {
        for &x in &preds[y] {
            if !bwd[x] {
                bwd[x] = true;
                stack.push(x);
            }
        }
    }
    // The initial state is kept even when the language is empty.
    let keep: Vec<bool> = (0..n).map(|q| q == init || (fwd[q] && bwd[q])).collect();
    let mut map = vec![usize::MAX; n];
    let mut next = 0;
    for q in 0..n {
        if keep[q] {
            map[q] = next;
            next += 1;
        }
    }
    let new_out =
        (0..n).filter(|&q| keep[q]).map(|q| out[q].iter().filter(|e| keep[e.1]).map(|&(l, y)| (l, map[y])).collect()).collect();
    let new_finals = (0..n).filter(|&q| keep[q]).map(|q| finals[q]).collect();
    (new_out, new_finals, map[init])
}

/// Coarsest partition compatible with `init_class` and the given edge signature.
fn refine(n: usize, init_class: Vec<usize>, edges: &[Vec<(Label, usize)>]) -> Vec<usize> {
    let mut class = init_class;
    loop {
        let mut sigs: HashMap<(usize, Vec<(Label, usize)>), usize> = HashMap::new();
        let mut next = vec![0; n];
        for q in 0..n {
            let mut sig: Vec<(Label, usize)> = edges[q].iter().map(|&(l, y)| (l, class[y])).collect();
            sig.sort();
            sig.dedup();
            let len = sigs.len();
            next[q] = *sigs.entry((class[q], sig)).or_insert(len);
        }
        let before = class.iter().collect::<std::collections::HashSet<_>>().len();
        if sigs.len() == before {
            return next;
        }
        class = next;
    }
}

fn quotient(
    out: &[Vec<(Label, usize)>],
    finals: &[bool],
    init: usize,
    class: &[usize],
) -> (Vec<Vec<(Label, usize)>>, Vec<bool>, usize) {
    let m = class.iter().max().map_or(0, |c| c + 1);
    let mut new_out = vec![Vec::new(); m];
    let mut new_finals = vec![false; m];
    for q in 0..out.len() {
        new_finals[class[q]] |= finals[q];
        for &(l, y) in &out[q] {
            new_out[class[q]].push((l, class[y]));
        }
    }
    for es in &mut new_out {
        es.sort();
        es.dedup();
    }
    (new_out, new_finals, class[init])
}

/// Merges forward-bisimilar states, then backward-bisimilar ones, until stable.
fn reduce(
    mut out: Vec<Vec<(Label, usize)>>,
    mut finals: Vec<bool>,
    mut init: usize,
) -> (Vec<Vec<(Label, usize)>>, Vec<bool>, usize) {
    loop {
        let n = out.len();
        let fwd = refine(n, finals.iter().map(|&f| f as usize).collect(), &out);
        (out, finals, init) = quotient(&out, &finals, init, &fwd);
        let n2 = out.len();
        let mut inc: Vec<Vec<(Label, usize)>> = vec![Vec::new(); n2];
        for (x, es) in out.iter().enumerate() {
            for &(l, y) in es {
                inc[y].push((l, x));
            }
        }
        let bwd = refine(n2, (0..n2).map(|q| (q == init) as usize).collect(), &inc);
        (out, finals, init) = quotient(&out, &finals, init, &bwd);
        if out.len() == n {
            return (out, finals, init);
        }
    }
}

fn finish(out: Vec<Vec<(Label, usize)>>, finals: Vec<bool>, init: usize) -> Nfa {
    let n = out.len();
    let mut inc: Vec<Vec<(Label, usize)>> = vec![Vec::new(); n];
    for (x, es) in out.iter().enumerate() {
        for &(l, y) in es {
            inc[y].push((l, x));
        }
    }
    for es in &mut inc {
        es.sort();
    }
    let reach = (0..n)
        .map(|p| {
            let mut set = BitSet::empty(n);
            let mut stack = vec![p];
            set.insert(p);
            while let Some(x) = stack.pop() {
                for &(_, y) in &out[x] {
                    if !set.contains(y) {
                        set.insert(y);
                        stack.push(y);
                    }
                }
            }
            set
        })
        .collect();
    Nfa { init, finals, out, inc, reach }
}
