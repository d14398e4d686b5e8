//! Membership for the alternating automaton on a concrete word.
//!
//! Configurations `(state, position)` are explored depth-first with Tarjan's
//! algorithm. Atoms are explored lazily: once solved successors decide a clause or the
//! whole formula, the rest is skipped. Each completed strongly connected component is
//! uniformly least or greatest; it is solved by propagating the value that differs
//! from its starting point (`true` for least, `false` for greatest) with per-clause
//! counters.

use super::a2a::{Formula, Letter, StateId, A2A};
use std::sync::Arc;

/// Marks an atom that was skipped because its clause was already decided.
const SKIPPED: u32 = u32::MAX;
const NONE: u32 = u32::MAX;

struct Node {
    formula: Arc<Formula>,
    /// Start of this node's successors in the shared arena, one per atom in the
    /// order of `formula.atoms()`.
    succ_at: u32,
    value: Option<bool>,
    index: u32,
    low: u32,
    on_stack: bool,
    /// Position inside the component being solved.
    slot: u32,
}

/// Exploration state of one node on the depth-first stack.
struct Frame {
    node: u32,
    formula: Arc<Formula>,
    clause: usize,
    atom: usize,
    /// Arena index of the next atom.
    next: usize,
    /// Every atom of the current clause so far has a known value.
    solved: bool,
}

pub struct Membership<'a> {
    a2a: &'a mut A2A,
    word: &'a [Letter],
    nodes: Vec<Node>,
    succ: Vec<u32>,
    /// Node per position and state.
    ids: Vec<Vec<u32>>,
    keys: Vec<(StateId, u32)>,
    counter: u32,
}

impl<'a> Membership<'a> {
    pub fn new(a2a: &'a mut A2A, word: &'a [Letter]) -> Membership<'a> {
        Membership {
            a2a,
            word,
            nodes: Vec::new(),
            succ: Vec::new(),
            ids: vec![Vec::new(); word.len()],
            keys: Vec::new(),
            counter: 0,
        }
    }

    /// Number of configurations visited so far.
    pub fn explored(&self) -> usize {
        self.nodes.len()
    }

    fn node(&mut self, s: StateId, pos: u32) -> u32 {
        let slot = &mut self.ids[pos as usize];
        if let Some(&id) = slot.get(s as usize) {
            if id != NONE {
                return id;
            }
        }
        let formula = self.a2a.delta(s, self.word[pos as usize]);
        let id = self.nodes.len() as u32;
        let slot = &mut self.ids[pos as usize];
        if slot.len() <= s as usize {
            slot.resize(s as usize + 1, NONE);
        }
        slot[s as usize] = id;
        self.keys.push((s, pos));
        let succ_at = self.succ.len() as u32;
        let atoms: usize = formula.clauses().iter().map(Vec::len).sum();
        self.succ.resize(self.succ.len() + atoms, SKIPPED);
        self.nodes.push(Node { formula, succ_at, value: None, index: u32::MAX, low: 0, on_stack: false, slot: NONE });
        id
    }

    fn target(&self, pos: u32, d: i8) -> u32 {
        let t = pos as i64 + d as i64;
        assert!(t >= 0 && (t as usize) < self.word.len(), "the automaton never leaves the word");
        t as u32
    }

    fn frame(&self, v: u32) -> Frame {
        let n = &self.nodes[v as usize];
        Frame { node: v, formula: n.formula.clone(), clause: 0, atom: 0, next: n.succ_at as usize, solved: true }
    }

    /// Whether the automaton accepts the word from `state` at `pos`.
    pub fn accepts_from(&mut self, state: StateId, pos: u32) -> bool {
        let root = self.node(state, pos);
        if let Some(v) = self.nodes[root as usize].value {
            return v;
        }
        let mut stack: Vec<u32> = Vec::new();
        let mut frames: Vec<Frame> = Vec::new();
        self.open(root, &mut stack);
        frames.push(self.frame(root));
        while let Some(frame) = frames.last_mut() {
            let v = frame.node;
            let cnf = frame.formula.is_cnf();
            let clauses = frame.formula.clauses();
            // Account for the atom explored last, now that its value may be known.
            if frame.atom > 0 && frame.clause < clauses.len() {
                let w = self.succ[frame.next - 1];
                match self.nodes[w as usize].value {
                    // A false atom kills a DNF clause; a true one satisfies a CNF clause.
                    Some(b) if b == cnf => {
                        let len = clauses[frame.clause].len();
                        frame.next += len - frame.atom;
                        frame.atom = len;
                        frame.solved = false;
                    }
                    Some(_) => {}
                    None => frame.solved = false,
                }
            }
            if frame.clause < clauses.len() && frame.atom == clauses[frame.clause].len() {
                if frame.solved && self.nodes[v as usize].value.is_none() {
                    // A true DNF clause or a false CNF clause decides the node. Empty
                    // clauses land here directly.
                    self.nodes[v as usize].value = Some(!cnf);
                    frame.clause = clauses.len();
                } else {
                    frame.clause += 1;
                    frame.atom = 0;
                    frame.solved = true;
                    continue;
                }
            }
            if frame.clause < clauses.len() {
                let (d, s) = clauses[frame.clause][frame.atom];
                frame.atom += 1;
                frame.next += 1;
                let at = frame.next - 1;
                let pos = self.target(self.keys[v as usize].1, d);
                let w = self.node(s, pos);
                self.succ[at] = w;
                let wn = &self.nodes[w as usize];
                if wn.index == u32::MAX {
                    self.open(w, &mut stack);
                    let f = self.frame(w);
                    frames.push(f);
                } else if wn.on_stack {
                    let low = wn.index.min(self.nodes[v as usize].low);
                    self.nodes[v as usize].low = low;
                }
                continue;
            }
            frames.pop();
            if let Some(parent) = frames.last() {
                let p = parent.node as usize;
                self.nodes[p].low = self.nodes[p].low.min(self.nodes[v as usize].low);
            }
            if self.nodes[v as usize].low == self.nodes[v as usize].index {
                let mut comp = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    self.nodes[w as usize].on_stack = false;
                    comp.push(w);
                    if w == v {
                        break;
                    }
                }
                self.solve(&comp);
            }
        }
        self.nodes[root as usize].value.expect("solved")
    }

    fn open(&mut self, v: u32, stack: &mut Vec<u32>) {
        let n = &mut self.nodes[v as usize];
        n.index = self.counter;
        n.low = self.counter;
        n.on_stack = true;
        self.counter += 1;
        stack.push(v);
    }

    /// The value of `v` when every unsolved successor is read as `other`.
    fn eval_with(&self, v: u32, other: bool) -> bool {
        let n = &self.nodes[v as usize];
        let cnf = n.formula.is_cnf();
        let mut at = n.succ_at as usize;
        let mut clause_values = n.formula.clauses().iter().map(|clause| {
            let atoms = &self.succ[at..at + clause.len()];
            at += clause.len();
            let mut vals = atoms.iter().map(|&w| match w {
                // The clause was decided by another atom.
                SKIPPED => cnf,
                w => self.nodes[w as usize].value.unwrap_or(other),
            });
            if cnf {
                vals.any(|b| b)
            } else {
                vals.all(|b| b)
            }
        });
        if cnf {
            clause_values.all(|b| b)
        } else {
            clause_values.any(|b| b)
        }
    }

    /// Solves one component. Every node starts at `nu` and flips to `!nu` once its
    /// formula is forced by the values that have already flipped.
    fn solve(&mut self, comp: &[u32]) {
        let nu = self.a2a.key(self.keys[comp[0] as usize].0).is_nu();
        debug_assert!(comp.iter().all(|&v| comp.len() == 1 || self.a2a.key(self.keys[v as usize].0).is_nu() == nu));
        if comp.len() == 1 {
            // A self-loop reads the starting value; monotonicity makes one step enough.
            let v = comp[0];
            if self.nodes[v as usize].value.is_none() {
                self.nodes[v as usize].value = Some(self.eval_with(v, nu));
            }
            return;
        }
        let flip = !nu;
        // Nodes decided during exploration act as constants.
        let open: Vec<u32> = comp.iter().copied().filter(|&v| self.nodes[v as usize].value.is_none()).collect();
        for (i, &v) in open.iter().enumerate() {
            self.nodes[v as usize].slot = i as u32;
        }
        // Per node: whether any single clause suffices, and how many clauses (or atoms of
        // a clause) are still missing. Clause counters are flat, starting at `first[i]`.
        let mut any_clause = vec![false; open.len()];
        let mut need = vec![0u32; open.len()];
        let mut first = Vec::with_capacity(open.len());
        let mut pending: Vec<u32> = Vec::new();
        // Edges (successor slot, clause counter) inside the component.
        let mut edges: Vec<(u32, u32)> = Vec::new();
        let mut flipped = vec![false; open.len()];
        let mut work = Vec::new();
        for (i, &v) in open.iter().enumerate() {
            let n = &self.nodes[v as usize];
            // A clause of a DNF needs all its atoms to be true; flipping to false
            // dualizes that, so `any_clause` means "a clause flips once all its atoms have".
            let any = n.formula.is_cnf() != flip;
            any_clause[i] = any;
            first.push(pending.len());
            let mut at = n.succ_at as usize;
            let mut fired = false;
            for clause in n.formula.clauses() {
                let c = pending.len() as u32;
                let mut missing = if any { clause.len() as u32 } else { 1 };
                for &w in &self.succ[at..at + clause.len()] {
                    // Skipped atoms belong to clauses already decided by another atom.
                    if w == SKIPPED {
                        continue;
                    }
                    match self.nodes[w as usize].value {
                        None => edges.push((self.nodes[w as usize].slot, c)),
                        Some(b) if b == flip && missing > 0 => missing = if any { missing - 1 } else { 0 },
                        Some(_) => {}
                    }
                }
                at += clause.len();
                if missing == 0 {
                    fired |= any;
                } else {
                    need[i] += 1;
                }
                pending.push(missing);
            }
            if any {
                need[i] = 1
            }
            if fired || !any && need[i] == 0 {
                flipped[i] = true;
                work.push(i);
            }
        }
        // Owner of each clause counter.
        let mut owner = vec![0u32; pending.len()];
        for i in 0..open.len() {
            let end = first.get(i + 1).copied().unwrap_or(pending.len());
            owner[first[i]..end].fill(i as u32);
        }
        // Predecessor lists in compressed form, keyed by successor slot.
        let mut start = vec![0usize; open.len() + 1];
        for &(j, _) in &edges {
            start[j as usize + 1] += 1;
        }
        for j in 0..open.len() {
            start[j + 1] += start[j];
        }
        let mut fill = start.clone();
        let mut preds = vec![0u32; edges.len()];
        for &(j, c) in &edges {
            preds[fill[j as usize]] = c;
            fill[j as usize] += 1;
        }
        while let Some(j) = work.pop() {
            for &c in &preds[start[j]..start[j + 1]] {
                let i = owner[c as usize] as usize;
                let c = c as usize;
                if flipped[i] || pending[c] == 0 {
                    continue;
                }
                pending[c] = if any_clause[i] { pending[c] - 1 } else { 0 };
                if pending[c] > 0 {
                    continue;
                }
                if !any_clause[i] {
                    need[i] -= 1;
                }
                if any_clause[i] || need[i] == 0 {
                    flipped[i] = true;
                    work.push(i);
                }
            }
        }
        for (i, &v) in open.iter().enumerate() {
            self.nodes[v as usize].value = Some(if flipped[i] { flip } else { nu });
        }
    }
}

/// Whether the automaton accepts `word` from its initial state.
pub fn accepts(a2a: &mut A2A, word: &[Letter]) -> bool {
    let init = a2a.initial();
    Membership::new(a2a, word).accepts_from(init, 0)
}
