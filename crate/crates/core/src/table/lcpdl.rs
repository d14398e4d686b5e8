//! Hash-consed LCPDL formulas.
//!
//! Formulas live in a [`Store`] and are referred to by [`LocalId`] and [`PathId`].
//! Structurally equal nodes share one id, so memoisation keyed by id is memoisation
//! by sub-formula identity.

use crate::model::{Constituent, TransId};
use std::collections::HashMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct PathId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AutoId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LLocal {
    True,
    Exact(TransId),
    Atom(Constituent),
    Not(LocalId),
    And(LocalId, LocalId),
    Diamond(PathId, LocalId),
    Loop(PathId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Step {
    Eps,
    Right,
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LPath {
    Test(LocalId),
    Step(Step),
    Union(PathId, PathId),
    Concat(PathId, PathId),
    Star(PathId),
    Converse(PathId),
    Automaton(AutoId),
}

/// A finite automaton whose edges are labelled with path formulas.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PathAutomaton {
    pub states: usize,
    pub initial: usize,
    pub finals: Vec<usize>,
    pub edges: Vec<(usize, PathId, usize)>,
}

/// Arena of formulas.
#[derive(Clone, Debug, Default)]
pub struct Store {
    locals: Vec<LLocal>,
    paths: Vec<LPath>,
    automata: Vec<PathAutomaton>,
    local_ids: HashMap<LLocal, LocalId>,
    path_ids: HashMap<LPath, PathId>,
    auto_ids: HashMap<PathAutomaton, AutoId>,
}

impl Store {
    pub fn new() -> Store {
        Store::default()
    }

    pub fn local(&self, id: LocalId) -> LLocal {
        self.locals[id.0 as usize]
    }

    pub fn path(&self, id: PathId) -> LPath {
        self.paths[id.0 as usize]
    }

    pub fn automaton(&self, id: AutoId) -> &PathAutomaton {
        &self.automata[id.0 as usize]
    }

    pub fn num_locals(&self) -> usize {
        self.locals.len()
    }

    pub fn num_paths(&self) -> usize {
        self.paths.len()
    }

    pub fn num_automata(&self) -> usize {
        self.automata.len()
    }

    pub fn mk_local(&mut self, node: LLocal) -> LocalId {
        if let Some(&id) = self.local_ids.get(&node) {
            return id;
        }
        let id = LocalId(self.locals.len() as u32);
        self.locals.push(node);
        self.local_ids.insert(node, id);
        id
    }

    pub fn mk_path(&mut self, node: LPath) -> PathId {
        if let Some(&id) = self.path_ids.get(&node) {
            return id;
        }
        let id = PathId(self.paths.len() as u32);
        self.paths.push(node);
        self.path_ids.insert(node, id);
        id
    }

    pub fn mk_automaton(&mut self, a: PathAutomaton) -> AutoId {
        if let Some(&id) = self.auto_ids.get(&a) {
            return id;
        }
        let id = AutoId(self.automata.len() as u32);
        self.automata.push(a.clone());
        self.auto_ids.insert(a, id);
        id
    }

    // Local constructors.

    pub fn tt(&mut self) -> LocalId {
        self.mk_local(LLocal::True)
    }

    pub fn ff(&mut self) -> LocalId {
        let t = self.tt();
        self.not(t)
    }

    pub fn exact(&mut self, t: TransId) -> LocalId {
        self.mk_local(LLocal::Exact(t))
    }

    pub fn atom(&mut self, c: Constituent) -> LocalId {
        self.mk_local(LLocal::Atom(c))
    }

    pub fn not(&mut self, a: LocalId) -> LocalId {
        match self.local(a) {
            LLocal::Not(b) => b,
            _ => self.mk_local(LLocal::Not(a)),
        }
    }

    pub fn and(&mut self, a: LocalId, b: LocalId) -> LocalId {
        let t = self.tt();
        if a == t || a == b {
            return b;
        }
        if b == t {
            return a;
        }
        self.mk_local(LLocal::And(a, b))
    }

    /// Conjunction of all items; `true` when empty.
    pub fn and_all(&mut self, items: impl IntoIterator<Item = LocalId>) -> LocalId {
        let items: Vec<LocalId> = items.into_iter().collect();
        let mut acc = match items.last() {
            Some(&x) => x,
            None => return self.tt(),
        };
        for &x in items.iter().rev().skip(1) {
            acc = self.and(x, acc);
        }
        acc
    }

    pub fn or(&mut self, a: LocalId, b: LocalId) -> LocalId {
        let (na, nb) = (self.not(a), self.not(b));
        let c = self.and(na, nb);
        self.not(c)
    }

    pub fn implies(&mut self, a: LocalId, b: LocalId) -> LocalId {
        let nb = self.not(b);
        let c = self.and(a, nb);
        self.not(c)
    }

    pub fn diamond(&mut self, p: PathId, a: LocalId) -> LocalId {
        self.mk_local(LLocal::Diamond(p, a))
    }

    /// `⟨π⟩true`
    pub fn can(&mut self, p: PathId) -> LocalId {
        let t = self.tt();
        self.diamond(p, t)
    }

    /// `[π]ψ = ¬⟨π⟩¬ψ`
    pub fn boxed(&mut self, p: PathId, a: LocalId) -> LocalId {
        let na = self.not(a);
        let d = self.diamond(p, na);
        self.not(d)
    }

    pub fn loop_(&mut self, p: PathId) -> LocalId {
        self.mk_local(LLocal::Loop(p))
    }

    // Path constructors.

    pub fn test(&mut self, a: LocalId) -> PathId {
        self.mk_path(LPath::Test(a))
    }

    pub fn step(&mut self, s: Step) -> PathId {
        self.mk_path(LPath::Step(s))
    }

    pub fn eps(&mut self) -> PathId {
        self.step(Step::Eps)
    }

    pub fn right(&mut self) -> PathId {
        self.step(Step::Right)
    }

    pub fn down(&mut self) -> PathId {
        self.step(Step::Down)
    }

    pub fn left(&mut self) -> PathId {
        let r = self.right();
        self.converse(r)
    }

    pub fn up(&mut self) -> PathId {
        let d = self.down();
        self.converse(d)
    }

    pub fn union(&mut self, a: PathId, b: PathId) -> PathId {
        if a == b {
            return a;
        }
        self.mk_path(LPath::Union(a, b))
    }

    pub fn concat(&mut self, a: PathId, b: PathId) -> PathId {
        let e = self.eps();
        if a == e {
            return b;
        }
        if b == e {
            return a;
        }
        self.mk_path(LPath::Concat(a, b))
    }

    /// Left-nested concatenation; `ε` when empty.
    pub fn seq(&mut self, items: impl IntoIterator<Item = PathId>) -> PathId {
        let mut acc = self.eps();
        for x in items {
            acc = self.concat(acc, x);
        }
        acc
    }

    pub fn star(&mut self, a: PathId) -> PathId {
        self.mk_path(LPath::Star(a))
    }

    /// `π⁺ = π · π*`
    pub fn plus(&mut self, a: PathId) -> PathId {
        let s = self.star(a);
        self.concat(a, s)
    }

    pub fn converse(&mut self, a: PathId) -> PathId {
        match self.path(a) {
            LPath::Converse(b) => b,
            LPath::Step(Step::Eps) | LPath::Test(_) => a,
            _ => self.mk_path(LPath::Converse(a)),
        }
    }

    pub fn automaton_path(&mut self, a: PathAutomaton) -> PathId {
        let id = self.mk_automaton(a);
        self.mk_path(LPath::Automaton(id))
    }

    /// Is `a` syntactically `false`?
    pub fn is_false(&self, a: LocalId) -> bool {
        matches!(self.local(a), LLocal::Not(b) if self.local(b) == LLocal::True)
    }

    /// Number of distinct nodes reachable from `root` (shared nodes counted once).
    pub fn dag_size(&self, root: LocalId) -> usize {
        let mut seen_l = vec![false; self.locals.len()];
        let mut seen_p = vec![false; self.paths.len()];
        let mut seen_a = vec![false; self.automata.len()];
        let mut stack = vec![Node::L(root)];
        let mut count = 0;
        while let Some(n) = stack.pop() {
            match n {
                Node::L(id) => {
                    if std::mem::replace(&mut seen_l[id.0 as usize], true) {
                        continue;
                    }
                    count += 1;
                    match self.local(id) {
                        LLocal::True | LLocal::Exact(_) | LLocal::Atom(_) => {}
                        LLocal::Not(a) => stack.push(Node::L(a)),
                        LLocal::And(a, b) => stack.extend([Node::L(a), Node::L(b)]),
                        LLocal::Diamond(p, a) => stack.extend([Node::P(p), Node::L(a)]),
                        LLocal::Loop(p) => stack.push(Node::P(p)),
                    }
                }
                Node::P(id) => {
                    if std::mem::replace(&mut seen_p[id.0 as usize], true) {
                        continue;
                    }
                    count += 1;
                    match self.path(id) {
                        LPath::Test(a) => stack.push(Node::L(a)),
                        LPath::Step(_) => {}
                        LPath::Union(a, b) | LPath::Concat(a, b) => stack.extend([Node::P(a), Node::P(b)]),
                        LPath::Star(a) | LPath::Converse(a) => stack.push(Node::P(a)),
                        LPath::Automaton(x) => {
                            if !std::mem::replace(&mut seen_a[x.0 as usize], true) {
                                let aut = self.automaton(x);
                                count += aut.states;
                                stack.extend(aut.edges.iter().map(|e| Node::P(e.1)));
                            }
                        }
                    }
                }
            }
        }
        count
    }
}

enum Node {
    L(LocalId),
    P(PathId),
}
