//! Compilation of algorithms and specifications into LCPDL over tables.
//!
//! A register value is traced through a round in three stages: 0 before reception,
//! 1 after reception, 2 after the updates. The provenance automaton `A_r^h` walks
//! from the row-0 position where a pid originates to every position whose register
//! `r` holds that pid at stage `h`.

use crate::dataspec::{DLocal, DPath, Dir, GuardCmp, Spec};
use crate::model::{
    Algorithm, Cmp, Constituent, Guard, Recv, RegisterId, Send, StateId, Transition, Update, DUMMY_NAME, DUMMY_STATE,
};
use crate::table::{LocalId, PathAutomaton, PathId, Store};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("{theta:?} does not lead from stage {from} to stage {to}")]
    InvalidStagePair { theta: Theta, from: u8, to: u8 },
    #[error("unknown state {0}")]
    UnknownState(String),
    #[error("unknown register {0}")]
    UnknownRegister(String),
}

/// The four ways a pid moves between stages.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Theta {
    Loc,
    Msg,
    Upd,
    Next,
}

impl Theta {
    pub fn stages(self) -> (u8, u8) {
        match self {
            Theta::Loc | Theta::Msg => (0, 1),
            Theta::Upd => (1, 2),
            Theta::Next => (2, 0),
        }
    }
}

/// Adds the fresh state `__pre` and the dummy transition `__pre -> s0`; idempotent.
pub fn dummy_extend(algo: &Algorithm) -> Algorithm {
    if algo.transition(DUMMY_NAME).is_some() {
        return algo.clone();
    }
    let mut out = algo.clone();
    let pre = StateId(out.states.len() as u16);
    out.states.push(DUMMY_STATE.to_string());
    out.transitions.push(Transition {
        name: DUMMY_NAME.to_string(),
        source: pre,
        send: Send::Skip,
        recv: Recv::Skip,
        guards: Vec::new(),
        updates: Vec::new(),
        target: algo.initial,
    });
    out
}

/// Index of provenance-automaton state `(h, r)`; the initial state `ι` is 0.
pub fn stage_state(h: u8, r: RegisterId, nregs: usize) -> usize {
    1 + h as usize * nregs + r.0 as usize
}

/// An algorithm compiled to LCPDL, together with the store holding its formulas.
#[derive(Clone, Debug)]
pub struct CompiledAlgorithm {
    pub store: Store,
    pub dummy_extended: Algorithm,
    pub psi_col: LocalId,
    pub psi_eq: LocalId,
    pub psi_less: LocalId,
    pub pi_less: PathId,
    /// `automata[r] = [A_r^1, A_r^2]` as automaton paths.
    pub automata: Vec<[PathId; 2]>,
    /// `ψ_col ∧ ψ_= ∧ ψ_<`, with `ψ_col` first so evaluation can stop early.
    pub psi_d: LocalId,
    /// `↪`
    pub hook: PathId,
}

struct Builder<'a> {
    s: Store,
    algo: &'a Algorithm,
    hook: PathId,
    hook_inv: PathId,
}

impl<'a> Builder<'a> {
    fn new(algo: &'a Algorithm, mut s: Store) -> Builder<'a> {
        let hook = hook(&mut s);
        let hook_inv = s.converse(hook);
        Builder { s, algo, hook, hook_inv }
    }

    fn any(&self, c: Constituent) -> bool {
        self.algo.transitions.iter().any(|t| t.contains(&c))
    }

    fn atom_test(&mut self, c: Constituent) -> PathId {
        let a = self.s.atom(c);
        self.s.test(a)
    }

    fn false_test(&mut self) -> PathId {
        let f = self.s.ff();
        self.s.test(f)
    }

    /// One direction of `msg`: `?send·(step·?fwd)*·step·?recv`.
    fn msg_branch(&mut self, send: Constituent, step: PathId, recv: Constituent) -> PathId {
        let ts = self.atom_test(send);
        let tf = self.atom_test(Constituent::Fwd);
        let tr = self.atom_test(recv);
        let hop = self.s.concat(step, tf);
        let hops = self.s.star(hop);
        self.s.seq([ts, hops, step, tr])
    }

    /// `msg_{r,r'}`, or `None` when no pair of transitions can realise it.
    fn msg(&mut self, r: RegisterId, r2: RegisterId) -> Option<PathId> {
        let mut parts = Vec::new();
        if self.any(Constituent::SendRight(r)) && self.any(Constituent::RecvLeft(r2)) {
            let h = self.hook;
            parts.push(self.msg_branch(Constituent::SendRight(r), h, Constituent::RecvLeft(r2)));
        }
        if self.any(Constituent::SendLeft(r)) && self.any(Constituent::RecvRight(r2)) {
            let h = self.hook_inv;
            parts.push(self.msg_branch(Constituent::SendLeft(r), h, Constituent::RecvRight(r2)));
        }
        parts.into_iter().reduce(|a, b| self.s.union(a, b))
    }

    fn msg_full(&mut self, r: RegisterId, r2: RegisterId) -> PathId {
        // Both branches regardless of the alphabet, as in the figure.
        let h = self.hook;
        let a = self.msg_branch(Constituent::SendRight(r), h, Constituent::RecvLeft(r2));
        let h = self.hook_inv;
        let b = self.msg_branch(Constituent::SendLeft(r), h, Constituent::RecvRight(r2));
        self.s.union(a, b)
    }

    fn loc_same(&mut self, r: RegisterId) -> PathId {
        let regs: Vec<RegisterId> = self.algo.register_ids().collect();
        let mut conj = Vec::new();
        for rb in regs {
            if let Some(m) = self.msg(rb, r) {
                let inv = self.s.converse(m);
                let d = self.s.can(inv);
                conj.push(self.s.not(d));
            }
        }
        let f = self.s.and_all(conj);
        self.s.test(f)
    }

    fn upd_same(&mut self, r: RegisterId) -> PathId {
        let regs: Vec<RegisterId> = self.algo.register_ids().filter(|&rb| rb != r).collect();
        let mut conj = Vec::new();
        for rb in regs {
            let c = Constituent::Update(Update { target: r, source: rb });
            if self.any(c) {
                let a = self.s.atom(c);
                conj.push(self.s.not(a));
            }
        }
        let f = self.s.and_all(conj);
        self.s.test(f)
    }

    /// The edges of the provenance automata; `None` labels are omitted because no
    /// transition of the algorithm can satisfy them.
    fn core_edges(&mut self) -> Vec<(usize, PathId, usize)> {
        let nr = self.algo.registers.len();
        let regs: Vec<RegisterId> = self.algo.register_ids().collect();
        let mut edges = Vec::new();
        let up = self.s.up();
        let can_up = self.s.can(up);
        let top = self.s.not(can_up);
        let t_top = self.s.test(top);
        for &r in &regs {
            edges.push((0, t_top, stage_state(0, r, nr)));
        }
        for &r in &regs {
            let loc = self.loc_same(r);
            edges.push((stage_state(0, r, nr), loc, stage_state(1, r, nr)));
            for &r2 in &regs {
                if let Some(m) = self.msg(r, r2) {
                    edges.push((stage_state(0, r, nr), m, stage_state(1, r2, nr)));
                }
            }
            for &r2 in &regs {
                let label = if r == r2 {
                    Some(self.upd_same(r))
                } else {
                    let c = Constituent::Update(Update { target: r2, source: r });
                    self.any(c).then(|| self.atom_test(c))
                };
                if let Some(l) = label {
                    edges.push((stage_state(1, r, nr), l, stage_state(2, r2, nr)));
                }
            }
            let d = self.s.down();
            edges.push((stage_state(2, r, nr), d, stage_state(0, r, nr)));
        }
        edges
    }
}

/// The path formula of Fig. 5 for `θ` from `(h, r)` to `(h', r')`, built in `store`.
pub fn theta_path(
    store: &mut Store,
    algo: &Algorithm,
    theta: Theta,
    r: RegisterId,
    r2: RegisterId,
    h: u8,
    h2: u8,
) -> Result<PathId, CompileError> {
    if theta.stages() != (h, h2) {
        return Err(CompileError::InvalidStagePair { theta, from: h, to: h2 });
    }
    let mut b = Builder::new(algo, std::mem::take(store));
    let p = match theta {
        Theta::Msg => b.msg_full(r, r2),
        Theta::Loc if r == r2 => {
            let regs: Vec<RegisterId> = algo.register_ids().collect();
            let mut conj = Vec::new();
            for rb in regs {
                let m = b.msg_full(rb, r);
                let inv = b.s.converse(m);
                let d = b.s.can(inv);
                conj.push(b.s.not(d));
            }
            let f = b.s.and_all(conj);
            b.s.test(f)
        }
        Theta::Upd if r == r2 => {
            let regs: Vec<RegisterId> = algo.register_ids().filter(|&rb| rb != r).collect();
            let mut conj = Vec::new();
            for rb in regs {
                let a = b.s.atom(Constituent::Update(Update { target: r, source: rb }));
                conj.push(b.s.not(a));
            }
            let f = b.s.and_all(conj);
            b.s.test(f)
        }
        Theta::Upd => b.atom_test(Constituent::Update(Update { target: r2, source: r })),
        Theta::Next if r == r2 => b.s.down(),
        Theta::Loc | Theta::Next => b.false_test(),
    };
    *store = b.s;
    Ok(p)
}

/// `↪ = → + ?¬⟨→⟩·←*·?¬⟨←⟩`: one step right, wrapping from the last column to the first.
pub fn hook(s: &mut Store) -> PathId {
    let r = s.right();
    let l = s.left();
    let can_r = s.can(r);
    let last = s.not(can_r);
    let can_l = s.can(l);
    let first = s.not(can_l);
    let t_last = s.test(last);
    let t_first = s.test(first);
    let ls = s.star(l);
    let wrap = s.seq([t_last, ls, t_first]);
    s.union(r, wrap)
}

/// Compiles a validated algorithm; the dummy extension is applied first.
pub fn compile(algo: &Algorithm) -> CompiledAlgorithm {
    let ext = dummy_extend(algo);
    let mut b = Builder::new(&ext, Store::new());
    let nr = ext.registers.len();
    let regs: Vec<RegisterId> = ext.register_ids().collect();
    let core = b.core_edges();
    let nstates = 1 + 3 * nr;

    let automata: Vec<[PathId; 2]> = regs
        .iter()
        .map(|&r| {
            [1u8, 2].map(|h| {
                b.s.automaton_path(PathAutomaton {
                    states: nstates,
                    initial: 0,
                    finals: vec![stage_state(h, r, nr)],
                    edges: core.clone(),
                })
            })
        })
        .collect();

    let guards: Vec<Guard> = {
        let mut g: Vec<Guard> = ext.transitions.iter().flat_map(|t| t.guards.iter().copied()).collect();
        g.sort();
        g.dedup();
        g
    };

    // ψ_= = [(→+↓)*] ⋀ (r = r' ⇒ Loop((A_r^1)⁻¹·A_{r'}^1)) over the equality guards in use.
    let everywhere = {
        let r = b.s.right();
        let d = b.s.down();
        let u = b.s.union(r, d);
        b.s.star(u)
    };
    let mut eq_conj = Vec::new();
    for g in guards.iter().filter(|g| g.cmp == Cmp::Eq) {
        let a = b.s.atom(Constituent::Guard(*g));
        let back = b.s.converse(automata[g.lhs.0 as usize][0]);
        let p = b.s.concat(back, automata[g.rhs.0 as usize][0]);
        let lp = b.s.loop_(p);
        eq_conj.push(b.s.implies(a, lp));
    }
    let psi_eq = if eq_conj.is_empty() {
        b.s.tt()
    } else {
        let body = b.s.and_all(eq_conj);
        b.s.boxed(everywhere, body)
    };

    // π_< as one automaton: a forward copy of the core, a bridge ?(r<r') from (1,r)
    // to (1,r') in a reversed copy, and an ε-edge back to the start for the closure.
    let mut edges = core.clone();
    for &(q, p, q2) in &core {
        let inv = b.s.converse(p);
        edges.push((nstates + q2, inv, nstates + q));
    }
    let lt: Vec<Guard> = guards.iter().copied().filter(|g| g.cmp == Cmp::Lt).collect();
    for g in &lt {
        let t = b.atom_test(Constituent::Guard(*g));
        edges.push((stage_state(1, g.lhs, nr), t, nstates + stage_state(1, g.rhs, nr)));
    }
    let eps = b.s.eps();
    edges.push((nstates, eps, 0));
    let pi_less = b.s.automaton_path(PathAutomaton { states: 2 * nstates, initial: 0, finals: vec![nstates], edges });

    // ψ_< = ¬⟨→*⟩Loop(π_<)
    let psi_less = if lt.is_empty() {
        b.s.tt()
    } else {
        let r = b.s.right();
        let rs = b.s.star(r);
        let lp = b.s.loop_(pi_less);
        let d = b.s.diamond(rs, lp);
        b.s.not(d)
    };

    // ψ_col: row 0 is the dummy, the dummy occurs nowhere else, and each goto
    // matches the source below it.
    let dummy = ext.dummy().expect("extended");
    let up = b.s.up();
    let down = b.s.down();
    let has_up = b.s.can(up);
    let top = b.s.not(has_up);
    let is_dummy = b.s.exact(dummy);
    let not_dummy = b.s.not(is_dummy);
    let mut col = vec![b.s.implies(top, is_dummy), b.s.implies(has_up, not_dummy)];
    for s in ext.state_ids() {
        let goto = b.s.atom(Constituent::Goto(s));
        let src = b.s.atom(Constituent::Source(s));
        let below = b.s.boxed(down, src);
        col.push(b.s.implies(goto, below));
    }
    let col_body = b.s.and_all(col);
    let psi_col = b.s.boxed(everywhere, col_body);

    let rest = b.s.and(psi_eq, psi_less);
    let psi_d = b.s.and(psi_col, rest);
    let hook = b.hook;
    CompiledAlgorithm { store: b.s, dummy_extended: ext.clone(), psi_col, psi_eq, psi_less, pi_less, automata, psi_d, hook }
}

impl CompiledAlgorithm {
    /// The provenance automaton `A_r^h` for `h ∈ {1, 2}`.
    pub fn provenance_automaton(&self, r: RegisterId, h: u8) -> PathId {
        self.automata[r.0 as usize][h as usize - 1]
    }

    fn register(&self, name: &str) -> Result<RegisterId, CompileError> {
        self.dummy_extended.register(name).ok_or_else(|| CompileError::UnknownRegister(name.to_string()))
    }

    /// `φ̃`
    pub fn translate_local(&mut self, f: &DLocal) -> Result<LocalId, CompileError> {
        Ok(match f {
            DLocal::Marked => {
                let l = self.store.left();
                let c = self.store.can(l);
                self.store.not(c)
            }
            DLocal::State(s) => {
                let id = self.dummy_extended.state(s).ok_or_else(|| CompileError::UnknownState(s.clone()))?;
                self.store.atom(Constituent::Goto(id))
            }
            DLocal::Not(a) => {
                let a = self.translate_local(a)?;
                self.store.not(a)
            }
            DLocal::And(a, b) => {
                let (a, b) = (self.translate_local(a)?, self.translate_local(b)?);
                self.store.and(a, b)
            }
            DLocal::Implies(a, b) => {
                let (a, b) = (self.translate_local(a)?, self.translate_local(b)?);
                self.store.implies(a, b)
            }
            DLocal::Box(p, a) => {
                let p = self.translate_path(p)?;
                let a = self.translate_local(a)?;
                self.store.boxed(p, a)
            }
            DLocal::Guard { r1, p1, cmp, r2, p2 } => {
                let (r1, r2) = (self.register(r1)?, self.register(r2)?);
                let (p1, p2) = (self.translate_path(p1)?, self.translate_path(p2)?);
                let a1 = self.provenance_automaton(r1, 2);
                let a2 = self.provenance_automaton(r2, 2);
                let s = &mut self.store;
                let mid = match cmp {
                    GuardCmp::Eq => None,
                    GuardCmp::Lt => Some(self.pi_less),
                    GuardCmp::Le => {
                        let e = s.eps();
                        Some(s.union(self.pi_less, e))
                    }
                    GuardCmp::Ne => {
                        let l = s.left();
                        let r = s.right();
                        let lp = s.plus(l);
                        let rp = s.plus(r);
                        Some(s.union(lp, rp))
                    }
                };
                let back = s.converse(a1);
                let ret = s.converse(p2);
                let mut parts = vec![p1, back];
                parts.extend(mid);
                parts.extend([a2, ret]);
                let p = s.seq(parts);
                s.loop_(p)
            }
        })
    }

    /// `π̃`: tests recurse, `→` becomes `↪` and `←` becomes `↩`.
    pub fn translate_path(&mut self, p: &DPath) -> Result<PathId, CompileError> {
        Ok(match p {
            DPath::Test(f) => {
                let f = self.translate_local(f)?;
                self.store.test(f)
            }
            DPath::Step(d) => match d {
                Dir::Eps => self.store.eps(),
                Dir::Right => self.hook,
                Dir::Left => self.store.converse(self.hook),
                Dir::Up => self.store.up(),
                Dir::Down => self.store.down(),
            },
            DPath::Union(a, b) => {
                let (a, b) = (self.translate_path(a)?, self.translate_path(b)?);
                self.store.union(a, b)
            }
            DPath::Concat(a, b) => {
                let (a, b) = (self.translate_path(a)?, self.translate_path(b)?);
                self.store.concat(a, b)
            }
            DPath::Star(a) => {
                let a = self.translate_path(a)?;
                self.store.star(a)
            }
        })
    }

    /// `ψ_D ∧ ¬φ̃`: its models are exactly the tables of runs that violate the spec
    /// with the first column marked.
    pub fn violation_formula(&mut self, spec: &Spec) -> Result<LocalId, CompileError> {
        let phi = self.translate_local(&spec.body)?;
        let neg = self.store.not(phi);
        Ok(self.store.and(self.psi_d, neg))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus;
    use crate::dataspec::{eval_path, parse_path, parse_spec};
    use crate::model::{enumerate_runs, parse_algorithm, Ring, Run};
    use crate::table::{eval_lcpdl, path_rel, table_of_run, Evaluator, Table};

    fn franklin() -> Algorithm {
        parse_algorithm(corpus::FRANKLIN).unwrap()
    }

    fn dkr() -> Algorithm {
        parse_algorithm(corpus::DKR).unwrap()
    }

    fn fig4() -> (CompiledAlgorithm, Run, Table) {
        let c = compile(&dkr());
        let ext = &c.dummy_extended;
        let tuples = corpus::fig4_tuples(ext).unwrap();
        let run = Run::replay(ext, Ring::new(corpus::FIG4_RING.to_vec()).unwrap(), &tuples).unwrap();
        let table = table_of_run(ext, &run).unwrap();
        (c, run, table)
    }

    /// All runs over rings with pids `1..=n` in every order, `n ≤ max_n`, up to `k` rounds.
    fn small_runs(algo: &Algorithm, max_n: usize, k: usize) -> Vec<Run> {
        let mut out = Vec::new();
        for n in 1..=max_n {
            for ring in crate::oracle::enumerate_rings(n) {
                out.extend(enumerate_runs(algo, &ring, k));
            }
        }
        out
    }

    #[test]
    fn dummy_extension() {
        let f = dummy_extend(&franklin());
        assert_eq!((f.transitions.len(), f.states.len()), (6, 4));
        assert_eq!(dummy_extend(&f), f);
        assert_eq!(dummy_extend(&dkr()).transitions.len(), 7);
        let t = f.trans(f.dummy().unwrap());
        assert_eq!((t.target, t.send, t.recv), (f.initial, Send::Skip, Recv::Skip));
        f.validate().unwrap();
    }

    #[test]
    fn stage_pairs_are_checked() {
        let a = dummy_extend(&franklin());
        let mut s = Store::new();
        let (r, r1) = (a.register("r").unwrap(), a.register("r1").unwrap());
        assert_eq!(
            theta_path(&mut s, &a, Theta::Loc, r, r, 1, 2),
            Err(CompileError::InvalidStagePair { theta: Theta::Loc, from: 1, to: 2 })
        );
        let p = theta_path(&mut s, &a, Theta::Next, r, r1, 2, 0).unwrap();
        let f = s.ff();
        assert_eq!(p, s.test(f));
        let p = theta_path(&mut s, &a, Theta::Next, r, r, 2, 0).unwrap();
        assert_eq!(p, s.down());
    }

    #[test]
    fn loc_without_sends_is_total() {
        let a = dummy_extend(&franklin());
        let t5 = a.transition("t5").unwrap();
        let table = Table::from_columns(&[vec![a.dummy().unwrap(), t5], vec![a.dummy().unwrap(), t5]]).unwrap();
        let mut s = Store::new();
        let r = a.register("r").unwrap();
        let p = theta_path(&mut s, &a, Theta::Loc, r, r, 0, 1).unwrap();
        assert_eq!(path_rel(&s, &a, &table, p), crate::rel::Rel::identity(table.len()));
    }

    #[test]
    fn hook_is_a_cyclic_permutation_of_each_row() {
        let c = compile(&franklin());
        let a = &c.dummy_extended;
        for w in 1..=4 {
            let table = Table::from_columns(&vec![vec![a.dummy().unwrap(); 3]; w]).unwrap();
            let rel = path_rel(&c.store, a, &table, c.hook);
            for j in 0..3 {
                for i in 0..w {
                    let img: Vec<usize> = rel.image(table.pos(i, j)).iter().collect();
                    assert_eq!(img, vec![table.pos((i + 1) % w, j)]);
                }
            }
        }
    }

    #[test]
    fn fig4_table_shape() {
        let (c, _, t) = fig4();
        let a = &c.dummy_extended;
        assert_eq!((t.width(), t.height()), (7, 6));
        assert_eq!(a.trans(t.get(5, 6)).name, "t5");
        let col: Vec<&str> = t.column(0).iter().map(|&x| a.trans(x).name.as_str()).collect();
        assert_eq!(col, ["__dummy", "t1", "t2", "t1", "t4", "t6", "t6"]);
    }

    #[test]
    fn fig4_messages() {
        let (c, _, t) = fig4();
        let a = c.dummy_extended.clone();
        let mut s = c.store.clone();
        let (r, r1, r2) = (a.register("r").unwrap(), a.register("r'").unwrap(), a.register("r''").unwrap());
        let m = theta_path(&mut s, &a, Theta::Msg, r1, r, 0, 1).unwrap();
        assert!(path_rel(&s, &a, &t, m).contains(t.pos(5, 4), t.pos(6, 4)));
        let m = theta_path(&mut s, &a, Theta::Msg, r1, r2, 0, 1).unwrap();
        assert!(path_rel(&s, &a, &t, m).contains(t.pos(5, 4), t.pos(0, 4)));
    }

    #[test]
    fn fig4_provenance_and_order() {
        let (c, run, t) = fig4();
        let a = &c.dummy_extended;
        let r2 = a.register("r''").unwrap();
        let rel = path_rel(&c.store, a, &t, c.provenance_automaton(r2, 1));
        assert!(rel.contains(t.pos(1, 0), t.pos(0, 6)));
        assert_eq!(run.ring.pid(1), 8);
        let id = a.id_register();
        let rel = path_rel(&c.store, a, &t, c.provenance_automaton(id, 2));
        for i in 0..7 {
            assert!(rel.contains(t.pos(i, 0), t.pos(i, 0)));
        }
        let less = path_rel(&c.store, a, &t, c.pi_less);
        assert!(less.contains(t.pos(0, 0), t.pos(1, 0)));
        for (x, y) in less.pairs() {
            let ((i, 0), (i2, 0)) = (t.coords(x), t.coords(y)) else { panic!("π_< leaves row 0") };
            assert!(run.ring.pid(i) < run.ring.pid(i2));
        }
        assert!(eval_lcpdl(&c.store, a, &t, c.psi_d, (0, 0)));
    }

    #[test]
    fn provenance_matches_simulator() {
        for algo in [franklin(), dkr()] {
            let c = compile(&algo);
            let a = &c.dummy_extended;
            for run in small_runs(a, 3, 3) {
                let t = table_of_run(a, &run).unwrap();
                let mut ev = Evaluator::new(&c.store, a, &t);
                for r in a.register_ids() {
                    for h in [1u8, 2] {
                        let rel = ev.rel(c.provenance_automaton(r, h));
                        for x in 0..t.len() {
                            let (i, j) = t.coords(x);
                            let origins: Vec<usize> = rel.transpose().image(x).iter().collect();
                            assert_eq!(origins, vec![t.pos(run.provenance(i, j, r, h), 0)]);
                        }
                    }
                }
                let less = ev.rel(c.pi_less);
                for (x, y) in less.pairs() {
                    assert!(run.ring.pid(t.coords(x).0) < run.ring.pid(t.coords(y).0));
                }
            }
        }
    }

    #[test]
    fn psi_col_rejects_malformed_tables() {
        let (c, _, t) = fig4();
        let a = &c.dummy_extended;
        let holds = |t: &Table| eval_lcpdl(&c.store, a, t, c.psi_col, (0, 0));
        assert!(holds(&t));
        let t1 = a.transition("t1").unwrap();
        assert!(!holds(&crate::table::mutate_table(&t, (2, 0), t1)));
        assert!(!holds(&crate::table::mutate_table(&t, (0, 1), a.dummy().unwrap())));
        let t2 = a.transition("t2").unwrap();
        assert!(!holds(&crate::table::mutate_table(&t, (0, 1), t2)));
        assert!(holds(&crate::table::mutate_table(&t, (0, 1), t.get(0, 1))));
    }

    #[test]
    fn strict_self_order_breaks_psi_less() {
        // One column, one round, guard r < r with both sides tracing to the same origin.
        let src = "algorithm A\nstates: s\ninit: s\nregisters: id, r\ntrans t: s: guard r < r; goto s\n";
        let c = compile(&parse_algorithm(src).unwrap());
        let a = &c.dummy_extended;
        let t = Table::from_columns(&[vec![a.dummy().unwrap(), a.transition("t").unwrap()]]).unwrap();
        assert!(eval_lcpdl(&c.store, a, &t, c.psi_col, (0, 0)));
        assert!(!eval_lcpdl(&c.store, a, &t, c.psi_less, (0, 0)));
    }

    #[test]
    fn no_order_guards_means_empty_pi_less() {
        let src = "algorithm A\nstates: s\ninit: s\nregisters: id, r\ntrans t: s: send right id; recv left r; goto s\n";
        let c = compile(&parse_algorithm(src).unwrap());
        let a = &c.dummy_extended;
        let tr = a.transition("t").unwrap();
        let d = a.dummy().unwrap();
        let t = Table::from_columns(&[vec![d, tr, tr], vec![d, tr, tr]]).unwrap();
        assert!(path_rel(&c.store, a, &t, c.pi_less).is_empty());
        assert!(eval_lcpdl(&c.store, a, &t, c.psi_less, (0, 0)));
    }

    #[test]
    fn tables_of_runs_satisfy_psi_d() {
        for algo in [franklin(), dkr()] {
            let c = compile(&algo);
            let a = &c.dummy_extended;
            for run in small_runs(a, 4, 3) {
                let t = table_of_run(a, &run).unwrap();
                assert!(eval_lcpdl(&c.store, a, &t, c.psi_d, (0, 0)), "{}", t.render(a));
            }
        }
    }

    #[test]
    fn translated_paths_agree_with_runs() {
        let paths = [
            "right",
            "left . down",
            "(?!found . right)* . ?found",
            "right* . up",
            "(?active . left + down)*",
            "?passive . right . right",
        ];
        let c0 = compile(&dkr());
        let a = c0.dummy_extended.clone();
        let mut c = c0.clone();
        let ids: Vec<PathId> = paths
            .iter()
            .map(|p| {
                let p = parse_path(&p.replace("active", "active0")).unwrap();
                c.translate_path(&p).unwrap()
            })
            .collect();
        for run in small_runs(&a, 3, 2) {
            let t = table_of_run(&a, &run).unwrap();
            for (src, &id) in paths.iter().zip(&ids) {
                let p = parse_path(&src.replace("active", "active0")).unwrap();
                let want = eval_path(&a, &run, 0, &p);
                let got = path_rel(&c.store, &a, &t, id);
                assert_eq!(got, want, "{src}");
            }
        }
    }

    #[test]
    fn guard_free_formulas_agree_with_runs() {
        let src = "spec G
let last   = [down] false
let acc    = [right*](passive | found)
let pfound = (?!found . right)* . ?found
let found1 = <pfound . right . (?!found . right)*> marked
let rr     = !(exists r@eps != r@right*)
assert [down*]((last & acc) => found1) & (<down>rr | marked)";
        let spec = parse_spec(src).unwrap();
        let mut c = compile(&dkr());
        let a = c.dummy_extended.clone();
        let f = c.translate_local(&spec.body).unwrap();
        for run in small_runs(&a, 3, 3) {
            let t = table_of_run(&a, &run).unwrap();
            let mut ev = Evaluator::new(&c.store, &a, &t);
            for x in 0..t.len() {
                let (i, j) = t.coords(x);
                let want = crate::dataspec::eval_local(&a, &run, 0, (i, j), &spec.body);
                assert_eq!(ev.holds(f, x), want, "{} at {:?}", t.render(&a), (i, j));
            }
        }
    }

    #[test]
    fn translation_of_atoms() {
        let mut c = compile(&franklin());
        let m = c.translate_local(&DLocal::Marked).unwrap();
        let l = c.store.left();
        let cl = c.store.can(l);
        assert_eq!(m, c.store.not(cl));
        let s = c.translate_local(&DLocal::State("found".into())).unwrap();
        let found = c.dummy_extended.state("found").unwrap();
        assert_eq!(s, c.store.atom(Constituent::Goto(found)));
        assert_eq!(c.translate_local(&DLocal::State("nowhere".into())), Err(CompileError::UnknownState("nowhere".into())));
        let eps = DPath::Step(Dir::Eps);
        let g = c.translate_local(&DLocal::guard("r", eps.clone(), GuardCmp::Eq, "r1", eps)).unwrap();
        let (r, r1) = (c.dummy_extended.register("r").unwrap(), c.dummy_extended.register("r1").unwrap());
        let back = c.store.converse(c.provenance_automaton(r, 2));
        let p = c.store.seq([back, c.provenance_automaton(r1, 2)]);
        assert_eq!(g, c.store.loop_(p));
    }

    #[test]
    fn compiled_size_is_polynomial() {
        for (algo, specs) in [(franklin(), vec![corpus::PHI1, corpus::PHI2]), (dkr(), vec![corpus::PHI1, corpus::PHI2])] {
            let size_d: usize = algo.transitions.len() * (algo.registers.len() + algo.states.len());
            for src in specs {
                let spec = parse_spec(src).unwrap();
                let mut c = compile(&algo);
                let f = c.violation_formula(&spec).unwrap();
                let input = size_d + spec.body.size();
                assert!(c.store.dag_size(f) <= 4 * input * input, "{} > {}", c.store.dag_size(f), input);
            }
        }
    }
}
