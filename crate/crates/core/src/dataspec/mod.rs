//! DataPDL specifications over runs: syntax, semantics, and the fragment check.

mod parse;

pub use parse::{parse_path, parse_spec, SpecParseError};

use crate::model::{enumerate_runs, Algorithm, Ring, Run};
use crate::rel::{BitSet, Rel};
use std::fmt;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Dir {
    Eps,
    Left,
    Right,
    Up,
    Down,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GuardCmp {
    Eq,
    Ne,
    Lt,
    Le,
}

impl GuardCmp {
    pub fn is_order(self) -> bool {
        matches!(self, GuardCmp::Lt | GuardCmp::Le)
    }

    fn holds(self, a: u64, b: u64) -> bool {
        match self {
            GuardCmp::Eq => a == b,
            GuardCmp::Ne => a != b,
            GuardCmp::Lt => a < b,
            GuardCmp::Le => a <= b,
        }
    }

    fn symbol(self) -> &'static str {
        match self {
            GuardCmp::Eq => "=",
            GuardCmp::Ne => "!=",
            GuardCmp::Lt => "<",
            GuardCmp::Le => "<=",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DLocal {
    Marked,
    State(String),
    Not(Box<DLocal>),
    And(Box<DLocal>, Box<DLocal>),
    Implies(Box<DLocal>, Box<DLocal>),
    Box(DPath, Box<DLocal>),
    /// `⟨p1⟩r1 cmp ⟨p2⟩r2`
    Guard {
        r1: String,
        p1: DPath,
        cmp: GuardCmp,
        r2: String,
        p2: DPath,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum DPath {
    Test(Box<DLocal>),
    Step(Dir),
    Union(Box<DPath>, Box<DPath>),
    Concat(Box<DPath>, Box<DPath>),
    Star(Box<DPath>),
}

impl DLocal {
    pub fn not(self) -> DLocal {
        DLocal::Not(Box::new(self))
    }

    pub fn and(self, other: DLocal) -> DLocal {
        DLocal::And(Box::new(self), Box::new(other))
    }

    pub fn implies(self, other: DLocal) -> DLocal {
        DLocal::Implies(Box::new(self), Box::new(other))
    }

    pub fn false_() -> DLocal {
        DLocal::Marked.and(DLocal::Marked.not())
    }

    pub fn true_() -> DLocal {
        DLocal::false_().not()
    }

    pub fn or(self, other: DLocal) -> DLocal {
        self.not().and(other.not()).not()
    }

    pub fn boxed(path: DPath, body: DLocal) -> DLocal {
        DLocal::Box(path, Box::new(body))
    }

    pub fn diamond(path: DPath, body: DLocal) -> DLocal {
        DLocal::boxed(path, body.not()).not()
    }

    pub fn guard(r1: &str, p1: DPath, cmp: GuardCmp, r2: &str, p2: DPath) -> DLocal {
        DLocal::Guard { r1: r1.into(), p1, cmp, r2: r2.into(), p2 }
    }

    pub fn size(&self) -> usize {
        match self {
            DLocal::Marked | DLocal::State(_) => 1,
            DLocal::Not(a) => 1 + a.size(),
            DLocal::And(a, b) | DLocal::Implies(a, b) => 1 + a.size() + b.size(),
            DLocal::Box(p, a) => 1 + p.size() + a.size(),
            DLocal::Guard { p1, p2, .. } => 1 + p1.size() + p2.size(),
        }
    }

    pub fn mentions_marked(&self) -> bool {
        match self {
            DLocal::Marked => true,
            DLocal::State(_) => false,
            DLocal::Not(a) => a.mentions_marked(),
            DLocal::And(a, b) | DLocal::Implies(a, b) => a.mentions_marked() || b.mentions_marked(),
            DLocal::Box(p, a) => p.mentions_marked() || a.mentions_marked(),
            DLocal::Guard { p1, p2, .. } => p1.mentions_marked() || p2.mentions_marked(),
        }
    }

    /// State names and register names occurring in the formula.
    pub fn identifiers(&self, states: &mut Vec<String>, regs: &mut Vec<String>) {
        match self {
            DLocal::Marked => {}
            DLocal::State(s) => states.push(s.clone()),
            DLocal::Not(a) => a.identifiers(states, regs),
            DLocal::And(a, b) | DLocal::Implies(a, b) => {
                a.identifiers(states, regs);
                b.identifiers(states, regs);
            }
            DLocal::Box(p, a) => {
                p.identifiers(states, regs);
                a.identifiers(states, regs);
            }
            DLocal::Guard { r1, p1, r2, p2, .. } => {
                regs.push(r1.clone());
                regs.push(r2.clone());
                p1.identifiers(states, regs);
                p2.identifiers(states, regs);
            }
        }
    }
}

impl DPath {
    pub fn test(f: DLocal) -> DPath {
        DPath::Test(Box::new(f))
    }

    pub fn union(self, other: DPath) -> DPath {
        DPath::Union(Box::new(self), Box::new(other))
    }

    pub fn then(self, other: DPath) -> DPath {
        DPath::Concat(Box::new(self), Box::new(other))
    }

    pub fn star(self) -> DPath {
        DPath::Star(Box::new(self))
    }

    pub fn size(&self) -> usize {
        match self {
            DPath::Test(f) => 1 + f.size(),
            DPath::Step(_) => 1,
            DPath::Union(a, b) | DPath::Concat(a, b) => 1 + a.size() + b.size(),
            DPath::Star(a) => 1 + a.size(),
        }
    }

    pub fn mentions_marked(&self) -> bool {
        match self {
            DPath::Test(f) => f.mentions_marked(),
            DPath::Step(_) => false,
            DPath::Union(a, b) | DPath::Concat(a, b) => a.mentions_marked() || b.mentions_marked(),
            DPath::Star(a) => a.mentions_marked(),
        }
    }

    fn identifiers(&self, states: &mut Vec<String>, regs: &mut Vec<String>) {
        match self {
            DPath::Test(f) => f.identifiers(states, regs),
            DPath::Step(_) => {}
            DPath::Union(a, b) | DPath::Concat(a, b) => {
                a.identifiers(states, regs);
                b.identifiers(states, regs);
            }
            DPath::Star(a) => a.identifiers(states, regs),
        }
    }
}

impl fmt::Display for Dir {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Dir::Eps => "eps",
            Dir::Left => "left",
            Dir::Right => "right",
            Dir::Up => "up",
            Dir::Down => "down",
        })
    }
}

/// Fully parenthesised rendering in the spec language.
impl fmt::Display for DLocal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DLocal::Marked => write!(f, "marked"),
            DLocal::State(s) => write!(f, "{s}"),
            DLocal::Not(a) => write!(f, "!{a}"),
            DLocal::And(a, b) => write!(f, "({a} & {b})"),
            DLocal::Implies(a, b) => write!(f, "({a} => {b})"),
            DLocal::Box(p, a) => write!(f, "[{p}]{a}"),
            DLocal::Guard { r1, p1, cmp, r2, p2 } => {
                write!(f, "(exists {r1}@({p1}) {} {r2}@({p2}))", cmp.symbol())
            }
        }
    }
}

impl fmt::Display for DPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            DPath::Test(a) => write!(f, "?{a}"),
            DPath::Step(d) => write!(f, "{d}"),
            DPath::Union(a, b) => write!(f, "({a} + {b})"),
            DPath::Concat(a, b) => write!(f, "({a} . {b})"),
            DPath::Star(a) => write!(f, "({a})*"),
        }
    }
}

/// A specification `∀rings ∀runs ∀m φ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Spec {
    pub name: String,
    /// Named sub-formulas in declaration order, already inlined into `body`.
    pub definitions: Vec<(String, Definition)>,
    pub body: DLocal,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Definition {
    Local(DLocal),
    Path(DPath),
}

impl Spec {
    /// Renders the spec in the input language (definitions are already inlined).
    pub fn to_source(&self) -> String {
        format!("spec {}\nassert {}\n", self.name, self.body)
    }

    /// Names used in the body that the algorithm does not declare.
    pub fn undeclared(&self, algo: &Algorithm) -> Vec<String> {
        let (mut states, mut regs) = (Vec::new(), Vec::new());
        self.body.identifiers(&mut states, &mut regs);
        let mut out: Vec<String> = states
            .into_iter()
            .filter(|s| algo.state(s).is_none())
            .chain(regs.into_iter().filter(|r| algo.register(r).is_none()))
            .collect();
        out.sort();
        out.dedup();
        out
    }
}

/// Positions of a run: `(i, j)` is stored at `i * (k + 1) + j`.
#[derive(Clone, Copy, Debug)]
pub struct Grid {
    pub width: usize,
    pub rows: usize,
}

impl Grid {
    pub fn of_run(run: &Run) -> Grid {
        Grid { width: run.size(), rows: run.len() + 1 }
    }

    pub fn len(&self) -> usize {
        self.width * self.rows
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn pos(&self, i: usize, j: usize) -> usize {
        i * self.rows + j
    }

    pub fn coords(&self, x: usize) -> (usize, usize) {
        (x / self.rows, x % self.rows)
    }
}

/// Evaluation of DataPDL on one run with one marked process.
pub struct RunEval<'a> {
    algo: &'a Algorithm,
    run: &'a Run,
    m: usize,
    grid: Grid,
}

impl<'a> RunEval<'a> {
    pub fn new(algo: &'a Algorithm, run: &'a Run, m: usize) -> RunEval<'a> {
        RunEval { algo, run, m, grid: Grid::of_run(run) }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    fn step(&self, d: Dir) -> Rel {
        let g = self.grid;
        let (n, rows) = (g.width, g.rows);
        let mut r = Rel::empty(g.len());
        for i in 0..n {
            for j in 0..rows {
                let x = g.pos(i, j);
                match d {
                    Dir::Eps => r.insert(x, x),
                    Dir::Right => r.insert(x, g.pos((i + 1) % n, j)),
                    Dir::Left => r.insert(x, g.pos((i + n - 1) % n, j)),
                    Dir::Down if j + 1 < rows => r.insert(x, g.pos(i, j + 1)),
                    Dir::Up if j > 0 => r.insert(x, g.pos(i, j - 1)),
                    _ => {}
                }
            }
        }
        r
    }

    /// `⟦π⟧` on this run.
    pub fn path(&self, p: &DPath) -> Rel {
        match p {
            DPath::Test(f) => Rel::diagonal(&self.sat(f)),
            DPath::Step(d) => self.step(*d),
            DPath::Union(a, b) => {
                let mut r = self.path(a);
                r.union_with(&self.path(b));
                r
            }
            DPath::Concat(a, b) => self.path(a).compose(&self.path(b)),
            DPath::Star(a) => self.path(a).star(),
        }
    }

    /// Final value of register `name` at position `x`.
    fn value(&self, x: usize, name: &str) -> Option<u64> {
        let (i, j) = self.grid.coords(x);
        let r = self.algo.register(name)?;
        Some(self.run.configs[j].regs[i][r.0 as usize])
    }

    /// Positions satisfying `f`.
    pub fn sat(&self, f: &DLocal) -> BitSet {
        let g = self.grid;
        match f {
            DLocal::Marked => {
                let mut s = BitSet::empty(g.len());
                for j in 0..g.rows {
                    s.insert(g.pos(self.m, j));
                }
                s
            }
            DLocal::State(name) => {
                let mut s = BitSet::empty(g.len());
                if let Some(st) = self.algo.state(name) {
                    for x in 0..g.len() {
                        let (i, j) = g.coords(x);
                        if self.run.configs[j].states[i] == st {
                            s.insert(x);
                        }
                    }
                }
                s
            }
            DLocal::Not(a) => self.sat(a).complement(),
            DLocal::And(a, b) => {
                let mut s = self.sat(a);
                s.intersect_with(&self.sat(b));
                s
            }
            DLocal::Implies(a, b) => {
                let mut s = self.sat(a).complement();
                s.union_with(&self.sat(b));
                s
            }
            DLocal::Box(p, a) => self.path(p).preimage(&self.sat(a).complement()).complement(),
            DLocal::Guard { r1, p1, cmp, r2, p2 } => {
                let (rel1, rel2) = (self.path(p1), self.path(p2));
                let mut s = BitSet::empty(g.len());
                for x in 0..g.len() {
                    let v1: Vec<u64> = rel1.image(x).iter().filter_map(|y| self.value(y, r1)).collect();
                    if v1.is_empty() {
                        continue;
                    }
                    let hit = rel2.image(x).iter().filter_map(|y| self.value(y, r2)).any(|b| v1.iter().any(|&a| cmp.holds(a, b)));
                    if hit {
                        s.insert(x);
                    }
                }
                s
            }
        }
    }

    pub fn holds_at(&self, f: &DLocal, i: usize, j: usize) -> bool {
        self.sat(f).contains(self.grid.pos(i, j))
    }
}

/// `⟦π⟧_{χ,m}`.
pub fn eval_path(algo: &Algorithm, run: &Run, m: usize, p: &DPath) -> Rel {
    RunEval::new(algo, run, m).path(p)
}

/// `χ, m, (i, j) ⊨ φ`.
pub fn eval_local(algo: &Algorithm, run: &Run, m: usize, pos: (usize, usize), f: &DLocal) -> bool {
    RunEval::new(algo, run, m).holds_at(f, pos.0, pos.1)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Unambiguity {
    ProvedBySyntax,
    Waived,
    Rejected,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GuardReport {
    pub guard: String,
    pub status: Unambiguity,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FragmentReport {
    pub polarity_ok: bool,
    pub guards: Vec<GuardReport>,
    pub diagnostics: Vec<String>,
}

impl FragmentReport {
    pub fn admissible(&self) -> bool {
        self.polarity_ok && self.guards.iter().all(|g| g.status != Unambiguity::Rejected)
    }

    pub fn waived(&self) -> bool {
        self.guards.iter().any(|g| g.status == Unambiguity::Waived)
    }
}

/// Checks the restrictions on order guards: positive occurrence and unambiguous paths.
pub fn check_fragment(spec: &Spec, waive_unambiguity: bool) -> FragmentReport {
    let mut rep = FragmentReport { polarity_ok: true, guards: Vec::new(), diagnostics: Vec::new() };
    fragment_local(&spec.body, true, false, waive_unambiguity, &mut rep);
    rep
}

fn fragment_local(f: &DLocal, positive: bool, in_test: bool, waive: bool, rep: &mut FragmentReport) {
    match f {
        DLocal::Marked | DLocal::State(_) => {}
        DLocal::Not(a) => fragment_local(a, !positive, in_test, waive, rep),
        DLocal::And(a, b) => {
            fragment_local(a, positive, in_test, waive, rep);
            fragment_local(b, positive, in_test, waive, rep);
        }
        DLocal::Implies(a, b) => {
            fragment_local(a, !positive, in_test, waive, rep);
            fragment_local(b, positive, in_test, waive, rep);
        }
        DLocal::Box(p, a) => {
            fragment_path(p, waive, rep);
            fragment_local(a, positive, in_test, waive, rep);
        }
        DLocal::Guard { p1, cmp, p2, .. } => {
            fragment_path(p1, waive, rep);
            fragment_path(p2, waive, rep);
            if !cmp.is_order() {
                return;
            }
            let text = f.to_string();
            if !positive || in_test {
                rep.polarity_ok = false;
                let place = if in_test { "inside a test" } else { "in a negative position" };
                rep.diagnostics.push(format!("order guard {text} occurs {place}"));
            }
            let status = if unambiguous(p1) && unambiguous(p2) {
                Unambiguity::ProvedBySyntax
            } else if waive {
                rep.diagnostics.push(format!(
                    "unambiguity of the paths in {text} is assumed, not proved; soundness of the verdict rests on that assumption"
                ));
                Unambiguity::Waived
            } else {
                rep.diagnostics.push(format!("cannot show that the paths in {text} are unambiguous"));
                Unambiguity::Rejected
            };
            rep.guards.push(GuardReport { guard: text, status });
        }
    }
}

fn fragment_path(p: &DPath, waive: bool, rep: &mut FragmentReport) {
    match p {
        DPath::Test(f) => fragment_local(f, true, true, waive, rep),
        DPath::Step(_) => {}
        DPath::Union(a, b) | DPath::Concat(a, b) => {
            fragment_path(a, waive, rep);
            fragment_path(b, waive, rep);
        }
        DPath::Star(a) => fragment_path(a, waive, rep),
    }
}

fn flatten<'a>(p: &'a DPath, out: &mut Vec<&'a DPath>) {
    match p {
        DPath::Concat(a, b) => {
            flatten(a, out);
            flatten(b, out);
        }
        _ => out.push(p),
    }
}

fn complementary(a: &DLocal, b: &DLocal) -> bool {
    matches!(a, DLocal::Not(x) if **x == *b) || matches!(b, DLocal::Not(x) if **x == *a)
}

/// Syntactic sufficient condition for a path to have at most one target from every position.
pub fn unambiguous(p: &DPath) -> bool {
    let mut parts = Vec::new();
    flatten(p, &mut parts);
    let mut i = 0;
    while i < parts.len() {
        match parts[i] {
            DPath::Step(_) | DPath::Test(_) => i += 1,
            DPath::Star(body) => {
                let next = parts.get(i + 1);
                let ok = match (&**body, next) {
                    (DPath::Concat(t, d), Some(DPath::Test(beta))) => match (&**t, &**d) {
                        (DPath::Test(alpha), DPath::Step(_)) => complementary(alpha, beta),
                        _ => false,
                    },
                    (DPath::Step(Dir::Left | Dir::Right), Some(DPath::Test(m))) => **m == DLocal::Marked,
                    _ => false,
                };
                if !ok {
                    return false;
                }
                i += 2;
            }
            _ => return false,
        }
    }
    true
}

/// Does the spec hold on every run of length at most `bound` on `ring`, for every marked process?
pub fn spec_holds_explicit(algo: &Algorithm, ring: &Ring, spec: &Spec, bound: usize) -> bool {
    enumerate_runs(algo, ring, bound).all(|run| (0..run.size()).all(|m| eval_local(algo, &run, m, (m, 0), &spec.body)))
}
