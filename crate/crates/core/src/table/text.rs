//! A text format for LCPDL formulas.
//!
//! ```text
//! local := true | false | exact(t) | src(s) | goto(s) | fwd
//!        | send_left(r) | send_right(r) | recv_left(r) | recv_right(r)
//!        | guard(r < r) | guard(r = r) | set(r := r)
//!        | !local | <path>local | loop(path) | (local & local) | $lN
//! path  := ?local | eps | right | left | down | up | inv(path) | path*
//!        | (path + path) | (path . path) | $pN
//!        | auto(STATES, INITIAL, [FINAL, ...], [(q, path, q'), ...])
//! ```
//!
//! Nodes used more than once are emitted as `$lN = ...;` / `$pN = ...;` bindings
//! ahead of the main formula, so the output stays proportional to the DAG size.

use super::{LLocal, LPath, LocalId, PathAutomaton, PathId, Step, Store};
use crate::model::{Algorithm, Cmp, Constituent, Guard, Update};
use std::collections::HashMap;
use std::fmt::Write as _;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("offset {offset}: {message}")]
pub struct LcpdlParseError {
    pub offset: usize,
    pub message: String,
}

#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum Node {
    L(LocalId),
    P(PathId),
}

struct Emitter<'a> {
    store: &'a Store,
    algo: &'a Algorithm,
    uses: HashMap<Node, usize>,
    names: HashMap<Node, String>,
    bindings: String,
    next_l: usize,
    next_p: usize,
}

impl Emitter<'_> {
    fn count(&mut self, n: Node) {
        let c = self.uses.entry(n).or_insert(0);
        *c += 1;
        if *c > 1 {
            return;
        }
        match n {
            Node::L(id) => match self.store.local(id) {
                LLocal::Not(a) => self.count(Node::L(a)),
                LLocal::And(a, b) => {
                    self.count(Node::L(a));
                    self.count(Node::L(b));
                }
                LLocal::Diamond(p, a) => {
                    self.count(Node::P(p));
                    self.count(Node::L(a));
                }
                LLocal::Loop(p) => self.count(Node::P(p)),
                _ => {}
            },
            Node::P(id) => match self.store.path(id) {
                LPath::Test(a) => self.count(Node::L(a)),
                LPath::Union(a, b) | LPath::Concat(a, b) => {
                    self.count(Node::P(a));
                    self.count(Node::P(b));
                }
                LPath::Star(a) | LPath::Converse(a) => self.count(Node::P(a)),
                LPath::Automaton(x) => {
                    for e in &self.store.automaton(x).edges {
                        self.count(Node::P(e.1));
                    }
                }
                LPath::Step(_) => {}
            },
        }
    }

    fn shareable(&self, n: Node) -> bool {
        self.uses.get(&n).copied().unwrap_or(0) > 1
            && match n {
                Node::L(id) => !matches!(self.store.local(id), LLocal::True | LLocal::Exact(_) | LLocal::Atom(_)),
                Node::P(id) => !matches!(self.store.path(id), LPath::Step(_)),
            }
    }

    fn local(&mut self, id: LocalId) -> String {
        let n = Node::L(id);
        if let Some(s) = self.names.get(&n) {
            return s.clone();
        }
        let text = self.local_body(id);
        if self.shareable(n) {
            let name = format!("$l{}", self.next_l);
            self.next_l += 1;
            let _ = writeln!(self.bindings, "{name} = {text};");
            self.names.insert(n, name.clone());
            return name;
        }
        text
    }

    fn local_body(&mut self, id: LocalId) -> String {
        let a = self.algo;
        match self.store.local(id) {
            LLocal::True => "true".into(),
            LLocal::Not(b) if self.store.local(b) == LLocal::True => "false".into(),
            LLocal::Exact(t) => format!("exact({})", a.trans(t).name),
            LLocal::Atom(c) => match c {
                Constituent::Source(s) => format!("src({})", a.state_name(s)),
                Constituent::Goto(s) => format!("goto({})", a.state_name(s)),
                Constituent::Fwd => "fwd".into(),
                Constituent::SendLeft(r) => format!("send_left({})", a.reg_name(r)),
                Constituent::SendRight(r) => format!("send_right({})", a.reg_name(r)),
                Constituent::RecvLeft(r) => format!("recv_left({})", a.reg_name(r)),
                Constituent::RecvRight(r) => format!("recv_right({})", a.reg_name(r)),
                Constituent::Guard(g) => {
                    format!("guard({} {} {})", a.reg_name(g.lhs), if g.cmp == Cmp::Lt { "<" } else { "=" }, a.reg_name(g.rhs))
                }
                Constituent::Update(u) => format!("set({} := {})", a.reg_name(u.target), a.reg_name(u.source)),
            },
            LLocal::Not(b) => format!("!{}", self.local(b)),
            LLocal::And(l, r) => {
                let (l, r) = (self.local(l), self.local(r));
                format!("({l} & {r})")
            }
            LLocal::Diamond(p, b) => {
                let p = self.path(p);
                let b = self.local(b);
                format!("<{p}>{b}")
            }
            LLocal::Loop(p) => format!("loop({})", self.path(p)),
        }
    }

    fn path(&mut self, id: PathId) -> String {
        let n = Node::P(id);
        if let Some(s) = self.names.get(&n) {
            return s.clone();
        }
        let text = self.path_body(id);
        if self.shareable(n) {
            let name = format!("$p{}", self.next_p);
            self.next_p += 1;
            let _ = writeln!(self.bindings, "{name} = {text};");
            self.names.insert(n, name.clone());
            return name;
        }
        text
    }

    fn path_body(&mut self, id: PathId) -> String {
        match self.store.path(id) {
            LPath::Test(a) => format!("?{}", self.local(a)),
            LPath::Step(Step::Eps) => "eps".into(),
            LPath::Step(Step::Right) => "right".into(),
            LPath::Step(Step::Down) => "down".into(),
            LPath::Converse(b) => match self.store.path(b) {
                LPath::Step(Step::Right) => "left".into(),
                LPath::Step(Step::Down) => "up".into(),
                _ => format!("inv({})", self.path(b)),
            },
            LPath::Union(a, b) => {
                let (a, b) = (self.path(a), self.path(b));
                format!("({a} + {b})")
            }
            LPath::Concat(a, b) => {
                let (a, b) = (self.path(a), self.path(b));
                format!("({a} . {b})")
            }
            LPath::Star(a) => {
                let s = self.path(a);
                if s.starts_with('?') {
                    format!("({s})*")
                } else {
                    format!("{s}*")
                }
            }
            LPath::Automaton(x) => {
                let aut = self.store.automaton(x).clone();
                let finals: Vec<String> = aut.finals.iter().map(|f| f.to_string()).collect();
                let edges: Vec<String> = aut.edges.iter().map(|&(q, p, q2)| format!("({q}, {}, {q2})", self.path(p))).collect();
                format!("auto({}, {}, [{}], [{}])", aut.states, aut.initial, finals.join(", "), edges.join(", "))
            }
        }
    }
}

/// Renders `root` in the text format.
pub fn emit(store: &Store, algo: &Algorithm, root: LocalId) -> String {
    let mut e =
        Emitter { store, algo, uses: HashMap::new(), names: HashMap::new(), bindings: String::new(), next_l: 0, next_p: 0 };
    e.count(Node::L(root));
    let main = e.local(root);
    format!("{}{main}\n", e.bindings)
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Word(String),
    Sym(&'static str),
}

const SYMS: [&str; 16] = [":=", "(", ")", "[", "]", "<", ">", "!", "&", "?", "+", ".", "*", ",", ";", "="];

fn lex(src: &str) -> Result<Vec<(usize, Tok)>, LcpdlParseError> {
    let mut out = Vec::new();
    let bytes = src.as_bytes();
    let mut i = 0;
    let word = |c: u8| c.is_ascii_alphanumeric() || c == b'_' || c == b'\'' || c == b'$';
    while i < bytes.len() {
        let c = bytes[i];
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c == b'#' {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
        } else if word(c) {
            let start = i;
            while i < bytes.len() && word(bytes[i]) {
                i += 1;
            }
            out.push((start, Tok::Word(src[start..i].to_string())));
        } else if let Some(s) = SYMS.iter().find(|s| src[i..].starts_with(**s)) {
            out.push((i, Tok::Sym(s)));
            i += s.len();
        } else {
            return Err(LcpdlParseError { offset: i, message: format!("unexpected character {:?}", c as char) });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end_offset: usize,
    algo: &'a Algorithm,
    store: &'a mut Store,
    locals: HashMap<String, LocalId>,
    paths: HashMap<String, PathId>,
}

type PResult<T> = Result<T, LcpdlParseError>;

impl Parser<'_> {
    fn err<T>(&self, message: impl Into<String>) -> PResult<T> {
        let offset = self.toks.get(self.pos).map_or(self.end_offset, |t| t.0);
        Err(LcpdlParseError { offset, message: message.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn eat(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Some(Tok::Sym(x)) if *x == s) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, s: &str) -> PResult<()> {
        if self.eat(s) {
            Ok(())
        } else {
            self.err(format!("expected `{s}`"))
        }
    }

    fn word(&mut self) -> PResult<String> {
        match self.peek() {
            Some(Tok::Word(w)) => {
                let w = w.clone();
                self.pos += 1;
                Ok(w)
            }
            _ => self.err("expected a name"),
        }
    }

    fn number(&mut self) -> PResult<usize> {
        let w = self.word()?;
        match w.parse() {
            Ok(n) => Ok(n),
            Err(_) => {
                self.pos -= 1;
                self.err("expected a number")
            }
        }
    }

    fn named<T>(&mut self, kind: &str, f: impl Fn(&Algorithm, &str) -> Option<T>) -> PResult<T> {
        let w = self.word()?;
        match f(self.algo, &w) {
            Some(x) => Ok(x),
            None => {
                self.pos -= 1;
                self.err(format!("unknown {kind} `{w}`"))
            }
        }
    }

    fn reg(&mut self) -> PResult<crate::model::RegisterId> {
        self.named("register", |a, w| a.register(w))
    }

    fn state(&mut self) -> PResult<crate::model::StateId> {
        self.named("state", |a, w| a.state(w))
    }

    fn program(&mut self) -> PResult<LocalId> {
        while let (Some(Tok::Word(w)), Some((_, Tok::Sym("=")))) = (self.peek(), self.toks.get(self.pos + 1)) {
            let w = w.clone();
            if !w.starts_with('$') {
                break;
            }
            self.pos += 2;
            if w.starts_with("$l") {
                let f = self.local()?;
                self.locals.insert(w, f);
            } else {
                let p = self.path()?;
                self.paths.insert(w, p);
            }
            self.expect(";")?;
        }
        let f = self.local()?;
        if self.pos < self.toks.len() {
            return self.err("unexpected input after formula");
        }
        Ok(f)
    }

    fn local(&mut self) -> PResult<LocalId> {
        let l = self.unary()?;
        if self.eat("&") {
            let r = self.local()?;
            return Ok(self.store.mk_local(LLocal::And(l, r)));
        }
        Ok(l)
    }

    fn unary(&mut self) -> PResult<LocalId> {
        if self.eat("!") {
            let a = self.unary()?;
            return Ok(self.store.mk_local(LLocal::Not(a)));
        }
        if self.eat("<") {
            let p = self.path()?;
            self.expect(">")?;
            let a = self.unary()?;
            return Ok(self.store.mk_local(LLocal::Diamond(p, a)));
        }
        if self.eat("(") {
            let a = self.local()?;
            self.expect(")")?;
            return Ok(a);
        }
        let w = self.word()?;
        let s = &mut *self;
        let atom = |c| LLocal::Atom(c);
        let node = match w.as_str() {
            "true" => LLocal::True,
            "false" => {
                let t = s.store.mk_local(LLocal::True);
                LLocal::Not(t)
            }
            "fwd" => atom(Constituent::Fwd),
            "exact" => {
                s.expect("(")?;
                let t = s.named("transition", |a, w| a.transition(w))?;
                s.expect(")")?;
                LLocal::Exact(t)
            }
            "loop" => {
                s.expect("(")?;
                let p = s.path()?;
                s.expect(")")?;
                LLocal::Loop(p)
            }
            "src" | "goto" => {
                s.expect("(")?;
                let st = s.state()?;
                s.expect(")")?;
                atom(if w == "src" { Constituent::Source(st) } else { Constituent::Goto(st) })
            }
            "send_left" | "send_right" | "recv_left" | "recv_right" => {
                s.expect("(")?;
                let r = s.reg()?;
                s.expect(")")?;
                atom(match w.as_str() {
                    "send_left" => Constituent::SendLeft(r),
                    "send_right" => Constituent::SendRight(r),
                    "recv_left" => Constituent::RecvLeft(r),
                    _ => Constituent::RecvRight(r),
                })
            }
            "guard" => {
                s.expect("(")?;
                let lhs = s.reg()?;
                let cmp = if s.eat("<") {
                    Cmp::Lt
                } else if s.eat("=") {
                    Cmp::Eq
                } else {
                    return s.err("expected `<` or `=`");
                };
                let rhs = s.reg()?;
                s.expect(")")?;
                atom(Constituent::Guard(Guard { lhs, cmp, rhs }))
            }
            "set" => {
                s.expect("(")?;
                let target = s.reg()?;
                s.expect(":=")?;
                let source = s.reg()?;
                s.expect(")")?;
                atom(Constituent::Update(Update { target, source }))
            }
            _ if w.starts_with("$l") => match s.locals.get(&w) {
                Some(&id) => return Ok(id),
                None => {
                    s.pos -= 1;
                    return s.err(format!("unbound name `{w}`"));
                }
            },
            _ => {
                s.pos -= 1;
                return s.err(format!("unexpected `{w}`"));
            }
        };
        Ok(self.store.mk_local(node))
    }

    fn path(&mut self) -> PResult<PathId> {
        let a = self.seq()?;
        if self.eat("+") {
            let b = self.path()?;
            return Ok(self.store.mk_path(LPath::Union(a, b)));
        }
        Ok(a)
    }

    fn seq(&mut self) -> PResult<PathId> {
        let a = self.postfix()?;
        if self.eat(".") {
            let b = self.seq()?;
            return Ok(self.store.mk_path(LPath::Concat(a, b)));
        }
        Ok(a)
    }

    fn postfix(&mut self) -> PResult<PathId> {
        let mut a = self.path_atom()?;
        while self.eat("*") {
            a = self.store.mk_path(LPath::Star(a));
        }
        Ok(a)
    }

    fn path_atom(&mut self) -> PResult<PathId> {
        if self.eat("?") {
            let a = self.unary()?;
            return Ok(self.store.mk_path(LPath::Test(a)));
        }
        if self.eat("(") {
            let p = self.path()?;
            self.expect(")")?;
            return Ok(p);
        }
        let w = self.word()?;
        let node = match w.as_str() {
            "eps" => LPath::Step(Step::Eps),
            "right" => LPath::Step(Step::Right),
            "down" => LPath::Step(Step::Down),
            "left" | "up" => {
                let s = self.store.mk_path(LPath::Step(if w == "left" { Step::Right } else { Step::Down }));
                LPath::Converse(s)
            }
            "inv" => {
                self.expect("(")?;
                let p = self.path()?;
                self.expect(")")?;
                LPath::Converse(p)
            }
            "auto" => {
                self.expect("(")?;
                let states = self.number()?;
                self.expect(",")?;
                let initial = self.number()?;
                self.expect(",")?;
                self.expect("[")?;
                let mut finals = Vec::new();
                while !self.eat("]") {
                    if !finals.is_empty() {
                        self.expect(",")?;
                    }
                    finals.push(self.number()?);
                }
                self.expect(",")?;
                self.expect("[")?;
                let mut edges = Vec::new();
                while !self.eat("]") {
                    if !edges.is_empty() {
                        self.expect(",")?;
                    }
                    self.expect("(")?;
                    let q = self.number()?;
                    self.expect(",")?;
                    let p = self.path()?;
                    self.expect(",")?;
                    let q2 = self.number()?;
                    self.expect(")")?;
                    edges.push((q, p, q2));
                }
                self.expect(")")?;
                if initial >= states || finals.iter().chain(edges.iter().flat_map(|e| [&e.0, &e.2])).any(|&q| q >= states) {
                    return self.err("automaton state out of range");
                }
                LPath::Automaton(self.store.mk_automaton(PathAutomaton { states, initial, finals, edges }))
            }
            _ if w.starts_with("$p") => match self.paths.get(&w) {
                Some(&id) => return Ok(id),
                None => {
                    self.pos -= 1;
                    return self.err(format!("unbound name `{w}`"));
                }
            },
            _ => {
                self.pos -= 1;
                return self.err(format!("unexpected `{w}`"));
            }
        };
        Ok(self.store.mk_path(node))
    }
}

/// Parses a formula in the text format into `store`.
pub fn parse_lcpdl(store: &mut Store, algo: &Algorithm, src: &str) -> Result<LocalId, LcpdlParseError> {
    let toks = lex(src)?;
    let mut p = Parser { toks, pos: 0, end_offset: src.len(), algo, store, locals: HashMap::new(), paths: HashMap::new() };
    p.program()
}
