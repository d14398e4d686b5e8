//! Distributed algorithms on rings and their synchronous round semantics.

mod parse;
mod semantics;

pub use parse::{parse_algorithm, ParseError};
pub use semantics::{
    aux_left, aux_right, between, blocking_process, enumerate_runs, initial_configuration, intermediate_assignment, step,
    Configuration, Ring, RingError, Run, RunIter, StepError,
};

use std::fmt;
use thiserror::Error;

/// Index of a register in [`Algorithm::registers`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct RegisterId(pub u16);

/// Index of a state in [`Algorithm::states`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct StateId(pub u16);

/// Index of a transition in [`Algorithm::transitions`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct TransId(pub u16);

/// Process identifier.
pub type Pid = u64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Send {
    Skip,
    Fwd,
    Left(RegisterId),
    Right(RegisterId),
    /// `left!a; right!b`
    Both(RegisterId, RegisterId),
}

impl Send {
    pub fn left(self) -> Option<RegisterId> {
        match self {
            Send::Left(r) | Send::Both(r, _) => Some(r),
            _ => None,
        }
    }

    pub fn right(self) -> Option<RegisterId> {
        match self {
            Send::Right(r) | Send::Both(_, r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Recv {
    Skip,
    Left(RegisterId),
    Right(RegisterId),
    /// `left?a; right?b`
    Both(RegisterId, RegisterId),
}

impl Recv {
    pub fn left(self) -> Option<RegisterId> {
        match self {
            Recv::Left(r) | Recv::Both(r, _) => Some(r),
            _ => None,
        }
    }

    pub fn right(self) -> Option<RegisterId> {
        match self {
            Recv::Right(r) | Recv::Both(_, r) => Some(r),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Cmp {
    Lt,
    Eq,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Guard {
    pub lhs: RegisterId,
    pub cmp: Cmp,
    pub rhs: RegisterId,
}

/// `target := source`
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Update {
    pub target: RegisterId,
    pub source: RegisterId,
}

/// A single constituent of a transition; the atoms of the table logic.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constituent {
    Source(StateId),
    Goto(StateId),
    Fwd,
    SendLeft(RegisterId),
    SendRight(RegisterId),
    RecvLeft(RegisterId),
    RecvRight(RegisterId),
    Guard(Guard),
    Update(Update),
}

/// A transition. Equality ignores the name: transitions are sets of constituents.
#[derive(Clone, Debug, Eq)]
pub struct Transition {
    pub name: String,
    pub source: StateId,
    pub send: Send,
    pub recv: Recv,
    /// Sorted and deduplicated.
    pub guards: Vec<Guard>,
    /// Sorted by target.
    pub updates: Vec<Update>,
    pub target: StateId,
}

impl Transition {
    fn key(&self) -> (StateId, Send, Recv, &[Guard], &[Update], StateId) {
        (self.source, self.send, self.recv, &self.guards, &self.updates, self.target)
    }

    pub fn is_fwd(&self) -> bool {
        self.send == Send::Fwd
    }

    pub fn contains(&self, c: &Constituent) -> bool {
        match *c {
            Constituent::Source(s) => self.source == s,
            Constituent::Goto(s) => self.target == s,
            Constituent::Fwd => self.is_fwd(),
            Constituent::SendLeft(r) => self.send.left() == Some(r),
            Constituent::SendRight(r) => self.send.right() == Some(r),
            Constituent::RecvLeft(r) => self.recv.left() == Some(r),
            Constituent::RecvRight(r) => self.recv.right() == Some(r),
            Constituent::Guard(g) => self.guards.contains(&g),
            Constituent::Update(u) => self.updates.contains(&u),
        }
    }

    /// Source register of the update writing `target`, if any.
    pub fn update_of(&self, target: RegisterId) -> Option<RegisterId> {
        self.updates.iter().find(|u| u.target == target).map(|u| u.source)
    }
}

impl PartialEq for Transition {
    fn eq(&self, other: &Self) -> bool {
        self.key() == other.key()
    }
}

impl std::hash::Hash for Transition {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.key().hash(state)
    }
}

/// A distributed algorithm `(S, s0, Reg, Δ)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Algorithm {
    pub name: String,
    pub states: Vec<String>,
    pub initial: StateId,
    pub registers: Vec<String>,
    pub transitions: Vec<Transition>,
}

/// Name of the dummy transition heading every table column.
pub const DUMMY_NAME: &str = "__dummy";
/// Name of the fresh source state of the dummy transition.
pub const DUMMY_STATE: &str = "__pre";

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValidationError {
    #[error("transition {transition}: register {register} received twice")]
    DuplicateRecvRegister { transition: String, register: String },
    #[error("transition {transition}: register {register} updated twice")]
    DuplicateUpdateTarget { transition: String, register: String },
    #[error("transition {transition}: register id is never received into or updated")]
    IdRegisterWritten { transition: String },
    #[error("transition {transition}: undeclared identifier {name}")]
    UndeclaredIdentifier { transition: String, name: String },
    #[error("{0}")]
    Malformed(String),
}

impl Algorithm {
    pub fn id_register(&self) -> RegisterId {
        self.register("id").expect("validated algorithms declare id")
    }

    pub fn register(&self, name: &str) -> Option<RegisterId> {
        self.registers.iter().position(|r| r == name).map(|i| RegisterId(i as u16))
    }

    pub fn state(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s == name).map(|i| StateId(i as u16))
    }

    pub fn transition(&self, name: &str) -> Option<TransId> {
        self.transitions.iter().position(|t| t.name == name).map(|i| TransId(i as u16))
    }

    pub fn trans(&self, t: TransId) -> &Transition {
        &self.transitions[t.0 as usize]
    }

    pub fn reg_name(&self, r: RegisterId) -> &str {
        &self.registers[r.0 as usize]
    }

    pub fn state_name(&self, s: StateId) -> &str {
        &self.states[s.0 as usize]
    }

    pub fn register_ids(&self) -> impl Iterator<Item = RegisterId> + Clone {
        (0..self.registers.len() as u16).map(RegisterId)
    }

    pub fn state_ids(&self) -> impl Iterator<Item = StateId> + Clone {
        (0..self.states.len() as u16).map(StateId)
    }

    pub fn trans_ids(&self) -> impl Iterator<Item = TransId> + Clone {
        (0..self.transitions.len() as u16).map(TransId)
    }

    /// The dummy transition, if the algorithm has been dummy-extended.
    pub fn dummy(&self) -> Option<TransId> {
        self.transition(DUMMY_NAME)
    }

    /// Checks the well-formedness conditions on every transition and on the declarations.
    pub fn validate(&self) -> Result<(), ValidationError> {
        let malformed = |m: String| Err(ValidationError::Malformed(m));
        if self.states.is_empty() || self.registers.is_empty() {
            return malformed("an algorithm needs at least one state and one register".into());
        }
        let id = match self.register("id") {
            Some(id) => id,
            None => return malformed("the register id must be declared".into()),
        };
        for (i, s) in self.states.iter().enumerate() {
            if self.states[..i].contains(s) {
                return malformed(format!("state {s} declared twice"));
            }
        }
        for (i, r) in self.registers.iter().enumerate() {
            if self.registers[..i].contains(r) {
                return malformed(format!("register {r} declared twice"));
            }
        }
        if self.initial.0 as usize >= self.states.len() {
            return malformed("initial state is not declared".into());
        }
        let nreg = self.registers.len() as u16;
        let nst = self.states.len() as u16;
        for (i, t) in self.transitions.iter().enumerate() {
            let undeclared = |name: String| ValidationError::UndeclaredIdentifier { transition: t.name.clone(), name };
            if t.source.0 >= nst || t.target.0 >= nst {
                return Err(undeclared(format!("state #{}", t.source.0.max(t.target.0))));
            }
            let mut regs: Vec<RegisterId> = Vec::new();
            regs.extend(t.send.left());
            regs.extend(t.send.right());
            regs.extend(t.recv.left());
            regs.extend(t.recv.right());
            for g in &t.guards {
                regs.push(g.lhs);
                regs.push(g.rhs);
            }
            for u in &t.updates {
                regs.push(u.target);
                regs.push(u.source);
            }
            if let Some(r) = regs.iter().find(|r| r.0 >= nreg) {
                return Err(undeclared(format!("register #{}", r.0)));
            }
            if let Recv::Both(a, b) = t.recv {
                if a == b {
                    return Err(ValidationError::DuplicateRecvRegister {
                        transition: t.name.clone(),
                        register: self.reg_name(a).to_string(),
                    });
                }
            }
            if t.recv.left() == Some(id) || t.recv.right() == Some(id) {
                return Err(ValidationError::IdRegisterWritten { transition: t.name.clone() });
            }
            for (k, u) in t.updates.iter().enumerate() {
                if u.target == id {
                    return Err(ValidationError::IdRegisterWritten { transition: t.name.clone() });
                }
                if t.updates[..k].iter().any(|v| v.target == u.target) {
                    return Err(ValidationError::DuplicateUpdateTarget {
                        transition: t.name.clone(),
                        register: self.reg_name(u.target).to_string(),
                    });
                }
            }
            for other in &self.transitions[..i] {
                if other.name == t.name {
                    return malformed(format!("transition name {} used twice", t.name));
                }
                if other == t {
                    return malformed(format!("transitions {} and {} are the same set of commands", other.name, t.name));
                }
            }
        }
        Ok(())
    }

    pub fn display_transition(&self, t: &Transition) -> String {
        TransitionDisplay { algo: self, t }.to_string()
    }

    /// Renders the algorithm in the input syntax accepted by [`parse_algorithm`].
    pub fn to_source(&self) -> String {
        let mut out = format!("algorithm {}\n", self.name);
        out += &format!("states: {}\n", self.states.join(", "));
        out += &format!("init: {}\n", self.state_name(self.initial));
        out += &format!("registers: {}\n", self.registers.join(", "));
        for t in &self.transitions {
            out += &format!("trans {}\n", self.display_transition(t));
        }
        out
    }
}

struct TransitionDisplay<'a> {
    algo: &'a Algorithm,
    t: &'a Transition,
}

impl fmt::Display for TransitionDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let a = self.algo;
        let t = self.t;
        let r = |x: RegisterId| a.reg_name(x);
        let mut parts: Vec<String> = Vec::new();
        match t.send {
            Send::Skip => {}
            Send::Fwd => parts.push("fwd".into()),
            _ => {
                if let Some(x) = t.send.left() {
                    parts.push(format!("send left {}", r(x)));
                }
                if let Some(x) = t.send.right() {
                    parts.push(format!("send right {}", r(x)));
                }
            }
        }
        if let Some(x) = t.recv.left() {
            parts.push(format!("recv left {}", r(x)));
        }
        if let Some(x) = t.recv.right() {
            parts.push(format!("recv right {}", r(x)));
        }
        for g in &t.guards {
            let op = match g.cmp {
                Cmp::Lt => "<",
                Cmp::Eq => "=",
            };
            parts.push(format!("guard {} {} {}", r(g.lhs), op, r(g.rhs)));
        }
        for u in &t.updates {
            parts.push(format!("set {} := {}", r(u.target), r(u.source)));
        }
        parts.push(format!("goto {}", a.state_name(t.target)));
        write!(f, "{}: {}: {}", t.name, a.state_name(t.source), parts.join("; "))
    }
}

#[cfg(test)]
mod tests;
