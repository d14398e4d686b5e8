//! Rings, configurations, the step relation, and run enumeration.
//!
//! Processes and rows are 0-based throughout: process `i` of a ring of size `n`
//! has left neighbour `i-1 mod n` and right neighbour `i+1 mod n`.

use super::*;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RingError {
    #[error("a ring needs at least one process")]
    Empty,
    #[error("pid {0} occurs twice")]
    DuplicatePid(Pid),
}

/// A ring `(n: p_1, ..., p_n)` with pairwise distinct pids.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Ring {
    pids: Vec<Pid>,
}

impl Ring {
    pub fn new(pids: Vec<Pid>) -> Result<Ring, RingError> {
        if pids.is_empty() {
            return Err(RingError::Empty);
        }
        for (i, p) in pids.iter().enumerate() {
            if pids[..i].contains(p) {
                return Err(RingError::DuplicatePid(*p));
            }
        }
        Ok(Ring { pids })
    }

    pub fn size(&self) -> usize {
        self.pids.len()
    }

    pub fn pids(&self) -> &[Pid] {
        &self.pids
    }

    pub fn pid(&self, i: usize) -> Pid {
        self.pids[i]
    }

    /// Process holding pid `p`.
    pub fn process_of(&self, p: Pid) -> Option<usize> {
        self.pids.iter().position(|&q| q == p)
    }

    /// The ring shifted left by `s`: process `i` of the result is process `i+s` of `self`.
    pub fn rotate(&self, s: usize) -> Ring {
        let n = self.size();
        Ring { pids: (0..n).map(|i| self.pids[(i + s) % n]).collect() }
    }
}

/// Per-process control state and register valuation.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Configuration {
    pub states: Vec<StateId>,
    /// `regs[i][r]` is the pid stored in register `r` of process `i`.
    pub regs: Vec<Vec<Pid>>,
}

pub fn initial_configuration(algo: &Algorithm, ring: &Ring) -> Configuration {
    let nreg = algo.registers.len();
    Configuration { states: vec![algo.initial; ring.size()], regs: ring.pids().iter().map(|&p| vec![p; nreg]).collect() }
}

/// `Between(i, j)` on a ring of size `n`: the processes strictly between `i` and `j`
/// walking rightwards, wrapping around; all other processes when `i == j` and `n > 1`.
pub fn between(i: usize, j: usize, n: usize) -> Vec<usize> {
    if i < j {
        (i + 1..j).collect()
    } else {
        (0..j).chain(i + 1..n).collect()
    }
}

/// Does register `r` of process `i` reach register `r2` of process `j` travelling rightwards?
pub fn aux_right(algo: &Algorithm, tuple: &[TransId], r: RegisterId, i: usize, r2: RegisterId, j: usize) -> bool {
    let n = tuple.len();
    algo.trans(tuple[i]).send.right() == Some(r)
        && algo.trans(tuple[j]).recv.left() == Some(r2)
        && between(i, j, n).iter().all(|&k| algo.trans(tuple[k]).is_fwd())
}

/// Mirror image of [`aux_right`]: `r@i` travels leftwards into `r2@j`.
pub fn aux_left(algo: &Algorithm, tuple: &[TransId], r: RegisterId, i: usize, r2: RegisterId, j: usize) -> bool {
    let n = tuple.len();
    algo.trans(tuple[i]).send.left() == Some(r)
        && algo.trans(tuple[j]).recv.right() == Some(r2)
        && between(j, i, n).iter().all(|&k| algo.trans(tuple[k]).is_fwd())
}

/// The unique process whose message arrives at `j` travelling rightwards (from the left),
/// with the register it sends.
fn sender_from_left(algo: &Algorithm, tuple: &[TransId], j: usize) -> Option<(usize, RegisterId)> {
    let n = tuple.len();
    for step in 1..=n {
        let i = (j + n - step % n) % n;
        let t = algo.trans(tuple[i]);
        if !t.is_fwd() {
            return t.send.right().map(|r| (i, r));
        }
    }
    None
}

fn sender_from_right(algo: &Algorithm, tuple: &[TransId], j: usize) -> Option<(usize, RegisterId)> {
    let n = tuple.len();
    for step in 1..=n {
        let i = (j + step) % n;
        let t = algo.trans(tuple[i]);
        if !t.is_fwd() {
            return t.send.left().map(|r| (i, r));
        }
    }
    None
}

/// The intermediate valuation `ρ̂` after message reception.
pub fn intermediate_assignment(algo: &Algorithm, config: &Configuration, tuple: &[TransId]) -> Vec<Vec<Pid>> {
    let mut hat = config.regs.clone();
    for (j, &tj) in tuple.iter().enumerate() {
        let t = algo.trans(tj);
        if let Some(r2) = t.recv.left() {
            if let Some((i, r)) = sender_from_left(algo, tuple, j) {
                hat[j][r2.0 as usize] = config.regs[i][r.0 as usize];
            }
        }
        if let Some(r2) = t.recv.right() {
            if let Some((i, r)) = sender_from_right(algo, tuple, j) {
                hat[j][r2.0 as usize] = config.regs[i][r.0 as usize];
            }
        }
    }
    hat
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("tuple has {tuple} entries but the ring has {ring} processes")]
    SizeMismatch { tuple: usize, ring: usize },
}

/// Successor valuation from `ρ̂` and the tuple, ignoring state matching and guards.
pub(crate) fn apply_updates(algo: &Algorithm, hat: &[Vec<Pid>], tuple: &[TransId]) -> Vec<Vec<Pid>> {
    hat.iter()
        .zip(tuple)
        .map(|(h, &tj)| {
            let mut next = h.clone();
            for u in &algo.trans(tj).updates {
                next[u.target.0 as usize] = h[u.source.0 as usize];
            }
            next
        })
        .collect()
}

pub(crate) fn guards_hold(algo: &Algorithm, hat: &[Vec<Pid>], tuple: &[TransId]) -> bool {
    hat.iter().zip(tuple).all(|(h, &tj)| {
        algo.trans(tj).guards.iter().all(|g| {
            let (a, b) = (h[g.lhs.0 as usize], h[g.rhs.0 as usize]);
            match g.cmp {
                Cmp::Lt => a < b,
                Cmp::Eq => a == b,
            }
        })
    })
}

fn step_full(
    algo: &Algorithm,
    config: &Configuration,
    tuple: &[TransId],
) -> Result<Option<(Configuration, Vec<Vec<Pid>>)>, StepError> {
    if tuple.len() != config.states.len() {
        return Err(StepError::SizeMismatch { tuple: tuple.len(), ring: config.states.len() });
    }
    if tuple.iter().zip(&config.states).any(|(&t, &s)| algo.trans(t).source != s) {
        return Ok(None);
    }
    let hat = intermediate_assignment(algo, config, tuple);
    if !guards_hold(algo, &hat, tuple) {
        return Ok(None);
    }
    let regs = apply_updates(algo, &hat, tuple);
    let states = tuple.iter().map(|&t| algo.trans(t).target).collect();
    Ok(Some((Configuration { states, regs }, hat)))
}

/// One synchronous round: `Some(C')` iff `C ⇝^tuple C'`.
pub fn step(algo: &Algorithm, config: &Configuration, tuple: &[TransId]) -> Result<Option<Configuration>, StepError> {
    Ok(step_full(algo, config, tuple)?.map(|(c, _)| c))
}

/// The first process that keeps `tuple` from firing in `config`: its transition
/// starts in another state or one of its guards fails. `None` if the round applies.
pub fn blocking_process(algo: &Algorithm, config: &Configuration, tuple: &[TransId]) -> Option<usize> {
    if let Some(i) = tuple.iter().zip(&config.states).position(|(&t, &s)| algo.trans(t).source != s) {
        return Some(i);
    }
    let hat = intermediate_assignment(algo, config, tuple);
    (0..tuple.len()).find(|&i| !guards_hold(algo, &hat[i..=i], &tuple[i..=i]))
}

/// A run `C_0 ⇝ C_1 ⇝ ... ⇝ C_k` together with provenance instrumentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Run {
    pub ring: Ring,
    /// `C_0 .. C_k`.
    pub configs: Vec<Configuration>,
    /// `tuples[j-1]` fires in round `j`.
    pub tuples: Vec<Vec<TransId>>,
    /// `hats[j-1]` is the intermediate valuation of round `j`.
    pub hats: Vec<Vec<Vec<Pid>>>,
}

impl Run {
    /// The empty prefix `C_0`; not itself a run until a round is pushed.
    pub fn start(algo: &Algorithm, ring: Ring) -> Run {
        let c0 = initial_configuration(algo, &ring);
        Run { ring, configs: vec![c0], tuples: Vec::new(), hats: Vec::new() }
    }

    /// Builds a run by replaying tuples; `Err(round)`, 1-based, if a round is inapplicable.
    pub fn replay(algo: &Algorithm, ring: Ring, tuples: &[Vec<TransId>]) -> Result<Run, usize> {
        let mut run = Run::start(algo, ring);
        for (j, t) in tuples.iter().enumerate() {
            if !run.push(algo, t) {
                return Err(j + 1);
            }
        }
        Ok(run)
    }

    /// Appends a round if applicable.
    pub fn push(&mut self, algo: &Algorithm, tuple: &[TransId]) -> bool {
        match step_full(algo, self.last(), tuple) {
            Ok(Some((c, hat))) => {
                self.configs.push(c);
                self.tuples.push(tuple.to_vec());
                self.hats.push(hat);
                true
            }
            _ => false,
        }
    }

    pub fn size(&self) -> usize {
        self.ring.size()
    }

    /// Number of rounds `k`.
    pub fn len(&self) -> usize {
        self.tuples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tuples.is_empty()
    }

    pub fn last(&self) -> &Configuration {
        self.configs.last().expect("a run has an initial configuration")
    }

    /// The prefix with `k` rounds.
    pub fn prefix(&self, k: usize) -> Run {
        Run {
            ring: self.ring.clone(),
            configs: self.configs[..=k].to_vec(),
            tuples: self.tuples[..k].to_vec(),
            hats: self.hats[..k].to_vec(),
        }
    }

    /// Value of `r` at process `i`, row `j`, stage `h`: 0 before reception, 1 after
    /// reception, 2 after updates. Row 0 has the initial values at every stage.
    pub fn value(&self, i: usize, j: usize, r: RegisterId, h: u8) -> Pid {
        let r = r.0 as usize;
        if j == 0 {
            return self.configs[0].regs[i][r];
        }
        match h {
            0 => self.configs[j - 1].regs[i][r],
            1 => self.hats[j - 1][i][r],
            _ => self.configs[j].regs[i][r],
        }
    }

    /// Process whose pid `r` holds at `(i, j)` in stage `h`.
    pub fn provenance(&self, i: usize, j: usize, r: RegisterId, h: u8) -> usize {
        self.ring.process_of(self.value(i, j, r, h)).expect("registers only hold pids of the ring")
    }
}

/// Depth-first iterator over all runs of length `1..=bound`, shorter runs first along each branch.
pub struct RunIter<'a> {
    algo: &'a Algorithm,
    bound: usize,
    /// Each frame: the run prefix, per-process candidates, and the odometer over them.
    stack: Vec<Frame>,
    pushed_last: bool,
}

struct Frame {
    run: Run,
    cands: Vec<Vec<TransId>>,
    odo: Vec<usize>,
    done: bool,
}

impl Frame {
    fn new(algo: &Algorithm, run: Run) -> Frame {
        let cands: Vec<Vec<TransId>> =
            run.last().states.iter().map(|&s| algo.trans_ids().filter(|&t| algo.trans(t).source == s).collect()).collect();
        let done = cands.iter().any(|c| c.is_empty());
        let odo = vec![0; cands.len()];
        Frame { run, cands, odo, done }
    }

    /// Next candidate tuple, advancing the odometer.
    fn next_tuple(&mut self) -> Option<Vec<TransId>> {
        if self.done {
            return None;
        }
        let tuple = self.odo.iter().zip(&self.cands).map(|(&o, c)| c[o]).collect();
        let mut i = self.odo.len();
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            self.odo[i] += 1;
            if self.odo[i] < self.cands[i].len() {
                break;
            }
            self.odo[i] = 0;
        }
        Some(tuple)
    }
}

impl RunIter<'_> {
    /// Abandons the extensions of the run most recently returned.
    pub fn prune(&mut self) {
        if self.pushed_last {
            self.stack.pop();
            self.pushed_last = false;
        }
    }
}

impl Iterator for RunIter<'_> {
    type Item = Run;

    fn next(&mut self) -> Option<Run> {
        self.pushed_last = false;
        while let Some(frame) = self.stack.last_mut() {
            let Some(tuple) = frame.next_tuple() else {
                self.stack.pop();
                continue;
            };
            let mut run = frame.run.clone();
            if run.push(self.algo, &tuple) {
                self.pushed_last = run.len() < self.bound;
                if self.pushed_last {
                    self.stack.push(Frame::new(self.algo, run.clone()));
                }
                return Some(run);
            }
        }
        None
    }
}

/// Every run of `algo` on `ring` with `1..=bound` rounds.
pub fn enumerate_runs<'a>(algo: &'a Algorithm, ring: &Ring, bound: usize) -> RunIter<'a> {
    let stack = if bound == 0 { Vec::new() } else { vec![Frame::new(algo, Run::start(algo, ring.clone()))] };
    RunIter { algo, bound, stack, pushed_last: false }
}
