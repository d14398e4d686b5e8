//! Emptiness for the alternating automaton via a one-way search over annotations.
//!
//! An accepting run is summarised position by position: the set of states it visits,
//! the states it sends to the next position, and which least-fixpoint states it can
//! connect through the part of the word already read. A word is accepted iff there is
//! an annotation sequence whose local choices are consistent and whose least-fixpoint
//! configurations never form a cycle. The search is breadth-first, so the first
//! accepted word found is a shortest one.

use super::a2a::{Atom, Formula, Letter, StateId, A2A};
use crate::model::TransId;
use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::time::{Duration, Instant};

/// Limits for the search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Budget {
    /// Maximum work: automaton states, annotations, and every partial closure weighted
    /// by its size, so the limit also bounds memory.
    pub nodes: usize,
    pub time: Duration,
}

impl Default for Budget {
    fn default() -> Budget {
        Budget { nodes: 10_000_000, time: Duration::from_secs(20) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Emptiness {
    Empty,
    /// A shortest accepted word, without end markers.
    Witness(Vec<TransId>),
}

/// The search gave up; `spent` is the node count at that point.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OverBudget {
    pub spent: usize,
}

/// Most backward-move targets a single position may have to guess among.
const MAX_GUESSES: usize = 16;

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Ann {
    /// Whether this is the start marker.
    start: bool,
    row: u16,
    states: Vec<StateId>,
    fwd: Vec<StateId>,
    /// `(p, q)`: least-fixpoint `p` here reaches some configuration sending `q` forward.
    reach_fwd: Vec<(StateId, StateId)>,
}

struct Search<'a> {
    a2a: &'a mut A2A,
    k: usize,
    budget: Budget,
    start: Instant,
    spent: usize,
    /// Per row, every state some transition sends one position left to that row.
    back: Vec<Vec<StateId>>,
    /// Per state, the index of its dual if one has been created.
    dual: HashMap<StateId, StateId>,
    /// Per row, the backward targets the current round may guess.
    allowed: Vec<HashSet<StateId>>,
    /// Per row, backward targets some model needed but could not get.
    denied: Vec<HashSet<StateId>>,
}

/// Decides whether the automaton accepts some word, within `budget`.
pub fn emptiness(a2a: &mut A2A, budget: Budget) -> Result<Emptiness, OverBudget> {
    let k = a2a.k();
    let mut s = Search {
        a2a,
        k,
        budget,
        start: Instant::now(),
        spent: 0,
        back: vec![Vec::new(); k + 1],
        dual: HashMap::new(),
        allowed: vec![HashSet::new(); k + 1],
        denied: vec![HashSet::new(); k + 1],
    };
    s.explore_states()?;
    // Guess only among backward targets that some explored model asked for, and widen
    // the set until no request is denied. The first denied target on the way from the
    // root of an accepting run is always requested by an explored configuration.
    loop {
        if let Emptiness::Witness(w) = s.bfs()? {
            return Ok(Emptiness::Witness(w));
        }
        let mut grew = false;
        for (allowed, denied) in s.allowed.iter_mut().zip(s.denied.iter_mut()) {
            for q in denied.drain() {
                grew |= allowed.insert(q);
            }
        }
        if !grew {
            return Ok(Emptiness::Empty);
        }
    }
}

impl Search<'_> {
    fn tick(&mut self, n: usize) -> Result<(), OverBudget> {
        self.spent += n;
        if self.spent > self.budget.nodes || (self.spent % 1024 < n && self.start.elapsed() > self.budget.time) {
            return Err(OverBudget { spent: self.spent });
        }
        Ok(())
    }

    fn letters(&self) -> Vec<Letter> {
        let mut v = vec![Letter::Start, Letter::End];
        v.extend(self.a2a.alphabet().into_iter().map(Letter::T));
        v
    }

    /// Builds every reachable state and transition up front and collects the
    /// backward-move targets per row.
    fn explore_states(&mut self) -> Result<(), OverBudget> {
        let letters = self.letters();
        let mut seen = HashSet::new();
        let mut todo = vec![self.a2a.initial()];
        seen.insert(self.a2a.initial());
        let mut back: Vec<BTreeSet<StateId>> = vec![BTreeSet::new(); self.k + 1];
        while let Some(q) = todo.pop() {
            self.tick(1)?;
            for &l in &letters {
                let f = self.a2a.delta(q, l);
                for (d, s) in f.atoms() {
                    if d < 0 {
                        let row = self.a2a.key(s).row().expect("moving states carry a row") as usize;
                        back[row].insert(s);
                    }
                    if seen.insert(s) {
                        todo.push(s);
                    }
                }
            }
        }
        self.back = back.into_iter().map(|b| b.into_iter().collect()).collect();
        for q in 0..self.a2a.num_states() as StateId {
            if let Some(id) = self.a2a.key(q).dual().and_then(|d| self.a2a.lookup(d)) {
                self.dual.insert(q, id);
            }
        }
        Ok(())
    }

    fn is_mu(&self, s: StateId) -> bool {
        !self.a2a.key(s).is_nu()
    }

    fn bfs(&mut self) -> Result<Emptiness, OverBudget> {
        let mut anns: Vec<Ann> = Vec::new();
        let mut letter_of: Vec<Letter> = Vec::new();
        let mut parent: Vec<Option<usize>> = Vec::new();
        let mut index: HashMap<Ann, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        for a in self.successors(None, Letter::Start, self.k as u16)? {
            if index.contains_key(&a) {
                continue;
            }
            index.insert(a.clone(), anns.len());
            queue.push_back(anns.len());
            anns.push(a);
            letter_of.push(Letter::Start);
            parent.push(None);
        }
        let alphabet = self.a2a.alphabet();
        while let Some(i) = queue.pop_front() {
            let cur = anns[i].clone();
            let next_row = ((cur.row as usize + 1) % (self.k + 1)) as u16;
            let mut letters: Vec<Letter> = alphabet.iter().map(|&t| Letter::T(t)).collect();
            if cur.row as usize == self.k && !cur.start {
                letters.insert(0, Letter::End);
            }
            for l in letters {
                for a in self.successors(Some(&cur), l, next_row)? {
                    if l == Letter::End {
                        let mut word = Vec::new();
                        let mut at = Some(i);
                        while let Some(j) = at {
                            if let Letter::T(t) = letter_of[j] {
                                word.push(t);
                            }
                            at = parent[j];
                        }
                        word.reverse();
                        return Ok(Emptiness::Witness(word));
                    }
                    if index.contains_key(&a) {
                        continue;
                    }
                    self.tick(1)?;
                    index.insert(a.clone(), anns.len());
                    queue.push_back(anns.len());
                    anns.push(a);
                    letter_of.push(l);
                    parent.push(Some(i));
                }
            }
        }
        Ok(Emptiness::Empty)
    }

    /// All annotations for the next position carrying `letter`, given the current one.
    fn successors(&mut self, prev: Option<&Ann>, letter: Letter, row: u16) -> Result<Vec<Ann>, OverBudget> {
        let mut required: Vec<StateId> = match prev {
            None => vec![self.a2a.initial()],
            Some(p) => p.fwd.clone(),
        };
        required.sort_unstable();
        required.dedup();
        let prev_states: HashSet<StateId> = prev.map(|p| p.states.iter().copied().collect()).unwrap_or_default();
        let free = if letter == Letter::End {
            HashMap::new()
        } else {
            let seeds = self.back[row as usize].clone();
            self.free_models(letter, &prev_states, &seeds)
        };
        let guesses: Vec<StateId> = if letter == Letter::End {
            Vec::new()
        } else {
            let allowed = &self.allowed[row as usize];
            self.back[row as usize]
                .iter()
                .copied()
                .filter(|s| allowed.contains(s) && !required.contains(s) && !free.contains_key(s))
                .collect()
        };
        // Guessing is exponential in the candidates; past this the search is hopeless.
        if guesses.len() > MAX_GUESSES {
            return Err(OverBudget { spent: self.spent });
        }
        let mut out = HashSet::new();
        for mask in 0u32..(1u32 << guesses.len()) {
            let mut init = required.clone();
            init.extend(guesses.iter().enumerate().filter(|(b, _)| mask & (1 << b) != 0).map(|(_, &s)| s));
            let mut models = Vec::new();
            self.closures(letter, row, &prev_states, &free, init, &mut models)?;
            for mut m in models {
                for (q, model) in &free {
                    m.entry(*q).or_insert_with(|| model.clone());
                }
                if let Some(a) = self.annotate(prev, letter, row, m) {
                    out.insert(a);
                }
            }
        }
        let mut out: Vec<Ann> = out.into_iter().collect();
        out.sort_by(|a, b| (&a.states, &a.fwd, &a.reach_fwd).cmp(&(&b.states, &b.fwd, &b.reach_fwd)));
        Ok(out)
    }

    /// States that can always be added at the next position, with a model for each.
    ///
    /// Greatest-fixpoint states may stay among free states and move back into
    /// `prev_states`; least-fixpoint states may only stay, and only on states justified
    /// before them. Free states add no forward obligations and no least-fixpoint cycles,
    /// so adding them never hurts. A complete run cannot hold a free state together
    /// with its dual, since both would accept.
    fn free_models(&mut self, letter: Letter, prev_states: &HashSet<StateId>, seeds: &[StateId]) -> HashMap<StateId, Vec<Atom>> {
        let mut universe: Vec<StateId> = Vec::new();
        let mut seen: HashSet<StateId> = HashSet::new();
        let mut todo: Vec<StateId> = seeds.to_vec();
        let mut delta = HashMap::new();
        while let Some(q) = todo.pop() {
            if !seen.insert(q) {
                continue;
            }
            let f = self.a2a.delta(q, letter);
            if f.atoms().any(|a| a.0 > 0) && f.is_cnf() && f.clauses().iter().all(|c| c.iter().any(|a| a.0 > 0)) {
                continue;
            }
            universe.push(q);
            todo.extend(f.atoms().filter(|a| a.0 == 0).map(|a| a.1));
            delta.insert(q, f);
        }
        let nu: Vec<StateId> = universe.iter().copied().filter(|&q| self.a2a.key(q).is_nu()).collect();
        let mu: Vec<StateId> = universe.iter().copied().filter(|&q| !self.a2a.key(q).is_nu()).collect();
        let model_in = |f: &Formula, ok: &dyn Fn(&Atom) -> bool| -> Option<Vec<Atom>> {
            let m: Option<Vec<Atom>> = match f {
                Formula::Cnf(cs) => cs.iter().map(|c| c.iter().copied().find(|a| ok(a))).collect(),
                Formula::Dnf(cs) => cs.iter().find(|c| c.iter().all(|a| ok(a))).cloned(),
            };
            m.map(|mut m| {
                m.sort_unstable();
                m.dedup();
                m
            })
        };
        let mut alive_nu: HashSet<StateId> = nu.iter().copied().collect();
        loop {
            // Least fixpoint for the others, on top of the assumed greatest-fixpoint states.
            let mut models: HashMap<StateId, Vec<Atom>> = HashMap::new();
            loop {
                let mut grew = false;
                for &q in &mu {
                    if models.contains_key(&q) {
                        continue;
                    }
                    let ok = |&(d, s): &Atom| d == 0 && (alive_nu.contains(&s) || models.contains_key(&s));
                    if let Some(m) = model_in(&delta[&q], &ok) {
                        models.insert(q, m);
                        grew = true;
                    }
                }
                if !grew {
                    break;
                }
            }
            let mut next = HashSet::new();
            for &q in &nu {
                if !alive_nu.contains(&q) {
                    continue;
                }
                let ok = |&(d, s): &Atom| match d {
                    -1 => prev_states.contains(&s),
                    0 => alive_nu.contains(&s) || models.contains_key(&s),
                    _ => false,
                };
                if let Some(m) = model_in(&delta[&q], &ok) {
                    models.insert(q, m);
                    next.insert(q);
                }
            }
            if next.len() == alive_nu.len() {
                return models;
            }
            alive_nu = next;
        }
    }

    /// Every way to close `init` under chosen models of the transition formulas,
    /// leaving out free states.
    fn closures(
        &mut self,
        letter: Letter,
        row: u16,
        prev_states: &HashSet<StateId>,
        free: &HashMap<StateId, Vec<Atom>>,
        init: Vec<StateId>,
        out: &mut Vec<HashMap<StateId, Vec<Atom>>>,
    ) -> Result<(), OverBudget> {
        let mut stack: Vec<(HashMap<StateId, Vec<Atom>>, Vec<StateId>)> = vec![(HashMap::new(), init)];
        while let Some((chosen, mut todo)) = stack.pop() {
            self.tick(1)?;
            let Some(q) = todo.pop() else {
                out.push(chosen);
                continue;
            };
            // A free state's model dominates its others and is added afterwards.
            if chosen.contains_key(&q) || free.contains_key(&q) {
                stack.push((chosen, todo));
                continue;
            }
            if let Some(d) = self.dual.get(&q) {
                if chosen.contains_key(d) || todo.contains(d) {
                    continue;
                }
            }
            let f = self.a2a.delta(q, letter);
            let prev_row = (row as usize + self.k) % (self.k + 1);
            let limit = self.budget.nodes.saturating_sub(self.spent);
            let models = models_of(&f, limit).ok_or(OverBudget { spent: self.budget.nodes + 1 })?;
            self.tick(models.len())?;
            for model in models {
                let mut ok = true;
                for &(d, s) in &model {
                    match d {
                        -1 if !prev_states.contains(&s) => {
                            ok = false;
                            if !self.allowed[prev_row].contains(&s) {
                                self.denied[prev_row].insert(s);
                            }
                        }
                        1 if letter == Letter::End => ok = false,
                        _ => {}
                    }
                }
                if !ok {
                    continue;
                }
                self.tick(1 + chosen.len() + todo.len())?;
                let mut c = chosen.clone();
                let mut t = todo.clone();
                t.extend(model.iter().filter(|(d, _)| *d == 0).map(|&(_, s)| s));
                c.insert(q, model);
                stack.push((c, t));
            }
        }
        Ok(())
    }

    fn annotate(&self, prev: Option<&Ann>, letter: Letter, row: u16, chosen: HashMap<StateId, Vec<Atom>>) -> Option<Ann> {
        let mut states: Vec<StateId> = chosen.keys().copied().collect();
        states.sort_unstable();
        let ix: HashMap<StateId, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
        let n = states.len();
        let mu: Vec<bool> = states.iter().map(|&s| self.is_mu(s)).collect();
        let prev_rf: HashMap<StateId, Vec<StateId>> = prev.map_or_else(HashMap::new, |p| {
            let mut m: HashMap<StateId, Vec<StateId>> = HashMap::new();
            for &(a, b) in &p.reach_fwd {
                m.entry(a).or_default().push(b);
            }
            m
        });
        // Direct edges between least-fixpoint configurations at this position.
        let mut reach = vec![vec![false; n]; n];
        for (i, &q) in states.iter().enumerate() {
            if !mu[i] {
                continue;
            }
            for &(d, s) in &chosen[&q] {
                match d {
                    0 => {
                        let j = ix[&s];
                        if mu[j] {
                            reach[i][j] = true;
                        }
                    }
                    -1 if self.is_mu(s) => {
                        for t in prev_rf.get(&s).into_iter().flatten() {
                            if let Some(&j) = ix.get(t) {
                                reach[i][j] = true;
                            }
                        }
                    }
                    _ => {}
                }
            }
        }
        for m in 0..n {
            for i in 0..n {
                if reach[i][m] {
                    for j in 0..n {
                        if reach[m][j] {
                            reach[i][j] = true;
                        }
                    }
                }
            }
        }
        if (0..n).any(|i| reach[i][i]) {
            return None;
        }
        let mut fwd = BTreeSet::new();
        let mut reach_fwd = BTreeSet::new();
        let back: HashSet<StateId> = self.back[row as usize].iter().copied().collect();
        for (i, &q) in states.iter().enumerate() {
            for &(d, s) in &chosen[&q] {
                if d == 1 {
                    fwd.insert(s);
                }
            }
            if !mu[i] || !back.contains(&q) {
                continue;
            }
            for (j, &r) in states.iter().enumerate() {
                if i == j || reach[i][j] {
                    for &(d, s) in &chosen[&r] {
                        if d == 1 && self.is_mu(s) {
                            reach_fwd.insert((q, s));
                        }
                    }
                }
            }
        }
        // The next position only looks back at backward-move targets.
        states.retain(|q| back.contains(q));
        Some(Ann {
            start: letter == Letter::Start,
            row,
            states,
            fwd: fwd.into_iter().collect(),
            reach_fwd: reach_fwd.into_iter().collect(),
        })
    }
}

/// The minimal models of a formula: each DNF clause, or one atom from every CNF clause.
/// `None` once a CNF expansion holds more than `limit` partial models.
fn models_of(f: &Formula, limit: usize) -> Option<Vec<Vec<Atom>>> {
    match f {
        Formula::Dnf(cs) => Some(
            cs.iter()
                .map(|c| {
                    let mut c = c.clone();
                    c.sort_unstable();
                    c.dedup();
                    c
                })
                .collect(),
        ),
        Formula::Cnf(cs) => {
            let mut acc: Vec<Vec<Atom>> = vec![Vec::new()];
            for c in cs {
                let mut next = Vec::new();
                for m in &acc {
                    if c.iter().any(|a| m.contains(a)) {
                        next.push(m.clone());
                        continue;
                    }
                    for &a in c {
                        let mut m2 = m.clone();
                        m2.push(a);
                        m2.sort_unstable();
                        next.push(m2);
                    }
                }
                next.sort();
                next.dedup();
                if next.len() > limit {
                    return None;
                }
                acc = next;
            }
            Some(acc)
        }
    }
}
