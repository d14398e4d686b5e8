//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the test harness so the lines appear in order and uncaptured.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use ringcheck_core::compile::{compile, CompiledAlgorithm};
use ringcheck_core::corpus;
use ringcheck_core::dataspec::{eval_local, parse_spec, Spec};
use ringcheck_core::decide::{self, Budget, CheckOptions, Mode, Outcome, Verdict};
use ringcheck_core::model::{enumerate_runs, parse_algorithm, step, Algorithm, Pid, Ring, Run, TransId};
use ringcheck_core::oracle::oracle_check;
use ringcheck_core::table::{table_of_run, Evaluator, LocalId, Table};
use std::collections::BTreeSet;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

fn franklin() -> Algorithm {
    parse_algorithm(corpus::FRANKLIN).unwrap()
}

fn dkr() -> Algorithm {
    parse_algorithm(corpus::DKR).unwrap()
}

fn permutations(n: usize) -> Vec<Vec<Pid>> {
    let mut out = Vec::new();
    let mut cur: Vec<Pid> = Vec::new();
    fn go(n: usize, cur: &mut Vec<Pid>, out: &mut Vec<Vec<Pid>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for p in 1..=n as Pid {
            if !cur.contains(&p) {
                cur.push(p);
                go(n, cur, out);
                cur.pop();
            }
        }
    }
    go(n, &mut cur, &mut out);
    out
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

/// States and `r, r', r''` of every process in `C_0 .. C_6` of the reference run.
const REFERENCE: [[(&str, [Pid; 3]); 7]; 7] = [
    [
        ("active0", [4, 4, 4]),
        ("active0", [8, 8, 8]),
        ("active0", [3, 3, 3]),
        ("active0", [1, 1, 1]),
        ("active0", [6, 6, 6]),
        ("active0", [5, 5, 5]),
        ("active0", [7, 7, 7]),
    ],
    [
        ("active1", [4, 7, 4]),
        ("active1", [8, 4, 8]),
        ("active1", [3, 8, 3]),
        ("active1", [1, 3, 1]),
        ("active1", [6, 1, 6]),
        ("active1", [5, 6, 5]),
        ("active1", [7, 5, 7]),
    ],
    [
        ("active0", [7, 7, 5]),
        ("passive", [8, 4, 7]),
        ("active0", [8, 8, 4]),
        ("passive", [1, 3, 8]),
        ("passive", [6, 1, 3]),
        ("active0", [6, 6, 1]),
        ("passive", [7, 5, 6]),
    ],
    [
        ("active1", [7, 6, 5]),
        ("passive", [7, 4, 7]),
        ("active1", [8, 7, 4]),
        ("passive", [8, 3, 8]),
        ("passive", [8, 1, 3]),
        ("active1", [6, 8, 1]),
        ("passive", [6, 5, 6]),
    ],
    [
        ("passive", [7, 6, 8]),
        ("passive", [6, 4, 7]),
        ("passive", [8, 7, 6]),
        ("passive", [7, 3, 8]),
        ("passive", [7, 1, 3]),
        ("active0", [8, 8, 7]),
        ("passive", [8, 5, 6]),
    ],
    [
        ("passive", [8, 6, 8]),
        ("passive", [8, 4, 7]),
        ("passive", [8, 7, 6]),
        ("passive", [8, 3, 8]),
        ("passive", [8, 1, 3]),
        ("active1", [8, 8, 7]),
        ("passive", [8, 5, 6]),
    ],
    [
        ("passive", [8, 6, 8]),
        ("passive", [8, 4, 7]),
        ("passive", [8, 7, 6]),
        ("passive", [8, 3, 8]),
        ("passive", [8, 1, 3]),
        ("found", [8, 8, 8]),
        ("passive", [8, 5, 6]),
    ],
];

fn reference_run() -> Result<String, String> {
    let a = dkr();
    let ring = Ring::new(corpus::FIG4_RING.to_vec()).unwrap();
    let run = Run::replay(&a, ring, &corpus::fig4_tuples(&a).unwrap()).map_err(|j| format!("round {j} blocks"))?;
    ensure(run.configs.len() == 7, || format!("{} configurations", run.configs.len()))?;
    let regs = ["r", "r'", "r''"].map(|n| a.register(n).unwrap().0 as usize);
    for (j, (want, c)) in REFERENCE.iter().zip(&run.configs).enumerate() {
        for (i, (state, vals)) in want.iter().enumerate() {
            let got = (a.state_name(c.states[i]), regs.map(|r| c.regs[i][r]));
            ensure(got == (*state, *vals), || format!("C_{j} process {}: {got:?}, expected {:?}", i + 1, (state, vals)))?;
        }
    }
    Ok("49 cells match".into())
}

fn log2(n: usize) -> usize {
    (usize::BITS - 1 - n.leading_zeros()) as usize
}

fn round_bounds() -> Result<String, String> {
    let mut runs = 0usize;
    for (name, algo, bound) in [("Franklin", franklin(), log2 as fn(usize) -> usize), ("DKR", dkr(), |n| 2 * log2(n) + 1)] {
        let r = algo.register("r").unwrap().0 as usize;
        let found = algo.state("found").unwrap();
        let passive = algo.state("passive").unwrap();
        for n in 1..=6 {
            let b = bound(n) + 1;
            let results: Vec<Result<usize, String>> = permutations(n)
                .into_par_iter()
                .map(|pids| {
                    let ring = Ring::new(pids.clone()).unwrap();
                    let mut count = 0;
                    for run in enumerate_runs(&algo, &ring, b + 1) {
                        count += 1;
                        ensure(run.len() <= b, || format!("{name}: a run on {pids:?} has {} rounds", b + 1))?;
                        let last = run.last();
                        if last.states.iter().all(|&s| s == found || s == passive) {
                            let leaders = last.states.iter().filter(|&&s| s == found).count();
                            ensure(leaders == 1, || format!("{name}: {leaders} leaders on {pids:?}"))?;
                            ensure(last.regs.iter().all(|v| v[r] == n as Pid), || {
                                format!("{name}: r is not the maximum on {pids:?}")
                            })?;
                        }
                    }
                    Ok(count)
                })
                .collect();
            for res in results {
                runs += res?;
            }
        }
    }
    Ok(format!("{runs} runs on rings of up to 6 processes"))
}

fn is_holds_or_downgraded(v: &Verdict) -> bool {
    match v.result {
        Outcome::Holds => true,
        Outcome::Unknown => {
            v.mode == Mode::BoundedWidth
                && v.width_cap.is_some_and(|w| w >= 5)
                && v.notes.iter().any(|n| n.contains("no counterexample up to width"))
        }
        Outcome::Violated => false,
    }
}

fn describe(v: &Verdict) -> String {
    let r = match v.result {
        Outcome::Holds => "holds".to_string(),
        Outcome::Violated => "violated".to_string(),
        Outcome::Unknown => format!("no counterexample up to width {}", v.width_cap.unwrap_or(0)),
    };
    format!("{r} [{}]", v.mode.name())
}

/// The counterexample replays, matches its table, and falsifies the spec at its
/// marked process.
fn verify_counterexample(algo: &Algorithm, spec: &Spec, v: &Verdict) -> Result<(), String> {
    let cx = v.counterexample.as_ref().ok_or("no counterexample")?;
    let replayed = Run::replay(algo, cx.ring.clone(), &cx.run.tuples).map_err(|j| format!("round {j} does not replay"))?;
    ensure(replayed == cx.run, || "replay differs".into())?;
    for (j, t) in cx.run.tuples.iter().enumerate() {
        let next = step(algo, &cx.run.configs[j], t).map_err(|e| e.to_string())?;
        ensure(next.as_ref() == Some(&cx.run.configs[j + 1]), || format!("round {} does not step", j + 1))?;
    }
    let ext = ringcheck_core::compile::dummy_extend(algo);
    ensure(table_of_run(&ext, &cx.run).ok().as_ref() == Some(&cx.table), || "table differs".into())?;
    ensure(!eval_local(algo, &cx.run, cx.marked, (cx.marked, 0), &spec.body), || "the run satisfies the spec".into())
}

fn verdict_matrix() -> Result<String, String> {
    let opts = CheckOptions::default();
    let (f, d) = (franklin(), dkr());
    let (phi1, phi2) = (parse_spec(corpus::PHI1).unwrap(), parse_spec(corpus::PHI2).unwrap());
    let v1 = decide::check(&f, &phi1, 2, &opts).map_err(|e| e.to_string())?;
    ensure(is_holds_or_downgraded(&v1), || format!("Franklin/Phi1/2: {}", describe(&v1)))?;
    let v2 = decide::check(&d, &phi1, 4, &opts).map_err(|e| e.to_string())?;
    ensure(v2.result == Outcome::Violated, || format!("DKR/Phi1/4: {}", describe(&v2)))?;
    verify_counterexample(&d, &phi1, &v2).map_err(|e| format!("DKR/Phi1/4: {e}"))?;
    let v3 = decide::check(&d, &phi2, 4, &opts).map_err(|e| e.to_string())?;
    ensure(is_holds_or_downgraded(&v3), || format!("DKR/Phi2/4: {}", describe(&v3)))?;
    Ok(format!(
        "Franklin/Phi1/2 {}; DKR/Phi1/4 {} on ring {:?}; DKR/Phi2/4 {}",
        describe(&v1),
        describe(&v2),
        v2.counterexample.as_ref().unwrap().ring.pids(),
        describe(&v3)
    ))
}

/// Every table of height index `k` and width `w` over the alphabet.
fn all_tables(alphabet: &[TransId], k: usize, w: usize) -> Vec<Table> {
    let cells = w * (k + 1);
    let total = alphabet.len().pow(cells as u32);
    (0..total)
        .map(|mut idx| {
            let word: Vec<TransId> = (0..cells)
                .map(|_| {
                    let t = alphabet[idx % alphabet.len()];
                    idx /= alphabet.len();
                    t
                })
                .collect();
            Table::new(w, k, word).unwrap()
        })
        .collect()
}

fn table_language() -> Result<String, String> {
    let mut summary = Vec::new();
    for (name, algo) in [("Franklin", franklin()), ("DKR", dkr())] {
        let c = compile(&algo);
        let ext = &c.dummy_extended;
        let alphabet: Vec<TransId> = ext.trans_ids().collect();
        for k in 1..=2 {
            for w in 1..=2 {
                let models: BTreeSet<Table> = all_tables(&alphabet, k, w)
                    .into_par_iter()
                    .filter(|t| Evaluator::new(&c.store, ext, t).holds(c.psi_d, 0))
                    .collect();
                let mut of_runs = BTreeSet::new();
                for pids in permutations(w) {
                    let ring = Ring::new(pids).unwrap();
                    for run in enumerate_runs(ext, &ring, k).filter(|r| r.len() == k) {
                        of_runs.insert(table_of_run(ext, &run).unwrap());
                    }
                }
                ensure(models == of_runs, || {
                    let extra = models.difference(&of_runs).next().map(|t| t.render(ext));
                    let missing = of_runs.difference(&models).next().map(|t| t.render(ext));
                    format!("{name} k={k} w={w}: extra {extra:?}, missing {missing:?}")
                })?;
                summary.push(models.len());
            }
        }
    }
    Ok(format!("model counts per (algorithm, k, width): {summary:?}"))
}

/// A run chosen uniformly among applicable tuples round by round; `None` if it gets stuck
/// before its first round.
fn random_run(algo: &Algorithm, rng: &mut ChaCha8Rng, n: usize, k: usize) -> Option<Run> {
    let mut pids: Vec<Pid> = (1..=n as Pid).collect();
    pids.shuffle(rng);
    let mut run = Run::start(algo, Ring::new(pids).unwrap());
    for _ in 0..k {
        let cands: Vec<Vec<TransId>> =
            run.last().states.iter().map(|&s| algo.trans_ids().filter(|&t| algo.trans(t).source == s).collect()).collect();
        let mut tuples: Vec<Vec<TransId>> = vec![Vec::new()];
        for c in &cands {
            tuples = tuples.into_iter().flat_map(|t| c.iter().map(move |&x| [t.clone(), vec![x]].concat())).collect();
        }
        let ok: Vec<Vec<TransId>> = tuples.into_iter().filter(|t| step(algo, run.last(), t).ok().flatten().is_some()).collect();
        let Some(t) = ok.choose(rng) else { break };
        run.push(algo, t);
    }
    (!run.is_empty()).then_some(run)
}

fn provenance() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut checked = 0usize;
    for (name, algo) in [("Franklin", franklin()), ("DKR", dkr())] {
        let c = compile(&algo);
        let ext = &c.dummy_extended;
        let mut runs = 0;
        while runs < 500 {
            let (n, k) = (rng.gen_range(1..=4), rng.gen_range(1..=3));
            let Some(run) = random_run(ext, &mut rng, n, k) else { continue };
            runs += 1;
            let t = table_of_run(ext, &run).unwrap();
            let mut ev = Evaluator::new(&c.store, ext, &t);
            for r in ext.register_ids() {
                for h in [1u8, 2] {
                    let rel = ev.rel(c.provenance_automaton(r, h)).transpose();
                    for x in 0..t.len() {
                        let (i, j) = t.coords(x);
                        let origins: Vec<usize> = rel.image(x).iter().collect();
                        let want = vec![t.pos(run.provenance(i, j, r, h), 0)];
                        ensure(origins == want, || {
                            format!("{name}: {} stage {h} at ({i},{j}) on {:?}", ext.reg_name(r), run.ring.pids())
                        })?;
                        checked += 1;
                    }
                }
            }
        }
    }
    Ok(format!("1000 runs, {checked} register cells"))
}

fn compiled_formulas(c: &mut CompiledAlgorithm) -> Vec<(String, LocalId)> {
    let mut out = vec![
        ("psi_col".to_string(), c.psi_col),
        ("psi_eq".to_string(), c.psi_eq),
        ("psi_less".to_string(), c.psi_less),
        ("psi_D".to_string(), c.psi_d),
    ];
    for (name, src) in [("Phi1", corpus::PHI1), ("Phi2", corpus::PHI2)] {
        let spec = parse_spec(src).unwrap();
        out.push((format!("violation of {name}"), c.violation_formula(&spec).unwrap()));
    }
    out
}

fn a2a_agreement() -> Result<String, String> {
    let mut jobs = Vec::new();
    for (name, algo) in [("Franklin", franklin()), ("DKR", dkr())] {
        let mut c = compile(&algo);
        let formulas = compiled_formulas(&mut c);
        let store = Arc::new(c.store.clone());
        let ext = Arc::new(c.dummy_extended.clone());
        for (fname, psi) in formulas {
            for k in 1..=2 {
                jobs.push((format!("{name} {fname} k={k}"), store.clone(), ext.clone(), psi, k));
            }
        }
    }
    let results: Vec<Result<usize, String>> = jobs
        .into_par_iter()
        .enumerate()
        .map(|(seed, (label, store, ext, psi, k))| {
            let alphabet: Vec<TransId> = ext.trans_ids().collect();
            let mut tables = all_tables(&alphabet, k, 1);
            tables.extend(all_tables(&alphabet, k, 2));
            let mut rng = ChaCha8Rng::seed_from_u64(seed as u64);
            for _ in 0..200 {
                let w = rng.gen_range(3..=4);
                let cells = (0..w * (k + 1)).map(|_| *alphabet.choose(&mut rng).unwrap()).collect();
                tables.push(Table::new(w, k, cells).unwrap());
            }
            let mut a = decide::compile_a2a(store.clone(), ext.clone(), psi, k);
            for t in &tables {
                let want = Evaluator::new(&store, &ext, t).holds(psi, 0);
                ensure(decide::a2a_accepts(&mut a, t) == want, || format!("{label}: disagree on\n{}", t.render(&ext)))?;
            }
            Ok(tables.len())
        })
        .collect();
    let mut total = 0;
    for r in results {
        total += r?;
    }
    Ok(format!("{total} table/formula pairs"))
}

fn reduced_budget() -> CheckOptions {
    CheckOptions { budget: Budget { nodes: 300_000, time: Duration::from_secs(3) }, ..CheckOptions::default() }
}

fn oracle_agreement() -> Result<String, String> {
    let opts = reduced_budget();
    let mut tally = [0usize; 3];
    for (aname, algo) in [("Franklin", franklin()), ("DKR", dkr())] {
        for (sname, src) in [("Phi1", corpus::PHI1), ("Phi2", corpus::PHI2)] {
            let spec = parse_spec(src).unwrap();
            for b in 1..=3 {
                let label = format!("{aname}/{sname}/{b}");
                let v = decide::check(&algo, &spec, b, &opts).map_err(|e| format!("{label}: {e}"))?;
                match v.result {
                    Outcome::Violated => {
                        verify_counterexample(&algo, &spec, &v).map_err(|e| format!("{label}: {e}"))?;
                        let n = v.counterexample.as_ref().unwrap().ring.size();
                        let o = oracle_check(&algo, &spec, b, n);
                        ensure(!o.holds(), || format!("{label}: violated at width {n}, oracle holds at n_max {n}"))?;
                        tally[1] += 1;
                    }
                    Outcome::Holds | Outcome::Unknown => {
                        let o = oracle_check(&algo, &spec, b, 5);
                        ensure(o.holds(), || format!("{label}: {} but the oracle found a counterexample", describe(&v)))?;
                        tally[if v.result == Outcome::Holds { 0 } else { 2 }] += 1;
                    }
                }
            }
        }
    }
    Ok(format!("{} holds, {} violated, {} bounded without counterexample", tally[0], tally[1], tally[2]))
}

/// Textual mutations of the corpus specs.
const MUTATIONS: [(&str, &str); 12] = [
    ("<=", "<"),
    ("!=", "="),
    (" = ", " != "),
    ("passive", "found"),
    ("found", "passive"),
    ("[right*]", "<right*>"),
    ("& max", "& !max"),
    ("& rr", ""),
    ("r@pfound", "r@eps"),
    ("id@eps <=", "r@right <"),
    ("(last & acc)", "last"),
    ("[down*]", "[down]"),
];

fn counterexample_soundness() -> Result<String, String> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let algos = [franklin(), dkr()];
    let mut mutants = 0;
    let (mut violated, mut rejected) = (0, 0);
    while mutants < 50 {
        let mut src = if rng.gen_bool(0.5) { corpus::PHI1 } else { corpus::PHI2 }.to_string();
        for _ in 0..rng.gen_range(1..=2) {
            let (from, to) = MUTATIONS.choose(&mut rng).unwrap();
            let hits: Vec<usize> = src.match_indices(from).map(|(i, _)| i).collect();
            if let Some(&at) = hits.choose(&mut rng) {
                src.replace_range(at..at + from.len(), to);
            }
        }
        let Ok(spec) = parse_spec(&src) else { continue };
        mutants += 1;
        let algo = algos.choose(&mut rng).unwrap();
        let b = rng.gen_range(1..=3);
        let opts = CheckOptions { mode: Mode::BoundedWidth, width_cap: 3, ..CheckOptions::default() };
        match decide::check(algo, &spec, b, &opts) {
            Ok(v) if v.result == Outcome::Violated => {
                verify_counterexample(algo, &spec, &v).map_err(|e| format!("mutant {mutants} ({}):\n{src}\n{e}", algo.name))?;
                violated += 1;
            }
            Ok(_) => {}
            Err(decide::DecideError::Fragment(_)) => rejected += 1,
            Err(e) => return Err(format!("mutant {mutants} ({}):\n{src}\n{e}", algo.name)),
        }
    }
    Ok(format!("50 mutants: {violated} verified counterexamples, {rejected} outside the fragment, 0 unverifiable"))
}

fn main() {
    let criteria: [(&str, fn() -> Result<String, String>); 8] = [
        ("reference DKR run on ring 4,8,3,1,6,5,7", reference_run),
        ("round bounds of Franklin and DKR for n <= 6", round_bounds),
        ("verdict matrix", verdict_matrix),
        ("psi_D tables equal tables of runs (width, k <= 2)", table_language),
        ("provenance automata match the simulator", provenance),
        ("automaton membership equals table evaluation", a2a_agreement),
        ("symbolic check agrees with the oracle (b <= 3, n <= 5)", oracle_agreement),
        ("counterexamples of mutated specs replay and violate", counterexample_soundness),
    ];
    let only: Option<usize> = std::env::args().skip(1).find_map(|a| a.parse().ok());
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        if only.is_some_and(|o| o != i + 1) {
            continue;
        }
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|p| {
            Err(p
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_else(|| "panic".into()))
        });
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {}: {name} ({secs:.1}s) {detail}", i + 1),
            Err(e) => {
                failed += 1;
                println!("FAIL {}: {name} ({secs:.1}s) {e}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
