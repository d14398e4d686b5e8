use super::*;
use crate::corpus;
use proptest::prelude::*;

fn franklin() -> Algorithm {
    parse_algorithm(corpus::FRANKLIN).unwrap()
}

fn dkr() -> Algorithm {
    parse_algorithm(corpus::DKR).unwrap()
}

fn tuple(algo: &Algorithm, names: &str) -> Vec<TransId> {
    names.split_whitespace().map(|n| algo.transition(n).unwrap()).collect()
}

fn ring(pids: &[Pid]) -> Ring {
    Ring::new(pids.to_vec()).unwrap()
}

fn fig4_run(algo: &Algorithm) -> Run {
    Run::replay(algo, ring(&corpus::FIG4_RING), &corpus::fig4_tuples(algo).unwrap()).unwrap()
}

#[test]
fn corpus_algorithms_validate() {
    let f = franklin();
    assert_eq!((f.transitions.len(), f.registers.len()), (5, 4));
    assert_eq!(f.state_name(f.initial), "active");
    let d = dkr();
    assert_eq!(d.transitions.len(), 6);
    assert!(d.trans(d.transition("t6").unwrap()).is_fwd());
    assert_eq!(parse_algorithm(&d.to_source()).unwrap(), d);
}

#[test]
fn validation_names_the_transition() {
    let head = "algorithm X\nstates: s\ninit: s\nregisters: id, r, q\n";
    let err = |body: &str| parse_algorithm(&format!("{head}{body}\n")).unwrap_err();
    assert!(matches!(
        err("trans a: s: recv left r; recv right r; goto s"),
        ParseError::Invalid(ValidationError::DuplicateRecvRegister { ref transition, .. }) if transition == "a"
    ));
    assert!(matches!(
        err("trans b: s: set r := q; set r := id; goto s"),
        ParseError::Invalid(ValidationError::DuplicateUpdateTarget { .. })
    ));
    assert!(matches!(
        err("trans c: s: set id := r; goto s"),
        ParseError::Invalid(ValidationError::IdRegisterWritten { ref transition }) if transition == "c"
    ));
    assert!(matches!(err("trans d: s: goto nowhere"), ParseError::Invalid(ValidationError::UndeclaredIdentifier { .. })));
    let le = err("trans e: s: guard r <= q; goto s").to_string();
    assert!(le.contains("two transitions"), "{le}");
}

#[test]
fn between_wraps_around() {
    assert_eq!(between(2, 5, 7), vec![3, 4]);
    assert_eq!(between(5, 0, 7), vec![6]);
    assert!(between(0, 0, 1).is_empty());
    assert_eq!(between(1, 1, 3), vec![0, 2]);
}

#[test]
fn fig4_round_four_messages() {
    let a = dkr();
    let t = corpus::fig4_tuples(&a).unwrap();
    let reg = |n: &str| a.register(n).unwrap();
    let (r, r1, r2) = (reg("r"), reg("r'"), reg("r''"));
    assert!(aux_right(&a, &t[3], r1, 2, r, 3));
    assert!(aux_right(&a, &t[3], r1, 2, r2, 5));
    assert!(aux_right(&a, &t[3], r1, 5, r, 6));
    assert!(aux_right(&a, &t[3], r1, 5, r2, 0));
    assert!(!aux_right(&a, &t[3], r1, 1, r, 3), "process 2 only forwards");
    assert!(!aux_left(&a, &t[3], r1, 2, r, 1));
}

#[test]
fn intermediate_values_follow_messages() {
    let a = dkr();
    let t = corpus::fig4_tuples(&a).unwrap();
    let c0 = initial_configuration(&a, &ring(&corpus::FIG4_RING));
    let hat = intermediate_assignment(&a, &c0, &t[0]);
    assert_eq!(hat[0][a.register("r'").unwrap().0 as usize], 7);
    assert_eq!(hat[0][a.register("r").unwrap().0 as usize], 4);
}

#[test]
fn fig4_is_reproduced() {
    let a = dkr();
    let run = fig4_run(&a);
    assert_eq!(run.len(), 6);
    let last = run.last();
    let found: Vec<usize> = (0..7).filter(|&i| a.state_name(last.states[i]) == "found").collect();
    assert_eq!(found, vec![5]);
    let r = a.register("r").unwrap().0 as usize;
    assert_eq!(last.regs[5][r], 8);
}

#[test]
fn single_process_receives_its_own_pid() {
    let a = franklin();
    let c0 = initial_configuration(&a, &ring(&[5]));
    let c1 = step(&a, &c0, &tuple(&a, "t4")).unwrap().unwrap();
    assert_eq!(a.state_name(c1.states[0]), "found");
    assert_eq!(c1.regs[0][a.register("r").unwrap().0 as usize], 5);
    assert_eq!(step(&a, &c0, &tuple(&a, "t1")), Ok(None));
}

#[test]
fn updates_read_the_old_values() {
    let a = parse_algorithm(
        "algorithm Swap\nstates: s, u\ninit: s\nregisters: id, r, q\n\
         trans a: s: send right id; recv left r; goto u\n\
         trans b: u: set r := q; set q := r; goto u\n",
    )
    .unwrap();
    let run = Run::replay(&a, ring(&[1, 2]), &[tuple(&a, "a a"), tuple(&a, "b b")]).unwrap();
    let (r, q) = (a.register("r").unwrap().0 as usize, a.register("q").unwrap().0 as usize);
    assert_eq!((run.configs[1].regs[0][r], run.configs[1].regs[0][q]), (2, 1));
    assert_eq!((run.configs[2].regs[0][r], run.configs[2].regs[0][q]), (1, 2));
}

#[test]
fn receiving_without_a_sender_keeps_the_value() {
    let a = parse_algorithm("algorithm L\nstates: s\ninit: s\nregisters: id, r\ntrans a: s: recv left r; goto s\n").unwrap();
    let c0 = initial_configuration(&a, &ring(&[3, 1]));
    assert_eq!(intermediate_assignment(&a, &c0, &tuple(&a, "a a")), c0.regs);
    assert_eq!(step(&a, &c0, &tuple(&a, "a a")).unwrap().unwrap().regs, c0.regs);
}

#[test]
fn step_checks_the_tuple_size() {
    let a = franklin();
    let c0 = initial_configuration(&a, &ring(&[1, 2]));
    assert_eq!(step(&a, &c0, &tuple(&a, "t1")), Err(StepError::SizeMismatch { tuple: 1, ring: 2 }));
}

#[test]
fn blocking_process_is_reported() {
    let a = dkr();
    let c0 = initial_configuration(&a, &ring(&[1, 2]));
    assert_eq!(blocking_process(&a, &c0, &tuple(&a, "t1 t1")), None);
    assert_eq!(blocking_process(&a, &c0, &tuple(&a, "t1 t6")), Some(1));
    let c1 = step(&a, &c0, &tuple(&a, "t1 t1")).unwrap().unwrap();
    // Process 0 has r = 1 and r' = 2, so `r' < r` fails there.
    assert_eq!(blocking_process(&a, &c1, &tuple(&a, "t3 t3")), Some(0));
}

#[test]
fn franklin_two_process_runs() {
    let a = franklin();
    let runs: Vec<Run> = enumerate_runs(&a, &ring(&[1, 2]), 2).collect();
    let r = a.register("r").unwrap().0 as usize;
    assert!(runs.iter().any(|run| {
        let last = run.last();
        run.len() == 2
            && a.state_name(last.states[0]) == "passive"
            && a.state_name(last.states[1]) == "found"
            && last.regs.iter().all(|v| v[r] == 2)
    }));
    let stuck = parse_algorithm("algorithm N\nstates: s, u\ninit: s\nregisters: id\ntrans a: u: goto u\n").unwrap();
    assert_eq!(enumerate_runs(&stuck, &ring(&[1]), 3).count(), 0);
}

#[test]
fn enumeration_reaches_fig4_with_pruning() {
    let a = dkr();
    let want = corpus::fig4_tuples(&a).unwrap();
    let mut it = enumerate_runs(&a, &ring(&corpus::FIG4_RING), 6);
    let mut hit = None;
    while let Some(run) = it.next() {
        if run.tuples[..] != want[..run.len()] {
            it.prune();
        } else if run.len() == 6 {
            hit = Some(run);
            break;
        }
    }
    assert_eq!(hit.unwrap(), fig4_run(&a));
}

fn permutation(n: usize, seed: u64) -> Vec<Pid> {
    let mut pids: Vec<Pid> = (1..=n as Pid).collect();
    let mut s = seed;
    for i in (1..n).rev() {
        s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        pids.swap(i, (s >> 33) as usize % (i + 1));
    }
    pids
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Rotating the ring and every tuple by the same amount rotates the whole run.
    #[test]
    fn runs_are_rotation_equivariant(n in 1usize..=4, seed: u64, pick: usize, shift in 0usize..4, use_dkr: bool) {
        let a = if use_dkr { dkr() } else { franklin() };
        let rg = ring(&permutation(n, seed));
        let runs: Vec<Run> = enumerate_runs(&a, &rg, 3).take(200).collect();
        prop_assume!(!runs.is_empty());
        let run = &runs[pick % runs.len()];
        let s = shift % n;
        let rot = |v: &Vec<TransId>| (0..n).map(|i| v[(i + s) % n]).collect::<Vec<_>>();
        let tuples: Vec<Vec<TransId>> = run.tuples.iter().map(rot).collect();
        let moved = Run::replay(&a, rg.rotate(s), &tuples).expect("rotated run replays");
        for (c, c2) in run.configs.iter().zip(&moved.configs) {
            for i in 0..n {
                prop_assert_eq!(c2.states[i], c.states[(i + s) % n]);
                prop_assert_eq!(&c2.regs[i], &c.regs[(i + s) % n]);
            }
        }
    }

    /// Every prefix replays and `id` never changes.
    #[test]
    fn prefixes_replay_and_ids_are_stable(n in 1usize..=4, seed: u64, pick: usize) {
        let a = dkr();
        let rg = ring(&permutation(n, seed));
        let runs: Vec<Run> = enumerate_runs(&a, &rg, 4).take(300).collect();
        prop_assume!(!runs.is_empty());
        let run = &runs[pick % runs.len()];
        let id = a.id_register().0 as usize;
        for k in 1..=run.len() {
            prop_assert_eq!(Run::replay(&a, rg.clone(), &run.tuples[..k]).unwrap(), run.prefix(k));
        }
        for c in &run.configs {
            for i in 0..n {
                prop_assert_eq!(c.regs[i][id], rg.pid(i));
            }
        }
    }
}
