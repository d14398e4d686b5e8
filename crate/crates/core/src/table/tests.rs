use super::*;
use crate::corpus;
use crate::model::{parse_algorithm, Constituent, StateId};
use proptest::prelude::*;

fn franklin() -> Algorithm {
    parse_algorithm(corpus::FRANKLIN).unwrap()
}

fn t(algo: &Algorithm, name: &str) -> TransId {
    algo.transition(name).unwrap()
}

fn small_table(algo: &Algorithm) -> Table {
    let c = |names: [&str; 3]| names.iter().map(|n| t(algo, n)).collect::<Vec<_>>();
    Table::from_columns(&[c(["t1", "t2", "t3"]), c(["t1", "t4", "t5"]), c(["t2", "t2", "t2"])]).unwrap()
}

#[test]
fn positions_are_column_major() {
    let a = franklin();
    let tb = small_table(&a);
    assert_eq!((tb.width(), tb.height(), tb.len()), (3, 2, 9));
    assert_eq!(tb.pos(1, 2), 5);
    assert_eq!(tb.coords(5), (1, 2));
    assert_eq!(tb.get(1, 1), t(&a, "t4"));
    assert_eq!(tb.column(2), &[t(&a, "t2"); 3]);
    let m = mutate_table(&tb, (0, 0), t(&a, "t5"));
    assert_eq!(m.get(0, 0), t(&a, "t5"));
    assert_eq!(m.without_column(0).unwrap().column(0), tb.column(1));
}

#[test]
fn rejects_bad_shapes() {
    let a = franklin();
    assert_eq!(Table::from_columns(&[]), Err(TableError::Shape));
    assert_eq!(Table::from_columns(&[vec![t(&a, "t1")]]), Err(TableError::Shape));
    assert!(matches!(
        Table::from_columns(&[vec![t(&a, "t1"); 2], vec![t(&a, "t1"); 3]]),
        Err(TableError::Ragged { column: 1, .. })
    ));
}

#[test]
fn json_round_trip() {
    let a = franklin();
    let tb = small_table(&a);
    let text = serde_json::to_string(&tb.to_json(&a)).unwrap();
    assert!(text.starts_with(r#"{"width":3,"height":2,"columns":[["t1","t2","t3"]"#));
    assert_eq!(Table::parse_json(&a, &text).unwrap(), tb);
    let bad = text.replace("\"t4\"", "\"nope\"");
    assert_eq!(Table::parse_json(&a, &bad), Err(TableError::UnknownTransition("nope".into())));
    let lying = text.replace("\"width\":3", "\"width\":4");
    assert!(matches!(Table::parse_json(&a, &lying), Err(TableError::Json(_))));
}

#[test]
fn steps_do_not_wrap() {
    let a = franklin();
    let tb = small_table(&a);
    let mut s = Store::new();
    let r = s.right();
    let d = s.down();
    let rr = path_rel(&s, &a, &tb, r);
    assert!(rr.contains(tb.pos(0, 1), tb.pos(1, 1)));
    assert!(rr.image(tb.pos(2, 1)).is_empty());
    let rd = path_rel(&s, &a, &tb, d);
    assert!(rd.contains(tb.pos(2, 0), tb.pos(2, 1)));
    assert!(rd.image(tb.pos(2, 2)).is_empty());
}

#[test]
fn atoms_and_modalities() {
    let a = franklin();
    let tb = small_table(&a);
    let mut s = Store::new();
    let t4 = s.exact(t(&a, "t4"));
    let r = s.right();
    let d = s.down();
    let p = s.concat(r, d);
    let f = s.diamond(p, t4);
    assert!(eval_lcpdl(&s, &a, &tb, f, (0, 0)));
    assert!(!eval_lcpdl(&s, &a, &tb, f, (0, 1)));
    let at = s.exact(t(&a, "t2"));
    let sr = s_star_right(&mut s);
    let all = s.boxed(sr, at);
    assert!(!eval_lcpdl(&s, &a, &tb, all, (0, 0)));
    assert!(eval_lcpdl(&s, &a, &tb, all, (2, 0)));
    assert!(!eval_lcpdl(&s, &a, &tb, all, (0, 1)));
    assert!(eval_lcpdl(&s, &a, &tb, all, (1, 2)) == (tb.get(1, 2) == t(&a, "t2")));
    let ff = s.ff();
    assert!(s.is_false(ff));
    assert!(!eval_lcpdl(&s, &a, &tb, ff, (0, 0)));
    let e = s.eps();
    let lp = s.loop_(e);
    assert!(eval_lcpdl(&s, &a, &tb, lp, (1, 0)));
}

fn s_star_right(s: &mut Store) -> PathId {
    let r = s.right();
    s.star(r)
}

#[test]
fn automaton_matches_expression() {
    // (right . down)* . ?t2 as an automaton and as an expression.
    let a = franklin();
    let tb = small_table(&a);
    let mut s = Store::new();
    let r = s.right();
    let d = s.down();
    let t2 = s.exact(t(&a, "t2"));
    let test = s.test(t2);
    let rd = s.concat(r, d);
    let star = s.star(rd);
    let expr = s.concat(star, test);
    let aut = s.automaton_path(PathAutomaton {
        states: 3,
        initial: 0,
        finals: vec![2],
        edges: vec![(0, r, 1), (1, d, 0), (0, test, 2)],
    });
    assert_eq!(path_rel(&s, &a, &tb, expr), path_rel(&s, &a, &tb, aut));
}

#[test]
fn text_round_trip() {
    let a = franklin();
    let tb = small_table(&a);
    let mut s = Store::new();
    let r = s.right();
    let l = s.left();
    let u = s.up();
    let t2 = s.exact(t(&a, "t2"));
    let g = s.atom(Constituent::Goto(StateId(0)));
    let test = s.test(t2);
    let rs = s.star(r);
    let ts = s.star(test);
    let p1 = s.seq([rs, test, l, ts]);
    let p2 = s.union(p1, u);
    let aut = s.automaton_path(PathAutomaton { states: 2, initial: 0, finals: vec![1], edges: vec![(0, p2, 1), (1, p1, 0)] });
    let d1 = s.diamond(p2, g);
    let d2 = s.loop_(aut);
    let body = s.and(d1, d2);
    let nb = s.not(body);
    let root = s.or(nb, d1);
    let text = emit(&s, &a, root);
    let mut s2 = Store::new();
    let root2 = parse_lcpdl(&mut s2, &a, &text).unwrap();
    assert_eq!(emit(&s2, &a, root2), text);
    for x in 0..tb.len() {
        let (i, j) = tb.coords(x);
        assert_eq!(eval_lcpdl(&s, &a, &tb, root, (i, j)), eval_lcpdl(&s2, &a, &tb, root2, (i, j)));
    }
}

#[test]
fn parses_hand_written_formulas() {
    let a = franklin();
    let tb = small_table(&a);
    let mut s = Store::new();
    let f = parse_lcpdl(&mut s, &a, "loop(eps)").unwrap();
    assert!(eval_lcpdl(&s, &a, &tb, f, (1, 0)));
    let f = parse_lcpdl(&mut s, &a, "<right . down>exact(t4) & !false").unwrap();
    assert!(eval_lcpdl(&s, &a, &tb, f, (0, 0)));
    let e = parse_lcpdl(&mut s, &a, "loop(eps").unwrap_err();
    assert_eq!(e.offset, 8);
    let e = parse_lcpdl(&mut s, &a, "exact(t9)").unwrap_err();
    assert!(e.message.contains("t9"));
}

fn arb_path() -> impl Strategy<Value = Vec<u8>> {
    prop::collection::vec(0u8..7, 1..12)
}

/// Builds a path from a small opcode program on a stack.
fn build(s: &mut Store, a: &Algorithm, ops: &[u8]) -> PathId {
    let mut stack: Vec<PathId> = Vec::new();
    for &op in ops {
        let p = match op {
            0 => s.right(),
            1 => s.down(),
            2 => {
                let x = s.exact(t(a, "t2"));
                s.test(x)
            }
            3 => match stack.pop() {
                Some(p) => s.star(p),
                None => s.eps(),
            },
            4 => match (stack.pop(), stack.pop()) {
                (Some(x), Some(y)) => s.concat(y, x),
                (Some(x), None) => x,
                _ => s.left(),
            },
            5 => match (stack.pop(), stack.pop()) {
                (Some(x), Some(y)) => s.union(y, x),
                (Some(x), None) => x,
                _ => s.up(),
            },
            _ => match stack.pop() {
                Some(p) => s.converse(p),
                None => s.left(),
            },
        };
        stack.push(p);
    }
    let mut acc = stack.pop().unwrap();
    while let Some(p) = stack.pop() {
        acc = s.concat(p, acc);
    }
    acc
}

proptest! {
    #[test]
    fn converse_is_transpose_and_involution(ops in arb_path()) {
        let a = franklin();
        let tb = small_table(&a);
        let mut s = Store::new();
        let p = build(&mut s, &a, &ops);
        let c = s.converse(p);
        prop_assert_eq!(s.converse(c), p);
        prop_assert_eq!(path_rel(&s, &a, &tb, c), path_rel(&s, &a, &tb, p).transpose());
    }

    #[test]
    fn text_format_preserves_meaning(ops in arb_path()) {
        let a = franklin();
        let tb = small_table(&a);
        let mut s = Store::new();
        let p = build(&mut s, &a, &ops);
        let x = s.exact(t(&a, "t4"));
        let f = s.diamond(p, x);
        let mut s2 = Store::new();
        let f2 = parse_lcpdl(&mut s2, &a, &emit(&s, &a, f)).unwrap();
        let mut e1 = Evaluator::new(&s, &a, &tb);
        let mut e2 = Evaluator::new(&s2, &a, &tb);
        prop_assert_eq!(e1.sat(f), e2.sat(f2));
    }
}
