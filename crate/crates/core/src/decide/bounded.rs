//! Bounded-width search: every table up to a width cap, checked with the evaluator.

use crate::model::{Algorithm, StateId, TransId};
use crate::table::{Evaluator, LocalId, Store, Table};
use rayon::prelude::*;

/// Every column of height `k + 1` that starts with the dummy and follows the control
/// flow: each cell's source is the goto of the cell above. Lexicographic order.
pub fn valid_columns(ext: &Algorithm, k: usize) -> Vec<Vec<TransId>> {
    let dummy = ext.dummy().expect("extended algorithm");
    let mut out = Vec::new();
    let mut col = vec![dummy];
    extend(ext, k, &mut col, &mut out);
    out
}

fn extend(ext: &Algorithm, k: usize, col: &mut Vec<TransId>, out: &mut Vec<Vec<TransId>>) {
    if col.len() == k + 1 {
        out.push(col.clone());
        return;
    }
    let at: StateId = ext.trans(*col.last().expect("non-empty")).target;
    for t in ext.trans_ids().filter(|&t| ext.trans(t).source == at) {
        col.push(t);
        extend(ext, k, col, out);
        col.pop();
    }
}

fn holds(store: &Store, ext: &Algorithm, psi: LocalId, table: &Table) -> bool {
    Evaluator::new(store, ext, table).holds(psi, 0)
}

/// The first table in (width, column-index) order of width at most `width_cap` that
/// satisfies `psi` at `(0, 0)`.
pub fn first_model(store: &Store, ext: &Algorithm, psi: LocalId, k: usize, width_cap: usize) -> Option<Table> {
    let cols = valid_columns(ext, k);
    if cols.is_empty() {
        return None;
    }
    let base = cols.len() as u128;
    let table_at = |w: usize, mut idx: u128| {
        let mut picked = vec![0usize; w];
        for slot in picked.iter_mut().rev() {
            *slot = (idx % base) as usize;
            idx /= base;
        }
        let columns: Vec<Vec<TransId>> = picked.into_iter().map(|c| cols[c].clone()).collect();
        Table::from_columns(&columns).expect("valid columns share a height")
    };
    for w in 1..=width_cap {
        let total = base.checked_pow(w as u32).expect("width cap keeps the count small");
        let total = u64::try_from(total).expect("width cap keeps the count small");
        let hit = (0..total).into_par_iter().find_first(|&i| holds(store, ext, psi, &table_at(w, i as u128)));
        if let Some(i) = hit {
            return Some(table_at(w, i as u128));
        }
    }
    None
}

/// Deletes columns greedily, left to right, while the table still satisfies `psi`.
pub fn minimize(store: &Store, ext: &Algorithm, psi: LocalId, table: Table) -> Table {
    let mut cur = table;
    let mut i = 0;
    while i < cur.width() {
        match cur.without_column(i) {
            Some(t) if holds(store, ext, psi, &t) => cur = t,
            _ => i += 1,
        }
    }
    cur
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::compile;
    use crate::corpus;
    use crate::model::parse_algorithm;

    #[test]
    fn columns_follow_control_flow() {
        let c = compile(&parse_algorithm(corpus::DKR).unwrap());
        let ext = &c.dummy_extended;
        let cols = valid_columns(ext, 2);
        assert!(!cols.is_empty());
        for col in &cols {
            assert_eq!(col[0], ext.dummy().unwrap());
            for w in col.windows(2) {
                assert_eq!(ext.trans(w[0]).target, ext.trans(w[1]).source);
            }
        }
        let mut sorted = cols.clone();
        sorted.sort();
        sorted.dedup();
        assert_eq!(sorted, cols);
    }

    #[test]
    fn minimal_models_stay_models() {
        let c = compile(&parse_algorithm(corpus::FRANKLIN).unwrap());
        let ext = &c.dummy_extended;
        let t = first_model(&c.store, ext, c.psi_d, 1, 3).expect("one-round runs exist");
        assert_eq!(t.width(), 1);
        let m = minimize(&c.store, ext, c.psi_d, t.clone());
        assert!(holds(&c.store, ext, c.psi_d, &m));
        assert!(m.width() <= t.width());
    }
}
