//! Turning a model of `ψ_D` back into a concrete ring and run.
//!
//! The order guards in the table force `π_<` between first-row cells; any linear
//! extension of that order, read as pid ranks, yields a run whose table is the input.

use super::DecideError;
use crate::compile::CompiledAlgorithm;
use crate::dataspec::{eval_local, Spec};
use crate::model::{Algorithm, Pid, Ring, Run, TransId};
use crate::table::{path_rel, table_of_run, Table};

/// `prec[i][i']`: column `i` must carry a smaller pid than column `i'`.
pub fn precedence(c: &CompiledAlgorithm, table: &Table) -> Result<Vec<Vec<bool>>, DecideError> {
    let rel = path_rel(&c.store, &c.dummy_extended, table, c.pi_less);
    let n = table.width();
    let mut prec: Vec<Vec<bool>> =
        (0..n).map(|i| (0..n).map(|i2| rel.contains(table.pos(i, 0), table.pos(i2, 0))).collect()).collect();
    for m in 0..n {
        for i in 0..n {
            if prec[i][m] {
                for j in 0..n {
                    if prec[m][j] {
                        prec[i][j] = true;
                    }
                }
            }
        }
    }
    if let Some(i) = (0..n).find(|&i| prec[i][i]) {
        return Err(DecideError::NotAPartialOrder { column: i });
    }
    Ok(prec)
}

fn tuples_of(table: &Table) -> Vec<Vec<TransId>> {
    (1..table.rows()).map(|j| (0..table.width()).map(|i| table.get(i, j)).collect()).collect()
}

/// Replays the table under the ring that gives column `order[r]` the pid `r + 1`.
fn run_for(algo: &Algorithm, c: &CompiledAlgorithm, table: &Table, order: &[usize]) -> Result<Run, DecideError> {
    let mut pids = vec![0 as Pid; order.len()];
    for (rank, &i) in order.iter().enumerate() {
        pids[i] = rank as Pid + 1;
    }
    let ring = Ring::new(pids).expect("ranks are distinct");
    let run = Run::replay(algo, ring, &tuples_of(table))
        .map_err(|round| DecideError::RunReverificationFailed { reason: format!("round {round} is not applicable") })?;
    let back =
        table_of_run(&c.dummy_extended, &run).map_err(|e| DecideError::RunReverificationFailed { reason: e.to_string() })?;
    if &back != table {
        return Err(DecideError::RunReverificationFailed { reason: "the replayed run has a different table".into() });
    }
    Ok(run)
}

/// Linear extensions of `prec` in lexicographic order of the column sequence.
fn linear_extensions(prec: &[Vec<bool>]) -> impl Iterator<Item = Vec<usize>> + '_ {
    let n = prec.len();
    // Depth-first with an explicit stack of (prefix, next candidate to try).
    let mut stack: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0)];
    std::iter::from_fn(move || {
        while let Some((prefix, from)) = stack.pop() {
            if prefix.len() == n {
                return Some(prefix);
            }
            let placed = |i: usize| prefix.contains(&i);
            let ready = (from..n).find(|&i| !placed(i) && (0..n).all(|p| !prec[p][i] || placed(p)));
            if let Some(i) = ready {
                stack.push((prefix.clone(), i + 1));
                let mut next = prefix;
                next.push(i);
                stack.push((next, 0));
            }
        }
        None
    })
}

/// The ring and run for the lexicographically least linear extension of the order.
pub fn realize_ring(algo: &Algorithm, c: &CompiledAlgorithm, table: &Table) -> Result<(Ring, Run), DecideError> {
    let prec = precedence(c, table)?;
    let order = linear_extensions(&prec).next().expect("a strict partial order has a linear extension");
    let run = run_for(algo, c, table, &order)?;
    Ok((run.ring.clone(), run))
}

/// The first realization of `table` whose run violates `spec` for the process in
/// column 0.
pub fn find_violating_run(
    algo: &Algorithm,
    c: &CompiledAlgorithm,
    spec: &Spec,
    table: &Table,
) -> Result<(Ring, Run), DecideError> {
    let prec = precedence(c, table)?;
    for order in linear_extensions(&prec) {
        let run = run_for(algo, c, table, &order)?;
        if !eval_local(algo, &run, 0, (0, 0), &spec.body) {
            return Ok((run.ring.clone(), run));
        }
    }
    Err(DecideError::ExhaustedWithoutViolation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::compile;
    use crate::corpus;
    use crate::model::parse_algorithm;

    #[test]
    fn extensions_are_lexicographic_and_complete() {
        let none = vec![vec![false; 3]; 3];
        let all: Vec<_> = linear_extensions(&none).collect();
        assert_eq!(all.len(), 6);
        assert_eq!(all[0], vec![0, 1, 2]);
        assert_eq!(all[5], vec![2, 1, 0]);
        let mut chain = vec![vec![false; 3]; 3];
        chain[2][0] = true;
        chain[0][1] = true;
        chain[2][1] = true;
        assert_eq!(linear_extensions(&chain).collect::<Vec<_>>(), vec![vec![2, 0, 1]]);
    }

    #[test]
    fn fig4_order_is_recovered() {
        let algo = parse_algorithm(corpus::DKR).unwrap();
        let c = compile(&algo);
        let ext = &c.dummy_extended;
        let ring = Ring::new(corpus::FIG4_RING.to_vec()).unwrap();
        let run = Run::replay(ext, ring.clone(), &corpus::fig4_tuples(ext).unwrap()).unwrap();
        let table = table_of_run(ext, &run).unwrap();
        let prec = precedence(&c, &table).unwrap();
        for i in 0..table.width() {
            for j in 0..table.width() {
                if prec[i][j] {
                    assert!(ring.pid(i) < ring.pid(j), "{i} before {j}");
                }
            }
        }
        let (ring2, run2) = realize_ring(&algo, &c, &table).unwrap();
        assert_eq!(ring2.size(), 7);
        assert_eq!(table_of_run(ext, &run2).unwrap(), table);
    }

    #[test]
    fn single_guard_free_column() {
        let algo = parse_algorithm("algorithm A\nstates: s\ninit: s\nregisters: id\ntrans a: s: goto s\n").unwrap();
        let c = compile(&algo);
        let ext = &c.dummy_extended;
        let a = ext.transition("a").unwrap();
        let table = Table::from_columns(&[vec![ext.dummy().unwrap(), a]]).unwrap();
        let (ring, run) = realize_ring(&algo, &c, &table).unwrap();
        assert_eq!(ring.pids(), &[1]);
        assert_eq!(run.len(), 1);
    }
}
