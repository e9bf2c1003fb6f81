use crate::cnf::Lit;

use super::varmap::{VarMeaning, VariableMap};

/// Sequential-counter encoding of `at most k of inputs`.
///
/// Auxiliary variable `s[i][j]` means "at least `j + 1` of `inputs[..=i]`
/// are true"; only its upward direction is enforced.
pub(crate) fn at_most(inputs: &[Lit], k: usize, varmap: &mut VariableMap) -> Vec<Vec<Lit>> {
    let n = inputs.len();
    if n <= k {
        return Vec::new();
    }
    if k == 0 {
        return inputs.iter().map(|&x| vec![!x]).collect();
    }

    let counter = varmap.new_counter(inputs.to_vec());
    let s: Vec<Vec<Lit>> = (0..n - 1)
        .map(|i| {
            (0..k)
                .map(|j| {
                    varmap
                        .allocate(VarMeaning::Counter {
                            counter,
                            index: i,
                            threshold: j + 1,
                        })
                        .positive()
                })
                .collect()
        })
        .collect();

    let mut clauses = vec![vec![!inputs[0], s[0][0]]];
    for j in 1..k {
        clauses.push(vec![!s[0][j]]);
    }
    for i in 1..n - 1 {
        let x = inputs[i];
        clauses.push(vec![!x, s[i][0]]);
        clauses.push(vec![!s[i - 1][0], s[i][0]]);
        for j in 1..k {
            clauses.push(vec![!x, !s[i - 1][j - 1], s[i][j]]);
            clauses.push(vec![!s[i - 1][j], s[i][j]]);
        }
        clauses.push(vec![!x, !s[i - 1][k - 1]]);
    }
    clauses.push(vec![!inputs[n - 1], !s[n - 2][k - 1]]);
    clauses
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sat::{Cdcl, CdclOutcome};
    use crate::instance::{AgentId, Graph, MapfInstance};

    fn scratch_map() -> VariableMap {
        let inst = MapfInstance::new(Graph::new(1), vec![].into(), vec![].into()).unwrap();
        VariableMap::new(&inst, Vec::new(), 0, 0)
    }

    /// For every assignment of the inputs, the counter clauses are
    /// satisfiable (for some auxiliary assignment) exactly when at most k
    /// inputs are true.
    #[test]
    fn sequential_counter_matches_enumeration() {
        for n in 1..=6usize {
            for k in 0..=n {
                let mut map = scratch_map();
                let inputs: Vec<Lit> = (0..n)
                    .map(|i| {
                        map.allocate(VarMeaning::Late {
                            agent: AgentId(0),
                            time: i,
                        })
                        .positive()
                    })
                    .collect();
                let clauses = at_most(&inputs, k, &mut map);
                let mut solver = Cdcl::new();
                solver.reserve_vars(map.len());
                for clause in &clauses {
                    solver.add_clause(clause);
                }
                for mask in 0u32..(1 << n) {
                    let ones = mask.count_ones() as usize;
                    let assumptions: Vec<Lit> = (0..n)
                        .map(|i| if mask >> i & 1 == 1 { inputs[i] } else { !inputs[i] })
                        .collect();
                    let sat = matches!(solver.solve_with(&assumptions), CdclOutcome::Sat(_));
                    assert_eq!(sat, ones <= k, "n={n} k={k} mask={mask:b}");
                }
            }
        }
    }
}
