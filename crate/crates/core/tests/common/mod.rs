#![allow(dead_code)]

use mapf_smt::cli::{generate_instance, GraphShape};
use mapf_smt::cnf::{CnfFormula, Lit, Provenance};
use mapf_smt::oracle::{oracle_solve, OracleOutcome};
use mapf_smt::{Graph, MapfInstance, Plan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct SuiteInstance {
    pub seed: u64,
    pub inst: MapfInstance,
    pub optimum: u64,
    pub witness: Plan,
}

/// Random shape for `seed`: a grid of at most 4x4 or a graph on at most 9 vertices.
pub fn shape_for(rng: &mut ChaCha8Rng) -> GraphShape {
    if rng.gen_bool(0.5) {
        GraphShape::Grid {
            width: rng.gen_range(2..=4),
            height: rng.gen_range(2..=4),
            obstacle_density: rng.gen_range(0.0..0.25),
        }
    } else {
        GraphShape::Random {
            vertices: rng.gen_range(4..=9),
            edge_probability: rng.gen_range(0.25..0.6),
        }
    }
}

/// `count` oracle-solvable instances with `k` cycling through 1, 2, 3.
/// Unsolvable draws are skipped, so the seeds are not contiguous.
pub fn solvable_suite(count: usize) -> Vec<SuiteInstance> {
    let mut suite = Vec::with_capacity(count);
    let mut seed = 0u64;
    while suite.len() < count {
        seed += 1;
        let k = 1 + suite.len() % 3;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = shape_for(&mut rng);
        let Ok(inst) = generate_instance(seed, shape, k) else {
            continue;
        };
        if let OracleOutcome::Optimal { cost, plan } = oracle_solve(&inst, None).unwrap() {
            suite.push(SuiteInstance {
                seed,
                inst,
                optimum: cost,
                witness: plan,
            });
        }
    }
    suite
}

/// Reachable but unsolvable instances, as certified by the oracle.
pub fn unsolvable_instances(count: usize) -> Vec<MapfInstance> {
    let mut out = Vec::new();
    let mut seed = 0u64;
    while out.len() < count {
        seed += 1;
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xdead_beef);
        let vertices = rng.gen_range(3..=6);
        let k = rng.gen_range(2..=3.min(vertices));
        let shape = GraphShape::Random {
            vertices,
            edge_probability: rng.gen_range(0.2..0.45),
        };
        let Ok(inst) = generate_instance(seed, shape, k) else {
            continue;
        };
        if oracle_solve(&inst, None).unwrap() == OracleOutcome::NoSolution {
            out.push(inst);
        }
    }
    out
}

pub fn p3_swap() -> MapfInstance {
    let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
    MapfInstance::new(g, vec![0, 2].into(), vec![2, 0].into()).unwrap()
}

pub fn c4() -> MapfInstance {
    let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
    MapfInstance::new(g, vec![0, 2].into(), vec![2, 0].into()).unwrap()
}

/// Random CNF over `vars` variables with clauses of width 1..=3.
pub fn random_cnf(rng: &mut ChaCha8Rng, vars: u32) -> CnfFormula {
    let mut f = CnfFormula::new();
    f.ensure_vars(vars);
    let clauses = rng.gen_range(1..=(vars as usize * 9 / 2).max(2));
    for _ in 0..clauses {
        let width = rng.gen_range(1..=3.min(vars as usize).max(1));
        let lits: Vec<Lit> = (0..width)
            .map(|_| {
                let v = rng.gen_range(1..=vars) as i32;
                Lit::from_dimacs(if rng.gen_bool(0.5) { v } else { -v }).unwrap()
            })
            .collect();
        f.add_clause(&lits, Provenance::External).unwrap();
    }
    f
}

/// Exhaustive satisfiability check over all `2^vars` assignments.
pub fn truth_table_sat(f: &CnfFormula) -> bool {
    let masks: Vec<(u32, u32)> = f
        .clauses()
        .iter()
        .map(|c| {
            c.iter().fold((0u32, 0u32), |(pos, neg), l| {
                let bit = 1u32 << (l.var().0 - 1);
                if l.is_positive() {
                    (pos | bit, neg)
                } else {
                    (pos, neg | bit)
                }
            })
        })
        .collect();
    let n = f.num_vars();
    (0u64..(1u64 << n)).any(|m| {
        let m = m as u32;
        masks.iter().all(|&(pos, neg)| m & pos != 0 || !m & neg != 0)
    })
}

/// Does every assignment satisfying `f` also satisfy `clause`?
pub fn implied(f: &CnfFormula, clause: &[Lit]) -> bool {
    let mut g = f.clone();
    for &l in clause {
        g.add_clause(&[!l], Provenance::External).unwrap();
    }
    !truth_table_sat(&g)
}
