mod common;

use std::collections::{BTreeSet, HashSet};

use mapf_smt::cbs::{expand, CtNode};
use mapf_smt::cli::{generate_instance, parse_graph, write_graph};
use mapf_smt::cnf::{Lit, Provenance};
use mapf_smt::encoder::{encode_basic, encode_complete};
use mapf_smt::engines::{smtcbs_run, smtcbs_fixed, Budget, FixedOutcome};
use mapf_smt::instance::{path_cost, validate_transition};
use mapf_smt::lowlevel::constrained_shortest_path;
use mapf_smt::oracle::{joint_successors, oracle_solve, OracleOutcome};
use mapf_smt::{
    cost_lower_bound, sum_of_costs, validate_plan, AgentId, Configuration, Constraint, Limits,
    MapfInstance, Plan, SatOptions,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn small_instance(seed: u64, k: usize) -> Option<MapfInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let shape = common::shape_for(&mut rng);
    generate_instance(seed, shape, k).ok()
}

fn sorted(clause: &[Lit]) -> Vec<Lit> {
    let mut c = clause.to_vec();
    c.sort();
    c
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// The validator accepts a transition exactly when the joint successor
    /// generator produces it.
    #[test]
    fn transition_rules_match_successor_generation(seed in any::<u64>(), k in 1usize..=3) {
        let Some(inst) = small_instance(seed, k) else { return Ok(()) };
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 1);
        let from = inst.start().clone();
        let successors: HashSet<Vec<usize>> =
            joint_successors(&inst, from.positions(), 0).into_iter().collect();
        for _ in 0..30 {
            let next: Vec<usize> = from
                .positions()
                .iter()
                .map(|&u| {
                    let options = inst.graph().neighbors(u);
                    if options.is_empty() || rng.gen_bool(0.3) { u } else { options[rng.gen_range(0..options.len())] }
                })
                .collect();
            let violations = validate_transition(&from, &Configuration::new(next.clone()), inst.graph()).unwrap();
            prop_assert_eq!(violations.is_empty(), successors.contains(&next));
        }
    }

    /// Waiting at the goal after arrival is free.
    #[test]
    fn trailing_goal_waits_cost_nothing(path in proptest::collection::vec(0usize..5, 1..8), extra in 0usize..5) {
        let mut padded = path.clone();
        padded.extend(std::iter::repeat(*path.last().unwrap()).take(extra));
        prop_assert_eq!(path_cost(&path), path_cost(&padded));
        let plan = Plan::new(vec![path.clone()]).unwrap();
        prop_assert_eq!(sum_of_costs(&plan), path_cost(&path) as u64);
    }

    #[test]
    fn native_format_round_trip(seed in any::<u64>(), k in 0usize..=4) {
        let Some(inst) = small_instance(seed, k) else { return Ok(()) };
        let text = write_graph(&inst);
        let back = parse_graph(&text).unwrap();
        prop_assert_eq!(&back, &inst);
        prop_assert_eq!(write_graph(&back), text);
    }

    #[test]
    fn generation_is_deterministic(seed in any::<u64>(), k in 1usize..=3) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let shape = common::shape_for(&mut rng);
        let a = generate_instance(seed, shape, k);
        let b = generate_instance(seed, shape, k);
        prop_assert_eq!(a.ok(), b.ok());
    }

    /// A constrained path starts and ends right, moves along edges, obeys every
    /// constraint and is never shorter than the unconstrained distance.
    #[test]
    fn low_level_respects_constraints(seed in any::<u64>(), n in 0usize..6) {
        let Some(inst) = small_instance(seed, 1) else { return Ok(()) };
        let agent = AgentId(0);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 2);
        let nv = inst.graph().num_vertices();
        let constraints: Vec<Constraint> = (0..n)
            .map(|_| Constraint::Vertex { agent, vertex: rng.gen_range(0..nv), time: rng.gen_range(1..6) })
            .collect();
        let Some(path) = constrained_shortest_path(&inst, agent, &constraints) else { return Ok(()) };
        prop_assert_eq!(path[0], inst.start().get(agent));
        prop_assert_eq!(*path.last().unwrap(), inst.goal().get(agent));
        prop_assert!(path.windows(2).all(|w| w[0] == w[1] || inst.graph().has_edge(w[0], w[1])));
        for c in &constraints {
            if let Constraint::Vertex { vertex, time, .. } = *c {
                let at = path.get(time).copied().unwrap_or(*path.last().unwrap());
                prop_assert_ne!(at, vertex);
            }
        }
        prop_assert!(path_cost(&path) >= inst.distance(agent).unwrap());
    }

    /// Splitting a constraint-tree node never lowers the cost.
    #[test]
    fn cbs_children_cost_at_least_parent(seed in any::<u64>()) {
        let Some(inst) = small_instance(seed, 3) else { return Ok(()) };
        let paths: Vec<Vec<usize>> = inst
            .agents()
            .map(|a| constrained_shortest_path(&inst, a, &[]).unwrap())
            .collect();
        let cost = paths.iter().map(|p| path_cost(p) as u64).sum();
        let root = CtNode { constraints: vec![], paths, cost };
        let conflicts = validate_plan(&root.plan().unwrap(), &inst).unwrap();
        if let Some(conflict) = conflicts.first() {
            for child in expand(&root, conflict, &inst) {
                prop_assert!(child.cost >= root.cost);
                prop_assert_eq!(child.constraints.len(), 1);
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// An optimal collision-free plan satisfies both the complete model and
    /// the basic model with any recorded conflicts, at its own cost and above.
    #[test]
    fn witnesses_satisfy_both_models(seed in any::<u64>(), k in 1usize..=3, slack in 0u64..=1) {
        let Some(inst) = small_instance(seed, k) else { return Ok(()) };
        let OracleOutcome::Optimal { cost, plan } = oracle_solve(&inst, None).unwrap() else { return Ok(()) };
        let xi = cost + slack;
        let (complete, map) = encode_complete(xi, &inst).unwrap();
        let model = map.induced_model(&plan).unwrap();
        prop_assert_eq!(complete.first_violated(&model), None);

        let mut conflicts = BTreeSet::new();
        let run = smtcbs_fixed(&mut conflicts, xi, &inst, &SatOptions::default(), &Budget::default()).unwrap();
        prop_assert!(matches!(run.outcome, FixedOutcome::Solved(_)));
        let (basic, basic_map) = encode_basic(conflicts.iter(), xi, &inst).unwrap();
        let model = basic_map.induced_model(&plan).unwrap();
        prop_assert_eq!(basic.first_violated(&model), None);
    }

    /// Every refinement clause of the lazy engine is a clause of the complete
    /// model at the same bound.
    #[test]
    fn refinements_are_complete_model_clauses(seed in any::<u64>(), k in 2usize..=3) {
        let Some(inst) = small_instance(seed, k) else { return Ok(()) };
        if oracle_solve(&inst, None).unwrap() == OracleOutcome::NoSolution { return Ok(()) }
        let run = smtcbs_run(&inst, &Limits::default(), &SatOptions::default()).unwrap();
        let (lazy, _) = run.last_formula.unwrap();
        let xi = run.report.cost.unwrap();
        let (complete, _) = encode_complete(xi, &inst).unwrap();
        let eager: HashSet<Vec<Lit>> = complete.clauses().iter().map(|c| sorted(c)).collect();
        for (clause, prov) in lazy.iter() {
            if prov == Provenance::ConflictRefinement {
                prop_assert!(eager.contains(&sorted(clause)), "{:?} missing from the complete model", clause);
            }
        }
        prop_assert!(lazy.len() <= complete.len());
        prop_assert!(cost_lower_bound(&inst).unwrap() <= xi);
    }
}
