//! Propositional models of MAPF at a fixed sum-of-costs bound ξ.
//!
//! Vertex variables `X(a, v, t)` exist only where `v` is in level `t` of
//! agent `a`'s MDD, built with bound `dist(a) + Δ` where `Δ = ξ - ξ₀`. All
//! agents share the horizon `μ = max dist(a) + Δ`; past its own bound an agent
//! stays at its goal. Directed move/wait variables `E(a, u, v, t)` link
//! consecutive layers, and late indicators `L(a, t)` for `t` in
//! `dist(a)..dist(a) + Δ` feed a sequential counter bounding their number by
//! `Δ`.
//!
//! The basic model ([`encode_basic`]) only says that every agent follows a
//! valid path within the cost bound; collisions are excluded one at a time by
//! [`refine`]. The complete model ([`encode_complete`]) adds every
//! collision-exclusion clause up front.

mod cardinality;
mod varmap;

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

pub use varmap::{VarMeaning, VariableMap};

use crate::cnf::{CnfFormula, Lit, Model, Provenance};
use crate::error::{MapfError, Result};
use crate::instance::{cost_lower_bound, AgentId, Conflict, ConflictKind, MapfInstance, Plan};
use crate::lowlevel::build_mdd;

/// Below this many candidates, at-most-one is encoded pairwise.
const PAIRWISE_AMO_LIMIT: usize = 8;

/// What [`refine`] did with a conflict.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Refinement {
    Added,
    /// The clause was already present.
    Duplicate,
    /// A variable of the clause does not exist, so the conflict cannot occur.
    Vacuous,
}

/// Path-validity and cost clauses shared by both models.
fn encode_paths(xi: u64, inst: &MapfInstance) -> Result<(CnfFormula, VariableMap)> {
    let lower = cost_lower_bound(inst)?;
    if xi < lower {
        return Err(MapfError::Usage(format!(
            "cost bound {xi} is below the lower bound {lower}"
        )));
    }
    let delta = (xi - lower) as usize;
    let mdds = inst
        .agents()
        .map(|a| build_mdd(inst, a, inst.distance(a).unwrap() + delta))
        .collect::<Result<Vec<_>>>()?;
    let mut map = VariableMap::new(inst, mdds, xi, lower);
    let horizon = map.horizon();
    let mut formula = CnfFormula::new();

    for agent in inst.agents() {
        for t in 0..=horizon {
            for &v in map.level(agent, t).to_vec().iter() {
                map.allocate(VarMeaning::Vertex {
                    agent,
                    vertex: v,
                    time: t,
                });
            }
        }
    }
    for agent in inst.agents() {
        for t in 0..horizon {
            let next = map.level(agent, t + 1).to_vec();
            for u in map.level(agent, t).to_vec() {
                for &w in &next {
                    if w == u || inst.graph().has_edge(u, w) {
                        map.allocate(VarMeaning::Edge {
                            agent,
                            from: u,
                            to: w,
                            time: t,
                        });
                    }
                }
            }
        }
    }

    let mut clauses: Vec<Vec<Lit>> = Vec::new();
    for agent in inst.agents() {
        let x = |map: &VariableMap, v, t| map.vertex_var(agent, v, t).unwrap().positive();
        clauses.push(vec![x(&map, inst.start().get(agent), 0)]);
        if horizon > 0 {
            clauses.push(vec![x(&map, inst.goal().get(agent), horizon)]);
        }
        for t in 1..horizon {
            let level: Vec<Lit> = map.level(agent, t).iter().map(|&v| x(&map, v, t)).collect();
            clauses.push(level.clone());
            if level.len() < PAIRWISE_AMO_LIMIT {
                for (i, &a) in level.iter().enumerate() {
                    for &b in &level[i + 1..] {
                        clauses.push(vec![!a, !b]);
                    }
                }
            } else {
                clauses.extend(cardinality::at_most(&level, 1, &mut map));
            }
        }
        for t in 0..horizon {
            let next = map.level(agent, t + 1).to_vec();
            for u in map.level(agent, t).to_vec() {
                let xu = x(&map, u, t);
                let mut out = vec![!xu];
                for &w in &next {
                    if let Some(e) = map.edge_var(agent, u, w, t) {
                        let e = e.positive();
                        out.push(e);
                        clauses.push(vec![!e, xu]);
                        clauses.push(vec![!e, x(&map, w, t + 1)]);
                    }
                }
                clauses.push(out);
            }
        }
    }
    for clause in &clauses {
        formula.add_clause(clause, Provenance::PathValidity)?;
    }
    for clause in cost_bound_cardinality(&mut map, xi)? {
        formula.add_clause(&clause, Provenance::Cost)?;
    }
    formula.ensure_vars(map.len() as u32);
    Ok((formula, map))
}

/// Clauses bounding the sum-of-costs by `xi`: late indicators `L(a, t)` are
/// forced by any non-goal position at or after `t` and at most `ξ - ξ₀` of
/// them may hold. Allocates the indicator and counter variables in `map`.
pub fn cost_bound_cardinality(map: &mut VariableMap, xi: u64) -> Result<Vec<Vec<Lit>>> {
    let lower = map.lower_bound();
    if xi < lower {
        return Err(MapfError::Usage(format!(
            "cost bound {xi} is below the lower bound {lower}"
        )));
    }
    let delta = (xi - lower) as usize;
    let mut clauses = Vec::new();
    let mut indicators = Vec::new();
    for a in 0..map.num_agents() {
        let agent = AgentId(a);
        let (start, end) = (map.mdds()[a].distance(), map.mdds()[a].bound());
        let goal = map.goal(agent);
        let lates: Vec<Lit> = (start..end)
            .map(|t| map.allocate(VarMeaning::Late { agent, time: t }).positive())
            .collect();
        for (i, t) in (start..end).enumerate() {
            for &v in map.level(agent, t) {
                if v != goal {
                    let xv = map.vertex_var(agent, v, t).unwrap().positive();
                    clauses.push(vec![!xv, lates[i]]);
                }
            }
            if i + 1 < lates.len() {
                clauses.push(vec![!lates[i + 1], lates[i]]);
            }
        }
        indicators.extend(lates);
    }
    clauses.extend(cardinality::at_most(&indicators, delta, map));
    Ok(clauses)
}

/// Incomplete model H(ξ): valid paths within the cost bound plus one
/// exclusion clause per recorded conflict, and no other collision clauses.
pub fn encode_basic<'a>(
    conflicts: impl IntoIterator<Item = &'a Conflict>,
    xi: u64,
    inst: &MapfInstance,
) -> Result<(CnfFormula, VariableMap)> {
    let (mut formula, map) = encode_paths(xi, inst)?;
    for conflict in conflicts {
        refine(&mut formula, &map, conflict)?;
    }
    Ok((formula, map))
}

/// Complete model F(ξ): H(ξ) without conflicts plus mutual exclusion of every
/// shared (vertex, time) and every pair of opposite traversals.
pub fn encode_complete(xi: u64, inst: &MapfInstance) -> Result<(CnfFormula, VariableMap)> {
    let (mut formula, map) = encode_paths(xi, inst)?;
    let k = inst.num_agents();
    for t in 0..=map.horizon() {
        let mut occupants: BTreeMap<usize, Vec<Lit>> = BTreeMap::new();
        for agent in inst.agents() {
            for &v in map.level(agent, t) {
                let x = map.vertex_var(agent, v, t).unwrap();
                occupants.entry(v).or_default().push(x.positive());
            }
        }
        for lits in occupants.values() {
            for (i, &a) in lits.iter().enumerate() {
                for &b in &lits[i + 1..] {
                    formula.add_clause(&[!a, !b], Provenance::CollisionComplete)?;
                }
            }
        }
        if t == map.horizon() {
            continue;
        }
        for a in 0..k {
            let agent = AgentId(a);
            let next = map.level(agent, t + 1);
            for &u in map.level(agent, t) {
                for &w in next {
                    if u == w {
                        continue;
                    }
                    let Some(ea) = map.edge_var(agent, u, w, t) else {
                        continue;
                    };
                    for b in a + 1..k {
                        if let Some(eb) = map.edge_var(AgentId(b), w, u, t) {
                            formula.add_clause(
                                &[ea.negative(), eb.negative()],
                                Provenance::CollisionComplete,
                            )?;
                        }
                    }
                }
            }
        }
    }
    Ok((formula, map))
}

/// The exclusion clause for a conflict, if all its variables exist:
/// `¬X(a,v,t) ∨ ¬X(b,v,t)` for vertex conflicts and
/// `¬E(a,u,v,t) ∨ ¬E(b,v,u,t)` for swaps.
pub fn conflict_clause(map: &VariableMap, conflict: &Conflict) -> Option<[Lit; 2]> {
    let (a, b) = conflict.agents;
    let t = conflict.time;
    let (x, y) = match conflict.kind {
        ConflictKind::Vertex { vertex } => {
            (map.vertex_var(a, vertex, t)?, map.vertex_var(b, vertex, t)?)
        }
        ConflictKind::Edge { from, to } => (map.edge_var(a, from, to, t)?, map.edge_var(b, to, from, t)?),
    };
    Some([x.negative(), y.negative()])
}

/// Appends the exclusion clause of `conflict` with refinement provenance.
pub fn refine(formula: &mut CnfFormula, map: &VariableMap, conflict: &Conflict) -> Result<Refinement> {
    match conflict_clause(map, conflict) {
        None => Ok(Refinement::Vacuous),
        Some(clause) => {
            if formula.add_clause(&clause, Provenance::ConflictRefinement)? {
                Ok(Refinement::Added)
            } else {
                Ok(Refinement::Duplicate)
            }
        }
    }
}

/// Reads each agent's path off the true vertex variables of `model`.
pub fn extract_solution(model: &Model, map: &VariableMap, inst: &MapfInstance) -> Result<Plan> {
    if map.num_agents() != inst.num_agents() {
        return Err(MapfError::Usage("encoding and instance disagree on agent count".into()));
    }
    let mut paths = Vec::with_capacity(inst.num_agents());
    for agent in inst.agents() {
        let mut path = Vec::with_capacity(map.horizon() + 1);
        for t in 0..=map.horizon() {
            let mut chosen = map
                .level(agent, t)
                .iter()
                .filter(|&&v| model.value(map.vertex_var(agent, v, t).unwrap()));
            match (chosen.next(), chosen.next()) {
                (Some(&v), None) => path.push(v),
                (None, _) => {
                    return Err(MapfError::Internal(format!("{agent} has no position at t={t}")))
                }
                (Some(_), Some(_)) => {
                    return Err(MapfError::Internal(format!(
                        "{agent} has several positions at t={t}"
                    )))
                }
            }
        }
        paths.push(path);
    }
    Plan::new(paths)
}

/// Writes `formula` as DIMACS to `path` and the variable listing to `path.map`.
pub fn dump(formula: &CnfFormula, map: &VariableMap, path: &Path) -> Result<()> {
    let mut cnf = BufWriter::new(File::create(path)?);
    formula.write_dimacs(&mut cnf)?;
    cnf.flush()?;
    let mut sidecar_path = path.as_os_str().to_owned();
    sidecar_path.push(".map");
    let mut sidecar = BufWriter::new(File::create(sidecar_path)?);
    map.write_sidecar(&mut sidecar)?;
    sidecar.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::{validate_plan, Graph};
    use crate::sat::{SatResult, SatSession};

    fn c4() -> MapfInstance {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        MapfInstance::new(g, vec![0, 2].into(), vec![2, 0].into()).unwrap()
    }

    fn solve(formula: &CnfFormula) -> Option<Model> {
        match SatSession::from_formula(&Default::default(), formula).solve().unwrap() {
            SatResult::Sat(m) => Some(m),
            SatResult::Unsat { .. } => None,
            SatResult::Unknown => panic!("no budget was set"),
        }
    }

    #[test]
    fn single_agent_decodes_shortest_path() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let inst = MapfInstance::new(g, vec![0].into(), vec![2].into()).unwrap();
        let (f, map) = encode_basic(&[], 2, &inst).unwrap();
        let model = solve(&f).unwrap();
        let plan = extract_solution(&model, &map, &inst).unwrap();
        assert_eq!(plan.paths(), &[vec![0, 1, 2]]);
    }

    #[test]
    fn bound_below_lower_bound_is_usage_error() {
        assert!(matches!(encode_basic(&[], 3, &c4()), Err(MapfError::Usage(_))));
        assert!(matches!(encode_complete(1, &c4()), Err(MapfError::Usage(_))));
    }

    #[test]
    fn complete_model_on_c4() {
        let (f4, map) = encode_complete(4, &c4()).unwrap();
        let model = solve(&f4).unwrap();
        let plan = extract_solution(&model, &map, &c4()).unwrap();
        assert!(validate_plan(&plan, &c4()).unwrap().is_empty());
        assert_eq!(crate::instance::sum_of_costs(&plan), 4);
    }

    #[test]
    fn basic_model_admits_collisions() {
        // Both agents must cross the centre of a star at t=1 on their shortest paths.
        let g = Graph::from_edges(5, [(0, 1), (1, 2), (3, 1), (1, 4)]).unwrap();
        let inst = MapfInstance::new(g, vec![0, 3].into(), vec![2, 4].into()).unwrap();
        let colliding = Plan::new(vec![vec![0, 1, 2], vec![3, 1, 4]]).unwrap();
        let (h, map) = encode_basic(&[], 4, &inst).unwrap();
        let induced = map.induced_model(&colliding).unwrap();
        assert_eq!(h.first_violated(&induced), None);
        let (f, map) = encode_complete(4, &inst).unwrap();
        let induced = map.induced_model(&colliding).unwrap();
        assert!(f.first_violated(&induced).is_some());
    }

    #[test]
    fn refinement_clause_shape_and_dedup() {
        let inst = c4();
        let (mut h, map) = encode_basic(&[], 5, &inst).unwrap();
        let conflict = Conflict::vertex(AgentId(0), AgentId(1), 1, 1);
        let before = h.len();
        assert_eq!(refine(&mut h, &map, &conflict).unwrap(), Refinement::Added);
        let x0 = map.vertex_var(AgentId(0), 1, 1).unwrap();
        let x1 = map.vertex_var(AgentId(1), 1, 1).unwrap();
        assert_eq!(h.clauses().last().unwrap(), &vec![x0.negative(), x1.negative()]);
        assert_eq!(refine(&mut h, &map, &conflict).unwrap(), Refinement::Duplicate);
        assert_eq!(h.len(), before + 1);

        // Vertex 1 at t=0 is outside both MDDs.
        let outside = Conflict::vertex(AgentId(0), AgentId(1), 1, 0);
        assert_eq!(refine(&mut h, &map, &outside).unwrap(), Refinement::Vacuous);
    }

    #[test]
    fn edge_refinement_removes_swap() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let inst = MapfInstance::new(g, vec![0, 1].into(), vec![1, 0].into()).unwrap();
        let (mut h, map) = encode_basic(&[], 2, &inst).unwrap();
        let model = solve(&h).unwrap();
        let plan = extract_solution(&model, &map, &inst).unwrap();
        let conflicts = validate_plan(&plan, &inst).unwrap();
        assert_eq!(conflicts, vec![Conflict::edge(AgentId(0), AgentId(1), 0, 1, 0)]);
        assert_eq!(refine(&mut h, &map, &conflicts[0]).unwrap(), Refinement::Added);
        assert!(solve(&h).is_none());
    }

    #[test]
    fn extraction_round_trip_through_assumptions() {
        let inst = c4();
        let plan = Plan::new(vec![vec![0, 0, 1, 2], vec![2, 3, 0, 0]]).unwrap();
        let (h, map) = encode_basic(&[], 5, &inst).unwrap();
        let assumptions: Vec<Lit> = inst
            .agents()
            .flat_map(|a| {
                let map = &map;
                let plan = &plan;
                (0..=map.horizon()).map(move |t| map.vertex_var(a, plan.position(a, t), t).unwrap().positive())
            })
            .collect();
        let mut session = SatSession::from_formula(&Default::default(), &h);
        let model = match session.solve_under_assumptions(&assumptions).unwrap() {
            SatResult::Sat(m) => m,
            other => panic!("{other:?}"),
        };
        let back = extract_solution(&model, &map, &inst).unwrap();
        assert_eq!(back, plan.padded(map.horizon()));
    }

    #[test]
    fn extraction_rejects_bad_models() {
        let inst = c4();
        let (_, map) = encode_basic(&[], 4, &inst).unwrap();
        let none = Model::new(vec![false; map.len()]);
        assert!(matches!(extract_solution(&none, &map, &inst), Err(MapfError::Internal(_))));
        let all = Model::new(vec![true; map.len()]);
        assert!(matches!(extract_solution(&all, &map, &inst), Err(MapfError::Internal(_))));
    }

    #[test]
    fn zero_slack_has_no_cost_variables() {
        let (f, map) = encode_basic(&[], 4, &c4()).unwrap();
        assert_eq!(f.count(Provenance::Cost), 0);
        assert!(map.meanings().all(|(_, m)| !matches!(m, VarMeaning::Late { .. })));
        // Each MDD collapses to the two shortest paths around the cycle.
        assert_eq!(map.level(AgentId(0), 1), &[1, 3]);
    }

    #[test]
    fn sidecar_format() {
        let g = Graph::from_edges(2, [(0, 1)]).unwrap();
        let inst = MapfInstance::new(g, vec![0].into(), vec![1].into()).unwrap();
        let (_, map) = encode_basic(&[], 1, &inst).unwrap();
        let mut out = Vec::new();
        map.write_sidecar(&mut out).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), "1 X 1 0 0\n2 X 1 1 1\n3 E 1 0 1 0\n");
    }
}
