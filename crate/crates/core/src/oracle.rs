//! Exhaustive optimal solver over the joint configuration space.
//!
//! Used as ground truth in tests. A joint state is a configuration plus the
//! set of agents that have *committed* to staying at their goal forever.
//! Uncommitted agents pay one unit per step, committed ones pay nothing, so
//! an agent that parks on its goal and later leaves pays for the parked steps
//! as well: exactly the sum-of-costs of the resulting plan. Uniform-cost
//! search over these states returns the optimum.

use std::cmp::Reverse;
use std::collections::hash_map::Entry;
use std::collections::{BinaryHeap, HashMap};

use crate::error::{MapfError, Result};
use crate::instance::{Configuration, MapfInstance, Plan, VertexId};

/// Largest `|V|^k` the oracle agrees to search.
pub const JOINT_SPACE_LIMIT: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleOutcome {
    Optimal { cost: u64, plan: Plan },
    /// No plan exists (within the ceiling, if one was given).
    NoSolution,
}

impl OracleOutcome {
    pub fn cost(&self) -> Option<u64> {
        match self {
            OracleOutcome::Optimal { cost, .. } => Some(*cost),
            OracleOutcome::NoSolution => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct JointState {
    positions: Vec<VertexId>,
    committed: u64,
}

/// Every joint successor of `positions` allowed by the movement rules in
/// which the agents in `frozen` (a bitmask) stay put.
pub fn joint_successors(
    inst: &MapfInstance,
    positions: &[VertexId],
    frozen: u64,
) -> Vec<Vec<VertexId>> {
    let k = positions.len();
    let mut out = Vec::new();
    let mut next = vec![usize::MAX; k];
    // Frozen agents are placed first so movers see them as occupied.
    for a in 0..k {
        if frozen >> a & 1 == 1 {
            next[a] = positions[a];
        }
    }
    fn extend(
        inst: &MapfInstance,
        positions: &[VertexId],
        frozen: u64,
        agent: usize,
        next: &mut Vec<VertexId>,
        out: &mut Vec<Vec<VertexId>>,
    ) {
        let k = positions.len();
        if agent == k {
            out.push(next.clone());
            return;
        }
        if frozen >> agent & 1 == 1 {
            extend(inst, positions, frozen, agent + 1, next, out);
            return;
        }
        let u = positions[agent];
        let options = std::iter::once(u).chain(inst.graph().neighbors(u).iter().copied());
        for v in options {
            // No two agents in one vertex.
            if (0..k).any(|b| b != agent && next[b] == v) {
                continue;
            }
            // No swap with an agent already placed.
            if v != u && (0..k).any(|b| b != agent && next[b] != usize::MAX && positions[b] == v && next[b] == u) {
                continue;
            }
            next[agent] = v;
            extend(inst, positions, frozen, agent + 1, next, out);
            next[agent] = usize::MAX;
        }
    }
    extend(inst, positions, frozen, 0, &mut next, &mut out);
    out
}

/// Optimal sum-of-costs and a witness plan, or [`OracleOutcome::NoSolution`]
/// when the reachable joint space holds no solution of cost `<= ceiling`.
pub fn oracle_solve(inst: &MapfInstance, ceiling: Option<u64>) -> Result<OracleOutcome> {
    let k = inst.num_agents();
    let n = inst.graph().num_vertices() as u128;
    let space = (0..k).try_fold(1u128, |acc, _| acc.checked_mul(n));
    if space.map_or(true, |s| s > JOINT_SPACE_LIMIT) || k > 20 {
        return Err(MapfError::OracleTooLarge(format!(
            "{k} agents on {n} vertices exceed the joint-space limit"
        )));
    }
    let goal = inst.goal().positions();
    let all_done = |s: &JointState| (0..k).all(|a| s.committed >> a & 1 == 1 || s.positions[a] == goal[a]);

    let start = JointState {
        positions: inst.start().positions().to_vec(),
        committed: 0,
    };
    let mut states: Vec<JointState> = vec![start.clone()];
    let mut index: HashMap<JointState, usize> = HashMap::from([(start, 0)]);
    let mut best: Vec<u64> = vec![0];
    let mut parent: Vec<Option<usize>> = vec![None];
    let mut heap = BinaryHeap::from([Reverse((0u64, 0usize))]);

    while let Some(Reverse((cost, id))) = heap.pop() {
        if cost > best[id] {
            continue;
        }
        if all_done(&states[id]) {
            return Ok(OracleOutcome::Optimal {
                cost,
                plan: witness(&states, &parent, id, k)?,
            });
        }
        let state = states[id].clone();
        let at_goal: Vec<usize> = (0..k)
            .filter(|&a| state.committed >> a & 1 == 0 && state.positions[a] == goal[a])
            .collect();
        for subset in 0u64..(1 << at_goal.len()) {
            let mut committed = state.committed;
            for (i, &a) in at_goal.iter().enumerate() {
                if subset >> i & 1 == 1 {
                    committed |= 1 << a;
                }
            }
            let step_cost = (k - committed.count_ones() as usize) as u64;
            let next_cost = cost + step_cost;
            if ceiling.is_some_and(|c| next_cost > c) {
                continue;
            }
            for positions in joint_successors(inst, &state.positions, committed) {
                let next = JointState {
                    positions,
                    committed,
                };
                let next_id = match index.entry(next) {
                    Entry::Occupied(e) => *e.get(),
                    Entry::Vacant(e) => {
                        let id = states.len();
                        states.push(e.key().clone());
                        e.insert(id);
                        best.push(u64::MAX);
                        parent.push(None);
                        id
                    }
                };
                if next_cost < best[next_id] {
                    best[next_id] = next_cost;
                    parent[next_id] = Some(id);
                    heap.push(Reverse((next_cost, next_id)));
                }
            }
        }
    }
    Ok(OracleOutcome::NoSolution)
}

fn witness(states: &[JointState], parent: &[Option<usize>], end: usize, k: usize) -> Result<Plan> {
    let mut chain = vec![end];
    while let Some(p) = parent[*chain.last().unwrap()] {
        chain.push(p);
    }
    chain.reverse();
    let configs: Vec<Configuration> = chain
        .iter()
        .map(|&id| Configuration::new(states[id].positions.clone()))
        .collect();
    let paths = (0..k)
        .map(|a| configs.iter().map(|c| c.positions()[a]).collect())
        .collect();
    Plan::new(paths)
}
