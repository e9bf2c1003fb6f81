//! Conflict-based search: best-first search over a constraint tree whose
//! nodes re-plan single agents under growing sets of constraints.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::Instant;

use crate::error::{MapfError, Result};
use crate::instance::{
    cost_lower_bound, path_cost, validate_plan, AgentId, Conflict, ConflictKind, Constraint,
    MapfInstance, Plan, VertexId,
};
use crate::lowlevel::constrained_shortest_path;
use crate::report::{EngineKind, Limits, Outcome, SolveReport, Unsolvable};

/// Constraint-tree node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtNode {
    pub constraints: Vec<Constraint>,
    /// Per-agent paths, each ending at the agent's final arrival.
    pub paths: Vec<Vec<VertexId>>,
    pub cost: u64,
}

impl CtNode {
    pub fn plan(&self) -> Result<Plan> {
        Plan::new(self.paths.clone())
    }

    fn constraints_of(&self, agent: AgentId) -> Vec<Constraint> {
        self.constraints
            .iter()
            .filter(|c| c.agent() == agent)
            .copied()
            .collect()
    }
}

struct Queued {
    cost: u64,
    seq: u64,
    node: CtNode,
}

impl PartialEq for Queued {
    fn eq(&self, other: &Self) -> bool {
        (self.cost, self.seq) == (other.cost, other.seq)
    }
}

impl Eq for Queued {}

impl PartialOrd for Queued {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Queued {
    fn cmp(&self, other: &Self) -> Ordering {
        (other.cost, other.seq).cmp(&(self.cost, self.seq))
    }
}

/// Priority queue of CT nodes: cheapest first, FIFO among equal costs.
#[derive(Default)]
pub struct OpenList {
    heap: BinaryHeap<Queued>,
    seq: u64,
}

impl OpenList {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, node: CtNode) {
        self.seq += 1;
        self.heap.push(Queued {
            cost: node.cost,
            seq: self.seq,
            node,
        });
    }

    pub fn pop(&mut self) -> Option<CtNode> {
        self.heap.pop().map(|q| q.node)
    }

    pub fn len(&self) -> usize {
        self.heap.len()
    }

    pub fn is_empty(&self) -> bool {
        self.heap.is_empty()
    }
}

/// Splits `node` on `conflict`: one child per involved agent with the
/// agent's path re-planned under the extra constraint. Children whose
/// re-plan fails are dropped.
///
/// A vertex conflict `(a, b, v, t)` forbids `a` (resp. `b`) at `v` at `t`.
/// A swap where `a` goes `u -> v` and `b` goes `v -> u` forbids exactly
/// that traversal for `a` (resp. `b`).
pub fn expand(node: &CtNode, conflict: &Conflict, inst: &MapfInstance) -> Vec<CtNode> {
    let (a, b) = conflict.agents;
    let t = conflict.time;
    let split = match conflict.kind {
        ConflictKind::Vertex { vertex } => [
            Constraint::Vertex {
                agent: a,
                vertex,
                time: t,
            },
            Constraint::Vertex {
                agent: b,
                vertex,
                time: t,
            },
        ],
        ConflictKind::Edge { from, to } => [
            Constraint::Edge {
                agent: a,
                from,
                to,
                time: t,
            },
            Constraint::Edge {
                agent: b,
                from: to,
                to: from,
                time: t,
            },
        ],
    };

    split
        .into_iter()
        .filter_map(|constraint| {
            let agent = constraint.agent();
            let mut child = node.clone();
            child.constraints.push(constraint);
            let path = constrained_shortest_path(inst, agent, &child.constraints_of(agent))?;
            child.paths[agent.index()] = path;
            child.cost = child.paths.iter().map(|p| path_cost(p) as u64).sum();
            Some(child)
        })
        .collect()
}

/// Optimal sum-of-costs plan by conflict-based search.
///
/// Children more expensive than the ceiling are discarded; if the open list
/// runs dry after such pruning the instance is reported unsolvable by
/// ceiling. Time and node budgets end the search with `BudgetExceeded`.
pub fn cbs_solve(inst: &MapfInstance, limits: &Limits) -> Result<SolveReport> {
    let started = Instant::now();
    let deadline = limits.deadline(started);
    let mut report = SolveReport::new(EngineKind::Cbs);
    let finish = |mut report: SolveReport, outcome: Outcome| {
        report.cost = outcome.plan().map(crate::instance::sum_of_costs);
        report.outcome = outcome;
        report.stats.wall = started.elapsed();
        Ok(report)
    };

    let lower = match cost_lower_bound(inst) {
        Ok(lower) => lower,
        Err(MapfError::Unreachable { agent }) => {
            return finish(report, Outcome::Unsolvable(Unsolvable::Unreachable(agent)))
        }
        Err(e) => return Err(e),
    };
    let ceiling = limits.ceiling_for(inst, lower);

    let mut paths = Vec::with_capacity(inst.num_agents());
    for agent in inst.agents() {
        match constrained_shortest_path(inst, agent, &[]) {
            Some(path) => paths.push(path),
            None => return finish(report, Outcome::Unsolvable(Unsolvable::Unreachable(agent))),
        }
    }
    let cost = paths.iter().map(|p| path_cost(p) as u64).sum();
    debug_assert_eq!(cost, lower);

    let mut open = OpenList::new();
    let mut pruned = false;
    if cost <= ceiling {
        open.push(CtNode {
            constraints: Vec::new(),
            paths,
            cost,
        });
        report.stats.ct_generated = 1;
    } else {
        pruned = true;
    }

    while let Some(node) = open.pop() {
        if limits.node_budget.is_some_and(|b| report.stats.ct_nodes >= b)
            || deadline.is_some_and(|d| Instant::now() >= d)
        {
            return finish(report, Outcome::BudgetExceeded);
        }
        report.stats.ct_nodes += 1;
        let plan = node.plan()?;
        let collisions = validate_plan(&plan, inst)?;
        let Some(conflict) = collisions.first() else {
            return finish(report, Outcome::Solved(plan));
        };
        report.stats.conflicts_recorded += 1;
        for child in expand(&node, conflict, inst) {
            if child.cost > ceiling {
                pruned = true;
                continue;
            }
            report.stats.ct_generated += 1;
            open.push(child);
        }
    }
    let reason = if pruned {
        Unsolvable::Ceiling(ceiling)
    } else {
        Unsolvable::Exhausted
    };
    finish(report, Outcome::Unsolvable(reason))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Graph;

    fn c4() -> MapfInstance {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        MapfInstance::new(g, vec![0, 2].into(), vec![2, 0].into()).unwrap()
    }

    #[test]
    fn open_list_is_fifo_among_equal_costs() {
        let node = |cost, tag| CtNode {
            constraints: vec![],
            paths: vec![vec![tag]],
            cost,
        };
        let mut open = OpenList::new();
        open.push(node(5, 0));
        open.push(node(3, 1));
        open.push(node(3, 2));
        open.push(node(4, 3));
        let order: Vec<_> = std::iter::from_fn(|| open.pop()).map(|n| n.paths[0][0]).collect();
        assert_eq!(order, vec![1, 2, 3, 0]);
    }

    #[test]
    fn single_agent_needs_one_node() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let inst = MapfInstance::new(g, vec![0].into(), vec![2].into()).unwrap();
        let report = cbs_solve(&inst, &Limits::default()).unwrap();
        assert_eq!(report.cost, Some(2));
        assert_eq!(report.stats.ct_nodes, 1);
        assert_eq!(report.plan().unwrap().paths(), &[vec![0, 1, 2]]);
    }

    #[test]
    fn c4_is_optimal_at_four() {
        let report = cbs_solve(&c4(), &Limits::default()).unwrap();
        assert_eq!(report.cost, Some(4));
    }

    #[test]
    fn expand_vertex_conflict() {
        let star = Graph::from_edges(5, [(0, 1), (1, 2), (3, 1), (1, 4)]).unwrap();
        let inst = MapfInstance::new(star, vec![0, 3].into(), vec![2, 4].into()).unwrap();
        let root = CtNode {
            constraints: vec![],
            paths: vec![vec![0, 1, 2], vec![3, 1, 4]],
            cost: 4,
        };
        let conflict = Conflict::vertex(AgentId(0), AgentId(1), 1, 1);
        let children = expand(&root, &conflict, &inst);
        assert_eq!(children.len(), 2);
        assert_eq!(
            children[0].constraints,
            vec![Constraint::Vertex {
                agent: AgentId(0),
                vertex: 1,
                time: 1
            }]
        );
        assert_eq!(children[0].paths[0], vec![0, 0, 1, 2]);
        assert_eq!(children[1].paths[1], vec![3, 3, 1, 4]);
        assert!(children.iter().all(|c| c.cost >= root.cost));
    }

    #[test]
    fn swap_on_path_hits_the_ceiling() {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        let inst = MapfInstance::new(g, vec![0, 2].into(), vec![2, 0].into()).unwrap();
        let limits = Limits {
            ceiling: Some(8),
            ..Limits::default()
        };
        let report = cbs_solve(&inst, &limits).unwrap();
        assert_eq!(report.outcome, Outcome::Unsolvable(Unsolvable::Ceiling(8)));
    }

    #[test]
    fn node_budget() {
        let limits = Limits {
            node_budget: Some(1),
            ..Limits::default()
        };
        let report = cbs_solve(&c4(), &limits).unwrap();
        assert_eq!(report.outcome, Outcome::BudgetExceeded);
    }

    #[test]
    fn unreachable_goal() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        let inst = MapfInstance::new(g, vec![0].into(), vec![2].into()).unwrap();
        let report = cbs_solve(&inst, &Limits::default()).unwrap();
        assert_eq!(
            report.outcome,
            Outcome::Unsolvable(Unsolvable::Unreachable(AgentId(0)))
        );
    }
}
