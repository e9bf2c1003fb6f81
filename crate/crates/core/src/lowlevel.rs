//! Single-agent search over the time-expanded graph and MDD construction.

use std::collections::HashSet;

use crate::error::{MapfError, Result};
use crate::instance::{AgentId, Constraint, MapfInstance, VertexId};

/// Minimal-cost timed path for `agent` from its start to its goal that
/// respects every constraint addressed to `agent` (others are ignored).
///
/// The returned path ends at the agent's final arrival, so its cost is
/// `path.len() - 1`. Among equally cheap paths the one with fewer waits wins,
/// then the lexicographically smallest vertex sequence. The search horizon is
/// the latest constrained time step plus `|V|`; `None` means no path exists.
pub fn constrained_shortest_path(
    inst: &MapfInstance,
    agent: AgentId,
    constraints: &[Constraint],
) -> Option<Vec<VertexId>> {
    let graph = inst.graph();
    let n = graph.num_vertices();
    let start = inst.start().get(agent);
    let goal = inst.goal().get(agent);

    let mut blocked: HashSet<(VertexId, usize)> = HashSet::new();
    let mut blocked_moves: HashSet<(VertexId, VertexId, usize)> = HashSet::new();
    let mut latest = 0;
    let mut goal_blocked_until: Option<usize> = None;
    for c in constraints.iter().filter(|c| c.agent() == agent) {
        latest = latest.max(c.last_time());
        match *c {
            Constraint::Vertex { vertex, time, .. } => {
                blocked.insert((vertex, time));
                if vertex == goal {
                    goal_blocked_until = goal_blocked_until.max(Some(time));
                }
            }
            Constraint::Edge { from, to, time, .. } => {
                blocked_moves.insert((from, to, time));
            }
        }
    }
    if blocked.contains(&(start, 0)) {
        return None;
    }
    let horizon = latest + n;

    #[derive(Clone, Copy)]
    struct Entry {
        waits: usize,
        // Rank of this state's path among all paths of the same layer, lexicographically.
        rank: usize,
        parent: VertexId,
    }

    let mut layers: Vec<Vec<Option<Entry>>> = Vec::new();
    let mut first = vec![None; n];
    first[start] = Some(Entry {
        waits: 0,
        rank: 0,
        parent: start,
    });
    layers.push(first);

    loop {
        let t = layers.len() - 1;
        let layer = &layers[t];
        if layer[goal].is_some() && goal_blocked_until.map_or(true, |b| t > b) {
            let mut path = vec![goal; t + 1];
            let mut v = goal;
            for time in (1..=t).rev() {
                v = layers[time][v].unwrap().parent;
                path[time - 1] = v;
            }
            return Some(path);
        }
        if t >= horizon {
            return None;
        }

        let mut next: Vec<Option<Entry>> = vec![None; n];
        for (u, entry) in layer.iter().enumerate() {
            let Some(entry) = entry else { continue };
            let moves = std::iter::once(u).chain(graph.neighbors(u).iter().copied());
            for w in moves {
                if blocked.contains(&(w, t + 1)) || blocked_moves.contains(&(u, w, t)) {
                    continue;
                }
                let candidate = Entry {
                    waits: entry.waits + usize::from(w == u),
                    rank: entry.rank,
                    parent: u,
                };
                let better = match next[w] {
                    None => true,
                    Some(cur) => (candidate.waits, candidate.rank) < (cur.waits, cur.rank),
                };
                if better {
                    next[w] = Some(candidate);
                }
            }
        }

        // Path order at t+1 is (order of the predecessor path, last vertex).
        let mut order: Vec<(usize, VertexId)> = next
            .iter()
            .enumerate()
            .filter_map(|(v, e)| e.map(|e| (e.rank, v)))
            .collect();
        if order.is_empty() {
            return None;
        }
        order.sort_unstable();
        for (rank, (_, v)) in order.into_iter().enumerate() {
            next[v].as_mut().unwrap().rank = rank;
        }
        layers.push(next);
    }
}

/// Multi-valued decision diagram of one agent: for each time step, the
/// vertices that lie on some start-to-goal path of exactly `bound` steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mdd {
    agent: AgentId,
    distance: usize,
    levels: Vec<Vec<VertexId>>,
}

impl Mdd {
    pub fn agent(&self) -> AgentId {
        self.agent
    }

    /// Unconstrained shortest-path length of the agent.
    pub fn distance(&self) -> usize {
        self.distance
    }

    /// Number of time steps covered (the last level index).
    pub fn bound(&self) -> usize {
        self.levels.len() - 1
    }

    /// Sorted vertices of level `t`.
    pub fn level(&self, t: usize) -> &[VertexId] {
        &self.levels[t]
    }

    pub fn levels(&self) -> &[Vec<VertexId>] {
        &self.levels
    }

    pub fn contains(&self, vertex: VertexId, t: usize) -> bool {
        self.levels
            .get(t)
            .is_some_and(|l| l.binary_search(&vertex).is_ok())
    }

    pub fn size(&self) -> usize {
        self.levels.iter().map(Vec::len).sum()
    }
}

/// Builds the MDD of `agent` for paths of `bound` steps (waits allowed) by
/// intersecting forward reachability from the start with backward
/// reachability from the goal.
pub fn build_mdd(inst: &MapfInstance, agent: AgentId, bound: usize) -> Result<Mdd> {
    let graph = inst.graph();
    let from_start = graph.bfs_distances(inst.start().get(agent));
    let to_goal = graph.bfs_distances(inst.goal().get(agent));
    let distance = from_start[inst.goal().get(agent)].ok_or(MapfError::Unreachable { agent })?;
    if bound < distance {
        return Err(MapfError::Usage(format!(
            "MDD bound {bound} below shortest distance {distance} of {agent}"
        )));
    }
    let levels = (0..=bound)
        .map(|t| {
            (0..graph.num_vertices())
                .filter(|&v| match (from_start[v], to_goal[v]) {
                    (Some(ds), Some(dg)) => ds <= t && dg <= bound - t,
                    _ => false,
                })
                .collect()
        })
        .collect();
    Ok(Mdd {
        agent,
        distance,
        levels,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Graph;

    fn p3(start: VertexId, goal: VertexId) -> MapfInstance {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        MapfInstance::new(g, vec![start].into(), vec![goal].into()).unwrap()
    }

    // Exhaustive enumeration of all walks of a given length on the time-expanded graph.
    fn all_walks(inst: &MapfInstance, len: usize) -> Vec<Vec<VertexId>> {
        let mut walks = vec![vec![inst.start().get(AgentId(0))]];
        for _ in 0..len {
            walks = walks
                .into_iter()
                .flat_map(|w| {
                    let u = *w.last().unwrap();
                    std::iter::once(u)
                        .chain(inst.graph().neighbors(u).iter().copied())
                        .map(move |v| {
                            let mut w = w.clone();
                            w.push(v);
                            w
                        })
                })
                .collect();
        }
        walks
    }

    #[test]
    fn unconstrained_is_bfs() {
        let inst = p3(0, 2);
        assert_eq!(constrained_shortest_path(&inst, AgentId(0), &[]), Some(vec![0, 1, 2]));
        let stay = p3(1, 1);
        assert_eq!(constrained_shortest_path(&stay, AgentId(0), &[]), Some(vec![1]));
    }

    #[test]
    fn vertex_constraint_forces_wait() {
        let inst = p3(0, 2);
        let c = [Constraint::Vertex {
            agent: AgentId(0),
            vertex: 1,
            time: 1,
        }];
        // Enumerate walks of increasing length; the first that reaches the goal
        // without touching (v1, t=1) fixes the optimum.
        let best = (0..6)
            .find_map(|len| {
                all_walks(&inst, len)
                    .into_iter()
                    .find(|w| w.last() == Some(&2) && w.get(1) != Some(&1))
            })
            .unwrap();
        assert_eq!(best.len() - 1, 3);
        assert_eq!(constrained_shortest_path(&inst, AgentId(0), &c), Some(vec![0, 0, 1, 2]));
    }

    #[test]
    fn blocked_start_is_not_found() {
        let inst = p3(0, 2);
        let c = [Constraint::Vertex {
            agent: AgentId(0),
            vertex: 0,
            time: 0,
        }];
        assert_eq!(constrained_shortest_path(&inst, AgentId(0), &c), None);
    }

    #[test]
    fn goal_constraint_in_the_future_is_respected() {
        let inst = p3(0, 2);
        let c = [Constraint::Vertex {
            agent: AgentId(0),
            vertex: 2,
            time: 4,
        }];
        let path = constrained_shortest_path(&inst, AgentId(0), &c).unwrap();
        assert_eq!(path.len() - 1, 5);
        assert_ne!(path[4], 2);
        assert_eq!(*path.last().unwrap(), 2);
    }

    #[test]
    fn edge_constraint_blocks_one_traversal() {
        let inst = p3(0, 2);
        let c = [Constraint::Edge {
            agent: AgentId(0),
            from: 0,
            to: 1,
            time: 0,
        }];
        assert_eq!(constrained_shortest_path(&inst, AgentId(0), &c), Some(vec![0, 0, 1, 2]));
    }

    #[test]
    fn constraints_of_other_agents_are_ignored() {
        let inst = p3(0, 2);
        let c = [Constraint::Vertex {
            agent: AgentId(3),
            vertex: 1,
            time: 1,
        }];
        assert_eq!(constrained_shortest_path(&inst, AgentId(0), &c), Some(vec![0, 1, 2]));
    }

    #[test]
    fn unreachable_within_horizon() {
        let g = Graph::from_edges(3, [(0, 1)]).unwrap();
        let inst = MapfInstance::new(g, vec![0].into(), vec![2].into()).unwrap();
        assert_eq!(constrained_shortest_path(&inst, AgentId(0), &[]), None);
    }

    #[test]
    fn mdd_levels_on_p3() {
        let inst = p3(0, 2);
        let tight = build_mdd(&inst, AgentId(0), 2).unwrap();
        assert_eq!(tight.levels(), &[vec![0], vec![1], vec![2]]);

        let slack = build_mdd(&inst, AgentId(0), 3).unwrap();
        // Vertices visited at each step by some 3-step walk ending at the goal.
        let walks: Vec<_> = all_walks(&inst, 3).into_iter().filter(|w| w[3] == 2).collect();
        for t in 0..=3 {
            let mut expected: Vec<_> = walks.iter().map(|w| w[t]).collect();
            expected.sort_unstable();
            expected.dedup();
            assert_eq!(slack.level(t), expected.as_slice(), "level {t}");
        }
        assert_eq!(slack.level(1), &[0, 1]);
        assert_eq!(slack.level(2), &[1, 2]);

        let trivial = build_mdd(&p3(1, 1), AgentId(0), 0).unwrap();
        assert_eq!(trivial.levels(), &[vec![1]]);
        assert_eq!(trivial.size(), 1);
    }

    #[test]
    fn mdd_bound_below_distance() {
        assert!(matches!(
            build_mdd(&p3(0, 2), AgentId(0), 1),
            Err(MapfError::Usage(_))
        ));
    }
}
