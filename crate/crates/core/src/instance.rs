//! Instance model: graphs, configurations, plans, the movement-rule validator
//! and the sum-of-costs / makespan objectives.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use crate::error::{MapfError, Result};

/// Dense vertex index assigned at construction / parse time.
pub type VertexId = usize;

/// Zero-based agent index. Displayed 1-based (`a1`, `a2`, ...).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AgentId(pub usize);

impl AgentId {
    pub fn index(self) -> usize {
        self.0
    }

    /// 1-based number used in reports and file formats.
    pub fn number(self) -> usize {
        self.0 + 1
    }

    pub fn from_number(number: usize) -> Option<Self> {
        number.checked_sub(1).map(AgentId)
    }
}

impl fmt::Display for AgentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "a{}", self.number())
    }
}

/// Simple undirected graph without self-loops. Neighbor lists are kept sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adjacency: Vec<Vec<VertexId>>,
    edge_count: usize,
}

impl Graph {
    pub fn new(num_vertices: usize) -> Self {
        Graph {
            adjacency: vec![Vec::new(); num_vertices],
            edge_count: 0,
        }
    }

    pub fn from_edges(
        num_vertices: usize,
        edges: impl IntoIterator<Item = (VertexId, VertexId)>,
    ) -> Result<Self> {
        let mut graph = Graph::new(num_vertices);
        for (u, v) in edges {
            graph.add_edge(u, v)?;
        }
        Ok(graph)
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        let n = self.num_vertices();
        if u >= n || v >= n {
            return Err(MapfError::InvalidInstance(format!(
                "edge {{{u},{v}}} refers to a vertex outside 0..{n}"
            )));
        }
        if u == v {
            return Err(MapfError::InvalidInstance(format!("self-loop on vertex {u}")));
        }
        match self.adjacency[u].binary_search(&v) {
            Ok(_) => Err(MapfError::InvalidInstance(format!("duplicate edge {{{u},{v}}}"))),
            Err(pos) => {
                self.adjacency[u].insert(pos, v);
                let back = self.adjacency[v].binary_search(&u).unwrap_err();
                self.adjacency[v].insert(back, u);
                self.edge_count += 1;
                Ok(())
            }
        }
    }

    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edge_count
    }

    pub fn contains(&self, v: VertexId) -> bool {
        v < self.adjacency.len()
    }

    pub fn neighbors(&self, v: VertexId) -> &[VertexId] {
        &self.adjacency[v]
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.contains(u) && self.adjacency[u].binary_search(&v).is_ok()
    }

    /// Each undirected edge once, as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    /// Unweighted shortest-path distances from `source`; `None` for unreachable vertices.
    pub fn bfs_distances(&self, source: VertexId) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.num_vertices()];
        let mut queue = VecDeque::new();
        dist[source] = Some(0);
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].unwrap();
            for &v in &self.adjacency[u] {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

/// Placement of agents on vertices, indexed by agent.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Configuration(Vec<VertexId>);

impl Configuration {
    pub fn new(positions: Vec<VertexId>) -> Self {
        Configuration(positions)
    }

    pub fn num_agents(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, agent: AgentId) -> VertexId {
        self.0[agent.0]
    }

    pub fn positions(&self) -> &[VertexId] {
        &self.0
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = HashSet::with_capacity(self.0.len());
        self.0.iter().all(|v| seen.insert(*v))
    }
}

impl From<Vec<VertexId>> for Configuration {
    fn from(positions: Vec<VertexId>) -> Self {
        Configuration(positions)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MapfInstance {
    graph: Graph,
    start: Configuration,
    goal: Configuration,
}

impl MapfInstance {
    pub fn new(graph: Graph, start: Configuration, goal: Configuration) -> Result<Self> {
        if start.num_agents() != goal.num_agents() {
            return Err(MapfError::InvalidInstance(format!(
                "{} start positions but {} goals",
                start.num_agents(),
                goal.num_agents()
            )));
        }
        if start.num_agents() > graph.num_vertices() {
            return Err(MapfError::InvalidInstance(format!(
                "{} agents exceed {} vertices",
                start.num_agents(),
                graph.num_vertices()
            )));
        }
        for (name, config) in [("start", &start), ("goal", &goal)] {
            if let Some(v) = config.positions().iter().find(|&&v| !graph.contains(v)) {
                return Err(MapfError::InvalidInstance(format!(
                    "{name} vertex {v} is not in the graph"
                )));
            }
            if !config.is_injective() {
                return Err(MapfError::InvalidInstance(format!(
                    "two agents share a {name} vertex"
                )));
            }
        }
        Ok(MapfInstance { graph, start, goal })
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn start(&self) -> &Configuration {
        &self.start
    }

    pub fn goal(&self) -> &Configuration {
        &self.goal
    }

    pub fn num_agents(&self) -> usize {
        self.start.num_agents()
    }

    pub fn agents(&self) -> impl Iterator<Item = AgentId> {
        (0..self.num_agents()).map(AgentId)
    }

    /// Shortest start-to-goal distance of one agent, if reachable.
    pub fn distance(&self, agent: AgentId) -> Option<usize> {
        self.graph.bfs_distances(self.start.get(agent))[self.goal.get(agent)]
    }
}

/// Per-agent timed paths, padded with trailing goal-waits to a common horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    paths: Vec<Vec<VertexId>>,
}

impl Plan {
    pub fn new(mut paths: Vec<Vec<VertexId>>) -> Result<Self> {
        if paths.iter().any(|p| p.is_empty()) {
            return Err(MapfError::Usage("plan contains an empty path".into()));
        }
        let len = paths.iter().map(Vec::len).max().unwrap_or(1);
        for path in &mut paths {
            let last = *path.last().unwrap();
            path.resize(len, last);
        }
        Ok(Plan { paths })
    }

    pub fn num_agents(&self) -> usize {
        self.paths.len()
    }

    /// Last time step μ of the (padded) plan.
    pub fn horizon(&self) -> usize {
        self.paths.first().map_or(0, |p| p.len() - 1)
    }

    pub fn path(&self, agent: AgentId) -> &[VertexId] {
        &self.paths[agent.0]
    }

    pub fn paths(&self) -> &[Vec<VertexId>] {
        &self.paths
    }

    /// Position at `time`; times past the horizon read the final vertex.
    pub fn position(&self, agent: AgentId, time: usize) -> VertexId {
        let path = &self.paths[agent.0];
        path[time.min(path.len() - 1)]
    }

    pub fn configuration(&self, time: usize) -> Configuration {
        Configuration(
            (0..self.num_agents())
                .map(|a| self.position(AgentId(a), time))
                .collect(),
        )
    }

    /// Copy of the plan padded with goal-waits up to `horizon`.
    pub fn padded(&self, horizon: usize) -> Plan {
        let len = horizon.max(self.horizon()) + 1;
        let paths = self
            .paths
            .iter()
            .map(|p| {
                let mut p = p.clone();
                let last = *p.last().unwrap();
                p.resize(len, last);
                p
            })
            .collect();
        Plan { paths }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ConflictKind {
    /// Both agents occupy `vertex` at `time`.
    Vertex { vertex: VertexId },
    /// The first agent moves `from -> to` while the second moves `to -> from`
    /// during the step `time -> time + 1`.
    Edge { from: VertexId, to: VertexId },
}

/// A collision between two agents. Agents are stored in ascending order, so
/// the same collision found from either side compares equal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Conflict {
    pub time: usize,
    pub agents: (AgentId, AgentId),
    pub kind: ConflictKind,
}

impl Conflict {
    pub fn vertex(a: AgentId, b: AgentId, vertex: VertexId, time: usize) -> Self {
        debug_assert_ne!(a, b);
        Conflict {
            time,
            agents: (a.min(b), a.max(b)),
            kind: ConflictKind::Vertex { vertex },
        }
    }

    /// `a` traverses `from -> to`, `b` traverses `to -> from` during `time -> time + 1`.
    pub fn edge(a: AgentId, b: AgentId, from: VertexId, to: VertexId, time: usize) -> Self {
        debug_assert_ne!(a, b);
        let (agents, from, to) = if a < b {
            ((a, b), from, to)
        } else {
            ((b, a), to, from)
        };
        Conflict {
            time,
            agents,
            kind: ConflictKind::Edge { from, to },
        }
    }
}

impl fmt::Display for Conflict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (a, b) = self.agents;
        match self.kind {
            ConflictKind::Vertex { vertex } => {
                write!(f, "vertex conflict ({a},{b}) at v{vertex}, t={}", self.time)
            }
            ConflictKind::Edge { from, to } => write!(
                f,
                "edge conflict ({a},{b}) on {{v{from},v{to}}}, t={}->{}",
                self.time,
                self.time + 1
            ),
        }
    }
}

/// Collision-avoidance constraint for the low-level search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Constraint {
    /// `agent` may not occupy `vertex` at `time`.
    Vertex {
        agent: AgentId,
        vertex: VertexId,
        time: usize,
    },
    /// `agent` may not traverse `from -> to` during `time -> time + 1`.
    Edge {
        agent: AgentId,
        from: VertexId,
        to: VertexId,
        time: usize,
    },
}

impl Constraint {
    pub fn agent(&self) -> AgentId {
        match *self {
            Constraint::Vertex { agent, .. } | Constraint::Edge { agent, .. } => agent,
        }
    }

    /// Latest time step whose occupancy the constraint restricts.
    pub fn last_time(&self) -> usize {
        match *self {
            Constraint::Vertex { time, .. } => time,
            Constraint::Edge { time, .. } => time + 1,
        }
    }
}

/// One broken movement rule between two consecutive configurations.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Violation {
    /// Agent neither waited nor moved along an edge.
    NotAdjacent {
        agent: AgentId,
        from: VertexId,
        to: VertexId,
    },
    /// Two agents crossed an edge in opposite directions.
    Swap {
        agents: (AgentId, AgentId),
        edge: (VertexId, VertexId),
    },
    /// Two agents share a vertex in the next configuration.
    SharedVertex {
        agents: (AgentId, AgentId),
        vertex: VertexId,
    },
}

/// Checks the three movement rules between `alpha` and `alpha_next`.
/// An empty result means `alpha_next` validly results from `alpha`.
pub fn validate_transition(
    alpha: &Configuration,
    alpha_next: &Configuration,
    graph: &Graph,
) -> Result<Vec<Violation>> {
    if alpha.num_agents() != alpha_next.num_agents() {
        return Err(MapfError::Usage(format!(
            "configurations over {} and {} agents",
            alpha.num_agents(),
            alpha_next.num_agents()
        )));
    }
    let positions = alpha.positions().iter().chain(alpha_next.positions());
    if let Some(v) = positions.into_iter().find(|&&v| !graph.contains(v)) {
        return Err(MapfError::Usage(format!("vertex {v} is not in the graph")));
    }

    let k = alpha.num_agents();
    let mut violations = Vec::new();
    for a in 0..k {
        let (u, v) = (alpha.0[a], alpha_next.0[a]);
        if u != v && !graph.has_edge(u, v) {
            violations.push(Violation::NotAdjacent {
                agent: AgentId(a),
                from: u,
                to: v,
            });
        }
    }
    for a in 0..k {
        let (u, v) = (alpha.0[a], alpha_next.0[a]);
        for b in a + 1..k {
            if u != v && alpha.0[b] == v && alpha_next.0[b] == u {
                violations.push(Violation::Swap {
                    agents: (AgentId(a), AgentId(b)),
                    edge: (u.min(v), u.max(v)),
                });
            }
            if alpha_next.0[b] == v {
                violations.push(Violation::SharedVertex {
                    agents: (AgentId(a), AgentId(b)),
                    vertex: v,
                });
            }
        }
    }
    Ok(violations)
}

/// All vertex and edge conflicts of `plan`, sorted by time, then agent pair.
///
/// The plan must start in the instance's start configuration, end in its goal
/// configuration and only wait or move along edges; collisions are reported,
/// everything else is a usage error.
pub fn validate_plan(plan: &Plan, inst: &MapfInstance) -> Result<Vec<Conflict>> {
    let k = inst.num_agents();
    if plan.num_agents() != k {
        return Err(MapfError::Usage(format!(
            "plan has {} agents, instance has {k}",
            plan.num_agents()
        )));
    }
    let horizon = plan.horizon();
    for agent in inst.agents() {
        let path = plan.path(agent);
        if path[0] != inst.start().get(agent) {
            return Err(MapfError::Usage(format!("{agent} does not start at its start vertex")));
        }
        if path[horizon] != inst.goal().get(agent) {
            return Err(MapfError::Usage(format!("{agent} does not end at its goal vertex")));
        }
        for (t, step) in path.windows(2).enumerate() {
            if step[0] != step[1] && !inst.graph().has_edge(step[0], step[1]) {
                return Err(MapfError::Usage(format!(
                    "{agent} jumps from v{} to v{} at t={t}",
                    step[0], step[1]
                )));
            }
        }
    }

    let mut conflicts = Vec::new();
    for t in 0..=horizon {
        for a in 0..k {
            let va = plan.paths[a][t];
            for b in a + 1..k {
                if plan.paths[b][t] == va {
                    conflicts.push(Conflict::vertex(AgentId(a), AgentId(b), va, t));
                }
            }
        }
        if t == horizon {
            break;
        }
        for a in 0..k {
            let (u, v) = (plan.paths[a][t], plan.paths[a][t + 1]);
            if u == v {
                continue;
            }
            for b in a + 1..k {
                if plan.paths[b][t] == v && plan.paths[b][t + 1] == u {
                    conflicts.push(Conflict::edge(AgentId(a), AgentId(b), u, v, t));
                }
            }
        }
    }
    conflicts.sort();
    Ok(conflicts)
}

/// Cost of one path: steps up to the final arrival at its last vertex.
/// Waits at the goal after the final arrival are free.
pub fn path_cost(path: &[VertexId]) -> usize {
    match path.last() {
        None => 0,
        Some(goal) => path.iter().rposition(|v| v != goal).map_or(0, |t| t + 1),
    }
}

/// Sum over agents of [`path_cost`].
pub fn sum_of_costs(plan: &Plan) -> u64 {
    plan.paths.iter().map(|p| path_cost(p) as u64).sum()
}

/// First step from which every agent stays at its goal.
pub fn makespan(plan: &Plan) -> usize {
    plan.paths.iter().map(|p| path_cost(p)).max().unwrap_or(0)
}

/// Sum of unconstrained shortest-path lengths (ξ₀). Fails with
/// [`MapfError::Unreachable`] when some goal lies in another component.
pub fn cost_lower_bound(inst: &MapfInstance) -> Result<u64> {
    inst.agents().try_fold(0u64, |acc, agent| {
        inst.distance(agent)
            .map(|d| acc + d as u64)
            .ok_or(MapfError::Unreachable { agent })
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn cycle(n: usize) -> Graph {
        Graph::from_edges(n, (0..n).map(|i| (i, (i + 1) % n))).unwrap()
    }

    fn path_graph(n: usize) -> Graph {
        Graph::from_edges(n, (0..n - 1).map(|i| (i, i + 1))).unwrap()
    }

    fn c4() -> MapfInstance {
        MapfInstance::new(cycle(4), vec![0, 2].into(), vec![2, 0].into()).unwrap()
    }

    #[test]
    fn graph_rejects_self_loops_and_duplicates() {
        let mut g = Graph::new(3);
        assert!(g.add_edge(1, 1).is_err());
        g.add_edge(0, 1).unwrap();
        assert!(g.add_edge(1, 0).is_err());
        assert!(g.add_edge(0, 3).is_err());
        assert_eq!(g.num_edges(), 1);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
    }

    #[test]
    fn instance_invariants() {
        let g = path_graph(3);
        assert!(MapfInstance::new(g.clone(), vec![0, 0].into(), vec![1, 2].into()).is_err());
        assert!(MapfInstance::new(g.clone(), vec![0, 1].into(), vec![2, 2].into()).is_err());
        assert!(MapfInstance::new(g.clone(), vec![0].into(), vec![5].into()).is_err());
        assert!(MapfInstance::new(Graph::new(1), vec![0, 1].into(), vec![0, 1].into()).is_err());
        let empty = MapfInstance::new(g, vec![].into(), vec![].into()).unwrap();
        assert_eq!(cost_lower_bound(&empty).unwrap(), 0);
    }

    #[test]
    fn waiting_is_valid() {
        let g = cycle(4);
        let alpha = Configuration::new(vec![0, 1, 2]);
        assert!(validate_transition(&alpha, &alpha, &g).unwrap().is_empty());
    }

    #[test]
    fn swap_is_a_violation() {
        let g = path_graph(2);
        let alpha = Configuration::new(vec![0, 1]);
        let next = Configuration::new(vec![1, 0]);
        let v = validate_transition(&alpha, &next, &g).unwrap();
        assert_eq!(
            v,
            vec![Violation::Swap {
                agents: (AgentId(0), AgentId(1)),
                edge: (0, 1)
            }]
        );
    }

    #[test]
    fn rotation_on_triangle_is_valid() {
        let g = cycle(3);
        let alpha = Configuration::new(vec![0, 1, 2]);
        let next = Configuration::new(vec![1, 2, 0]);
        assert!(validate_transition(&alpha, &next, &g).unwrap().is_empty());
    }

    #[test]
    fn transition_errors_and_other_violations() {
        let g = path_graph(3);
        let alpha = Configuration::new(vec![0, 2]);
        assert!(validate_transition(&alpha, &Configuration::new(vec![0]), &g).is_err());
        let jump = validate_transition(&alpha, &Configuration::new(vec![2, 1]), &g).unwrap();
        assert!(matches!(jump[0], Violation::NotAdjacent { from: 0, to: 2, .. }));
        let share = validate_transition(&alpha, &Configuration::new(vec![1, 1]), &g).unwrap();
        assert_eq!(
            share,
            vec![Violation::SharedVertex {
                agents: (AgentId(0), AgentId(1)),
                vertex: 1
            }]
        );
    }

    #[test]
    fn plan_conflicts() {
        let single = MapfInstance::new(path_graph(3), vec![0].into(), vec![2].into()).unwrap();
        let plan = Plan::new(vec![vec![0, 1, 2]]).unwrap();
        assert!(validate_plan(&plan, &single).unwrap().is_empty());

        // Both agents pass through vertex 1 at t=1 on a star around it.
        let star = Graph::from_edges(5, [(0, 1), (1, 2), (3, 1), (1, 4)]).unwrap();
        let inst = MapfInstance::new(star, vec![0, 3].into(), vec![2, 4].into()).unwrap();
        let plan = Plan::new(vec![vec![0, 1, 2], vec![3, 1, 4]]).unwrap();
        assert_eq!(
            validate_plan(&plan, &inst).unwrap(),
            vec![Conflict::vertex(AgentId(0), AgentId(1), 1, 1)]
        );

        let swap = MapfInstance::new(path_graph(2), vec![0, 1].into(), vec![1, 0].into()).unwrap();
        let plan = Plan::new(vec![vec![0, 1], vec![1, 0]]).unwrap();
        assert_eq!(
            validate_plan(&plan, &swap).unwrap(),
            vec![Conflict::edge(AgentId(0), AgentId(1), 0, 1, 0)]
        );
        assert_eq!(
            Conflict::edge(AgentId(1), AgentId(0), 1, 0, 0),
            Conflict::edge(AgentId(0), AgentId(1), 0, 1, 0)
        );
    }

    #[test]
    fn plan_endpoints_are_checked() {
        let inst = c4();
        let wrong_goal = Plan::new(vec![vec![0, 1], vec![2, 3]]).unwrap();
        assert!(validate_plan(&wrong_goal, &inst).is_err());
        let jump = Plan::new(vec![vec![0, 2], vec![2, 3, 0]]).unwrap();
        assert!(validate_plan(&jump, &inst).is_err());
    }

    #[test]
    fn costs() {
        assert_eq!(path_cost(&[3, 3, 3]), 0);
        assert_eq!(path_cost(&[0, 1, 2]), 2);
        assert_eq!(path_cost(&[0, 0, 1]), 2);
        assert_eq!(path_cost(&[1, 0, 1, 1, 1]), 2);

        // C4 rotation: both agents move clockwise two steps.
        let plan = Plan::new(vec![vec![0, 1, 2], vec![2, 3, 0]]).unwrap();
        assert!(validate_plan(&plan, &c4()).unwrap().is_empty());
        assert_eq!(sum_of_costs(&plan), 4);
        assert_eq!(makespan(&plan), 2);
        let padded = plan.padded(7);
        assert_eq!(padded.horizon(), 7);
        assert_eq!(sum_of_costs(&padded), 4);
        assert_eq!(makespan(&padded), 2);

        let idle = Plan::new(vec![vec![1], vec![2]]).unwrap();
        assert_eq!(makespan(&idle), 0);
        assert_eq!(sum_of_costs(&idle), 0);
    }

    #[test]
    fn lower_bound() {
        assert_eq!(cost_lower_bound(&c4()).unwrap(), 4);
        let at_goal = MapfInstance::new(cycle(4), vec![1, 3].into(), vec![1, 3].into()).unwrap();
        assert_eq!(cost_lower_bound(&at_goal).unwrap(), 0);
        let split = Graph::from_edges(4, [(0, 1), (2, 3)]).unwrap();
        let inst = MapfInstance::new(split, vec![0].into(), vec![3].into()).unwrap();
        assert!(matches!(
            cost_lower_bound(&inst),
            Err(MapfError::Unreachable { agent: AgentId(0) })
        ));
    }
}
