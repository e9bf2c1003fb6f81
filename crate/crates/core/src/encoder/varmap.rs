use std::collections::HashMap;
use std::io::{self, Write};

use crate::cnf::{Lit, Model, Var};
use crate::error::{MapfError, Result};
use crate::instance::{path_cost, AgentId, MapfInstance, Plan, VertexId};
use crate::lowlevel::Mdd;

/// What a propositional variable stands for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VarMeaning {
    /// Agent occupies `vertex` at `time`.
    Vertex {
        agent: AgentId,
        vertex: VertexId,
        time: usize,
    },
    /// Agent goes `from -> to` during `time -> time + 1` (`from == to` is a wait).
    Edge {
        agent: AgentId,
        from: VertexId,
        to: VertexId,
        time: usize,
    },
    /// Agent has not yet settled at its goal for good at `time`.
    Late { agent: AgentId, time: usize },
    /// At least `threshold` of the first `index + 1` inputs of a counter are true.
    Counter {
        counter: usize,
        index: usize,
        threshold: usize,
    },
}

/// Bidirectional map between variable ids and their meanings, together with
/// the per-agent MDDs that determine which vertex variables exist.
#[derive(Debug, Clone)]
pub struct VariableMap {
    meanings: Vec<VarMeaning>,
    vertex: HashMap<(AgentId, VertexId, usize), Var>,
    edge: HashMap<(AgentId, VertexId, VertexId, usize), Var>,
    late: HashMap<(AgentId, usize), Var>,
    counters: Vec<Vec<Lit>>,
    mdds: Vec<Mdd>,
    goals: Vec<VertexId>,
    horizon: usize,
    cost: u64,
    lower_bound: u64,
}

impl VariableMap {
    pub(crate) fn new(inst: &MapfInstance, mdds: Vec<Mdd>, cost: u64, lower_bound: u64) -> Self {
        let horizon = mdds.iter().map(Mdd::bound).max().unwrap_or(0);
        VariableMap {
            meanings: Vec::new(),
            vertex: HashMap::new(),
            edge: HashMap::new(),
            late: HashMap::new(),
            counters: Vec::new(),
            mdds,
            goals: inst.goal().positions().to_vec(),
            horizon,
            cost,
            lower_bound,
        }
    }

    pub fn len(&self) -> usize {
        self.meanings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.meanings.is_empty()
    }

    /// Common time horizon μ of the encoding.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    /// Sum-of-costs bound ξ the encoding was built for.
    pub fn cost(&self) -> u64 {
        self.cost
    }

    pub fn lower_bound(&self) -> u64 {
        self.lower_bound
    }

    pub fn mdds(&self) -> &[Mdd] {
        &self.mdds
    }

    pub fn num_agents(&self) -> usize {
        self.mdds.len()
    }

    /// Vertices an agent may occupy at `time`; past its own MDD bound the
    /// agent sits at its goal.
    pub fn level(&self, agent: AgentId, time: usize) -> &[VertexId] {
        let mdd = &self.mdds[agent.index()];
        if time <= mdd.bound() {
            mdd.level(time)
        } else {
            std::slice::from_ref(&self.goals[agent.index()])
        }
    }

    pub(crate) fn goal(&self, agent: AgentId) -> VertexId {
        self.goals[agent.index()]
    }

    pub(crate) fn allocate(&mut self, meaning: VarMeaning) -> Var {
        self.meanings.push(meaning);
        let var = Var(self.meanings.len() as u32);
        match meaning {
            VarMeaning::Vertex {
                agent,
                vertex,
                time,
            } => {
                self.vertex.insert((agent, vertex, time), var);
            }
            VarMeaning::Edge {
                agent,
                from,
                to,
                time,
            } => {
                self.edge.insert((agent, from, to, time), var);
            }
            VarMeaning::Late { agent, time } => {
                self.late.insert((agent, time), var);
            }
            VarMeaning::Counter { .. } => {}
        }
        var
    }

    pub(crate) fn new_counter(&mut self, inputs: Vec<Lit>) -> usize {
        self.counters.push(inputs);
        self.counters.len() - 1
    }

    pub fn vertex_var(&self, agent: AgentId, vertex: VertexId, time: usize) -> Option<Var> {
        self.vertex.get(&(agent, vertex, time)).copied()
    }

    pub fn edge_var(&self, agent: AgentId, from: VertexId, to: VertexId, time: usize) -> Option<Var> {
        self.edge.get(&(agent, from, to, time)).copied()
    }

    pub fn late_var(&self, agent: AgentId, time: usize) -> Option<Var> {
        self.late.get(&(agent, time)).copied()
    }

    pub fn meaning(&self, var: Var) -> Option<VarMeaning> {
        self.meanings.get(var.index()).copied()
    }

    pub fn meanings(&self) -> impl Iterator<Item = (Var, VarMeaning)> + '_ {
        self.meanings
            .iter()
            .enumerate()
            .map(|(i, m)| (Var(i as u32 + 1), *m))
    }

    /// Sidecar listing for DIMACS dumps: `<id> X <agent> <vertex> <time>` and
    /// `<id> E <agent> <u> <v> <time>`, agents numbered from 1. Auxiliary
    /// cost and counter variables are not listed.
    pub fn write_sidecar<W: Write>(&self, mut out: W) -> io::Result<()> {
        for (var, meaning) in self.meanings() {
            match meaning {
                VarMeaning::Vertex {
                    agent,
                    vertex,
                    time,
                } => writeln!(out, "{} X {} {} {}", var.0, agent.number(), vertex, time)?,
                VarMeaning::Edge {
                    agent,
                    from,
                    to,
                    time,
                } => writeln!(out, "{} E {} {} {} {}", var.0, agent.number(), from, to, time)?,
                VarMeaning::Late { .. } | VarMeaning::Counter { .. } => {}
            }
        }
        Ok(())
    }

    /// Truth assignment induced by a plan: vertex, move and lateness
    /// variables follow the plan, counter variables count their true inputs.
    /// Fails if the plan leaves some agent's MDD.
    pub fn induced_model(&self, plan: &Plan) -> Result<Model> {
        if plan.num_agents() != self.num_agents() {
            return Err(MapfError::Usage("plan and encoding disagree on agent count".into()));
        }
        for agent in (0..self.num_agents()).map(AgentId) {
            for t in 0..=self.horizon.max(plan.horizon()) {
                let v = plan.position(agent, t);
                if t <= self.horizon && self.vertex_var(agent, v, t).is_none() {
                    return Err(MapfError::Usage(format!(
                        "{agent} at v{v}, t={t} lies outside its MDD"
                    )));
                }
                if t > self.horizon && v != self.goal(agent) {
                    return Err(MapfError::Usage(format!("{agent} moves past the horizon")));
                }
            }
        }
        let costs: Vec<usize> = plan.paths().iter().map(|p| path_cost(p)).collect();
        let mut values: Vec<bool> = Vec::with_capacity(self.meanings.len());
        for meaning in &self.meanings {
            let value = match *meaning {
                VarMeaning::Vertex {
                    agent,
                    vertex,
                    time,
                } => plan.position(agent, time) == vertex,
                VarMeaning::Edge {
                    agent,
                    from,
                    to,
                    time,
                } => plan.position(agent, time) == from && plan.position(agent, time + 1) == to,
                VarMeaning::Late { agent, time } => costs[agent.index()] > time,
                VarMeaning::Counter {
                    counter,
                    index,
                    threshold,
                } => {
                    let count = self.counters[counter][..=index]
                        .iter()
                        .filter(|l| values[l.var().index()] == l.is_positive())
                        .count();
                    count >= threshold
                }
            };
            values.push(value);
        }
        Ok(Model::new(values))
    }
}
