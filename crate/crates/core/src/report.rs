//! Solver outcomes, statistics and resource limits shared by all engines.

use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use crate::error::MapfError;
use crate::instance::{AgentId, MapfInstance, Plan};
use crate::sat::Backend;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum EngineKind {
    Cbs,
    MddSat,
    SmtCbs,
    Oracle,
}

impl EngineKind {
    pub const SOLVERS: [EngineKind; 3] = [EngineKind::Cbs, EngineKind::MddSat, EngineKind::SmtCbs];

    pub fn name(self) -> &'static str {
        match self {
            EngineKind::Cbs => "cbs",
            EngineKind::MddSat => "mddsat",
            EngineKind::SmtCbs => "smtcbs",
            EngineKind::Oracle => "oracle",
        }
    }
}

impl fmt::Display for EngineKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EngineKind {
    type Err = MapfError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "cbs" => Ok(EngineKind::Cbs),
            "mddsat" => Ok(EngineKind::MddSat),
            "smtcbs" => Ok(EngineKind::SmtCbs),
            "oracle" => Ok(EngineKind::Oracle),
            other => Err(MapfError::Usage(format!("unknown engine `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unsolvable {
    /// Some agent's goal is in another connected component.
    Unreachable(AgentId),
    /// No solution with sum-of-costs up to this ceiling.
    Ceiling(u64),
    /// The search space was exhausted without pruning by cost.
    Exhausted,
}

impl fmt::Display for Unsolvable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Unsolvable::Unreachable(agent) => write!(f, "{agent} cannot reach its goal"),
            Unsolvable::Ceiling(c) => write!(f, "no solution with sum-of-costs <= {c}"),
            Unsolvable::Exhausted => f.write_str("search space exhausted"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Outcome {
    Solved(Plan),
    Unsolvable(Unsolvable),
    BudgetExceeded,
}

impl Outcome {
    pub fn plan(&self) -> Option<&Plan> {
        match self {
            Outcome::Solved(plan) => Some(plan),
            _ => None,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Outcome::Solved(_) => "SOLVED",
            Outcome::Unsolvable(Unsolvable::Ceiling(_)) => "UNSOLVABLE_BY_CEILING",
            Outcome::Unsolvable(_) => "UNSOLVABLE",
            Outcome::BudgetExceeded => "BUDGET_EXCEEDED",
        }
    }
}

/// Work done at one sum-of-costs bound by a SAT-based engine.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct XiStep {
    pub xi: u64,
    pub sat_calls: u64,
    /// Clause count of the formula when the step ended.
    pub clauses: usize,
    /// Refinement clauses added during this step.
    pub refinements: usize,
    /// `None` when the budget ran out before a verdict.
    pub satisfiable: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Stats {
    pub sat_calls: u64,
    /// Clause count of the last formula built.
    pub clauses: usize,
    /// Clauses summed over every formula built.
    pub total_clauses: usize,
    pub refinements: usize,
    pub conflicts_recorded: usize,
    /// Refinement clauses that were already present when re-derived.
    pub duplicate_refinements: usize,
    pub ct_nodes: u64,
    pub ct_generated: u64,
    pub xi_increments: u64,
    pub wall: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveReport {
    pub engine: EngineKind,
    pub outcome: Outcome,
    pub cost: Option<u64>,
    pub stats: Stats,
    pub per_xi: Vec<XiStep>,
}

impl SolveReport {
    pub(crate) fn new(engine: EngineKind) -> Self {
        SolveReport {
            engine,
            outcome: Outcome::BudgetExceeded,
            cost: None,
            stats: Stats::default(),
            per_xi: Vec::new(),
        }
    }

    pub fn plan(&self) -> Option<&Plan> {
        self.outcome.plan()
    }

    pub fn is_solved(&self) -> bool {
        matches!(self.outcome, Outcome::Solved(_))
    }
}

/// Resource limits; `None` means unlimited.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Limits {
    pub time_limit: Option<Duration>,
    /// CBS: maximum number of expanded constraint-tree nodes.
    pub node_budget: Option<u64>,
    /// SAT engines: maximum conflicts per SAT call.
    pub sat_conflict_budget: Option<u64>,
    /// Largest sum-of-costs to try; defaults to [`default_ceiling`].
    pub ceiling: Option<u64>,
}

impl Limits {
    pub fn ceiling_for(&self, inst: &MapfInstance, lower_bound: u64) -> u64 {
        self.ceiling.unwrap_or_else(|| default_ceiling(inst, lower_bound))
    }

    pub(crate) fn deadline(&self, started: Instant) -> Option<Instant> {
        self.time_limit.map(|d| started + d)
    }
}

/// ξ₀ + k·|V|³: the cost ceiling past which an instance is declared unsolvable.
pub fn default_ceiling(inst: &MapfInstance, lower_bound: u64) -> u64 {
    let n = inst.graph().num_vertices() as u64;
    let k = inst.num_agents() as u64;
    lower_bound.saturating_add(k.saturating_mul(n.saturating_pow(3)))
}

/// Options of the SAT-based engines.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SatOptions {
    pub backend: Backend,
    /// Refine every collision found in one validation (otherwise only the first).
    pub refine_all: bool,
    /// Keep one solver session per bound and add refinements to it
    /// (otherwise re-load the whole formula before each consultation).
    pub incremental: bool,
}

impl Default for SatOptions {
    fn default() -> Self {
        SatOptions {
            backend: Backend::Embedded,
            refine_all: true,
            incremental: true,
        }
    }
}
