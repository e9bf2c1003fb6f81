//! Optimal multi-agent path finding under the sum-of-costs objective.
//!
//! Three engines share one instance model and validator: conflict-based
//! search ([`cbs`]), an eager SAT engine over the complete propositional
//! model and a lazy SAT engine that adds collision-exclusion clauses only
//! when a decoded plan collides ([`engines`]). An exhaustive joint-space
//! search ([`oracle`]) serves as ground truth on small instances.

pub mod cbs;
pub mod cli;
pub mod cnf;
pub mod encoder;
pub mod engines;
pub mod error;
pub mod instance;
pub mod lowlevel;
pub mod oracle;
pub mod report;
pub mod sat;

pub use engines::{mddsat_solve, smtcbs_fixed, smtcbs_solve, solve};
pub use error::{MapfError, Result};
pub use instance::{
    cost_lower_bound, makespan, sum_of_costs, validate_plan, AgentId, Conflict, ConflictKind,
    Configuration, Constraint, Graph, MapfInstance, Plan, VertexId,
};
pub use report::{EngineKind, Limits, Outcome, SatOptions, SolveReport, Unsolvable};
