//! SAT-solving contract shared by the SAT-based engines.
//!
//! A [`SatSession`] owns a growing clause set and answers satisfiability
//! queries over it, optionally under assumptions. Two backends sit behind the
//! same surface: the embedded [`cdcl::Cdcl`] solver and an external process
//! that reads DIMACS on stdin and answers in SAT-competition format.

pub mod cdcl;
mod external;

use std::time::Instant;

pub use cdcl::{Cdcl, CdclOutcome, CdclStats};
pub use external::{parse_solver_output, ExternalSolver, SolverAnswer};

use crate::cnf::{CnfFormula, Lit, Model};
use crate::error::{MapfError, Result};

/// Which solver answers the queries of a session.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub enum Backend {
    #[default]
    Embedded,
    /// Program and arguments of an external DIMACS solver.
    External(Vec<String>),
}

impl Backend {
    /// Parses `embedded` or `cmd:<program> [args...]`.
    pub fn parse(text: &str) -> Result<Self> {
        if text == "embedded" {
            return Ok(Backend::Embedded);
        }
        match text.strip_prefix("cmd:") {
            Some(command) => {
                let argv: Vec<String> = command.split_whitespace().map(String::from).collect();
                if argv.is_empty() {
                    return Err(MapfError::Usage("empty external solver command".into()));
                }
                Ok(Backend::External(argv))
            }
            None => Err(MapfError::Usage(format!(
                "unknown backend `{text}` (expected `embedded` or `cmd:<path>`)"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SatResult {
    Sat(Model),
    /// Unsatisfiable; `core` is a subset of the assumptions sufficient for
    /// unsatisfiability (empty when the clauses alone are contradictory).
    Unsat { core: Vec<Lit> },
    /// Resource budget exhausted before a verdict.
    Unknown,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SessionState {
    Unknown,
    Sat,
    Unsat,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SatStats {
    pub solve_calls: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub learned: u64,
}

#[derive(Debug)]
enum Engine {
    Embedded(Cdcl),
    External(ExternalSolver),
}

#[derive(Debug)]
pub struct SatSession {
    engine: Engine,
    num_vars: usize,
    num_clauses: usize,
    state: SessionState,
    model: Option<Model>,
    external_calls: u64,
}

impl SatSession {
    pub fn new(backend: &Backend) -> Self {
        let engine = match backend {
            Backend::Embedded => Engine::Embedded(Cdcl::new()),
            Backend::External(argv) => Engine::External(ExternalSolver::new(argv.clone())),
        };
        SatSession {
            engine,
            num_vars: 0,
            num_clauses: 0,
            state: SessionState::Unknown,
            model: None,
            external_calls: 0,
        }
    }

    pub fn embedded() -> Self {
        Self::new(&Backend::Embedded)
    }

    pub fn from_formula(backend: &Backend, formula: &CnfFormula) -> Self {
        let mut session = Self::new(backend);
        session.add_formula(formula);
        session
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn num_clauses(&self) -> usize {
        self.num_clauses
    }

    pub fn state(&self) -> SessionState {
        self.state
    }

    /// Model of the last satisfiable call, until clauses are added.
    pub fn model(&self) -> Option<&Model> {
        self.model.as_ref()
    }

    pub fn reserve_vars(&mut self, n: usize) {
        self.num_vars = self.num_vars.max(n);
        match &mut self.engine {
            Engine::Embedded(s) => s.reserve_vars(n),
            Engine::External(s) => s.reserve_vars(n),
        }
    }

    /// Adds a clause and resets the state to unknown. An empty clause makes
    /// the session unsatisfiable rather than failing.
    pub fn add_clause(&mut self, lits: &[Lit]) {
        if let Some(max) = lits.iter().map(|l| l.var().0 as usize).max() {
            self.reserve_vars(max);
        }
        self.num_clauses += 1;
        self.state = SessionState::Unknown;
        self.model = None;
        match &mut self.engine {
            Embedded(s) => s.add_clause(lits),
            External(s) => s.add_clause(lits),
        }
    }

    pub fn add_formula(&mut self, formula: &CnfFormula) {
        self.reserve_vars(formula.num_vars() as usize);
        for clause in formula.clauses() {
            self.add_clause(clause);
        }
    }

    pub fn set_conflict_budget(&mut self, budget: Option<u64>) {
        if let Embedded(s) = &mut self.engine {
            s.set_conflict_budget(budget);
        }
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        match &mut self.engine {
            Embedded(s) => s.set_deadline(deadline),
            External(s) => s.set_deadline(deadline),
        }
    }

    pub fn solve(&mut self) -> Result<SatResult> {
        self.solve_under_assumptions(&[])
    }

    pub fn solve_under_assumptions(&mut self, assumptions: &[Lit]) -> Result<SatResult> {
        if let Some(max) = assumptions.iter().map(|l| l.var().0 as usize).max() {
            self.reserve_vars(max);
        }
        let num_vars = self.num_vars;
        let result = match &mut self.engine {
            Embedded(s) => match s.solve_with(assumptions) {
                CdclOutcome::Sat(mut values) => {
                    values.resize(num_vars, false);
                    SatResult::Sat(Model::new(values))
                }
                CdclOutcome::Unsat(core) => SatResult::Unsat { core },
                CdclOutcome::Unknown => SatResult::Unknown,
            },
            External(s) => {
                self.external_calls += 1;
                match s.solve(assumptions)? {
                    SolverAnswer::Sat(model) => SatResult::Sat(model),
                    SolverAnswer::Unsat => SatResult::Unsat {
                        core: assumptions.to_vec(),
                    },
                    SolverAnswer::Unknown => SatResult::Unknown,
                }
            }
        };
        match &result {
            SatResult::Sat(model) => {
                self.state = SessionState::Sat;
                self.model = Some(model.clone());
            }
            SatResult::Unsat { .. } => {
                self.state = SessionState::Unsat;
                self.model = None;
            }
            SatResult::Unknown => {
                self.state = SessionState::Unknown;
                self.model = None;
            }
        }
        Ok(result)
    }

    pub fn stats(&self) -> SatStats {
        match &self.engine {
            Embedded(s) => {
                let c = s.stats();
                SatStats {
                    solve_calls: c.solve_calls,
                    decisions: c.decisions,
                    propagations: c.propagations,
                    conflicts: c.conflicts,
                    learned: c.learned,
                }
            }
            External(_) => SatStats {
                solve_calls: self.external_calls,
                ..SatStats::default()
            },
        }
    }
}

use Engine::{Embedded, External};
