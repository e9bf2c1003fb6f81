//! SAT-based optimal engines and a common entry point for all solvers.
//!
//! Both SAT engines walk the sum-of-costs bound upward from the lower bound
//! and stop at the first satisfiable bound. The eager engine solves the
//! complete model once per bound. The lazy engine starts from the basic model
//! and adds one exclusion clause per collision found in the decoded plan,
//! carrying every recorded conflict over to the next bound.

use std::collections::BTreeSet;
use std::time::Instant;

use crate::cbs::cbs_solve;
use crate::cnf::CnfFormula;
use crate::encoder::{encode_basic, encode_complete, extract_solution, refine, Refinement, VariableMap};
use crate::error::{MapfError, Result};
use crate::instance::{cost_lower_bound, sum_of_costs, validate_plan, Conflict, MapfInstance, Plan};
use crate::oracle::{oracle_solve, OracleOutcome};
use crate::report::{EngineKind, Limits, Outcome, SatOptions, SolveReport, Unsolvable, XiStep};
use crate::sat::{SatResult, SatSession};

/// Time and conflict budget shared by all SAT calls of one run.
#[derive(Debug, Clone, Copy, Default)]
pub struct Budget {
    pub deadline: Option<Instant>,
    pub conflicts_per_call: Option<u64>,
}

impl Budget {
    pub fn from_limits(limits: &Limits, started: Instant) -> Self {
        Budget {
            deadline: limits.deadline(started),
            conflicts_per_call: limits.sat_conflict_budget,
        }
    }

    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    fn session(&self, options: &SatOptions, formula: &CnfFormula) -> SatSession {
        let mut session = SatSession::from_formula(&options.backend, formula);
        session.set_deadline(self.deadline);
        session.set_conflict_budget(self.conflicts_per_call);
        session
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FixedOutcome {
    Solved(Plan),
    /// No collision-free plan at this bound.
    Unsat,
    BudgetExceeded,
}

/// Result of the lazy engine at one bound.
#[derive(Debug, Clone)]
pub struct FixedRun {
    pub outcome: FixedOutcome,
    pub step: XiStep,
    /// Refinements that were re-derived although already present.
    pub duplicates: usize,
    pub formula: CnfFormula,
    pub varmap: VariableMap,
}

/// Lazy solving at a fixed bound `xi`.
///
/// Builds the basic model with every conflict in `conflicts`, then loops:
/// solve, decode, validate, and on collisions record them in `conflicts` and
/// add their exclusion clauses. Ends with a valid plan, UNSAT, or an
/// exhausted budget.
pub fn smtcbs_fixed(
    conflicts: &mut BTreeSet<Conflict>,
    xi: u64,
    inst: &MapfInstance,
    options: &SatOptions,
    budget: &Budget,
) -> Result<FixedRun> {
    let (mut formula, varmap) = encode_basic(conflicts.iter(), xi, inst)?;
    let mut session = budget.session(options, &formula);
    let mut step = XiStep {
        xi,
        ..XiStep::default()
    };
    let mut duplicates = 0;

    let outcome = loop {
        if budget.expired() {
            break FixedOutcome::BudgetExceeded;
        }
        step.sat_calls += 1;
        let model = match session.solve()? {
            SatResult::Sat(model) => model,
            SatResult::Unsat { .. } => {
                step.satisfiable = Some(false);
                break FixedOutcome::Unsat;
            }
            SatResult::Unknown => break FixedOutcome::BudgetExceeded,
        };
        let plan = extract_solution(&model, &varmap, inst)?;
        let collisions = validate_plan(&plan, inst)?;
        if collisions.is_empty() {
            step.satisfiable = Some(true);
            break FixedOutcome::Solved(plan);
        }
        let chosen = if options.refine_all {
            &collisions[..]
        } else {
            &collisions[..1]
        };
        let mut added = 0;
        for conflict in chosen {
            conflicts.insert(*conflict);
            match refine(&mut formula, &varmap, conflict)? {
                Refinement::Added => {
                    added += 1;
                    if options.incremental {
                        let clause = formula.clauses().last().expect("clause was just added");
                        session.add_clause(clause);
                    }
                }
                Refinement::Duplicate => duplicates += 1,
                Refinement::Vacuous => {
                    return Err(MapfError::Internal(format!(
                        "decoded plan has a collision outside the model: {conflict}"
                    )))
                }
            }
        }
        if added == 0 {
            return Err(MapfError::Internal(
                "model violates a clause that is already present".into(),
            ));
        }
        step.refinements += added;
        if !options.incremental {
            session = budget.session(options, &formula);
        }
    };
    step.clauses = formula.len();
    Ok(FixedRun {
        outcome,
        step,
        duplicates,
        formula,
        varmap,
    })
}

/// A finished SAT-engine run plus the last formula it built.
#[derive(Debug, Clone)]
pub struct SatRun {
    pub report: SolveReport,
    pub last_formula: Option<(CnfFormula, VariableMap)>,
}

fn lower_bound_or_report(inst: &MapfInstance, report: &mut SolveReport) -> Result<Option<u64>> {
    match cost_lower_bound(inst) {
        Ok(lower) => Ok(Some(lower)),
        Err(MapfError::Unreachable { agent }) => {
            report.outcome = Outcome::Unsolvable(Unsolvable::Unreachable(agent));
            Ok(None)
        }
        Err(e) => Err(e),
    }
}

fn finish(mut run: SatRun, started: Instant) -> SatRun {
    let report = &mut run.report;
    report.cost = report.plan().map(sum_of_costs);
    report.stats.xi_increments = report.per_xi.len().saturating_sub(1) as u64;
    report.stats.sat_calls = report.per_xi.iter().map(|s| s.sat_calls).sum();
    report.stats.refinements = report.per_xi.iter().map(|s| s.refinements).sum();
    report.stats.total_clauses = report.per_xi.iter().map(|s| s.clauses).sum();
    report.stats.clauses = report.per_xi.last().map_or(0, |s| s.clauses);
    report.stats.wall = started.elapsed();
    run
}

/// Lazy engine: increasing bounds, basic model plus on-demand refinement.
pub fn smtcbs_run(inst: &MapfInstance, limits: &Limits, options: &SatOptions) -> Result<SatRun> {
    let started = Instant::now();
    let budget = Budget::from_limits(limits, started);
    let mut run = SatRun {
        report: SolveReport::new(EngineKind::SmtCbs),
        last_formula: None,
    };
    let Some(lower) = lower_bound_or_report(inst, &mut run.report)? else {
        return Ok(finish(run, started));
    };
    let ceiling = limits.ceiling_for(inst, lower);
    let mut conflicts = BTreeSet::new();
    let mut xi = lower;
    run.report.outcome = loop {
        if xi > ceiling {
            break Outcome::Unsolvable(Unsolvable::Ceiling(ceiling));
        }
        if budget.expired() {
            break Outcome::BudgetExceeded;
        }
        let fixed = smtcbs_fixed(&mut conflicts, xi, inst, options, &budget)?;
        run.report.per_xi.push(fixed.step);
        run.report.stats.duplicate_refinements += fixed.duplicates;
        run.report.stats.conflicts_recorded = conflicts.len();
        run.last_formula = Some((fixed.formula, fixed.varmap));
        match fixed.outcome {
            FixedOutcome::Solved(plan) => break Outcome::Solved(plan),
            FixedOutcome::BudgetExceeded => break Outcome::BudgetExceeded,
            FixedOutcome::Unsat => xi += 1,
        }
    };
    Ok(finish(run, started))
}

/// Eager engine: increasing bounds, complete model solved once per bound.
pub fn mddsat_run(inst: &MapfInstance, limits: &Limits, options: &SatOptions) -> Result<SatRun> {
    let started = Instant::now();
    let budget = Budget::from_limits(limits, started);
    let mut run = SatRun {
        report: SolveReport::new(EngineKind::MddSat),
        last_formula: None,
    };
    let Some(lower) = lower_bound_or_report(inst, &mut run.report)? else {
        return Ok(finish(run, started));
    };
    let ceiling = limits.ceiling_for(inst, lower);
    let mut xi = lower;
    run.report.outcome = loop {
        if xi > ceiling {
            break Outcome::Unsolvable(Unsolvable::Ceiling(ceiling));
        }
        if budget.expired() {
            break Outcome::BudgetExceeded;
        }
        let (formula, varmap) = encode_complete(xi, inst)?;
        let mut session = budget.session(options, &formula);
        let mut step = XiStep {
            xi,
            sat_calls: 1,
            clauses: formula.len(),
            ..XiStep::default()
        };
        let result = session.solve()?;
        let outcome = match result {
            SatResult::Sat(model) => {
                step.satisfiable = Some(true);
                let plan = extract_solution(&model, &varmap, inst)?;
                if let Some(c) = validate_plan(&plan, inst)?.first() {
                    return Err(MapfError::Internal(format!(
                        "complete model admitted a collision: {c}"
                    )));
                }
                Some(Outcome::Solved(plan))
            }
            SatResult::Unsat { .. } => {
                step.satisfiable = Some(false);
                None
            }
            SatResult::Unknown => Some(Outcome::BudgetExceeded),
        };
        run.report.per_xi.push(step);
        run.last_formula = Some((formula, varmap));
        match outcome {
            Some(outcome) => break outcome,
            None => xi += 1,
        }
    };
    Ok(finish(run, started))
}

pub fn smtcbs_solve(inst: &MapfInstance, limits: &Limits, options: &SatOptions) -> Result<SolveReport> {
    smtcbs_run(inst, limits, options).map(|r| r.report)
}

pub fn mddsat_solve(inst: &MapfInstance, limits: &Limits, options: &SatOptions) -> Result<SolveReport> {
    mddsat_run(inst, limits, options).map(|r| r.report)
}

fn oracle_report(inst: &MapfInstance, limits: &Limits) -> Result<SolveReport> {
    let started = Instant::now();
    let mut report = SolveReport::new(EngineKind::Oracle);
    if let Some(lower) = lower_bound_or_report(inst, &mut report)? {
        report.outcome = match oracle_solve(inst, limits.ceiling)? {
            OracleOutcome::Optimal { plan, .. } => Outcome::Solved(plan),
            OracleOutcome::NoSolution => match limits.ceiling {
                Some(c) => Outcome::Unsolvable(Unsolvable::Ceiling(c.max(lower))),
                None => Outcome::Unsolvable(Unsolvable::Exhausted),
            },
        };
    }
    report.cost = report.plan().map(sum_of_costs);
    report.stats.wall = started.elapsed();
    Ok(report)
}

/// Runs `engine` and double-checks any plan it returns.
pub fn solve(
    engine: EngineKind,
    inst: &MapfInstance,
    limits: &Limits,
    options: &SatOptions,
) -> Result<SolveReport> {
    let report = match engine {
        EngineKind::Cbs => cbs_solve(inst, limits)?,
        EngineKind::MddSat => mddsat_solve(inst, limits, options)?,
        EngineKind::SmtCbs => smtcbs_solve(inst, limits, options)?,
        EngineKind::Oracle => oracle_report(inst, limits)?,
    };
    if let Some(plan) = report.plan() {
        if let Some(c) = validate_plan(plan, inst)?.first() {
            return Err(MapfError::Internal(format!("{engine} returned a colliding plan: {c}")));
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::Graph;

    fn c4() -> MapfInstance {
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        MapfInstance::new(g, vec![0, 2].into(), vec![2, 0].into()).unwrap()
    }

    fn p3_swap() -> MapfInstance {
        let g = Graph::from_edges(3, [(0, 1), (1, 2)]).unwrap();
        MapfInstance::new(g, vec![0, 2].into(), vec![2, 0].into()).unwrap()
    }

    #[test]
    fn all_engines_agree_on_c4() {
        for engine in [EngineKind::Cbs, EngineKind::MddSat, EngineKind::SmtCbs, EngineKind::Oracle] {
            let report = solve(engine, &c4(), &Limits::default(), &SatOptions::default()).unwrap();
            assert_eq!(report.cost, Some(4), "{engine}");
        }
    }

    #[test]
    fn lazy_refines_at_least_once_on_c4() {
        let report = smtcbs_solve(&c4(), &Limits::default(), &SatOptions::default()).unwrap();
        assert!(report.stats.refinements >= 1);
        assert_eq!(report.per_xi.first().unwrap().xi, 4);
        assert_eq!(report.stats.xi_increments, 0);
    }

    #[test]
    fn swap_is_unsolvable_by_ceiling() {
        let limits = Limits {
            ceiling: Some(10),
            ..Limits::default()
        };
        for engine in [EngineKind::MddSat, EngineKind::SmtCbs] {
            let report = solve(engine, &p3_swap(), &limits, &SatOptions::default()).unwrap();
            assert_eq!(report.outcome, Outcome::Unsolvable(Unsolvable::Ceiling(10)), "{engine}");
            assert_eq!(report.per_xi.len(), 7);
        }
    }

    #[test]
    fn refinement_modes_agree() {
        let star = Graph::from_edges(5, [(0, 1), (1, 2), (3, 1), (1, 4)]).unwrap();
        let inst = MapfInstance::new(star, vec![0, 3, 2].into(), vec![2, 4, 0].into()).unwrap();
        let costs: Vec<_> = [(true, true), (false, true), (true, false), (false, false)]
            .into_iter()
            .map(|(refine_all, incremental)| {
                let options = SatOptions {
                    refine_all,
                    incremental,
                    ..SatOptions::default()
                };
                let limits = Limits {
                    ceiling: Some(30),
                    ..Limits::default()
                };
                smtcbs_solve(&inst, &limits, &options).unwrap().outcome.label()
            })
            .collect();
        assert!(costs.windows(2).all(|w| w[0] == w[1]), "{costs:?}");
    }

    #[test]
    fn conflicts_persist_across_bounds() {
        let mut conflicts = BTreeSet::new();
        let inst = c4();
        let budget = Budget::default();
        let options = SatOptions::default();
        let run = smtcbs_fixed(&mut conflicts, 4, &inst, &options, &budget).unwrap();
        assert!(matches!(run.outcome, FixedOutcome::Solved(_)));
        let recorded = conflicts.len();
        assert!(recorded >= 1);
        let again = smtcbs_fixed(&mut conflicts, 4, &inst, &options, &budget).unwrap();
        assert_eq!(again.step.refinements, 0);
        assert_eq!(again.step.sat_calls, 1);
        assert_eq!(conflicts.len(), recorded);
    }
}
