use std::fmt::Write as _;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;

use crate::encoder;
use crate::engines::{mddsat_run, smtcbs_run, solve};
use crate::error::{MapfError, Result};
use crate::instance::{makespan, sum_of_costs, validate_plan, Configuration, MapfInstance, Plan};
use crate::report::{EngineKind, Limits, Outcome, SatOptions, SolveReport};

pub const EXIT_SOLVED: i32 = 0;
pub const EXIT_UNSOLVABLE: i32 = 1;
pub const EXIT_BUDGET: i32 = 2;
pub const EXIT_ERROR: i32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    /// Engines to run; batch mode runs every one of them per agent count.
    pub engines: Vec<EngineKind>,
    pub limits: Limits,
    pub sat: SatOptions,
    /// Echoed into the record.
    pub seed: Option<u64>,
    /// Write the last SAT formula and its variable map here (single runs only).
    pub dump_cnf: Option<PathBuf>,
    /// Report wall time; off gives byte-reproducible records.
    pub timing: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            engines: vec![EngineKind::SmtCbs],
            limits: Limits::default(),
            sat: SatOptions::default(),
            seed: None,
            dump_cnf: None,
            timing: true,
        }
    }
}

/// One result line. Field order is the serialization order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Record {
    pub instance: String,
    pub engine: String,
    pub outcome: String,
    pub cost: Option<u64>,
    pub makespan: Option<usize>,
    pub sat_calls: u64,
    pub clauses: usize,
    pub refinements: usize,
    pub ct_nodes: u64,
    pub xi_increments: u64,
    pub wall_ms: u64,
    pub seed: Option<u64>,
    pub detail: Option<String>,
}

impl Record {
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("records serialize")
    }

    pub fn exit_code(&self) -> i32 {
        match self.outcome.as_str() {
            "SOLVED" => EXIT_SOLVED,
            "UNSOLVABLE" | "UNSOLVABLE_BY_CEILING" => EXIT_UNSOLVABLE,
            "BUDGET_EXCEEDED" => EXIT_BUDGET,
            _ => EXIT_ERROR,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub record: Record,
    /// `None` when the engine failed; the error is in `record.detail`.
    pub report: Option<SolveReport>,
}

impl RunOutput {
    pub fn plan(&self) -> Option<&Plan> {
        self.report.as_ref().and_then(SolveReport::plan)
    }
}

/// Runs one engine on one instance. Engine errors become `ERROR` records.
pub fn run_instance(name: &str, inst: &MapfInstance, engine: EngineKind, config: &RunConfig) -> RunOutput {
    let result = solve_with_dump(inst, engine, config).and_then(|report| {
        if let Some(plan) = report.plan() {
            if let Some(c) = validate_plan(plan, inst)?.first() {
                return Err(MapfError::Internal(format!("emitted plan collides: {c}")));
            }
        }
        Ok(report)
    });
    let mut record = Record {
        instance: name.to_string(),
        engine: engine.name().to_string(),
        outcome: "ERROR".to_string(),
        cost: None,
        makespan: None,
        sat_calls: 0,
        clauses: 0,
        refinements: 0,
        ct_nodes: 0,
        xi_increments: 0,
        wall_ms: 0,
        seed: config.seed,
        detail: None,
    };
    match result {
        Ok(report) => {
            record.outcome = report.outcome.label().to_string();
            record.cost = report.cost;
            record.makespan = report.plan().map(makespan);
            record.sat_calls = report.stats.sat_calls;
            record.clauses = report.stats.clauses;
            record.refinements = report.stats.refinements;
            record.ct_nodes = report.stats.ct_nodes;
            record.xi_increments = report.stats.xi_increments;
            if config.timing {
                record.wall_ms = report.stats.wall.as_millis() as u64;
            }
            if let Outcome::Unsolvable(reason) = &report.outcome {
                record.detail = Some(reason.to_string());
            }
            RunOutput {
                record,
                report: Some(report),
            }
        }
        Err(e) => {
            record.detail = Some(e.to_string());
            RunOutput { record, report: None }
        }
    }
}

fn solve_with_dump(inst: &MapfInstance, engine: EngineKind, config: &RunConfig) -> Result<SolveReport> {
    let Some(path) = &config.dump_cnf else {
        return solve(engine, inst, &config.limits, &config.sat);
    };
    let run = match engine {
        EngineKind::MddSat => mddsat_run(inst, &config.limits, &config.sat)?,
        EngineKind::SmtCbs => smtcbs_run(inst, &config.limits, &config.sat)?,
        other => {
            return Err(MapfError::Usage(format!(
                "--dump-cnf needs a SAT engine, not {other}"
            )))
        }
    };
    if let Some((formula, varmap)) = &run.last_formula {
        encoder::dump(formula, varmap, path)?;
    }
    Ok(run.report)
}

/// The instance restricted to its first `k` agents.
pub fn agent_prefix(inst: &MapfInstance, k: usize) -> Result<MapfInstance> {
    if k > inst.num_agents() {
        return Err(MapfError::Usage(format!(
            "instance has {} agents, {k} requested",
            inst.num_agents()
        )));
    }
    MapfInstance::new(
        inst.graph().clone(),
        Configuration::new(inst.start().positions()[..k].to_vec()),
        Configuration::new(inst.goal().positions()[..k].to_vec()),
    )
}

/// Runs every engine of `config` on the agent prefixes `1..=k` of `inst`, in
/// parallel. Records come back ordered by `(k, engine)`.
pub fn run_batch(name: &str, inst: &MapfInstance, config: &RunConfig) -> Result<Vec<RunOutput>> {
    let mut jobs = Vec::new();
    for k in 1..=inst.num_agents() {
        let sub = agent_prefix(inst, k)?;
        for &engine in &config.engines {
            jobs.push((k, sub.clone(), engine));
        }
    }
    let mut batch_config = config.clone();
    batch_config.dump_cnf = None;
    Ok(jobs
        .par_iter()
        .map(|(k, sub, engine)| run_instance(&format!("{name} k={k}"), sub, *engine, &batch_config))
        .collect())
}

/// Per-agent lines `a<i>: v0 v1 ... vμ` followed by the cost footer.
pub fn plan_text(plan: &Plan) -> String {
    let mut out = String::new();
    for (i, path) in plan.paths().iter().enumerate() {
        write!(out, "a{}:", i + 1).unwrap();
        for v in path {
            write!(out, " {v}").unwrap();
        }
        out.push('\n');
    }
    writeln!(out, "cost: {}", sum_of_costs(plan)).unwrap();
    writeln!(out, "makespan: {}", makespan(plan)).unwrap();
    out
}
