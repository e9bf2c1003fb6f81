//! Command-line front end: instance files, generation, engine runs and
//! result records.

pub mod generate;
pub mod graph_format;
pub mod map;
pub mod run;
pub mod scen;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::time::Duration;

use clap::Parser;

pub use generate::{generate_instance, GraphShape};
pub use graph_format::{parse_graph, write_graph};
pub use map::{parse_map, GridMap};
pub use run::{plan_text, run_batch, run_instance, Record, RunConfig, RunOutput};
pub use scen::{instance_from_scenario, parse_scen, ScenarioEntry};

use crate::cnf::parse_dimacs;
use crate::error::{MapfError, Result};
use crate::instance::MapfInstance;
use crate::report::{EngineKind, Limits, SatOptions};
use crate::sat::{Backend, SatResult, SatSession};

#[derive(Debug, Parser)]
#[command(name = "mapf", version, about = "Optimal multi-agent path finding")]
pub struct Args {
    /// Grid map file (used with --scen)
    #[arg(long)]
    pub map: Option<PathBuf>,
    /// Scenario file listing start/goal cells on --map
    #[arg(long, requires = "map")]
    pub scen: Option<PathBuf>,
    /// Instance in the native graph format
    #[arg(long, conflicts_with_all = ["map", "scen"])]
    pub graph: Option<PathBuf>,
    /// Generate an open grid `WxH` instead of reading a file
    #[arg(long, value_name = "WxH", conflicts_with_all = ["map", "graph"])]
    pub grid: Option<String>,
    /// Generate a random graph on N vertices instead of reading a file
    #[arg(long, value_name = "N", conflicts_with_all = ["map", "graph", "grid"])]
    pub random_graph: Option<usize>,
    /// Obstacle density of --grid, edge probability of --random-graph
    #[arg(long)]
    pub density: Option<f64>,
    /// Number of agents (scenario rows or generated agents)
    #[arg(long, value_name = "K")]
    pub agents: Option<usize>,
    /// cbs, mddsat, smtcbs or oracle [default: smtcbs]
    #[arg(long)]
    pub engine: Option<String>,
    /// `embedded` or `cmd:<solver command>`
    #[arg(long, default_value = "embedded")]
    pub backend: String,
    /// Wall-clock limit in seconds
    #[arg(long, value_name = "S")]
    pub time_limit: Option<f64>,
    /// Largest sum-of-costs to try before declaring the instance unsolvable
    #[arg(long, value_name = "C")]
    pub ceiling: Option<u64>,
    /// Maximum expanded CBS nodes
    #[arg(long)]
    pub node_budget: Option<u64>,
    /// Maximum conflicts per SAT call
    #[arg(long)]
    pub sat_conflicts: Option<u64>,
    /// Seed for instance generation, echoed in the record
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Write the last formula (DIMACS) and PATH.map
    #[arg(long, value_name = "PATH")]
    pub dump_cnf: Option<PathBuf>,
    /// Append records here instead of stdout
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Write the plan here (`-` for stdout)
    #[arg(long, value_name = "PATH")]
    pub plan_out: Option<PathBuf>,
    /// Write the (generated) instance in the native format and exit
    #[arg(long, value_name = "PATH")]
    pub emit_instance: Option<PathBuf>,
    /// Run k = 1..K agents with cbs, mddsat and smtcbs (or only --engine if given explicitly)
    #[arg(long)]
    pub batch: bool,
    /// Refine only the first collision per consultation
    #[arg(long)]
    pub first_conflict: bool,
    /// Re-load the formula into a fresh solver after each refinement
    #[arg(long)]
    pub fresh_session: bool,
    /// Report wall_ms as 0 so records are byte-reproducible
    #[arg(long)]
    pub no_timing: bool,
    /// Act as a DIMACS SAT solver on PATH (`-` for stdin) and exit 10/20
    #[arg(long, value_name = "PATH", exclusive = true)]
    pub dimacs: Option<PathBuf>,
}

/// Entry point of the `mapf` binary; returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(args) => args,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { run::EXIT_ERROR } else { 0 };
        }
    };
    match execute(&args) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("mapf: {e}");
            run::EXIT_ERROR
        }
    }
}

fn execute(args: &Args) -> Result<i32> {
    if let Some(path) = &args.dimacs {
        return dimacs_mode(path);
    }
    let (name, inst) = load_instance(args)?;
    if let Some(path) = &args.emit_instance {
        fs::write(path, write_graph(&inst))?;
        return Ok(run::EXIT_SOLVED);
    }
    let config = run_config(args)?;

    let outputs = if args.batch {
        run_batch(&name, &inst, &config)?
    } else {
        vec![run_instance(&name, &inst, config.engines[0], &config)]
    };

    let mut records: Box<dyn Write> = match &args.out {
        Some(path) => Box::new(fs::OpenOptions::new().create(true).append(true).open(path)?),
        None => Box::new(io::stdout().lock()),
    };
    for out in &outputs {
        writeln!(records, "{}", out.record.to_json())?;
    }
    records.flush()?;
    drop(records);

    if let Some(path) = &args.plan_out {
        let text: String = outputs.iter().filter_map(|o| o.plan()).map(plan_text).collect();
        write_target(path, &text)?;
    }
    Ok(outputs.iter().map(|o| o.record.exit_code()).max().unwrap_or(0))
}

fn run_config(args: &Args) -> Result<RunConfig> {
    let engine: EngineKind = args.engine.as_deref().unwrap_or("smtcbs").parse()?;
    let engines = if args.batch && args.engine.is_none() {
        EngineKind::SOLVERS.to_vec()
    } else {
        vec![engine]
    };
    let time_limit = match args.time_limit {
        Some(s) if s.is_finite() && s > 0.0 => Some(Duration::from_secs_f64(s)),
        Some(s) => return Err(MapfError::Usage(format!("--time-limit must be positive, got {s}"))),
        None => None,
    };
    for (flag, value) in [("--node-budget", args.node_budget), ("--sat-conflicts", args.sat_conflicts)] {
        if value == Some(0) {
            return Err(MapfError::Usage(format!("{flag} must be positive")));
        }
    }
    Ok(RunConfig {
        engines,
        limits: Limits {
            time_limit,
            node_budget: args.node_budget,
            sat_conflict_budget: args.sat_conflicts,
            ceiling: args.ceiling,
        },
        sat: SatOptions {
            backend: Backend::parse(&args.backend)?,
            refine_all: !args.first_conflict,
            incremental: !args.fresh_session,
        },
        seed: args.seed,
        dump_cnf: args.dump_cnf.clone(),
        timing: !args.no_timing,
    })
}

fn load_instance(args: &Args) -> Result<(String, MapfInstance)> {
    if let Some(path) = &args.graph {
        return Ok((display(path), parse_graph(&read(path)?)?));
    }
    if let Some(scen_path) = &args.scen {
        let map_path = args.map.as_ref().expect("clap enforces --map with --scen");
        let map = parse_map(&read(map_path)?)?;
        let k = args
            .agents
            .ok_or_else(|| MapfError::Usage("--scen needs --agents K".into()))?;
        let entries = parse_scen(&read(scen_path)?, k)?;
        return Ok((display(scen_path), instance_from_scenario(&map, &entries)?));
    }
    let seed = args.seed.unwrap_or(0);
    let k = args.agents.unwrap_or(1);
    let (label, shape) = if let Some(dims) = &args.grid {
        let (w, h) = dims
            .split_once('x')
            .and_then(|(w, h)| Some((w.parse().ok()?, h.parse().ok()?)))
            .ok_or_else(|| MapfError::Usage(format!("--grid expects WxH, got `{dims}`")))?;
        let shape = GraphShape::Grid {
            width: w,
            height: h,
            obstacle_density: args.density.unwrap_or(0.0),
        };
        (format!("grid:{w}x{h}"), shape)
    } else if let Some(n) = args.random_graph {
        let shape = GraphShape::Random {
            vertices: n,
            edge_probability: args.density.unwrap_or(0.3),
        };
        (format!("random:{n}"), shape)
    } else if args.map.is_some() {
        return Err(MapfError::Usage("--map needs --scen".into()));
    } else {
        return Err(MapfError::Usage(
            "no instance: use --graph, --map with --scen, --grid or --random-graph".into(),
        ));
    };
    let inst = generate_instance(seed, shape, k)?;
    Ok((format!("{label}:k{k}:seed{seed}"), inst))
}

fn dimacs_mode(path: &Path) -> Result<i32> {
    let text = if path == Path::new("-") {
        let mut s = String::new();
        io::stdin().read_to_string(&mut s)?;
        s
    } else {
        read(path)?
    };
    let (formula, has_empty) = parse_dimacs(&text)?;
    let stdout = io::stdout();
    let mut out = stdout.lock();
    if has_empty {
        writeln!(out, "s UNSATISFIABLE")?;
        return Ok(20);
    }
    let mut session = SatSession::from_formula(&Backend::Embedded, &formula);
    match session.solve()? {
        SatResult::Sat(model) => {
            writeln!(out, "s SATISFIABLE")?;
            let mut line = String::from("v");
            for (i, &value) in model.values().iter().enumerate() {
                let lit = (i + 1) as i64;
                line.push_str(&format!(" {}", if value { lit } else { -lit }));
            }
            writeln!(out, "{line} 0")?;
            Ok(10)
        }
        SatResult::Unsat { .. } => {
            writeln!(out, "s UNSATISFIABLE")?;
            Ok(20)
        }
        SatResult::Unknown => {
            writeln!(out, "s UNKNOWN")?;
            Ok(0)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path)
        .map_err(|e| MapfError::Usage(format!("cannot read {}: {e}", path.display())))
}

fn write_target(path: &Path, text: &str) -> Result<()> {
    if path == Path::new("-") {
        io::stdout().lock().write_all(text.as_bytes())?;
    } else {
        fs::write(path, text)?;
    }
    Ok(())
}

fn display(path: &Path) -> String {
    path.display().to_string()
}
