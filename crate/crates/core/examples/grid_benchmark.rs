// Load a grid map and scenario in the usual benchmark formats and run every
// engine for growing agent counts.

use std::error::Error;

use mapf_smt::cli::{instance_from_scenario, parse_map, parse_scen, run_batch, RunConfig};
use mapf_smt::report::EngineKind;

const MAP: &str = "type octile
height 5
width 6
map
......
.@@.@.
......
.@..@.
......
";

const SCEN: &str = "version 1
0\tdemo.map\t6\t5\t0\t0\t5\t4\t9
0\tdemo.map\t6\t5\t5\t0\t0\t4\t9
0\tdemo.map\t6\t5\t0\t4\t5\t0\t9
0\tdemo.map\t6\t5\t5\t4\t0\t0\t9
0\tdemo.map\t6\t5\t3\t2\t2\t2\t1
";

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let map = parse_map(MAP)?;
    let entries = parse_scen(SCEN, 5)?;
    let inst = instance_from_scenario(&map, &entries)?;
    println!(
        "{} open cells, {} edges, {} agents",
        map.graph().num_vertices(),
        map.graph().num_edges(),
        inst.num_agents()
    );

    let config = RunConfig {
        engines: EngineKind::SOLVERS.to_vec(),
        timing: false,
        ..RunConfig::default()
    };
    for out in run_batch("demo", &inst, &config)? {
        println!("{}", out.record.to_json());
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
