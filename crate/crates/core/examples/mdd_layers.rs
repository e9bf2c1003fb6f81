// Multi-value decision diagrams: which vertices an agent can occupy at each
// time step while still reaching its goal within a cost bound.

use std::error::Error;

use mapf_smt::cli::GridMap;
use mapf_smt::lowlevel::{build_mdd, constrained_shortest_path};
use mapf_smt::{AgentId, Constraint, MapfInstance};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let grid = GridMap::open(3, 3);
    let inst = MapfInstance::new(grid.graph().clone(), vec![0].into(), vec![8].into())?;
    let agent = AgentId(0);

    for slack in 0..=1 {
        let bound = inst.distance(agent).unwrap() + slack;
        let mdd = build_mdd(&inst, agent, bound)?;
        println!("bound {bound}: {} nodes", mdd.size());
        for (t, level) in mdd.levels().iter().enumerate() {
            println!("  t={t}: {level:?}");
        }
    }

    // The low-level search respects vertex constraints by waiting or detouring.
    let blocked = [Constraint::Vertex {
        agent,
        vertex: 4,
        time: 2,
    }];
    let path = constrained_shortest_path(&inst, agent, &blocked).unwrap();
    println!("avoiding the centre at t=2: {path:?}");
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
