// Conflict-based search on a small grid with crossing agents.

use std::error::Error;

use mapf_smt::cbs::cbs_solve;
use mapf_smt::cli::GridMap;
use mapf_smt::{Limits, MapfInstance, Outcome};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let grid = GridMap::open(4, 4);
    let v = |x, y| grid.vertex_at(x, y).unwrap();
    // Four agents crossing the grid towards the opposite side.
    let start = vec![v(0, 1), v(3, 2), v(1, 0), v(2, 3)];
    let goal = vec![v(3, 1), v(0, 2), v(1, 3), v(2, 0)];
    let inst = MapfInstance::new(grid.graph().clone(), start.into(), goal.into())?;

    let report = cbs_solve(&inst, &Limits::default())?;
    let Outcome::Solved(plan) = &report.outcome else {
        return Err(format!("unexpected outcome {}", report.outcome.label()).into());
    };
    println!(
        "cost {} after expanding {} of {} generated nodes",
        report.cost.unwrap(),
        report.stats.ct_nodes,
        report.stats.ct_generated
    );
    for (i, path) in plan.paths().iter().enumerate() {
        let cells: Vec<_> = path.iter().map(|&u| grid.cell_of(u).unwrap()).collect();
        println!("a{}: {:?}", i + 1, cells);
    }

    let tight = Limits {
        node_budget: Some(1),
        ..Limits::default()
    };
    println!("with one node: {}", cbs_solve(&inst, &tight)?.outcome.label());
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
