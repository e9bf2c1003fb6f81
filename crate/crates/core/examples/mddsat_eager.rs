// The eager SAT engine: one complete formula per sum-of-costs bound.

use std::error::Error;

use mapf_smt::cli::GridMap;
use mapf_smt::{mddsat_solve, Limits, MapfInstance, SatOptions};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let grid = GridMap::open(3, 3);
    let v = |x, y| grid.vertex_at(x, y).unwrap();
    // Three agents rotating around the centre column.
    let start = vec![v(0, 0), v(2, 0), v(1, 2)];
    let goal = vec![v(2, 0), v(0, 0), v(1, 0)];
    let inst = MapfInstance::new(grid.graph().clone(), start.into(), goal.into())?;

    let report = mddsat_solve(&inst, &Limits::default(), &SatOptions::default())?;
    for step in &report.per_xi {
        println!(
            "bound {}: {} clauses, {}",
            step.xi,
            step.clauses,
            match step.satisfiable {
                Some(true) => "satisfiable",
                Some(false) => "unsatisfiable",
                None => "undecided",
            }
        );
    }
    println!("{} with cost {:?}", report.outcome.label(), report.cost);
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
