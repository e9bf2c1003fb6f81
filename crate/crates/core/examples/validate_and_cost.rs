// Build an instance by hand, check plans against the movement rules and
// compute their sum-of-costs and makespan.

use std::error::Error;

use mapf_smt::{makespan, sum_of_costs, validate_plan, Graph, MapfInstance, Plan};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // A 4-cycle with two agents trading opposite corners.
    let graph = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])?;
    let inst = MapfInstance::new(graph, vec![0, 2].into(), vec![2, 0].into())?;

    let clockwise = Plan::new(vec![vec![0, 1, 2], vec![2, 3, 0]])?;
    let collisions = validate_plan(&clockwise, &inst)?;
    assert!(collisions.is_empty());
    println!(
        "rotation: valid, sum-of-costs {}, makespan {}",
        sum_of_costs(&clockwise),
        makespan(&clockwise)
    );

    let head_on = Plan::new(vec![vec![0, 1, 2], vec![2, 1, 0]])?;
    let collisions = validate_plan(&head_on, &inst)?;
    assert_eq!(collisions.len(), 1);
    println!("head-on: {}", collisions[0]);

    // Waiting on the goal is free, leaving it again is not.
    let detour = Plan::new(vec![vec![0, 1, 2, 2, 2], vec![2, 3, 3, 3, 0]])?;
    println!(
        "detour: {} collisions, sum-of-costs {}",
        validate_plan(&detour, &inst)?.len(),
        sum_of_costs(&detour)
    );
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
