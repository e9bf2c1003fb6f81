// Seeded instance generation and the native text format.

use std::error::Error;

use mapf_smt::cli::{generate_instance, parse_graph, write_graph, GraphShape};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let shape = GraphShape::Grid {
        width: 4,
        height: 3,
        obstacle_density: 0.25,
    };
    let inst = generate_instance(42, shape, 3)?;
    assert_eq!(inst, generate_instance(42, shape, 3)?);

    let text = write_graph(&inst);
    print!("{text}");
    assert_eq!(parse_graph(&text)?, inst);

    let random = GraphShape::Random {
        vertices: 8,
        edge_probability: 0.35,
    };
    let other = generate_instance(7, random, 4)?;
    for agent in other.agents() {
        println!(
            "{agent}: {} -> {} at distance {}",
            other.start().get(agent),
            other.goal().get(agent),
            other.distance(agent).unwrap()
        );
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
