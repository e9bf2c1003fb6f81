// Check all engines against exhaustive search on random small instances.

use std::error::Error;

use mapf_smt::cli::{generate_instance, GraphShape};
use mapf_smt::oracle::oracle_solve;
use mapf_smt::report::EngineKind;
use mapf_smt::{solve, Limits, SatOptions};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut checked = 0;
    for seed in 0..12 {
        let shape = if seed % 2 == 0 {
            GraphShape::Grid {
                width: 3,
                height: 3,
                obstacle_density: 0.1,
            }
        } else {
            GraphShape::Random {
                vertices: 7,
                edge_probability: 0.4,
            }
        };
        let inst = generate_instance(seed, shape, 3)?;
        let truth = oracle_solve(&inst, None)?.cost();
        let limits = Limits {
            ceiling: truth.or(Some(30)),
            ..Limits::default()
        };
        for engine in EngineKind::SOLVERS {
            let report = solve(engine, &inst, &limits, &SatOptions::default())?;
            if report.cost != truth {
                return Err(format!("seed {seed}: {engine} found {:?}, optimum {truth:?}", report.cost).into());
            }
        }
        checked += 1;
        println!("seed {seed:2}: optimum {truth:?}, all engines agree");
    }
    println!("{checked} instances checked");
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
