// The SAT session interface on its own: incremental clauses, assumptions and
// unsatisfiable cores.

use std::error::Error;

use mapf_smt::cnf::Lit;
use mapf_smt::sat::{SatResult, SatSession};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let x = |i: i32| Lit::from_dimacs(i).expect("non-zero literal");
    let mut session = SatSession::embedded();
    // Exactly one of 1, 2, 3.
    session.add_clause(&[x(1), x(2), x(3)]);
    session.add_clause(&[x(-1), x(-2)]);
    session.add_clause(&[x(-1), x(-3)]);
    session.add_clause(&[x(-2), x(-3)]);

    if let SatResult::Sat(model) = session.solve()? {
        println!("model: {:?}", model.values());
    }
    match session.solve_under_assumptions(&[x(1), x(2)])? {
        SatResult::Unsat { core } => println!("assuming 1 and 2 fails, core {core:?}"),
        other => return Err(format!("expected a core, got {other:?}").into()),
    }

    // Clauses added later narrow the same session.
    session.add_clause(&[x(-3)]);
    session.add_clause(&[x(-2)]);
    if let SatResult::Sat(model) = session.solve()? {
        println!("after narrowing: {:?}", model.values());
    }
    session.add_clause(&[x(-1)]);
    println!("finally: {:?}", session.solve()?);
    println!("{:?}", session.stats());
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
