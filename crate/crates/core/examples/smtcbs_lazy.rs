// The lazy engine: start without collision clauses and add them only for
// collisions the solver actually produces.

use std::collections::BTreeSet;
use std::error::Error;

use mapf_smt::encoder::encode_complete;
use mapf_smt::engines::{smtcbs_fixed, Budget, FixedOutcome};
use mapf_smt::{cost_lower_bound, smtcbs_solve, Graph, Limits, MapfInstance, SatOptions};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    // Two agents cross at the hub of a star; a third waits on a spoke.
    let star = Graph::from_edges(7, [(0, 1), (1, 2), (3, 1), (1, 4), (5, 1), (1, 6)])?;
    let inst = MapfInstance::new(star, vec![0, 3, 5].into(), vec![2, 4, 6].into())?;

    let report = smtcbs_solve(&inst, &Limits::default(), &SatOptions::default())?;
    println!(
        "{} cost {:?}: {} solver calls, {} refinements, {} bound increments",
        report.outcome.label(),
        report.cost,
        report.stats.sat_calls,
        report.stats.refinements,
        report.stats.xi_increments
    );

    // One bound at a time, keeping the recorded conflicts between bounds.
    let mut conflicts = BTreeSet::new();
    let mut xi = cost_lower_bound(&inst)?;
    loop {
        let run = smtcbs_fixed(&mut conflicts, xi, &inst, &SatOptions::default(), &Budget::default())?;
        let (eager, _) = encode_complete(xi, &inst)?;
        println!(
            "bound {xi}: lazy {} clauses vs eager {}, {} conflicts known",
            run.formula.len(),
            eager.len(),
            conflicts.len()
        );
        match run.outcome {
            FixedOutcome::Solved(plan) => {
                println!("solved: {:?}", plan.paths());
                break;
            }
            FixedOutcome::Unsat => xi += 1,
            FixedOutcome::BudgetExceeded => return Err("budget exhausted".into()),
        }
    }
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
