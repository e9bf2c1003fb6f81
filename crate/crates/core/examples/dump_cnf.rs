// Write the propositional model of an instance as DIMACS together with the
// sidecar file naming each position and move variable.

use std::error::Error;
use std::fs;

use mapf_smt::cnf::Provenance;
use mapf_smt::encoder::{dump, encode_basic, encode_complete};
use mapf_smt::{cost_lower_bound, Graph, MapfInstance};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let graph = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)])?;
    let inst = MapfInstance::new(graph, vec![0, 2].into(), vec![2, 0].into())?;
    let xi = cost_lower_bound(&inst)?;

    let (basic, _) = encode_basic([], xi, &inst)?;
    let (complete, map) = encode_complete(xi, &inst)?;
    for prov in Provenance::ALL {
        println!("{prov:?}: basic {} / complete {}", basic.count(prov), complete.count(prov));
    }

    let dir = std::env::temp_dir().join(format!("mapf-dump-{}", std::process::id()));
    fs::create_dir_all(&dir)?;
    let path = dir.join("c4.cnf");
    dump(&complete, &map, &path)?;
    let cnf = fs::read_to_string(&path)?;
    let sidecar = fs::read_to_string(dir.join("c4.cnf.map"))?;
    println!("{}", cnf.lines().next().unwrap_or_default());
    for line in sidecar.lines().take(6) {
        println!("  {line}");
    }
    fs::remove_dir_all(&dir)?;
    Ok(())
}

fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
