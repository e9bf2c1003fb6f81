use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{MapfError, Result};
use crate::instance::{Configuration, Graph, MapfInstance, VertexId};

use super::map::GridMap;

/// Attempts at drawing start/goal sets before giving up.
const PLACEMENT_RETRIES: usize = 100;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GraphShape {
    /// 4-connected grid; every cell is blocked with probability `obstacle_density`.
    Grid {
        width: usize,
        height: usize,
        obstacle_density: f64,
    },
    /// Erdős–Rényi graph: every vertex pair is an edge with probability `edge_probability`.
    Random {
        vertices: usize,
        edge_probability: f64,
    },
}

/// Random instance, deterministic in `seed`. Every agent's goal is reachable
/// from its start.
pub fn generate_instance(seed: u64, shape: GraphShape, agents: usize) -> Result<MapfInstance> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let graph = match shape {
        GraphShape::Grid {
            width,
            height,
            obstacle_density,
        } => {
            if width == 0 || height == 0 {
                return Err(MapfError::Usage("grid dimensions must be positive".into()));
            }
            check_probability(obstacle_density, "obstacle density")?;
            let open: Vec<bool> = (0..width * height)
                .map(|_| !rng.gen_bool(obstacle_density))
                .collect();
            GridMap::from_mask(width, height, &open)?.into_graph()
        }
        GraphShape::Random {
            vertices,
            edge_probability,
        } => {
            if vertices == 0 {
                return Err(MapfError::Usage("vertex count must be positive".into()));
            }
            check_probability(edge_probability, "edge probability")?;
            let mut g = Graph::new(vertices);
            for u in 0..vertices {
                for v in u + 1..vertices {
                    if rng.gen_bool(edge_probability) {
                        g.add_edge(u, v)?;
                    }
                }
            }
            g
        }
    };
    let n = graph.num_vertices();
    if n == 0 {
        return Err(MapfError::Usage("the generated graph has no open cells".into()));
    }
    if agents > n {
        return Err(MapfError::Usage(format!("cannot place {agents} agents on {n} vertices")));
    }
    let component = components(&graph);
    let vertices: Vec<VertexId> = (0..n).collect();

    for _ in 0..PLACEMENT_RETRIES {
        let starts: Vec<VertexId> = vertices.choose_multiple(&mut rng, agents).copied().collect();
        let mut taken = vec![false; n];
        let mut goals = Vec::with_capacity(agents);
        for &s in &starts {
            let candidates: Vec<VertexId> = vertices
                .iter()
                .copied()
                .filter(|&v| !taken[v] && component[v] == component[s])
                .collect();
            match candidates.choose(&mut rng) {
                Some(&g) => {
                    taken[g] = true;
                    goals.push(g);
                }
                None => break,
            }
        }
        if goals.len() == agents {
            return MapfInstance::new(graph, Configuration::new(starts), Configuration::new(goals));
        }
    }
    Err(MapfError::Usage(format!(
        "could not place {agents} agents with reachable goals after {PLACEMENT_RETRIES} attempts"
    )))
}

fn check_probability(p: f64, what: &str) -> Result<()> {
    if (0.0..=1.0).contains(&p) {
        Ok(())
    } else {
        Err(MapfError::Usage(format!("{what} must be in [0, 1], got {p}")))
    }
}

fn components(graph: &Graph) -> Vec<usize> {
    let n = graph.num_vertices();
    let mut label = vec![usize::MAX; n];
    for root in 0..n {
        if label[root] != usize::MAX {
            continue;
        }
        for (v, d) in graph.bfs_distances(root).into_iter().enumerate() {
            if d.is_some() {
                label[v] = root;
            }
        }
    }
    label
}
