//! Native text format for instances on arbitrary graphs:
//!
//! ```text
//! vertices 4
//! edge 0 1
//! edge 1 2
//! agent 1 0 2
//! ```
//!
//! Vertices are 0-based, agents 1-based and must be numbered `1..=k`.
//! Blank lines and lines starting with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use crate::error::{MapfError, Result};
use crate::instance::{Configuration, Graph, MapfInstance, VertexId};

pub fn parse_graph(text: &str) -> Result<MapfInstance> {
    let mut graph: Option<Graph> = None;
    let mut agents: BTreeMap<usize, (usize, VertexId, VertexId)> = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let n = i + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let words: Vec<&str> = line.split_whitespace().collect();
        let num = |w: &str| -> Result<usize> {
            w.parse()
                .map_err(|_| MapfError::parse(n, format!("expected a number, found `{w}`")))
        };
        match words.as_slice() {
            ["vertices", count] => {
                if graph.is_some() {
                    return Err(MapfError::parse(n, "repeated `vertices` line"));
                }
                graph = Some(Graph::new(num(count)?));
            }
            ["edge", u, v] => {
                let g = graph
                    .as_mut()
                    .ok_or_else(|| MapfError::parse(n, "`edge` before `vertices`"))?;
                g.add_edge(num(u)?, num(v)?).map_err(|e| at_line(n, e))?;
            }
            ["agent", id, s, g] => {
                let id = num(id)?;
                if id == 0 {
                    return Err(MapfError::parse(n, "agent ids start at 1"));
                }
                if let Some((first, ..)) = agents.insert(id, (n, num(s)?, num(g)?)) {
                    return Err(MapfError::parse(
                        n,
                        format!("duplicate agent id {id} (first defined on line {first})"),
                    ));
                }
            }
            _ => return Err(MapfError::parse(n, format!("unrecognized line `{line}`"))),
        }
    }
    let graph = graph.ok_or_else(|| MapfError::parse(1, "missing `vertices` line"))?;
    for (expected, (&id, &(n, ..))) in (1..).zip(agents.iter()) {
        if id != expected {
            return Err(MapfError::parse(n, format!("agent ids must be 1..=k, missing {expected}")));
        }
    }
    let start = agents.values().map(|&(_, s, _)| s).collect();
    let goal = agents.values().map(|&(_, _, g)| g).collect();
    MapfInstance::new(graph, Configuration::new(start), Configuration::new(goal))
}

fn at_line(line: usize, err: MapfError) -> MapfError {
    match err {
        MapfError::InvalidInstance(message) => MapfError::Parse { line, message },
        other => other,
    }
}

pub fn write_graph(inst: &MapfInstance) -> String {
    let mut out = String::new();
    let g = inst.graph();
    writeln!(out, "vertices {}", g.num_vertices()).unwrap();
    for (u, v) in g.edges() {
        writeln!(out, "edge {u} {v}").unwrap();
    }
    for agent in inst.agents() {
        writeln!(
            out,
            "agent {} {} {}",
            agent.number(),
            inst.start().get(agent),
            inst.goal().get(agent)
        )
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const C4: &str = "vertices 4\nedge 0 1\nedge 0 3\nedge 1 2\nedge 2 3\nagent 1 0 2\nagent 2 2 0\n";

    #[test]
    fn c4_file() {
        let inst = parse_graph(C4).unwrap();
        let g = Graph::from_edges(4, [(0, 1), (1, 2), (2, 3), (3, 0)]).unwrap();
        let expected = MapfInstance::new(g, vec![0, 2].into(), vec![2, 0].into()).unwrap();
        assert_eq!(inst, expected);
        assert_eq!(write_graph(&inst), C4);
    }

    #[test]
    fn self_loop() {
        let err = parse_graph("vertices 2\nedge 1 1\n").unwrap_err();
        assert!(matches!(err, MapfError::Parse { line: 2, ref message } if message.contains("self-loop")));
    }

    #[test]
    fn duplicate_edge() {
        let err = parse_graph("vertices 2\nedge 0 1\nedge 1 0\n").unwrap_err();
        assert!(matches!(err, MapfError::Parse { line: 3, .. }));
    }

    #[test]
    fn shared_goal() {
        let err = parse_graph("vertices 3\nedge 0 1\nedge 1 2\nagent 1 0 2\nagent 2 1 2\n").unwrap_err();
        assert!(matches!(err, MapfError::InvalidInstance(_)));
    }

    #[test]
    fn duplicate_and_missing_agent_ids() {
        let dup = parse_graph("vertices 3\nagent 1 0 1\nagent 1 2 0\n").unwrap_err();
        assert!(matches!(dup, MapfError::Parse { line: 3, .. }));
        let gap = parse_graph("vertices 3\nagent 1 0 1\nagent 3 2 0\n").unwrap_err();
        assert!(matches!(gap, MapfError::Parse { line: 3, .. }));
    }

    #[test]
    fn agents_in_any_order_and_comments() {
        let inst = parse_graph("# tiny\nvertices 2\n\nedge 0 1\nagent 2 1 0\nagent 1 0 1\n").unwrap();
        assert_eq!(inst.start().positions(), &[0, 1]);
    }
}
