use crate::error::{MapfError, Result};
use crate::instance::{Configuration, MapfInstance};

use super::map::GridMap;

/// One row of a scenario file.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioEntry {
    /// 1-based line number in the scenario file.
    pub line: usize,
    pub bucket: u32,
    pub map: String,
    pub start: (usize, usize),
    pub goal: (usize, usize),
    /// Optimal single-agent distance as recorded in the file; informational.
    pub distance_hint: f64,
}

/// Parses a `version 1` scenario and returns its first `agents` rows.
pub fn parse_scen(text: &str, agents: usize) -> Result<Vec<ScenarioEntry>> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim_end_matches('\r')))
        .filter(|(_, l)| !l.trim().is_empty());
    match lines.next() {
        Some((_, header)) if header.split_whitespace().eq(["version", "1"]) => {}
        Some((_, header)) if header.split_whitespace().eq(["version", "1.0"]) => {}
        Some((n, header)) => {
            return Err(MapfError::parse(n, format!("expected `version 1`, found `{header}`")))
        }
        None => return Err(MapfError::parse(1, "empty scenario")),
    }

    let mut entries = Vec::with_capacity(agents);
    for (n, line) in lines.take(agents) {
        let mut fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 9 {
            fields = line.split_whitespace().collect();
        }
        if fields.len() != 9 {
            return Err(MapfError::parse(
                n,
                format!("scenario row has {} fields, expected 9", fields.len()),
            ));
        }
        let num = |i: usize, what: &str| -> Result<usize> {
            fields[i]
                .trim()
                .parse()
                .map_err(|_| MapfError::parse(n, format!("bad {what} `{}`", fields[i])))
        };
        entries.push(ScenarioEntry {
            line: n,
            bucket: num(0, "bucket")? as u32,
            map: fields[1].trim().to_string(),
            start: (num(4, "start x")?, num(5, "start y")?),
            goal: (num(6, "goal x")?, num(7, "goal y")?),
            distance_hint: fields[8]
                .trim()
                .parse()
                .map_err(|_| MapfError::parse(n, format!("bad distance `{}`", fields[8])))?,
        });
    }
    if entries.len() < agents {
        return Err(MapfError::Usage(format!(
            "requested {agents} agents but the scenario has {} rows",
            entries.len()
        )));
    }
    Ok(entries)
}

/// Instance on `map` with one agent per entry.
pub fn instance_from_scenario(map: &GridMap, entries: &[ScenarioEntry]) -> Result<MapfInstance> {
    let locate = |entry: &ScenarioEntry, (x, y): (usize, usize), what: &str| {
        if !map.is_in_bounds(x, y) {
            return Err(MapfError::parse(
                entry.line,
                format!("{what} cell ({x}, {y}) is outside the {}x{} map", map.width(), map.height()),
            ));
        }
        map.vertex_at(x, y)
            .ok_or_else(|| MapfError::parse(entry.line, format!("{what} cell ({x}, {y}) is blocked")))
    };
    let mut start = Vec::with_capacity(entries.len());
    let mut goal = Vec::with_capacity(entries.len());
    for entry in entries {
        start.push(locate(entry, entry.start, "start")?);
        goal.push(locate(entry, entry.goal, "goal")?);
    }
    MapfInstance::new(
        map.graph().clone(),
        Configuration::new(start),
        Configuration::new(goal),
    )
}
