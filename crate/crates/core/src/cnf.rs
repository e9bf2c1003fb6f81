//! Propositional variables, literals and clause sets in DIMACS numbering.

use std::collections::HashSet;
use std::fmt;
use std::io::{self, Write};
use std::ops::Not;

use crate::error::{MapfError, Result};

/// Propositional variable, numbered from 1 as in DIMACS.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Var(pub u32);

impl Var {
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn positive(self) -> Lit {
        Lit(self.0 as i32)
    }

    pub fn negative(self) -> Lit {
        Lit(-(self.0 as i32))
    }
}

/// Signed DIMACS literal; never zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Lit(i32);

impl Lit {
    pub fn from_dimacs(value: i32) -> Option<Lit> {
        (value != 0).then_some(Lit(value))
    }

    pub fn to_dimacs(self) -> i32 {
        self.0
    }

    pub fn var(self) -> Var {
        Var(self.0.unsigned_abs())
    }

    pub fn is_positive(self) -> bool {
        self.0 > 0
    }
}

impl Not for Lit {
    type Output = Lit;

    fn not(self) -> Lit {
        Lit(-self.0)
    }
}

impl fmt::Display for Lit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Total truth assignment over variables `1..=num_vars`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Model {
    values: Vec<bool>,
}

impl Model {
    pub fn new(values: Vec<bool>) -> Self {
        Model { values }
    }

    pub fn num_vars(&self) -> usize {
        self.values.len()
    }

    pub fn value(&self, var: Var) -> bool {
        self.values.get(var.index()).copied().unwrap_or(false)
    }

    pub fn lit_true(&self, lit: Lit) -> bool {
        self.value(lit.var()) == lit.is_positive()
    }

    pub fn satisfies(&self, clause: &[Lit]) -> bool {
        clause.iter().any(|&l| self.lit_true(l))
    }

    pub fn values(&self) -> &[bool] {
        &self.values
    }
}

/// Why a clause is in a MAPF formula.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Provenance {
    /// Start/goal, one-vertex-per-step and move/wait transition clauses.
    PathValidity,
    /// Sum-of-costs bound.
    Cost,
    /// Added after a collision was found in a candidate solution.
    ConflictRefinement,
    /// Eager collision-freeness clauses of the complete model.
    CollisionComplete,
    /// Clauses read from a DIMACS file.
    External,
}

impl Provenance {
    pub const ALL: [Provenance; 5] = [
        Provenance::PathValidity,
        Provenance::Cost,
        Provenance::ConflictRefinement,
        Provenance::CollisionComplete,
        Provenance::External,
    ];

    fn slot(self) -> usize {
        self as usize
    }
}

/// Clause list with per-clause provenance. Clauses are deduplicated by
/// (provenance, sorted literals); rejected duplicates are counted.
#[derive(Debug, Clone, Default)]
pub struct CnfFormula {
    num_vars: u32,
    clauses: Vec<Vec<Lit>>,
    provenance: Vec<Provenance>,
    seen: HashSet<(Provenance, Vec<Lit>)>,
    duplicates: [usize; 5],
}

impl CnfFormula {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn num_vars(&self) -> u32 {
        self.num_vars
    }

    pub fn ensure_vars(&mut self, n: u32) {
        self.num_vars = self.num_vars.max(n);
    }

    pub fn new_var(&mut self) -> Var {
        self.num_vars += 1;
        Var(self.num_vars)
    }

    /// Adds a clause unless an identical one with the same provenance exists.
    /// Returns whether the clause was new. Empty clauses are rejected.
    pub fn add_clause(&mut self, lits: &[Lit], provenance: Provenance) -> Result<bool> {
        if lits.is_empty() {
            return Err(MapfError::Internal("attempted to add an empty clause".into()));
        }
        let mut key = lits.to_vec();
        key.sort_unstable();
        key.dedup();
        if let Some(max) = key.iter().map(|l| l.var().0).max() {
            self.ensure_vars(max);
        }
        if !self.seen.insert((provenance, key)) {
            self.duplicates[provenance.slot()] += 1;
            return Ok(false);
        }
        self.clauses.push(lits.to_vec());
        self.provenance.push(provenance);
        Ok(true)
    }

    pub fn len(&self) -> usize {
        self.clauses.len()
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn clauses(&self) -> &[Vec<Lit>] {
        &self.clauses
    }

    pub fn iter(&self) -> impl Iterator<Item = (&[Lit], Provenance)> {
        self.clauses
            .iter()
            .map(Vec::as_slice)
            .zip(self.provenance.iter().copied())
    }

    pub fn count(&self, provenance: Provenance) -> usize {
        self.provenance.iter().filter(|&&p| p == provenance).count()
    }

    /// Number of rejected duplicate additions with the given provenance.
    pub fn duplicates(&self, provenance: Provenance) -> usize {
        self.duplicates[provenance.slot()]
    }

    /// Index of the first clause the model falsifies.
    pub fn first_violated(&self, model: &Model) -> Option<usize> {
        self.clauses.iter().position(|c| !model.satisfies(c))
    }

    pub fn write_dimacs<W: Write>(&self, mut out: W) -> io::Result<()> {
        writeln!(out, "p cnf {} {}", self.num_vars, self.clauses.len())?;
        for clause in &self.clauses {
            for lit in clause {
                write!(out, "{lit} ")?;
            }
            writeln!(out, "0")?;
        }
        Ok(())
    }

    pub fn to_dimacs(&self) -> String {
        let mut buf = Vec::new();
        self.write_dimacs(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("DIMACS output is ASCII")
    }
}

/// Parses DIMACS CNF text. Clauses may span lines; `c` lines are comments.
/// An empty clause (a lone `0`) is kept out of the formula and reported via
/// the returned flag, since it makes the formula trivially unsatisfiable.
pub fn parse_dimacs(text: &str) -> Result<(CnfFormula, bool)> {
    let mut formula = CnfFormula::new();
    let mut declared: Option<(u32, usize)> = None;
    let mut current: Vec<Lit> = Vec::new();
    let mut has_empty = false;
    let mut parsed_clauses = 0usize;

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('c') || line.starts_with('%') {
            continue;
        }
        if line.starts_with('p') {
            let fields: Vec<&str> = line.split_whitespace().collect();
            if fields.len() != 4 || fields[1] != "cnf" {
                return Err(MapfError::parse(line_no, "expected `p cnf <vars> <clauses>`"));
            }
            let vars = fields[2]
                .parse()
                .map_err(|_| MapfError::parse(line_no, "bad variable count"))?;
            let clauses = fields[3]
                .parse()
                .map_err(|_| MapfError::parse(line_no, "bad clause count"))?;
            if declared.is_some() {
                return Err(MapfError::parse(line_no, "duplicate problem line"));
            }
            declared = Some((vars, clauses));
            formula.ensure_vars(vars);
            continue;
        }
        let Some((vars, _)) = declared else {
            return Err(MapfError::parse(line_no, "clause before problem line"));
        };
        for token in line.split_whitespace() {
            let value: i32 = token
                .parse()
                .map_err(|_| MapfError::parse(line_no, format!("bad literal `{token}`")))?;
            if value.unsigned_abs() > vars {
                return Err(MapfError::parse(
                    line_no,
                    format!("literal {value} exceeds declared {vars} variables"),
                ));
            }
            match Lit::from_dimacs(value) {
                Some(lit) => current.push(lit),
                None => {
                    parsed_clauses += 1;
                    if current.is_empty() {
                        has_empty = true;
                    } else {
                        formula.add_clause(&current, Provenance::External)?;
                        current.clear();
                    }
                }
            }
        }
    }
    if !current.is_empty() {
        parsed_clauses += 1;
        formula.add_clause(&current, Provenance::External)?;
    }
    match declared {
        None => Err(MapfError::parse(0, "missing problem line")),
        Some((_, clauses)) if clauses != parsed_clauses => Err(MapfError::parse(
            0,
            format!("header declares {clauses} clauses, found {parsed_clauses}"),
        )),
        Some(_) => Ok((formula, has_empty)),
    }
}
