use std::io::{Read, Write};
use std::process::{Command, Stdio};
use std::time::{Duration, Instant};

use crate::cnf::{Lit, Model};
use crate::error::{MapfError, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolverAnswer {
    Sat(Model),
    Unsat,
    Unknown,
}

/// Bridge to a solver process speaking DIMACS on stdin and
/// `s SATISFIABLE` / `v ...` lines on stdout.
#[derive(Debug)]
pub struct ExternalSolver {
    argv: Vec<String>,
    num_vars: usize,
    clauses: Vec<Vec<Lit>>,
    deadline: Option<Instant>,
}

impl ExternalSolver {
    pub fn new(argv: Vec<String>) -> Self {
        ExternalSolver {
            argv,
            num_vars: 0,
            clauses: Vec::new(),
            deadline: None,
        }
    }

    pub fn reserve_vars(&mut self, n: usize) {
        self.num_vars = self.num_vars.max(n);
    }

    pub fn add_clause(&mut self, lits: &[Lit]) {
        self.clauses.push(lits.to_vec());
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    fn dimacs(&self, assumptions: &[Lit]) -> String {
        let mut out = format!(
            "p cnf {} {}\n",
            self.num_vars,
            self.clauses.len() + assumptions.len()
        );
        for clause in self.clauses.iter().map(Vec::as_slice).chain(assumptions.chunks(1)) {
            for lit in clause {
                out.push_str(&lit.to_string());
                out.push(' ');
            }
            out.push_str("0\n");
        }
        out
    }

    /// Runs the solver once on the stored clauses plus `assumptions` as units.
    pub fn solve(&mut self, assumptions: &[Lit]) -> Result<SolverAnswer> {
        let (program, args) = self
            .argv
            .split_first()
            .ok_or_else(|| MapfError::Usage("empty external solver command".into()))?;
        let mut child = Command::new(program)
            .args(args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| MapfError::Backend(format!("cannot start `{program}`: {e}")))?;

        let input = self.dimacs(assumptions);
        let mut stdin = child.stdin.take().expect("stdin is piped");
        let writer = std::thread::spawn(move || stdin.write_all(input.as_bytes()));
        let mut stdout = child.stdout.take().expect("stdout is piped");
        let reader = std::thread::spawn(move || {
            let mut text = String::new();
            stdout.read_to_string(&mut text).map(|_| text)
        });

        loop {
            if child.try_wait()?.is_some() {
                break;
            }
            if self.deadline.is_some_and(|d| Instant::now() >= d) {
                let _ = child.kill();
                let _ = child.wait();
                return Ok(SolverAnswer::Unknown);
            }
            std::thread::sleep(Duration::from_millis(2));
        }
        // The solver may exit without draining its input; a broken pipe is fine then.
        let _ = writer.join();
        let text = reader
            .join()
            .map_err(|_| MapfError::Backend("reader thread panicked".into()))??;
        parse_solver_output(&text, self.num_vars)
    }
}

/// Parses SAT-competition output: one `s` verdict line and `v` value lines.
pub fn parse_solver_output(text: &str, num_vars: usize) -> Result<SolverAnswer> {
    let mut verdict = None;
    let mut values = vec![false; num_vars];
    for line in text.lines() {
        let line = line.trim();
        if let Some(rest) = line.strip_prefix("s ") {
            verdict = Some(match rest.trim() {
                "SATISFIABLE" => true,
                "UNSATISFIABLE" => false,
                "UNKNOWN" => return Ok(SolverAnswer::Unknown),
                other => {
                    return Err(MapfError::Backend(format!("unrecognized verdict `{other}`")))
                }
            });
        } else if let Some(rest) = line.strip_prefix("v ").or_else(|| (line == "v").then_some("")) {
            for token in rest.split_whitespace() {
                let value: i32 = token
                    .parse()
                    .map_err(|_| MapfError::Backend(format!("bad value token `{token}`")))?;
                if value == 0 {
                    continue;
                }
                let var = value.unsigned_abs() as usize;
                if var > values.len() {
                    values.resize(var, false);
                }
                values[var - 1] = value > 0;
            }
        }
    }
    match verdict {
        Some(true) => Ok(SolverAnswer::Sat(Model::new(values))),
        Some(false) => Ok(SolverAnswer::Unsat),
        None => Err(MapfError::Backend("solver printed no `s` line".into())),
    }
}
