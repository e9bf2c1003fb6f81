//! Embedded CDCL solver: two watched literals, first-UIP learning with local
//! minimization, VSIDS with phase saving, Luby restarts and assumptions.
//!
//! Branching is fully deterministic: ties in activity go to the lower
//! variable index and the initial phase is negative. Learned clauses are
//! never deleted.

use std::time::Instant;

use crate::cnf::{Lit, Var};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct ILit(u32);

impl ILit {
    fn new(var: usize, negative: bool) -> Self {
        ILit(((var as u32) << 1) | u32::from(negative))
    }

    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    fn is_negative(self) -> bool {
        self.0 & 1 == 1
    }

    fn idx(self) -> usize {
        self.0 as usize
    }

    fn negate(self) -> Self {
        ILit(self.0 ^ 1)
    }

    fn from_lit(lit: Lit) -> Self {
        ILit::new(lit.var().index(), !lit.is_positive())
    }

    fn to_lit(self) -> Lit {
        let var = Var(self.var() as u32 + 1);
        if self.is_negative() {
            var.negative()
        } else {
            var.positive()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LBool {
    True,
    False,
    Undef,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: ILit,
}

#[derive(Debug)]
struct Clause {
    lits: Vec<ILit>,
    learnt: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CdclStats {
    pub decisions: u64,
    pub propagations: u64,
    pub conflicts: u64,
    pub learned: u64,
    pub restarts: u64,
    pub solve_calls: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CdclOutcome {
    Sat(Vec<bool>),
    /// Unsatisfiable; carries the failed subset of the assumptions.
    Unsat(Vec<Lit>),
    /// Conflict budget or deadline reached.
    Unknown,
}

/// Max-heap of variables keyed by activity, ties broken by lower index.
#[derive(Debug, Default)]
struct VarOrder {
    heap: Vec<usize>,
    position: Vec<Option<usize>>,
}

impl VarOrder {
    fn before(activity: &[f64], a: usize, b: usize) -> bool {
        activity[a] > activity[b] || (activity[a] == activity[b] && a < b)
    }

    fn grow(&mut self, n: usize, activity: &[f64]) {
        while self.position.len() < n {
            let v = self.position.len();
            self.position.push(None);
            self.insert(v, activity);
        }
    }

    fn contains(&self, v: usize) -> bool {
        self.position[v].is_some()
    }

    fn insert(&mut self, v: usize, activity: &[f64]) {
        if self.contains(v) {
            return;
        }
        self.position[v] = Some(self.heap.len());
        self.heap.push(v);
        self.sift_up(self.heap.len() - 1, activity);
    }

    fn pop(&mut self, activity: &[f64]) -> Option<usize> {
        let top = *self.heap.first()?;
        let last = self.heap.pop().unwrap();
        self.position[top] = None;
        if !self.heap.is_empty() {
            self.heap[0] = last;
            self.position[last] = Some(0);
            self.sift_down(0, activity);
        }
        Some(top)
    }

    fn increased(&mut self, v: usize, activity: &[f64]) {
        if let Some(pos) = self.position[v] {
            self.sift_up(pos, activity);
        }
    }

    fn sift_up(&mut self, mut pos: usize, activity: &[f64]) {
        let v = self.heap[pos];
        while pos > 0 {
            let parent = (pos - 1) / 2;
            let p = self.heap[parent];
            if !Self::before(activity, v, p) {
                break;
            }
            self.heap[pos] = p;
            self.position[p] = Some(pos);
            pos = parent;
        }
        self.heap[pos] = v;
        self.position[v] = Some(pos);
    }

    fn sift_down(&mut self, mut pos: usize, activity: &[f64]) {
        let v = self.heap[pos];
        let len = self.heap.len();
        loop {
            let left = 2 * pos + 1;
            if left >= len {
                break;
            }
            let right = left + 1;
            let child = if right < len && Self::before(activity, self.heap[right], self.heap[left]) {
                right
            } else {
                left
            };
            let c = self.heap[child];
            if !Self::before(activity, c, v) {
                break;
            }
            self.heap[pos] = c;
            self.position[c] = Some(pos);
            pos = child;
        }
        self.heap[pos] = v;
        self.position[v] = Some(pos);
    }
}

/// Luby sequence value for restart `i` (0-based).
fn luby(mut i: u64) -> u64 {
    let mut size = 1u64;
    let mut seq = 0u32;
    while size < i + 1 {
        seq += 1;
        size = 2 * size + 1;
    }
    while size - 1 != i {
        size = (size - 1) >> 1;
        seq -= 1;
        i %= size;
    }
    1u64 << seq
}

const RESTART_UNIT: u64 = 100;
const VAR_DECAY: f64 = 0.95;

#[derive(Debug)]
pub struct Cdcl {
    clauses: Vec<Clause>,
    watches: Vec<Vec<Watcher>>,
    assigns: Vec<LBool>,
    level: Vec<u32>,
    reason: Vec<Option<u32>>,
    trail: Vec<ILit>,
    trail_lim: Vec<usize>,
    qhead: usize,
    activity: Vec<f64>,
    var_inc: f64,
    order: VarOrder,
    phase: Vec<bool>,
    seen: Vec<bool>,
    ok: bool,
    learnt_units: Vec<ILit>,
    stats: CdclStats,
    conflict_budget: Option<u64>,
    deadline: Option<Instant>,
}

impl Default for Cdcl {
    fn default() -> Self {
        Self::new()
    }
}

impl Cdcl {
    pub fn new() -> Self {
        Cdcl {
            clauses: Vec::new(),
            watches: Vec::new(),
            assigns: Vec::new(),
            level: Vec::new(),
            reason: Vec::new(),
            trail: Vec::new(),
            trail_lim: Vec::new(),
            qhead: 0,
            activity: Vec::new(),
            var_inc: 1.0,
            order: VarOrder::default(),
            phase: Vec::new(),
            seen: Vec::new(),
            ok: true,
            learnt_units: Vec::new(),
            stats: CdclStats::default(),
            conflict_budget: None,
            deadline: None,
        }
    }

    pub fn num_vars(&self) -> usize {
        self.assigns.len()
    }

    pub fn stats(&self) -> CdclStats {
        self.stats
    }

    /// Limits the number of conflicts of each subsequent `solve` call.
    pub fn set_conflict_budget(&mut self, budget: Option<u64>) {
        self.conflict_budget = budget;
    }

    pub fn set_deadline(&mut self, deadline: Option<Instant>) {
        self.deadline = deadline;
    }

    pub fn reserve_vars(&mut self, n: usize) {
        while self.assigns.len() < n {
            self.assigns.push(LBool::Undef);
            self.level.push(0);
            self.reason.push(None);
            self.activity.push(0.0);
            self.phase.push(false);
            self.seen.push(false);
            self.watches.push(Vec::new());
            self.watches.push(Vec::new());
        }
        self.order.grow(n, &self.activity);
    }

    /// Learned clauses so far, units included.
    pub fn learned_clauses(&self) -> Vec<Vec<Lit>> {
        self.learnt_units
            .iter()
            .map(|l| vec![l.to_lit()])
            .chain(
                self.clauses
                    .iter()
                    .filter(|c| c.learnt)
                    .map(|c| c.lits.iter().map(|l| l.to_lit()).collect()),
            )
            .collect()
    }

    fn value(&self, lit: ILit) -> LBool {
        lit_value(&self.assigns, lit)
    }

    fn decision_level(&self) -> usize {
        self.trail_lim.len()
    }

    pub fn add_clause(&mut self, lits: &[Lit]) {
        self.cancel_until(0);
        if !self.ok {
            return;
        }
        if let Some(max) = lits.iter().map(|l| l.var().0 as usize).max() {
            self.reserve_vars(max);
        }
        let mut clause: Vec<ILit> = lits.iter().map(|&l| ILit::from_lit(l)).collect();
        clause.sort_unstable_by_key(|l| l.0);
        clause.dedup();
        if clause.windows(2).any(|w| w[0].var() == w[1].var()) {
            return;
        }
        if clause.iter().any(|&l| self.value(l) == LBool::True) {
            return;
        }
        clause.retain(|&l| self.value(l) != LBool::False);
        match clause.len() {
            0 => self.ok = false,
            1 => {
                self.enqueue(clause[0], None);
                if self.propagate().is_some() {
                    self.ok = false;
                }
            }
            _ => {
                self.attach(clause, false);
            }
        }
    }

    fn attach(&mut self, lits: Vec<ILit>, learnt: bool) -> u32 {
        let cref = self.clauses.len() as u32;
        self.watches[lits[0].idx()].push(Watcher {
            cref,
            blocker: lits[1],
        });
        self.watches[lits[1].idx()].push(Watcher {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(Clause { lits, learnt });
        cref
    }

    fn enqueue(&mut self, lit: ILit, reason: Option<u32>) {
        let v = lit.var();
        debug_assert_eq!(self.assigns[v], LBool::Undef);
        self.assigns[v] = if lit.is_negative() {
            LBool::False
        } else {
            LBool::True
        };
        self.level[v] = self.decision_level() as u32;
        self.reason[v] = reason;
        self.trail.push(lit);
    }

    fn new_decision_level(&mut self) {
        self.trail_lim.push(self.trail.len());
    }

    fn cancel_until(&mut self, level: usize) {
        if self.decision_level() <= level {
            return;
        }
        let keep = self.trail_lim[level];
        for i in (keep..self.trail.len()).rev() {
            let v = self.trail[i].var();
            self.phase[v] = self.assigns[v] == LBool::True;
            self.assigns[v] = LBool::Undef;
            self.reason[v] = None;
            self.order.insert(v, &self.activity);
        }
        self.trail.truncate(keep);
        self.trail_lim.truncate(level);
        self.qhead = keep;
    }

    /// Unit propagation; returns the conflicting clause, if any.
    fn propagate(&mut self) -> Option<u32> {
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = p.negate();
            let mut ws = std::mem::take(&mut self.watches[false_lit.idx()]);
            let mut i = 0;
            let mut j = 0;
            let mut conflict = None;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if lit_value(&self.assigns, w.blocker) == LBool::True {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let lits = &mut self.clauses[w.cref as usize].lits;
                if lits[0] == false_lit {
                    lits.swap(0, 1);
                }
                let first = lits[0];
                if first != w.blocker && lit_value(&self.assigns, first) == LBool::True {
                    ws[j] = Watcher {
                        cref: w.cref,
                        blocker: first,
                    };
                    j += 1;
                    continue;
                }
                let replacement =
                    (2..lits.len()).find(|&k| lit_value(&self.assigns, lits[k]) != LBool::False);
                if let Some(k) = replacement {
                    lits.swap(1, k);
                    let watch = lits[1];
                    self.watches[watch.idx()].push(Watcher {
                        cref: w.cref,
                        blocker: first,
                    });
                    continue;
                }
                ws[j] = w;
                j += 1;
                if lit_value(&self.assigns, first) == LBool::False {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        i += 1;
                        j += 1;
                    }
                } else {
                    self.enqueue(first, Some(w.cref));
                }
            }
            ws.truncate(j);
            self.watches[false_lit.idx()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                return conflict;
            }
        }
        None
    }

    fn bump(&mut self, v: usize) {
        self.activity[v] += self.var_inc;
        if self.activity[v] > 1e100 {
            for a in &mut self.activity {
                *a *= 1e-100;
            }
            self.var_inc *= 1e-100;
        }
        self.order.increased(v, &self.activity);
    }

    /// First-UIP conflict analysis. Returns the learned clause (asserting
    /// literal first, highest remaining level second) and the backjump level.
    fn analyze(&mut self, mut confl: u32) -> (Vec<ILit>, usize) {
        let current = self.decision_level() as u32;
        let mut learnt = vec![ILit(0)];
        let mut path_count = 0;
        let mut p: Option<ILit> = None;
        let mut index = self.trail.len();

        loop {
            let skip = usize::from(p.is_some());
            let lits = self.clauses[confl as usize].lits.clone();
            for &q in &lits[skip..] {
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.bump(v);
                    self.seen[v] = true;
                    if self.level[v] >= current {
                        path_count += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var()] {
                    break;
                }
            }
            let lit = self.trail[index];
            self.seen[lit.var()] = false;
            path_count -= 1;
            p = Some(lit);
            if path_count == 0 {
                break;
            }
            confl = self.reason[lit.var()].expect("implied literal has a reason");
        }
        learnt[0] = p.unwrap().negate();

        // Drop literals implied by the rest of the clause through their reason.
        let original = learnt.clone();
        let mut kept = vec![learnt[0]];
        for &lit in &learnt[1..] {
            let redundant = match self.reason[lit.var()] {
                None => false,
                Some(r) => self.clauses[r as usize].lits[1..]
                    .iter()
                    .all(|q| self.seen[q.var()] || self.level[q.var()] == 0),
            };
            if !redundant {
                kept.push(lit);
            }
        }
        for lit in &original {
            self.seen[lit.var()] = false;
        }
        learnt = kept;

        let backjump = if learnt.len() == 1 {
            0
        } else {
            let (pos, _) = learnt
                .iter()
                .enumerate()
                .skip(1)
                .max_by_key(|(i, l)| (self.level[l.var()], std::cmp::Reverse(*i)))
                .unwrap();
            learnt.swap(1, pos);
            self.level[learnt[1].var()] as usize
        };
        (learnt, backjump)
    }

    /// Assumptions responsible for `failed` being false.
    fn analyze_final(&mut self, failed: ILit) -> Vec<Lit> {
        let mut core = vec![failed.to_lit()];
        if self.decision_level() == 0 {
            return core;
        }
        self.seen[failed.var()] = true;
        for i in (self.trail_lim[0]..self.trail.len()).rev() {
            let lit = self.trail[i];
            let v = lit.var();
            if !self.seen[v] {
                continue;
            }
            match self.reason[v] {
                None => core.push(lit.to_lit()),
                Some(r) => {
                    for q in &self.clauses[r as usize].lits[1..] {
                        if self.level[q.var()] > 0 {
                            self.seen[q.var()] = true;
                        }
                    }
                }
            }
            self.seen[v] = false;
        }
        self.seen[failed.var()] = false;
        core.sort_unstable();
        core.dedup();
        core
    }

    fn out_of_budget(&self, conflicts_at_start: u64) -> bool {
        if let Some(budget) = self.conflict_budget {
            if self.stats.conflicts - conflicts_at_start >= budget {
                return true;
            }
        }
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    pub fn solve(&mut self) -> CdclOutcome {
        self.solve_with(&[])
    }

    pub fn solve_with(&mut self, assumptions: &[Lit]) -> CdclOutcome {
        self.stats.solve_calls += 1;
        self.cancel_until(0);
        if !self.ok {
            return CdclOutcome::Unsat(Vec::new());
        }
        if let Some(max) = assumptions.iter().map(|l| l.var().0 as usize).max() {
            self.reserve_vars(max);
        }
        let assumptions: Vec<ILit> = assumptions.iter().map(|&l| ILit::from_lit(l)).collect();
        if self.propagate().is_some() {
            self.ok = false;
            return CdclOutcome::Unsat(Vec::new());
        }
        let conflicts_at_start = self.stats.conflicts;
        let mut restart = 0u64;
        loop {
            let limit = luby(restart) * RESTART_UNIT;
            match self.search(limit, &assumptions, conflicts_at_start) {
                Some(outcome) => {
                    self.cancel_until(0);
                    return outcome;
                }
                None => {
                    restart += 1;
                    self.stats.restarts += 1;
                    self.cancel_until(0);
                }
            }
        }
    }

    /// Runs until `max_conflicts` conflicts (returns `None` to restart) or a verdict.
    fn search(
        &mut self,
        max_conflicts: u64,
        assumptions: &[ILit],
        conflicts_at_start: u64,
    ) -> Option<CdclOutcome> {
        let mut conflicts = 0u64;
        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts += 1;
                if self.decision_level() == 0 {
                    self.ok = false;
                    return Some(CdclOutcome::Unsat(Vec::new()));
                }
                let (learnt, backjump) = self.analyze(confl);
                self.cancel_until(backjump);
                self.stats.learned += 1;
                if learnt.len() == 1 {
                    self.learnt_units.push(learnt[0]);
                    self.enqueue(learnt[0], None);
                } else {
                    let asserting = learnt[0];
                    let cref = self.attach(learnt, true);
                    self.enqueue(asserting, Some(cref));
                }
                self.var_inc /= VAR_DECAY;
                if self.out_of_budget(conflicts_at_start) {
                    return Some(CdclOutcome::Unknown);
                }
                continue;
            }

            if conflicts >= max_conflicts {
                return None;
            }

            let mut next = None;
            while self.decision_level() < assumptions.len() {
                let a = assumptions[self.decision_level()];
                match self.value(a) {
                    LBool::True => self.new_decision_level(),
                    LBool::False => {
                        let core = self.analyze_final(a);
                        return Some(CdclOutcome::Unsat(core));
                    }
                    LBool::Undef => {
                        next = Some(a);
                        break;
                    }
                }
            }
            let next = match next {
                Some(lit) => lit,
                None => {
                    let mut chosen = None;
                    while let Some(v) = self.order.pop(&self.activity) {
                        if self.assigns[v] == LBool::Undef {
                            chosen = Some(v);
                            break;
                        }
                    }
                    match chosen {
                        Some(v) => {
                            self.stats.decisions += 1;
                            ILit::new(v, !self.phase[v])
                        }
                        None => {
                            let model = self.assigns.iter().map(|&a| a == LBool::True).collect();
                            return Some(CdclOutcome::Sat(model));
                        }
                    }
                }
            };
            self.new_decision_level();
            self.enqueue(next, None);
        }
    }
}

fn lit_value(assigns: &[LBool], lit: ILit) -> LBool {
    match (assigns[lit.var()], lit.is_negative()) {
        (LBool::Undef, _) => LBool::Undef,
        (LBool::True, false) | (LBool::False, true) => LBool::True,
        _ => LBool::False,
    }
}
