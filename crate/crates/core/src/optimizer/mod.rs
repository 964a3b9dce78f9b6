//! Exact solvers for the small integer programs each BS solves per subframe.
//!
//! All four formulations (local schedule, macro final schedule, non-leaf
//! final schedule, slot-maximising second pass) share one constraint model,
//! [`ScheduleProblem`]. Entries are indexed `0..links.len()` for the links
//! and `links.len()` for the optional aggregate (parent) link.

mod oracle;
mod scale;
mod solve;

pub use oracle::{oracle_enumerate, ORACLE_LIMIT};
pub use scale::Scale;
pub use solve::{solve_max_scale, solve_max_slots};

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SolverError {
    #[error("no feasible slot assignment even at zero scale")]
    Infeasible,
    #[error("inconsistent input: scale {0} is not feasible for this problem")]
    InconsistentInput(String),
    #[error("search space of {0} vectors exceeds the oracle limit")]
    OracleOverflow(u128),
    #[error("malformed problem: {0}")]
    Malformed(String),
}

/// One schedulable link inside a [`ScheduleProblem`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct LinkEntry {
    /// Traffic demand in bits per subframe.
    pub demand: u64,
    /// Queued bits; `None` for local-schedule problems, which are driven by
    /// demand alone.
    pub queue: Option<u64>,
    pub alpha: u8,
    /// Largest allowed slot count.
    pub upper: u32,
}

impl LinkEntry {
    pub fn local(demand: u64, alpha: u8, upper: u32) -> Self {
        Self {
            demand,
            queue: None,
            alpha,
            upper,
        }
    }

    pub fn queued(demand: u64, queue: u64, alpha: u8, upper: u32) -> Self {
        Self {
            demand,
            queue: Some(queue),
            alpha,
            upper,
        }
    }

    /// Amount the scaling constraint applies to: the demand, or the queue
    /// backlog bounded by the demand.
    pub fn effective_demand(&self) -> u64 {
        match self.queue {
            Some(q) => q.min(self.demand),
            None => self.demand,
        }
    }

    /// Active links must receive at least one slot; inactive ones none.
    pub fn is_active(&self) -> bool {
        match self.queue {
            Some(q) => q > 0,
            None => self.demand > 0,
        }
    }
}

/// Slots already given to the scheduling BS's own parent link.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ParentReservation {
    pub alpha: u8,
    pub reserved: u32,
    /// Per entry of `links`: whether that link interferes with the parent link.
    pub interferes: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScheduleProblem {
    pub links: Vec<LinkEntry>,
    /// Parent link carrying the sum of all demands (local schedule only).
    pub aggregate: Option<LinkEntry>,
    /// Square matrix over all entries (links, then aggregate).
    pub interference: Vec<Vec<bool>>,
    pub n_d: u32,
    /// Bits per data slot.
    pub rate: u64,
    pub radio_budget: u32,
    pub parent: Option<ParentReservation>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScheduleSolution {
    pub scale: Scale,
    pub slot_counts: Vec<u32>,
    pub objective_slots: u32,
}

impl ScheduleSolution {
    pub(crate) fn new(scale: Scale, slot_counts: Vec<u32>) -> Self {
        let objective_slots = slot_counts.iter().sum();
        Self {
            scale,
            slot_counts,
            objective_slots,
        }
    }

    /// Slot count of the aggregate entry, if the problem had one.
    pub fn aggregate_slots(&self, problem: &ScheduleProblem) -> Option<u32> {
        problem
            .aggregate
            .map(|_| self.slot_counts[problem.links.len()])
    }
}

impl ScheduleProblem {
    pub fn num_entries(&self) -> usize {
        self.links.len() + usize::from(self.aggregate.is_some())
    }

    pub fn entry(&self, idx: usize) -> &LinkEntry {
        if idx < self.links.len() {
            &self.links[idx]
        } else {
            self.aggregate.as_ref().expect("entry index out of range")
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = &LinkEntry> {
        self.links.iter().chain(self.aggregate.iter())
    }

    pub fn interferes(&self, a: usize, b: usize) -> bool {
        self.interference[a][b]
    }

    pub fn validate(&self) -> Result<(), SolverError> {
        let m = self.num_entries();
        if self.n_d == 0 {
            return Err(SolverError::Malformed("n_d must be at least 1".into()));
        }
        if self.rate == 0 {
            return Err(SolverError::Malformed("rate must be positive".into()));
        }
        if self.interference.len() != m || self.interference.iter().any(|row| row.len() != m) {
            return Err(SolverError::Malformed(format!(
                "interference matrix must be {m}x{m}"
            )));
        }
        for a in 0..m {
            if self.interference[a][a] {
                return Err(SolverError::Malformed(format!(
                    "entry {a} interferes with itself"
                )));
            }
            for b in 0..m {
                if self.interference[a][b] != self.interference[b][a] {
                    return Err(SolverError::Malformed(
                        "interference matrix not symmetric".into(),
                    ));
                }
            }
        }
        for (i, e) in self.entries().enumerate() {
            if !(e.alpha == 1 || e.alpha == 2) {
                return Err(SolverError::Malformed(format!(
                    "entry {i} has alpha {}",
                    e.alpha
                )));
            }
            if e.upper > self.n_d {
                return Err(SolverError::Malformed(format!(
                    "entry {i} upper bound {} exceeds n_d {}",
                    e.upper, self.n_d
                )));
            }
        }
        if let Some(p) = &self.parent {
            if p.interferes.len() != self.links.len() {
                return Err(SolverError::Malformed(
                    "parent reservation must flag every link".into(),
                ));
            }
            if self.aggregate.is_some() {
                return Err(SolverError::Malformed(
                    "parent reservation and aggregate link are exclusive".into(),
                ));
            }
        }
        Ok(())
    }

    /// Slots left for links interfering with the parent link.
    pub(crate) fn parent_room(&self) -> Option<i64> {
        self.parent
            .as_ref()
            .map(|p| i64::from(self.n_d) - i64::from(p.alpha) * i64::from(p.reserved))
    }

    /// Whether link entry `idx` is bounded by the parent reservation.
    pub(crate) fn parent_limited(&self, idx: usize) -> bool {
        self.parent
            .as_ref()
            .is_some_and(|p| idx < p.interferes.len() && p.interferes[idx])
    }
}

/// A constraint broken by a candidate assignment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Violation {
    WrongLength,
    ActiveWithoutSlots(usize),
    InactiveWithSlots(usize),
    AboveUpperBound(usize),
    ExpandedTooLong(usize),
    Interference(usize, usize),
    ParentReservation(usize),
    RadioBudget,
    ScaleNotServed(usize),
}

/// Checks every constraint of `problem` at `slots` (and at `scale`, when
/// given) by direct evaluation. Used by the oracle and by tests.
pub fn evaluate(problem: &ScheduleProblem, slots: &[u32], scale: Option<Scale>) -> Vec<Violation> {
    let mut out = Vec::new();
    let m = problem.num_entries();
    if slots.len() != m {
        out.push(Violation::WrongLength);
        return out;
    }
    let n_d = i64::from(problem.n_d);
    for j in 0..m {
        let e = problem.entry(j);
        let n = slots[j];
        if e.is_active() {
            if n == 0 {
                out.push(Violation::ActiveWithoutSlots(j));
            }
        } else if n != 0 {
            out.push(Violation::InactiveWithSlots(j));
        }
        if n > e.upper {
            out.push(Violation::AboveUpperBound(j));
        }
        let expanded = i64::from(e.alpha) * i64::from(n);
        if expanded > n_d {
            out.push(Violation::ExpandedTooLong(j));
        }
        if let Some(room) = problem.parent_room() {
            if problem.parent_limited(j) && expanded > room {
                out.push(Violation::ParentReservation(j));
            }
        }
        for k in (j + 1)..m {
            if problem.interferes(j, k) {
                let other = i64::from(problem.entry(k).alpha) * i64::from(slots[k]);
                if expanded + other > n_d {
                    out.push(Violation::Interference(j, k));
                }
            }
        }
        if let Some(s) = scale {
            if !s.served_by(u64::from(n), problem.rate, e.effective_demand()) {
                out.push(Violation::ScaleNotServed(j));
            }
        }
    }
    let total: u64 = slots.iter().map(|&n| u64::from(n)).sum();
    if total > u64::from(problem.radio_budget) {
        out.push(Violation::RadioBudget);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn evaluate_flags_each_constraint() {
        let p = ScheduleProblem {
            links: vec![LinkEntry::local(10, 1, 22), LinkEntry::local(0, 2, 22)],
            aggregate: None,
            interference: vec![vec![false, true], vec![true, false]],
            n_d: 22,
            rate: 1,
            radio_budget: 20,
            parent: None,
        };
        assert!(evaluate(&p, &[10, 0], Some(Scale::ONE)).is_empty());
        assert_eq!(
            evaluate(&p, &[0, 0], None),
            vec![Violation::ActiveWithoutSlots(0)]
        );
        assert_eq!(
            evaluate(&p, &[10, 1], None),
            vec![Violation::InactiveWithSlots(1)]
        );
        assert_eq!(
            evaluate(&p, &[9, 0], Some(Scale::ONE)),
            vec![Violation::ScaleNotServed(0)]
        );
        assert_eq!(evaluate(&p, &[21, 0], None), vec![Violation::RadioBudget]);
    }
}
