use super::{Scale, ScheduleProblem, ScheduleSolution, SolverError};

/// Largest slot count entry `idx` may take on its own (upper bound, window
/// length, parent reservation). `None` when even zero slots break the
/// parent reservation.
fn entry_cap(p: &ScheduleProblem, idx: usize) -> Option<u32> {
    let e = p.entry(idx);
    let alpha = u32::from(e.alpha);
    let mut cap = e.upper.min(p.n_d / alpha);
    if p.parent_limited(idx) {
        let room = p.parent_room().unwrap_or(i64::from(p.n_d));
        if room < 0 {
            return None;
        }
        cap = cap.min(room as u32 / alpha);
    }
    Some(cap)
}

/// Componentwise-minimal slot vector serving `scale`, if it satisfies every
/// constraint. Feasibility is monotone in `scale` because each entry of the
/// minimal vector is non-decreasing in it.
fn minimal_vector(p: &ScheduleProblem, caps: &[Option<u32>], scale: Scale) -> Option<Vec<u32>> {
    let m = p.num_entries();
    let mut slots = Vec::with_capacity(m);
    for (j, cap) in caps.iter().enumerate() {
        let e = p.entry(j);
        let cap = (*cap)?;
        let n = if e.is_active() {
            scale.slots_for(e.effective_demand(), p.rate).max(1)
        } else {
            0
        };
        if n > u64::from(cap) {
            return None;
        }
        slots.push(n as u32);
    }
    if !pairwise_ok(p, &slots) {
        return None;
    }
    let total: u64 = slots.iter().map(|&n| u64::from(n)).sum();
    (total <= u64::from(p.radio_budget)).then_some(slots)
}

fn pairwise_ok(p: &ScheduleProblem, slots: &[u32]) -> bool {
    let m = slots.len();
    for j in 0..m {
        let a = u32::from(p.entry(j).alpha) * slots[j];
        for k in (j + 1)..m {
            if p.interferes(j, k) && a + u32::from(p.entry(k).alpha) * slots[k] > p.n_d {
                return false;
            }
        }
    }
    true
}

/// Maximum scale `S ∈ [0, 1]` with a feasible integer slot vector, plus the
/// componentwise-minimal witness for it.
///
/// The minimal vector only changes where some `ceil(S·E_j / r)` steps up, so
/// the optimum is one of the breakpoints `n·r / E_j` (or 1). The candidates
/// are sorted and binary-searched.
pub fn solve_max_scale(problem: &ScheduleProblem) -> Result<ScheduleSolution, SolverError> {
    problem.validate()?;
    let m = problem.num_entries();
    let caps: Vec<Option<u32>> = (0..m).map(|j| entry_cap(problem, j)).collect();

    let mut candidates = vec![Scale::ZERO, Scale::ONE];
    for (j, cap) in caps.iter().enumerate() {
        let e = problem.entry(j);
        let demand = e.effective_demand();
        if !e.is_active() || demand == 0 {
            continue;
        }
        for n in 1..=cap.unwrap_or(0) {
            let s = Scale::from_slots(u64::from(n), problem.rate, demand);
            if s > Scale::ONE {
                break;
            }
            candidates.push(s);
        }
    }
    candidates.sort();
    candidates.dedup();

    let mut best = match minimal_vector(problem, &caps, Scale::ZERO) {
        Some(v) => (Scale::ZERO, v),
        None => return Err(SolverError::Infeasible),
    };
    // Invariant: candidates[lo] feasible, everything above hi infeasible.
    let (mut lo, mut hi) = (0usize, candidates.len() - 1);
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        match minimal_vector(problem, &caps, candidates[mid]) {
            Some(v) => {
                best = (candidates[mid], v);
                lo = mid;
            }
            None => hi = mid - 1,
        }
    }
    Ok(ScheduleSolution::new(best.0, best.1))
}

/// Maximises the total slot count while every link still serves `scale` of
/// its (queue-bounded) demand. Ties go to the lexicographically smallest
/// slot vector.
pub fn solve_max_slots(
    problem: &ScheduleProblem,
    scale: Scale,
) -> Result<ScheduleSolution, SolverError> {
    problem.validate()?;
    let m = problem.num_entries();
    let caps: Vec<Option<u32>> = (0..m).map(|j| entry_cap(problem, j)).collect();
    let lowers = minimal_vector(problem, &caps, scale)
        .ok_or_else(|| SolverError::InconsistentInput(scale.to_string()))?;
    let uppers: Vec<u32> = (0..m)
        .map(|j| {
            if problem.entry(j).is_active() {
                caps[j].unwrap_or(0)
            } else {
                0
            }
        })
        .collect();

    let mut search = Search {
        p: problem,
        lowers: &lowers,
        uppers: &uppers,
        assigned: Vec::with_capacity(m),
        best_total: lowers.iter().sum(),
        found: None,
    };
    search.maximise(0, 0);
    let target = search.best_total;
    search.assigned.clear();
    search.found = None;
    search.first_with_total(0, 0, target);
    let slots = search
        .found
        .expect("the optimum found in the first pass is reachable");
    Ok(ScheduleSolution::new(scale, slots))
}

struct Search<'a> {
    p: &'a ScheduleProblem,
    lowers: &'a [u32],
    uppers: &'a [u32],
    assigned: Vec<u32>,
    best_total: u32,
    found: Option<Vec<u32>>,
}

impl Search<'_> {
    /// Upper bound of entry `k` given the values assigned so far.
    fn tightened_upper(&self, k: usize) -> u32 {
        let alpha_k = u32::from(self.p.entry(k).alpha);
        let mut up = self.uppers[k];
        for (j, &n) in self.assigned.iter().enumerate() {
            if self.p.interferes(j, k) {
                let used = u32::from(self.p.entry(j).alpha) * n;
                up = up.min(self.p.n_d.saturating_sub(used) / alpha_k);
            }
        }
        up
    }

    /// Value range for the next entry plus an optimistic bound on the total,
    /// or `None` when the remaining lower bounds cannot be met.
    fn frame(&self, sum: u32) -> Option<(u32, u32, u32)> {
        let i = self.assigned.len();
        let m = self.uppers.len();
        let radio_left = self.p.radio_budget.checked_sub(sum)?;
        let mut rest_lower = 0u32;
        let mut rest_upper = 0u32;
        for k in (i + 1)..m {
            let up = self.tightened_upper(k);
            if up < self.lowers[k] {
                return None;
            }
            rest_lower += self.lowers[k];
            rest_upper += up;
        }
        let hi = self
            .tightened_upper(i)
            .min(radio_left.checked_sub(rest_lower)?);
        let lo = self.lowers[i];
        if hi < lo {
            return None;
        }
        let bound = sum + (hi + rest_upper).min(radio_left);
        Some((lo, hi, bound))
    }

    fn maximise(&mut self, i: usize, sum: u32) {
        if i == self.uppers.len() {
            self.best_total = self.best_total.max(sum);
            return;
        }
        let Some((lo, hi, bound)) = self.frame(sum) else {
            return;
        };
        if bound <= self.best_total {
            return;
        }
        for v in (lo..=hi).rev() {
            self.assigned.push(v);
            self.maximise(i + 1, sum + v);
            self.assigned.pop();
        }
    }

    fn first_with_total(&mut self, i: usize, sum: u32, target: u32) {
        if self.found.is_some() {
            return;
        }
        if i == self.uppers.len() {
            if sum == target {
                self.found = Some(self.assigned.clone());
            }
            return;
        }
        let Some((lo, hi, bound)) = self.frame(sum) else {
            return;
        };
        if bound < target {
            return;
        }
        for v in lo..=hi {
            self.assigned.push(v);
            self.first_with_total(i + 1, sum + v, target);
            self.assigned.pop();
            if self.found.is_some() {
                return;
            }
        }
    }
}
