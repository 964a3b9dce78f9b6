use super::{evaluate, Scale, ScheduleProblem, ScheduleSolution, SolverError};

/// Largest number of slot vectors the oracle will enumerate.
pub const ORACLE_LIMIT: u128 = 10_000_000;

/// Ground truth by exhaustive enumeration.
///
/// Every vector in `∏ [0, min(U_j, n_d)]` is checked with [`evaluate`]; each
/// feasible vector supports the scale `min(1, min_j n_j·r / E_j)`. The result
/// carries the best such scale and, among vectors supporting it, the largest
/// slot total (lexicographically smallest vector on ties).
pub fn oracle_enumerate(problem: &ScheduleProblem) -> Result<ScheduleSolution, SolverError> {
    problem.validate()?;
    let m = problem.num_entries();
    let ranges: Vec<u32> = (0..m)
        .map(|j| problem.entry(j).upper.min(problem.n_d))
        .collect();
    let space = ranges
        .iter()
        .try_fold(1u128, |acc, &u| acc.checked_mul(u128::from(u) + 1))
        .unwrap_or(u128::MAX);
    if space > ORACLE_LIMIT {
        return Err(SolverError::OracleOverflow(space));
    }

    let mut feasible: Vec<(Scale, Vec<u32>)> = Vec::new();
    let mut slots = vec![0u32; m];
    loop {
        if evaluate(problem, &slots, None).is_empty() {
            feasible.push((supported_scale(problem, &slots), slots.clone()));
        }
        // Odometer increment, last entry fastest: vectors come out in
        // lexicographic order.
        let mut pos = m;
        loop {
            if pos == 0 {
                return pick(feasible);
            }
            pos -= 1;
            if slots[pos] < ranges[pos] {
                slots[pos] += 1;
                break;
            }
            slots[pos] = 0;
        }
    }
}

fn supported_scale(problem: &ScheduleProblem, slots: &[u32]) -> Scale {
    let mut s = Scale::ONE;
    for (j, &n) in slots.iter().enumerate() {
        let demand = problem.entry(j).effective_demand();
        if demand > 0 {
            s = s.min(Scale::from_slots(u64::from(n), problem.rate, demand));
        }
    }
    s
}

fn pick(feasible: Vec<(Scale, Vec<u32>)>) -> Result<ScheduleSolution, SolverError> {
    let best_scale = feasible
        .iter()
        .map(|(s, _)| *s)
        .max()
        .ok_or(SolverError::Infeasible)?;
    let mut best: Option<&Vec<u32>> = None;
    let mut best_total = 0u32;
    // Lexicographic order is preserved, so keeping only strict improvements
    // retains the smallest vector among ties.
    for (s, v) in &feasible {
        if *s < best_scale {
            continue;
        }
        let total: u32 = v.iter().sum();
        if best.is_none() || total > best_total {
            best = Some(v);
            best_total = total;
        }
    }
    Ok(ScheduleSolution::new(
        best_scale,
        best.cloned().unwrap_or_default(),
    ))
}
