#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use mmwave_backhaul::optimizer::{LinkEntry, ParentReservation, ScheduleProblem};

pub const RATE: u64 = 1_000;

/// Random small problem: at most four entries, n_d in 2..=12. Half are
/// local-schedule shaped (demand only, aggregate parent link), half are
/// final-schedule shaped (queues, ĥn caps, optional parent reservation).
pub fn random_problem(rng: &mut impl Rng) -> ScheduleProblem {
    let n_d = rng.random_range(2..=12u32);
    let local = rng.random_bool(0.5);
    let entries = rng.random_range(1..=4usize);
    let links = if local { entries - 1 } else { entries };
    let max_demand = u64::from(n_d) * RATE * 3 / 2;
    let mut entry = |queued: bool| {
        let demand = if rng.random_bool(0.15) {
            0
        } else {
            rng.random_range(1..=max_demand)
        };
        let alpha = if rng.random_bool(0.3) { 2 } else { 1 };
        if queued {
            let queue = if rng.random_bool(0.15) {
                0
            } else {
                rng.random_range(1..=max_demand)
            };
            LinkEntry::queued(demand, queue, alpha, rng.random_range(0..=n_d))
        } else {
            LinkEntry::local(demand, alpha, n_d)
        }
    };
    let link_entries: Vec<LinkEntry> = (0..links).map(|_| entry(!local)).collect();
    let aggregate = local.then(|| {
        let total = link_entries.iter().map(|e| e.demand).sum::<u64>()
            + rng.random_range(0..=max_demand / 2);
        let alpha = if rng.random_bool(0.3) { 2 } else { 1 };
        LinkEntry::local(total, alpha, n_d)
    });
    let m = entries;
    let mut interference = vec![vec![false; m]; m];
    for a in 0..m {
        for b in (a + 1)..m {
            let i = rng.random_bool(0.35);
            interference[a][b] = i;
            interference[b][a] = i;
        }
    }
    let radios = rng.random_range(1..=3u32);
    let parent = (!local && rng.random_bool(0.5)).then(|| {
        let alpha: u8 = if rng.random_bool(0.3) { 2 } else { 1 };
        ParentReservation {
            alpha,
            reserved: rng.random_range(0..=n_d / u32::from(alpha)),
            interferes: (0..links).map(|_| rng.random_bool(0.4)).collect(),
        }
    });
    let reserved = parent.as_ref().map_or(0, |p| p.reserved);
    ScheduleProblem {
        links: link_entries,
        aggregate,
        interference,
        n_d,
        rate: RATE,
        radio_budget: (n_d * radios).saturating_sub(reserved),
        parent,
    }
}

pub fn seeded_problem(seed: u64) -> ScheduleProblem {
    random_problem(&mut ChaCha8Rng::seed_from_u64(seed))
}
