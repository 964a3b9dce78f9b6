use proptest::prelude::*;

use mmwave_backhaul::metrics::jain_index;
use mmwave_backhaul::topology::{NodeId, TreeTopology};
use mmwave_backhaul::traffic::{ArrivalGenerator, ArrivalModel, DemandProfile};

const PACKET: u64 = 55_417;

fn pair() -> TreeTopology {
    TreeTopology::from_text("rate_per_slot 55417\nnode 0 - 1 1\nnode 1 0 1 1\n").unwrap()
}

proptest! {
    #[test]
    fn jain_is_scale_invariant(xs in prop::collection::vec(0.0f64..1e4, 1..30), k in 1e-3f64..1e3) {
        prop_assume!(xs.iter().any(|&x| x > 0.0));
        let a = jain_index(&xs).unwrap();
        let scaled: Vec<f64> = xs.iter().map(|x| x * k).collect();
        let b = jain_index(&scaled).unwrap();
        prop_assert!((a - b).abs() < 1e-9);
        prop_assert!(a <= 1.0 + 1e-12 && a >= 1.0 / xs.len() as f64 - 1e-12);
    }

    #[test]
    fn deterministic_arrivals_stay_within_one_packet(dl in 0u64..2_000_000, ul in 0u64..2_000_000, t in 1u64..600) {
        let topo = pair();
        let profile = DemandProfile::uniform(&topo, dl, ul);
        let mut gen = ArrivalGenerator::new(ArrivalModel::Deterministic, PACKET);
        let (mut d, mut u) = (0u64, 0u64);
        for s in 1..=t {
            let a = gen.arrivals_for(&profile, NodeId(1), s);
            d += a.downlink;
            u += a.uplink;
        }
        let exact_d = (dl * t) as f64 / PACKET as f64;
        let exact_u = (ul * t) as f64 / PACKET as f64;
        prop_assert!((d as f64 - exact_d).abs() <= 1.0, "{} vs {}", d, exact_d);
        prop_assert!((u as f64 - exact_u).abs() <= 1.0, "{} vs {}", u, exact_u);
    }
}

#[test]
fn poisson_arrivals_match_rate_in_the_long_run() {
    let topo = pair();
    let rate = 3 * PACKET / 2;
    let profile = DemandProfile::uniform(&topo, rate, rate / 2);
    let mut gen = ArrivalGenerator::new(ArrivalModel::Poisson { seed: 11 }, PACKET);
    let n = 20_000u64;
    let total: u64 = (1..=n)
        .map(|s| gen.arrivals_for(&profile, NodeId(1), s).downlink)
        .sum();
    let mean = total as f64 / n as f64;
    // Poisson(1.5): standard error of the mean over 20k draws is about 0.009.
    assert!((mean - 1.5).abs() < 0.05, "mean {mean}");
}
