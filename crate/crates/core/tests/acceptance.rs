//! Acceptance suite. Run with `cargo test --release --test acceptance`.
//! Prints one PASS/FAIL line per criterion and exits nonzero on any failure.

mod common;

use std::fs;
use std::process::ExitCode;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use mmwave_backhaul::capacity::capacity_estimate;
use mmwave_backhaul::metrics::{jain_index, tracking_latency, TrackingParams};
use mmwave_backhaul::optimizer::{oracle_enumerate, solve_max_scale, solve_max_slots, SolverError};
use mmwave_backhaul::scenario::{
    per_bs_gbps, run_scenario, simulate, validate_schedule_log, InlineNode, Preset, RadioSpec,
    ScenarioConfig, TopologySource, MANIFEST_FILE, METRICS_FILE, QUEUES_FILE,
};
use mmwave_backhaul::topology::NodeId;
use mmwave_backhaul::traffic::ArrivalModel;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: impl Into<String>) -> Verdict {
    Verdict {
        pass,
        detail: detail.into(),
    }
}

const SATURATED: f64 = 3.33;
const WARMUP: u64 = 100;

fn preset_config(preset: Preset, seed: u64, load: f64) -> ScenarioConfig {
    let mut cfg = ScenarioConfig::default();
    cfg.seed = seed;
    cfg.radios = Some(RadioSpec::Preset(preset));
    cfg.set_load_gbps(load);
    cfg
}

fn solver_matches_oracle() -> Verdict {
    let start = Instant::now();
    let mut mismatches = Vec::new();
    let mut infeasible = 0;
    for seed in 0..1000u64 {
        let p = common::seeded_problem(seed);
        let same = match (oracle_enumerate(&p), solve_max_scale(&p)) {
            (Ok(o), Ok(f)) => {
                let most = solve_max_slots(&p, f.scale).expect("witness scale is feasible");
                o.scale == f.scale
                    && o.slot_counts == most.slot_counts
                    && o.objective_slots == most.objective_slots
            }
            (Err(SolverError::Infeasible), Err(SolverError::Infeasible)) => {
                infeasible += 1;
                true
            }
            _ => false,
        };
        if !same {
            mismatches.push(seed);
        }
    }
    let secs = start.elapsed().as_secs_f64();
    verdict(
        mismatches.is_empty() && secs <= 60.0,
        format!(
            "1000 problems ({infeasible} infeasible in both), {} mismatches {:?}, {secs:.2} s",
            mismatches.len(),
            &mismatches[..mismatches.len().min(5)]
        ),
    )
}

fn schedules_are_valid() -> Verdict {
    let mut pass = true;
    let mut parts = Vec::new();
    for preset in [Preset::MiEr, Preset::LiLr2] {
        let cfg = preset_config(preset, 1, SATURATED);
        let scenario = cfg.build().expect("default scenario builds");
        let out = simulate(&scenario, true).expect("run completes");
        let report = validate_schedule_log(&out.topology, cfg.data_slots(), &out.schedule_log);
        let repairs = out.placement_repairs();
        pass &= report.is_clean() && out.topology.len() == 20 && out.records.len() == 1000;
        if preset == Preset::MiEr {
            pass &= repairs == 0;
        }
        parts.push(format!(
            "{}: {} schedules, {} violations, {} repairs",
            preset.name(),
            report.entries,
            report.violations.len(),
            repairs
        ));
    }
    verdict(pass, parts.join("; "))
}

fn saturation() -> Verdict {
    let loads: Vec<f64> = (2..=10).map(|k| f64::from(k) / 3.0).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    let mut plateaus = Vec::new();
    for preset in [Preset::MiEr, Preset::LiLr2] {
        let mut base = preset_config(preset, 1, 1.0);
        base.enhancement = false;
        let built = base.build().expect("scenario builds");
        let cap = capacity_estimate(&built.topology, base.data_slots())
            .expect("capacity estimate")
            .per_bs_gbps(base.subframe_duration_s);
        let tps: Vec<f64> = loads
            .par_iter()
            .map(|&l| {
                let mut cfg = base.clone();
                cfg.set_load_gbps(l);
                let out = simulate(&cfg.build().unwrap(), false).unwrap();
                let tp = per_bs_gbps(&out, WARMUP, cfg.subframe_duration_s);
                tp.iter().sum::<f64>() / tp.len() as f64
            })
            .collect();
        let mut below_ok = true;
        for (&l, &t) in loads.iter().zip(&tps) {
            if l < cap && (t - l).abs() / l > 0.02 {
                below_ok = false;
            }
        }
        let top = &tps[tps.len() - 3..];
        let mean = top.iter().sum::<f64>() / 3.0;
        let spread = top
            .iter()
            .map(|t| (t - mean).abs() / mean)
            .fold(0.0, f64::max);
        let above = loads.iter().any(|&l| l > cap);
        pass &= below_ok && spread <= 0.05 && above;
        plateaus.push(mean);
        parts.push(format!(
            "{}: estimate {cap:.3}, throughput [{}], plateau {mean:.3} (max dev {:.1}%)",
            preset.name(),
            tps.iter()
                .map(|t| format!("{t:.3}"))
                .collect::<Vec<_>>()
                .join(" "),
            spread * 100.0
        ));
    }
    pass &= plateaus[0] > plateaus[1];
    verdict(pass, parts.join("; "))
}

fn fairness() -> Verdict {
    let examples = (jain_index(&[5.0; 4]).unwrap() - 1.0).abs() < 1e-12
        && (jain_index(&[1.0, 3.0]).unwrap() - 0.8).abs() < 1e-12
        && (jain_index(&[1.0, 0.0, 0.0, 0.0]).unwrap() - 0.25).abs() < 1e-12;
    let jains: Vec<(u64, f64)> = (1..=20u64)
        .into_par_iter()
        .map(|seed| {
            let cfg = preset_config(Preset::MiEr, seed, SATURATED);
            let out = simulate(&cfg.build().unwrap(), false).unwrap();
            let tp = per_bs_gbps(&out, WARMUP, cfg.subframe_duration_s);
            (seed, jain_index(&tp).unwrap_or(0.0))
        })
        .collect();
    let low: Vec<String> = jains
        .iter()
        .filter(|(_, j)| *j < 0.9)
        .map(|(s, j)| format!("{s}:{j:.3}"))
        .collect();
    let min = jains.iter().map(|&(_, j)| j).fold(1.0, f64::min);
    let mean = jains.iter().map(|&(_, j)| j).sum::<f64>() / jains.len() as f64;
    verdict(
        examples && low.is_empty(),
        format!(
            "jain examples {}; MI-ER {SATURATED} Gbps, 20 seeds: mean {mean:.3}, min {min:.3}, below 0.9 on {} seeds [{}]",
            if examples { "match" } else { "differ" },
            low.len(),
            low.join(" ")
        ),
    )
}

fn enhancement_dominates() -> Verdict {
    let runs: Vec<(u64, bool, u64, u64, u64)> = (1..=10u64)
        .into_par_iter()
        .map(|seed| {
            let mut results = [0u64; 2];
            let mut below = 0;
            let mut decisions = 0;
            for (i, enh) in [false, true].into_iter().enumerate() {
                let mut cfg = preset_config(Preset::MiEr, seed, SATURATED);
                cfg.enhancement = enh;
                let out = simulate(&cfg.build().unwrap(), false).unwrap();
                results[i] = out.delivered_bits;
                if enh {
                    decisions = out.macro_decisions.len() as u64;
                    below = out
                        .macro_decisions
                        .iter()
                        .filter(|d| d.solved_slots < d.base_slots)
                        .count() as u64;
                }
            }
            (
                seed,
                results[1] >= results[0],
                decisions,
                below,
                results[1] - results[0].min(results[1]),
            )
        })
        .collect();
    let per_subframe = runs.iter().all(|r| r.3 == 0 && r.2 > 0);
    let aggregate = runs.iter().all(|r| r.1);
    let strict = runs.iter().filter(|r| r.4 > 0).count();
    let decisions: u64 = runs.iter().map(|r| r.2).sum();
    let worse: Vec<u64> = runs.iter().filter(|r| !r.1).map(|r| r.0).collect();
    verdict(
        per_subframe && aggregate && strict > 0,
        format!(
            "{decisions} macro decisions, slots with enhancement below without on {}; aggregate throughput higher on {strict}/10 seeds, lower on {worse:?}",
            runs.iter().map(|r| r.3).sum::<u64>()
        ),
    )
}

fn tracking_config(seed: u64) -> ScenarioConfig {
    let parents = [
        None,
        Some(0),
        Some(1),
        Some(2),
        Some(3),
        Some(4),
        Some(5),
        Some(6),
        Some(0),
        Some(0),
        Some(1),
        Some(2),
        Some(8),
        Some(9),
    ];
    let mut cfg = ScenarioConfig::default();
    cfg.seed = seed;
    cfg.radios = None;
    cfg.topology = TopologySource::Inline {
        nodes: parents
            .iter()
            .map(|&parent| InlineNode {
                parent,
                alpha: 1,
                radio_chains: 1,
            })
            .collect(),
        interference: Vec::new(),
    };
    cfg.radios = Some(RadioSpec::Preset(Preset::MiEr));
    cfg.filter.threshold = 0.0;
    cfg.traffic.step_target = Some(4);
    cfg.traffic.arrivals = ArrivalModel::Poisson { seed: 0 };
    cfg
}

struct Latencies {
    dl_rise: Option<usize>,
    ul_rise: Option<usize>,
    dl_revert: Option<usize>,
    ul_revert: Option<usize>,
}

fn latencies(
    dl: &[f64],
    ul: &[f64],
    dl_level: f64,
    ul_level: f64,
    params: TrackingParams,
) -> Latencies {
    let lat = |s: &[f64], step: usize, old: f64, new: f64| {
        tracking_latency(s, step - 1, old, new, params).unwrap()
    };
    Latencies {
        dl_rise: lat(dl, 250, dl_level, 2.0 * dl_level),
        ul_rise: lat(ul, 400, ul_level, 2.0 * ul_level),
        dl_revert: lat(dl, 600, 2.0 * dl_level, dl_level),
        ul_revert: lat(ul, 750, 2.0 * ul_level, ul_level),
    }
}

fn fmt(l: Option<usize>) -> String {
    l.map_or("none".into(), |v| v.to_string())
}

fn dynamic_tracking() -> Verdict {
    let target = NodeId(4);
    let probe = tracking_config(1);
    let topo = probe.build().unwrap().topology;
    let h = topo.depth() as usize;
    let target_height = topo.height(target);
    let dl_level = probe.traffic.downlink_gbps * 1e9 * probe.subframe_duration_s;
    let ul_level = probe.traffic.uplink_gbps * 1e9 * probe.subframe_duration_s;
    let seeds = 50;
    let series: Vec<(Vec<f64>, Vec<f64>)> = (1..=seeds)
        .into_par_iter()
        .map(|seed| {
            let out = simulate(&tracking_config(seed).build().unwrap(), false).unwrap();
            out.records
                .iter()
                .map(|r| {
                    let b = r.bs(target).expect("target reported");
                    (b.dl_bits as f64, b.ul_bits as f64)
                })
                .unzip()
        })
        .collect();
    let len = series[0].0.len();
    let mean = |pick: fn(&(Vec<f64>, Vec<f64>)) -> &Vec<f64>| -> Vec<f64> {
        (0..len)
            .map(|i| series.iter().map(|s| pick(s)[i]).sum::<f64>() / seeds as f64)
            .collect()
    };
    let (dl, ul) = (mean(|s| &s.0), mean(|s| &s.1));
    let params = TrackingParams {
        band: 0.1,
        dwell: 5,
        smoothing: 1,
    };
    let l = latencies(&dl, &ul, dl_level, ul_level, params);
    let pass = target_height == 4
        && matches!(l.dl_rise, Some(d) if d >= 1 && d <= 3 * h)
        && matches!((l.ul_rise, l.dl_rise), (Some(u), Some(d)) if u < d)
        && matches!((l.dl_revert, l.dl_rise), (Some(r), Some(d)) if r > d)
        && matches!((l.ul_revert, l.ul_rise), (Some(r), Some(u)) if r > u);

    verdict(
        pass,
        format!(
            "target height {target_height}, H {h}, 3H {}; mean of {seeds} Poisson runs: DL rise {}, UL rise {}, DL revert {}, UL revert {}",
            3 * h,
            fmt(l.dl_rise),
            fmt(l.ul_rise),
            fmt(l.dl_revert),
            fmt(l.ul_revert)
        ),
    )
}

fn pipeline_invariants() -> Verdict {
    let failures: Vec<String> = (1..=100u64)
        .into_par_iter()
        .filter_map(|seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let preset = if rng.random_bool(0.5) {
                Preset::MiEr
            } else {
                Preset::LiLr2
            };
            let mut cfg = preset_config(preset, seed, rng.random_range(0.3..3.5));
            cfg.num_subframes = 300;
            cfg.enhancement = rng.random_bool(0.5);
            cfg.topology = TopologySource::Generate {
                num_nodes: rng.random_range(2..=30),
                max_children: rng.random_range(1..=4),
                interference_pair_fraction: rng.random_range(0.0..0.3),
                multihop_fraction: rng.random_range(0.0..0.4),
            };
            let out = simulate(&cfg.build().unwrap(), false).unwrap();
            let h = u64::from(out.topology.depth());
            let hb = out.audit.happen_before_violations();
            let cons = out.audit.consistency_violations(&out.topology, h).len();
            let stable = out
                .audit
                .stable_phase_start(&out.topology, cfg.num_subframes);
            (hb != 0 || cons != 0 || stable != Some(h)).then(|| {
                format!("seed {seed}: hb {hb}, consistency {cons}, stable {stable:?} vs H {h}")
            })
        })
        .collect();
    verdict(
        failures.is_empty(),
        if failures.is_empty() {
            "100 runs: 0 happen-before violations, 0 consistency violations, stable phase at H"
                .to_string()
        } else {
            format!("{} runs failed: {}", failures.len(), failures.join("; "))
        },
    )
}

fn determinism() -> Verdict {
    let dir = tempfile::tempdir().expect("temp dir");
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, arrivals) in [
        ("deterministic", ArrivalModel::Deterministic),
        ("poisson", ArrivalModel::Poisson { seed: 5 }),
    ] {
        let mut cfg = preset_config(Preset::LiLr2, 7, 2.0);
        cfg.traffic.arrivals = arrivals;
        let first = dir.path().join(format!("{name}-a"));
        run_scenario(&cfg, &first, false).expect("first run");
        let manifest = ScenarioConfig::load(&first.join(MANIFEST_FILE)).expect("manifest parses");
        let mut same = true;
        for rep in ["b", "c"] {
            let again = dir.path().join(format!("{name}-{rep}"));
            run_scenario(&manifest, &again, false).expect("rerun");
            for file in [METRICS_FILE, QUEUES_FILE, MANIFEST_FILE] {
                same &= fs::read(first.join(file)).unwrap() == fs::read(again.join(file)).unwrap();
            }
        }
        pass &= same;
        parts.push(format!(
            "{name} arrivals: {}",
            if same { "identical" } else { "differ" }
        ));
    }
    verdict(
        pass,
        format!(
            "metrics, queues and manifest from manifest reruns: {}",
            parts.join(", ")
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Verdict); 8] = [
        (1, solver_matches_oracle),
        (2, schedules_are_valid),
        (3, saturation),
        (4, fairness),
        (5, enhancement_dominates),
        (6, dynamic_tracking),
        (7, pipeline_invariants),
        (8, determinism),
    ];
    let mut failed = 0;
    for (n, check) in criteria {
        let v = check();
        failed += usize::from(!v.pass);
        println!(
            "criterion {n}: {} - {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
