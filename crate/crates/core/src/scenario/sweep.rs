use std::io::{self, Write};

use rayon::prelude::*;
use serde::Serialize;

use super::config::{Preset, RadioSpec, ScenarioConfig};
use super::run::{simulate, RunError};
use crate::metrics::jain_index;

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    /// Per-BS offered load, Gbps, split 2:1 downlink:uplink.
    pub loads_gbps: Vec<f64>,
    pub seeds: Vec<u64>,
    pub presets: Vec<Preset>,
    /// Subframes excluded from the throughput averages.
    pub warmup: u64,
}

/// Outcome of one (preset, load, seed) run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepPoint {
    pub preset: Preset,
    pub load_gbps: f64,
    pub seed: u64,
    pub mean_per_bs_gbps: f64,
    pub min_per_bs_gbps: f64,
    /// `None` when nothing was delivered.
    pub jain: Option<f64>,
    pub placement_repairs: u64,
}

/// Per-BS throughputs in Gbps over the measured window.
pub fn per_bs_gbps(out: &super::run::RunOutput, warmup: u64, subframe_duration_s: f64) -> Vec<f64> {
    let bits = out.mean_per_bs_bits(warmup);
    out.topology
        .small_cells()
        .map(|n| bits[n.index()] / subframe_duration_s / 1e9)
        .collect()
}

pub fn run_point(
    base: &ScenarioConfig,
    preset: Preset,
    load: f64,
    seed: u64,
    warmup: u64,
) -> Result<SweepPoint, RunError> {
    let mut cfg = base.clone();
    cfg.seed = seed;
    cfg.radios = Some(RadioSpec::Preset(preset));
    cfg.set_load_gbps(load);
    let scenario = cfg.build()?;
    let out = simulate(&scenario, false)?;
    let tp = per_bs_gbps(&out, warmup, cfg.subframe_duration_s);
    Ok(SweepPoint {
        preset,
        load_gbps: load,
        seed,
        mean_per_bs_gbps: tp.iter().sum::<f64>() / tp.len() as f64,
        min_per_bs_gbps: tp.iter().copied().fold(f64::INFINITY, f64::min),
        jain: jain_index(&tp).ok(),
        placement_repairs: out.placement_repairs(),
    })
}

/// Runs every (preset, load, seed) combination in parallel; results come
/// back in a fixed order regardless of scheduling.
pub fn run_sweep(base: &ScenarioConfig, spec: &SweepSpec) -> Result<Vec<SweepPoint>, RunError> {
    let jobs: Vec<(Preset, f64, u64)> = spec
        .presets
        .iter()
        .flat_map(|&p| {
            spec.loads_gbps
                .iter()
                .flat_map(move |&l| spec.seeds.iter().map(move |&s| (p, l, s)))
        })
        .collect();
    jobs.par_iter()
        .map(|&(p, l, s)| run_point(base, p, l, s, spec.warmup))
        .collect()
}

/// One row per (preset, load), averaged over seeds.
pub fn write_summary<W: Write>(mut out: W, points: &[SweepPoint]) -> io::Result<()> {
    writeln!(out, "preset,load_gbps,seeds,mean_per_bs_gbps,min_per_bs_gbps,mean_jain,min_jain,placement_repairs")?;
    let mut i = 0;
    while i < points.len() {
        let key = (points[i].preset, points[i].load_gbps);
        let group: Vec<&SweepPoint> = points[i..]
            .iter()
            .take_while(|p| (p.preset, p.load_gbps) == key)
            .collect();
        i += group.len();
        let n = group.len() as f64;
        let mean = group.iter().map(|p| p.mean_per_bs_gbps).sum::<f64>() / n;
        let min = group
            .iter()
            .map(|p| p.min_per_bs_gbps)
            .fold(f64::INFINITY, f64::min);
        let jains: Vec<f64> = group.iter().filter_map(|p| p.jain).collect();
        let (mean_jain, min_jain) = if jains.is_empty() {
            (String::new(), String::new())
        } else {
            let m = jains.iter().sum::<f64>() / jains.len() as f64;
            let lo = jains.iter().copied().fold(f64::INFINITY, f64::min);
            (format!("{m:.6}"), format!("{lo:.6}"))
        };
        let repairs: u64 = group.iter().map(|p| p.placement_repairs).sum();
        writeln!(
            out,
            "{},{:.4},{},{:.6},{:.6},{},{},{}",
            key.0.name(),
            key.1,
            group.len(),
            mean,
            min,
            mean_jain,
            min_jain,
            repairs
        )?;
    }
    Ok(())
}
