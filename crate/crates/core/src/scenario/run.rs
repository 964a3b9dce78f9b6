use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use thiserror::Error;

use super::config::{ConfigError, Scenario, ScenarioConfig};
use crate::engine::{Engine, EngineError, MacroDecision, PipelineAudit, ScheduleLogEntry};
use crate::metrics::{write_csv, MetricsRecord};
use crate::node::QueueState;
use crate::topology::{NodeId, TreeTopology};

pub const METRICS_FILE: &str = "metrics.csv";
pub const QUEUES_FILE: &str = "queues.csv";
pub const MANIFEST_FILE: &str = "manifest.toml";
pub const TOPOLOGY_FILE: &str = "topology.txt";
pub const SCHEDULE_LOG_FILE: &str = "schedule_log.jsonl";

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
}

impl RunError {
    fn io(path: &Path, source: io::Error) -> Self {
        RunError::Io {
            path: path.to_path_buf(),
            source,
        }
    }
}

/// Everything a finished run produced, in memory.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub topology: TreeTopology,
    pub records: Vec<MetricsRecord>,
    pub macro_decisions: Vec<MacroDecision>,
    pub audit: PipelineAudit,
    pub schedule_log: Vec<ScheduleLogEntry>,
    pub final_queues: Vec<(NodeId, QueueState)>,
    pub generated_bits: u64,
    pub delivered_bits: u64,
}

impl RunOutput {
    pub fn placement_repairs(&self) -> u64 {
        self.records
            .iter()
            .map(|r| u64::from(r.placement_repairs))
            .sum()
    }

    /// Mean bits per subframe delivered for each small cell over the records
    /// after `warmup` subframes, by node id (the macro entry stays 0).
    pub fn mean_per_bs_bits(&self, warmup: u64) -> Vec<f64> {
        let mut sums = vec![0.0; self.topology.len()];
        let window: Vec<&MetricsRecord> = self
            .records
            .iter()
            .filter(|r| r.subframe > warmup)
            .collect();
        for r in &window {
            for b in &r.per_bs {
                sums[b.node.index()] += b.total_bits() as f64;
            }
        }
        let n = window.len().max(1) as f64;
        sums.iter().map(|s| s / n).collect()
    }
}

/// Runs a built scenario without touching the file system.
pub fn simulate(scenario: &Scenario, record_schedules: bool) -> Result<RunOutput, EngineError> {
    let mut engine_cfg = scenario.engine.clone();
    engine_cfg.record_schedules = record_schedules;
    let mut engine = Engine::new(
        scenario.topology.clone(),
        scenario.profile.clone(),
        engine_cfg,
    )?;
    let records = engine.run(scenario.num_subframes)?;
    let final_queues = engine
        .topology()
        .nodes()
        .map(|n| (n, engine.station(n).queues.clone()))
        .collect();
    Ok(RunOutput {
        topology: scenario.topology.clone(),
        records,
        macro_decisions: engine.macro_decisions().to_vec(),
        audit: engine.audit().clone(),
        schedule_log: engine.schedule_log().to_vec(),
        final_queues,
        generated_bits: engine.generated_bits(),
        delivered_bits: engine.delivered_bits(),
    })
}

fn write_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<(), RunError> {
    let file = File::create(path).map_err(|e| RunError::io(path, e))?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .and_then(|_| w.flush())
        .map_err(|e| RunError::io(path, e))
}

fn write_queues<W: Write>(out: &mut W, queues: &[(NodeId, QueueState)]) -> io::Result<()> {
    writeln!(out, "bs,direction,endpoint,packets")?;
    for (node, q) in queues {
        for (dest, c) in q.downlink() {
            writeln!(out, "{node},dl,{dest},{c}")?;
        }
        for (src, c) in q.uplink() {
            writeln!(out, "{node},ul,{src},{c}")?;
        }
    }
    Ok(())
}

/// Runs `config` and writes the metrics, final queues, manifest, topology
/// and (with `debug`) the schedule log into `out_dir`.
pub fn run_scenario(
    config: &ScenarioConfig,
    out_dir: &Path,
    debug: bool,
) -> Result<RunOutput, RunError> {
    let scenario = config.build()?;
    fs::create_dir_all(out_dir).map_err(|e| RunError::io(out_dir, e))?;
    let manifest = config.expanded(&scenario).to_toml();
    write_file(&out_dir.join(MANIFEST_FILE), |w| {
        w.write_all(manifest.as_bytes())
    })?;
    write_file(&out_dir.join(TOPOLOGY_FILE), |w| {
        w.write_all(scenario.topology.to_text().as_bytes())
    })?;
    let output = simulate(&scenario, debug)?;
    write_file(&out_dir.join(METRICS_FILE), |w| {
        write_csv(w, &output.records)
    })?;
    write_file(&out_dir.join(QUEUES_FILE), |w| {
        write_queues(w, &output.final_queues)
    })?;
    if debug {
        write_file(&out_dir.join(SCHEDULE_LOG_FILE), |w| {
            for entry in &output.schedule_log {
                serde_json::to_writer(&mut *w, entry)?;
                w.write_all(b"\n")?;
            }
            Ok(())
        })?;
    }
    Ok(output)
}
