use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};

use mmwave_backhaul::capacity::capacity_estimate;
use mmwave_backhaul::scenario::{
    run_scenario, run_sweep, validate_run_dir, write_summary, Preset, RunError, ScenarioConfig,
    SweepSpec,
};

#[derive(Parser)]
#[command(
    name = "backhaul-sim",
    version,
    about = "Distributed mmWave backhaul scheduling simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ScenarioArgs {
    /// Scenario file (TOML); built-in defaults when omitted.
    #[arg(short, long)]
    config: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Run one scenario and write its artifacts.
    Run {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(short, long, default_value = "out")]
        out: PathBuf,
        #[arg(long)]
        subframes: Option<u64>,
        /// Also write every final schedule to schedule_log.jsonl.
        #[arg(long)]
        debug_schedule_log: bool,
    },
    /// Run a grid of loads, seeds and presets in parallel.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// Output summary CSV.
        #[arg(short, long, default_value = "sweep.csv")]
        out: PathBuf,
        /// Per-BS loads in Gbps, comma separated.
        #[arg(
            long,
            value_delimiter = ',',
            default_value = "0.67,1.0,1.33,1.67,2.0,2.33,2.67,3.0,3.33"
        )]
        loads: Vec<f64>,
        /// Number of seeds, counting up from the scenario seed.
        #[arg(long, default_value_t = 50)]
        seeds: u64,
        #[arg(long, value_delimiter = ',', default_value = "mi-er,li-lr2")]
        presets: Vec<String>,
        #[arg(long, default_value_t = 100)]
        warmup: u64,
    },
    /// Replay a run's schedule log through the schedule checker.
    Validate { run_dir: PathBuf },
    /// Print the brute-force per-BS capacity estimate of a scenario's topology.
    Capacity {
        #[command(flatten)]
        scenario: ScenarioArgs,
    },
}

/// Error carrying the process exit code.
struct Failure {
    code: u8,
    error: anyhow::Error,
}

fn config_err(e: impl Into<anyhow::Error>) -> Failure {
    Failure {
        code: 1,
        error: e.into(),
    }
}

impl From<RunError> for Failure {
    fn from(e: RunError) -> Self {
        let code = match e {
            RunError::Engine(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            error: e.into(),
        }
    }
}

fn load_config(args: &ScenarioArgs) -> Result<ScenarioConfig, Failure> {
    let mut cfg = match &args.config {
        Some(p) => ScenarioConfig::load(p).map_err(config_err)?,
        None => ScenarioConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            scenario,
            out,
            subframes,
            debug_schedule_log,
        } => {
            let mut cfg = load_config(&scenario)?;
            if let Some(n) = subframes {
                cfg.num_subframes = n;
            }
            let output = run_scenario(&cfg, &out, debug_schedule_log)?;
            println!(
                "{} subframes, {} bits generated, {} delivered, {} placement repairs -> {}",
                output.records.len(),
                output.generated_bits,
                output.delivered_bits,
                output.placement_repairs(),
                out.display()
            );
        }
        Command::Sweep {
            scenario,
            out,
            loads,
            seeds,
            presets,
            warmup,
        } => {
            let cfg = load_config(&scenario)?;
            let presets = presets
                .iter()
                .map(|p| p.parse::<Preset>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(config_err)?;
            let spec = SweepSpec {
                loads_gbps: loads,
                seeds: (cfg.seed..cfg.seed + seeds).collect(),
                presets,
                warmup,
            };
            let points = run_sweep(&cfg, &spec)?;
            write_csv_file(&out, |w| write_summary(w, &points))?;
            println!("{} runs -> {}", points.len(), out.display());
        }
        Command::Validate { run_dir } => {
            let report = validate_run_dir(&run_dir)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            for v in &report.violations {
                println!("subframe {} node {}: {}", v.subframe, v.node, v.constraint);
            }
            println!(
                "{} schedules checked, {} violations",
                report.entries,
                report.violations.len()
            );
            if !report.is_clean() {
                return Err(Failure {
                    code: 2,
                    error: anyhow::anyhow!("schedule log has violations"),
                });
            }
        }
        Command::Capacity { scenario } => {
            let cfg = load_config(&scenario)?;
            let built = cfg.build().map_err(config_err)?;
            let est = capacity_estimate(&built.topology, cfg.data_slots())
                .context("capacity estimate")
                .map_err(config_err)?;
            println!(
                "{:.4} Gbps per BS (bottleneck node {})",
                est.per_bs_gbps(cfg.subframe_duration_s),
                est.bottleneck
            );
        }
    }
    Ok(())
}

fn write_csv_file(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> Result<(), Failure> {
    let file = File::create(path)
        .with_context(|| format!("creating {}", path.display()))
        .map_err(config_err)?;
    let mut w = BufWriter::new(file);
    f(&mut w)
        .with_context(|| format!("writing {}", path.display()))
        .map_err(config_err)
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.error);
            ExitCode::from(f.code)
        }
    }
}
