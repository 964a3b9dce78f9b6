//! Per-subframe measurements, fairness and demand-tracking statistics.

use std::io::{self, Write};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::topology::NodeId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("fairness of an empty or all-zero set is undefined")]
    UndefinedFairness,
    #[error("old and new levels must differ")]
    EqualLevels,
}

/// Delivery and state of one small-cell BS in one subframe.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BsMetrics {
    pub node: NodeId,
    /// Downlink bits that reached this BS.
    pub dl_bits: u64,
    /// Uplink bits from this BS that reached the macro-cell BS.
    pub ul_bits: u64,
    /// Packets queued at this BS after the subframe.
    pub queued_packets: u64,
    pub reported_n_hat: u32,
}

impl BsMetrics {
    pub fn total_bits(&self) -> u64 {
        self.dl_bits + self.ul_bits
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub subframe: u64,
    pub per_bs: Vec<BsMetrics>,
    /// Packets queued at the macro-cell BS.
    pub macro_queued_packets: u64,
    pub placement_repairs: u32,
    /// Slots the macro-cell BS used on its child links this subframe.
    pub macro_slots: u32,
}

impl MetricsRecord {
    pub fn aggregate_bits(&self) -> u64 {
        self.per_bs.iter().map(BsMetrics::total_bits).sum()
    }

    pub fn aggregate_dl_bits(&self) -> u64 {
        self.per_bs.iter().map(|b| b.dl_bits).sum()
    }

    pub fn aggregate_ul_bits(&self) -> u64 {
        self.per_bs.iter().map(|b| b.ul_bits).sum()
    }

    pub fn queued_packets(&self) -> u64 {
        self.macro_queued_packets + self.per_bs.iter().map(|b| b.queued_packets).sum::<u64>()
    }

    pub fn bs(&self, node: NodeId) -> Option<&BsMetrics> {
        self.per_bs.iter().find(|b| b.node == node)
    }
}

pub const CSV_HEADER: &str =
    "subframe,bs,dl_bits,ul_bits,total_bits,queued_packets,reported_n_hat,placement_repairs,macro_slots";

/// One row per (subframe, small-cell BS) followed by an `all` row.
pub fn write_csv<W: Write>(mut out: W, records: &[MetricsRecord]) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in records {
        for b in &r.per_bs {
            writeln!(
                out,
                "{},{},{},{},{},{},{},,",
                r.subframe,
                b.node,
                b.dl_bits,
                b.ul_bits,
                b.total_bits(),
                b.queued_packets,
                b.reported_n_hat
            )?;
        }
        writeln!(
            out,
            "{},all,{},{},{},{},,{},{}",
            r.subframe,
            r.aggregate_dl_bits(),
            r.aggregate_ul_bits(),
            r.aggregate_bits(),
            r.queued_packets(),
            r.placement_repairs,
            r.macro_slots
        )?;
    }
    Ok(())
}

/// Jain's index (Σx)² / (n·Σx²).
pub fn jain_index(values: &[f64]) -> Result<f64, MetricsError> {
    let sum: f64 = values.iter().sum();
    let squares: f64 = values.iter().map(|x| x * x).sum();
    if values.is_empty() || squares == 0.0 {
        return Err(MetricsError::UndefinedFairness);
    }
    Ok(sum * sum / (values.len() as f64 * squares))
}

/// Trailing moving average; the first `window - 1` entries average what is
/// available.
pub fn window_average(series: &[f64], window: usize) -> Vec<f64> {
    assert!(window >= 1, "window must be at least 1");
    let mut out = Vec::with_capacity(series.len());
    let mut sum = 0.0;
    for (i, &x) in series.iter().enumerate() {
        sum += x;
        if i >= window {
            sum -= series[i - window];
        }
        out.push(sum / (i + 1).min(window) as f64);
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackingParams {
    /// Relative tolerance around the new level.
    pub band: f64,
    /// Consecutive in-band samples required.
    pub dwell: usize,
    /// Trailing smoothing window applied before the band test.
    pub smoothing: usize,
}

impl Default for TrackingParams {
    fn default() -> Self {
        Self {
            band: 0.1,
            dwell: 5,
            smoothing: 1,
        }
    }
}

/// Subframes after `step` until the smoothed series enters and stays within
/// `band` of `new_level` for `dwell` samples. `None` if it never settles.
pub fn tracking_latency(
    series: &[f64],
    step: usize,
    old_level: f64,
    new_level: f64,
    params: TrackingParams,
) -> Result<Option<usize>, MetricsError> {
    if old_level == new_level {
        return Err(MetricsError::EqualLevels);
    }
    let smooth = window_average(series, params.smoothing.max(1));
    let tol = params.band * new_level.abs();
    let in_band = |x: f64| (x - new_level).abs() <= tol;
    let dwell = params.dwell.max(1);
    let mut run = 0;
    for (i, &x) in smooth.iter().enumerate().skip(step) {
        if in_band(x) {
            run += 1;
            if run == dwell {
                return Ok(Some(i + 1 - dwell - step));
            }
        } else {
            run = 0;
        }
    }
    Ok(None)
}
