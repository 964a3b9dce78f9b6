use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

/// Smooths the per-subframe desired slot count before it is reported upward.
///
/// Until the window has filled, the raw value is reported. Afterwards the
/// reported value only moves (to the rounded window mean) when it deviates
/// from the window mean by more than `threshold` of that mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportingFilter {
    window: VecDeque<u32>,
    capacity: usize,
    threshold: f64,
    current: Option<u32>,
}

impl ReportingFilter {
    pub fn new(window: usize, threshold: f64) -> Self {
        assert!(window >= 1, "filter window must hold at least one value");
        assert!(threshold >= 0.0, "threshold must be non-negative");
        Self {
            window: VecDeque::with_capacity(window),
            capacity: window,
            threshold,
            current: None,
        }
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn window_len(&self) -> usize {
        self.capacity
    }

    /// Last reported value (0 before anything was observed).
    pub fn current(&self) -> u32 {
        self.current.unwrap_or(0)
    }

    pub fn mean(&self) -> f64 {
        if self.window.is_empty() {
            return 0.0;
        }
        self.window.iter().map(|&v| f64::from(v)).sum::<f64>() / self.window.len() as f64
    }

    /// Records this subframe's value and returns the value to report.
    pub fn update(&mut self, now: u32) -> u32 {
        if self.window.len() == self.capacity {
            self.window.pop_front();
        }
        self.window.push_back(now);
        if self.window.len() < self.capacity {
            self.current = Some(now);
            return now;
        }
        let mean = self.mean();
        let reported = f64::from(self.current.unwrap_or(now));
        if (reported - mean).abs() > self.threshold * mean {
            self.current = Some(mean.round() as u32);
        } else if self.current.is_none() {
            self.current = Some(now);
        }
        self.current()
    }
}
