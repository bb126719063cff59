//! Step-response metrics computed from closed-loop traces.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::dataset::StepSchedule;
use crate::error::{Error, Result};
use crate::plant::ClosedLoopTrace;

/// Length of the window at the end of each segment used for steady-state
/// statistics, s.
pub const STEADY_WINDOW_S: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepResponseMetrics {
    pub segment: usize,
    pub setpoint: f64,
    /// Mean of `setpoint - x` over the final window; signed.
    pub steady_state_error: f64,
    /// Largest excursion past the setpoint in the direction of the step.
    pub overshoot: f64,
    /// Half the peak-to-peak error over the final window.
    pub oscillation_amplitude: f64,
    /// 10% to 90% of the step; `None` when the step is zero or never
    /// completed.
    pub rise_time: Option<f64>,
}

fn mean(xs: &[f64]) -> f64 {
    xs.iter().sum::<f64>() / xs.len() as f64
}

/// Mean error over the final `window_s` seconds of the trace.
pub fn tail_mean_error(trace: &ClosedLoopTrace, window_s: f64) -> Result<f64> {
    let n = (window_s / trace.dt).round() as usize;
    if n == 0 || n > trace.len() {
        return Err(Error::Config(format!(
            "trace of {} ticks has no {window_s} s tail",
            trace.len()
        )));
    }
    Ok(mean(&trace.error[trace.len() - n..]))
}

pub fn step_metrics(
    trace: &ClosedLoopTrace,
    schedule: &StepSchedule,
) -> Result<Vec<StepResponseMetrics>> {
    crate::error::check_len("trace segments", schedule.len(), trace.segment_starts.len())?;
    let window = (STEADY_WINDOW_S / trace.dt).round() as usize;
    let mut out = Vec::with_capacity(schedule.len());
    for (seg, &(setpoint, hold)) in schedule.steps.iter().enumerate() {
        let range = trace.segment_range(seg);
        if range.len() < window || hold + 1e-9 < STEADY_WINDOW_S {
            return Err(Error::Config(format!(
                "segment {seg} lasts {hold} s; metrics need at least {STEADY_WINDOW_S} s"
            )));
        }
        let x = &trace.x[range.clone()];
        let tail_err = &trace.error[range.end - window..range.end];
        let steady_state_error = mean(tail_err);
        let (lo, hi) = tail_err
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &e| {
                (l.min(e), h.max(e))
            });
        let oscillation_amplitude = (hi - lo) / 2.0;

        let start = x[0];
        let step = setpoint - start;
        let dir = step.signum();
        let overshoot = if step == 0.0 {
            0.0
        } else {
            x.iter()
                .map(|&xi| dir * (xi - setpoint))
                .fold(0.0, f64::max)
        };
        let rise_time = if step == 0.0 {
            None
        } else {
            let progress = |xi: f64| (xi - start) / step;
            let t10 = x.iter().position(|&xi| progress(xi) >= 0.1);
            let t90 = x.iter().position(|&xi| progress(xi) >= 0.9);
            match (t10, t90) {
                (Some(a), Some(b)) => Some((b - a) as f64 * trace.dt),
                _ => None,
            }
        };
        out.push(StepResponseMetrics {
            segment: seg,
            setpoint,
            steady_state_error,
            overshoot,
            oscillation_amplitude,
            rise_time,
        });
    }
    Ok(out)
}

/// Per-segment metrics for one controller plus their means.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub controller: String,
    pub segments: Vec<StepResponseMetrics>,
}

impl EvalReport {
    pub const CSV_HEADER: &'static str = "segment,ss_error_m,overshoot_m,oscillation_m,rise_time_s";

    pub fn mean_abs_steady_state(&self) -> f64 {
        mean(
            &self
                .segments
                .iter()
                .map(|m| m.steady_state_error.abs())
                .collect::<Vec<_>>(),
        )
    }

    pub fn mean_overshoot(&self) -> f64 {
        mean(
            &self
                .segments
                .iter()
                .map(|m| m.overshoot)
                .collect::<Vec<_>>(),
        )
    }

    pub fn mean_oscillation(&self) -> f64 {
        mean(
            &self
                .segments
                .iter()
                .map(|m| m.oscillation_amplitude)
                .collect::<Vec<_>>(),
        )
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "{}", Self::CSV_HEADER);
        for m in &self.segments {
            let rise = m
                .rise_time
                .map(|r| r.to_string())
                .unwrap_or_else(|| "nan".into());
            let _ = writeln!(
                s,
                "{},{},{},{},{}",
                m.segment, m.steady_state_error, m.overshoot, m.oscillation_amplitude, rise
            );
        }
        s
    }
}
