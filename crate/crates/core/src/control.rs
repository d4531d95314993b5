//! Reconfiguration control: when to re-acquire CSI and push a new surface
//! configuration, what that costs, and how to extrapolate the UAV pose when
//! the network only learns it after the fact.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{wrap_angle, Attitude, Pose};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReconfigPolicy {
    /// Reconfigure every `period_frames` frames regardless of link state.
    FixedPeriod { period_frames: u64 },
    /// Reconfigure when reported rate falls below `(1 - degradation_threshold)`
    /// of the rate measured right after the last reconfiguration.
    Adaptive {
        degradation_threshold: f64,
        min_gap_frames: u64,
    },
}

impl ReconfigPolicy {
    pub fn validate(&self) -> Result<()> {
        match *self {
            ReconfigPolicy::FixedPeriod { period_frames } if period_frames < 1 => {
                Err(Error::config("policy.period_frames", "must be >= 1"))
            }
            ReconfigPolicy::Adaptive {
                degradation_threshold,
                min_gap_frames,
            } => {
                if !(degradation_threshold > 0.0 && degradation_threshold < 1.0) {
                    return Err(Error::config(
                        "policy.degradation_threshold",
                        format!("must lie in (0, 1), got {degradation_threshold}"),
                    ));
                }
                if min_gap_frames < 1 {
                    return Err(Error::config("policy.min_gap_frames", "must be >= 1"));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            ReconfigPolicy::FixedPeriod { .. } => "fixed",
            ReconfigPolicy::Adaptive { .. } => "adaptive",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OverheadModel {
    /// Seconds per reconfiguration (CSI acquisition plus configuration transfer).
    pub reconfig_time: f64,
    pub frame_duration: f64,
}

impl OverheadModel {
    pub fn validate(&self) -> Result<()> {
        if !(self.frame_duration.is_finite() && self.frame_duration > 0.0) {
            return Err(Error::config("overhead.frame_duration", "must be > 0"));
        }
        if !(self.reconfig_time >= 0.0 && self.reconfig_time <= self.frame_duration) {
            return Err(Error::config(
                "overhead.reconfig_time",
                format!(
                    "must lie in [0, frame_duration = {}], got {}",
                    self.frame_duration, self.reconfig_time
                ),
            ));
        }
        Ok(())
    }
}

pub fn overhead_fraction(reconfigured: bool, model: &OverheadModel) -> f64 {
    if reconfigured {
        model.reconfig_time / model.frame_duration
    } else {
        0.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ManeuveringMode {
    /// The network commands the trajectory and knows the current pose.
    #[default]
    Coupled,
    /// An external operator flies the UAV; poses reach the network one frame late.
    FeedbackBased,
}

/// User-reported link quality for the previous frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeedbackSample {
    pub measured_rate: f64,
}

const HISTORY_CAP: usize = 8;

#[derive(Debug, Clone, Default)]
pub struct ControllerState {
    pub reference_rate: f64,
    /// `None` until the first reconfiguration.
    pub frames_since_reconfig: Option<u64>,
    pose_history: VecDeque<(f64, Pose)>,
}

impl ControllerState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn history(&self) -> &VecDeque<(f64, Pose)> {
        &self.pose_history
    }

    /// Appends a pose report; reports must arrive in time order.
    pub fn record_pose(&mut self, t: f64, pose: Pose) {
        debug_assert!(self.pose_history.back().is_none_or(|(last, _)| *last <= t));
        if self.pose_history.len() == HISTORY_CAP {
            self.pose_history.pop_front();
        }
        self.pose_history.push_back((t, pose));
    }

    /// Bookkeeping after a frame: either a reconfiguration just happened
    /// (and `measured_rate` is the fresh reference) or one more stale frame passed.
    pub fn advance(&mut self, reconfigured: bool, measured_rate: f64) {
        if reconfigured {
            self.frames_since_reconfig = Some(1);
            self.reference_rate = measured_rate;
        } else if let Some(k) = self.frames_since_reconfig.as_mut() {
            *k += 1;
        }
    }
}

/// Whether to reconfigure in the current frame.
pub fn decide(policy: &ReconfigPolicy, state: &ControllerState, feedback: &FeedbackSample) -> bool {
    let Some(since) = state.frames_since_reconfig else {
        return true;
    };
    match *policy {
        ReconfigPolicy::FixedPeriod { period_frames } => since >= period_frames,
        ReconfigPolicy::Adaptive {
            degradation_threshold,
            min_gap_frames,
        } => {
            since >= min_gap_frames
                && feedback.measured_rate < (1.0 - degradation_threshold) * state.reference_rate
        }
    }
}

/// Constant-velocity extrapolation from the two most recent pose reports.
pub fn predict_pose(history: &VecDeque<(f64, Pose)>, horizon: f64) -> Result<Pose> {
    let mut rev = history.iter().rev();
    let Some(&(t1, p1)) = rev.next() else {
        return Err(Error::invalid("pose history is empty"));
    };
    let Some(&(t0, p0)) = rev.next() else {
        return Ok(p1);
    };
    let dt = t1 - t0;
    if !(dt > 0.0) {
        return Ok(p1);
    }
    let s = horizon / dt;
    let position = p1.position + (p1.position - p0.position) * s;
    let extrapolate = |a1: f64, a0: f64| a1 + wrap_angle(a1 - a0) * s;
    let attitude = Attitude::new(
        extrapolate(p1.attitude.yaw, p0.attitude.yaw),
        extrapolate(p1.attitude.pitch, p0.attitude.pitch),
        extrapolate(p1.attitude.roll, p0.attitude.roll),
    );
    Ok(Pose { position, attitude })
}
