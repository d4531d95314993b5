//! Frame-stepped link simulation and speed sweeps.
//!
//! Each frame advances the UAV along its trajectory, applies attitude and
//! position jitter, lets the reconfiguration policy decide from the previous
//! frame's user feedback, optionally recomputes the surface phases from the
//! controller's view of the pose, and scores the stored phases against the
//! true channel.
//!
//! Randomness comes from two independent ChaCha streams derived from the
//! scenario seed: one drives the jitter process, the other draws samples for
//! the robust beamformer. Runs that differ only in policy therefore see the
//! same jitter realization.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::channel::{cascaded_coefficients, snr_from_sum, to_db, CarrierSpec, ChannelCoefficients, RadioParams};
use crate::control::{
    decide, overhead_fraction, predict_pose, ControllerState, FeedbackSample, ManeuveringMode, OverheadModel,
    ReconfigPolicy,
};
use crate::error::{Error, Result};
use crate::geometry::{
    antithetic_draws, local_element_offsets, pose_at_time, rotation_matrix, step_perturbation, PerturbationModel, PerturbationState,
    Pose, TrajectorySpec, Vec3,
};
use crate::ris::{conjugate_phases, robust_phases, PhaseConfig, RisSpec, RobustOptions};

const PERTURBATION_STREAM: u64 = 1;
const BEAMFORMER_STREAM: u64 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Beamformer {
    /// Conjugate matching to the channel at the controller's pose estimate.
    #[default]
    Conjugate,
    /// Sample-average optimization over `sample_count` jittered poses around the
    /// estimate, drawn in mirrored pairs.
    Robust { sample_count: usize },
}

/// Scripted switch of the jitter statistics (e.g. a change of weather).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerturbationChange {
    /// Seconds from the start of the run.
    pub at: f64,
    pub model: PerturbationModel,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub carrier: CarrierSpec,
    pub radio: RadioParams,
    pub ris: RisSpec,
    pub bs_position: Vec3,
    pub user_position: Vec3,
    pub trajectory: TrajectorySpec,
    pub perturbation: PerturbationModel,
    pub perturbation_change: Option<PerturbationChange>,
    /// Force a reconfiguration with fresh statistics the moment they change.
    pub proactive_updates: bool,
    pub policy: ReconfigPolicy,
    pub overhead: OverheadModel,
    pub maneuvering: ManeuveringMode,
    /// Extrapolate late pose reports in feedback-based maneuvering.
    pub predict_pose: bool,
    pub beamformer: Beamformer,
    pub robust: RobustOptions,
    /// Seconds.
    pub duration: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn validate(&self) -> Result<()> {
        self.radio.validate()?;
        self.ris.validate()?;
        for (name, p) in [("bs_position", self.bs_position), ("user_position", self.user_position)] {
            if !p.is_finite() {
                return Err(Error::config(name, "must be finite"));
            }
        }
        self.trajectory.validate()?;
        self.perturbation.validate("perturbation")?;
        if let Some(change) = &self.perturbation_change {
            if !(change.at.is_finite() && change.at >= 0.0) {
                return Err(Error::config("perturbation_change.at", "must be >= 0"));
            }
            change.model.validate("perturbation_change.model")?;
        }
        self.policy.validate()?;
        self.overhead.validate()?;
        if let Beamformer::Robust { sample_count } = self.beamformer {
            if sample_count < 1 {
                return Err(Error::config("beamformer.sample_count", "must be >= 1"));
            }
        }
        if !(self.robust.step > 0.0 && self.robust.tolerance >= 0.0) {
            return Err(Error::config("robust", "step must be > 0 and tolerance >= 0"));
        }
        if !(self.duration.is_finite() && self.duration > 0.0) {
            return Err(Error::config("duration", format!("must be > 0, got {}", self.duration)));
        }
        if self.duration / self.overhead.frame_duration > 1e9 {
            return Err(Error::config("duration", "more than 1e9 frames"));
        }
        Ok(())
    }

    pub fn frame_count(&self) -> usize {
        // tolerate durations that are an integer number of frames up to rounding
        (self.duration / self.overhead.frame_duration - 1e-9).ceil().max(1.0) as usize
    }

    pub fn with_speed(&self, speed: f64) -> Scenario {
        let mut s = self.clone();
        s.trajectory.speed = speed;
        s
    }

    pub fn with_seed(&self, seed: u64) -> Scenario {
        Scenario { seed, ..self.clone() }
    }

    /// Idealized reference: conjugate phases from the true pose every frame at no cost.
    pub fn genie(&self) -> Scenario {
        let mut s = self.clone();
        s.policy = ReconfigPolicy::FixedPeriod { period_frames: 1 };
        s.overhead.reconfig_time = 0.0;
        s.maneuvering = ManeuveringMode::Coupled;
        s.beamformer = Beamformer::Conjugate;
        s.proactive_updates = false;
        s
    }
}

/// Per-frame output record.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameMetrics {
    pub t: f64,
    pub snr_db: f64,
    /// Spectral efficiency before control overhead, bit/s/Hz.
    pub rate: f64,
    pub effective_rate: f64,
    pub overhead_fraction: f64,
    pub reconfigured: bool,
}

/// Fixed link endpoints plus the surface layout; maps poses to channels.
struct Link<'a> {
    carrier: &'a CarrierSpec,
    radio: &'a RadioParams,
    bs: Vec3,
    user: Vec3,
    offsets: Vec<Vec3>,
}

impl<'a> Link<'a> {
    fn new(s: &'a Scenario) -> Self {
        Link {
            carrier: &s.carrier,
            radio: &s.radio,
            bs: s.bs_position,
            user: s.user_position,
            offsets: local_element_offsets(&s.ris),
        }
    }

    fn elements(&self, pose: &Pose) -> Vec<Vec3> {
        let rot = rotation_matrix(pose.attitude);
        self.offsets.iter().map(|&p| pose.position + rot.apply(p)).collect()
    }

    fn channel(&self, pose: &Pose) -> Result<ChannelCoefficients> {
        cascaded_coefficients(self.bs, &self.elements(pose), self.user, self.carrier, self.radio)
    }

    /// SNR of `phasors` against the channel at `pose`.
    fn snr(&self, pose: &Pose, phasors: &[Complex64]) -> Result<f64> {
        let ch = self.channel(pose)?;
        let sum: Complex64 = ch.as_slice().iter().zip(phasors).map(|(c, w)| c * w).sum();
        Ok(snr_from_sum(sum, self.radio))
    }
}

/// Simulates every frame of `scenario`.
pub fn run(scenario: &Scenario) -> Result<Vec<FrameMetrics>> {
    scenario.validate()?;
    let link = Link::new(scenario);
    let frame = scenario.overhead.frame_duration;
    let mut jitter_rng = stream(scenario.seed, PERTURBATION_STREAM);
    let mut beam_rng = stream(scenario.seed, BEAMFORMER_STREAM);

    let mut model = scenario.perturbation;
    let mut change = scenario.perturbation_change;
    let mut jitter = PerturbationState::stationary(&model, &mut jitter_rng);

    let mut ctrl = ControllerState::new();
    let mut phasors: Vec<Complex64> = Vec::new();
    let mut last_rate = 0.0;
    let frames = scenario.frame_count();
    let mut out = Vec::with_capacity(frames);

    for k in 0..frames {
        let t = k as f64 * frame;
        if k > 0 {
            jitter = step_perturbation(&model, &jitter, &mut jitter_rng);
        }
        let mut forced = false;
        if let Some(c) = change.filter(|c| t >= c.at) {
            model = c.model;
            change = None;
            forced = scenario.proactive_updates;
        }
        let true_pose = pose_at_time(t, &scenario.trajectory).perturbed(&jitter);

        let reconfigure = forced || decide(&scenario.policy, &ctrl, &FeedbackSample { measured_rate: last_rate });
        if reconfigure {
            let estimate = match scenario.maneuvering {
                ManeuveringMode::Coupled => true_pose,
                ManeuveringMode::FeedbackBased => {
                    if ctrl.history().is_empty() {
                        // position reported before the first frame
                        true_pose
                    } else if scenario.predict_pose {
                        let last_t = ctrl.history().back().map_or(t, |(tl, _)| *tl);
                        predict_pose(ctrl.history(), t - last_t)?
                    } else {
                        ctrl.history().back().map(|(_, p)| *p).unwrap_or(true_pose)
                    }
                }
            };
            let phases = configure(scenario, &link, &estimate, &model, &mut beam_rng)?;
            phasors = phases.phasors();
        }

        let snr = link.snr(&true_pose, &phasors)?;
        let rate = (1.0 + snr).log2();
        let overhead = overhead_fraction(reconfigure, &scenario.overhead);
        out.push(FrameMetrics {
            t,
            snr_db: to_db(snr),
            rate,
            effective_rate: (1.0 - overhead) * rate,
            overhead_fraction: overhead,
            reconfigured: reconfigure,
        });

        ctrl.advance(reconfigure, rate);
        last_rate = rate;
        if scenario.maneuvering == ManeuveringMode::FeedbackBased {
            ctrl.record_pose(t, true_pose);
        }
    }
    Ok(out)
}

fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

fn configure(
    scenario: &Scenario,
    link: &Link<'_>,
    estimate: &Pose,
    // statistics are refreshed together with the CSI
    model: &PerturbationModel,
    rng: &mut ChaCha8Rng,
) -> Result<PhaseConfig> {
    match scenario.beamformer {
        Beamformer::Conjugate => Ok(conjugate_phases(&link.channel(estimate)?)),
        Beamformer::Robust { sample_count } => {
            let samples = antithetic_draws(model, sample_count, rng)
                .iter()
                .map(|offset| link.channel(&estimate.perturbed(offset)))
                .collect::<Result<Vec<_>>>()?;
            robust_phases(&samples, &scenario.robust)
        }
    }
}

/// Aggregate of one run against its genie reference.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunSummary {
    pub mean_rate: f64,
    pub mean_effective_rate: f64,
    pub mean_genie_effective_rate: f64,
    pub overhead_pct: f64,
    pub degradation_pct: f64,
    pub reconfig_count: usize,
}

pub fn summarize(series: &[FrameMetrics], genie_series: &[FrameMetrics]) -> Result<RunSummary> {
    if series.len() != genie_series.len() {
        return Err(Error::invalid(format!(
            "series has {} frames but genie series has {}",
            series.len(),
            genie_series.len()
        )));
    }
    if series.is_empty() {
        return Err(Error::invalid("empty metric series"));
    }
    let n = series.len() as f64;
    let mean = |f: fn(&FrameMetrics) -> f64, s: &[FrameMetrics]| s.iter().map(f).sum::<f64>() / n;
    let mean_effective_rate = mean(|m| m.effective_rate, series);
    let mean_genie_effective_rate = mean(|m| m.effective_rate, genie_series);
    Ok(RunSummary {
        mean_rate: mean(|m| m.rate, series),
        mean_effective_rate,
        mean_genie_effective_rate,
        overhead_pct: 100.0 * mean(|m| m.overhead_fraction, series),
        degradation_pct: degradation_pct(mean_effective_rate, mean_genie_effective_rate),
        reconfig_count: series.iter().filter(|m| m.reconfigured).count(),
    })
}

fn degradation_pct(rate: f64, genie: f64) -> f64 {
    if genie > 0.0 {
        100.0 * (1.0 - rate / genie)
    } else {
        0.0
    }
}

/// One sweep point averaged over seeds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedPoint {
    /// m/s.
    pub speed: f64,
    pub mean_rate: f64,
    pub mean_effective_rate: f64,
    pub mean_genie_effective_rate: f64,
    pub overhead_pct: f64,
    pub degradation_pct: f64,
    /// Mean over seeds.
    pub reconfig_count: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    /// Policy label written to the `policy` CSV column.
    pub label: String,
    pub points: Vec<SpeedPoint>,
}

impl SweepSummary {
    pub fn point_at(&self, speed: f64) -> Option<&SpeedPoint> {
        self.points.iter().find(|p| p.speed == speed)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Execution {
    Sequential,
    /// Sweep points on the rayon pool; identical results to `Sequential`.
    /// Falls back to sequential when the `parallel` feature is disabled.
    Parallel,
}

impl Default for Execution {
    fn default() -> Self {
        if cfg!(feature = "parallel") {
            Execution::Parallel
        } else {
            Execution::Sequential
        }
    }
}

/// Sweeps `base` over speeds and seeds, pairing each run with its genie reference.
pub fn sweep(base: &Scenario, speeds: &[f64], seeds: &[u64]) -> Result<SweepSummary> {
    sweep_with(base, speeds, seeds, Execution::default())
}

pub fn sweep_with(base: &Scenario, speeds: &[f64], seeds: &[u64], exec: Execution) -> Result<SweepSummary> {
    let label = base.policy.name().to_string();
    let mut out = compare(&[(label, base.clone())], speeds, seeds, exec)?;
    Ok(out.remove(0))
}

/// Sweeps several labelled variants over the same speeds and seeds.
///
/// Variants that share the same genie scenario reuse one genie run per point.
pub fn compare(
    variants: &[(String, Scenario)],
    speeds: &[f64],
    seeds: &[u64],
    exec: Execution,
) -> Result<Vec<SweepSummary>> {
    if variants.is_empty() || speeds.is_empty() || seeds.is_empty() {
        return Err(Error::invalid("sweep needs at least one variant, speed and seed"));
    }
    for (_, s) in variants {
        s.validate()?;
    }
    let jobs: Vec<(usize, u64)> = (0..speeds.len())
        .flat_map(|i| seeds.iter().map(move |&seed| (i, seed)))
        .collect();
    let eval = |&(i, seed): &(usize, u64)| evaluate_point(variants, speeds[i], seed);
    let results: Vec<Result<Vec<RunSummary>>> = match exec {
        #[cfg(feature = "parallel")]
        Execution::Parallel => {
            use rayon::prelude::*;
            jobs.par_iter().map(eval).collect()
        }
        _ => jobs.iter().map(eval).collect(),
    };
    let results = results.into_iter().collect::<Result<Vec<_>>>()?;

    let mut summaries: Vec<SweepSummary> = variants
        .iter()
        .map(|(label, _)| SweepSummary {
            label: label.clone(),
            points: Vec::with_capacity(speeds.len()),
        })
        .collect();
    for (i, &speed) in speeds.iter().enumerate() {
        let per_seed = &results[i * seeds.len()..(i + 1) * seeds.len()];
        for (v, summary) in summaries.iter_mut().enumerate() {
            summary.points.push(aggregate(speed, per_seed.iter().map(|r| &r[v])));
        }
    }
    Ok(summaries)
}

fn evaluate_point(variants: &[(String, Scenario)], speed: f64, seed: u64) -> Result<Vec<RunSummary>> {
    let wrap = |e: Error| Error::SweepPoint {
        speed_mps: speed,
        seed,
        source: Box::new(e),
    };
    let mut genies: Vec<(Scenario, Vec<FrameMetrics>)> = Vec::new();
    let mut out = Vec::with_capacity(variants.len());
    for (_, base) in variants {
        let scenario = base.with_speed(speed).with_seed(seed);
        let genie = scenario.genie();
        let idx = match genies.iter().position(|(g, _)| *g == genie) {
            Some(i) => i,
            None => {
                let series = run(&genie).map_err(wrap)?;
                genies.push((genie, series));
                genies.len() - 1
            }
        };
        let series = run(&scenario).map_err(wrap)?;
        out.push(summarize(&series, &genies[idx].1).map_err(wrap)?);
    }
    Ok(out)
}

fn aggregate<'a>(speed: f64, runs: impl Iterator<Item = &'a RunSummary>) -> SpeedPoint {
    let runs: Vec<&RunSummary> = runs.collect();
    let n = runs.len() as f64;
    let mean = |f: fn(&RunSummary) -> f64| runs.iter().map(|r| f(r)).sum::<f64>() / n;
    let mean_effective_rate = mean(|r| r.mean_effective_rate);
    let mean_genie_effective_rate = mean(|r| r.mean_genie_effective_rate);
    SpeedPoint {
        speed,
        mean_rate: mean(|r| r.mean_rate),
        mean_effective_rate,
        mean_genie_effective_rate,
        overhead_pct: mean(|r| r.overhead_pct),
        degradation_pct: degradation_pct(mean_effective_rate, mean_genie_effective_rate),
        reconfig_count: mean(|r| r.reconfig_count as f64),
    }
}
