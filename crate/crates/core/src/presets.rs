//! Ready-made scenarios.
//!
//! `paper-fig5` is the circular-flight study: 10x10 surface at 30 GHz, user
//! 70 m from the BS, UAV circling the user at 25 m radius and 20 m altitude,
//! 24 dBm transmit power and -80 dBm noise. The frame length, reconfiguration
//! cost, policy thresholds and wind jitter are not fixed by that setup; the
//! values below are a calibration chosen so the 5-50 km/h sweep shows the
//! expected fixed-versus-adaptive trade-off. They are tuning knobs, not
//! measured constants. The `calibration_gain` of the radio is solved so the
//! conjugate-matched SNR at the starting pose is [`NOMINAL_SNR_DB`].
//!
//! `static-uav` hovers under 5 degree attitude jitter that calms to 1 degree
//! after 5 s, and uses the robust beamformer with 4096 mirrored jitter draws.
//! The achievable gain over plain conjugate matching is small there (about
//! a thousandth of a dB), so fewer draws make its sign seed-dependent.

use std::f64::consts::TAU;

use crate::channel::{cascaded_coefficients, dbm_to_watts, from_db, CarrierSpec, RadioParams};
use crate::control::{ManeuveringMode, OverheadModel, ReconfigPolicy};
use crate::engine::{Beamformer, Scenario};
use crate::error::{Error, Result};
use crate::geometry::{
    element_positions, pose_at_time, AttitudeRule, PerturbationModel, TrajectoryKind, TrajectorySpec, Vec3,
};
use crate::ris::{conjugate_phases, RisSpec, RobustOptions};

pub const PRESET_NAMES: [&str; 3] = ["paper-fig5", "static-uav", "nomadic-uav"];

/// Genie SNR at the starting pose that sets the calibration gain.
pub const NOMINAL_SNR_DB: f64 = 20.0;

pub const KMH: f64 = 1.0 / 3.6;

/// 5, 10, ..., 50 km/h.
pub fn fig5_speeds_kmh() -> Vec<f64> {
    (1..=10).map(|i| 5.0 * i as f64).collect()
}

pub fn fig5_speeds_mps() -> Vec<f64> {
    fig5_speeds_kmh().into_iter().map(|v| v * KMH).collect()
}

// Calibrated control-loop constants for the circular-flight study. A
// reconfiguration (CSI acquisition plus pushing the phases to the surface)
// costs 7.5 ms of a 10 ms frame. "Frequent" and "regular" differ by the
// period K for the fixed policy and by the threshold for the adaptive one.
pub const FRAME_DURATION: f64 = 10e-3;
pub const RECONFIG_TIME: f64 = 7.5e-3;
pub const FIXED_FREQUENT_PERIOD: u64 = 7;
pub const FIXED_REGULAR_PERIOD: u64 = 14;
pub const ADAPTIVE_FREQUENT_THRESHOLD: f64 = 0.045;
pub const ADAPTIVE_REGULAR_THRESHOLD: f64 = 0.06;
pub const ADAPTIVE_MIN_GAP: u64 = 1;
// Slowly varying wind buffeting: 3.25 degrees per axis with a 1 s correlation time.
pub const WIND_SIGMA_ATTITUDE_DEG: f64 = 3.25;
pub const WIND_AR_COEFFICIENT: f64 = 0.99;

/// Calibration gain that puts the conjugate-matched SNR at `pose_time` on `target_db`.
pub fn calibration_gain_for(scenario: &Scenario, target_db: f64) -> Result<f64> {
    let radio = RadioParams {
        calibration_gain: 1.0,
        ..scenario.radio
    };
    let pose = pose_at_time(0.0, &scenario.trajectory);
    let ch = cascaded_coefficients(
        scenario.bs_position,
        &element_positions(&scenario.ris, &pose),
        scenario.user_position,
        &scenario.carrier,
        &radio,
    )?;
    let snr = crate::channel::snr(&ch, &conjugate_phases(&ch), &radio)?;
    Ok(from_db(target_db) / snr)
}

fn circular_study() -> Result<Scenario> {
    let carrier = CarrierSpec::new(30e9)?;
    let user = Vec3::new(70.0, 0.0, 0.0);
    let trajectory = TrajectorySpec {
        kind: TrajectoryKind::Circular,
        center: user,
        radius: 25.0,
        altitude: 20.0,
        speed: 5.0 * KMH,
        initial_angle: 0.0,
        attitude_rule: AttitudeRule::Level,
    };
    let mut s = Scenario {
        carrier,
        radio: RadioParams {
            tx_power: dbm_to_watts(24.0),
            noise_power: dbm_to_watts(-80.0),
            calibration_gain: 1.0,
        },
        ris: RisSpec::half_wavelength(10, 10, carrier.wavelength())?,
        bs_position: Vec3::ZERO,
        user_position: user,
        trajectory,
        perturbation: PerturbationModel::NONE,
        perturbation_change: None,
        proactive_updates: false,
        policy: ReconfigPolicy::Adaptive {
            degradation_threshold: ADAPTIVE_FREQUENT_THRESHOLD,
            min_gap_frames: ADAPTIVE_MIN_GAP,
        },
        overhead: OverheadModel {
            reconfig_time: RECONFIG_TIME,
            frame_duration: FRAME_DURATION,
        },
        maneuvering: ManeuveringMode::FeedbackBased,
        predict_pose: true,
        beamformer: Beamformer::Conjugate,
        robust: RobustOptions::default(),
        // one lap at the slowest swept speed, so every swept speed covers whole laps
        duration: TAU * 25.0 / (5.0 * KMH),
        seed: 1,
    };
    s.radio.calibration_gain = calibration_gain_for(&s, NOMINAL_SNR_DB)?;
    Ok(s)
}

/// Circular-flight study with light wind jitter, adaptive policy.
pub fn paper_fig5() -> Result<Scenario> {
    let mut s = circular_study()?;
    let sigma = WIND_SIGMA_ATTITUDE_DEG.to_radians();
    s.perturbation = PerturbationModel {
        sigma_attitude: [sigma; 3],
        sigma_position: [0.0; 3],
        ar_coefficient: WIND_AR_COEFFICIENT,
    };
    Ok(s)
}

/// The four curves of the speed study: fixed and adaptive control, each at a
/// frequent and a regular reconfiguration setting.
pub fn fig5_variants() -> Result<Vec<(String, Scenario)>> {
    let base = paper_fig5()?;
    let with = |policy| Scenario {
        policy,
        ..base.clone()
    };
    Ok(vec![
        (
            "fixed_frequent".into(),
            with(ReconfigPolicy::FixedPeriod {
                period_frames: FIXED_FREQUENT_PERIOD,
            }),
        ),
        (
            "fixed_regular".into(),
            with(ReconfigPolicy::FixedPeriod {
                period_frames: FIXED_REGULAR_PERIOD,
            }),
        ),
        (
            "adaptive_frequent".into(),
            with(ReconfigPolicy::Adaptive {
                degradation_threshold: ADAPTIVE_FREQUENT_THRESHOLD,
                min_gap_frames: ADAPTIVE_MIN_GAP,
            }),
        ),
        (
            "adaptive_regular".into(),
            with(ReconfigPolicy::Adaptive {
                degradation_threshold: ADAPTIVE_REGULAR_THRESHOLD,
                min_gap_frames: ADAPTIVE_MIN_GAP,
            }),
        ),
    ])
}

/// Nomadic UAV on the same circle without wind.
pub fn nomadic_uav() -> Result<Scenario> {
    let mut s = circular_study()?;
    s.trajectory.speed = 30.0 * KMH;
    s.duration = 20.0;
    Ok(s)
}

/// Hovering UAV buffeted by wind: 5 degree attitude jitter per axis, robust
/// beamforming from the jitter statistics, feedback-triggered refresh and a
/// scripted calm-down halfway through with proactive statistics push.
pub fn static_uav() -> Result<Scenario> {
    let mut s = circular_study()?;
    s.trajectory.kind = TrajectoryKind::Static;
    s.trajectory.speed = 0.0;
    s.maneuvering = ManeuveringMode::Coupled;
    s.perturbation = PerturbationModel {
        sigma_attitude: [5f64.to_radians(); 3],
        sigma_position: [0.0; 3],
        ar_coefficient: 0.9,
    };
    s.perturbation_change = Some(crate::engine::PerturbationChange {
        at: 5.0,
        model: PerturbationModel {
            sigma_attitude: [1f64.to_radians(); 3],
            sigma_position: [0.0; 3],
            ar_coefficient: 0.9,
        },
    });
    s.proactive_updates = true;
    s.beamformer = Beamformer::Robust { sample_count: 4096 };
    s.duration = 10.0;
    Ok(s)
}

pub fn by_name(name: &str) -> Result<Scenario> {
    match name {
        "paper-fig5" => paper_fig5(),
        "static-uav" => static_uav(),
        "nomadic-uav" => nomadic_uav(),
        other => Err(Error::config(
            "preset",
            format!("unknown preset `{other}` (known: {})", PRESET_NAMES.join(", ")),
        )),
    }
}
