//! Scenario files.
//!
//! Files are TOML whose keys mirror the [`Scenario`] fields, in SI units.
//! A few keys also accept a unit-suffixed spelling that is converted on
//! load: `frequency_ghz`, `tx_power_dbm`, `noise_power_dbm`, `speed_kmh`
//! and `sigma_attitude_deg`. Giving both spellings of one key is an error.
//!
//! A file may name a `preset`; keys it omits are then taken from that preset.
//!
//! ```toml
//! preset = "paper-fig5"
//! seed = 7
//!
//! [trajectory]
//! speed_kmh = 30.0
//!
//! [policy]
//! kind = "fixed_period"
//! period_frames = 10
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use toml::{Table, Value};

use crate::channel::{dbm_to_watts, CarrierSpec, RadioParams};
use crate::control::{ManeuveringMode, OverheadModel, ReconfigPolicy};
use crate::engine::{Beamformer, PerturbationChange, Scenario};
use crate::error::{Error, Result};
use crate::geometry::{AttitudeRule, PerturbationModel, TrajectoryKind, TrajectorySpec, Vec3};
use crate::presets::{self, KMH};
use crate::ris::{RisSpec, RobustOptions};

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioFile {
    #[serde(skip_serializing_if = "Option::is_none")]
    preset: Option<String>,
    seed: Option<u64>,
    duration: Option<f64>,
    bs_position: Option<[f64; 3]>,
    user_position: Option<[f64; 3]>,
    maneuvering: Option<ManeuveringMode>,
    predict_pose: Option<bool>,
    proactive_updates: Option<bool>,
    carrier: Option<CarrierFile>,
    radio: Option<RadioFile>,
    ris: Option<RisFile>,
    trajectory: Option<TrajectoryFile>,
    perturbation: Option<PerturbationFile>,
    #[serde(skip_serializing_if = "Option::is_none")]
    perturbation_change: Option<ChangeFile>,
    policy: Option<PolicyFile>,
    overhead: Option<OverheadFile>,
    beamformer: Option<Beamformer>,
    robust: Option<RobustOptions>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CarrierFile {
    frequency: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    frequency_ghz: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RadioFile {
    tx_power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    tx_power_dbm: Option<f64>,
    noise_power: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    noise_power_dbm: Option<f64>,
    calibration_gain: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RisFile {
    rows: Option<usize>,
    cols: Option<usize>,
    /// Defaults to half a wavelength.
    element_spacing: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TrajectoryFile {
    kind: Option<TrajectoryKind>,
    /// Defaults to the user position.
    center: Option<[f64; 3]>,
    radius: Option<f64>,
    altitude: Option<f64>,
    speed: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    speed_kmh: Option<f64>,
    initial_angle: Option<f64>,
    attitude_rule: Option<AttitudeRule>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PerturbationFile {
    sigma_attitude: Option<[f64; 3]>,
    #[serde(skip_serializing_if = "Option::is_none")]
    sigma_attitude_deg: Option<[f64; 3]>,
    sigma_position: Option<[f64; 3]>,
    ar_coefficient: Option<f64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ChangeFile {
    at: Option<f64>,
    model: Option<PerturbationFile>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyFile {
    kind: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    period_frames: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    degradation_threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    min_gap_frames: Option<u64>,
}

#[derive(Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct OverheadFile {
    reconfig_time: Option<f64>,
    frame_duration: Option<f64>,
}

fn required<T>(v: Option<T>, field: &str) -> Result<T> {
    v.ok_or_else(|| Error::config(field, "missing"))
}

/// Exactly one of the SI key and its unit-suffixed alias.
fn either(si: Option<f64>, alias: Option<f64>, convert: fn(f64) -> f64, field: &str, alias_name: &str) -> Result<f64> {
    match (si, alias) {
        (Some(v), None) => Ok(v),
        (None, Some(a)) => Ok(convert(a)),
        (Some(_), Some(_)) => Err(Error::config(field, format!("given both `{field}` and `{alias_name}`"))),
        (None, None) => Err(Error::config(field, "missing")),
    }
}

fn perturbation_from(f: PerturbationFile, path: &str) -> Result<PerturbationModel> {
    let sigma_attitude = match (f.sigma_attitude, f.sigma_attitude_deg) {
        (Some(v), None) => v,
        (None, Some(d)) => d.map(f64::to_radians),
        (Some(_), Some(_)) => {
            return Err(Error::config(
                format!("{path}.sigma_attitude"),
                "given both `sigma_attitude` and `sigma_attitude_deg`",
            ))
        }
        (None, None) => [0.0; 3],
    };
    Ok(PerturbationModel {
        sigma_attitude,
        sigma_position: f.sigma_position.unwrap_or([0.0; 3]),
        ar_coefficient: f.ar_coefficient.unwrap_or(0.0),
    })
}

fn policy_from(f: PolicyFile) -> Result<ReconfigPolicy> {
    let kind = required(f.kind, "policy.kind")?;
    match kind.as_str() {
        "fixed_period" => Ok(ReconfigPolicy::FixedPeriod {
            period_frames: required(f.period_frames, "policy.period_frames")?,
        }),
        "adaptive" => Ok(ReconfigPolicy::Adaptive {
            degradation_threshold: required(f.degradation_threshold, "policy.degradation_threshold")?,
            min_gap_frames: f.min_gap_frames.unwrap_or(1),
        }),
        other => Err(Error::config(
            "policy.kind",
            format!("expected `fixed_period` or `adaptive`, got `{other}`"),
        )),
    }
}

impl ScenarioFile {
    fn into_scenario(self) -> Result<Scenario> {
        let carrier_f = required(self.carrier, "carrier")?;
        let frequency = either(
            carrier_f.frequency,
            carrier_f.frequency_ghz,
            |g| g * 1e9,
            "carrier.frequency",
            "frequency_ghz",
        )?;
        let carrier = CarrierSpec::new(frequency).map_err(|e| Error::config("carrier.frequency", e.to_string()))?;

        let radio_f = required(self.radio, "radio")?;
        let radio = RadioParams {
            tx_power: either(radio_f.tx_power, radio_f.tx_power_dbm, dbm_to_watts, "radio.tx_power", "tx_power_dbm")?,
            noise_power: either(
                radio_f.noise_power,
                radio_f.noise_power_dbm,
                dbm_to_watts,
                "radio.noise_power",
                "noise_power_dbm",
            )?,
            calibration_gain: required(radio_f.calibration_gain, "radio.calibration_gain")?,
        };

        let ris_f = required(self.ris, "ris")?;
        let ris = RisSpec {
            rows: required(ris_f.rows, "ris.rows")?,
            cols: required(ris_f.cols, "ris.cols")?,
            element_spacing: ris_f.element_spacing.unwrap_or(carrier.wavelength() / 2.0),
        };

        let user_position = Vec3::from(required(self.user_position, "user_position")?);
        let traj_f = required(self.trajectory, "trajectory")?;
        let trajectory = TrajectorySpec {
            kind: required(traj_f.kind, "trajectory.kind")?,
            center: traj_f.center.map(Vec3::from).unwrap_or(user_position),
            radius: required(traj_f.radius, "trajectory.radius")?,
            altitude: required(traj_f.altitude, "trajectory.altitude")?,
            speed: either(traj_f.speed, traj_f.speed_kmh, |v| v * KMH, "trajectory.speed", "speed_kmh")?,
            initial_angle: traj_f.initial_angle.unwrap_or(0.0),
            attitude_rule: traj_f.attitude_rule.unwrap_or_default(),
        };

        let perturbation = perturbation_from(self.perturbation.unwrap_or_default(), "perturbation")?;
        let perturbation_change = self
            .perturbation_change
            .map(|c| {
                Ok::<_, Error>(PerturbationChange {
                    at: required(c.at, "perturbation_change.at")?,
                    model: perturbation_from(
                        required(c.model, "perturbation_change.model")?,
                        "perturbation_change.model",
                    )?,
                })
            })
            .transpose()?;

        let overhead_f = required(self.overhead, "overhead")?;
        let scenario = Scenario {
            carrier,
            radio,
            ris,
            bs_position: Vec3::from(required(self.bs_position, "bs_position")?),
            user_position,
            trajectory,
            perturbation,
            perturbation_change,
            proactive_updates: self.proactive_updates.unwrap_or(false),
            policy: policy_from(required(self.policy, "policy")?)?,
            overhead: OverheadModel {
                reconfig_time: required(overhead_f.reconfig_time, "overhead.reconfig_time")?,
                frame_duration: required(overhead_f.frame_duration, "overhead.frame_duration")?,
            },
            maneuvering: self.maneuvering.unwrap_or_default(),
            predict_pose: self.predict_pose.unwrap_or(true),
            beamformer: self.beamformer.unwrap_or_default(),
            robust: self.robust.unwrap_or_default(),
            duration: required(self.duration, "duration")?,
            seed: self.seed.unwrap_or(0),
        };
        scenario.validate()?;
        Ok(scenario)
    }

    fn from_scenario(s: &Scenario) -> Self {
        let perturbation = |m: &PerturbationModel| PerturbationFile {
            sigma_attitude: Some(m.sigma_attitude),
            sigma_attitude_deg: None,
            sigma_position: Some(m.sigma_position),
            ar_coefficient: Some(m.ar_coefficient),
        };
        let policy = match s.policy {
            ReconfigPolicy::FixedPeriod { period_frames } => PolicyFile {
                kind: Some("fixed_period".into()),
                period_frames: Some(period_frames),
                ..Default::default()
            },
            ReconfigPolicy::Adaptive {
                degradation_threshold,
                min_gap_frames,
            } => PolicyFile {
                kind: Some("adaptive".into()),
                degradation_threshold: Some(degradation_threshold),
                min_gap_frames: Some(min_gap_frames),
                ..Default::default()
            },
        };
        ScenarioFile {
            preset: None,
            seed: Some(s.seed),
            duration: Some(s.duration),
            bs_position: Some(s.bs_position.to_array()),
            user_position: Some(s.user_position.to_array()),
            maneuvering: Some(s.maneuvering),
            predict_pose: Some(s.predict_pose),
            proactive_updates: Some(s.proactive_updates),
            carrier: Some(CarrierFile {
                frequency: Some(s.carrier.frequency()),
                frequency_ghz: None,
            }),
            radio: Some(RadioFile {
                tx_power: Some(s.radio.tx_power),
                tx_power_dbm: None,
                noise_power: Some(s.radio.noise_power),
                noise_power_dbm: None,
                calibration_gain: Some(s.radio.calibration_gain),
            }),
            ris: Some(RisFile {
                rows: Some(s.ris.rows),
                cols: Some(s.ris.cols),
                element_spacing: Some(s.ris.element_spacing),
            }),
            trajectory: Some(TrajectoryFile {
                kind: Some(s.trajectory.kind),
                center: Some(s.trajectory.center.to_array()),
                radius: Some(s.trajectory.radius),
                altitude: Some(s.trajectory.altitude),
                speed: Some(s.trajectory.speed),
                speed_kmh: None,
                initial_angle: Some(s.trajectory.initial_angle),
                attitude_rule: Some(s.trajectory.attitude_rule),
            }),
            perturbation: Some(perturbation(&s.perturbation)),
            perturbation_change: s.perturbation_change.as_ref().map(|c| ChangeFile {
                at: Some(c.at),
                model: Some(perturbation(&c.model)),
            }),
            policy: Some(policy),
            overhead: Some(OverheadFile {
                reconfig_time: Some(s.overhead.reconfig_time),
                frame_duration: Some(s.overhead.frame_duration),
            }),
            beamformer: Some(s.beamformer),
            robust: Some(s.robust),
        }
    }
}

const UNIT_ALIASES: [(&str, &str); 5] = [
    ("frequency", "frequency_ghz"),
    ("tx_power", "tx_power_dbm"),
    ("noise_power", "noise_power_dbm"),
    ("speed", "speed_kmh"),
    ("sigma_attitude", "sigma_attitude_deg"),
];

/// Overlays `top` onto `base`; a key given in either unit spelling replaces
/// both spellings underneath, and a `policy` table replaces the base policy whole.
fn overlay(base: &mut Table, top: Table) {
    for key in top.keys() {
        for (si, alias) in UNIT_ALIASES {
            if key == si {
                base.remove(alias);
            } else if key == alias {
                base.remove(si);
            }
        }
    }
    for (key, value) in top {
        match (base.get_mut(&key), value) {
            (Some(Value::Table(b)), Value::Table(t)) if key != "policy" && key != "beamformer" => overlay(b, t),
            (_, v) => {
                base.insert(key, v);
            }
        }
    }
}

fn toml_error(e: impl std::fmt::Display) -> Error {
    Error::config("<file>", e.to_string().trim().replace('\n', " "))
}

/// Parses scenario text.
pub fn parse_scenario(text: &str) -> Result<Scenario> {
    let mut table: Table = text.parse().map_err(toml_error)?;
    if let Some(preset) = table.remove("preset") {
        let name = preset
            .as_str()
            .ok_or_else(|| Error::config("preset", "must be a string"))?;
        let base = presets::by_name(name)?;
        let mut merged: Table = to_toml(&base)
            .parse()
            .map_err(toml_error)?;
        overlay(&mut merged, table);
        table = merged;
    }
    let file: ScenarioFile = Value::Table(table).try_into().map_err(toml_error)?;
    file.into_scenario()
}

pub fn to_toml(s: &Scenario) -> String {
    toml::to_string(&ScenarioFile::from_scenario(s)).expect("scenario serializes to TOML")
}

pub fn load_scenario_file(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).map_err(|e| Error::config(path.display().to_string(), e.to_string()))?;
    parse_scenario(&text)
}

/// Where a scenario comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    Preset(String),
    File(std::path::PathBuf),
}

pub fn load_scenario(source: &ScenarioSource) -> Result<Scenario> {
    match source {
        ScenarioSource::Preset(name) => presets::by_name(name),
        ScenarioSource::File(path) => load_scenario_file(path),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_round_trip() {
        for name in presets::PRESET_NAMES {
            let s = presets::by_name(name).unwrap();
            assert_eq!(parse_scenario(&to_toml(&s)).unwrap(), s, "{name}");
        }
    }

    #[test]
    fn paper_preset_values() {
        let s = load_scenario(&ScenarioSource::Preset("paper-fig5".into())).unwrap();
        assert_eq!(s.ris.element_count(), 100);
        assert_eq!(s.carrier.frequency(), 30e9);
        assert_eq!(s.user_position, Vec3::new(70.0, 0.0, 0.0));
        assert_eq!(s.trajectory.radius, 25.0);
        assert_eq!(s.trajectory.altitude, 20.0);
        assert!((s.radio.tx_power - dbm_to_watts(24.0)).abs() < 1e-15);
        assert!((s.radio.noise_power - 1e-11).abs() < 1e-24);
    }

    #[test]
    fn unknown_preset_is_config_error() {
        let err = load_scenario(&ScenarioSource::Preset("nope".into())).unwrap_err();
        assert!(matches!(err, Error::Config { ref field, .. } if field == "preset"));
    }

    #[test]
    fn negative_radius_names_field() {
        let text = "preset = \"paper-fig5\"\n[trajectory]\nradius = -1.0\n";
        match parse_scenario(text) {
            Err(Error::Config { field, .. }) => assert_eq!(field, "trajectory.radius"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unit_suffixed_keys_convert() {
        let text = r#"
            preset = "paper-fig5"
            [carrier]
            frequency_ghz = 28.0
            [radio]
            tx_power_dbm = 30.0
            [trajectory]
            speed_kmh = 36.0
            [perturbation]
            sigma_attitude_deg = [1.0, 2.0, 3.0]
        "#;
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.carrier.frequency(), 28e9);
        assert!((s.radio.tx_power - 1.0).abs() < 1e-12);
        assert!((s.trajectory.speed - 10.0).abs() < 1e-12);
        assert!((s.perturbation.sigma_attitude[2] - 3f64.to_radians()).abs() < 1e-15);
    }

    #[test]
    fn both_spellings_rejected() {
        let text = "preset = \"paper-fig5\"\n[trajectory]\nspeed = 1.0\nspeed_kmh = 3.6\n";
        assert!(matches!(parse_scenario(text), Err(Error::Config { ref field, .. }) if field == "trajectory.speed"));
    }

    #[test]
    fn missing_field_without_preset() {
        let err = parse_scenario("seed = 3\n").unwrap_err();
        assert!(matches!(err, Error::Config { .. }));
    }

    #[test]
    fn policy_override_replaces_whole_table() {
        let text = "preset = \"paper-fig5\"\n[policy]\nkind = \"fixed_period\"\nperiod_frames = 4\n";
        let s = parse_scenario(text).unwrap();
        assert_eq!(s.policy, ReconfigPolicy::FixedPeriod { period_frames: 4 });
    }

    #[test]
    fn syntax_error_is_config_error() {
        assert!(matches!(parse_scenario("seed = = 3"), Err(Error::Config { .. })));
        assert!(matches!(parse_scenario("bogus_key = 1\n"), Err(Error::Config { .. })));
    }
}
