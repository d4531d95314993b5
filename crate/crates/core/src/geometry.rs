//! Rigid-body geometry of the UAV-mounted surface.
//!
//! World frame is right-handed with `z` as altitude. Attitudes use the intrinsic
//! Z-Y-X convention: yaw about body `z`, then pitch about the new `y`, then roll
//! about the resulting `x`, so `R = Rz(yaw) * Ry(pitch) * Rx(roll)` maps body
//! coordinates to world coordinates.

use std::f64::consts::{PI, TAU};
use std::ops::{Add, Mul, Neg, Sub};

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::ris::RisSpec;

/// Point or displacement in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const ZERO: Vec3 = Vec3::new(0.0, 0.0, 0.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, other: Vec3) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from([x, y, z]: [f64; 3]) -> Self {
        Vec3 { x, y, z }
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Row-major 3x3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3(pub [[f64; 3]; 3]);

impl Mat3 {
    pub const IDENTITY: Mat3 = Mat3([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]);

    pub fn transpose(&self) -> Mat3 {
        let m = &self.0;
        Mat3([
            [m[0][0], m[1][0], m[2][0]],
            [m[0][1], m[1][1], m[2][1]],
            [m[0][2], m[1][2], m[2][2]],
        ])
    }

    pub fn determinant(&self) -> f64 {
        let m = &self.0;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn apply(&self, v: Vec3) -> Vec3 {
        let m = &self.0;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    /// Largest absolute entry of `self - other`.
    pub fn max_abs_diff(&self, other: &Mat3) -> f64 {
        let mut worst = 0.0_f64;
        for i in 0..3 {
            for j in 0..3 {
                worst = worst.max((self.0[i][j] - other.0[i][j]).abs());
            }
        }
        worst
    }
}

impl Mul for Mat3 {
    type Output = Mat3;
    fn mul(self, o: Mat3) -> Mat3 {
        let mut out = [[0.0; 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = (0..3).map(|k| self.0[i][k] * o.0[k][j]).sum();
            }
        }
        Mat3(out)
    }
}

/// Wraps an angle into the canonical range (-pi, pi].
pub fn wrap_angle(angle: f64) -> f64 {
    let r = angle.rem_euclid(TAU);
    if r > PI {
        r - TAU
    } else {
        r
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Attitude {
    pub yaw: f64,
    pub pitch: f64,
    pub roll: f64,
}

impl Attitude {
    pub const LEVEL: Attitude = Attitude {
        yaw: 0.0,
        pitch: 0.0,
        roll: 0.0,
    };

    /// Builds an attitude with every angle wrapped into (-pi, pi].
    pub fn new(yaw: f64, pitch: f64, roll: f64) -> Self {
        Attitude {
            yaw: wrap_angle(yaw),
            pitch: wrap_angle(pitch),
            roll: wrap_angle(roll),
        }
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.yaw, self.pitch, self.roll]
    }

    /// Adds small angular offsets axis by axis and re-wraps.
    pub fn offset_by(self, delta: Attitude) -> Attitude {
        Attitude::new(
            self.yaw + delta.yaw,
            self.pitch + delta.pitch,
            self.roll + delta.roll,
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Pose {
    pub position: Vec3,
    pub attitude: Attitude,
}

impl Pose {
    pub fn new(position: Vec3, attitude: Attitude) -> Self {
        Pose { position, attitude }
    }

    /// Applies a perturbation offset (translation plus attitude jitter).
    pub fn perturbed(&self, offset: &PerturbationState) -> Pose {
        Pose {
            position: self.position + offset.position,
            attitude: self.attitude.offset_by(offset.attitude),
        }
    }
}

/// Body-to-world rotation for an attitude, `Rz(yaw) * Ry(pitch) * Rx(roll)`.
pub fn rotation_matrix(att: Attitude) -> Mat3 {
    let (sy, cy) = att.yaw.sin_cos();
    let (sp, cp) = att.pitch.sin_cos();
    let (sr, cr) = att.roll.sin_cos();
    Mat3([
        [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
        [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
        [-sp, cp * sr, cp * cr],
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrajectoryKind {
    Static,
    Circular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AttitudeRule {
    /// Zero nominal attitude; the surface stays horizontal.
    #[default]
    Level,
    /// Body `x` axis points at the trajectory center.
    FaceCenter,
}

/// Parametric UAV path. Circular paths run counterclockwise (seen from above)
/// starting at `initial_angle` measured from `+x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySpec {
    pub kind: TrajectoryKind,
    pub center: Vec3,
    pub radius: f64,
    pub altitude: f64,
    pub speed: f64,
    pub initial_angle: f64,
    pub attitude_rule: AttitudeRule,
}

impl TrajectorySpec {
    pub fn validate(&self) -> Result<()> {
        if !self.center.is_finite() {
            return Err(Error::config("trajectory.center", "must be finite"));
        }
        let positive_radius = match self.kind {
            TrajectoryKind::Circular => self.radius > 0.0,
            TrajectoryKind::Static => self.radius >= 0.0,
        };
        if !self.radius.is_finite() || !positive_radius {
            return Err(Error::config(
                "trajectory.radius",
                format!("must be > 0 for circular and >= 0 for static, got {}", self.radius),
            ));
        }
        if !self.altitude.is_finite() {
            return Err(Error::config("trajectory.altitude", "must be finite"));
        }
        if !self.speed.is_finite() || self.speed < 0.0 {
            return Err(Error::config(
                "trajectory.speed",
                format!("must be >= 0, got {}", self.speed),
            ));
        }
        if !self.initial_angle.is_finite() {
            return Err(Error::config("trajectory.initial_angle", "must be finite"));
        }
        Ok(())
    }

    /// Angular position on the circle at time `t`.
    fn phase_at(&self, t: f64) -> f64 {
        match self.kind {
            TrajectoryKind::Static => self.initial_angle,
            TrajectoryKind::Circular => self.initial_angle + self.speed * t / self.radius,
        }
    }

    /// Time for one full lap; `None` when the UAV does not move.
    pub fn lap_time(&self) -> Option<f64> {
        match self.kind {
            TrajectoryKind::Circular if self.speed > 0.0 => Some(TAU * self.radius / self.speed),
            _ => None,
        }
    }
}

pub fn pose_at_time(t: f64, traj: &TrajectorySpec) -> Pose {
    let phi = traj.phase_at(t);
    let (s, c) = phi.sin_cos();
    let position = Vec3::new(
        traj.center.x + traj.radius * c,
        traj.center.y + traj.radius * s,
        traj.altitude,
    );
    let attitude = match traj.attitude_rule {
        AttitudeRule::Level => Attitude::LEVEL,
        AttitudeRule::FaceCenter => Attitude::new(phi + PI, 0.0, 0.0),
    };
    Pose { position, attitude }
}

/// Element offsets in the body frame: a centered `rows x cols` grid in the
/// local x-y plane, row-major.
pub fn local_element_offsets(ris: &RisSpec) -> Vec<Vec3> {
    let row_mid = (ris.rows as f64 - 1.0) / 2.0;
    let col_mid = (ris.cols as f64 - 1.0) / 2.0;
    let mut out = Vec::with_capacity(ris.element_count());
    for r in 0..ris.rows {
        for c in 0..ris.cols {
            out.push(Vec3::new(
                (c as f64 - col_mid) * ris.element_spacing,
                (r as f64 - row_mid) * ris.element_spacing,
                0.0,
            ));
        }
    }
    out
}

pub fn element_positions(ris: &RisSpec, pose: &Pose) -> Vec<Vec3> {
    let rot = rotation_matrix(pose.attitude);
    local_element_offsets(ris)
        .into_iter()
        .map(|p| pose.position + rot.apply(p))
        .collect()
}

/// Stationary AR(1) jitter: per-axis attitude and position standard
/// deviations plus a shared lag-1 correlation coefficient.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PerturbationModel {
    /// Yaw, pitch, roll standard deviations in radians.
    pub sigma_attitude: [f64; 3],
    /// x, y, z standard deviations in meters.
    pub sigma_position: [f64; 3],
    pub ar_coefficient: f64,
}

impl PerturbationModel {
    pub const NONE: PerturbationModel = PerturbationModel {
        sigma_attitude: [0.0; 3],
        sigma_position: [0.0; 3],
        ar_coefficient: 0.0,
    };

    pub fn validate(&self, path: &str) -> Result<()> {
        for (name, sigmas) in [
            ("sigma_attitude", &self.sigma_attitude),
            ("sigma_position", &self.sigma_position),
        ] {
            if sigmas.iter().any(|s| !s.is_finite() || *s < 0.0) {
                return Err(Error::config(
                    format!("{path}.{name}"),
                    "all sigmas must be finite and >= 0",
                ));
            }
        }
        if !(0.0..1.0).contains(&self.ar_coefficient) {
            return Err(Error::config(
                format!("{path}.ar_coefficient"),
                format!("must lie in [0, 1), got {}", self.ar_coefficient),
            ));
        }
        Ok(())
    }

    pub fn is_zero(&self) -> bool {
        self.sigma_attitude.iter().chain(&self.sigma_position).all(|s| *s == 0.0)
    }
}

/// Current jitter offsets carried between frames.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct PerturbationState {
    pub attitude: Attitude,
    pub position: Vec3,
}

impl PerturbationState {
    /// Draws a state from the stationary distribution (independent Gaussians).
    pub fn stationary<R: Rng + ?Sized>(model: &PerturbationModel, rng: &mut R) -> Self {
        let [a0, a1, a2] = model.sigma_attitude.map(|s| s * rng.sample::<f64, _>(StandardNormal));
        let [p0, p1, p2] = model.sigma_position.map(|s| s * rng.sample::<f64, _>(StandardNormal));
        PerturbationState {
            attitude: Attitude {
                yaw: a0,
                pitch: a1,
                roll: a2,
            },
            position: Vec3::new(p0, p1, p2),
        }
    }
}

impl PerturbationState {
    /// The mirrored offset `-x`, exactly as likely as `x` under the zero-mean model.
    pub fn negated(&self) -> Self {
        PerturbationState {
            attitude: Attitude {
                yaw: -self.attitude.yaw,
                pitch: -self.attitude.pitch,
                roll: -self.attitude.roll,
            },
            position: Vec3::ZERO - self.position,
        }
    }
}

/// `count` stationary draws in mirrored pairs `x, -x` (the last one unpaired if `count` is odd).
///
/// Pairing cancels the odd-order terms of the sampling error in sample
/// averages, which otherwise dominate when the jitter is small.
pub fn antithetic_draws<R: Rng + ?Sized>(model: &PerturbationModel, count: usize, rng: &mut R) -> Vec<PerturbationState> {
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let x = PerturbationState::stationary(model, rng);
        out.push(x);
        if out.len() < count {
            out.push(x.negated());
        }
    }
    out
}

/// One AR(1) step per scalar: `x <- rho * x + sqrt(1 - rho^2) * sigma * w`.
///
/// Offsets are not wrapped; they are small jitter values added to a nominal attitude.
pub fn step_perturbation<R: Rng + ?Sized>(
    model: &PerturbationModel,
    state: &PerturbationState,
    rng: &mut R,
) -> PerturbationState {
    let rho = model.ar_coefficient;
    let innov = (1.0 - rho * rho).sqrt();
    let mut step = |x: f64, sigma: f64| {
        let w: f64 = rng.sample(StandardNormal);
        rho * x + innov * sigma * w
    };
    let [sy, sp, sr] = model.sigma_attitude;
    let [sx, sy_pos, sz] = model.sigma_position;
    let attitude = Attitude {
        yaw: step(state.attitude.yaw, sy),
        pitch: step(state.attitude.pitch, sp),
        roll: step(state.attitude.roll, sr),
    };
    let position = Vec3::new(
        step(state.position.x, sx),
        step(state.position.y, sy_pos),
        step(state.position.z, sz),
    );
    PerturbationState { attitude, position }
}
