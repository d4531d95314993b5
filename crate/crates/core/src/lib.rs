//! Link-level simulator for a UAV carrying a reconfigurable intelligent
//! surface that relays a single-antenna base station to a ground user.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`]: trajectories, attitude rotations, surface element layout and jitter.
//! * [`channel`]: free-space cascaded channel, SNR and spectral efficiency.
//! * [`ris`]: phase-only beamforming (conjugate, robust, quantized, exhaustive).
//! * [`control`]: reconfiguration policies, overhead and pose prediction.
//! * [`engine`]: the frame loop, speed sweeps and summaries.
//! * [`presets`]: ready-made scenarios, including the 100-element circular-flight study.
//! * [`config`] and [`report`]: scenario files and CSV output.

pub mod channel;
pub mod config;
pub mod control;
pub mod engine;
pub mod error;
pub mod geometry;
pub mod presets;
pub mod report;
pub mod ris;
pub mod stats;

pub use error::{Error, Result};
