//! Free-space line-of-sight channel through the surface.
//!
//! Each hop follows the Friis amplitude `lambda / (4 pi d)` with isotropic
//! unit-gain elements. Absolute-level constants not captured by that model
//! (element aperture, antenna gains) are folded into
//! [`RadioParams::calibration_gain`].

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Vec3;
use crate::ris::PhaseConfig;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn wavelength(frequency: f64) -> Result<f64> {
    if !(frequency.is_finite() && frequency > 0.0) {
        return Err(Error::invalid(format!("frequency must be > 0, got {frequency}")));
    }
    Ok(SPEED_OF_LIGHT / frequency)
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf((dbm - 30.0) / 10.0)
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * watts.log10() + 30.0
}

pub fn to_db(linear: f64) -> f64 {
    10.0 * linear.log10()
}

pub fn from_db(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CarrierSpec {
    frequency: f64,
    wavelength: f64,
}

impl CarrierSpec {
    pub fn new(frequency: f64) -> Result<Self> {
        Ok(CarrierSpec {
            frequency,
            wavelength: wavelength(frequency)?,
        })
    }

    pub fn frequency(&self) -> f64 {
        self.frequency
    }

    pub fn wavelength(&self) -> f64 {
        self.wavelength
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadioParams {
    /// Watts.
    pub tx_power: f64,
    /// Total in-band noise power, watts.
    pub noise_power: f64,
    pub calibration_gain: f64,
}

impl RadioParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("radio.tx_power", self.tx_power),
            ("radio.noise_power", self.noise_power),
            ("radio.calibration_gain", self.calibration_gain),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::config(name, format!("must be > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Per-element cascaded gains BS -> element -> user.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelCoefficients(pub Vec<Complex64>);

impl ChannelCoefficients {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Complex64] {
        &self.0
    }

    /// Element-wise mean of several channel realizations.
    pub fn mean(samples: &[ChannelCoefficients]) -> Result<ChannelCoefficients> {
        let first = samples
            .first()
            .ok_or_else(|| Error::invalid("empty channel sample set"))?;
        let n = first.len();
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        for s in samples {
            if s.len() != n {
                return Err(Error::invalid("channel samples differ in length"));
            }
            for (a, c) in acc.iter_mut().zip(&s.0) {
                *a += c;
            }
        }
        let scale = 1.0 / samples.len() as f64;
        Ok(ChannelCoefficients(acc.into_iter().map(|a| a * scale).collect()))
    }
}

/// Free-space amplitude of one hop at distance `d`.
pub fn friis_amplitude(wavelength: f64, d: f64) -> f64 {
    wavelength / (4.0 * PI * d)
}

pub fn cascaded_coefficients(
    bs: Vec3,
    elements: &[Vec3],
    user: Vec3,
    carrier: &CarrierSpec,
    radio: &RadioParams,
) -> Result<ChannelCoefficients> {
    let lambda = carrier.wavelength();
    let k = 2.0 * PI / lambda;
    let scale = radio.calibration_gain.sqrt();
    elements
        .iter()
        .enumerate()
        .map(|(n, &e)| {
            let d1 = bs.distance(e);
            let d2 = e.distance(user);
            if !(d1 > 0.0 && d2 > 0.0) {
                return Err(Error::DegenerateGeometry(format!(
                    "element {n} coincides with an endpoint (d1 = {d1}, d2 = {d2})"
                )));
            }
            let amp = scale * friis_amplitude(lambda, d1) * friis_amplitude(lambda, d2);
            Ok(Complex64::from_polar(amp, -k * (d1 + d2)))
        })
        .collect::<Result<Vec<_>>>()
        .map(ChannelCoefficients)
}

/// Coherent sum `sum_n c_n * w_n` for precomputed unit phasors `w_n`.
pub(crate) fn combine(channel: &[Complex64], phasors: &[Complex64]) -> Complex64 {
    channel.iter().zip(phasors).map(|(c, w)| c * w).sum()
}

pub fn snr(channel: &ChannelCoefficients, phases: &PhaseConfig, radio: &RadioParams) -> Result<f64> {
    if channel.len() != phases.len() {
        return Err(Error::invalid(format!(
            "channel has {} elements but phase config has {}",
            channel.len(),
            phases.len()
        )));
    }
    let phasors = phases.phasors();
    Ok(snr_from_sum(combine(channel.as_slice(), &phasors), radio))
}

pub(crate) fn snr_from_sum(sum: Complex64, radio: &RadioParams) -> f64 {
    radio.tx_power * sum.norm_sqr() / radio.noise_power
}

/// Spectral efficiency left after spending `overhead_fraction` of the frame on control.
pub fn effective_rate(snr: f64, overhead_fraction: f64) -> Result<f64> {
    if !(snr >= 0.0) {
        return Err(Error::invalid(format!("snr must be >= 0, got {snr}")));
    }
    if !(0.0..=1.0).contains(&overhead_fraction) {
        return Err(Error::invalid(format!(
            "overhead fraction must lie in [0, 1], got {overhead_fraction}"
        )));
    }
    Ok((1.0 - overhead_fraction) * (1.0 + snr).log2())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ris::conjugate_phases;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn unit_radio() -> RadioParams {
        RadioParams {
            tx_power: 1.0,
            noise_power: 1.0,
            calibration_gain: 1.0,
        }
    }

    fn random_channel(rng: &mut impl Rng, n: usize) -> ChannelCoefficients {
        ChannelCoefficients(
            (0..n)
                .map(|_| Complex64::from_polar(rng.random_range(0.1..2.0), rng.random_range(-PI..PI)))
                .collect(),
        )
    }

    #[test]
    fn wavelength_values() {
        let l30 = wavelength(30e9).unwrap();
        assert_relative_eq!(l30, 0.00999308193333, max_relative = 1e-9);
        assert_relative_eq!(wavelength(3e9).unwrap(), 0.0999308193333, max_relative = 1e-9);
        assert_relative_eq!(l30 * 30e9, SPEED_OF_LIGHT, max_relative = 1e-15);
        assert!(wavelength(0.0).is_err());
        assert!(wavelength(-1.0).is_err());
    }

    #[test]
    fn dbm_conversions() {
        assert_relative_eq!(dbm_to_watts(30.0), 1.0);
        assert_relative_eq!(dbm_to_watts(-80.0), 1e-11, max_relative = 1e-12);
        assert_relative_eq!(watts_to_dbm(dbm_to_watts(24.0)), 24.0, max_relative = 1e-12);
    }

    #[test]
    fn unit_distance_element_has_unit_gain() {
        let carrier = CarrierSpec::new(30e9).unwrap();
        let lambda = carrier.wavelength();
        let d = lambda / (4.0 * PI);
        let bs = Vec3::new(-d, 0.0, 0.0);
        let user = Vec3::new(0.0, d, 0.0);
        let ch = cascaded_coefficients(bs, &[Vec3::ZERO], user, &carrier, &unit_radio()).unwrap();
        let c = ch.0[0];
        assert_relative_eq!(c.norm(), 1.0, max_relative = 1e-12);
        let expected = Complex64::from_polar(1.0, -2.0 * PI * (2.0 * d) / lambda);
        assert!((c - expected).norm() < 1e-12);
    }

    #[test]
    fn coincident_points_are_rejected() {
        let carrier = CarrierSpec::new(30e9).unwrap();
        let err = cascaded_coefficients(Vec3::ZERO, &[Vec3::ZERO], Vec3::new(1.0, 0.0, 0.0), &carrier, &unit_radio());
        assert!(matches!(err, Err(Error::DegenerateGeometry(_))));
    }

    #[test]
    fn nominal_geometry_amplitude() {
        // BS at origin, user 70 m away, UAV on the 25 m circle at 20 m altitude.
        let carrier = CarrierSpec::new(30e9).unwrap();
        let uav = Vec3::new(95.0, 0.0, 20.0);
        let user = Vec3::new(70.0, 0.0, 0.0);
        let d1 = uav.norm();
        let d2 = uav.distance(user);
        assert_relative_eq!(d1, 97.0824391947, max_relative = 1e-10);
        assert_relative_eq!(d2, 32.0156211872, max_relative = 1e-10);
        let ch = cascaded_coefficients(Vec3::ZERO, &[uav], user, &carrier, &unit_radio()).unwrap();
        // (lambda / 4 pi)^2 / (d1 d2) evaluated independently.
        assert_relative_eq!(ch.0[0].norm(), 2.034588363246776e-10, max_relative = 1e-12);
    }

    #[test]
    fn single_element_snr_ignores_phase() {
        let ch = ChannelCoefficients(vec![Complex64::new(0.3, -0.7)]);
        let radio = unit_radio();
        let base = snr(&ch, &PhaseConfig::zeros(1), &radio).unwrap();
        for k in 0..16 {
            let p = PhaseConfig::new(vec![k as f64 * PI / 8.0]).unwrap();
            assert_relative_eq!(snr(&ch, &p, &radio).unwrap(), base, max_relative = 1e-12);
        }
    }

    #[test]
    fn aligned_equal_magnitudes_sum_coherently() {
        let radio = RadioParams {
            tx_power: 2.0,
            noise_power: 0.5,
            calibration_gain: 1.0,
        };
        let a = 0.25;
        let ch = ChannelCoefficients((0..7).map(|n| Complex64::from_polar(a, 0.9 * n as f64)).collect());
        let p = conjugate_phases(&ch);
        let expected = 2.0 * (7.0 * a) * (7.0 * a) / 0.5;
        assert_relative_eq!(snr(&ch, &p, &radio).unwrap(), expected, max_relative = 1e-12);
    }

    #[test]
    fn snr_matches_direct_recomputation() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let radio = RadioParams {
            tx_power: 0.25,
            noise_power: 1e-3,
            calibration_gain: 1.0,
        };
        for _ in 0..20 {
            let ch = random_channel(&mut rng, 3);
            let th: Vec<f64> = (0..3).map(|_| rng.random_range(0.0..2.0 * PI)).collect();
            // real/imag parts summed by hand
            let (mut re, mut im) = (0.0, 0.0);
            for (c, t) in ch.0.iter().zip(&th) {
                re += c.re * t.cos() - c.im * t.sin();
                im += c.re * t.sin() + c.im * t.cos();
            }
            let oracle = 0.25 * (re * re + im * im) / 1e-3;
            let got = snr(&ch, &PhaseConfig::new(th).unwrap(), &radio).unwrap();
            assert_relative_eq!(got, oracle, max_relative = 1e-12);
        }
    }

    #[test]
    fn snr_rejects_length_mismatch() {
        let ch = ChannelCoefficients(vec![Complex64::new(1.0, 0.0); 3]);
        assert!(snr(&ch, &PhaseConfig::zeros(2), &unit_radio()).is_err());
    }

    #[test]
    fn effective_rate_values() {
        assert_eq!(effective_rate(0.0, 0.0).unwrap(), 0.0);
        assert_relative_eq!(effective_rate(3.0, 0.0).unwrap(), 2.0);
        assert_relative_eq!(effective_rate(3.0, 0.25).unwrap(), 1.5);
        assert!(effective_rate(3.0, 1.5).is_err());
        assert!(effective_rate(3.0, -0.1).is_err());
        assert!(effective_rate(-1.0, 0.0).is_err());
    }
}
