//! Phase-only (passive) beamforming for the surface.
//!
//! Every element applies a unit-modulus reflection `exp(j theta_n)`. For a
//! single known channel the optimum is conjugate matching. When the surface
//! pose is uncertain, [`robust_phases`] maximizes the received power averaged
//! over channel samples drawn from the perturbation statistics.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::channel::{combine, ChannelCoefficients};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RisSpec {
    pub rows: usize,
    pub cols: usize,
    /// Meters between neighbouring elements.
    pub element_spacing: f64,
}

impl RisSpec {
    pub fn new(rows: usize, cols: usize, element_spacing: f64) -> Result<Self> {
        let spec = RisSpec {
            rows,
            cols,
            element_spacing,
        };
        spec.validate()?;
        Ok(spec)
    }

    /// Half-wavelength spaced square-ish grid.
    pub fn half_wavelength(rows: usize, cols: usize, wavelength: f64) -> Result<Self> {
        Self::new(rows, cols, wavelength / 2.0)
    }

    pub fn validate(&self) -> Result<()> {
        if self.rows < 1 {
            return Err(Error::config("ris.rows", "must be >= 1"));
        }
        if self.cols < 1 {
            return Err(Error::config("ris.cols", "must be >= 1"));
        }
        if !(self.element_spacing.is_finite() && self.element_spacing > 0.0) {
            return Err(Error::config(
                "ris.element_spacing",
                format!("must be > 0, got {}", self.element_spacing),
            ));
        }
        Ok(())
    }

    pub fn element_count(&self) -> usize {
        self.rows * self.cols
    }
}

/// Reflection phases in `[0, 2 pi)`, one per element.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseConfig(Vec<f64>);

/// Reduces an angle into `[0, 2 pi)`.
pub fn normalize_phase(theta: f64) -> f64 {
    let r = theta.rem_euclid(TAU) + 0.0;
    // rem_euclid can round up to exactly 2 pi for tiny negative inputs
    if r >= TAU {
        0.0
    } else {
        r
    }
}

impl PhaseConfig {
    pub fn new(phases: Vec<f64>) -> Result<Self> {
        if let Some((n, p)) = phases
            .iter()
            .enumerate()
            .find(|(_, p)| !(p.is_finite() && (0.0..TAU).contains(*p)))
        {
            return Err(Error::invalid(format!("phase {n} = {p} is outside [0, 2pi)")));
        }
        Ok(PhaseConfig(phases))
    }

    /// Wraps arbitrary finite angles into range.
    pub fn from_angles(angles: impl IntoIterator<Item = f64>) -> Self {
        PhaseConfig(angles.into_iter().map(normalize_phase).collect())
    }

    pub fn zeros(n: usize) -> Self {
        PhaseConfig(vec![0.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Unit phasors `exp(j theta_n)`.
    pub fn phasors(&self) -> Vec<Complex64> {
        self.0.iter().map(|&t| Complex64::from_polar(1.0, t)).collect()
    }
}

/// Conjugate matching `theta_n = -arg(c_n) mod 2 pi`. Zero coefficients get phase 0.
pub fn conjugate_phases(channel: &ChannelCoefficients) -> PhaseConfig {
    PhaseConfig(
        channel
            .as_slice()
            .iter()
            .map(|c| if c.norm_sqr() == 0.0 { 0.0 } else { normalize_phase(-c.arg()) })
            .collect(),
    )
}

/// Sample-average received power `(1/S) sum_s |sum_n c_n^(s) exp(j theta_n)|^2`.
pub fn average_power(samples: &[ChannelCoefficients], phases: &PhaseConfig) -> Result<f64> {
    check_samples(samples, Some(phases.len()))?;
    let w = phases.phasors();
    let total: f64 = samples
        .iter()
        .map(|s| combine(s.as_slice(), &w).norm_sqr())
        .sum();
    Ok(total / samples.len() as f64)
}

fn check_samples(samples: &[ChannelCoefficients], expected: Option<usize>) -> Result<usize> {
    let first = samples
        .first()
        .ok_or_else(|| Error::invalid("channel sample set is empty"))?;
    let n = expected.unwrap_or(first.len());
    if n == 0 {
        return Err(Error::invalid("channel has no elements"));
    }
    if let Some(bad) = samples.iter().position(|s| s.len() != n) {
        return Err(Error::invalid(format!(
            "sample {bad} has {} elements, expected {n}",
            samples[bad].len()
        )));
    }
    Ok(n)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RobustOptions {
    pub max_iters: usize,
    /// Initial per-iteration phase step in radians (largest element move).
    pub step: f64,
    /// Stop once the relative objective gain of an iteration falls below this.
    pub tolerance: f64,
}

impl Default for RobustOptions {
    fn default() -> Self {
        RobustOptions {
            max_iters: 500,
            step: 0.1,
            tolerance: 1e-8,
        }
    }
}

/// Result of a robust solve with the objective after every accepted iterate.
#[derive(Debug, Clone)]
pub struct RobustSolution {
    pub phases: PhaseConfig,
    /// `trace[0]` is the objective at the initial point.
    pub trace: Vec<f64>,
}

/// Hermitian second-moment matrix `R = (1/S) sum_s conj(c_s) c_s^T`, row-major.
struct Covariance {
    n: usize,
    data: Vec<Complex64>,
}

impl Covariance {
    fn from_samples(samples: &[ChannelCoefficients], n: usize) -> Self {
        let mut data = vec![Complex64::new(0.0, 0.0); n * n];
        for s in samples {
            let c = s.as_slice();
            for m in 0..n {
                let cm = c[m].conj();
                let row = &mut data[m * n..(m + 1) * n];
                for (r, cn) in row.iter_mut().zip(c) {
                    *r += cm * cn;
                }
            }
        }
        let scale = 1.0 / samples.len() as f64;
        data.iter_mut().for_each(|x| *x *= scale);
        Covariance { n, data }
    }

    fn apply(&self, v: &[Complex64], out: &mut [Complex64]) {
        for (m, o) in out.iter_mut().enumerate() {
            let row = &self.data[m * self.n..(m + 1) * self.n];
            *o = row.iter().zip(v).map(|(r, x)| r * x).sum();
        }
    }

    /// Returns `v^H R v` and fills `rv` with `R v`.
    fn objective(&self, v: &[Complex64], rv: &mut [Complex64]) -> f64 {
        self.apply(v, rv);
        v.iter().zip(rv.iter()).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

fn phasors_of(theta: &[f64]) -> Vec<Complex64> {
    theta.iter().map(|&t| Complex64::from_polar(1.0, t)).collect()
}

/// Projected gradient ascent on the phases of the sample-average power.
///
/// Starts from conjugate matching of the element-wise mean channel. Each
/// iteration moves along the gradient scaled so the largest phase change is
/// `opts.step`, halving the step until the objective does not decrease.
pub fn robust_phases(samples: &[ChannelCoefficients], opts: &RobustOptions) -> Result<PhaseConfig> {
    robust_phases_traced(samples, opts).map(|s| s.phases)
}

pub fn robust_phases_traced(
    samples: &[ChannelCoefficients],
    opts: &RobustOptions,
) -> Result<RobustSolution> {
    let n = check_samples(samples, None)?;
    if !(opts.step.is_finite() && opts.step > 0.0) {
        return Err(Error::invalid(format!("step must be > 0, got {}", opts.step)));
    }
    if !(opts.tolerance.is_finite() && opts.tolerance >= 0.0) {
        return Err(Error::invalid("tolerance must be >= 0"));
    }

    let cov = Covariance::from_samples(samples, n);
    let mut theta = conjugate_phases(&ChannelCoefficients::mean(samples)?).0;
    let mut v = phasors_of(&theta);
    let mut rv = vec![Complex64::new(0.0, 0.0); n];
    let mut scratch = vec![Complex64::new(0.0, 0.0); n];
    let mut f = cov.objective(&v, &mut rv);
    let mut trace = vec![f];

    for _ in 0..opts.max_iters {
        // d f / d theta_n = -2 Im(v_n conj((R v)_n))
        let grad: Vec<f64> = v
            .iter()
            .zip(&rv)
            .map(|(vn, rn)| -2.0 * (vn * rn.conj()).im)
            .collect();
        let gmax = grad.iter().fold(0.0_f64, |a, g| a.max(g.abs()));
        if !(gmax > 0.0) || gmax <= f.abs() * 1e-14 {
            break;
        }

        let mut step = opts.step;
        let mut accepted = None;
        while step > 1e-12 {
            let cand: Vec<f64> = theta.iter().zip(&grad).map(|(t, g)| t + step * g / gmax).collect();
            let vc = phasors_of(&cand);
            let fc = cov.objective(&vc, &mut scratch);
            if fc > f {
                accepted = Some((cand, vc, fc));
                break;
            }
            step *= 0.5;
        }
        let Some((cand, vc, fc)) = accepted else {
            break;
        };
        let gain = (fc - f) / f.abs().max(f64::MIN_POSITIVE);
        theta = cand;
        v = vc;
        std::mem::swap(&mut rv, &mut scratch);
        f = fc;
        trace.push(f);
        if gain < opts.tolerance {
            break;
        }
    }

    Ok(RobustSolution {
        phases: PhaseConfig::from_angles(theta),
        trace,
    })
}

pub const MAX_QUANT_BITS: u32 = 16;

fn check_bits(bits: u32) -> Result<usize> {
    if !(1..=MAX_QUANT_BITS).contains(&bits) {
        return Err(Error::invalid(format!(
            "phase resolution must be 1..={MAX_QUANT_BITS} bits, got {bits}"
        )));
    }
    Ok(1usize << bits)
}

/// Snaps each phase to the nearest of `2^bits` uniformly spaced levels.
pub fn quantize_phases(config: &PhaseConfig, bits: u32) -> Result<PhaseConfig> {
    let levels = check_bits(bits)?;
    let delta = TAU / levels as f64;
    Ok(PhaseConfig(
        config
            .as_slice()
            .iter()
            .map(|&t| ((t / delta).round() as usize % levels) as f64 * delta)
            .collect(),
    ))
}

/// Largest search space [`brute_force_phases`] accepts.
pub const BRUTE_FORCE_LIMIT: u64 = 1 << 20;

/// Exhaustive maximization of the sample-average power over the discrete grid.
///
/// Candidates are visited in lexicographic order and a later candidate only
/// wins if it beats the incumbent by more than one part in 1e12, so ties
/// resolve to the lexicographically smallest phase vector.
pub fn brute_force_phases(samples: &[ChannelCoefficients], bits: u32) -> Result<PhaseConfig> {
    let n = check_samples(samples, None)?;
    let levels = check_bits(bits)?;
    let space = (levels as u64).checked_pow(n as u32);
    if n > 4 || space.is_none_or(|s| s > BRUTE_FORCE_LIMIT) {
        return Err(Error::Capacity(format!(
            "{n} elements at {bits} bits exceeds the exhaustive search limit"
        )));
    }

    let delta = TAU / levels as f64;
    let level_phasor: Vec<Complex64> = (0..levels)
        .map(|l| Complex64::from_polar(1.0, l as f64 * delta))
        .collect();
    let mut idx = vec![0usize; n];
    let mut best_idx = Vec::new();
    let mut best = 0.0_f64;
    let mut w = vec![Complex64::new(0.0, 0.0); n];
    loop {
        for (wn, &i) in w.iter_mut().zip(&idx) {
            *wn = level_phasor[i];
        }
        let f: f64 = samples
            .iter()
            .map(|s| combine(s.as_slice(), &w).norm_sqr())
            .sum::<f64>()
            / samples.len() as f64;
        if best_idx.is_empty() || f > best + best.abs() * 1e-12 {
            best = f;
            best_idx.clone_from(&idx);
        }
        // odometer increment, last element fastest
        let mut pos = n;
        loop {
            if pos == 0 {
                return Ok(PhaseConfig(best_idx.iter().map(|&i| i as f64 * delta).collect()));
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < levels {
                break;
            }
            idx[pos] = 0;
        }
    }
}
