//! Prints the four-curve speed study for a given set of control-loop knobs.
//!
//! usage: calibrate FRAME RECONFIG K_FREQ K_REG DELTA_FREQ DELTA_REG MIN_GAP SIGMA_DEG RHO SEEDS [-v]
//!
//! Set `PREDICT=0` to disable pose extrapolation.

use std::time::Instant;

use ris_a2g::control::ReconfigPolicy;
use ris_a2g::engine::{compare, Execution, Scenario, SweepSummary};
use ris_a2g::presets::{self, KMH};
use ris_a2g::stats::spearman;

fn adaptive_verdict(s: &SweepSummary) -> String {
    let ovh: Vec<f64> = s.points.iter().map(|p| p.overhead_pct).collect();
    let in_band = ovh.iter().filter(|o| (5.0..=15.0).contains(*o)).count();
    let max_deg = s.points.iter().map(|p| p.degradation_pct).fold(f64::MIN, f64::max);
    let sp: Vec<f64> = s.points.iter().map(|p| p.speed).collect();
    let n: Vec<f64> = s.points.iter().map(|p| p.reconfig_count).collect();
    format!(
        "{}: ovh {:.2}..{:.2} band {} maxdeg {:.2} rho {:.3}",
        s.label,
        ovh[0],
        ovh[ovh.len() - 1],
        in_band,
        max_deg,
        spearman(&sp, &n).unwrap_or(f64::NAN)
    )
}

fn fixed_verdict(s: &SweepSummary) -> String {
    let strict = s.points.windows(2).all(|w| w[1].mean_effective_rate < w[0].mean_effective_rate);
    format!("{}: ovh {:.2} decreasing {}", s.label, s.points[0].overhead_pct, strict)
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let verbose = args.iter().any(|a| a == "-v");
    let a: Vec<f64> = args.iter().filter(|a| *a != "-v").map(|s| s.parse().unwrap()).collect();
    let mut base = presets::paper_fig5()?;
    base.overhead.frame_duration = a[0];
    base.overhead.reconfig_time = a[1];
    let sigma = a[7].to_radians();
    base.perturbation.sigma_attitude = [sigma; 3];
    base.perturbation.ar_coefficient = a[8];
    base.predict_pose = std::env::var("PREDICT").map_or(true, |v| v != "0");
    let seeds: Vec<u64> = (1..=a[9] as u64).collect();
    let with = |p| Scenario { policy: p, ..base.clone() };
    let variants = vec![
        ("fixed_frequent".to_string(), with(ReconfigPolicy::FixedPeriod { period_frames: a[2] as u64 })),
        ("fixed_regular".to_string(), with(ReconfigPolicy::FixedPeriod { period_frames: a[3] as u64 })),
        ("adaptive_frequent".to_string(), with(ReconfigPolicy::Adaptive { degradation_threshold: a[4], min_gap_frames: a[6] as u64 })),
        ("adaptive_regular".to_string(), with(ReconfigPolicy::Adaptive { degradation_threshold: a[5], min_gap_frames: a[6] as u64 })),
    ];
    let start = Instant::now();
    let out = compare(&variants, &presets::fig5_speeds_mps(), &seeds, Execution::default())?;
    let elapsed = start.elapsed().as_secs_f64();
    if verbose {
        for s in &out {
            println!("{}", s.label);
            for p in &s.points {
                println!(
                    "  {:5.1} km/h  eff {:.5}  rate {:.5}  genie {:.5}  ovh {:6.3}%  degr {:6.3}%  n {:8.1}",
                    p.speed / KMH, p.mean_effective_rate, p.mean_rate, p.mean_genie_effective_rate, p.overhead_pct, p.degradation_pct, p.reconfig_count
                );
            }
        }
    }
    let (ff, af) = (&out[0].points[0], &out[2].points[0]);
    println!(
        "{:?} [{elapsed:.1}s]\n  {} | {}\n  {} | {}\n  crossover: eff {:.4} vs {:.4}  rate {:.4} vs {:.4}  ovh {:.2} vs {:.2}",
        a,
        fixed_verdict(&out[0]),
        fixed_verdict(&out[1]),
        adaptive_verdict(&out[2]),
        adaptive_verdict(&out[3]),
        ff.mean_effective_rate,
        af.mean_effective_rate,
        ff.mean_rate,
        af.mean_rate,
        ff.overhead_pct,
        af.overhead_pct
    );
    Ok(())
}
