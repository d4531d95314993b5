use approx::assert_relative_eq;
use ris_a2g::control::{ManeuveringMode, ReconfigPolicy};
use ris_a2g::engine::{compare, run, summarize, sweep_with, Beamformer, Execution, Scenario};
use ris_a2g::geometry::PerturbationModel;
use ris_a2g::presets::{self, KMH};
use ris_a2g::Error;

fn short(mut s: Scenario, seconds: f64) -> Scenario {
    s.duration = seconds;
    s
}

fn fixed(s: &Scenario, period_frames: u64) -> Scenario {
    Scenario {
        policy: ReconfigPolicy::FixedPeriod { period_frames },
        ..s.clone()
    }
}

#[test]
fn hovering_without_jitter_keeps_a_constant_link() {
    let s = short(presets::nomadic_uav().unwrap().with_speed(0.0), 2.0);
    let frames = run(&s).unwrap();
    assert_eq!(frames.len(), 200);
    for f in &frames {
        assert_relative_eq!(f.snr_db, frames[0].snr_db, max_relative = 1e-12);
    }
    // adaptive control never sees a drop, so only the initial configuration happens
    assert_eq!(frames.iter().filter(|f| f.reconfigured).count(), 1);
    assert_relative_eq!(frames[0].snr_db, presets::NOMINAL_SNR_DB, epsilon = 1e-9);
}

#[test]
fn genie_rate_bounds_every_frame() {
    for (label, s) in presets::fig5_variants().unwrap() {
        let s = short(s.with_speed(40.0 * KMH), 3.0);
        let (actual, genie) = (run(&s).unwrap(), run(&s.genie()).unwrap());
        for (a, g) in actual.iter().zip(&genie) {
            assert!(g.rate >= a.rate * (1.0 - 1e-12), "{label} at t={}: {} > {}", a.t, a.rate, g.rate);
            assert_eq!(g.overhead_fraction, 0.0);
        }
    }
}

#[test]
fn overhead_time_matches_reconfiguration_count() {
    let s = short(presets::paper_fig5().unwrap().with_speed(35.0 * KMH), 4.0);
    let frames = run(&s).unwrap();
    let count = frames.iter().filter(|f| f.reconfigured).count();
    let spent: f64 = frames.iter().map(|f| f.overhead_fraction * s.overhead.frame_duration).sum();
    assert!(count > 1);
    assert_relative_eq!(spent, count as f64 * s.overhead.reconfig_time, max_relative = 1e-12);
    for f in &frames {
        assert_relative_eq!(f.effective_rate, (1.0 - f.overhead_fraction) * f.rate, max_relative = 1e-15);
    }
}

#[test]
fn fixed_period_reconfigures_on_schedule() {
    let s = fixed(&short(presets::paper_fig5().unwrap(), 1.0), 7);
    let frames = run(&s).unwrap();
    for (k, f) in frames.iter().enumerate() {
        assert_eq!(f.reconfigured, k % 7 == 0, "frame {k}");
    }
}

#[test]
fn fixed_overhead_does_not_depend_on_speed() {
    let s = fixed(&short(presets::paper_fig5().unwrap(), 2.0), 5);
    let speeds = [5.0 * KMH, 25.0 * KMH, 50.0 * KMH];
    let summary = sweep_with(&s, &speeds, &[1, 2], Execution::Sequential).unwrap();
    let overheads: Vec<f64> = summary.points.iter().map(|p| p.overhead_pct).collect();
    assert!(overheads.iter().all(|&o| o == overheads[0]), "{overheads:?}");
    assert_relative_eq!(overheads[0], 100.0 * 0.75 * 40.0 / 200.0, max_relative = 1e-12);
}

/// Lowest SNR inside each reconfiguration period, in dB.
fn period_minima(snr_db: impl Iterator<Item = f64>, period: usize) -> Vec<f64> {
    let v: Vec<f64> = snr_db.collect();
    v.chunks(period).map(|c| c.iter().copied().fold(f64::INFINITY, f64::min)).collect()
}

#[test]
fn faster_flight_never_raises_the_worst_stale_beam_snr() {
    for mode in [ManeuveringMode::Coupled, ManeuveringMode::FeedbackBased] {
        let mut s = fixed(&short(presets::nomadic_uav().unwrap(), 3.0), 13);
        s.maneuvering = mode;
        let mut last = (f64::INFINITY, f64::INFINITY);
        for kmh in [5.0, 15.0, 25.0, 35.0, 50.0] {
            let at = s.with_speed(kmh * KMH);
            let (f, g) = (run(&at).unwrap(), run(&at.genie()).unwrap());
            let worst = period_minima(f.iter().map(|m| m.snr_db), 13).into_iter().fold(f64::INFINITY, f64::min);
            let loss = period_minima(f.iter().zip(&g).map(|(a, b)| a.snr_db - b.snr_db), 13);
            let mean_loss = loss.iter().sum::<f64>() / loss.len() as f64;
            assert!(worst <= last.0 && mean_loss <= last.1, "{mode:?} at {kmh} km/h");
            last = (worst, mean_loss);
        }
    }
}

#[test]
fn single_point_sweep_equals_summary_of_the_run() {
    let s = short(presets::paper_fig5().unwrap(), 2.0).with_seed(9);
    let speed = 20.0 * KMH;
    let point = sweep_with(&s, &[speed], &[9], Execution::Sequential).unwrap().points[0];
    let at = s.with_speed(speed);
    let direct = summarize(&run(&at).unwrap(), &run(&at.genie()).unwrap()).unwrap();
    assert_eq!(point.mean_rate, direct.mean_rate);
    assert_eq!(point.mean_effective_rate, direct.mean_effective_rate);
    assert_eq!(point.overhead_pct, direct.overhead_pct);
    assert_eq!(point.degradation_pct, direct.degradation_pct);
    assert_eq!(point.reconfig_count, direct.reconfig_count as f64);
}

#[test]
fn seeds_are_reproducible_and_distinct() {
    let s = short(presets::paper_fig5().unwrap(), 1.0);
    assert_eq!(run(&s).unwrap(), run(&s).unwrap());
    assert_ne!(run(&s).unwrap(), run(&s.with_seed(2)).unwrap());
}

#[test]
fn parallel_and_sequential_sweeps_agree() {
    let variants: Vec<_> = presets::fig5_variants()
        .unwrap()
        .into_iter()
        .map(|(l, s)| (l, short(s, 1.0)))
        .collect();
    let speeds = [10.0 * KMH, 45.0 * KMH];
    let a = compare(&variants, &speeds, &[3, 4, 5], Execution::Parallel).unwrap();
    let b = compare(&variants, &speeds, &[3, 4, 5], Execution::Sequential).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.len(), 4);
    assert_eq!(a[2].label, "adaptive_frequent");
}

#[test]
fn robust_beamformer_refreshes_when_statistics_change() {
    let mut s = presets::static_uav().unwrap();
    s.beamformer = Beamformer::Robust { sample_count: 16 };
    s.policy = ReconfigPolicy::FixedPeriod { period_frames: 1000 };
    s.duration = 6.0;
    let frames = run(&s).unwrap();
    let at: Vec<usize> = frames.iter().enumerate().filter(|(_, f)| f.reconfigured).map(|(k, _)| k).collect();
    // the initial configuration plus the proactive push at the 5 s calm-down
    assert_eq!(at, [0, 500]);
    assert!(frames.iter().all(|f| f.snr_db.is_finite()));

    s.proactive_updates = false;
    let lazy = run(&s).unwrap();
    assert_eq!(lazy.iter().filter(|f| f.reconfigured).count(), 1);
}

#[test]
fn calmer_weather_improves_the_hovering_link() {
    let mut s = presets::static_uav().unwrap();
    s.beamformer = Beamformer::Robust { sample_count: 16 };
    s.duration = 10.0;
    let frames = run(&s).unwrap();
    let mean = |r: std::ops::Range<usize>| frames[r.clone()].iter().map(|f| f.rate).sum::<f64>() / r.len() as f64;
    assert!(mean(600..1000) > mean(0..500));
}

#[test]
fn invalid_scenarios_are_rejected_before_running() {
    let mut s = presets::paper_fig5().unwrap();
    s.perturbation = PerturbationModel {
        ar_coefficient: 1.5,
        ..s.perturbation
    };
    assert!(matches!(run(&s), Err(Error::Config { .. })));

    let s = presets::paper_fig5().unwrap();
    assert!(compare(&[], &[1.0], &[1], Execution::Sequential).is_err());
    assert!(compare(&[("x".into(), s)], &[], &[1], Execution::Sequential).is_err());
}
