use std::fs;
use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_ris-a2g");

fn ris(args: &[&str]) -> Output {
    Command::new(BIN).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn nomadic_preset_writes_summary_and_frames() {
    let dir = tempfile::tempdir().unwrap();
    let summary = dir.path().join("summary.csv");
    let frames = dir.path().join("frames.csv");
    let out = ris(&[
        "--preset",
        "nomadic-uav",
        "--speeds-kmh",
        "10,30",
        "--seeds",
        "1-2",
        "--out",
        path_str(&summary),
        "--frames-out",
        path_str(&frames),
    ]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));

    let text = fs::read_to_string(&summary).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "speed_kmh,policy,mean_rate_bpshz,overhead_pct,degradation_pct,reconfig_count");
    assert_eq!(lines.len(), 3);
    assert!(lines[1].starts_with("10.0000,adaptive,"));
    assert!(lines[2].starts_with("30.0000,adaptive,"));

    let frames = fs::read_to_string(&frames).unwrap();
    let mut rows = frames.lines();
    assert_eq!(rows.next(), Some("t_s,snr_db,rate_bpshz,effective_rate_bpshz,overhead_frac,reconfigured"));
    // 20 s of 10 ms frames
    assert_eq!(rows.clone().count(), 2000);
    assert!(rows.next().unwrap().ends_with(",1"), "frame 0 always reconfigures");
}

#[test]
fn repeated_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let paths: Vec<_> = (0..2).map(|i| dir.path().join(format!("s{i}.csv"))).collect();
    for p in &paths {
        let out = ris(&["--preset", "nomadic-uav", "--seeds", "4,7", "--out", path_str(p)]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    assert_eq!(fs::read(&paths[0]).unwrap(), fs::read(&paths[1]).unwrap());
}

#[test]
fn sequential_flag_matches_default_execution() {
    let a = ris(&["--preset", "nomadic-uav", "--speeds-kmh", "5,25,45", "--seeds", "1-3"]);
    let b = ris(&["--preset", "nomadic-uav", "--speeds-kmh", "5,25,45", "--seeds", "1-3", "--sequential"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn paper_preset_runs_all_four_curves() {
    let out = ris(&["--preset", "paper-fig5", "--speeds-kmh", "50"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let labels: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(1).unwrap()).collect();
    assert_eq!(labels, ["fixed_frequent", "fixed_regular", "adaptive_frequent", "adaptive_regular"]);
}

#[test]
fn genie_policy_has_no_overhead_or_degradation() {
    let out = ris(&["--preset", "nomadic-uav", "--policy", "genie"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let row: Vec<&str> = text.lines().nth(1).unwrap().split(',').collect();
    assert_eq!(row[1], "genie");
    assert_eq!(row[3], "0.00000");
    assert_eq!(row[4], "0.00000");
    assert_eq!(row[5], "2000.00");
}

#[test]
fn fixed_policy_override_is_labelled() {
    let out = ris(&["--preset", "nomadic-uav", "--policy", "fixed", "--speeds-kmh", "20,40"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    let overheads: Vec<&str> = text
        .lines()
        .skip(1)
        .inspect(|l| assert!(l.contains(",fixed,")))
        .map(|l| l.split(',').nth(3).unwrap())
        .collect();
    assert_eq!(overheads[0], overheads[1]);
}

#[test]
fn config_file_with_preset_overlay() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.toml");
    fs::write(
        &cfg,
        "preset = \"nomadic-uav\"\nduration = 1.0\n\n[trajectory]\nspeed_kmh = 12.0\n\n[policy]\nkind = \"fixed_period\"\nperiod_frames = 10\n",
    )
    .unwrap();
    let out = ris(&["--config", path_str(&cfg)]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let text = String::from_utf8(out.stdout).unwrap();
    // 100 frames, reconfiguring at 0, 10, ..., 90
    assert_eq!(text.lines().nth(1).unwrap().split(',').collect::<Vec<_>>()[..2], ["12.0000", "fixed"]);
    assert!(text.lines().nth(1).unwrap().ends_with(",10.0000"));
}

#[test]
fn negative_radius_is_configuration_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    fs::write(&cfg, "preset = \"paper-fig5\"\n\n[trajectory]\nradius = -1.0\n").unwrap();
    let out = ris(&["--config", path_str(&cfg)]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("trajectory.radius"), "{}", stderr(&out));
}

#[test]
fn unknown_preset_is_configuration_error() {
    let out = ris(&["--preset", "moon-base"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("preset"));
}

#[test]
fn malformed_seed_list_is_configuration_error() {
    let out = ris(&["--preset", "nomadic-uav", "--seeds", "3-x"]);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("--seeds"));
}

#[test]
fn missing_scenario_source_is_usage_error() {
    assert_eq!(code(&ris(&["--seeds", "1"])), 2);
    assert_eq!(code(&ris(&["--preset", "nomadic-uav", "--config", "x.toml"])), 2);
}

#[test]
fn unwritable_output_is_io_error() {
    let out = ris(&["--preset", "nomadic-uav", "--out", "/nonexistent-dir/summary.csv"]);
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("/nonexistent-dir/summary.csv"));
}
