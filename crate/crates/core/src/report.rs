//! CSV output for sweep summaries and per-frame series.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::engine::{FrameMetrics, SweepSummary};
use crate::error::{Error, Result};
use crate::presets::KMH;

pub const SUMMARY_HEADER: &str = "speed_kmh,policy,mean_rate_bpshz,overhead_pct,degradation_pct,reconfig_count";
pub const FRAMES_HEADER: &str = "t_s,snr_db,rate_bpshz,effective_rate_bpshz,overhead_frac,reconfigured";

/// Fixed-point rendering with `digits` significant digits (no exponent).
pub fn format_significant(x: f64, digits: u32) -> String {
    if x == 0.0 || !x.is_finite() {
        return if x.is_finite() {
            format!("{:.*}", digits.saturating_sub(1) as usize, 0.0)
        } else {
            x.to_string()
        };
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = |m: i32| (digits as i32 - 1 - m).max(0) as usize;
    let s = format!("{:.*}", decimals(magnitude), x);
    // rounding may carry into the next decade (9.999996 -> 10.00000)
    let rounded: f64 = s.parse().unwrap_or(x);
    if rounded.abs() >= 10f64.powi(magnitude + 1) {
        format!("{:.*}", decimals(magnitude + 1), x)
    } else {
        s
    }
}

fn sig6(x: f64) -> String {
    format_significant(x, 6)
}

pub fn summary_csv(summaries: &[SweepSummary]) -> String {
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for s in summaries {
        for p in &s.points {
            let _ = writeln!(
                out,
                "{},{},{},{},{},{}",
                sig6(p.speed / KMH),
                s.label,
                sig6(p.mean_effective_rate),
                sig6(p.overhead_pct),
                sig6(p.degradation_pct),
                sig6(p.reconfig_count),
            );
        }
    }
    out
}

pub fn frames_csv(frames: &[FrameMetrics]) -> String {
    let mut out = String::from(FRAMES_HEADER);
    out.push('\n');
    for f in frames {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            format_significant(f.t, 9),
            sig6(f.snr_db),
            sig6(f.rate),
            sig6(f.effective_rate),
            sig6(f.overhead_fraction),
            u8::from(f.reconfigured),
        );
    }
    out
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|source| Error::Io {
        path: path.display().to_string(),
        source,
    })
}

/// Writes the summary CSV and, when given, the per-frame CSV.
pub fn write_results(
    summaries: &[SweepSummary],
    per_frame: Option<(&[FrameMetrics], &Path)>,
    summary_path: &Path,
) -> Result<()> {
    write_file(summary_path, &summary_csv(summaries))?;
    if let Some((frames, path)) = per_frame {
        write_file(path, &frames_csv(frames))?;
    }
    Ok(())
}

/// One parsed row of a summary CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct SummaryRow {
    pub speed_kmh: f64,
    pub policy: String,
    pub mean_rate: f64,
    pub overhead_pct: f64,
    pub degradation_pct: f64,
    pub reconfig_count: f64,
}

pub fn parse_summary_csv(text: &str) -> Result<Vec<SummaryRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == SUMMARY_HEADER => {}
        other => {
            return Err(Error::invalid(format!(
                "unexpected summary header {:?}",
                other.unwrap_or("")
            )))
        }
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let cols: Vec<&str> = line.split(',').collect();
            if cols.len() != 6 {
                return Err(Error::invalid(format!("row {} has {} columns", i + 1, cols.len())));
            }
            let num = |k: usize| {
                cols[k]
                    .parse::<f64>()
                    .map_err(|e| Error::invalid(format!("row {} column {k}: {e}", i + 1)))
            };
            Ok(SummaryRow {
                speed_kmh: num(0)?,
                policy: cols[1].to_string(),
                mean_rate: num(2)?,
                overhead_pct: num(3)?,
                degradation_pct: num(4)?,
                reconfig_count: num(5)?,
            })
        })
        .collect()
}
