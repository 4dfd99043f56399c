//! Human-readable and key-value rendering of metrics.

use std::fmt::Write;

use cap_core::MetricsReport;

/// A short table followed by machine-readable `key=value` lines.
pub fn format_report(report: &MetricsReport) -> String {
    let mut out = String::new();
    writeln!(out, "sequences: {}", report.per_video.len()).unwrap();
    writeln!(out, "frames:    {} ({} correct)", report.total_frames, report.correct_frames).unwrap();
    writeln!(out, "MoF:       {:.4}", report.mof).unwrap();
    writeln!(out, "F1:        {:.4}", report.f1).unwrap();
    let mapping: Vec<String> = report
        .mapping
        .targets()
        .iter()
        .enumerate()
        .map(|(c, t)| match t {
            Some(l) => format!("{c}->{l}"),
            None => format!("{c}->-"),
        })
        .collect();
    writeln!(out, "mapping:   {}", mapping.join(" ")).unwrap();
    out.push_str(&key_values(report));
    out
}

pub fn key_values(report: &MetricsReport) -> String {
    format!(
        "mof={}\nf1={}\nframes={}\ncorrect={}\nsequences={}\n",
        report.mof,
        report.f1,
        report.total_frames,
        report.correct_frames,
        report.per_video.len()
    )
}

/// Parses the `key=value` lines of a report.
pub fn parse_key_values(text: &str) -> Vec<(String, String)> {
    text.lines()
        .filter_map(|l| l.split_once('='))
        .filter(|(k, _)| !k.contains(' '))
        .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
        .collect()
}
