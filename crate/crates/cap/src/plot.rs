//! SVG color-bar plots: one horizontal bar per row, one rectangle per
//! segment, a fixed color per label and a legend.

use std::fmt::Write;
use std::fs;
use std::path::Path;

use cap_core::types::segments_of;

use crate::error::LoadError;

const WIDTH: f64 = 800.0;
const ROW_HEIGHT: f64 = 24.0;
const ROW_GAP: f64 = 8.0;
const LABEL_WIDTH: f64 = 120.0;

/// Color of label `id`; hues spaced by the golden angle.
pub fn label_color(id: usize) -> String {
    let hue = (id as f64 * 137.507_764) % 360.0;
    format!("hsl({hue:.1},65%,55%)")
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

/// Renders rows of per-frame label ids. The first row is conventionally the
/// ground truth. `names` gives legend text per label id when available.
pub fn render_svg(rows: &[(&str, &[usize])], names: &[String]) -> String {
    let frames = rows.iter().map(|(_, l)| l.len()).max().unwrap_or(0).max(1);
    let scale = WIDTH / frames as f64;
    let mut labels: Vec<usize> = rows.iter().flat_map(|(_, l)| l.iter().copied()).collect();
    labels.sort_unstable();
    labels.dedup();

    let bars_height = rows.len() as f64 * (ROW_HEIGHT + ROW_GAP);
    let legend_top = bars_height + ROW_GAP;
    let height = legend_top + ROW_HEIGHT;
    let mut svg = String::new();
    writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{}" height="{height}" font-family="sans-serif" font-size="12">"#,
        WIDTH + LABEL_WIDTH
    )
    .unwrap();
    for (r, (title, row)) in rows.iter().enumerate() {
        let y = r as f64 * (ROW_HEIGHT + ROW_GAP);
        writeln!(
            svg,
            r#"<text x="4" y="{:.1}">{}</text>"#,
            y + ROW_HEIGHT * 0.7,
            escape(title)
        )
        .unwrap();
        for seg in segments_of(row) {
            writeln!(
                svg,
                r#"<rect class="seg" data-row="{r}" data-label="{}" x="{:.3}" y="{y:.1}" width="{:.3}" height="{ROW_HEIGHT}" fill="{}"/>"#,
                seg.label,
                LABEL_WIDTH + seg.start as f64 * scale,
                seg.len() as f64 * scale,
                label_color(seg.label)
            )
            .unwrap();
        }
    }
    let mut x = LABEL_WIDTH;
    for &label in &labels {
        let name = names.get(label).cloned().unwrap_or_else(|| label.to_string());
        writeln!(
            svg,
            r#"<rect class="swatch" x="{x:.1}" y="{legend_top:.1}" width="12" height="12" fill="{}"/><text x="{:.1}" y="{:.1}">{}</text>"#,
            label_color(label),
            x + 16.0,
            legend_top + 11.0,
            escape(&name)
        )
        .unwrap();
        x += 28.0 + 7.0 * name.len() as f64;
    }
    svg.push_str("</svg>\n");
    svg
}

/// Writes a plot of `gt` followed by each named prediction row.
pub fn plot_segmentation(
    gt: &[usize],
    predictions: &[(&str, &[usize])],
    names: &[String],
    out_path: &Path,
) -> Result<(), LoadError> {
    let mut rows: Vec<(&str, &[usize])> = vec![("ground truth", gt)];
    rows.extend_from_slice(predictions);
    fs::write(out_path, render_svg(&rows, names)).map_err(LoadError::io(out_path))
}
