//! Gantt charts: machines as rows, time running left to right.

use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::model::Time;
use crate::scheduler::Schedule;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GanttFormat {
    Text,
    Svg,
}

impl FromStr for GanttFormat {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "text" | "txt" => Ok(GanttFormat::Text),
            "svg" => Ok(GanttFormat::Svg),
            other => Err(format!(
                "unknown gantt format `{other}` (expected text or svg)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GanttError {
    #[error("SCALE_TOO_SMALL: chart needs {needed} columns but the width limit is {max_width}")]
    ScaleTooSmall { needed: usize, max_width: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TextOptions {
    /// Characters per time unit.
    pub scale: usize,
    /// Maximum number of time columns.
    pub max_width: usize,
}

impl Default for TextOptions {
    fn default() -> Self {
        TextOptions {
            scale: 1,
            max_width: 240,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SvgOptions {
    pub unit_px: u32,
    pub row_px: u32,
}

impl Default for SvgOptions {
    fn default() -> Self {
        SvgOptions {
            unit_px: 20,
            row_px: 28,
        }
    }
}

/// Bar colours, indexed by `(job - 1) % 10`.
pub const JOB_PALETTE: [&str; 10] = [
    "#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948", "#b07aa1", "#ff9da7",
    "#9c755f", "#bab0ac",
];

const GLYPHS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";

pub fn render_gantt(schedule: &Schedule, format: GanttFormat) -> Result<String, GanttError> {
    match format {
        GanttFormat::Text => render_text(schedule, &TextOptions::default()),
        GanttFormat::Svg => Ok(render_svg(schedule, &SvgOptions::default())),
    }
}

/// Tick spacing from the 1-2-5 series giving at most ~12 ticks.
fn tick_step(makespan: Time) -> Time {
    let mut step = 1;
    loop {
        for mult in [1, 2, 5] {
            if makespan / (step * mult) <= 12 {
                return step * mult;
            }
        }
        step *= 10;
    }
}

/// Each task is drawn with a glyph (cycling through letters and digits in
/// stream order) and listed in a legend with its `J<job>.<block>.<pos>`
/// label. A schedule with no assignments renders the axis only.
pub fn render_text(schedule: &Schedule, opts: &TextOptions) -> Result<String, GanttError> {
    let scale = opts.scale.max(1);
    let width = schedule.makespan().max(0) as usize * scale;
    if width > opts.max_width {
        return Err(GanttError::ScaleTooSmall {
            needed: width,
            max_width: opts.max_width,
        });
    }
    let label_w = format!("M{}", schedule.machines()).len();
    let mut out = String::new();

    if !schedule.is_empty() {
        let mut rows = vec![vec![b' '; width]; schedule.machines()];
        for (i, a) in schedule.assignments().iter().enumerate() {
            let Some(row) = a.machine.checked_sub(1).and_then(|m| rows.get_mut(m)) else {
                continue;
            };
            let glyph = GLYPHS[i % GLYPHS.len()];
            let (s, e) = (
                a.start.max(0) as usize * scale,
                a.end.max(0) as usize * scale,
            );
            for cell in &mut row[s.min(width)..e.min(width)] {
                *cell = glyph;
            }
        }
        for (m, row) in rows.iter().enumerate() {
            let label = format!("M{}", m + 1);
            let _ = writeln!(out, "{label:<label_w$} |{}|", String::from_utf8_lossy(row));
        }
    }

    // Axis: '+' at every tick; numbers every `label_step`, wide enough that
    // the longest number plus a space fits between labels.
    let step = tick_step(schedule.makespan());
    let widest = schedule.makespan().to_string().len() + 1;
    let cols = step * scale as Time;
    let label_step = step * ((widest as Time + cols - 1) / cols);
    let mut axis = vec![b'-'; width + 1];
    let mut numbers = vec![b' '; width + widest];
    let mut t = 0;
    while t <= schedule.makespan() {
        let x = t as usize * scale;
        axis[x] = b'+';
        if t % label_step == 0 {
            let text = t.to_string();
            numbers[x..x + text.len()].copy_from_slice(text.as_bytes());
        }
        t += step;
    }
    let pad = " ".repeat(label_w + 1);
    let _ = writeln!(out, "{pad}{}", String::from_utf8_lossy(&axis));
    let _ = writeln!(out, "{pad}{}", String::from_utf8_lossy(&numbers).trim_end());

    for (i, a) in schedule.assignments().iter().enumerate() {
        let _ = writeln!(
            out,
            "{} {} M{} [{},{})",
            GLYPHS[i % GLYPHS.len()] as char,
            a.task,
            a.machine,
            a.start,
            a.end
        );
    }
    Ok(out)
}

/// Self-contained SVG 1.1 document. Bars are coloured by job from
/// [`JOB_PALETTE`] and carry their `J<job>.<block>.<pos>` label.
pub fn render_svg(schedule: &Schedule, opts: &SvgOptions) -> String {
    const LEFT: u32 = 48;
    const TOP: u32 = 12;
    const AXIS: u32 = 28;
    let unit = opts.unit_px.max(1);
    let row_h = opts.row_px.max(8);
    let makespan = schedule.makespan().max(0) as u32;
    let rows = schedule.machines() as u32;
    let width = LEFT + makespan * unit + 24;
    let height = TOP + rows * row_h + AXIS;
    let axis_y = TOP + rows * row_h;

    let mut out = String::new();
    let _ = writeln!(
        out,
        r#"<?xml version="1.0" encoding="UTF-8" standalone="no"?>"#
    );
    let _ = writeln!(
        out,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{width}" height="{height}" viewBox="0 0 {width} {height}" font-family="monospace" font-size="10">"#
    );
    let _ = writeln!(
        out,
        r#"<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>"#
    );

    for m in 0..rows {
        let y = TOP + m * row_h;
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="end" dominant-baseline="middle">M{}</text>"#,
            LEFT - 6,
            y + row_h / 2,
            m + 1
        );
        let _ = writeln!(
            out,
            r##"<line x1="{LEFT}" y1="{}" x2="{}" y2="{}" stroke="#dddddd"/>"##,
            y + row_h,
            LEFT + makespan * unit,
            y + row_h
        );
    }

    for a in schedule.assignments() {
        if a.machine == 0 || a.machine > schedule.machines() || a.start < 0 {
            continue;
        }
        let x = LEFT + a.start as u32 * unit;
        let w = (a.end - a.start).max(0) as u32 * unit;
        let y = TOP + (a.machine as u32 - 1) * row_h + 3;
        let h = row_h - 6;
        let color = JOB_PALETTE[(a.task.job.max(1) - 1) % JOB_PALETTE.len()];
        let _ = writeln!(out, "<g>");
        let _ = writeln!(
            out,
            "<title>{} type {} on M{} [{},{})</title>",
            a.task, a.task_type, a.machine, a.start, a.end
        );
        let _ = writeln!(
            out,
            r##"<rect x="{x}" y="{y}" width="{w}" height="{h}" fill="{color}" stroke="#333333" stroke-width="0.5"/>"##
        );
        let _ = writeln!(
            out,
            r#"<text x="{}" y="{}" text-anchor="middle" dominant-baseline="middle">{}</text>"#,
            x + w / 2,
            y + h / 2,
            a.task
        );
        let _ = writeln!(out, "</g>");
    }

    let _ = writeln!(
        out,
        r##"<line x1="{LEFT}" y1="{axis_y}" x2="{}" y2="{axis_y}" stroke="#000000"/>"##,
        LEFT + makespan * unit
    );
    let step = tick_step(makespan as Time) as u32;
    let mut t = 0;
    while t <= makespan {
        let x = LEFT + t * unit;
        let _ = writeln!(
            out,
            r##"<line x1="{x}" y1="{axis_y}" x2="{x}" y2="{}" stroke="#000000"/>"##,
            axis_y + 4
        );
        let _ = writeln!(
            out,
            r#"<text x="{x}" y="{}" text-anchor="middle">{t}</text>"#,
            axis_y + 16
        );
        t += step;
    }
    out.push_str("</svg>\n");
    out
}
