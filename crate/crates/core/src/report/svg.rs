//! Self-contained SVG 1.1 figures for a speedup table:
//!
//! 1. execution time per backend against matrix size (log Y),
//! 2. grouped bars of speedup over the sequential baseline (log Y),
//! 3. GPU speedup over the parallel CPU (linear Y).
//!
//! Output is a pure function of the table: no timestamps, no generated ids.
//! Values are quantized exactly as the CSV stores them, so figures drawn
//! from a table and from its CSV are byte-identical.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::speedup::{SpeedupRow, SpeedupTable};

pub const FIGURE_FILES: [&str; 3] = [
    "fig1_execution_time.svg",
    "fig2_speedup_vs_sequential.svg",
    "fig3_gpu_vs_cpu_speedup.svg",
];

const WIDTH: f64 = 860.0;
const HEIGHT: f64 = 520.0;
const LEFT: f64 = 90.0;
const RIGHT: f64 = 200.0;
const TOP: f64 = 56.0;
const BOTTOM: f64 = 72.0;

const SEQ_COLOR: &str = "#1f77b4";
const CPU_COLOR: &str = "#ff7f0e";
const GPU_COLOR: &str = "#2ca02c";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Figure {
    pub file_name: &'static str,
    pub svg: String,
}

pub fn render_figures(table: &SpeedupTable) -> Result<[Figure; 3]> {
    if table.rows.len() < 2 {
        return Err(Error::InsufficientData {
            needed: 2,
            got: table.rows.len(),
        });
    }
    let table = super::csv::quantize(table);
    let rows = &table.rows;
    Ok([
        Figure {
            file_name: FIGURE_FILES[0],
            svg: execution_time(rows),
        },
        Figure {
            file_name: FIGURE_FILES[1],
            svg: speedup_bars(rows),
        },
        Figure {
            file_name: FIGURE_FILES[2],
            svg: gpu_advantage(rows),
        },
    ])
}

/// Renders the three figures into `out_dir`, creating it if needed.
pub fn emit_figures(table: &SpeedupTable, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let figures = render_figures(table)?;
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut paths = Vec::with_capacity(figures.len());
    for fig in figures {
        let path = out_dir.join(fig.file_name);
        std::fs::write(&path, fig.svg).map_err(|e| Error::io(&path, e))?;
        paths.push(path);
    }
    Ok(paths)
}

#[derive(Debug, Clone, Copy)]
enum Scale {
    Log { lo: f64, hi: f64 },
    Linear { hi: f64, step: f64 },
}

impl Scale {
    /// Log axis from half the smallest positive value up to the next decade
    /// at or above the largest.
    fn log(values: impl Iterator<Item = f64>) -> Self {
        let (min, max) = positive_extent(values).unwrap_or((1.0, 10.0));
        let lo = min / 2.0;
        let mut hi = 10f64.powf(max.log10().ceil());
        if hi < max {
            hi *= 10.0;
        }
        if hi <= lo * 1.000_001 {
            hi = lo * 10.0;
        }
        Scale::Log { lo, hi }
    }

    fn linear(values: impl Iterator<Item = f64>) -> Self {
        let max = positive_extent(values).map_or(1.0, |(_, max)| max);
        let step = nice_step(max * 1.1 / 5.0);
        let hi = (max * 1.1 / step).ceil() * step;
        Scale::Linear { hi, step }
    }

    /// Fraction of the plot height, 0 at the bottom.
    fn frac(self, v: f64) -> f64 {
        match self {
            Scale::Log { .. } if v <= 0.0 => 0.0,
            Scale::Log { lo, hi } => (v.log10() - lo.log10()) / (hi.log10() - lo.log10()),
            Scale::Linear { hi, .. } => v / hi,
        }
    }

    fn ticks(self) -> Vec<(f64, String)> {
        match self {
            Scale::Log { lo, hi } => {
                let first = lo.log10().ceil() as i32;
                let last = hi.log10().floor() as i32;
                (first..=last)
                    .map(|k| (10f64.powi(k), decade_label(k)))
                    .collect()
            }
            Scale::Linear { hi, step } => {
                let count = (hi / step).round() as usize;
                (0..=count)
                    .map(|i| {
                        let v = step * i as f64;
                        (v, trim_number(v))
                    })
                    .collect()
            }
        }
    }
}

fn positive_extent(values: impl Iterator<Item = f64>) -> Option<(f64, f64)> {
    values
        .filter(|v| v.is_finite() && *v > 0.0)
        .fold(None, |acc, v| match acc {
            None => Some((v, v)),
            Some((lo, hi)) => Some((lo.min(v), hi.max(v))),
        })
}

fn nice_step(raw: f64) -> f64 {
    let mag = 10f64.powf(raw.log10().floor());
    let norm = raw / mag;
    let nice = if norm <= 1.0 {
        1.0
    } else if norm <= 2.0 {
        2.0
    } else if norm <= 5.0 {
        5.0
    } else {
        10.0
    };
    nice * mag
}

fn decade_label(k: i32) -> String {
    match k {
        -3..=-1 => format!("{:.*}", (-k) as usize, 10f64.powi(k)),
        0..=6 => format!("{}", 10u64.pow(k as u32)),
        _ => format!("1e{k}"),
    }
}

fn trim_number(v: f64) -> String {
    let s = format!("{v:.2}");
    s.trim_end_matches('0').trim_end_matches('.').to_owned()
}

fn escape(text: &str) -> String {
    text.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
        .replace('"', "&quot;")
}

struct Chart {
    svg: String,
    scale: Scale,
    categories: Vec<String>,
    legend: Vec<(&'static str, &'static str)>,
}

impl Chart {
    fn new(title: &str, y_label: &str, scale: Scale, rows: &[SpeedupRow]) -> Self {
        let mut svg = String::new();
        let _ = writeln!(
            svg,
            r#"<?xml version="1.0" encoding="UTF-8"?>
<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}" font-family="Helvetica, Arial, sans-serif">
<rect x="0" y="0" width="{WIDTH}" height="{HEIGHT}" fill="white"/>
<text x="{:.2}" y="30" font-size="18" text-anchor="middle">{}</text>"#,
            LEFT + plot_width() / 2.0,
            escape(title)
        );
        let mut chart = Chart {
            svg,
            scale,
            categories: rows.iter().map(|r| r.n.to_string()).collect(),
            legend: Vec::new(),
        };
        chart.axes(y_label);
        chart
    }

    fn y(&self, v: f64) -> f64 {
        TOP + plot_height() * (1.0 - self.scale.frac(v))
    }

    fn x_center(&self, i: usize) -> f64 {
        LEFT + (i as f64 + 0.5) * self.slot()
    }

    fn slot(&self) -> f64 {
        plot_width() / self.categories.len() as f64
    }

    fn axes(&mut self, y_label: &str) {
        let bottom = TOP + plot_height();
        let right = LEFT + plot_width();
        for (v, label) in self.scale.ticks() {
            let y = self.y(v);
            let _ = writeln!(
                self.svg,
                r##"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{right:.2}" y2="{y:.2}" stroke="#dddddd" stroke-width="1"/>
<text x="{:.2}" y="{:.2}" font-size="12" text-anchor="end">{}</text>"##,
                LEFT - 8.0,
                y + 4.0,
                escape(&label)
            );
        }
        for i in 0..self.categories.len() {
            let x = self.x_center(i);
            let _ = writeln!(
                self.svg,
                r##"<line x1="{x:.2}" y1="{bottom:.2}" x2="{x:.2}" y2="{:.2}" stroke="#333333"/>
<text x="{x:.2}" y="{:.2}" font-size="12" text-anchor="middle">{}</text>"##,
                bottom + 5.0,
                bottom + 20.0,
                escape(&self.categories[i])
            );
        }
        let _ = writeln!(
            self.svg,
            r##"<rect x="{LEFT:.2}" y="{TOP:.2}" width="{:.2}" height="{:.2}" fill="none" stroke="#333333"/>
<text x="{:.2}" y="{:.2}" font-size="14" text-anchor="middle">Matrix size (N for N x N)</text>
<text x="20" y="{:.2}" font-size="14" text-anchor="middle" transform="rotate(-90 20 {:.2})">{}</text>"##,
            plot_width(),
            plot_height(),
            LEFT + plot_width() / 2.0,
            HEIGHT - 22.0,
            TOP + plot_height() / 2.0,
            TOP + plot_height() / 2.0,
            escape(y_label)
        );
    }

    fn hline(&mut self, v: f64, color: &str) {
        let y = self.y(v);
        let _ = writeln!(
            self.svg,
            r#"<line x1="{LEFT:.2}" y1="{y:.2}" x2="{:.2}" y2="{y:.2}" stroke="{color}" stroke-width="1.5" stroke-dasharray="6 4"/>"#,
            LEFT + plot_width()
        );
    }

    fn line_series(&mut self, name: &'static str, color: &'static str, values: &[Option<f64>]) {
        if values.iter().all(Option::is_none) {
            return;
        }
        let mut segment: Vec<(f64, f64)> = Vec::new();
        let mut segments = Vec::new();
        for (i, v) in values.iter().enumerate() {
            match v {
                Some(v) => segment.push((self.x_center(i), self.y(*v))),
                None if !segment.is_empty() => segments.push(std::mem::take(&mut segment)),
                None => {}
            }
        }
        if !segment.is_empty() {
            segments.push(segment);
        }
        for seg in segments {
            let points: Vec<String> = seg.iter().map(|(x, y)| format!("{x:.2},{y:.2}")).collect();
            let _ = writeln!(
                self.svg,
                r#"<polyline points="{}" fill="none" stroke="{color}" stroke-width="2"/>"#,
                points.join(" ")
            );
            for (x, y) in seg {
                let _ = writeln!(
                    self.svg,
                    r#"<circle cx="{x:.2}" cy="{y:.2}" r="4" fill="{color}"/>"#
                );
            }
        }
        self.legend.push((name, color));
    }

    fn value_label(&mut self, x: f64, v: f64, text: &str) {
        let _ = writeln!(
            self.svg,
            r#"<text x="{x:.2}" y="{:.2}" font-size="10" text-anchor="middle">{}</text>"#,
            self.y(v) - 6.0,
            escape(text)
        );
    }

    fn finish(mut self) -> String {
        let x = LEFT + plot_width() + 16.0;
        for (i, (name, color)) in self.legend.iter().enumerate() {
            let y = TOP + 10.0 + 22.0 * i as f64;
            let _ = writeln!(
                self.svg,
                r#"<rect x="{x:.2}" y="{y:.2}" width="14" height="14" fill="{color}"/>
<text x="{:.2}" y="{:.2}" font-size="13">{}</text>"#,
                x + 20.0,
                y + 12.0,
                escape(name)
            );
        }
        self.svg.push_str("</svg>\n");
        self.svg
    }
}

fn plot_width() -> f64 {
    WIDTH - LEFT - RIGHT
}

fn plot_height() -> f64 {
    HEIGHT - TOP - BOTTOM
}

fn execution_time(rows: &[SpeedupRow]) -> String {
    let all = rows.iter().flat_map(|r| [r.seq_ms, r.par_cpu_ms, r.gpu_ms]).flatten();
    let mut chart = Chart::new(
        "Execution time by implementation",
        "Execution time (ms, log scale)",
        Scale::log(all),
        rows,
    );
    let column = |f: fn(&SpeedupRow) -> Option<f64>| rows.iter().map(f).collect::<Vec<_>>();
    chart.line_series("Sequential CPU", SEQ_COLOR, &column(|r| r.seq_ms));
    chart.line_series("Parallel CPU", CPU_COLOR, &column(|r| r.par_cpu_ms));
    chart.line_series("Parallel GPU", GPU_COLOR, &column(|r| r.gpu_ms));
    chart.finish()
}

type Column = fn(&SpeedupRow) -> Option<f64>;

fn speedup_bars(rows: &[SpeedupRow]) -> String {
    let all = rows
        .iter()
        .flat_map(|r| [r.speedup_cpu_vs_seq, r.speedup_gpu_vs_seq])
        .flatten()
        .chain(std::iter::once(1.0));
    let mut chart = Chart::new(
        "Speedup over sequential CPU",
        "Speedup (x, log scale)",
        Scale::log(all),
        rows,
    );
    chart.hline(1.0, "#888888");
    let series: [(&str, &str, Column); 2] = [
        ("Parallel CPU vs Seq.", CPU_COLOR, |r| r.speedup_cpu_vs_seq),
        ("GPU vs Seq.", GPU_COLOR, |r| r.speedup_gpu_vs_seq),
    ];
    let bar_w = chart.slot() * 0.32;
    let base = TOP + plot_height();
    for (s, (name, color, get)) in series.into_iter().enumerate() {
        let mut any = false;
        for (i, row) in rows.iter().enumerate() {
            let Some(v) = get(row) else { continue };
            any = true;
            let x = chart.x_center(i) + (s as f64 - 1.0) * bar_w;
            let y = chart.y(v);
            let _ = writeln!(
                chart.svg,
                r#"<rect x="{x:.2}" y="{y:.2}" width="{bar_w:.2}" height="{:.2}" fill="{color}"/>"#,
                base - y
            );
            chart.value_label(x + bar_w / 2.0, v, &format!("{v:.2}x"));
        }
        if any {
            chart.legend.push((name, color));
        }
    }
    chart.finish()
}

fn gpu_advantage(rows: &[SpeedupRow]) -> String {
    let values: Vec<Option<f64>> = rows.iter().map(|r| r.speedup_gpu_vs_cpu).collect();
    let mut chart = Chart::new(
        "GPU speedup over parallel CPU",
        "Speedup (x)",
        Scale::linear(values.iter().flatten().copied()),
        rows,
    );
    chart.line_series("GPU vs Par. CPU", GPU_COLOR, &values);
    for (i, v) in values.iter().enumerate() {
        if let Some(v) = v {
            let x = chart.x_center(i);
            chart.value_label(x, *v, &format!("{v:.2}x"));
        }
    }
    chart.finish()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_values_stay_on_the_log_axis() {
        let table = SpeedupTable {
            rows: vec![
                SpeedupRow { seq_ms: Some(0.0), ..SpeedupRow::from_timings(8, None, Some(1.0), None).unwrap() },
                SpeedupRow::from_timings(16, Some(2.0), Some(1.0), None).unwrap(),
            ],
        };
        for fig in render_figures(&table).unwrap() {
            assert!(!fig.svg.contains("inf") && !fig.svg.contains("NaN"), "{}", fig.file_name);
        }
    }

    fn two_rows() -> SpeedupTable {
        SpeedupTable {
            rows: vec![
                SpeedupRow::from_timings(128, Some(2.18), Some(7.10), Some(0.26)).unwrap(),
                SpeedupRow::from_timings(256, Some(20.70), Some(2.89), Some(0.40)).unwrap(),
            ],
        }
    }

    #[test]
    fn needs_two_rows() {
        let one = SpeedupTable {
            rows: two_rows().rows[..1].to_vec(),
        };
        assert!(matches!(
            render_figures(&one),
            Err(Error::InsufficientData { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn deterministic_output() {
        let a = render_figures(&two_rows()).unwrap();
        let b = render_figures(&two_rows()).unwrap();
        assert_eq!(a, b);
        for fig in &a {
            assert!(fig.svg.starts_with("<?xml"));
            assert!(fig.svg.trim_end().ends_with("</svg>"));
        }
    }

    #[test]
    fn log_scale_floor_is_half_the_minimum() {
        match Scale::log([0.31, 592.97].into_iter()) {
            Scale::Log { lo, hi } => {
                assert_eq!(lo, 0.155);
                assert_eq!(hi, 1000.0);
            }
            _ => unreachable!(),
        }
    }

    #[test]
    fn sub_unit_bar_sits_below_reference_line() {
        let table = two_rows();
        let rows = super::super::csv::quantize(&table).rows;
        let all = rows
            .iter()
            .flat_map(|r| [r.speedup_cpu_vs_seq, r.speedup_gpu_vs_seq])
            .flatten()
            .chain(std::iter::once(1.0));
        let chart = Chart::new("t", "y", Scale::log(all), &rows);
        let bar_top = chart.y(0.31);
        let unity = chart.y(1.0);
        let base = TOP + plot_height();
        assert!(bar_top > unity && bar_top < base);
        let svg = render_figures(&table).unwrap()[1].svg.clone();
        assert!(svg.contains(">0.31x<"));
    }

    #[test]
    fn absent_gpu_series_is_left_out() {
        let table = SpeedupTable {
            rows: vec![
                SpeedupRow::from_timings(64, Some(1.0), Some(1.0), None).unwrap(),
                SpeedupRow::from_timings(128, Some(8.0), Some(8.0), None).unwrap(),
            ],
        };
        let figs = render_figures(&table).unwrap();
        assert!(!figs[0].svg.contains("Parallel GPU"));
        assert!(figs[0].svg.contains("Sequential CPU"));
        // Identical series overlap without trouble.
        assert_eq!(figs[0].svg.matches("<polyline").count(), 2);
        assert!(!figs[2].svg.contains("<polyline"));
    }

    #[test]
    fn linear_ticks_are_round() {
        let ticks = Scale::linear([27.02, 45.73].into_iter()).ticks();
        assert_eq!(ticks.first().unwrap().1, "0");
        assert_eq!(ticks.last().unwrap().1, "60");
    }

    #[test]
    fn decade_labels() {
        assert_eq!(decade_label(-1), "0.1");
        assert_eq!(decade_label(3), "1000");
        assert_eq!(decade_label(9), "1e9");
    }
}
