use std::fmt::Write as _;

use crate::error::{Error, Result};
use crate::speedup::SpeedupTable;

const HEADINGS: [&str; 7] = [
    "Matrix Size (N x N)",
    "Seq. CPU (ms)",
    "Par. CPU (ms)",
    "Par. GPU (ms)",
    "Par. CPU vs Seq.",
    "GPU vs Par. CPU",
    "GPU vs Seq.",
];

/// Fixed-width text rendering of the speedup table. Times carry two
/// decimals here; the CSV keeps four.
pub fn render_table(table: &SpeedupTable) -> Result<String> {
    if table.is_empty() {
        return Err(Error::EmptyReport);
    }
    let time = |v: Option<f64>| v.map_or_else(|| "NA".to_owned(), |t| format!("{t:.2}"));
    let rows: Vec<[String; 7]> = table
        .rows
        .iter()
        .map(|r| {
            [
                format!("{0}x{0}", r.n),
                time(r.seq_ms),
                time(r.par_cpu_ms),
                time(r.gpu_ms),
                super::csv::speedup_cell(r.speedup_cpu_vs_seq),
                super::csv::speedup_cell(r.speedup_gpu_vs_cpu),
                super::csv::speedup_cell(r.speedup_gpu_vs_seq),
            ]
        })
        .collect();

    let mut widths = HEADINGS.map(str::len);
    for row in &rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }

    let mut out = String::new();
    let line = |out: &mut String, cells: &[&str]| {
        for (i, (cell, w)) in cells.iter().zip(widths).enumerate() {
            if i == 0 {
                let _ = write!(out, "{cell:<w$}");
            } else {
                let _ = write!(out, "  {cell:>w$}");
            }
        }
        out.push('\n');
    };
    line(&mut out, &HEADINGS);
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    line(&mut out, &rule.iter().map(String::as_str).collect::<Vec<_>>());
    for row in &rows {
        line(&mut out, &row.iter().map(String::as_str).collect::<Vec<_>>());
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::speedup::SpeedupRow;

    #[test]
    fn aligned_columns() {
        let table = SpeedupTable {
            rows: vec![
                SpeedupRow::from_timings(128, Some(2.18), Some(7.10), None).unwrap(),
                SpeedupRow::from_timings(4096, Some(393280.52), Some(30332.07), Some(663.24)).unwrap(),
            ],
        };
        let text = render_table(&table).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 4);
        assert!(lines.iter().all(|l| l.len() == lines[0].len()));
        assert!(lines[2].starts_with("128x128"));
        assert!(lines[2].ends_with("NA"));
        assert!(lines[3].contains("393280.52"));
        assert!(lines[3].ends_with("592.97x"));
    }

    #[test]
    fn empty_table_rejected() {
        assert!(matches!(render_table(&SpeedupTable::default()), Err(Error::EmptyReport)));
    }
}
