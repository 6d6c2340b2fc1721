use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::backend::Backend;
use crate::error::{Error, Result};
use crate::harness::Measurement;

/// One size's timings (median milliseconds) and the three derived
/// speedups. A speedup is present only when both of its operands are.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpeedupRow {
    pub n: usize,
    pub seq_ms: Option<f64>,
    pub par_cpu_ms: Option<f64>,
    pub gpu_ms: Option<f64>,
    pub speedup_cpu_vs_seq: Option<f64>,
    pub speedup_gpu_vs_cpu: Option<f64>,
    pub speedup_gpu_vs_seq: Option<f64>,
}

impl SpeedupRow {
    pub fn from_timings(
        n: usize,
        seq_ms: Option<f64>,
        par_cpu_ms: Option<f64>,
        gpu_ms: Option<f64>,
    ) -> Result<Self> {
        for t in [seq_ms, par_cpu_ms, gpu_ms].into_iter().flatten() {
            if !t.is_finite() || t <= 0.0 {
                return Err(Error::MeasurementCorrupt(format!(
                    "timing {t} ms at n={n} must be positive and finite"
                )));
            }
        }
        let ratio = |num: Option<f64>, den: Option<f64>| Some(num? / den?);
        Ok(Self {
            n,
            seq_ms,
            par_cpu_ms,
            gpu_ms,
            speedup_cpu_vs_seq: ratio(seq_ms, par_cpu_ms),
            speedup_gpu_vs_cpu: ratio(par_cpu_ms, gpu_ms),
            speedup_gpu_vs_seq: ratio(seq_ms, gpu_ms),
        })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SpeedupTable {
    pub rows: Vec<SpeedupRow>,
}

impl SpeedupTable {
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, n: usize) -> Option<&SpeedupRow> {
        self.rows.iter().find(|r| r.n == n)
    }
}

/// Builds the per-size table from sweep measurements using `S = T_seq /
/// T_par` on median times.
///
/// The GPU column takes the tiled kernel when it was measured at that size
/// and falls back to the naive one.
pub fn compute_speedups(measurements: &[Measurement]) -> Result<SpeedupTable> {
    #[derive(Default)]
    struct Cells {
        seq: Option<f64>,
        cpu: Option<f64>,
        naive: Option<f64>,
        tiled: Option<f64>,
    }

    let mut by_size: BTreeMap<usize, Cells> = BTreeMap::new();
    for m in measurements {
        let cells = by_size.entry(m.n).or_default();
        let slot = match m.backend {
            Backend::Sequential => &mut cells.seq,
            Backend::ParallelCpu => &mut cells.cpu,
            Backend::GpuNaive => &mut cells.naive,
            Backend::GpuTiled => &mut cells.tiled,
        };
        *slot = Some(m.median_ms);
    }

    let rows = by_size
        .into_iter()
        .map(|(n, c)| SpeedupRow::from_timings(n, c.seq, c.cpu, c.tiled.or(c.naive)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SpeedupTable { rows })
}
