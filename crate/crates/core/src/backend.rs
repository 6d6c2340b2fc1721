use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::compare::ComparisonReport;
use crate::device::{GpuTiming, GpuVariant};
use crate::error::Result;
use crate::matrix::Matrix;
use crate::parallel::{matmul_parallel_cpu, CpuParallelConfig};
use crate::sequential::matmul_sequential;

/// Relative tolerance for GPU results against the sequential oracle.
pub const GPU_REL_TOLERANCE: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Sequential,
    ParallelCpu,
    GpuNaive,
    GpuTiled,
}

impl Backend {
    pub const ALL: [Backend; 4] = [
        Backend::Sequential,
        Backend::ParallelCpu,
        Backend::GpuNaive,
        Backend::GpuTiled,
    ];

    /// Short name used on the command line.
    pub fn as_str(self) -> &'static str {
        match self {
            Backend::Sequential => "seq",
            Backend::ParallelCpu => "cpu",
            Backend::GpuNaive => "gpu-naive",
            Backend::GpuTiled => "gpu-tiled",
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Backend::Sequential => "Sequential CPU",
            Backend::ParallelCpu => "Parallel CPU",
            Backend::GpuNaive => "GPU (naive)",
            Backend::GpuTiled => "GPU (tiled)",
        }
    }

    pub fn gpu_variant(self) -> Option<GpuVariant> {
        match self {
            Backend::GpuNaive => Some(GpuVariant::Naive),
            Backend::GpuTiled => Some(GpuVariant::Tiled),
            _ => None,
        }
    }

    pub fn is_gpu(self) -> bool {
        self.gpu_variant().is_some()
    }

    pub fn tolerance(self) -> Tolerance {
        if self.is_gpu() {
            Tolerance::MaxRel(GPU_REL_TOLERANCE)
        } else {
            Tolerance::Bitwise
        }
    }
}

impl fmt::Display for Backend {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Backend {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.trim() {
            "seq" | "sequential" => Ok(Backend::Sequential),
            "cpu" | "parallel-cpu" => Ok(Backend::ParallelCpu),
            "gpu-naive" => Ok(Backend::GpuNaive),
            "gpu-tiled" | "gpu" => Ok(Backend::GpuTiled),
            other => Err(format!(
                "unknown backend `{other}` (expected seq, cpu, gpu-naive or gpu-tiled)"
            )),
        }
    }
}

/// Parses a comma-separated backend list. `all` expands to every backend.
/// Order follows [`Backend::ALL`]; duplicates are dropped.
pub fn parse_backends(list: &str) -> std::result::Result<Vec<Backend>, String> {
    let mut picked = Vec::new();
    for item in list.split(',') {
        let item = item.trim();
        if item.is_empty() {
            return Err(format!("empty entry in backend list `{list}`"));
        }
        if item == "all" {
            picked.extend(Backend::ALL);
        } else {
            picked.push(item.parse()?);
        }
    }
    picked.sort();
    picked.dedup();
    Ok(picked)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "value")]
pub enum Tolerance {
    Bitwise,
    MaxRel(f64),
}

impl Tolerance {
    pub fn accepts(self, report: &ComparisonReport) -> bool {
        match self {
            Tolerance::Bitwise => report.is_exact(),
            Tolerance::MaxRel(limit) => report.max_rel_diff <= limit,
        }
    }
}

impl fmt::Display for Tolerance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tolerance::Bitwise => f.write_str("bitwise"),
            Tolerance::MaxRel(limit) => write!(f, "rel <= {limit:e}"),
        }
    }
}

/// Output of one timed multiplication.
#[derive(Debug, Clone)]
pub struct Timed {
    pub output: Matrix,
    pub elapsed_ms: f64,
    pub gpu_phases: Option<GpuTiming>,
}

/// A matmul implementation the harness can drive.
pub trait MatmulBackend {
    fn backend(&self) -> Backend;

    /// Multiplies `a` by `b`, returning the product and the wall-clock time
    /// of the timed region.
    fn multiply(&mut self, a: &Matrix, b: &Matrix) -> Result<Timed>;
}

#[derive(Debug, Default)]
pub struct SequentialBackend;

impl MatmulBackend for SequentialBackend {
    fn backend(&self) -> Backend {
        Backend::Sequential
    }

    fn multiply(&mut self, a: &Matrix, b: &Matrix) -> Result<Timed> {
        let start = Instant::now();
        let output = matmul_sequential(a, b)?;
        Ok(Timed {
            output,
            elapsed_ms: elapsed_ms(start),
            gpu_phases: None,
        })
    }
}

#[derive(Debug, Clone)]
pub struct ParallelCpuBackend {
    pub config: CpuParallelConfig,
}

impl ParallelCpuBackend {
    pub fn new(config: CpuParallelConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self { config })
    }
}

impl MatmulBackend for ParallelCpuBackend {
    fn backend(&self) -> Backend {
        Backend::ParallelCpu
    }

    fn multiply(&mut self, a: &Matrix, b: &Matrix) -> Result<Timed> {
        let start = Instant::now();
        let output = matmul_parallel_cpu(a, b, &self.config)?;
        Ok(Timed {
            output,
            elapsed_ms: elapsed_ms(start),
            gpu_phases: None,
        })
    }
}

pub(crate) fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backend_names() {
        for b in Backend::ALL {
            assert_eq!(b.as_str().parse::<Backend>().unwrap(), b);
        }
        assert!("tpu".parse::<Backend>().is_err());
    }

    #[test]
    fn backend_lists() {
        assert_eq!(
            parse_backends("cpu,seq,cpu").unwrap(),
            vec![Backend::Sequential, Backend::ParallelCpu]
        );
        assert_eq!(parse_backends("all").unwrap(), Backend::ALL.to_vec());
        assert!(parse_backends("seq,,cpu").is_err());
    }

    #[test]
    fn cpu_backends_time_and_multiply() {
        let a = Matrix::random(8, 1).unwrap();
        let b = Matrix::random(8, 2).unwrap();
        let mut seq = SequentialBackend;
        let mut par = ParallelCpuBackend::new(CpuParallelConfig::with_workers(3)).unwrap();
        let s = seq.multiply(&a, &b).unwrap();
        let p = par.multiply(&a, &b).unwrap();
        assert!(s.output.bitwise_eq(&p.output));
        assert!(s.elapsed_ms >= 0.0 && p.elapsed_ms >= 0.0);
        assert!(s.gpu_phases.is_none());
    }

    #[test]
    fn tolerances() {
        let exact = ComparisonReport {
            max_abs_diff: 0.0,
            max_rel_diff: 0.0,
            worst_index: (0, 0),
        };
        let close = ComparisonReport {
            max_abs_diff: 1e-5,
            max_rel_diff: 5e-4,
            worst_index: (1, 1),
        };
        assert!(Backend::ParallelCpu.tolerance().accepts(&exact));
        assert!(!Backend::ParallelCpu.tolerance().accepts(&close));
        assert!(Backend::GpuTiled.tolerance().accepts(&close));
    }
}
