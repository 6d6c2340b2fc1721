//! Multithreaded CPU matmul over the flattened `(row, col)` output space.
//!
//! The `rows * cols` output elements are cut into contiguous units of
//! `chunk` elements. Each unit is handled by exactly one worker and each
//! element runs the same k-ordered `f32` inner loop as
//! [`matmul_sequential`](crate::matmul_sequential), so the result is bitwise
//! identical to it for any worker count, chunk size or schedule.

use std::num::NonZeroUsize;
use std::sync::atomic::{AtomicU32, AtomicU64, Ordering};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::sequential::{check_shapes, dot_element};

/// Overrides the default worker count, like `OMP_NUM_THREADS`.
pub const THREADS_ENV: &str = "GEMMLAB_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    /// Unit `u` goes to worker `u % workers`, fixed up front.
    #[default]
    Static,
    /// Units are pulled from a shared work-stealing pool.
    Dynamic,
}

impl std::str::FromStr for Schedule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "static" => Ok(Schedule::Static),
            "dynamic" => Ok(Schedule::Dynamic),
            other => Err(Error::InvalidConfig(format!(
                "unknown schedule {other:?} (expected static or dynamic)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CpuParallelConfig {
    pub workers: usize,
    /// Elements per work unit. `None` means one output row per unit.
    pub chunk: Option<usize>,
    pub schedule: Schedule,
}

impl Default for CpuParallelConfig {
    fn default() -> Self {
        Self {
            workers: hardware_threads(),
            chunk: None,
            schedule: Schedule::Static,
        }
    }
}

impl CpuParallelConfig {
    pub fn with_workers(workers: usize) -> Self {
        Self {
            workers,
            ..Self::default()
        }
    }

    /// Default config, with the worker count taken from `GEMMLAB_THREADS`
    /// when it is set.
    pub fn from_env() -> Result<Self> {
        let mut cfg = Self::default();
        if let Ok(raw) = std::env::var(THREADS_ENV) {
            cfg.workers = parse_workers(&raw)?;
        }
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.workers == 0 {
            return Err(Error::InvalidConfig("workers must be >= 1".into()));
        }
        if self.chunk == Some(0) {
            return Err(Error::InvalidConfig("chunk must be >= 1".into()));
        }
        Ok(())
    }
}

pub fn hardware_threads() -> usize {
    std::thread::available_parallelism()
        .map(NonZeroUsize::get)
        .unwrap_or(1)
}

fn parse_workers(raw: &str) -> Result<usize> {
    match raw.trim().parse::<usize>() {
        Ok(n) if n >= 1 => Ok(n),
        _ => Err(Error::InvalidConfig(format!(
            "{THREADS_ENV} must be a positive integer, got {raw:?}"
        ))),
    }
}

pub fn matmul_parallel_cpu(a: &Matrix, b: &Matrix, cfg: &CpuParallelConfig) -> Result<Matrix> {
    run(a, b, cfg, &NoTally)
}

/// Per-element write counts and total multiply-accumulates observed during
/// one instrumented run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WorkTrace {
    pub writes: Vec<u32>,
    pub macs: u64,
}

/// Same as [`matmul_parallel_cpu`] but counts every element write and inner
/// loop iteration. Slower; meant for tests and diagnostics.
pub fn matmul_parallel_cpu_traced(
    a: &Matrix,
    b: &Matrix,
    cfg: &CpuParallelConfig,
) -> Result<(Matrix, WorkTrace)> {
    check_shapes(a, b)?;
    let tally = Counting {
        writes: (0..a.rows() * b.cols()).map(|_| AtomicU32::new(0)).collect(),
        macs: AtomicU64::new(0),
    };
    let c = run(a, b, cfg, &tally)?;
    let trace = WorkTrace {
        writes: tally.writes.into_iter().map(AtomicU32::into_inner).collect(),
        macs: tally.macs.into_inner(),
    };
    Ok((c, trace))
}

trait Tally: Sync {
    fn element(&self, idx: usize, macs: usize);
}

struct NoTally;

impl Tally for NoTally {
    #[inline(always)]
    fn element(&self, _idx: usize, _macs: usize) {}
}

struct Counting {
    writes: Vec<AtomicU32>,
    macs: AtomicU64,
}

impl Tally for Counting {
    fn element(&self, idx: usize, macs: usize) {
        self.writes[idx].fetch_add(1, Ordering::Relaxed);
        self.macs.fetch_add(macs as u64, Ordering::Relaxed);
    }
}

fn run<T: Tally>(a: &Matrix, b: &Matrix, cfg: &CpuParallelConfig, tally: &T) -> Result<Matrix> {
    cfg.validate()?;
    check_shapes(a, b)?;
    let (rows, cols) = (a.rows(), b.cols());
    let chunk = cfg.chunk.unwrap_or(cols);
    let mut out = vec![0.0f32; rows * cols];

    let fill_unit = |unit: usize, slice: &mut [f32]| {
        let start = unit * chunk;
        for (offset, dst) in slice.iter_mut().enumerate() {
            let idx = start + offset;
            *dst = dot_element(a, b, idx / cols, idx % cols);
            tally.element(idx, a.cols());
        }
    };

    match cfg.schedule {
        Schedule::Static => {
            let units: Vec<(usize, &mut [f32])> = out.chunks_mut(chunk).enumerate().collect();
            let workers = cfg.workers.min(units.len());
            if workers <= 1 {
                for (unit, slice) in units {
                    fill_unit(unit, slice);
                }
            } else {
                let mut per_worker: Vec<Vec<(usize, &mut [f32])>> =
                    (0..workers).map(|_| Vec::new()).collect();
                for (unit, slice) in units {
                    per_worker[unit % workers].push((unit, slice));
                }
                std::thread::scope(|s| {
                    for assigned in per_worker {
                        let fill_unit = &fill_unit;
                        s.spawn(move || {
                            for (unit, slice) in assigned {
                                fill_unit(unit, slice);
                            }
                        });
                    }
                });
            }
        }
        Schedule::Dynamic => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(cfg.workers)
                .build()
                .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
            pool.install(|| {
                out.par_chunks_mut(chunk)
                    .enumerate()
                    .for_each(|(unit, slice)| fill_unit(unit, slice));
            });
        }
    }

    Matrix::from_vec(rows, cols, out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matmul_sequential;

    fn cfg(workers: usize, chunk: Option<usize>, schedule: Schedule) -> CpuParallelConfig {
        CpuParallelConfig {
            workers,
            chunk,
            schedule,
        }
    }

    #[test]
    fn bitwise_equal_to_sequential_n256() {
        let a = Matrix::random(256, 1).unwrap();
        let b = Matrix::random(256, 2).unwrap();
        let seq = matmul_sequential(&a, &b).unwrap();
        let par = matmul_parallel_cpu(&a, &b, &CpuParallelConfig::with_workers(8)).unwrap();
        assert!(par.bitwise_eq(&seq));
    }

    #[test]
    fn schedules_and_chunks_agree() {
        let a = Matrix::random(37, 11).unwrap();
        let b = Matrix::random(37, 12).unwrap();
        let seq = matmul_sequential(&a, &b).unwrap();
        for schedule in [Schedule::Static, Schedule::Dynamic] {
            for chunk in [None, Some(1), Some(5), Some(37 * 37 + 3)] {
                for workers in [1, 2, 3, 16] {
                    let c = matmul_parallel_cpu(&a, &b, &cfg(workers, chunk, schedule)).unwrap();
                    assert!(c.bitwise_eq(&seq), "{schedule:?} {chunk:?} {workers}");
                }
            }
        }
    }

    #[test]
    fn every_element_written_once() {
        let a = Matrix::random(19, 1).unwrap();
        let b = Matrix::random(19, 2).unwrap();
        for schedule in [Schedule::Static, Schedule::Dynamic] {
            let (_, trace) =
                matmul_parallel_cpu_traced(&a, &b, &cfg(4, Some(7), schedule)).unwrap();
            assert!(trace.writes.iter().all(|&w| w == 1));
        }
    }

    #[test]
    fn single_worker_does_n_cubed_macs() {
        let n = 13;
        let a = Matrix::random(n, 1).unwrap();
        let b = Matrix::random(n, 2).unwrap();
        let (_, trace) = matmul_parallel_cpu_traced(&a, &b, &cfg(1, None, Schedule::Static)).unwrap();
        assert_eq!(trace.macs, (n * n * n) as u64);
    }

    #[test]
    fn rejects_bad_config() {
        let a = Matrix::identity(2).unwrap();
        assert!(matches!(
            matmul_parallel_cpu(&a, &a, &cfg(0, None, Schedule::Static)),
            Err(Error::InvalidConfig(_))
        ));
        assert!(matches!(
            matmul_parallel_cpu(&a, &a, &cfg(2, Some(0), Schedule::Static)),
            Err(Error::InvalidConfig(_))
        ));
    }

    #[test]
    fn rejects_shape_mismatch() {
        let a = Matrix::identity(2).unwrap();
        let b = Matrix::identity(3).unwrap();
        assert!(matches!(
            matmul_parallel_cpu(&a, &b, &CpuParallelConfig::with_workers(2)),
            Err(Error::Shape(_))
        ));
    }

    #[test]
    fn worker_env_parsing() {
        assert_eq!(parse_workers(" 6 ").unwrap(), 6);
        assert!(parse_workers("0").is_err());
        assert!(parse_workers("many").is_err());
    }
}
