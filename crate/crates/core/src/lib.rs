//! Dense single-precision matrix multiplication benchmarking.
//!
//! - [`Matrix`] with deterministic random initialization,
//! - [`matmul_sequential`], the reference triple loop,
//! - [`matmul_parallel_cpu`], a multithreaded kernel bitwise equal to it,
//! - [`harness`] for running size sweeps and verifying results,
//! - [`compute_speedups`] and [`report`] for tables, CSV and SVG figures.
//!
//! GPU backends plug in through [`MatmulBackend`].

pub mod backend;
pub mod compare;
pub mod device;
pub mod error;
pub mod harness;
pub mod matrix;
pub mod parallel;
pub mod report;
pub mod rng;
pub mod sequential;
pub mod sizes;
pub mod speedup;

pub use backend::{parse_backends, Backend, MatmulBackend, ParallelCpuBackend, SequentialBackend, Timed, Tolerance};
pub use compare::{compare, ComparisonReport};
pub use device::{DeviceInfo, GpuTiming, GpuVariant, TimingScope};
pub use error::{Error, Result};
pub use harness::{run_plan, BenchmarkPlan, Measurement, SweepResult};
pub use matrix::Matrix;
pub use parallel::{matmul_parallel_cpu, CpuParallelConfig, Schedule};
pub use sequential::matmul_sequential;
pub use sizes::parse_sizes;
pub use speedup::{compute_speedups, SpeedupRow, SpeedupTable};
