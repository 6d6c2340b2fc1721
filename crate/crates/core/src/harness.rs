//! Benchmark sweep: for every `(size, backend)` cell, generate inputs,
//! warm up, time repetitions and verify against the sequential oracle.
//!
//! Cells run strictly one after another so that no two measurements
//! contend for the machine.

use serde::{Deserialize, Serialize};

use crate::backend::{Backend, MatmulBackend, Timed};
use crate::compare::{compare, ComparisonReport};
use crate::device::{GpuTiming, TimingScope};
use crate::error::{Error, Result};
use crate::matrix::Matrix;
use crate::sequential::matmul_sequential;

pub const DEFAULT_SIZES: [usize; 7] = [128, 256, 512, 1024, 2048, 3072, 4096];
pub const DEFAULT_SEED: u64 = 42;
pub const DEFAULT_VERIFY_MAX_SIZE: usize = 1024;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkPlan {
    pub sizes: Vec<usize>,
    /// `A` is generated from `seed`, `B` from `seed + 1`.
    pub seed: u64,
    pub repetitions: usize,
    pub warmup_runs: usize,
    pub backends: Vec<Backend>,
    pub timing_scope: TimingScope,
    /// Sizes above this skip the sequential backend.
    pub max_sequential_size: Option<usize>,
    /// Sizes above this are not verified against the oracle.
    pub verify_max_size: usize,
}

impl Default for BenchmarkPlan {
    fn default() -> Self {
        Self {
            sizes: DEFAULT_SIZES.to_vec(),
            seed: DEFAULT_SEED,
            repetitions: 3,
            warmup_runs: 1,
            backends: Backend::ALL.to_vec(),
            timing_scope: TimingScope::default(),
            max_sequential_size: None,
            verify_max_size: DEFAULT_VERIFY_MAX_SIZE,
        }
    }
}

impl BenchmarkPlan {
    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::InvalidConfig("plan has no sizes".into()));
        }
        if self.sizes.contains(&0) {
            return Err(Error::InvalidConfig("sizes must be >= 1".into()));
        }
        if !self.sizes.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::InvalidConfig(
                "sizes must be strictly increasing".into(),
            ));
        }
        if self.repetitions == 0 {
            return Err(Error::InvalidConfig("repetitions must be >= 1".into()));
        }
        if self.backends.is_empty() {
            return Err(Error::InvalidConfig("plan has no backends".into()));
        }
        Ok(())
    }

    /// Input matrices for one size. Every backend at that size sees exactly
    /// these values.
    pub fn inputs(&self, n: usize) -> Result<(Matrix, Matrix)> {
        Ok((
            Matrix::random(n, self.seed)?,
            Matrix::random(n, self.seed.wrapping_add(1))?,
        ))
    }

    fn runs_sequential(&self, n: usize) -> bool {
        self.max_sequential_size.is_none_or(|cap| n <= cap)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    pub backend: Backend,
    pub n: usize,
    pub times_ms: Vec<f64>,
    pub median_ms: f64,
    pub min_ms: f64,
    /// Phase breakdown of the median repetition, GPU backends only.
    pub gpu_phases: Option<GpuTiming>,
    /// True only when the first repetition matched the oracle.
    pub verified: bool,
    pub comparison: Option<ComparisonReport>,
    /// Combined digest of the two input matrices.
    pub input_digest: u64,
}

impl Measurement {
    pub fn from_times(backend: Backend, n: usize, times_ms: Vec<f64>) -> Result<Self> {
        let (median_ms, min_ms) = summarize(&times_ms)?;
        Ok(Self {
            backend,
            n,
            times_ms,
            median_ms,
            min_ms,
            gpu_phases: None,
            verified: false,
            comparison: None,
            input_digest: 0,
        })
    }
}

/// Median (mean of the two middle values for even counts) and minimum.
pub fn summarize(times_ms: &[f64]) -> Result<(f64, f64)> {
    if times_ms.is_empty() {
        return Err(Error::MeasurementCorrupt("no timings recorded".into()));
    }
    if let Some(bad) = times_ms.iter().find(|t| !t.is_finite() || **t < 0.0) {
        return Err(Error::MeasurementCorrupt(format!("invalid timing {bad}")));
    }
    let mut sorted = times_ms.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mid = sorted.len() / 2;
    let median = if sorted.len() % 2 == 1 {
        sorted[mid]
    } else {
        (sorted[mid - 1] + sorted[mid]) / 2.0
    };
    Ok((median, sorted[0]))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SkippedCell {
    pub backend: Backend,
    pub n: usize,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellFailure {
    pub backend: Backend,
    pub n: usize,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub measurements: Vec<Measurement>,
    pub skipped: Vec<SkippedCell>,
    pub failures: Vec<CellFailure>,
}

impl SweepResult {
    /// Measurements whose result was checked and did not match.
    pub fn mismatches(&self) -> impl Iterator<Item = &Measurement> {
        self.measurements
            .iter()
            .filter(|m| m.comparison.is_some() && !m.verified)
    }

    pub fn all_ok(&self) -> bool {
        self.failures.is_empty() && self.mismatches().next().is_none()
    }
}

/// Runs `plan` with the given backend implementations. Requested backends
/// with no implementation in `runners` (e.g. no GPU present) are recorded
/// as skipped. A backend error fails only its own cell.
pub fn run_plan(plan: &BenchmarkPlan, runners: &mut [Box<dyn MatmulBackend>]) -> Result<SweepResult> {
    plan.validate()?;
    let mut result = SweepResult::default();

    for &n in &plan.sizes {
        let (a, b) = plan.inputs(n)?;
        let digest = a.digest() ^ b.digest().rotate_left(1);
        let verify = n <= plan.verify_max_size;
        let mut oracle: Option<Matrix> = None;

        for &backend in &plan.backends {
            if backend == Backend::Sequential && !plan.runs_sequential(n) {
                log::info!("skipping {backend} at n={n}: above the sequential size cap");
                result.skipped.push(SkippedCell {
                    backend,
                    n,
                    reason: "above max sequential size".into(),
                });
                continue;
            }
            let Some(runner) = runners.iter_mut().find(|r| r.backend() == backend) else {
                log::warn!("skipping {backend} at n={n}: backend unavailable");
                result.skipped.push(SkippedCell {
                    backend,
                    n,
                    reason: "backend unavailable".into(),
                });
                continue;
            };

            log::info!("running {backend} at n={n}");
            match run_cell(plan, runner.as_mut(), &a, &b) {
                Ok((mut measurement, first)) => {
                    measurement.input_digest = digest;
                    if verify {
                        if oracle.is_none() {
                            oracle = Some(if backend == Backend::Sequential {
                                first.clone()
                            } else {
                                matmul_sequential(&a, &b)?
                            });
                        }
                        let report = compare(oracle.as_ref().expect("oracle set above"), &first)?;
                        measurement.verified = backend.tolerance().accepts(&report);
                        measurement.comparison = Some(report);
                        if !measurement.verified {
                            log::warn!(
                                "{backend} at n={n} does not match the oracle: \
                                 max_rel_diff {:e} at {:?}",
                                report.max_rel_diff,
                                report.worst_index
                            );
                        }
                    }
                    result.measurements.push(measurement);
                }
                Err(err) => {
                    log::error!("{backend} at n={n} failed: {err}");
                    result.failures.push(CellFailure {
                        backend,
                        n,
                        error: err.to_string(),
                    });
                }
            }
        }
    }
    Ok(result)
}

fn run_cell(
    plan: &BenchmarkPlan,
    runner: &mut dyn MatmulBackend,
    a: &Matrix,
    b: &Matrix,
) -> Result<(Measurement, Matrix)> {
    for _ in 0..plan.warmup_runs {
        runner.multiply(a, b)?;
    }
    let mut runs: Vec<Timed> = Vec::with_capacity(plan.repetitions);
    let mut first = None;
    for rep in 0..plan.repetitions {
        let mut timed = runner.multiply(a, b)?;
        if rep == 0 {
            first = Some(std::mem::replace(&mut timed.output, Matrix::zeros(1, 1)?));
        }
        runs.push(timed);
    }
    let times: Vec<f64> = runs
        .iter()
        .map(|t| t.gpu_phases.map_or(t.elapsed_ms, |g| g.total_ms))
        .collect();
    let mut measurement = Measurement::from_times(runner.backend(), a.rows(), times)?;
    measurement.gpu_phases = median_run(&runs, measurement.median_ms).and_then(|t| t.gpu_phases);
    Ok((measurement, first.expect("repetitions >= 1")))
}

fn median_run(runs: &[Timed], median: f64) -> Option<&Timed> {
    runs.iter().min_by(|x, y| {
        let dx = (x.gpu_phases.map_or(x.elapsed_ms, |g| g.total_ms) - median).abs();
        let dy = (y.gpu_phases.map_or(y.elapsed_ms, |g| g.total_ms) - median).abs();
        dx.total_cmp(&dy)
    })
}

/// Outcome of checking one backend at one size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyOutcome {
    pub backend: Backend,
    pub n: usize,
    pub passed: bool,
    pub report: Option<ComparisonReport>,
    pub error: Option<String>,
}

/// Checks every runner against [`matmul_sequential`] at each size, using
/// each backend's own tolerance.
pub fn verify_backends(
    sizes: &[usize],
    seed: u64,
    runners: &mut [Box<dyn MatmulBackend>],
) -> Result<Vec<VerifyOutcome>> {
    let plan = BenchmarkPlan {
        sizes: sizes.to_vec(),
        seed,
        ..BenchmarkPlan::default()
    };
    let mut out = Vec::new();
    for &n in sizes {
        let (a, b) = plan.inputs(n)?;
        let oracle = matmul_sequential(&a, &b)?;
        for runner in runners.iter_mut() {
            let backend = runner.backend();
            let outcome = match runner.multiply(&a, &b) {
                Ok(timed) => {
                    let report = compare(&oracle, &timed.output)?;
                    VerifyOutcome {
                        backend,
                        n,
                        passed: backend.tolerance().accepts(&report),
                        report: Some(report),
                        error: None,
                    }
                }
                Err(err) => VerifyOutcome {
                    backend,
                    n,
                    passed: false,
                    report: None,
                    error: Some(err.to_string()),
                },
            };
            out.push(outcome);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::backend::{ParallelCpuBackend, SequentialBackend};
    use crate::parallel::CpuParallelConfig;

    fn cpu_runners() -> Vec<Box<dyn MatmulBackend>> {
        vec![
            Box::new(SequentialBackend),
            Box::new(ParallelCpuBackend::new(CpuParallelConfig::with_workers(2)).unwrap()),
        ]
    }

    /// Returns the right product with one element nudged.
    struct Corrupted;

    impl MatmulBackend for Corrupted {
        fn backend(&self) -> Backend {
            Backend::GpuNaive
        }

        fn multiply(&mut self, a: &Matrix, b: &Matrix) -> Result<Timed> {
            let mut output = matmul_sequential(a, b)?;
            let last = output.as_slice().len() - 1;
            output.as_mut_slice()[last] *= 1.5;
            Ok(Timed {
                output,
                elapsed_ms: 1.0,
                gpu_phases: None,
            })
        }
    }

    struct Failing;

    impl MatmulBackend for Failing {
        fn backend(&self) -> Backend {
            Backend::GpuTiled
        }

        fn multiply(&mut self, _: &Matrix, _: &Matrix) -> Result<Timed> {
            Err(Error::Backend("device lost".into()))
        }
    }

    #[test]
    fn single_cell_plan() {
        let plan = BenchmarkPlan {
            sizes: vec![128],
            backends: vec![Backend::Sequential],
            repetitions: 3,
            warmup_runs: 0,
            ..BenchmarkPlan::default()
        };
        let res = run_plan(&plan, &mut cpu_runners()).unwrap();
        assert_eq!(res.measurements.len(), 1);
        let m = &res.measurements[0];
        assert_eq!(m.times_ms.len(), 3);
        assert!(m.verified);
        assert!(m.min_ms <= m.median_ms);
    }

    #[test]
    fn missing_gpu_is_skipped_not_failed() {
        let plan = BenchmarkPlan {
            sizes: vec![16, 32],
            backends: vec![Backend::ParallelCpu, Backend::GpuNaive],
            repetitions: 1,
            ..BenchmarkPlan::default()
        };
        let res = run_plan(&plan, &mut cpu_runners()).unwrap();
        assert_eq!(res.measurements.len(), 2);
        assert_eq!(res.skipped.len(), 2);
        assert!(res.skipped.iter().all(|s| s.backend == Backend::GpuNaive));
        assert!(res.all_ok());
    }

    #[test]
    fn failures_and_mismatches_are_per_cell() {
        let plan = BenchmarkPlan {
            sizes: vec![8, 16],
            backends: vec![Backend::Sequential, Backend::GpuNaive, Backend::GpuTiled],
            repetitions: 2,
            ..BenchmarkPlan::default()
        };
        let mut runners = cpu_runners();
        runners.push(Box::new(Corrupted));
        runners.push(Box::new(Failing));
        let res = run_plan(&plan, &mut runners).unwrap();
        assert_eq!(res.failures.len(), 2);
        assert_eq!(res.mismatches().count(), 2);
        assert!(!res.all_ok());
        let seq: Vec<_> = res
            .measurements
            .iter()
            .filter(|m| m.backend == Backend::Sequential)
            .collect();
        assert!(seq.iter().all(|m| m.verified));
    }

    #[test]
    fn sequential_cap_and_verify_cap() {
        let plan = BenchmarkPlan {
            sizes: vec![8, 24],
            backends: vec![Backend::Sequential, Backend::ParallelCpu],
            repetitions: 1,
            max_sequential_size: Some(8),
            verify_max_size: 8,
            ..BenchmarkPlan::default()
        };
        let res = run_plan(&plan, &mut cpu_runners()).unwrap();
        assert_eq!(res.skipped.len(), 1);
        assert_eq!(res.skipped[0].n, 24);
        let big = res.measurements.iter().find(|m| m.n == 24).unwrap();
        assert!(big.comparison.is_none() && !big.verified);
    }

    #[test]
    fn inputs_identical_across_backends() {
        let plan = BenchmarkPlan {
            sizes: vec![12, 20],
            backends: vec![Backend::Sequential, Backend::ParallelCpu],
            repetitions: 1,
            ..BenchmarkPlan::default()
        };
        let res = run_plan(&plan, &mut cpu_runners()).unwrap();
        for n in [12, 20] {
            let (a, b) = plan.inputs(n).unwrap();
            let want = a.digest() ^ b.digest().rotate_left(1);
            assert!(res
                .measurements
                .iter()
                .filter(|m| m.n == n)
                .all(|m| m.input_digest == want));
        }
        let (a, b) = plan.inputs(12).unwrap();
        assert!(!a.bitwise_eq(&b));
    }

    #[test]
    fn invalid_plans() {
        let base = BenchmarkPlan::default();
        for plan in [
            BenchmarkPlan { sizes: vec![], ..base.clone() },
            BenchmarkPlan { sizes: vec![256, 128], ..base.clone() },
            BenchmarkPlan { sizes: vec![0, 4], ..base.clone() },
            BenchmarkPlan { repetitions: 0, ..base.clone() },
            BenchmarkPlan { backends: vec![], ..base.clone() },
        ] {
            assert!(matches!(
                run_plan(&plan, &mut cpu_runners()),
                Err(Error::InvalidConfig(_))
            ));
        }
    }

    #[test]
    fn median_and_min() {
        assert_eq!(summarize(&[3.0, 1.0, 2.0]).unwrap(), (2.0, 1.0));
        assert_eq!(summarize(&[4.0, 1.0]).unwrap(), (2.5, 1.0));
        assert!(summarize(&[]).is_err());
        assert!(summarize(&[1.0, f64::NAN]).is_err());
    }

    #[test]
    fn verify_reports_worst_element() {
        let mut runners = cpu_runners();
        runners.push(Box::new(Corrupted));
        let out = verify_backends(&[5], 42, &mut runners).unwrap();
        let bad = out.iter().find(|o| o.backend == Backend::GpuNaive).unwrap();
        assert!(!bad.passed);
        assert_eq!(bad.report.unwrap().worst_index, (4, 4));
        assert!(out.iter().filter(|o| !o.backend.is_gpu()).all(|o| o.passed));
    }
}
