use std::fs;
use std::io::Write;
use std::path::Path;

use gemmlab::backend::{MatmulBackend, ParallelCpuBackend, SequentialBackend};
use gemmlab::device::gpu_disabled_by_env;
use gemmlab::harness::{verify_backends, VerifyOutcome};
use gemmlab::report::{emit_csv, emit_figures, parse_csv, quantize, render_table, ResultsFile};
use gemmlab::{
    compute_speedups, parse_sizes, run_plan, Backend, BenchmarkPlan, CpuParallelConfig,
    DeviceInfo, Error, GpuVariant, SpeedupTable, TimingScope,
};
use gemmlab_gpu::{gpu_backends, probe_device, ShaderSet};

use crate::args::{BenchArgs, CpuArgs, PlotArgs, VerifyArgs};

#[derive(Debug)]
pub enum Failure {
    /// Bad flags or configuration; exit code 2.
    Usage(String),
    /// The run itself failed or results did not verify; exit code 1.
    Run(String),
}

impl From<Error> for Failure {
    fn from(err: Error) -> Self {
        match err {
            Error::InvalidConfig(_) | Error::InvalidDimension(_) => Failure::Usage(err.to_string()),
            other => Failure::Run(other.to_string()),
        }
    }
}

pub fn bench(args: BenchArgs) -> Result<(), Failure> {
    let backends = if args.cpu_only {
        vec![Backend::Sequential, Backend::ParallelCpu]
    } else {
        args.backends.0.clone()
    };
    let plan = BenchmarkPlan {
        sizes: parse_sizes(&args.sizes)?,
        seed: args.seed,
        repetitions: args.reps,
        warmup_runs: args.warmup,
        backends,
        timing_scope: args.timing_scope,
        max_sequential_size: args.max_seq_size,
        verify_max_size: args.verify_cap,
    };
    plan.validate()?;
    let cpu = cpu_config(&args.cpu)?;

    let (mut runners, device) = build_runners(
        &plan.backends,
        cpu,
        plan.timing_scope,
        args.shader_dir.as_deref(),
    )?;
    let sweep = run_plan(&plan, &mut runners)?;
    for skip in &sweep.skipped {
        log::info!("skipped {} at n={}: {}", skip.backend, skip.n, skip.reason);
    }
    for fail in &sweep.failures {
        eprintln!("{} failed at n={}: {}", fail.backend, fail.n, fail.error);
    }
    for m in sweep.mismatches() {
        eprintln!("{} result mismatch at n={}", m.backend, m.n);
    }

    let table = compute_speedups(&sweep.measurements)?;
    if table.is_empty() {
        return Err(Failure::Run("no measurements were produced".into()));
    }
    let csv = emit_csv(&table)?;
    if args.output == "-" {
        print!("{csv}");
        eprint!("{}", render_table(&table)?);
    } else {
        write_file(Path::new(&args.output), &csv)?;
        print!("{}", render_table(&table)?);
    }

    if let Some(dir) = &args.figures {
        write_figures(&quantize(&table), dir)?;
    }
    let all_ok = sweep.all_ok();
    if let Some(path) = &args.results_json {
        let results = ResultsFile::new(plan, cpu, device, sweep, table);
        write_file(path, &results.to_json()?)?;
    }
    if all_ok {
        Ok(())
    } else {
        Err(Failure::Run("some cells failed or did not verify".into()))
    }
}

pub fn verify(args: VerifyArgs) -> Result<(), Failure> {
    let sizes = parse_sizes(&args.sizes)?;
    let cpu = cpu_config(&args.cpu)?;
    let (mut runners, _) = build_runners(
        &args.backends.0,
        cpu,
        TimingScope::default(),
        args.shader_dir.as_deref(),
    )?;
    let outcomes = verify_backends(&sizes, args.seed, &mut runners)?;

    let mut stdout = std::io::stdout().lock();
    let ran: Vec<Backend> = runners.iter().map(|r| r.backend()).collect();
    let _ = write!(stdout, "{:>6}", "n");
    for backend in &args.backends.0 {
        let _ = write!(stdout, "  {:>10}", backend.as_str());
    }
    let _ = writeln!(stdout);
    for &n in &sizes {
        let _ = write!(stdout, "{n:>6}");
        for backend in &args.backends.0 {
            let cell = if ran.contains(backend) {
                match outcome(&outcomes, *backend, n) {
                    Some(o) if o.passed => "PASS",
                    _ => "FAIL",
                }
            } else {
                "SKIP"
            };
            let _ = write!(stdout, "  {cell:>10}");
        }
        let _ = writeln!(stdout);
    }
    drop(stdout);

    let failed: Vec<&VerifyOutcome> = outcomes.iter().filter(|o| !o.passed).collect();
    for o in &failed {
        match (&o.error, &o.report) {
            (Some(err), _) => eprintln!("{} n={}: {err}", o.backend, o.n),
            (None, Some(r)) => eprintln!(
                "{} n={}: max abs diff {:e}, max rel diff {:e} (allowed: {})",
                o.backend,
                o.n,
                r.max_abs_diff,
                r.max_rel_diff,
                o.backend.tolerance()
            ),
            (None, None) => {}
        }
    }
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure::Run(format!("{} check(s) failed", failed.len())))
    }
}

pub fn plot(args: PlotArgs) -> Result<(), Failure> {
    let text = fs::read_to_string(&args.input)
        .map_err(|e| Failure::Run(format!("reading {}: {e}", args.input.display())))?;
    let table = parse_csv(&text)?;
    for p in emit_figures(&table, &args.figures)? {
        log::info!("wrote {}", p.display());
    }
    print!("{}", render_table(&table)?);
    Ok(())
}

pub fn devices() -> Result<(), Failure> {
    let info = probe_device();
    println!("{info}");
    println!(
        "CPU hardware threads: {}",
        gemmlab::parallel::hardware_threads()
    );
    Ok(())
}

fn cpu_config(args: &CpuArgs) -> Result<CpuParallelConfig, Failure> {
    let mut cfg = CpuParallelConfig::from_env()?;
    if let Some(workers) = args.threads {
        cfg.workers = workers;
    }
    cfg.chunk = args.chunk;
    cfg.schedule = args.schedule;
    cfg.validate()?;
    Ok(cfg)
}

type Runners = Vec<Box<dyn MatmulBackend>>;

fn build_runners(
    backends: &[Backend],
    cpu: CpuParallelConfig,
    scope: TimingScope,
    shader_dir: Option<&Path>,
) -> Result<(Runners, DeviceInfo), Failure> {
    let mut runners: Runners = Vec::new();
    if backends.contains(&Backend::Sequential) {
        runners.push(Box::new(SequentialBackend));
    }
    if backends.contains(&Backend::ParallelCpu) {
        runners.push(Box::new(ParallelCpuBackend::new(cpu)?));
    }

    let variants: Vec<GpuVariant> = backends.iter().filter_map(|b| b.gpu_variant()).collect();
    if variants.is_empty() {
        return Ok((runners, DeviceInfo::unavailable()));
    }
    if gpu_disabled_by_env() {
        eprintln!("GPU disabled by {}; GPU columns will be NA", gemmlab::device::NO_GPU_ENV);
        return Ok((runners, DeviceInfo::unavailable()));
    }
    let shaders = match shader_dir {
        Some(dir) => ShaderSet::load_dir(dir).map_err(|e| Failure::Usage(e.to_string()))?,
        None => match ShaderSet::locate() {
            Ok((set, _)) => set,
            Err(e) => {
                eprintln!("GPU kernels unusable ({e}); GPU columns will be NA");
                ShaderSet::default()
            }
        },
    };
    let (gpu, note) = gpu_backends(&variants, scope, &shaders);
    if let Some(note) = note {
        eprintln!("GPU: {note}; affected GPU columns will be NA");
    }
    let device = match gpu.first() {
        Some(g) => g.device_info(),
        None => probe_device(),
    };
    runners.extend(gpu.into_iter().map(|g| Box::new(g) as Box<dyn MatmulBackend>));
    Ok((runners, device))
}

fn outcome(outcomes: &[VerifyOutcome], backend: Backend, n: usize) -> Option<&VerifyOutcome> {
    outcomes.iter().find(|o| o.backend == backend && o.n == n)
}

fn write_figures(table: &SpeedupTable, dir: &Path) -> Result<(), Failure> {
    match emit_figures(table, dir) {
        Ok(paths) => {
            for p in paths {
                log::info!("wrote {}", p.display());
            }
            Ok(())
        }
        Err(Error::InsufficientData { needed, got }) => {
            eprintln!("figures skipped: need at least {needed} sizes, have {got}");
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| Failure::Run(format!("writing {}: {e}", path.display())))
}
