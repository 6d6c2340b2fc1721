use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use gemmlab::{Backend, Schedule, TimingScope};

#[derive(Debug, Parser)]
#[command(
    name = "gemmlab",
    version,
    about = "Benchmark dense matrix multiplication on sequential CPU, parallel CPU and GPU"
)]
pub struct Cli {
    /// More log output on stderr (-v info, -vv debug)
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run a size sweep and write the speedup table as CSV
    Bench(BenchArgs),
    /// Check every backend against the sequential reference
    Verify(VerifyArgs),
    /// Regenerate figures from a CSV written by `bench`
    Plot(PlotArgs),
    /// Show the GPU that would be used
    Devices,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// Matrix sizes: comma list, ranges as start:end:xFACTOR or start:end:+STEP
    #[arg(long, default_value = "128,256,512,1024,2048,3072,4096")]
    pub sizes: String,

    /// Seed for A; B uses seed + 1
    #[arg(long, default_value_t = gemmlab::harness::DEFAULT_SEED)]
    pub seed: u64,

    /// Timed repetitions per cell; the median is reported
    #[arg(long, default_value_t = 3)]
    pub reps: usize,

    /// Untimed runs before the timed ones
    #[arg(long, default_value_t = 1)]
    pub warmup: usize,

    /// Backends to run: comma list of seq, cpu, gpu-naive, gpu-tiled, or all
    #[arg(long, default_value = "all", value_parser = parse_backend_list)]
    pub backends: BackendList,

    /// Only the sequential and parallel CPU backends
    #[arg(long, conflicts_with = "backends")]
    pub cpu_only: bool,

    /// What the GPU time includes: transfers-and-kernel, alloc-transfers-kernel or kernel-only
    #[arg(long, default_value_t = TimingScope::default())]
    pub timing_scope: TimingScope,

    /// Skip the sequential backend above this size [default: no limit]
    #[arg(long)]
    pub max_seq_size: Option<usize>,

    /// Do not verify results above this size
    #[arg(long, default_value_t = gemmlab::harness::DEFAULT_VERIFY_MAX_SIZE)]
    pub verify_cap: usize,

    #[command(flatten)]
    pub cpu: CpuArgs,

    /// Directory with matmul_naive.wgsl / matmul_tiled.wgsl
    #[arg(long)]
    pub shader_dir: Option<PathBuf>,

    /// CSV destination, `-` for stdout
    #[arg(short, long, default_value = "-")]
    pub output: String,

    /// Also write SVG figures into this directory
    #[arg(long)]
    pub figures: Option<PathBuf>,

    /// Also write every raw measurement as JSON
    #[arg(long)]
    pub results_json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CpuArgs {
    /// Parallel CPU worker count [default: GEMMLAB_THREADS or hardware threads]
    #[arg(long)]
    pub threads: Option<usize>,

    /// Output elements per work unit [default: one row]
    #[arg(long)]
    pub chunk: Option<usize>,

    /// Parallel CPU work distribution: static or dynamic
    #[arg(long, default_value = "static")]
    pub schedule: Schedule,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Matrix sizes, same syntax as for `bench`
    #[arg(long, default_value = "64,128,256,257")]
    pub sizes: String,

    /// Seed for A; B uses seed + 1
    #[arg(long, default_value_t = gemmlab::harness::DEFAULT_SEED)]
    pub seed: u64,

    /// Backends to check, same syntax as for `bench`
    #[arg(long, default_value = "all", value_parser = parse_backend_list)]
    pub backends: BackendList,

    #[command(flatten)]
    pub cpu: CpuArgs,

    /// Directory with matmul_naive.wgsl / matmul_tiled.wgsl
    #[arg(long)]
    pub shader_dir: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PlotArgs {
    /// CSV produced by `bench`
    #[arg(short, long)]
    pub input: PathBuf,

    /// Output directory for the SVG files
    #[arg(long, default_value = "figures")]
    pub figures: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BackendList(pub Vec<Backend>);

fn parse_backend_list(s: &str) -> Result<BackendList, String> {
    gemmlab::parse_backends(s).map(BackendList)
}
