//! Runs the fixture kernel on a real adapter. Silently does nothing on
//! machines without one.

use gemmlab::backend::MatmulBackend;
use gemmlab::{compare, matmul_sequential, GpuVariant, Matrix, TimingScope};
use gemmlab_gpu::{GpuBackend, GpuContext, GpuMatmul, KernelSource, ShaderSet};

fn engine() -> Option<GpuMatmul> {
    let ctx = match GpuContext::open() {
        Ok(ctx) => ctx,
        Err(e) => {
            eprintln!("skipping: {e}");
            return None;
        }
    };
    let wgsl = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/valid_naive.wgsl")).unwrap();
    let mut set = ShaderSet::default();
    set.insert(KernelSource::new(GpuVariant::Naive, "valid_naive.wgsl", wgsl).unwrap());
    Some(GpuMatmul::new(ctx, &set).unwrap())
}

#[test]
fn fixture_kernel_matches_oracle_and_phases_add_up() {
    let Some(engine) = engine() else { return };
    for n in [1, 16, 17, 64, 100] {
        let a = Matrix::random(n, 3).unwrap();
        let b = Matrix::random(n, 4).unwrap();
        for scope in TimingScope::ALL {
            let (c, timing) = engine.multiply(&a, &b, GpuVariant::Naive, scope).unwrap();
            let report = compare(&matmul_sequential(&a, &b).unwrap(), &c).unwrap();
            assert!(report.max_rel_diff <= gemmlab::backend::GPU_REL_TOLERANCE, "n={n}: {report:?}");
            assert!(timing.is_consistent(), "{timing:?}");
        }
    }
    assert!(matches!(
        engine.multiply(&Matrix::identity(4).unwrap(), &Matrix::identity(4).unwrap(), GpuVariant::Tiled, TimingScope::default()),
        Err(gemmlab_gpu::GpuError::KernelMissing(GpuVariant::Tiled))
    ));
}

#[test]
fn backend_adapter_reports_phases() {
    let Some(engine) = engine() else { return };
    let engine = std::rc::Rc::new(std::cell::RefCell::new(engine));
    let mut backend = GpuBackend::new(engine, GpuVariant::Naive, TimingScope::KernelOnly);
    let a = Matrix::random(32, 1).unwrap();
    let timed = backend.multiply(&a, &a).unwrap();
    let phases = timed.gpu_phases.unwrap();
    assert_eq!(timed.elapsed_ms, phases.total_ms);
    assert_eq!(phases.total_ms, phases.kernel_ms);
}
