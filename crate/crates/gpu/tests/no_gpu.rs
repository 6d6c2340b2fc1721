//! Behaviour with every device hidden. Runs as its own process so the
//! environment variable cannot leak into other tests.

use gemmlab::{GpuVariant, Matrix, TimingScope};
use gemmlab_gpu::{gpu_backends, matmul_gpu, probe_device, GpuContext, GpuError, ShaderSet};

#[test]
fn disabled_gpu_is_reported_absent_everywhere() {
    std::env::set_var(gemmlab::device::NO_GPU_ENV, "1");

    let info = probe_device();
    assert!(!info.available);
    assert_eq!(info.to_string(), "no GPU device");

    assert!(matches!(GpuContext::open(), Err(GpuError::DeviceUnavailable)));

    let (backends, note) = gpu_backends(
        &[GpuVariant::Naive, GpuVariant::Tiled],
        TimingScope::default(),
        &ShaderSet::default(),
    );
    assert!(backends.is_empty());
    assert!(note.is_some());

    let a = Matrix::identity(4).unwrap();
    let err = matmul_gpu(&a, &a, GpuVariant::Naive, TimingScope::default()).unwrap_err();
    assert!(matches!(err, GpuError::DeviceUnavailable));

    let as_core: gemmlab::Error = err.into();
    assert!(matches!(as_core, gemmlab::Error::Backend(_)));
}
