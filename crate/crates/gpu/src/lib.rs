//! GPU backends for gemmlab on top of wgpu.
//!
//! [`probe_device`] reports what hardware is present; [`GpuMatmul`] loads
//! the WGSL kernels and runs phase-timed multiplications; [`GpuBackend`]
//! adapts it to the sweep harness. Setting `GEMMLAB_NO_GPU=1` hides every
//! device.

mod device;
mod error;
mod matmul;
pub mod shaders;

pub use device::{probe_device, GpuContext, ALLOW_SOFTWARE_ENV};
pub use error::GpuError;
pub use matmul::{gpu_backends, GpuBackend, GpuMatmul};
pub use shaders::{check_contract, KernelSource, ShaderSet};

/// One-shot GPU matmul: opens the device, compiles the located kernels and
/// multiplies once.
pub fn matmul_gpu(
    a: &gemmlab::Matrix,
    b: &gemmlab::Matrix,
    variant: gemmlab::GpuVariant,
    scope: gemmlab::TimingScope,
) -> Result<(gemmlab::Matrix, gemmlab::GpuTiming), GpuError> {
    let ctx = GpuContext::open()?;
    let (shaders, _) = ShaderSet::locate()?;
    GpuMatmul::new(ctx, &shaders)?.multiply(a, b, variant, scope)
}
