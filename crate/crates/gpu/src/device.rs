use std::panic::{catch_unwind, AssertUnwindSafe};

use gemmlab::device::gpu_disabled_by_env;
use gemmlab::DeviceInfo;

use crate::error::GpuError;

/// Set to `1` to also accept CPU-emulated adapters (lavapipe, WARP, ...).
pub const ALLOW_SOFTWARE_ENV: &str = "GEMMLAB_ALLOW_SOFTWARE_GPU";

/// Describes the best usable GPU, or `available: false`. Never panics.
pub fn probe_device() -> DeviceInfo {
    match catch_unwind(select_adapter) {
        Ok(Some(adapter)) => describe(&adapter),
        Ok(None) => DeviceInfo::unavailable(),
        Err(_) => {
            log::warn!("GPU probe panicked inside the driver stack; treating GPU as absent");
            DeviceInfo::unavailable()
        }
    }
}

/// An opened logical device and its queue.
pub struct GpuContext {
    pub(crate) device: wgpu::Device,
    pub(crate) queue: wgpu::Queue,
    pub(crate) info: DeviceInfo,
    pub(crate) timestamps: bool,
    pub(crate) max_binding_bytes: u64,
}

impl std::fmt::Debug for GpuContext {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GpuContext")
            .field("info", &self.info)
            .field("timestamps", &self.timestamps)
            .finish_non_exhaustive()
    }
}

impl GpuContext {
    pub fn open() -> Result<Self, GpuError> {
        let adapter = catch_unwind(select_adapter)
            .map_err(|_| GpuError::Backend("driver panicked during adapter selection".into()))?
            .ok_or(GpuError::DeviceUnavailable)?;
        let info = describe(&adapter);
        let timestamps = adapter.features().contains(wgpu::Features::TIMESTAMP_QUERY);
        let limits = adapter.limits();
        let max_binding_bytes = limits
            .max_buffer_size
            .min(limits.max_storage_buffer_binding_size);

        let request = adapter.request_device(&wgpu::DeviceDescriptor {
            label: Some("gemmlab"),
            required_features: if timestamps {
                wgpu::Features::TIMESTAMP_QUERY
            } else {
                wgpu::Features::empty()
            },
            required_limits: limits,
            ..Default::default()
        });
        let (device, queue) = catch_unwind(AssertUnwindSafe(|| pollster::block_on(request)))
            .map_err(|_| GpuError::Backend("driver panicked while opening the device".into()))?
            .map_err(|e| GpuError::Backend(e.to_string()))?;
        device.on_uncaptured_error(std::sync::Arc::new(|err: wgpu::Error| {
            log::error!("uncaptured GPU error: {err}");
        }));

        Ok(Self {
            device,
            queue,
            info,
            timestamps,
            max_binding_bytes,
        })
    }

    pub fn info(&self) -> &DeviceInfo {
        &self.info
    }

    pub(crate) fn wait(&self) -> Result<(), GpuError> {
        self.device
            .poll(wgpu::PollType::wait_indefinitely())
            .map(|_| ())
            .map_err(|e| GpuError::Backend(format!("waiting for the queue: {e}")))
    }
}

fn select_adapter() -> Option<wgpu::Adapter> {
    if gpu_disabled_by_env() {
        return None;
    }
    let allow_software = std::env::var(ALLOW_SOFTWARE_ENV).is_ok_and(|v| v.trim() == "1");
    let instance = wgpu::Instance::new(wgpu::InstanceDescriptor::new_without_display_handle_from_env());
    let adapters = pollster::block_on(instance.enumerate_adapters(wgpu::Backends::all()));
    adapters
        .into_iter()
        .filter(|a| {
            let caps = a.get_downlevel_capabilities();
            caps.flags.contains(wgpu::DownlevelFlags::COMPUTE_SHADERS)
                && (allow_software || a.get_info().device_type != wgpu::DeviceType::Cpu)
        })
        .max_by_key(|a| rank(a.get_info().device_type))
}

fn rank(kind: wgpu::DeviceType) -> u8 {
    match kind {
        wgpu::DeviceType::DiscreteGpu => 4,
        wgpu::DeviceType::IntegratedGpu => 3,
        wgpu::DeviceType::VirtualGpu => 2,
        wgpu::DeviceType::Other => 1,
        wgpu::DeviceType::Cpu => 0,
    }
}

fn describe(adapter: &wgpu::Adapter) -> DeviceInfo {
    let info = adapter.get_info();
    let limits = adapter.limits();
    DeviceInfo {
        available: true,
        name: info.name,
        api: format!("{:?}", info.backend),
        device_type: format!("{:?}", info.device_type),
        // wgpu does not expose the VRAM size.
        dedicated_memory_bytes: None,
        max_buffer_bytes: limits
            .max_buffer_size
            .min(limits.max_storage_buffer_binding_size),
        max_workgroup_size: limits.max_compute_invocations_per_workgroup,
    }
}
