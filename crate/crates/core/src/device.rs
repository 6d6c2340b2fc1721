//! Plain data shared between the harness and GPU backends: device
//! descriptions, kernel variants, timing scopes and per-phase timings.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Setting this to `1` hides every GPU device.
pub const NO_GPU_ENV: &str = "GEMMLAB_NO_GPU";

pub fn gpu_disabled_by_env() -> bool {
    std::env::var(NO_GPU_ENV)
        .map(|v| {
            let v = v.trim();
            !(v.is_empty() || v == "0" || v.eq_ignore_ascii_case("false"))
        })
        .unwrap_or(false)
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct DeviceInfo {
    pub available: bool,
    pub name: String,
    /// Graphics API the adapter was opened through (Vulkan, Metal, ...).
    pub api: String,
    pub device_type: String,
    /// Dedicated memory when the driver reports it.
    pub dedicated_memory_bytes: Option<u64>,
    pub max_buffer_bytes: u64,
    pub max_workgroup_size: u32,
}

impl DeviceInfo {
    pub fn unavailable() -> Self {
        Self::default()
    }
}

impl fmt::Display for DeviceInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if !self.available {
            return f.write_str("no GPU device");
        }
        write!(f, "{} ({}, {})", self.name, self.device_type, self.api)?;
        match self.dedicated_memory_bytes {
            Some(bytes) => write!(f, ", {} MiB", bytes / (1024 * 1024))?,
            None => f.write_str(", memory size not reported")?,
        }
        write!(
            f,
            ", max buffer {} MiB, max workgroup {} invocations",
            self.max_buffer_bytes / (1024 * 1024),
            self.max_workgroup_size
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GpuVariant {
    /// One invocation per output element, global memory only.
    Naive,
    /// 16x16 tiles staged through workgroup memory.
    Tiled,
}

/// Which phases of a GPU run fall inside the timed interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TimingScope {
    /// Host-to-device copies, kernel, device-to-host copy. Buffer
    /// allocation happens before the clock starts.
    #[default]
    TransfersAndKernel,
    /// Buffer allocation plus everything in `TransfersAndKernel`.
    AllocTransfersKernel,
    KernelOnly,
}

impl TimingScope {
    pub const ALL: [TimingScope; 3] = [
        TimingScope::TransfersAndKernel,
        TimingScope::AllocTransfersKernel,
        TimingScope::KernelOnly,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TimingScope::TransfersAndKernel => "transfers-and-kernel",
            TimingScope::AllocTransfersKernel => "alloc-transfers-kernel",
            TimingScope::KernelOnly => "kernel-only",
        }
    }
}

impl fmt::Display for TimingScope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TimingScope {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TimingScope::ALL
            .into_iter()
            .find(|scope| scope.as_str() == s)
            .ok_or_else(|| {
                format!(
                    "unknown timing scope `{s}` (expected transfers-and-kernel, \
                     alloc-transfers-kernel or kernel-only)"
                )
            })
    }
}

/// Wall-clock phase breakdown of one GPU matmul, in milliseconds.
///
/// Phases are measured back to back from a single monotonic clock, so
/// `total_ms` is exactly the sum of the phases selected by `scope`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GpuTiming {
    pub scope: TimingScope,
    pub alloc_ms: f64,
    pub h2d_ms: f64,
    /// Dispatch submission until the queue reports completion.
    pub kernel_ms: f64,
    pub d2h_ms: f64,
    pub total_ms: f64,
    /// Kernel duration from GPU timestamp queries, when the adapter
    /// supports them.
    pub kernel_device_ms: Option<f64>,
}

impl GpuTiming {
    pub fn from_phases(
        scope: TimingScope,
        alloc_ms: f64,
        h2d_ms: f64,
        kernel_ms: f64,
        d2h_ms: f64,
        kernel_device_ms: Option<f64>,
    ) -> Self {
        let total_ms = match scope {
            TimingScope::TransfersAndKernel => h2d_ms + kernel_ms + d2h_ms,
            TimingScope::AllocTransfersKernel => alloc_ms + h2d_ms + kernel_ms + d2h_ms,
            TimingScope::KernelOnly => kernel_ms,
        };
        Self {
            scope,
            alloc_ms,
            h2d_ms,
            kernel_ms,
            d2h_ms,
            total_ms,
            kernel_device_ms,
        }
    }

    /// Checks the phase invariants: all phases non-negative and finite,
    /// `total >= kernel`, and `total` matching the scope's phase sum.
    pub fn is_consistent(&self) -> bool {
        let phases = [self.alloc_ms, self.h2d_ms, self.kernel_ms, self.d2h_ms];
        if phases.iter().any(|p| !p.is_finite() || *p < 0.0) {
            return false;
        }
        if self.kernel_device_ms.is_some_and(|k| !k.is_finite() || k < 0.0) {
            return false;
        }
        let expected = Self::from_phases(
            self.scope,
            self.alloc_ms,
            self.h2d_ms,
            self.kernel_ms,
            self.d2h_ms,
            None,
        )
        .total_ms;
        (self.total_ms - expected).abs() <= 1e-9 * expected.max(1.0)
            && self.total_ms + 1e-12 >= self.kernel_ms
    }
}
