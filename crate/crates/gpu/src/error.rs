use std::path::PathBuf;

use gemmlab::GpuVariant;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GpuError {
    #[error("no GPU device available")]
    DeviceUnavailable,

    #[error("out of device memory: need {requested} bytes per buffer, device allows {limit}")]
    OutOfDeviceMemory { requested: u64, limit: u64 },

    #[error("no {0:?} kernel loaded")]
    KernelMissing(GpuVariant),

    #[error("shader {name}: {message}")]
    ShaderContract { name: String, message: String },

    #[error("reading shader {path}: {source}")]
    ShaderIo {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("GPU matmul needs square inputs of equal size, got {0}")]
    Shape(String),

    #[error("GPU backend error: {0}")]
    Backend(String),
}

impl From<GpuError> for gemmlab::Error {
    fn from(err: GpuError) -> Self {
        gemmlab::Error::Backend(err.to_string())
    }
}
