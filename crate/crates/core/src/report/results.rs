//! Machine-readable sweep dump (JSON). `schema_version` is bumped on any
//! incompatible change; readers reject versions they do not know.

use serde::{Deserialize, Serialize};

use crate::device::DeviceInfo;
use crate::error::{Error, Result};
use crate::harness::{BenchmarkPlan, SweepResult};
use crate::parallel::CpuParallelConfig;
use crate::speedup::SpeedupTable;

pub const RESULTS_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub schema_version: u32,
    pub plan: BenchmarkPlan,
    pub cpu: CpuParallelConfig,
    pub device: DeviceInfo,
    pub sweep: SweepResult,
    pub table: SpeedupTable,
}

impl ResultsFile {
    pub fn new(
        plan: BenchmarkPlan,
        cpu: CpuParallelConfig,
        device: DeviceInfo,
        sweep: SweepResult,
        table: SpeedupTable,
    ) -> Self {
        Self {
            schema_version: RESULTS_SCHEMA_VERSION,
            plan,
            cpu,
            device,
            sweep,
            table,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Results(e.to_string()))
    }

    pub fn from_json(text: &str) -> Result<Self> {
        #[derive(Deserialize)]
        struct Version {
            schema_version: u32,
        }
        let version: Version =
            serde_json::from_str(text).map_err(|e| Error::Results(e.to_string()))?;
        if version.schema_version != RESULTS_SCHEMA_VERSION {
            return Err(Error::Results(format!(
                "unsupported schema_version {} (expected {RESULTS_SCHEMA_VERSION})",
                version.schema_version
            )));
        }
        serde_json::from_str(text).map_err(|e| Error::Results(e.to_string()))
    }
}
