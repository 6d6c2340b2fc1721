//! Loading and contract-checking of the WGSL matmul kernels.
//!
//! The kernels themselves ship as assets (`matmul_naive.wgsl`,
//! `matmul_tiled.wgsl`). Each must expose:
//!
//! ```wgsl
//! @group(0) @binding(0) var<storage, read>       a: array<f32>;
//! @group(0) @binding(1) var<storage, read>       b: array<f32>;
//! @group(0) @binding(2) var<storage, read_write> c: array<f32>;
//! @group(0) @binding(3) var<uniform>             params: Params; // first member: n: u32
//!
//! @compute @workgroup_size(16, 16, 1)
//! fn main(@builtin(global_invocation_id) gid: vec3<u32>) { ... }
//! ```
//!
//! The host dispatches `ceil(n / 16)` workgroups along x (columns) and y
//! (rows). Invocations outside `n` must not write.

use std::path::{Path, PathBuf};

use gemmlab::GpuVariant;
use wgpu::naga;

use crate::error::GpuError;

pub const ENTRY_POINT: &str = "main";
pub const WORKGROUP_SIZE: [u32; 3] = [16, 16, 1];
pub const TILE: u32 = 16;
/// Bytes the host uploads for the `params` uniform: `n` then zero padding.
pub const PARAMS_BYTES: u64 = 16;

/// Directory override for the kernel assets.
pub const SHADER_DIR_ENV: &str = "GEMMLAB_SHADER_DIR";

pub fn file_name(variant: GpuVariant) -> &'static str {
    match variant {
        GpuVariant::Naive => "matmul_naive.wgsl",
        GpuVariant::Tiled => "matmul_tiled.wgsl",
    }
}

/// WGSL source that passed [`check_contract`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KernelSource {
    pub variant: GpuVariant,
    pub name: String,
    pub wgsl: String,
}

#[derive(Debug, Clone, Default)]
pub struct ShaderSet {
    pub naive: Option<KernelSource>,
    pub tiled: Option<KernelSource>,
}

impl ShaderSet {
    pub fn get(&self, variant: GpuVariant) -> Option<&KernelSource> {
        match variant {
            GpuVariant::Naive => self.naive.as_ref(),
            GpuVariant::Tiled => self.tiled.as_ref(),
        }
    }

    pub fn insert(&mut self, kernel: KernelSource) {
        match kernel.variant {
            GpuVariant::Naive => self.naive = Some(kernel),
            GpuVariant::Tiled => self.tiled = Some(kernel),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.naive.is_none() && self.tiled.is_none()
    }

    /// Loads whichever kernel files exist in `dir`. A file that exists but
    /// breaks the binding contract is an error.
    pub fn load_dir(dir: &Path) -> Result<Self, GpuError> {
        let mut set = ShaderSet::default();
        for variant in [GpuVariant::Naive, GpuVariant::Tiled] {
            let path = dir.join(file_name(variant));
            match std::fs::read_to_string(&path) {
                Ok(wgsl) => set.insert(KernelSource::new(variant, &path.display().to_string(), wgsl)?),
                Err(e) if e.kind() == std::io::ErrorKind::NotFound => {}
                Err(source) => return Err(GpuError::ShaderIo { path, source }),
            }
        }
        Ok(set)
    }

    /// Finds the kernel directory: `GEMMLAB_SHADER_DIR`, then `shaders/`
    /// next to the executable, then the workspace `shaders/` directory.
    pub fn locate() -> Result<(Self, Option<PathBuf>), GpuError> {
        for dir in search_dirs() {
            if dir.is_dir() {
                let set = Self::load_dir(&dir)?;
                if !set.is_empty() {
                    return Ok((set, Some(dir)));
                }
            }
        }
        Ok((ShaderSet::default(), None))
    }
}

fn search_dirs() -> Vec<PathBuf> {
    let mut dirs = Vec::new();
    if let Some(dir) = std::env::var_os(SHADER_DIR_ENV) {
        dirs.push(PathBuf::from(dir));
        return dirs;
    }
    if let Some(exe_dir) = std::env::current_exe().ok().and_then(|p| p.parent().map(Path::to_path_buf)) {
        dirs.push(exe_dir.join("shaders"));
    }
    dirs.push(Path::new(env!("CARGO_MANIFEST_DIR")).join("../../shaders"));
    dirs
}

impl KernelSource {
    pub fn new(variant: GpuVariant, name: &str, wgsl: String) -> Result<Self, GpuError> {
        check_contract(name, &wgsl)?;
        Ok(Self {
            variant,
            name: name.to_owned(),
            wgsl,
        })
    }
}

/// Parses and validates `wgsl`, then checks the entry point and binding
/// layout described in the module docs.
pub fn check_contract(name: &str, wgsl: &str) -> Result<(), GpuError> {
    let fail = |message: String| GpuError::ShaderContract {
        name: name.to_owned(),
        message,
    };

    let module = naga::front::wgsl::parse_str(wgsl).map_err(|e| fail(e.emit_to_string(wgsl)))?;
    naga::valid::Validator::new(
        naga::valid::ValidationFlags::all(),
        naga::valid::Capabilities::default(),
    )
    .validate(&module)
    .map_err(|e| fail(format!("validation failed: {}", e.as_inner())))?;

    let entry = module
        .entry_points
        .iter()
        .find(|ep| ep.name == ENTRY_POINT)
        .ok_or_else(|| fail(format!("no entry point named `{ENTRY_POINT}`")))?;
    if entry.stage != naga::ShaderStage::Compute {
        return Err(fail(format!("`{ENTRY_POINT}` is not a compute entry point")));
    }
    if entry.workgroup_size != WORKGROUP_SIZE {
        return Err(fail(format!(
            "workgroup size {:?}, expected {WORKGROUP_SIZE:?}",
            entry.workgroup_size
        )));
    }

    let mut seen = [false; 4];
    for (_, var) in module.global_variables.iter() {
        let Some(binding) = &var.binding else { continue };
        if binding.group != 0 || binding.binding > 3 {
            return Err(fail(format!(
                "unexpected resource at group {} binding {}",
                binding.group, binding.binding
            )));
        }
        let slot = binding.binding as usize;
        let ty = &module.types[var.ty].inner;
        match slot {
            0..=2 => {
                let want_write = slot == 2;
                let naga::AddressSpace::Storage { access } = var.space else {
                    return Err(fail(format!("binding {slot} must be a storage buffer")));
                };
                if access.contains(naga::StorageAccess::STORE) != want_write {
                    return Err(fail(format!(
                        "binding {slot} must be {}",
                        if want_write { "read_write" } else { "read-only" }
                    )));
                }
                if !is_f32_array(&module, ty) {
                    return Err(fail(format!("binding {slot} must be array<f32>")));
                }
            }
            _ => {
                if var.space != naga::AddressSpace::Uniform {
                    return Err(fail("binding 3 must be a uniform".into()));
                }
                let naga::TypeInner::Struct { members, span } = ty else {
                    return Err(fail("binding 3 must be a struct".into()));
                };
                let first_is_u32 = members.first().is_some_and(|m| {
                    m.offset == 0
                        && matches!(
                            module.types[m.ty].inner,
                            naga::TypeInner::Scalar(naga::Scalar::U32)
                        )
                });
                if !first_is_u32 {
                    return Err(fail("params must start with `n: u32`".into()));
                }
                if u64::from(*span) > PARAMS_BYTES {
                    return Err(fail(format!("params struct is {span} bytes, at most {PARAMS_BYTES} allowed")));
                }
            }
        }
        seen[slot] = true;
    }
    if let Some(missing) = seen.iter().position(|s| !s) {
        return Err(fail(format!("binding {missing} is not declared")));
    }
    Ok(())
}

fn is_f32_array(module: &naga::Module, ty: &naga::TypeInner) -> bool {
    matches!(
        ty,
        naga::TypeInner::Array { base, size: naga::ArraySize::Dynamic, .. }
            if matches!(module.types[*base].inner, naga::TypeInner::Scalar(naga::Scalar::F32))
    )
}
