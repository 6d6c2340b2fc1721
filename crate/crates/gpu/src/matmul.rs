//! Phase-timed dispatch of the WGSL kernels.
//!
//! Every phase is submitted and waited on separately, the way blocking
//! `cudaMemcpy` calls bracket a CUDA kernel: buffer allocation,
//! host-to-device upload, kernel, device-to-host readback. The readback
//! doubles as the completion barrier for the whole operation.

use std::cell::RefCell;
use std::rc::Rc;
use std::time::Instant;

use gemmlab::{
    Backend, GpuTiming, GpuVariant, Matrix, MatmulBackend, Timed, TimingScope,
};

use crate::device::GpuContext;
use crate::error::GpuError;
use crate::shaders::{ShaderSet, ENTRY_POINT, PARAMS_BYTES, TILE};

pub struct GpuMatmul {
    ctx: GpuContext,
    layout: wgpu::BindGroupLayout,
    naive: Option<wgpu::ComputePipeline>,
    tiled: Option<wgpu::ComputePipeline>,
}

impl std::fmt::Debug for GpuMatmul {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("GpuMatmul")
            .field("ctx", &self.ctx)
            .field("naive", &self.naive.is_some())
            .field("tiled", &self.tiled.is_some())
            .finish()
    }
}

impl GpuMatmul {
    /// Compiles every kernel in `shaders` for the device in `ctx`.
    pub fn new(ctx: GpuContext, shaders: &ShaderSet) -> Result<Self, GpuError> {
        let storage = |binding: u32, read_only: bool| wgpu::BindGroupLayoutEntry {
            binding,
            visibility: wgpu::ShaderStages::COMPUTE,
            ty: wgpu::BindingType::Buffer {
                ty: wgpu::BufferBindingType::Storage { read_only },
                has_dynamic_offset: false,
                min_binding_size: None,
            },
            count: None,
        };
        let layout = ctx
            .device
            .create_bind_group_layout(&wgpu::BindGroupLayoutDescriptor {
                label: Some("matmul bindings"),
                entries: &[
                    storage(0, true),
                    storage(1, true),
                    storage(2, false),
                    wgpu::BindGroupLayoutEntry {
                        binding: 3,
                        visibility: wgpu::ShaderStages::COMPUTE,
                        ty: wgpu::BindingType::Buffer {
                            ty: wgpu::BufferBindingType::Uniform,
                            has_dynamic_offset: false,
                            min_binding_size: None,
                        },
                        count: None,
                    },
                ],
            });
        let pipeline_layout = ctx
            .device
            .create_pipeline_layout(&wgpu::PipelineLayoutDescriptor {
                label: Some("matmul"),
                bind_group_layouts: &[Some(&layout)],
                immediate_size: 0,
            });

        let compile = |variant: GpuVariant| -> Result<Option<wgpu::ComputePipeline>, GpuError> {
            let Some(kernel) = shaders.get(variant) else {
                return Ok(None);
            };
            let scope = ctx.device.push_error_scope(wgpu::ErrorFilter::Validation);
            let module = ctx
                .device
                .create_shader_module(wgpu::ShaderModuleDescriptor {
                    label: Some(&kernel.name),
                    source: wgpu::ShaderSource::Wgsl(kernel.wgsl.as_str().into()),
                });
            let pipeline = ctx
                .device
                .create_compute_pipeline(&wgpu::ComputePipelineDescriptor {
                    label: Some(&kernel.name),
                    layout: Some(&pipeline_layout),
                    module: &module,
                    entry_point: Some(ENTRY_POINT),
                    compilation_options: Default::default(),
                    cache: None,
                });
            if let Some(err) = pollster::block_on(scope.pop()) {
                return Err(GpuError::ShaderContract {
                    name: kernel.name.clone(),
                    message: err.to_string(),
                });
            }
            Ok(Some(pipeline))
        };
        let naive = compile(GpuVariant::Naive)?;
        let tiled = compile(GpuVariant::Tiled)?;

        Ok(Self {
            ctx,
            layout,
            naive,
            tiled,
        })
    }

    pub fn context(&self) -> &GpuContext {
        &self.ctx
    }

    pub fn has_variant(&self, variant: GpuVariant) -> bool {
        self.pipeline(variant).is_some()
    }

    fn pipeline(&self, variant: GpuVariant) -> Option<&wgpu::ComputePipeline> {
        match variant {
            GpuVariant::Naive => self.naive.as_ref(),
            GpuVariant::Tiled => self.tiled.as_ref(),
        }
    }

    /// `C = A x B` on the device with a 16x16 workgroup grid covering `n`.
    pub fn multiply(
        &self,
        a: &Matrix,
        b: &Matrix,
        variant: GpuVariant,
        scope: TimingScope,
    ) -> Result<(Matrix, GpuTiming), GpuError> {
        let n = check_square_pair(a, b)?;
        let pipeline = self
            .pipeline(variant)
            .ok_or(GpuError::KernelMissing(variant))?;
        let n_u32 = u32::try_from(n).map_err(|_| GpuError::Shape(format!("n = {n} exceeds u32")))?;
        let bytes = (n as u64) * (n as u64) * 4;
        if bytes > self.ctx.max_binding_bytes {
            return Err(GpuError::OutOfDeviceMemory {
                requested: bytes,
                limit: self.ctx.max_binding_bytes,
            });
        }
        let groups = n_u32.div_ceil(TILE);
        let device = &self.ctx.device;
        let queue = &self.ctx.queue;

        let t_alloc = Instant::now();
        let oom = device.push_error_scope(wgpu::ErrorFilter::OutOfMemory);
        let buffer = |label: &str, size: u64, usage: wgpu::BufferUsages| {
            device.create_buffer(&wgpu::BufferDescriptor {
                label: Some(label),
                size,
                usage,
                mapped_at_creation: false,
            })
        };
        let storage_in = wgpu::BufferUsages::STORAGE | wgpu::BufferUsages::COPY_DST;
        let buf_a = buffer("a", bytes, storage_in);
        let buf_b = buffer("b", bytes, storage_in);
        let buf_c = buffer("c", bytes, wgpu::BufferUsages::STORAGE | wgpu::BufferUsages::COPY_SRC);
        let params = buffer(
            "params",
            PARAMS_BYTES,
            wgpu::BufferUsages::UNIFORM | wgpu::BufferUsages::COPY_DST,
        );
        let staging = buffer(
            "readback",
            bytes,
            wgpu::BufferUsages::MAP_READ | wgpu::BufferUsages::COPY_DST,
        );
        let bind_group = device.create_bind_group(&wgpu::BindGroupDescriptor {
            label: Some("matmul"),
            layout: &self.layout,
            entries: &[
                wgpu::BindGroupEntry { binding: 0, resource: buf_a.as_entire_binding() },
                wgpu::BindGroupEntry { binding: 1, resource: buf_b.as_entire_binding() },
                wgpu::BindGroupEntry { binding: 2, resource: buf_c.as_entire_binding() },
                wgpu::BindGroupEntry { binding: 3, resource: params.as_entire_binding() },
            ],
        });
        let timestamps = self.ctx.timestamps.then(|| TimestampPair::new(device));
        if let Some(err) = pollster::block_on(oom.pop()) {
            return Err(match err {
                wgpu::Error::OutOfMemory { .. } => GpuError::OutOfDeviceMemory {
                    requested: bytes,
                    limit: self.ctx.max_binding_bytes,
                },
                other => GpuError::Backend(other.to_string()),
            });
        }
        let alloc_ms = ms_since(t_alloc);

        let t_h2d = Instant::now();
        queue.write_buffer(&buf_a, 0, bytemuck::cast_slice(a.as_slice()));
        queue.write_buffer(&buf_b, 0, bytemuck::cast_slice(b.as_slice()));
        queue.write_buffer(&params, 0, bytemuck::cast_slice(&[n_u32, 0, 0, 0]));
        queue.submit([]);
        self.ctx.wait()?;
        let h2d_ms = ms_since(t_h2d);

        let t_kernel = Instant::now();
        let validation = device.push_error_scope(wgpu::ErrorFilter::Validation);
        let mut encoder = device.create_command_encoder(&wgpu::CommandEncoderDescriptor {
            label: Some("matmul dispatch"),
        });
        {
            let mut pass = encoder.begin_compute_pass(&wgpu::ComputePassDescriptor {
                label: Some("matmul"),
                timestamp_writes: timestamps.as_ref().map(|t| wgpu::ComputePassTimestampWrites {
                    query_set: &t.query_set,
                    beginning_of_pass_write_index: Some(0),
                    end_of_pass_write_index: Some(1),
                }),
            });
            pass.set_pipeline(pipeline);
            pass.set_bind_group(0, &bind_group, &[]);
            pass.dispatch_workgroups(groups, groups, 1);
        }
        if let Some(t) = &timestamps {
            t.resolve(&mut encoder);
        }
        queue.submit([encoder.finish()]);
        self.ctx.wait()?;
        if let Some(err) = pollster::block_on(validation.pop()) {
            return Err(GpuError::Backend(err.to_string()));
        }
        let kernel_ms = ms_since(t_kernel);

        let t_d2h = Instant::now();
        let mut encoder = device.create_command_encoder(&wgpu::CommandEncoderDescriptor {
            label: Some("matmul readback"),
        });
        encoder.copy_buffer_to_buffer(&buf_c, 0, &staging, 0, bytes);
        queue.submit([encoder.finish()]);
        let data = read_back(&self.ctx, &staging)?;
        let d2h_ms = ms_since(t_d2h);

        let kernel_device_ms = match &timestamps {
            Some(t) => t.elapsed_ms(&self.ctx)?,
            None => None,
        };
        let output = Matrix::from_vec(n, n, bytemuck::pod_collect_to_vec(&data))
            .map_err(|e| GpuError::Backend(e.to_string()))?;
        let timing = GpuTiming::from_phases(scope, alloc_ms, h2d_ms, kernel_ms, d2h_ms, kernel_device_ms);
        Ok((output, timing))
    }
}

fn check_square_pair(a: &Matrix, b: &Matrix) -> Result<usize, GpuError> {
    if !a.is_square() || !b.is_square() || a.rows() != b.rows() {
        return Err(GpuError::Shape(format!(
            "{}x{} and {}x{}",
            a.rows(),
            a.cols(),
            b.rows(),
            b.cols()
        )));
    }
    Ok(a.rows())
}

fn ms_since(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

/// Maps `buffer` for reading, blocks until the map completes and copies
/// the bytes out.
fn read_back(ctx: &GpuContext, buffer: &wgpu::Buffer) -> Result<Vec<u8>, GpuError> {
    let (tx, rx) = std::sync::mpsc::channel();
    buffer.map_async(wgpu::MapMode::Read, .., move |res| {
        let _ = tx.send(res);
    });
    ctx.wait()?;
    rx.recv()
        .map_err(|_| GpuError::Backend("buffer map callback dropped".into()))?
        .map_err(|e| GpuError::Backend(format!("mapping readback buffer: {e}")))?;
    let bytes = {
        let view = buffer
            .get_mapped_range(..)
            .map_err(|e| GpuError::Backend(format!("mapped range: {e}")))?;
        view.to_vec()
    };
    buffer.unmap();
    Ok(bytes)
}

struct TimestampPair {
    query_set: wgpu::QuerySet,
    resolve: wgpu::Buffer,
    readback: wgpu::Buffer,
}

impl TimestampPair {
    fn new(device: &wgpu::Device) -> Self {
        let size = 2 * std::mem::size_of::<u64>() as u64;
        Self {
            query_set: device.create_query_set(&wgpu::QuerySetDescriptor {
                label: Some("kernel timestamps"),
                ty: wgpu::QueryType::Timestamp,
                count: 2,
            }),
            resolve: device.create_buffer(&wgpu::BufferDescriptor {
                label: Some("timestamp resolve"),
                size,
                usage: wgpu::BufferUsages::QUERY_RESOLVE | wgpu::BufferUsages::COPY_SRC,
                mapped_at_creation: false,
            }),
            readback: device.create_buffer(&wgpu::BufferDescriptor {
                label: Some("timestamp readback"),
                size,
                usage: wgpu::BufferUsages::MAP_READ | wgpu::BufferUsages::COPY_DST,
                mapped_at_creation: false,
            }),
        }
    }

    fn resolve(&self, encoder: &mut wgpu::CommandEncoder) {
        encoder.resolve_query_set(&self.query_set, 0..2, &self.resolve, 0);
        encoder.copy_buffer_to_buffer(&self.resolve, 0, &self.readback, 0, self.resolve.size());
    }

    fn elapsed_ms(&self, ctx: &GpuContext) -> Result<Option<f64>, GpuError> {
        let bytes = read_back(ctx, &self.readback)?;
        let ticks: Vec<u64> = bytemuck::pod_collect_to_vec(&bytes);
        let (start, end) = (ticks[0], ticks[1]);
        if end < start {
            return Ok(None);
        }
        let period_ns = f64::from(ctx.queue.get_timestamp_period());
        Ok(Some((end - start) as f64 * period_ns / 1e6))
    }
}

/// One GPU kernel variant exposed to the sweep harness. Variants share the
/// device through `engine`; calls are serialized on this thread.
#[derive(Debug, Clone)]
pub struct GpuBackend {
    engine: Rc<RefCell<GpuMatmul>>,
    variant: GpuVariant,
    scope: TimingScope,
}

impl GpuBackend {
    pub fn new(engine: Rc<RefCell<GpuMatmul>>, variant: GpuVariant, scope: TimingScope) -> Self {
        Self {
            engine,
            variant,
            scope,
        }
    }

    pub fn device_info(&self) -> gemmlab::DeviceInfo {
        self.engine.borrow().context().info().clone()
    }
}

impl MatmulBackend for GpuBackend {
    fn backend(&self) -> Backend {
        match self.variant {
            GpuVariant::Naive => Backend::GpuNaive,
            GpuVariant::Tiled => Backend::GpuTiled,
        }
    }

    fn multiply(&mut self, a: &Matrix, b: &Matrix) -> gemmlab::Result<Timed> {
        let (output, timing) = self
            .engine
            .borrow()
            .multiply(a, b, self.variant, self.scope)?;
        Ok(Timed {
            output,
            elapsed_ms: timing.total_ms,
            gpu_phases: Some(timing),
        })
    }
}

/// Opens the best GPU and returns one backend per requested variant that
/// has a loaded kernel. Absence of a device or of kernels yields an empty
/// list plus the reason, never an error.
pub fn gpu_backends(
    variants: &[GpuVariant],
    scope: TimingScope,
    shaders: &ShaderSet,
) -> (Vec<GpuBackend>, Option<String>) {
    if variants.is_empty() {
        return (Vec::new(), None);
    }
    let ctx = match GpuContext::open() {
        Ok(ctx) => ctx,
        Err(e) => return (Vec::new(), Some(e.to_string())),
    };
    if shaders.is_empty() {
        return (Vec::new(), Some("no WGSL kernels found".into()));
    }
    let engine = match GpuMatmul::new(ctx, shaders) {
        Ok(engine) => Rc::new(RefCell::new(engine)),
        Err(e) => return (Vec::new(), Some(e.to_string())),
    };
    let mut out = Vec::new();
    let mut missing = Vec::new();
    for &variant in variants {
        if engine.borrow().has_variant(variant) {
            out.push(GpuBackend::new(Rc::clone(&engine), variant, scope));
        } else {
            missing.push(format!("{variant:?}"));
        }
    }
    let note = (!missing.is_empty()).then(|| format!("no kernel loaded for {}", missing.join(", ")));
    (out, note)
}
