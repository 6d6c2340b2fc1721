use std::path::PathBuf;

use gemmlab::GpuVariant;
use gemmlab_gpu::shaders::{file_name, ShaderSet};
use gemmlab_gpu::{check_contract, GpuError, KernelSource};

fn fixture(name: &str) -> String {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name);
    std::fs::read_to_string(path).unwrap()
}

fn rejection(name: &str) -> String {
    match check_contract(name, &fixture(name)) {
        Err(GpuError::ShaderContract { message, .. }) => message,
        other => panic!("{name}: expected a contract error, got {other:?}"),
    }
}

#[test]
fn valid_kernel_passes() {
    check_contract("valid_naive.wgsl", &fixture("valid_naive.wgsl")).unwrap();
}

#[test]
fn wrong_workgroup_size() {
    assert!(rejection("wrong_workgroup.wgsl").contains("workgroup size"));
}

#[test]
fn wrong_entry_point() {
    assert!(rejection("wrong_entry.wgsl").contains("entry point"));
}

#[test]
fn read_only_output_binding() {
    assert!(rejection("read_only_output.wgsl").contains("binding 2 must be read_write"));
}

#[test]
fn missing_binding() {
    assert!(rejection("missing_binding.wgsl").contains("binding 1 is not declared"));
}

#[test]
fn wrong_element_type() {
    assert!(rejection("wrong_element_type.wgsl").contains("array<f32>"));
}

#[test]
fn syntax_error_names_the_problem() {
    let msg = rejection("syntax_error.wgsl");
    assert!(!msg.is_empty());
}

#[test]
fn kernel_source_runs_the_contract() {
    assert!(KernelSource::new(GpuVariant::Naive, "bad", fixture("wrong_workgroup.wgsl")).is_err());
    let k = KernelSource::new(GpuVariant::Naive, "ok", fixture("valid_naive.wgsl")).unwrap();
    assert_eq!(k.variant, GpuVariant::Naive);
}

#[test]
fn load_dir_picks_up_known_file_names() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join(file_name(GpuVariant::Naive)), fixture("valid_naive.wgsl")).unwrap();
    let set = ShaderSet::load_dir(dir.path()).unwrap();
    assert!(set.get(GpuVariant::Naive).is_some());
    assert!(set.get(GpuVariant::Tiled).is_none());
}

#[test]
fn load_dir_rejects_contract_violations() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join(file_name(GpuVariant::Tiled)), fixture("wrong_workgroup.wgsl")).unwrap();
    assert!(matches!(
        ShaderSet::load_dir(dir.path()),
        Err(GpuError::ShaderContract { .. })
    ));
}
