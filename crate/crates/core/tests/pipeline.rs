use gemmlab::backend::{MatmulBackend, ParallelCpuBackend, SequentialBackend};
use gemmlab::report::{emit_csv, parse_csv, quantize, render_figures};
use gemmlab::{
    compute_speedups, run_plan, Backend, BenchmarkPlan, CpuParallelConfig, Measurement,
};

const TIMINGS: [(usize, f64, f64, f64); 7] = [
    (128, 2.18, 7.10, 0.26),
    (256, 20.70, 2.89, 0.40),
    (512, 264.37, 19.43, 2.10),
    (1024, 3721.52, 295.86, 13.35),
    (2048, 44691.46, 3554.41, 124.01),
    (3072, 171811.07, 11998.88, 332.69),
    (4096, 393280.52, 30332.07, 663.24),
];

// Ratios of the rounded timings above, computed independently.
const RECOMPUTED: [(f64, f64, f64); 7] = [
    (0.31, 27.31, 8.38),
    (7.16, 7.22, 51.75),
    (13.61, 9.25, 125.89),
    (12.58, 22.16, 278.77),
    (12.57, 28.66, 360.39),
    (14.32, 36.07, 516.43),
    (12.97, 45.73, 592.97),
];

fn reference_table() -> gemmlab::SpeedupTable {
    let ms: Vec<Measurement> = TIMINGS
        .iter()
        .flat_map(|&(n, s, c, g)| {
            [
                Measurement::from_times(Backend::Sequential, n, vec![s]).unwrap(),
                Measurement::from_times(Backend::ParallelCpu, n, vec![c]).unwrap(),
                Measurement::from_times(Backend::GpuNaive, n, vec![g]).unwrap(),
            ]
        })
        .collect();
    compute_speedups(&ms).unwrap()
}

#[test]
fn speedups_of_reference_timings() {
    let table = reference_table();
    for (row, (a, b, c)) in table.rows.iter().zip(RECOMPUTED) {
        assert_eq!(format!("{:.2}", row.speedup_cpu_vs_seq.unwrap()), format!("{a:.2}"));
        assert_eq!(format!("{:.2}", row.speedup_gpu_vs_cpu.unwrap()), format!("{b:.2}"));
        assert_eq!(format!("{:.2}", row.speedup_gpu_vs_seq.unwrap()), format!("{c:.2}"));
    }
}

#[test]
fn reference_table_survives_csv_and_renders() {
    let table = reference_table();
    let csv = emit_csv(&table).unwrap();
    assert!(csv.contains("\n4096x4096,393280.5200,30332.0700,663.2400,12.97x,45.73x,592.97x\n"));
    let back = parse_csv(&csv).unwrap();
    assert_eq!(back, quantize(&table));
    let figs = render_figures(&back).unwrap();
    assert_eq!(render_figures(&back).unwrap(), figs);
}

#[test]
fn cpu_sweep_end_to_end() {
    let plan = BenchmarkPlan {
        sizes: vec![8, 17, 32],
        repetitions: 2,
        backends: Backend::ALL.to_vec(),
        ..BenchmarkPlan::default()
    };
    let mut runners: Vec<Box<dyn MatmulBackend>> = vec![
        Box::new(SequentialBackend),
        Box::new(ParallelCpuBackend::new(CpuParallelConfig::with_workers(3)).unwrap()),
    ];
    let sweep = run_plan(&plan, &mut runners).unwrap();
    assert!(sweep.all_ok());
    assert_eq!(sweep.measurements.len(), 6);
    assert_eq!(sweep.skipped.len(), 6);
    assert!(sweep.measurements.iter().all(|m| m.verified && m.times_ms.len() == 2));

    let table = compute_speedups(&sweep.measurements).unwrap();
    let csv = emit_csv(&table).unwrap();
    for line in csv.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        assert_eq!(&f[3..], ["NA", f[4], "NA", "NA"], "{line}");
        assert_ne!(f[4], "NA");
    }
}
