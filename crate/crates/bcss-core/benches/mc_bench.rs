//! Throughput comparison of the parallel and sequential Monte Carlo paths
//! (both produce bit-identical estimates) and of the derived N-user
//! pattern sum.

use bcss_core::ber::{ber_nc_nuser_derived, SnrPoint};
use bcss_core::mc::{
    estimate_ber, estimate_ber_sequential, Detector, PhaseModel, Scenario, StopRule,
};
use bcss_core::waveform::{ChirpParams, PhaseLawRegistry, UserOffset};
use criterion::{criterion_group, criterion_main, Criterion};

fn four_user_scenario() -> Scenario {
    let n = 4;
    let eps = 0.05;
    let sps = 280; // multiple of 20 so 0.05T sits on the grid, >= 64N
    let mut offsets = vec![UserOffset::none()];
    for _ in 1..n {
        offsets.push(UserOffset::new(eps, 0.0, 0.0, 1.0).unwrap());
    }
    Scenario {
        chirp: ChirpParams::new(n, 1.0, 2.0_f64.sqrt()).unwrap(),
        family: "linear".into(),
        samples_per_symbol: sps,
        offsets,
        victim_user: 0,
        phase_model: PhaseModel::UniformPerSymbol,
    }
}

fn bench_mc(c: &mut Criterion) {
    let registry = PhaseLawRegistry::new();
    let scenario = four_user_scenario();
    let grid = [SnrPoint::from_db(6.0).unwrap()];
    let stop = StopRule { min_errors: u64::MAX, max_bits: 65_536 };

    let mut group = c.benchmark_group("estimate_ber_64k_bits");
    group.sample_size(10);
    group.bench_function("parallel", |b| {
        b.iter(|| {
            estimate_ber(&scenario, &registry, Detector::Noncoherent, &grid, &stop, 1).unwrap()
        })
    });
    group.bench_function("sequential", |b| {
        b.iter(|| {
            estimate_ber_sequential(&scenario, &registry, Detector::Noncoherent, &grid, &stop, 1)
                .unwrap()
        })
    });
    group.finish();
}

fn bench_pattern_sum(c: &mut Criterion) {
    let registry = PhaseLawRegistry::new();
    let mut scenario = four_user_scenario();
    scenario.chirp = ChirpParams::new(18, 1.0, 2.0_f64.sqrt()).unwrap();
    scenario.samples_per_symbol = 64 * 20; // multiple of 20, >= 64N
    scenario.offsets = (0..18)
        .map(|u| {
            if u == 0 {
                UserOffset::none()
            } else {
                UserOffset::new(0.05, 0.0, 0.0, 1.0).unwrap()
            }
        })
        .collect();
    let table = scenario.branch_table(&registry).unwrap();

    let mut group = c.benchmark_group("derived_ber_2e17_patterns");
    group.sample_size(10);
    group.bench_function("pattern_sum_n18", |b| {
        b.iter(|| ber_nc_nuser_derived(&table, 4.0).unwrap())
    });
    group.finish();
}

criterion_group!(benches, bench_mc, bench_pattern_sum);
criterion_main!(benches);
