use criterion::{black_box, criterion_group, criterion_main, BenchmarkId, Criterion as Bench};
use hocmim_bench::{benchmark_criteria, parity_fixture};
use hocmim_core::{features, run_sfs, EstimatorContext, Var};

fn selection(c: &mut Bench) {
    let ds = parity_fixture(512, 26, 0);
    let ctx = EstimatorContext::plugin(&ds);
    let mut group = c.benchmark_group("run_sfs_k8_d30");
    group.sample_size(10);
    for criterion in benchmark_criteria() {
        group.bench_with_input(BenchmarkId::from_parameter(criterion.label()), &criterion, |b, cr| {
            b.iter(|| run_sfs(&ctx, cr, 8).expect("selection"))
        });
    }
    group.finish();
}

fn estimators(c: &mut Bench) {
    let ds = parity_fixture(4096, 26, 0);
    let ctx = EstimatorContext::plugin(&ds);
    let mut group = c.benchmark_group("cmi_conditioning_width");
    for width in [1usize, 4, 8, 16] {
        let z = features(&(2..2 + width).collect::<Vec<_>>());
        group.bench_with_input(BenchmarkId::from_parameter(width), &z, |b, z| {
            b.iter(|| {
                ctx.conditional_mutual_information(&[Var::Feature(0)], &[Var::Target], black_box(z))
                    .expect("cmi")
            })
        });
    }
    group.finish();
}

criterion_group!(benches, selection, estimators);
criterion_main!(benches);
