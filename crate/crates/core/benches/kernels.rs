//! Sequential against rayon execution of the flux kernels and a short run.

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use mppfv::fluxes::Discretization;
use mppfv::harness::{run_with_exec, RunConfig};
use mppfv::limiters::LimiterKind;
use mppfv::mesh::StructuredGrid;
use mppfv::par::Exec;
use mppfv::problems;

fn policies() -> Vec<(&'static str, Exec)> {
    let mut out = vec![("sequential", Exec::Sequential)];
    #[cfg(feature = "parallel")]
    out.push(("parallel", Exec::Parallel));
    out
}

fn flux_kernels(c: &mut Criterion) {
    let p = problems::kpp_2d(0.01).unwrap();
    let n = 256;
    let g = StructuredGrid::for_problem(&p, n, n).unwrap();
    let u: Vec<f64> = problems::initial_field(&p, &g).into_values();
    let mut group = c.benchmark_group("kpp2d_256");
    for (name, exec) in policies() {
        let d = Discretization::new(&g, &p).unwrap().with_exec(exec);
        let ext = d.extend(&u);
        let lambda = d.wave_speeds(&ext);
        group.bench_function(BenchmarkId::new("high_order_flux", name), |b| {
            b.iter(|| d.high_order_flux(&ext, &lambda, 0.0))
        });
        let flux = d.high_order_flux(&ext, &lambda, 0.0);
        group.bench_function(BenchmarkId::new("divergence", name), |b| b.iter(|| d.divergence(&flux)));
        group.bench_function(BenchmarkId::new("low_order_rhs", name), |b| {
            b.iter(|| d.low_order_rhs(&u, &lambda, 0.0))
        });
    }
    group.finish();
}

fn short_run(c: &mut Criterion) {
    let config = RunConfig {
        problem: "kpp2d".into(),
        nx: 48,
        limiter: LimiterKind::Fct,
        t_final: Some(0.05),
        ..Default::default()
    };
    let mut group = c.benchmark_group("kpp2d_48_fct_run");
    group.sample_size(10);
    for (name, exec) in policies() {
        group.bench_function(name, |b| b.iter(|| run_with_exec(&config, exec).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, flux_kernels, short_run);
criterion_main!(benches);
