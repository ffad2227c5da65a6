use criterion::{criterion_group, criterion_main, Criterion};
use fracconv::cauchy_solver::{solve_picard, solve_spectral, InitialData, NonlinearitySpec, PicardParams, SpectralParams};
use fracconv::SpatialGrid;

fn solvers(c: &mut Criterion) {
    let alpha = 1.5;
    let flux = NonlinearitySpec::burgers(vec![1.0]).unwrap();
    let mut g = c.benchmark_group("solvers");
    g.sample_size(10);

    let ug = SpatialGrid::uniform(1, 2048, 51.2).unwrap();
    let u0 = InitialData::Bump { amplitude: 0.5, width: 2.0 }.sample(&ug, alpha).unwrap();
    g.bench_function("spectral 2048, T=1, dt=2e-3", |b| b.iter(|| solve_spectral(&u0, alpha, &flux, 1.0, SpectralParams::new(2e-3), &[]).unwrap()));

    let sg = SpatialGrid::stretched(0.05, 1.02, 8.0, 1e3).unwrap();
    let u0 = InitialData::ScaledProfile { amplitude: 0.5 }.sample(&sg, alpha).unwrap();
    g.bench_function(format!("picard stretched n={}, T=1", sg.len()), |b| b.iter(|| solve_picard(&u0, alpha, &flux, 1.0, PicardParams::default(), &[]).unwrap()));
    g.finish();
}

criterion_group!(benches, solvers);
criterion_main!(benches);
