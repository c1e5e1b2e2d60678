//! Criterion benchmarks for the flows, transports and audits of `alpmp-core`.
//! `benches/flows.rs` registers [`benchmarks`].

use std::hint::black_box;

use alpmp_core::algebroid::{affine_action, so3};
use alpmp_core::control::{transport_b, ControlSignal, ControlSpace, ControlSystem, Interval};
use alpmp_core::numerics::{integrate, rhs_fn, TimeGrid};
use alpmp_core::paths::{generate_infinitesimal_homotopy, PathFamily, DEFAULT_EPS_NODES};
use alpmp_core::pmp::{
    develop_to_group, integrate_pmp_flow, needle_vector, verify_extremal, Extremal, Representation, TimeMode,
    VariationSymbol,
};
use alpmp_core::scenarios::{builtin_config, run_scenario, WongFixture};
use criterion::{BatchSize, Criterion};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn so3_bang_bang() -> ControlSystem {
    ControlSystem::new(
        so3(),
        ControlSpace::finite(vec![vec![-1.0], vec![1.0]]).expect("two controls"),
        |_, u| vec![1.0, u[0], 0.0],
        |_, _| 1.0,
    )
    .expect("so(3) system")
}

pub fn so3_extremal(t1: f64) -> Extremal {
    integrate_pmp_flow(&so3_bang_bang(), &[], &[0.0, 1.0, 0.2], -1.0, &Interval::new(0.0, t1)).expect("extremal")
}

fn numerics(c: &mut Criterion) {
    let grid = TimeGrid::new(0.0, 10.0, 1e-3).unwrap();
    let rhs = rhs_fn(3, |_, _, y: &[f64], dy: &mut [f64]| {
        dy[0] = y[1] * y[2];
        dy[1] = -y[0] * y[2];
        dy[2] = -0.5 * y[0] * y[1];
    });
    c.bench_function("rk4/euler_top_10k_steps", |b| {
        b.iter(|| integrate(&rhs, &grid, black_box(&[1.0, 0.2, 0.3])).unwrap())
    });
}

fn flows(c: &mut Criterion) {
    let sys = so3_bang_bang();
    let mut g = c.benchmark_group("pmp");
    g.sample_size(20);
    g.bench_function("so3_extremal_0_10", |b| {
        b.iter(|| integrate_pmp_flow(&sys, &[], black_box(&[0.0, 1.0, 0.2]), -1.0, &Interval::new(0.0, 10.0)).unwrap())
    });
    let ext = so3_extremal(10.0);
    g.bench_function("so3_audit_0_10", |b| {
        b.iter(|| verify_extremal(&sys, &ext.trajectory, &ext.costate, TimeMode::FreeTime, 1e-5).unwrap())
    });

    let wong = WongFixture::so3_linear();
    let wsys = wong.control_system(100.0).unwrap();
    let z = [0.6, -0.8, 0.4, 0.2, -0.3];
    g.bench_function("wong_extremal_0_1", |b| {
        b.iter(|| integrate_pmp_flow(&wsys, &[0.1, -0.2], black_box(&z), -1.0, &Interval::new(0.0, 1.0)).unwrap())
    });
    g.finish();

    let u = ControlSignal::piecewise_constant(vec![0.4], vec![vec![1.0], vec![-1.0]]).unwrap();
    c.bench_function("transport/so3_b_0_1", |b| {
        b.iter(|| transport_b(&sys, &u, &Interval::new(0.0, 1.0), &[], black_box(&[0.3, -1.0, 0.5])).unwrap())
    });
}

fn needles(c: &mut Criterion) {
    let sys = so3_bang_bang();
    let ext = so3_extremal(3.0);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    c.bench_function("needle/random_symbol", |b| {
        b.iter_batched(
            || VariationSymbol::random(&mut rng, 0.0, 3.0, sys.space(), 3, &ext.switches),
            |s| needle_vector(&sys, &ext.trajectory, &s, None).unwrap(),
            BatchSize::SmallInput,
        )
    });
}

fn geometry(c: &mut Criterion) {
    let ext = so3_extremal(3.0);
    for rep in [Representation::so3(), Representation::su2()] {
        c.bench_function(&format!("develop/{}_0_3", rep.name()), |b| {
            b.iter(|| develop_to_group(black_box(&ext.trajectory.path), &rep).unwrap())
        });
    }

    let alg = affine_action();
    let grid = TimeGrid::new(0.0, 1.0, 1e-3).unwrap();
    let fam = PathFamily::integrate(
        &alg,
        grid,
        DEFAULT_EPS_NODES,
        |e| vec![0.4 * e],
        |t, e| vec![(t + e).sin(), 0.5 * e * t.cos()],
    )
    .unwrap();
    let b0 = vec![vec![0.4, 0.0]; DEFAULT_EPS_NODES];
    let mut g = c.benchmark_group("homotopy");
    g.sample_size(20);
    g.bench_function("generate_aff1_33_slices", |b| {
        b.iter(|| generate_infinitesimal_homotopy(&alg, &fam, black_box(&b0)).unwrap())
    });
    g.finish();
}

fn scenarios(c: &mut Criterion) {
    let mut g = c.benchmark_group("scenario");
    g.sample_size(10);
    for name in ["wong-so3", "classical-tm-lq", "so3-shoot"] {
        let cfg = builtin_config(name).unwrap();
        g.bench_function(name, |b| b.iter(|| run_scenario(black_box(&cfg)).unwrap()));
    }
    g.finish();
}

pub fn benchmarks(c: &mut Criterion) {
    numerics(c);
    flows(c);
    needles(c);
    geometry(c);
    scenarios(c);
}
