use criterion::{criterion_group, criterion_main, Criterion};

use polytraverse::bench::{build_offline, fixtures};
use polytraverse::decompose::decompose;
use polytraverse::densegraph::{big_m_for_polys, fast_verify_n0, pair_context};
use polytraverse::query::{Planner, QueryOptions};
use polytraverse::ConvexPolytope;

fn online(c: &mut Criterion) {
    for (name, fx) in [("corner", fixtures::corner().unwrap()), ("bugtrap", fixtures::bugtrap(1.0, 1.0).unwrap())] {
        let off = build_offline(&fx).unwrap();
        let planner = Planner::new(&fx.scene, &off.coarse.graph, &off.dense, &fx.object, QueryOptions::default()).unwrap();
        c.bench_function(&format!("plan/{name}"), |b| b.iter(|| planner.plan(&fx.start, &fx.goal).unwrap()));
    }
}

fn offline(c: &mut Criterion) {
    let fx = fixtures::corner().unwrap();
    let mut g = c.benchmark_group("offline");
    g.sample_size(10);
    g.bench_function("decompose/corner", |b| b.iter(|| decompose(&fx.scene, &fx.decompose).unwrap()));
    g.bench_function("build/corner", |b| b.iter(|| build_offline(&fx).unwrap()));
    g.finish();
}

fn direct_check(c: &mut Criterion) {
    let fx = fixtures::corner().unwrap();
    let off = build_offline(&fx).unwrap();
    let (cg, dense) = (&off.coarse.graph, &off.dense);
    let table = dense.table().unwrap();
    let Some(e) = dense.edges.first() else { return };
    let (pa, pb) = (&dense.patches[e.u], &dense.patches[e.w]);
    let ids = pair_context(pa.edge, pb.edge).unwrap();
    let polys: Vec<&ConvexPolytope> = ids.iter().map(|&i| &cg.polytopes[i]).collect();
    let st = dense.settings(big_m_for_polys(&polys, cg.dim, &fx.object)).unwrap();
    c.bench_function("fast_verify_n0/corner", |b| {
        b.iter(|| fast_verify_n0(&pa.configs, &pb.configs, &polys, &fx.object, &table, &st))
    });
}

criterion_group!(benches, online, offline, direct_check);
criterion_main!(benches);
