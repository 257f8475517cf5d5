//! Bounded checking with sequential and parallel enumeration.

use std::path::PathBuf;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use graphiti_core::equiv::Problem;
use graphiti_core::par::Execution;
use graphiti_core::{cypher, infer_sdt, sql, transpile, EnumBounds, GraphSchema, RelSchema, Transformer};

fn fixture(name: &str) -> String {
    let p = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/paper").join(name);
    std::fs::read_to_string(&p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn bench_check(c: &mut Criterion) {
    let gs: GraphSchema = serde_json::from_str(&fixture("fig2a_graph_schema.json")).unwrap();
    let rs: RelSchema = serde_json::from_str(&fixture("fig2b_rel_schema.json")).unwrap();
    let phi = Transformer::parse(&fixture("fig5_transformer.dtl")).unwrap();
    let qg = cypher::parse_query(&fixture("fig4c_query.cypher")).unwrap();
    let qr = sql::parse_query(&fixture("fig4a_query.sql")).unwrap();
    let refute = Problem::new(&gs, &qg, &rs, &qr, &phi).unwrap();

    let sdt = infer_sdt(&gs);
    let transpiled = transpile(&gs, &qg).unwrap();
    let exhaust = Problem::new(&gs, &qg, &sdt.schema, &transpiled, &sdt.transformer).unwrap();

    let mut group = c.benchmark_group("check");
    group.sample_size(10);
    for exec in [Execution::Sequential, Execution::Parallel] {
        let label = format!("{exec:?}");
        group.bench_with_input(BenchmarkId::new("refute", &label), &exec, |b, &e| {
            b.iter(|| refute.check(EnumBounds::default(), e))
        });
        group.bench_with_input(BenchmarkId::new("exhaust_1_1_2", &label), &exec, |b, &e| {
            b.iter(|| exhaust.check(EnumBounds::new(1, 1, 2), e))
        });
    }
    group.finish();
}

criterion_group!(benches, bench_check);
criterion_main!(benches);
