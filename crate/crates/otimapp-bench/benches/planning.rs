//! Measures the hot paths: incremental fragment registration, prioritized
//! planning on an open grid, branching search on the crossing fixture, and
//! the exhaustive feasibility check.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use otimapp::fixtures;
use otimapp::fragment::FragmentTables;
use otimapp::graph::parse_grid_map;
use otimapp::instance::generate_random;
use otimapp::solver::{solve_cp, solve_pp, CpOutcome, CP_DEFAULT_TIME_LIMIT};
use otimapp::verify::oracle_feasibility;

fn open_grid(side: usize) -> otimapp::Graph {
    let mut text = format!("type octile\nheight {side}\nwidth {side}\nmap\n");
    for _ in 0..side {
        text.push_str(&".".repeat(side));
        text.push('\n');
    }
    parse_grid_map(&text).unwrap()
}

fn registration(c: &mut Criterion) {
    // One-way traffic: nothing can close, so the distance pruning earns
    // its keep. Unbounded tables on this input would store every way to
    // split every corridor span among distinct agents, which explodes.
    let (g, paths) = fixtures::corridor_stress(12, 40);
    c.bench_function("register 12 corridor paths, bound 3", |b| {
        b.iter(|| {
            let mut tables = FragmentTables::new(Some(3));
            for (i, p) in paths.iter().enumerate() {
                assert_eq!(tables.register_path(&g, i, p), Ok(None));
            }
            black_box(tables.fragment_count())
        })
    });
    let (g, paths) = fixtures::corridor_stress(4, 8);
    c.bench_function("register 4 corridor paths, unbounded", |b| {
        b.iter(|| {
            let mut tables = FragmentTables::new(None);
            for (i, p) in paths.iter().enumerate() {
                assert_eq!(tables.register_path(&g, i, p), Ok(None));
            }
            black_box(tables.fragment_count())
        })
    });
}

fn prioritized_planning(c: &mut Criterion) {
    let g = open_grid(16);
    let inst = generate_random(&g, 12, 7).unwrap();
    let order: Vec<usize> = (0..inst.agent_count()).collect();
    assert!(solve_pp(&inst, &order, Some(8)).is_ok());
    c.bench_function("pp(8), 12 agents, open 16x16 grid", |b| {
        b.iter(|| black_box(solve_pp(&inst, &order, Some(8))))
    });
}

fn branching_search(c: &mut Criterion) {
    let f = fixtures::order_trap();
    c.bench_function("cp on the crossing fixture", |b| {
        b.iter(|| {
            let report = solve_cp(&f.instance, None, CP_DEFAULT_TIME_LIMIT, 10_000);
            assert!(matches!(report.outcome, CpOutcome::Solved(_)));
            black_box(report.expanded)
        })
    });
}

fn exhaustive_check(c: &mut Criterion) {
    let (_, paths) = fixtures::latent_cycle();
    c.bench_function("oracle on the latent-cycle fixture", |b| {
        b.iter(|| black_box(oracle_feasibility(&paths, 1_000_000)))
    });
}

criterion_group!(
    benches,
    registration,
    prioritized_planning,
    branching_search,
    exhaustive_check
);
criterion_main!(benches);
