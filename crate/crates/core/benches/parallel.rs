//! Sequential against rayon execution for the two data-parallel workloads:
//! batches of independent games and exhaustive normal-form construction.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

use likegame::oracle::{build_normal_form_with, OracleOptions};
use likegame::par::{map_range, Execution};
use likegame::{run_game, scenarios};

const MODES: [(&str, Execution); 2] = [("sequential", Execution::Sequential), ("parallel", Execution::Parallel)];

fn batch_of_games(c: &mut Criterion) {
    let mut group = c.benchmark_group("false_consensus_x32");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| {
                map_range(32, exec, |seed| {
                    let trace = run_game(&scenarios::false_consensus(seed as u64)).unwrap();
                    black_box(trace.metrics.rounds.len())
                })
            })
        });
    }
    group.finish();
}

fn normal_form(c: &mut Criterion) {
    let config = scenarios::idealist_instances().pop().unwrap();
    let menus: Vec<_> = config.player_ids().map(|p| scenarios::idealist_menu(&config, p)).collect();
    let mut group = c.benchmark_group("idealist_normal_form");
    group.sample_size(10);
    for (name, exec) in MODES {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            let options = OracleOptions { execution: exec, ..OracleOptions::default() };
            b.iter(|| black_box(build_normal_form_with(&config, menus.clone(), options).unwrap().profile_count()))
        });
    }
    group.finish();
}

criterion_group!(benches, batch_of_games, normal_form);
criterion_main!(benches);
