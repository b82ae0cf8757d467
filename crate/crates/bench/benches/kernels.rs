use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qltc_core::checks::CheckSystem;
use qltc_core::code::build_projective_code;
use qltc_core::decoder::{default_max_rounds, plant_clusters, Decoder};
use qltc_core::gibbs::{Chain, ChainConfig};
use qltc_core::percolation::{maxconn_alpha, random_connected_sets};

fn mh_step(c: &mut Criterion) {
    let checks = CheckSystem::base(build_projective_code(8).unwrap());
    let mut chain = Chain::new(&checks, ChainConfig::new(2.0, 0, 1)).unwrap();
    c.bench_function("mh_step_n8", |b| b.iter(|| black_box(chain.step())));
}

fn decode(c: &mut Criterion) {
    let code = build_projective_code(8).unwrap();
    let g = CheckSystem::base(code.clone()).interaction_graph();
    let dec = Decoder::new(&code);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let errors: Vec<_> = (0..64).map(|_| plant_clusters(&g, &[6], 1, 100, &mut rng).unwrap().0).collect();
    let rounds = default_max_rounds(code.n());
    let mut i = 0;
    c.bench_function("decode_n8_cluster6", |b| {
        b.iter(|| {
            i = (i + 1) % errors.len();
            black_box(dec.decode(&errors[i], rounds).unwrap())
        })
    });
}

fn rank(c: &mut Criterion) {
    let code = build_projective_code(8).unwrap();
    c.bench_function("rank_h_x_n8", |b| b.iter(|| black_box(code.h_x().rank())));
}

fn maxconn(c: &mut Criterion) {
    let g = CheckSystem::base(build_projective_code(6).unwrap()).interaction_graph();
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let sets = random_connected_sets(&g, 4..=8, 32, 5);
    let xs: Vec<Vec<usize>> = sets
        .into_iter()
        .map(|mut s| {
            s.extend((0..3).map(|_| rng.gen_range(0..g.vertex_count())));
            s.sort_unstable();
            s.dedup();
            s
        })
        .collect();
    let mut i = 0;
    c.bench_function("maxconn_n6_alpha_half", |b| {
        b.iter(|| {
            i = (i + 1) % xs.len();
            black_box(maxconn_alpha(&g, &xs[i], Ratio::new(1, 2), 12).unwrap())
        })
    });
}

criterion_group!(benches, mh_step, decode, rank, maxconn);
criterion_main!(benches);
