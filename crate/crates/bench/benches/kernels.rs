use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use ssk_core::analysis::{pep_exact, symbol_error_estimate, PepInputs, SerOptions};
use ssk_core::clique::{max_clique, CliqueOptions, Graph};
use ssk_core::constellation::enumerate_weight_class;
use ssk_core::gssk_props::{max_set_with_min_distance, SearchOptions};
use ssk_core::link::{transmit, Channel, MapDetector};
use ssk_core::sim::ee_hssk_codebook;
use ssk_core::{DetectorMetric, LinkConfig};

fn huffman(c: &mut Criterion) {
    let (_, book) = ee_hssk_codebook(10, 2, 10, 7.0).unwrap();
    let symbols = book.symbols();
    let priors: Vec<f64> = book.entries().iter().map(|e| e.prior).collect();
    c.bench_function("huffman_build_512", |b| {
        b.iter(|| ssk_core::PrefixCodebook::build(black_box(&symbols), black_box(&priors)).unwrap())
    });
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let bits: Vec<bool> = (0..10_000).map(|_| rng.random()).collect();
    c.bench_function("huffman_decode_10k_bits", |b| {
        b.iter(|| book.decode_indices(black_box(&bits)))
    });
}

fn detection(c: &mut Criterion) {
    let (_, book) = ee_hssk_codebook(7, 2, 7, 4.0).unwrap();
    let config = LinkConfig::new(7, 7, 1.0, 0.5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let channel = Channel::draw(&config, &mut rng);
    let symbols = book.symbols();
    let detector = MapDetector::new(
        &config,
        &channel,
        &symbols,
        &book.achieved_priors(),
        DetectorMetric::Scaled,
    )
    .unwrap();
    let y = transmit(&config, &channel, &symbols[3], &mut rng).unwrap();
    c.bench_function("map_detect_7x7_64_symbols", |b| {
        b.iter(|| detector.detect(black_box(&y)))
    });
    c.bench_function("map_detector_setup_7x7", |b| {
        b.iter(|| {
            MapDetector::new(
                &config,
                black_box(&channel),
                &symbols,
                &book.achieved_priors(),
                DetectorMetric::Scaled,
            )
            .unwrap()
        })
    });
}

fn analysis(c: &mut Criterion) {
    let inputs = PepInputs::new(2, 0.7, 10.0, 7, 7);
    c.bench_function("pep_exact", |b| b.iter(|| pep_exact(black_box(&inputs)).unwrap()));
    let (_, book) = ee_hssk_codebook(5, 2, 3, 3.0).unwrap();
    let opts = SerOptions {
        snr: 10.0,
        n_r: 5,
        use_bound: false,
        nt_normalization: true,
    };
    c.bench_function("ser_estimate_15_symbols", |b| {
        b.iter(|| symbol_error_estimate(&book.symbols(), &book.achieved_priors(), black_box(&opts)).unwrap())
    });
}

fn search(c: &mut Criterion) {
    let class = enumerate_weight_class(8, 4).unwrap();
    let graph = Graph::from_predicate(class.len(), |i, j| class[i].distance(&class[j]) >= 4);
    c.bench_function("max_clique_8_4_distance4", |b| {
        b.iter(|| max_clique(black_box(&graph), CliqueOptions::default()))
    });
    c.bench_function("max_set_10_5_distance4", |b| {
        b.iter(|| max_set_with_min_distance(10, 5, 4, SearchOptions::default()).unwrap())
    });
}

criterion_group! {
    name = benches;
    config = Criterion::default().sample_size(20);
    targets = huffman, detection, analysis, search
}
criterion_main!(benches);
