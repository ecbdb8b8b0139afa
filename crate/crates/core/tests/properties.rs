use std::collections::BTreeMap;

use num_complex::Complex64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use ssk_core::analysis::{pep_chernoff, pep_exact, PepInputs};
use ssk_core::constellation::{
    binomial, build_code_dmin, build_gssk, choose_gssk_nt, enumerate_weight_class, is_prefix_free, min_distance,
};
use ssk_core::design::{optimal_power_at, priors_for_beta, solve, RATE_TOLERANCE};
use ssk_core::framing::{decode_stream, encode_stream, FramePlan};
use ssk_core::huffman::kraft_is_complete;
use ssk_core::link::{detect_ml, transmit, Channel, MapDetector};
use ssk_core::sim::ee_hssk_codebook;
use ssk_core::{DesignProblem, DetectorMetric, LinkConfig, PrefixCodebook, Tilt};

fn class_sizes() -> impl Strategy<Value = BTreeMap<u32, u64>> {
    prop::collection::btree_map(1u32..=8, 1u64..=40, 1..=4)
}

fn bits(max: usize) -> impl Strategy<Value = Vec<bool>> {
    prop::collection::vec(any::<bool>(), 0..max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn weight_class_is_complete_and_distinct(n_t in 1usize..=12, w in 0usize..=12) {
        prop_assume!(w <= n_t);
        let class = enumerate_weight_class(n_t, w).unwrap();
        prop_assert_eq!(class.len() as u128, binomial(n_t, w));
        prop_assert!(class.iter().all(|s| s.weight() as usize == w && s.len() == n_t));
        let mut masks: Vec<u64> = class.iter().map(|s| s.mask()).collect();
        masks.sort_unstable();
        masks.dedup();
        prop_assert_eq!(masks.len(), class.len());
    }

    #[test]
    fn fixed_weight_alphabets_sit_at_distance_two(n_t in 3usize..=12, m in 1u32..=9) {
        prop_assume!(choose_gssk_nt(n_t, m).is_ok());
        let a = build_gssk(n_t, m).unwrap();
        prop_assert_eq!(a.d_min(), 2);
    }

    #[test]
    fn code_meets_requested_distance(n_t in 3usize..=10, d in 2u32..=5) {
        let code = build_code_dmin(n_t, d, None).unwrap();
        if code.len() >= 2 {
            prop_assert!(code.min_distance().unwrap() >= d);
        }
        prop_assert!(code.symbols().iter().all(|s| !s.is_idle()));
    }

    #[test]
    fn tilted_priors_are_normalized_and_geometric(sizes in class_sizes(), beta in 0.01f64..=1.0) {
        let max_rf = *sizes.keys().max().unwrap();
        let problem = DesignProblem::new(sizes.clone(), max_rf, 0.0).unwrap();
        let priors = priors_for_beta(&problem, Tilt::Value(beta)).unwrap();
        let total: f64 = priors.iter().map(|(w, p)| sizes[w] as f64 * p).sum();
        prop_assert!((total - 1.0).abs() < 1e-12);
        // ln P_i - i ln beta is the same for every class.
        let offsets: Vec<f64> = priors.iter().map(|(&w, p)| p.ln() - w as f64 * beta.ln()).collect();
        prop_assert!(offsets.iter().all(|o| (o - offsets[0]).abs() < 1e-9));
    }

    #[test]
    fn solve_meets_rate_and_more_chains_never_cost_power(sizes in class_sizes(), frac in 0.0f64..=1.0) {
        let max_rf = *sizes.keys().max().unwrap();
        let full = DesignProblem::new(sizes.clone(), max_rf, 0.0).unwrap();
        let lightest = *sizes.keys().next().unwrap();
        let restricted = DesignProblem::new(sizes.clone(), lightest.max(max_rf.saturating_sub(2)), 0.0).unwrap();
        let lo = restricted.min_rate();
        let rate = lo + frac * (restricted.capacity() - lo);
        let sol = solve(&full.with_rate(rate).unwrap()).unwrap();
        prop_assert!(sol.rate >= rate - RATE_TOLERANCE);
        let p_full = sol.avg_power;
        let p_restricted = optimal_power_at(&restricted, rate).unwrap();
        prop_assert!(p_full <= p_restricted + 1e-9, "{} > {}", p_full, p_restricted);
    }

    #[test]
    fn huffman_codebooks_are_complete_prefix_codes(
        weights in prop::collection::vec(1u32..1000, 2..40),
        stream in bits(400),
    ) {
        let n_t = 8;
        let symbols: Vec<_> = (1..=n_t).flat_map(|w| enumerate_weight_class(n_t, w).unwrap()).take(weights.len()).collect();
        let total: u32 = weights.iter().sum();
        let priors: Vec<f64> = weights.iter().map(|&w| w as f64 / total as f64).collect();
        let book = PrefixCodebook::build(&symbols, &priors).unwrap();
        let codes: Vec<Vec<bool>> = book.entries().iter().map(|e| e.code.clone()).collect();
        prop_assert!(is_prefix_free(&codes));
        let lengths: Vec<usize> = codes.iter().map(Vec::len).collect();
        prop_assert!(kraft_is_complete(&lengths));
        for a in book.entries() {
            for b in book.entries() {
                if a.prior > b.prior {
                    prop_assert!(a.code.len() <= b.code.len());
                }
            }
        }
        let (sent, consumed) = book.bits_to_symbols(&stream);
        prop_assert_eq!(book.symbols_to_bits(&sent).unwrap(), stream[..consumed].to_vec());
        prop_assert!(stream.len() - consumed < book.max_len());
    }

    #[test]
    fn dyadic_priors_are_met_exactly(depths in prop::collection::vec(1usize..=6, 2..20)) {
        // Grow a full binary tree by splitting leaves, so the depths form a complete code.
        let mut leaves = vec![0usize];
        for (k, &d) in depths.iter().enumerate() {
            let at = k % leaves.len();
            if leaves[at] < d {
                let depth = leaves.remove(at) + 1;
                leaves.extend([depth, depth]);
            }
        }
        prop_assume!(leaves.len() >= 2 && leaves.len() <= 60);
        let symbols: Vec<_> = (1..=8).flat_map(|w| enumerate_weight_class(8, w).unwrap()).take(leaves.len()).collect();
        let priors: Vec<f64> = leaves.iter().map(|&l| 0.5f64.powi(l as i32)).collect();
        let book = PrefixCodebook::build(&symbols, &priors).unwrap();
        let entropy: f64 = priors.iter().map(|p| -p * p.log2()).sum();
        let avg_len: f64 = book.entries().iter().map(|e| e.prior * e.code.len() as f64).sum();
        prop_assert!((avg_len - entropy).abs() < 1e-12);
    }

    #[test]
    fn map_equals_ml_under_uniform_priors(seed in any::<u64>(), n_r in 1usize..=4, snr_db in -5.0f64..15.0) {
        let a = build_gssk(6, 4).unwrap();
        let cfg = LinkConfig::new(6, n_r, 1.0, 10f64.powf(-snr_db / 10.0)).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = Channel::draw(&cfg, &mut rng);
        let det = MapDetector::new(&cfg, &h, a.symbols(), a.priors(), DetectorMetric::Scaled).unwrap();
        for k in 0..a.len() {
            let y = transmit(&cfg, &h, &a.symbols()[k], &mut rng).unwrap();
            let ml = detect_ml(&cfg, &h, &y, a.symbols()).unwrap();
            prop_assert_eq!(a.symbols()[det.detect(&y)], ml);
        }
    }

    #[test]
    fn detection_is_scale_consistent(seed in any::<u64>(), scale in 0.1f64..10.0) {
        let (_, book) = ee_hssk_codebook(5, 2, 3, 3.0).unwrap();
        let symbols = book.symbols();
        let priors = book.achieved_priors();
        let cfg = LinkConfig::new(5, 3, 1.0, 0.8).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = Channel::draw(&cfg, &mut rng);
        let y = transmit(&cfg, &h, &symbols[4], &mut rng).unwrap();
        // Scaling H sqrt(Es) by c is the same as scaling Es by c^2.
        let scaled_cfg = LinkConfig::new(5, 3, scale * scale, 0.8 * scale * scale).unwrap();
        let scaled_y: Vec<Complex64> = y.iter().map(|v| v * scale).collect();
        let base = MapDetector::new(&cfg, &h, &symbols, &priors, DetectorMetric::Scaled).unwrap();
        let scaled = MapDetector::new(&scaled_cfg, &h, &symbols, &priors, DetectorMetric::Scaled).unwrap();
        prop_assert_eq!(base.detect(&y), scaled.detect(&scaled_y));
    }

    #[test]
    fn noiseless_detection_is_exact(seed in any::<u64>()) {
        let (_, book) = ee_hssk_codebook(7, 2, 7, 4.0).unwrap();
        let symbols = book.symbols();
        let cfg = LinkConfig::new(7, 7, 1.0, 1e-300).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let h = Channel::draw(&cfg, &mut rng);
        let det = MapDetector::new(&cfg, &h, &symbols, &book.achieved_priors(), DetectorMetric::Scaled).unwrap();
        for (k, s) in symbols.iter().enumerate() {
            let mut y = vec![Complex64::new(0.0, 0.0); 7];
            h.signal_into(s, 1.0, &mut y);
            prop_assert_eq!(det.detect(&y), k);
        }
    }

    #[test]
    fn pep_decreases_in_every_argument(
        d in 1u32..=6, n_r in 1usize..=4, snr_db in -5.0f64..20.0, l in 0.0f64..2.0,
    ) {
        let snr = 10f64.powf(snr_db / 10.0);
        let p = |d, l, snr, n_r| pep_exact(&PepInputs::new(d, l, snr, 6, n_r)).unwrap();
        let base = p(d, l, snr, n_r);
        prop_assert!(p(d, l + 0.1, snr, n_r) <= base);
        prop_assert!(p(d, l, snr * 1.25, n_r) <= base);
        // With a prior offset the Q argument sqrt(x) + c / sqrt(x) is not
        // monotone in x, so distance and diversity only help when L = 0.
        let even = p(d, 0.0, snr, n_r);
        prop_assert!(p(d + 1, 0.0, snr, n_r) <= even);
        prop_assert!(p(d, 0.0, snr, n_r + 1) <= even);
        prop_assert!(pep_chernoff(&PepInputs::new(d, l, snr, 6, n_r)).unwrap() >= base);
    }

    #[test]
    fn framed_stream_round_trips(stream in bits(1200), frame_bits in 7usize..=120) {
        let (_, book) = ee_hssk_codebook(5, 2, 3, 3.0).unwrap();
        let plan = FramePlan::new(frame_bits, book).unwrap();
        let frames = encode_stream(&plan, &stream).unwrap();
        let detected: Vec<Vec<usize>> = frames.iter().map(|f| f.indices.clone()).collect();
        let back = decode_stream(&plan, &detected);
        prop_assert_eq!(&back[..stream.len()], &stream[..]);
        prop_assert!(back[stream.len()..].iter().all(|b| !b));
        for f in &frames {
            let v = plan.judge_indices(&f.indices, &f.payload);
            prop_assert!(!v.frame_error && !v.ed_flag);
        }
    }

    #[test]
    fn length_window_rule(frame_bits in 7usize..=200, len in 0usize..=300) {
        let (_, book) = ee_hssk_codebook(5, 2, 3, 3.0).unwrap();
        let plan = FramePlan::new(frame_bits, book).unwrap();
        let l_max = plan.max_len();
        let inside = frame_bits <= len && len < frame_bits + l_max;
        prop_assert_eq!(plan.length_is_suspect(len), !inside);
    }
}

#[test]
fn distance_four_density_stays_near_two_over_n() {
    use ssk_core::gssk_props::{max_set_with_min_distance, SearchOptions};
    for n_t in [6usize, 8] {
        let w = n_t / 2;
        let exact = max_set_with_min_distance(n_t, w, 4, SearchOptions::default())
            .unwrap()
            .size;
        let ratio = exact as f64 / binomial(n_t, w) as f64;
        assert!(ratio <= 2.0 / n_t as f64, "N_T {n_t}: {ratio}");
    }
}

#[test]
fn min_distance_of_known_code() {
    let words: Vec<_> = ["00001", "00110", "11000", "11111"]
        .iter()
        .map(|s| s.parse().unwrap())
        .collect();
    assert_eq!(min_distance(&words).unwrap(), 3);
}
