use meppm_core::analysis::{cmeppm_mai_ser, dmeppm_ber, DmeppmAnalysisParams};
use meppm_core::channel::{sample_poisson, superpose, Statistics};
use meppm_core::codes::{
    johnson_bound, msequence_difference_set, paley_difference_set, search_ooc, BibdCode, Codeword,
    SearchOptions,
};
use meppm_core::detection::{
    detect_ccm, detect_cmeppm_corr, detect_meppm, detect_sud, sud_weights, CorrelatorMode,
};
use meppm_core::modulation::{
    ccm_constellation, cmeppm_constellation, ensemble_papr, meppm_constellation, rank_multiset, rank_subset,
    unrank_multiset, unrank_subset, MeppmType,
};
use num_rational::Ratio;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const PALEY: [u32; 5] = [7, 11, 19, 23, 31];

fn small_bibd() -> impl Strategy<Value = BibdCode> {
    prop_oneof![
        prop::sample::select(PALEY.to_vec()).prop_map(|q| paley_difference_set(q).unwrap()),
        (3u32..=6).prop_map(|m| msequence_difference_set(m).unwrap()),
    ]
}

fn word_for(q: usize, seed: u64, weight: usize) -> Codeword {
    // A weight-`weight` word with pulse 0 set and the rest spread by `seed`.
    let mut pos = vec![0usize];
    let mut x = seed;
    while pos.len() < weight.min(q) {
        x = x.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
        let p = (x >> 33) as usize % q;
        if !pos.contains(&p) {
            pos.push(p);
        }
    }
    Codeword::from_positions(q, &pos).unwrap()
}

fn poisson_counts(intensity: &[f64], signal: f64, background: f64, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    sample_poisson(intensity, signal, background, &mut rng).unwrap().counts
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bibd_shift_correlations_are_lambda(code in small_bibd()) {
        let words = code.codewords();
        for a in 0..code.q() {
            for b in 0..code.q() {
                let expect = if a == b { code.k() } else { code.lambda() };
                prop_assert_eq!(words[a].correlation(&words[b]).unwrap(), expect);
            }
        }
    }

    #[test]
    fn shifts_compose(bits in prop::collection::vec(any::<bool>(), 1..40), a in 0usize..100, b in 0usize..100) {
        let w = Codeword::from_bits(&bits).unwrap();
        let n = bits.len();
        prop_assert_eq!(w.cyclic_shift(a).cyclic_shift(b), w.cyclic_shift((a + b) % n));
    }

    #[test]
    fn searched_codes_verify(l in 13usize..60, w in 3usize..6, alpha in 1usize..3, count in 1usize..5, seed in 0u64..1000) {
        let bound = johnson_bound(l, w, alpha).unwrap();
        let options = SearchOptions { seed, restarts: 4, node_budget: 2000, local_steps: 0 };
        match search_ooc(l, w, alpha, count, options) {
            Ok(code) => {
                prop_assert!(code.verify().passed());
                prop_assert!(code.len() as u64 <= bound);
                prop_assert_eq!(code.len(), count);
            }
            Err(e) => prop_assert!(
                matches!(e, meppm_core::Error::SearchExhausted { .. } | meppm_core::Error::JohnsonBoundExceeded { .. }),
                "{e}"
            ),
        }
    }

    #[test]
    fn cmeppm_aggregate_is_bounded_with_exact_average(code in small_bibd(), n in 1usize..5, w in 1usize..4, seed in any::<u64>()) {
        let q = code.q();
        let users: Vec<_> = (0..n)
            .map(|u| cmeppm_constellation(&code, &word_for(q, seed.wrapping_add(u as u64), w), n, u).unwrap())
            .collect();
        let e = ensemble_papr(&users).unwrap();
        prop_assert!(e.peak <= Ratio::from_integer(1));
        prop_assert_eq!(e.mean, Ratio::new(code.k() as u64, q as u64));
        // Peak at most 1 over mean K/Q caps the ratio at Q/K, reached when some slot is fully on.
        let cap = Ratio::new(q as u64, code.k() as u64);
        prop_assert!(e.papr <= cap);
        prop_assert_eq!(e.papr == cap, e.peak == Ratio::from_integer(1));
    }

    #[test]
    fn cmeppm_detector_is_shift_covariant(code in small_bibd(), seed in any::<u64>(), m in 0usize..100, s in 0usize..100) {
        let q = code.q();
        let word = word_for(q, seed, 3);
        let c = cmeppm_constellation(&code, &word, 2, 0).unwrap();
        let m = m % q;
        let r = poisson_counts(&c.symbols[m].intensities(), 8.0, 1.0, seed);
        let mut shifted = vec![0.0; q];
        for (j, x) in r.iter().enumerate() {
            shifted[(j + s) % q] = *x;
        }
        for mode in [CorrelatorMode::Plain, CorrelatorMode::Differential] {
            let d0 = detect_cmeppm_corr(&r, &code, &word, mode).unwrap();
            let d1 = detect_cmeppm_corr(&shifted, &code, &word, mode).unwrap();
            // Ties resolve to the lowest index, which does not rotate.
            let scores = meppm_core::detection::ooc_correlate(
                &meppm_core::detection::bibd_correlate(&r, &code, mode).unwrap(), &word).unwrap();
            let top = scores.iter().cloned().fold(f64::MIN, f64::max);
            let tied = scores.iter().filter(|x| (top - **x).abs() <= 1e-9 * top.abs().max(1.0)).count();
            if tied == 1 {
                prop_assert_eq!(d1, (d0 + s) % q);
            }
        }
    }

    #[test]
    fn ccm_detector_is_shift_covariant(seed in any::<u64>(), s in 0usize..13) {
        let word = Codeword::parse("1100100000000").unwrap();
        let c = ccm_constellation(&word, 1, 0).unwrap();
        let m = (seed % 13) as usize;
        let r = poisson_counts(&c.symbols[m].intensities(), 5.0, 0.5, seed);
        let mut shifted = vec![0.0; 13];
        for (j, x) in r.iter().enumerate() {
            shifted[(j + s) % 13] = *x;
        }
        let mut scores: Vec<f64> = (0..13)
            .map(|k| word.cyclic_shift(k).positions().iter().map(|&p| r[p]).sum())
            .collect();
        scores.sort_by(|a, b| b.partial_cmp(a).unwrap());
        prop_assume!(scores[0] > scores[1]);
        prop_assert_eq!(detect_ccm(&shifted, &word).unwrap(), (detect_ccm(&r, &word).unwrap() + s) % 13);
    }

    #[test]
    fn detectors_ignore_positive_scaling(code in small_bibd(), seed in any::<u64>(), scale in 0.01f64..100.0) {
        let q = code.q();
        let word = word_for(q, seed, 2);
        let c = cmeppm_constellation(&code, &word, 1, 0).unwrap();
        let r = poisson_counts(&c.symbols[(seed % q as u64) as usize].intensities(), 6.0, 1.0, seed);
        let scaled: Vec<f64> = r.iter().map(|x| x * scale).collect();
        let weights = sud_weights(&word, &code, 1, 0.5).unwrap();
        prop_assert_eq!(detect_sud(&r, &weights).unwrap(), detect_sud(&scaled, &weights).unwrap());
        for mode in [CorrelatorMode::Plain, CorrelatorMode::Differential] {
            prop_assert_eq!(
                detect_cmeppm_corr(&r, &code, &word, mode).unwrap(),
                detect_cmeppm_corr(&scaled, &code, &word, mode).unwrap()
            );
        }
        prop_assert_eq!(detect_ccm(&r, &word).unwrap(), detect_ccm(&scaled, &word).unwrap());
        // Type-I symbols share one energy, so the MEPPM metric is a plain correlation.
        let partition: Vec<usize> = (0..q.min(5)).collect();
        let m = meppm_constellation(&code, &partition, 2, MeppmType::I, 1, 0).unwrap();
        prop_assert_eq!(
            detect_meppm(&r, &m, &code, 6.0, 1.0).unwrap(),
            detect_meppm(&scaled, &m, &code, 6.0, 1.0).unwrap()
        );
    }

    #[test]
    fn type_one_sizes_and_slot_sums(code in small_bibd(), q_sub in 2usize..7, l in 1usize..6) {
        let q_sub = q_sub.min(code.q());
        prop_assume!(l < q_sub);
        let indices: Vec<usize> = (0..q_sub).collect();
        let c = meppm_constellation(&code, &indices, l, MeppmType::I, 1, 0).unwrap();
        let binom = (0..l).fold(1u64, |acc, i| acc * (q_sub - i) as u64 / (i as u64 + 1));
        prop_assert_eq!(c.len() as u64, binom);
        for s in &c.symbols {
            prop_assert_eq!(s.slot_sum(), Ratio::new((l * code.k()) as u64, code.q() as u64));
        }
    }

    #[test]
    fn unranking_is_a_bijection(n in 1usize..12, k in 1usize..6) {
        prop_assume!(k <= n);
        let subsets = (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i as u128 + 1));
        for r in 0..subsets {
            prop_assert_eq!(rank_subset(&unrank_subset(r, n, k)), r);
        }
        let multisets = (0..k).fold(1u128, |acc, i| acc * (n + k - 1 - i) as u128 / (i as u128 + 1));
        for r in 0..multisets {
            prop_assert_eq!(rank_multiset(&unrank_multiset(r, n, k)), r);
        }
    }

    #[test]
    fn mai_ser_raw_value_stays_below_weight_squared(n in 1usize..40, w in 2usize..8, l in 50usize..400) {
        let v = cmeppm_mai_ser(n, w, 1, l).unwrap();
        prop_assert!(v.raw >= 0.0 && v.raw <= (w * w) as f64);
        prop_assert!((0.0..=1.0).contains(&v.clamped));
    }

    #[test]
    fn seeded_draws_repeat(seed in any::<u64>()) {
        let intensity = [0.0, 0.25, 1.0, 0.5];
        prop_assert_eq!(poisson_counts(&intensity, 7.0, 2.0, seed), poisson_counts(&intensity, 7.0, 2.0, seed));
    }
}

#[test]
fn complement_of_seven_three_one() {
    let c = paley_difference_set(7).unwrap().complement().unwrap();
    assert_eq!((c.q(), c.k(), c.lambda()), (7, 4, 2));
    assert!(c.verify().passed());
}

#[test]
fn two_user_aggregate_average() {
    // (13,4,1) with the two-word (13,3,1) code: any pair of symbols carries
    // 4/13 of peak on average.
    let bibd = BibdCode::new(13, 4, 1, Codeword::parse("1101000001000").unwrap()).unwrap();
    let words = [Codeword::parse("1100100000000").unwrap(), Codeword::parse("1010000100000").unwrap()];
    let a = cmeppm_constellation(&bibd, &words[0], 2, 0).unwrap();
    let b = cmeppm_constellation(&bibd, &words[1], 2, 1).unwrap();
    for (i, j) in [(0, 0), (3, 7), (12, 5)] {
        let sum = superpose(&[&a.symbols[i], &b.symbols[j]]).unwrap();
        let total: Ratio<u64> = sum.amplitudes().into_iter().sum();
        assert_eq!(total / Ratio::from_integer(13), Ratio::new(4, 13));
        assert!(sum.peak() <= Ratio::from_integer(1));
    }
}

#[test]
fn expected_counts_track_intensity() {
    let intensity = [0.0, 0.2, 0.6, 1.0];
    let (signal, background) = (9.0, 1.5);
    let draws = 100_000;
    let mut sums = [0.0; 4];
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for _ in 0..draws {
        let r = sample_poisson(&intensity, signal, background, &mut rng).unwrap();
        for (s, x) in sums.iter_mut().zip(&r.counts) {
            *s += x;
        }
    }
    for (s, a) in sums.iter().zip(intensity) {
        let mean = signal * a + background;
        let sigma = (mean / draws as f64).sqrt();
        assert!((s / draws as f64 - mean).abs() <= 3.0 * sigma, "slot mean {} vs {mean}", s / draws as f64);
    }
    assert_eq!(Statistics::Poisson.name(), "poisson");
}

#[test]
fn dmeppm_ber_monotone_on_grid() {
    let base = DmeppmAnalysisParams {
        q: 63,
        k: 31,
        lambda: 15,
        branches: vec![4],
        set_size: 4,
        kind: MeppmType::II,
        signal: 1.0,
    };
    let signals = [5.0, 20.0, 80.0, 320.0, 1280.0];
    for users in 1..=5usize {
        let mut prev = f64::INFINITY;
        for &signal in &signals {
            let p = DmeppmAnalysisParams { signal, branches: vec![4; users], ..base.clone() };
            let v = dmeppm_ber(&p).unwrap().raw;
            assert!(v < prev);
            prev = v;
        }
    }
}
