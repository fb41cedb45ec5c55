mod common;

use common::{all_patterns, bits, coefficients, oracle_stripe, solve, specs, word};
use coneraid::codec::{CodeSpec, ErasurePattern, Word};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn check_pattern(spec: &CodeSpec, stripe: &[Vec<u8>], lost: &[usize]) {
    let coeffs = coefficients(spec.scheme(), spec.prime().unwrap_or(0), spec.data_disks());
    let mut raw: Vec<Option<Vec<u8>>> = stripe.iter().cloned().map(Some).collect();
    let mut slots: Vec<Option<Word>> = stripe.iter().map(|b| Some(word(b))).collect();
    for &i in lost {
        raw[i] = None;
        slots[i] = None;
    }
    let expect = solve(&coeffs, spec.word_bits(), &raw);
    let pattern = ErasurePattern::new(lost, spec.total_disks()).unwrap();
    let got: Vec<Vec<u8>> = spec
        .reconstruct(&slots, &pattern)
        .unwrap()
        .iter()
        .map(bits)
        .collect();
    assert_eq!(got, expect, "{spec:?} lost {lost:?}");
    for (g, &i) in got.iter().zip(lost) {
        assert_eq!(g, &stripe[i]);
    }
}

#[test]
fn encoder_matches_textbook_coefficients() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for spec in specs() {
        let coeffs = coefficients(spec.scheme(), spec.prime().unwrap_or(0), spec.data_disks());
        for _ in 0..10 {
            let stripe = oracle_stripe(&coeffs, spec.word_bits(), &mut rng);
            let k = spec.data_disks();
            let data: Vec<Word> = stripe[..k].iter().map(|b| word(b)).collect();
            let (p, q) = spec.encode(&data).unwrap();
            assert_eq!(bits(&p), stripe[k]);
            assert_eq!(bits(&q), stripe[k + 1], "{spec:?}");
        }
    }
}

#[test]
fn z17_every_pair_matches_solver() {
    let spec = CodeSpec::zn_basic(17, 17).unwrap();
    let coeffs = coefficients(spec.scheme(), 17, 17);
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    let stripe = oracle_stripe(&coeffs, 16, &mut rng);
    let pairs: Vec<Vec<usize>> = all_patterns(19)
        .into_iter()
        .filter(|p| p.len() == 2)
        .collect();
    assert_eq!(pairs.len(), 171);
    for lost in pairs {
        check_pattern(&spec, &stripe, &lost);
    }
}

#[test]
fn rs_four_disks_every_pattern_matches_solver() {
    let spec = CodeSpec::rs256(4).unwrap();
    let coeffs = coefficients(spec.scheme(), 0, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for _ in 0..5 {
        let stripe = oracle_stripe(&coeffs, 8, &mut rng);
        for lost in all_patterns(6) {
            check_pattern(&spec, &stripe, &lost);
        }
    }
}

#[test]
fn random_cases_across_schemes() {
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    let specs = specs();
    for _ in 0..200 {
        let spec = &specs[rng.gen_range(0..specs.len())];
        let coeffs = coefficients(spec.scheme(), spec.prime().unwrap_or(0), spec.data_disks());
        let stripe = oracle_stripe(&coeffs, spec.word_bits(), &mut rng);
        let patterns = all_patterns(spec.total_disks());
        check_pattern(spec, &stripe, &patterns[rng.gen_range(0..patterns.len())]);
    }
}
