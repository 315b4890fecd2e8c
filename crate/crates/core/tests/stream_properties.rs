mod common;

use std::cell::Cell;
use std::collections::BTreeSet;

use hstream_core::density::{make_sampler, Sampler};
use hstream_core::gf2::{enumerate, BitVector};
use hstream_core::hadamard::{encode, Word};
use hstream_core::stream::{
    block_candidates, decode_exact, decode_from_samples, encode_stream, BitSource, StreamSamples,
};
use hstream_core::Fraction;
use proptest::prelude::*;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn source(len: usize) -> impl Strategy<Value = BitVector> {
    proptest::collection::vec(any::<bool>(), len).prop_map(|b| BitVector::from_bools(&b))
}

#[test]
fn stream_bits_match_layout_oracle() {
    let mut rng = StdRng::seed_from_u64(21);
    for len in 0..=10 {
        let a: BitVector = (0..len).map(|_| rng.gen()).collect();
        let stream = encode_stream(&a, len).unwrap();
        assert_eq!(stream.len(), 1 << (len + 1));
        for p in 0..stream.len() as u64 {
            assert_eq!(stream.bit(p as usize), common::stream_bit(&a, p), "len {len} position {p}");
        }
        for n in 0..=len {
            assert_eq!(stream.block(n).unwrap(), *encode(&Word::new(a.prefix(n))).bits());
        }
    }
}

#[test]
fn exact_round_trip_exhaustive_to_ten() {
    for len in 0..=10 {
        for a in common::all_words(len) {
            let stream = encode_stream(&a, len).unwrap();
            assert_eq!(decode_exact(&stream, len).unwrap(), a);
        }
    }
}

struct Probe<'a> {
    bits: &'a BitVector,
    max_read: Cell<usize>,
}

impl BitSource for Probe<'_> {
    fn len(&self) -> usize {
        self.bits.len()
    }

    fn bit(&self, position: usize) -> bool {
        self.max_read.set(self.max_read.get().max(position));
        self.bits.get(position)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn exact_round_trip_to_fourteen(a in source(14), n in 0usize..=14) {
        let stream = encode_stream(&a, 14).unwrap();
        let probe = Probe { bits: stream.bits(), max_read: Cell::new(0) };
        prop_assert_eq!(decode_exact(&probe, n).unwrap(), a.prefix(n));
        prop_assert!(probe.max_read.get() < 1 << (n + 1));
    }

    #[test]
    fn corrupted_prefix_is_rejected(a in source(8), flip in 0usize..512) {
        let mut bits = encode_stream(&a, 8).unwrap().into_bits();
        bits.set(flip, !bits.get(flip));
        prop_assert!(decode_exact(&bits, 8).is_err());
    }

    #[test]
    fn good_levels_contain_truth(
        len in 1usize..=10,
        seed in any::<u64>(),
        which in 0usize..3,
        q in 1u64..=9,
    ) {
        let delta = [Fraction::new(1, 10), Fraction::new(3, 10), Fraction::new(1, 2)][which];
        let mut rng = StdRng::seed_from_u64(seed);
        let a: BitVector = (0..len).map(|_| rng.gen()).collect();
        let stream = encode_stream(&a, len).unwrap();
        let d = make_sampler(&Sampler::Bernoulli { q: Fraction::new(q, 10), seed }, stream.len() as u64).unwrap();
        let samples = StreamSamples::from_stream(&stream, d.positions().iter().copied()).unwrap();
        let Ok(report) = decode_from_samples(&samples, delta) else { return Ok(()) };
        for level in &report.tree.levels {
            prop_assert!(level.candidates.contains(&a.prefix(level.block)));
            prop_assert!(level.raw_count as u64 * *delta.numer() <= 2 * *delta.denom());
            // Oracle: brute-force the block's erasure list.
            let pairs: Vec<_> = samples.block_samples(level.block).pairs().collect();
            let brute = common::brute_erasure(level.block, &pairs);
            prop_assert_eq!(brute.len(), level.raw_count);
        }
        if let Some(r) = report.recovered {
            prop_assert!(r.is_prefix_of(&a));
        }
    }

    #[test]
    fn more_samples_never_widen_levels(len in 2usize..=9, seed in any::<u64>()) {
        let mut rng = StdRng::seed_from_u64(seed);
        let a: BitVector = (0..len).map(|_| rng.gen()).collect();
        let stream = encode_stream(&a, len).unwrap();
        let all: Vec<u64> = (0..stream.len() as u64).filter(|_| rng.gen_bool(0.5)).collect();
        let small: Vec<u64> = all.iter().copied().filter(|_| rng.gen_bool(0.6)).collect();
        let delta = Fraction::new(1, 4);
        let big = decode_from_samples(&StreamSamples::from_stream(&stream, all).unwrap(), delta);
        let little = decode_from_samples(&StreamSamples::from_stream(&stream, small).unwrap(), delta);
        if let (Ok(big), Ok(little)) = (big, little) {
            for level in &little.tree.levels {
                let wide: BTreeSet<_> = level.candidates.iter().collect();
                if let Some(narrow) = big.tree.level(level.block) {
                    prop_assert!(narrow.candidates.iter().all(|c| wide.contains(c)));
                }
            }
        }
    }
}

#[test]
fn even_positions_decode_every_good_block() {
    let mut rng = StdRng::seed_from_u64(22);
    // Even positions carry no information on bit 0, so block 1 is never
    // good; start at length 2.
    for _ in 0..50 {
        let len = rng.gen_range(2..=10);
        let a: BitVector = (0..len).map(|_| rng.gen()).collect();
        let stream = encode_stream(&a, len).unwrap();
        let samples = StreamSamples::from_stream(&stream, (0..stream.len() as u64).step_by(2)).unwrap();
        let report = decode_from_samples(&samples, Fraction::new(1, 2)).unwrap();
        assert!(!report.good_blocks.is_empty());
        for level in &report.tree.levels {
            assert!(level.candidates.contains(&a.prefix(level.block)));
            let space = block_candidates(&samples, level.block).unwrap();
            let pairs: Vec<_> = samples.block_samples(level.block).pairs().collect();
            let brute = common::brute_erasure(level.block, &pairs);
            let listed: Vec<Word> = enumerate(&space, 64).unwrap().into_iter().map(Word::new).collect();
            assert_eq!(listed, brute);
        }
    }
}

#[test]
fn full_samples_recover_source() {
    let a: BitVector = "10".parse().unwrap();
    let stream = encode_stream(&a, 2).unwrap();
    let report = decode_from_samples(&StreamSamples::full(&stream), Fraction::new(1, 1)).unwrap();
    let recovered = report.recovered.unwrap();
    assert_eq!(encode_stream(&recovered, 2).unwrap(), stream);
}
