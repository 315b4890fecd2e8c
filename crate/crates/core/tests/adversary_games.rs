use hstream_core::adversary::{
    agreement_set, agreement_witness, builtin_decoder, defeat_decoders, replay, BlockStreamEncoder, DecoderBox,
    GameConfig, Outcome, StepAction, TtFunctional, BUILTIN_DECODERS,
};
use hstream_core::density::{rho_window, PositionSet};
use hstream_core::gf2::BitVector;
use hstream_core::stream::SourcePrefix;
use hstream_core::{Error, Fraction, Result};
use itertools::Itertools;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

fn bv(s: &str) -> BitVector {
    s.parse().unwrap()
}

#[test]
fn agreement_witness_meets_a_third() {
    let mut rng = StdRng::seed_from_u64(41);
    for _ in 0..2000 {
        let m = rng.gen_range(1..=256);
        let ys: Vec<BitVector> = (0..3).map(|_| (0..m).map(|_| rng.gen()).collect()).collect();
        let ((i, j), d) = agreement_witness(&ys[0], &ys[1], &ys[2]).unwrap();
        assert!(3 * d.len() >= m);
        // d is exactly where the pair agrees.
        for p in 0..m {
            assert_eq!(d.contains(p as u64), ys[i - 1].get(p) == ys[j - 1].get(p));
        }
        // Earlier pairs in the order did not qualify.
        let order = [(1, 2), (1, 3), (2, 3)];
        for &(a, b) in order.iter().take_while(|&&pair| pair != (i, j)) {
            assert!(3 * agreement_set(&ys[a - 1], &ys[b - 1]).len() < m);
        }
    }
}

fn empty_tau() -> PositionSet {
    PositionSet::empty(0)
}

fn check_witness(decoders: &[DecoderBox<'_>], sigma: &SourcePrefix, tau: &PositionSet, w: &hstream_core::adversary::DefeatWitness) {
    assert!(rho_window(&w.d, w.d.horizon()).unwrap() >= Fraction::new(1, 3));
    assert_eq!(w.d.horizon() as usize, BlockStreamEncoder.image(&w.x).unwrap().len());
    assert!(sigma.is_prefix_of(&w.x));
    assert!(tau.to_characteristic().is_prefix_of(&w.d.to_characteristic()));
    let outcomes = replay(&BlockStreamEncoder, decoders, &w.x, &w.d).unwrap();
    assert_eq!(outcomes, w.per_decoder);
    assert!(outcomes.iter().all(|o| o.is_defeated()));
}

#[test]
fn builtin_suite_witnesses_replay() {
    let mut exhausted = Vec::new();
    for k in 0..=3 {
        for names in BUILTIN_DECODERS.iter().combinations(k) {
            let decoders: Vec<_> = names.iter().map(|n| builtin_decoder(n).unwrap()).collect();
            let report =
                defeat_decoders(&BlockStreamEncoder, &decoders, &BitVector::default(), &empty_tau(), &GameConfig::default());
            match report.result {
                Ok(w) => check_witness(&decoders, &BitVector::default(), &empty_tau(), &w),
                Err(Error::BudgetExhausted) => exhausted.push(names),
                Err(e) => panic!("{names:?}: {e}"),
            }
        }
    }
    // Only suites holding both the smallest- and largest-candidate decoders
    // cover both sources of every pair.
    assert!(exhausted.iter().all(|names| names.contains(&&"first") && names.contains(&&"last")));
}

#[test]
fn constrained_games_respect_sigma_and_tau() {
    let mut rng = StdRng::seed_from_u64(42);
    for _ in 0..20 {
        let sigma: BitVector = (0..rng.gen_range(0..5)).map(|_| rng.gen()).collect();
        let tau_len = rng.gen_range(0..20);
        let tau = PositionSet::from_characteristic(&(0..tau_len).map(|_| rng.gen()).collect());
        let decoders = [builtin_decoder("zeros").unwrap(), builtin_decoder("unique").unwrap()];
        let report = defeat_decoders(&BlockStreamEncoder, &decoders, &sigma, &tau, &GameConfig::default());
        check_witness(&decoders, &sigma, &tau, &report.result.unwrap());
    }
}

#[test]
fn unique_candidate_decoder_fixture() {
    // Regression fixture: the first agreement set already leaves two
    // candidates in the last block, so the unique-answer decoder abstains.
    let decoders = [builtin_decoder("unique").unwrap()];
    let report = defeat_decoders(&BlockStreamEncoder, &decoders, &BitVector::default(), &empty_tau(), &GameConfig::default());
    let w = report.result.unwrap();
    assert_eq!(w.x, bv("00"));
    assert_eq!(w.d.positions(), [0, 1, 2, 3, 4, 5]);
    assert_eq!(w.per_decoder, [Outcome::Diverged]);
    assert_eq!(report.transcript.len(), 1);
}

#[test]
fn induction_eliminates_then_wins() {
    let decoders = [builtin_decoder("zeros").unwrap(), builtin_decoder("last").unwrap()];
    let report = defeat_decoders(&BlockStreamEncoder, &decoders, &BitVector::default(), &empty_tau(), &GameConfig::default());
    assert_eq!(report.transcript[0].action, StepAction::Eliminate("zeros".into()));
    let w = report.result.unwrap();
    check_witness(&decoders, &BitVector::default(), &empty_tau(), &w);
    // The second source of the first pair is fixed as a prefix.
    assert!(bv("01").is_prefix_of(&w.x));
}

#[test]
fn adaptive_pair_exhausts_budget() {
    let decoders = [builtin_decoder("first").unwrap(), builtin_decoder("last").unwrap()];
    let config = GameConfig { search_budget: 5, ..GameConfig::default() };
    let report = defeat_decoders(&BlockStreamEncoder, &decoders, &BitVector::default(), &empty_tau(), &config);
    assert_eq!(report.result, Err(Error::BudgetExhausted));
    assert_eq!(report.transcript.len(), 5);
}

/// The identity map: the stream is the source itself.
struct Identity;

impl TtFunctional for Identity {
    fn image(&self, x: &SourcePrefix) -> Result<BitVector> {
        Ok(x.clone())
    }
}

#[test]
fn works_for_other_functionals() {
    let zeros = DecoderBox::new("zeros", 1000, |d, _, _| Ok(BitVector::zeros(d.horizon() as usize)));
    let echo = DecoderBox::new("echo", 1000, |d, samples, fuel| {
        fuel.burn(samples.len() as u64)?;
        Ok((0..d.horizon()).map(|p| samples.get(p).unwrap_or(true)).collect())
    });
    let decoders = [zeros, echo];
    let report = defeat_decoders(&Identity, &decoders, &bv("1"), &PositionSet::from_characteristic(&bv("11")), &GameConfig::default());
    let w = report.result.unwrap();
    assert!(rho_window(&w.d, w.d.horizon()).unwrap() >= Fraction::new(1, 3));
    assert!(replay(&Identity, &decoders, &w.x, &w.d).unwrap().iter().all(|o| o.is_defeated()));
}

#[test]
fn decoders_out_of_fuel_diverge() {
    let greedy = DecoderBox::new("greedy", 3, |_, samples, fuel| {
        fuel.burn(samples.len() as u64)?;
        Ok(BitVector::default())
    });
    let report = defeat_decoders(&BlockStreamEncoder, &[greedy], &BitVector::default(), &empty_tau(), &GameConfig::default());
    assert_eq!(report.result.unwrap().per_decoder, [Outcome::Diverged]);
}
