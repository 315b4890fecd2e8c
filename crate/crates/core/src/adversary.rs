//! Adversarial inputs for stream decoders.
//!
//! Among any three equal-length strings, some pair agrees on at least a third
//! of the positions. Feeding a decoder only the positions where two encodings
//! agree makes the two sources indistinguishable, so at most one of them can
//! be decoded correctly. [`defeat_decoders`] plays this out inductively
//! against a finite list of black-box decoders.

use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::density::{rho_window, PositionSet};
use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::stream::{decode_from_samples, encode_stream, SourcePrefix, StreamSamples};
use crate::Fraction;

/// A use-bounded encoder: the image of a finite source prefix is a finite
/// stream prefix, and extending the source only extends the image.
pub trait TtFunctional {
    fn image(&self, x: &SourcePrefix) -> Result<BitVector>;
}

/// The block stream encoder, imaging an `L`-bit prefix to `2^(L+1)` bits.
#[derive(Clone, Copy, Debug, Default)]
pub struct BlockStreamEncoder;

impl TtFunctional for BlockStreamEncoder {
    fn image(&self, x: &SourcePrefix) -> Result<BitVector> {
        Ok(encode_stream(x, x.len())?.into_bits())
    }
}

/// Source length whose block-stream image has `horizon` bits, if any.
pub fn source_len_for_horizon(horizon: u64) -> Option<usize> {
    (horizon >= 2 && horizon.is_power_of_two()).then(|| horizon.trailing_zeros() as usize - 1)
}

/// Marker for a decoder call that ran out of steps.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Diverged;

/// Step allowance for a single decoder call.
#[derive(Clone, Debug)]
pub struct Fuel {
    remaining: u64,
}

impl Fuel {
    pub fn new(steps: u64) -> Self {
        Self { remaining: steps }
    }

    pub fn burn(&mut self, steps: u64) -> Result<(), Diverged> {
        self.remaining = self.remaining.checked_sub(steps).ok_or(Diverged)?;
        Ok(())
    }

    pub fn remaining(&self) -> u64 {
        self.remaining
    }
}

type DecodeFn<'a> = dyn Fn(&PositionSet, &StreamSamples, &mut Fuel) -> Result<SourcePrefix, Diverged> + 'a;

/// A black-box decoder with a per-call step budget.
///
/// It is handed the sampled position set and the stream values there, and
/// answers with a guessed source prefix. It must be deterministic.
pub struct DecoderBox<'a> {
    name: String,
    budget: u64,
    decode: Box<DecodeFn<'a>>,
}

impl<'a> DecoderBox<'a> {
    pub fn new(
        name: impl Into<String>,
        budget: u64,
        decode: impl Fn(&PositionSet, &StreamSamples, &mut Fuel) -> Result<SourcePrefix, Diverged> + 'a,
    ) -> Self {
        Self { name: name.into(), budget, decode: Box::new(decode) }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn run(&self, d: &PositionSet, samples: &StreamSamples) -> Result<SourcePrefix, Diverged> {
        (self.decode)(d, samples, &mut Fuel::new(self.budget))
    }
}

impl fmt::Debug for DecoderBox<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DecoderBox").field("name", &self.name).field("budget", &self.budget).finish()
    }
}

/// Step budget given to the built-in decoders.
pub const DEFAULT_DECODER_BUDGET: u64 = 1 << 22;

/// Names accepted by [`builtin_decoder`].
pub const BUILTIN_DECODERS: &[&str] = &["zeros", "ones", "unique", "first", "last"];

/// The built-in decoders:
/// - `zeros`, `ones`: ignore the samples and answer a constant prefix.
/// - `unique`: block-stream decoding at `delta = 1/3`, answering only when
///   the deepest candidate level is a singleton.
/// - `first`, `last`: the same decoding, answering the smallest or largest
///   deepest candidate.
pub fn builtin_decoder(name: &str) -> Option<DecoderBox<'static>> {
    let constant = |bit: bool| {
        move |d: &PositionSet, _: &StreamSamples, fuel: &mut Fuel| {
            let len = source_len_for_horizon(d.horizon()).ok_or(Diverged)?;
            fuel.burn(len as u64)?;
            Ok((0..len).map(|_| bit).collect())
        }
    };
    let decoder = match name {
        "zeros" => DecoderBox::new(name, DEFAULT_DECODER_BUDGET, constant(false)),
        "ones" => DecoderBox::new(name, DEFAULT_DECODER_BUDGET, constant(true)),
        "unique" => DecoderBox::new(name, DEFAULT_DECODER_BUDGET, |_, samples, fuel| {
            fuel.burn(samples.len() as u64)?;
            let report = decode_from_samples(samples, Fraction::new(1, 3)).map_err(|_| Diverged)?;
            report.recovered.ok_or(Diverged)
        }),
        "first" => DecoderBox::new(name, DEFAULT_DECODER_BUDGET, |_, samples, fuel| {
            fuel.burn(samples.len() as u64)?;
            let report = decode_from_samples(samples, Fraction::new(1, 3)).map_err(|_| Diverged)?;
            report.tree.deepest().map(|l| l.candidates[0].clone()).ok_or(Diverged)
        }),
        "last" => DecoderBox::new(name, DEFAULT_DECODER_BUDGET, |_, samples, fuel| {
            fuel.burn(samples.len() as u64)?;
            let report = decode_from_samples(samples, Fraction::new(1, 3)).map_err(|_| Diverged)?;
            report.tree.deepest().and_then(|l| l.candidates.last().cloned()).ok_or(Diverged)
        }),
        _ => return None,
    };
    Some(decoder)
}

/// How a decoder fared on a source prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Outcome {
    /// The answer disagrees with the source at this index.
    WrongAt(usize),
    /// No answer covering the examined prefix: out of steps, or an answer that
    /// stops short of it without contradicting it.
    Diverged,
    /// The answer reproduces the examined prefix.
    Correct,
}

impl Outcome {
    pub fn is_defeated(self) -> bool {
        !matches!(self, Outcome::Correct)
    }
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Outcome::WrongAt(m) => write!(f, "wrong@{m}"),
            Outcome::Diverged => f.write_str("diverged"),
            Outcome::Correct => f.write_str("correct"),
        }
    }
}

/// Judges a decoder answer against the examined source prefix `x`.
pub fn judge(answer: Result<SourcePrefix, Diverged>, x: &SourcePrefix) -> Outcome {
    match answer {
        Err(Diverged) => Outcome::Diverged,
        Ok(guess) => match guess.first_difference(x) {
            Some(m) => Outcome::WrongAt(m),
            None if guess.len() >= x.len() => Outcome::Correct,
            None => Outcome::Diverged,
        },
    }
}

/// A source prefix and a dense position set on which every decoder fails.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DefeatWitness {
    pub x: SourcePrefix,
    /// Sampled positions; the horizon is the length of the image of `x`.
    pub d: PositionSet,
    pub per_decoder: Vec<Outcome>,
}

/// Stream values of `image` at the positions of `d`.
pub fn restrict(image: &BitVector, d: &PositionSet) -> StreamSamples {
    StreamSamples::from_pairs(d.positions().iter().map(|&p| (p, image.get(p as usize))))
        .expect("positions of a set are distinct")
}

/// Runs every decoder on the view `(d, image(x) ∩ d)` and judges it against `x`.
pub fn replay<G: TtFunctional + ?Sized>(
    gamma: &G,
    decoders: &[DecoderBox<'_>],
    x: &SourcePrefix,
    d: &PositionSet,
) -> Result<Vec<Outcome>> {
    let samples = restrict(&gamma.image(x)?, d);
    Ok(decoders.iter().map(|dec| judge(dec.run(d, &samples), x)).collect())
}

/// Finds a pair among three equal-length strings agreeing on at least a third
/// of the positions, taking the first qualifying pair in the order
/// (1,2), (1,3), (2,3). Returns the 1-based pair and its full agreement set.
pub fn agreement_witness(
    y1: &BitVector,
    y2: &BitVector,
    y3: &BitVector,
) -> Result<((usize, usize), PositionSet)> {
    let m = y1.len();
    for y in [y2, y3] {
        if y.len() != m {
            return Err(Error::LengthMismatch { expected: m, found: y.len() });
        }
    }
    if m == 0 {
        return Err(Error::InvalidParameter("strings must be nonempty"));
    }
    let ys = [y1, y2, y3];
    for (i, j) in [(0, 1), (0, 2), (1, 2)] {
        let d = agreement_set(ys[i], ys[j]);
        if 3 * d.len() >= m {
            return Ok(((i + 1, j + 1), d));
        }
    }
    unreachable!("every position is shared by some pair, so one pair agrees on a third")
}

/// Positions where `a` and `b` agree.
pub fn agreement_set(a: &BitVector, b: &BitVector) -> PositionSet {
    let positions = a.iter().zip(b.iter()).enumerate().filter(|(_, (x, y))| x == y).map(|(p, _)| p as u64);
    PositionSet::new(positions.collect(), a.len() as u64).expect("positions are in range")
}

#[derive(Clone, Debug)]
pub struct GameConfig {
    /// Induction steps the game may take before giving up.
    pub search_budget: u64,
    /// Bits appended to the current source constraint to form the three
    /// competing extensions. At least 2.
    pub initial_tail: usize,
    /// Longest source prefix the game may examine.
    pub max_source_len: usize,
}

impl Default for GameConfig {
    fn default() -> Self {
        Self { search_budget: 64, initial_tail: 2, max_source_len: 12 }
    }
}

/// What an induction step did.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum StepAction {
    /// The agreement set was too sparse; the horizon doubles.
    Widen,
    /// This decoder reproduced the first source of the pair and is set aside.
    Eliminate(String),
    /// A candidate witness was checked; these decoders still decode it.
    Replay(Vec<String>),
    /// A witness was found.
    Witness,
}

/// One transcript record.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GameStep {
    pub remaining: usize,
    pub sigma_len: usize,
    pub tau_len: usize,
    pub pair: Option<(usize, usize)>,
    pub d_size: usize,
    pub horizon: u64,
    pub action: StepAction,
}

impl fmt::Display for GameStep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "k={} sigma_len={} tau_len={} pair=", self.remaining, self.sigma_len, self.tau_len)?;
        match self.pair {
            Some((i, j)) => write!(f, "{i},{j}")?,
            None => f.write_str("-")?,
        }
        write!(f, " d={} horizon={} action=", self.d_size, self.horizon)?;
        match &self.action {
            StepAction::Widen => f.write_str("widen"),
            StepAction::Eliminate(name) => write!(f, "eliminate:{name}"),
            StepAction::Replay(names) => write!(f, "replay:{}", names.join(",")),
            StepAction::Witness => f.write_str("witness"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct GameReport {
    pub transcript: Vec<GameStep>,
    pub result: Result<DefeatWitness>,
}

struct Game<'g, 'd, G: ?Sized> {
    gamma: &'g G,
    decoders: &'g [DecoderBox<'d>],
    config: &'g GameConfig,
    budget: u64,
    transcript: Vec<GameStep>,
}

enum Verdict {
    Won(DefeatWitness),
    Failing(Vec<usize>),
}

impl<G: TtFunctional + ?Sized> Game<'_, '_, G> {
    fn spend(&mut self) -> Result<()> {
        self.budget = self.budget.checked_sub(1).ok_or(Error::BudgetExhausted)?;
        Ok(())
    }

    /// Pads `sigma` with zeros until its image covers `min_len` bits.
    fn extend_to_cover(&self, sigma: &SourcePrefix, min_len: usize) -> Result<SourcePrefix> {
        let mut s = sigma.clone();
        while self.gamma.image(&s)?.len() < min_len {
            if s.len() >= self.config.max_source_len {
                return Err(Error::BudgetExhausted);
            }
            s.push(false);
        }
        Ok(s)
    }

    fn check(&self, x: &SourcePrefix, d: &PositionSet) -> Result<Verdict> {
        let outcomes = replay(self.gamma, self.decoders, x, d)?;
        let failing: Vec<usize> = (0..outcomes.len()).filter(|&i| !outcomes[i].is_defeated()).collect();
        let dense = rho_window(d, d.horizon())? >= Fraction::new(1, 3);
        Ok(if failing.is_empty() && dense {
            Verdict::Won(DefeatWitness { x: x.clone(), d: d.clone(), per_decoder: outcomes })
        } else {
            Verdict::Failing(failing)
        })
    }

    fn names(&self, idx: &[usize]) -> Vec<String> {
        idx.iter().map(|&i| String::from(self.decoders[i].name())).collect()
    }

    fn run(&mut self, sigma: &SourcePrefix, tau: &PositionSet) -> Result<DefeatWitness> {
        let mut sigma = sigma.clone();
        let mut tau = tau.to_characteristic();
        let mut remaining: Vec<usize> = (0..self.decoders.len()).collect();
        let mut tail = self.config.initial_tail.max(2);
        loop {
            if remaining.is_empty() {
                // Nothing left to beat: every position past the constraint.
                let x = self.extend_to_cover(&sigma, (3 * tau.len()).max(1))?;
                let horizon = self.gamma.image(&x)?.len() as u64;
                let mut positions: Vec<u64> = tau.ones_indices().map(|p| p as u64).collect();
                positions.extend(tau.len() as u64..horizon);
                let d = PositionSet::new(positions, horizon)?;
                let mut step = GameStep {
                    remaining: 0,
                    sigma_len: sigma.len(),
                    tau_len: tau.len(),
                    pair: None,
                    d_size: d.len(),
                    horizon,
                    action: StepAction::Witness,
                };
                match self.check(&x, &d)? {
                    Verdict::Won(w) => {
                        self.transcript.push(step);
                        return Ok(w);
                    }
                    Verdict::Failing(failing) => {
                        step.action = StepAction::Replay(self.names(&failing));
                        self.transcript.push(step);
                        self.spend()?;
                        remaining = failing;
                        sigma = x;
                        tau = d.to_characteristic();
                        continue;
                    }
                }
            }

            self.spend()?;
            let base = self.extend_to_cover(&sigma, tau.len())?;
            if base.len() + tail > self.config.max_source_len {
                return Err(Error::BudgetExhausted);
            }
            let xs: Vec<SourcePrefix> = (0..3)
                .map(|k| {
                    let mut x = base.clone();
                    x.extend_from(&BitVector::zeros(tail));
                    if k > 0 {
                        x.set(base.len() + k - 1, true);
                    }
                    x
                })
                .collect();
            let ys = xs.iter().map(|x| self.gamma.image(x)).collect::<Result<Vec<_>>>()?;
            let horizon = ys[0].len() as u64;

            // The images agree below |tau|, so the constraint can be imposed
            // there; pick the pair agreeing most often past it.
            let (pair, d) = [(0, 1), (0, 2), (1, 2)]
                .into_iter()
                .map(|(i, j)| {
                    let agree = agreement_set(&ys[i], &ys[j]);
                    let mut positions: Vec<u64> = tau.ones_indices().map(|p| p as u64).collect();
                    positions.extend(agree.positions().iter().copied().filter(|&p| p >= tau.len() as u64));
                    ((i, j), PositionSet::new(positions, horizon).expect("in range"))
                })
                .fold(None::<((usize, usize), PositionSet)>, |best, cand| match best {
                    Some(b) if b.1.len() >= cand.1.len() => Some(b),
                    _ => Some(cand),
                })
                .expect("three pairs");
            let mut step = GameStep {
                remaining: remaining.len(),
                sigma_len: sigma.len(),
                tau_len: tau.len(),
                pair: Some((pair.0 + 1, pair.1 + 1)),
                d_size: d.len(),
                horizon,
                action: StepAction::Widen,
            };
            if 3 * d.len() < horizon as usize {
                self.transcript.push(step);
                tail += 1;
                continue;
            }

            let (x1, x2) = (&xs[pair.0], &xs[pair.1]);
            // Both sources present the same view, so each decoder can be right
            // about at most one of them.
            let mut failing_x2 = Vec::new();
            for x in [x1, x2] {
                match self.check(x, &d)? {
                    Verdict::Won(w) => {
                        step.action = StepAction::Witness;
                        self.transcript.push(step);
                        return Ok(w);
                    }
                    Verdict::Failing(f) => failing_x2 = f,
                }
            }
            let samples = restrict(&ys[pair.0], &d);
            let culprit = remaining
                .iter()
                .position(|&i| judge(self.decoders[i].run(&d, &samples), x1) == Outcome::Correct);
            match culprit {
                Some(pos) => {
                    let idx = remaining.remove(pos);
                    step.action = StepAction::Eliminate(String::from(self.decoders[idx].name()));
                    self.transcript.push(step);
                    sigma = x2.clone();
                }
                None => {
                    // x1 is decoded only by decoders set aside earlier;
                    // continue from x2 against whoever still decodes it.
                    step.action = StepAction::Replay(self.names(&failing_x2));
                    self.transcript.push(step);
                    remaining = failing_x2;
                    sigma = x2.clone();
                }
            }
            tau = d.to_characteristic();
            tail = self.config.initial_tail.max(2);
        }
    }
}

/// Searches for a source extending `sigma` and a position set extending
/// `tau` (as a characteristic string of length `tau.horizon()`) with window
/// density at least 1/3, on which every decoder answers wrongly or not at all.
///
/// Each step fixes the shortest zero extension of `sigma` whose image covers
/// `tau`, branches it three ways, and keeps the pair of images agreeing most
/// often past `tau`. If neither source of the pair already defeats every
/// decoder, a decoder that reproduces the first source is set aside and the
/// game continues from the second source and the agreement set. Candidate
/// witnesses are always verified by replay against every decoder.
pub fn defeat_decoders<G: TtFunctional + ?Sized>(
    gamma: &G,
    decoders: &[DecoderBox<'_>],
    sigma: &SourcePrefix,
    tau: &PositionSet,
    config: &GameConfig,
) -> GameReport {
    let mut game = Game { gamma, decoders, config, budget: config.search_budget, transcript: Vec::new() };
    let result = game.run(sigma, tau);
    GameReport { transcript: game.transcript, result }
}
