//! The block stream codec.
//!
//! Stream layout: position 0 is a pad bit fixed to 0, and block `n >= 0`
//! occupies `I_n = 2^n..2^(n+1)` holding the codeword of the source prefix of
//! length `n`. A stream encoded up to block `N` therefore has `2^(N+1)` bits.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::gf2::{enumerate, AffineSpace, BitVector};
use crate::hadamard::{encode, erasure_solution_space, SampleSet, Word};
use crate::Fraction;

/// A finite prefix `A↾N` of the source sequence.
pub type SourcePrefix = BitVector;

/// Largest block index whose stream length still fits comfortably in memory
/// addressing on 64-bit targets.
pub const MAX_BLOCK: usize = 40;

/// The stream positions of block `n`.
pub fn block_range(n: usize) -> core::ops::Range<u64> {
    (1u64 << n)..(1u64 << (n + 1))
}

/// Where a stream position lives.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Slot {
    /// Position 0, the pad bit.
    Reserved,
    Block(usize),
}

pub fn block_of(position: u64) -> Slot {
    match position {
        0 => Slot::Reserved,
        p => Slot::Block(63 - p.leading_zeros() as usize),
    }
}

/// An encoded stream prefix.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CodedStream {
    bits: BitVector,
}

impl CodedStream {
    /// Wraps raw stream bits without checking the block layout.
    pub fn from_bits(bits: BitVector) -> Self {
        Self { bits }
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    pub fn into_bits(self) -> BitVector {
        self.bits
    }

    /// Largest block lying entirely inside the stream.
    pub fn covered_blocks(&self) -> Option<usize> {
        let len = self.bits.len() as u64;
        (len >= 2).then(|| 62 - len.leading_zeros() as usize)
    }

    /// The bits of block `n`.
    pub fn block(&self, n: usize) -> Option<BitVector> {
        let range = block_range(n);
        (range.end <= self.bits.len() as u64).then(|| range.map(|p| self.bits.get(p as usize)).collect())
    }
}

/// Encodes the source prefix up to and including block `up_to_block`.
pub fn encode_stream(a: &SourcePrefix, up_to_block: usize) -> Result<CodedStream> {
    if up_to_block > MAX_BLOCK {
        return Err(Error::BlockTooLarge { block: up_to_block, cap: MAX_BLOCK });
    }
    if a.len() < up_to_block {
        return Err(Error::PrefixTooShort { have: a.len(), need: up_to_block });
    }
    let mut bits = BitVector::zeros(1 << (up_to_block + 1));
    for n in 0..=up_to_block {
        let codeword = encode(&Word::new(a.prefix(n)));
        let start = 1usize << n;
        if n >= 6 {
            // 64-aligned: copy whole words.
            let first = start / 64;
            bits.words_mut()[first..first + codeword.bits().as_words().len()]
                .copy_from_slice(codeword.bits().as_words());
        } else {
            for j in codeword.bits().ones_indices() {
                bits.set(start + j, true);
            }
        }
    }
    Ok(CodedStream { bits })
}

/// Random access to stream bits, so decoders can be instrumented.
pub trait BitSource {
    fn len(&self) -> usize;
    fn bit(&self, position: usize) -> bool;

    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl BitSource for BitVector {
    fn len(&self) -> usize {
        BitVector::len(self)
    }

    fn bit(&self, position: usize) -> bool {
        self.get(position)
    }
}

impl BitSource for CodedStream {
    fn len(&self) -> usize {
        self.bits.len()
    }

    fn bit(&self, position: usize) -> bool {
        self.bits.get(position)
    }
}

/// Recovers `A↾n` from the first `2^(n+1)` stream bits, checking that the
/// whole prefix is a valid encoding. Reads no position at or beyond `2^(n+1)`.
pub fn decode_exact<S: BitSource + ?Sized>(stream: &S, n: usize) -> Result<SourcePrefix> {
    if n > MAX_BLOCK {
        return Err(Error::BlockTooLarge { block: n, cap: MAX_BLOCK });
    }
    let need = 1usize << (n + 1);
    if stream.len() < need {
        return Err(Error::PrefixTooShort { have: stream.len(), need });
    }
    let start = 1usize << n;
    // Position 2^n + 2^i of block n is the functional picking out bit i.
    let x: SourcePrefix = (0..n).map(|i| stream.bit(start + (1 << i))).collect();
    if stream.bit(0) {
        return Err(Error::Inconsistent);
    }
    for m in 0..=n {
        let codeword = encode(&Word::new(x.prefix(m)));
        let base = 1usize << m;
        if (0..base).any(|j| stream.bit(base + j) != codeword.bits().get(j)) {
            return Err(Error::Inconsistent);
        }
    }
    Ok(x)
}

/// Known stream bits at distinct positions.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct StreamSamples {
    pairs: BTreeMap<u64, bool>,
}

impl StreamSamples {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs(pairs: impl IntoIterator<Item = (u64, bool)>) -> Result<Self> {
        let mut s = Self::new();
        for (p, v) in pairs {
            s.insert(p, v)?;
        }
        Ok(s)
    }

    /// Honest samples of `stream` at `positions`.
    pub fn from_stream(stream: &CodedStream, positions: impl IntoIterator<Item = u64>) -> Result<Self> {
        let bound = stream.len() as u64;
        let mut s = Self::new();
        for p in positions {
            if p >= bound {
                return Err(Error::PositionOutOfRange { position: p, bound });
            }
            s.insert(p, stream.bit(p as usize))?;
        }
        Ok(s)
    }

    /// Every bit of `stream`.
    pub fn full(stream: &CodedStream) -> Self {
        Self { pairs: stream.bits.iter().enumerate().map(|(p, v)| (p as u64, v)).collect() }
    }

    /// Adds a sample; equal duplicates collapse, conflicting ones are rejected.
    pub fn insert(&mut self, position: u64, value: bool) -> Result<()> {
        match self.pairs.insert(position, value) {
            Some(old) if old != value => {
                self.pairs.insert(position, old);
                Err(Error::ConflictingSample { position })
            }
            _ => Ok(()),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// One past the largest sampled position.
    pub fn horizon(&self) -> u64 {
        self.pairs.keys().next_back().map_or(0, |p| p + 1)
    }

    pub fn get(&self, position: u64) -> Option<bool> {
        self.pairs.get(&position).copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u64, bool)> + '_ {
        self.pairs.iter().map(|(&p, &v)| (p, v))
    }

    /// The samples falling in block `n`, re-indexed to codeword positions.
    pub fn block_samples(&self, n: usize) -> SampleSet {
        let range = block_range(n);
        let start = range.start;
        SampleSet::from_pairs(n, self.pairs.range(range).map(|(&p, &v)| (p - start, v)))
            .expect("positions inside the block are distinct and in range")
    }
}

/// Candidate prefixes for one good block.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateLevel {
    pub block: usize,
    /// Survivors of prefix-consistency pruning, ascending.
    pub candidates: Vec<SourcePrefix>,
    /// Size of the block's own erasure list before pruning.
    pub raw_count: usize,
}

/// Per-block candidate sets, pruned so that every candidate at one level
/// extends a candidate at the previous level and is extended by one at the
/// next.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CandidateTree {
    pub levels: Vec<CandidateLevel>,
    pub width_bound: usize,
}

impl CandidateTree {
    pub fn level(&self, block: usize) -> Option<&CandidateLevel> {
        self.levels.iter().find(|l| l.block == block)
    }

    pub fn deepest(&self) -> Option<&CandidateLevel> {
        self.levels.last()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DecodeReport {
    pub tree: CandidateTree,
    pub recovered: Option<SourcePrefix>,
    pub good_blocks: Vec<usize>,
    /// Sampled fraction of every block that the samples reach.
    pub per_block_sample_fraction: Vec<(usize, Fraction)>,
}

fn check_unit_delta(delta: Fraction) -> Result<()> {
    if *delta.numer() == 0 || delta > Fraction::new(1, 1) {
        Err(Error::InvalidDelta)
    } else {
        Ok(())
    }
}

/// `ceil(2 / delta)`, the width bound of every candidate level.
pub fn width_bound(delta: Fraction) -> usize {
    let (p, q) = (*delta.numer(), *delta.denom());
    (2 * q).div_ceil(p) as usize
}

/// True when `informative` samples meet the `delta/2` density threshold of a
/// block of `2^n` positions.
pub fn meets_threshold(informative: usize, n: usize, delta: Fraction) -> bool {
    let (p, q) = (u128::from(*delta.numer()), u128::from(*delta.denom()));
    2 * q * informative as u128 >= p << n
}

/// Exact erasure solution space of block `n` under `samples`.
pub fn block_candidates(samples: &StreamSamples, n: usize) -> Result<AffineSpace> {
    erasure_solution_space(&samples.block_samples(n))
}

/// Decodes source prefixes from a sampled view of the stream.
///
/// Every block whose informative sample count reaches `(delta/2)·2^n` is a
/// good block; its erasure list holds at most `2/delta` prefixes. The lists
/// are pruned against each other for prefix consistency, shallow to deep and
/// back. Every sampled block is checked for consistency, good or not.
pub fn decode_from_samples(samples: &StreamSamples, delta: Fraction) -> Result<DecodeReport> {
    check_unit_delta(delta)?;
    if samples.get(0) == Some(true) {
        return Err(Error::Inconsistent);
    }
    let horizon = samples.horizon();
    let top = match block_of(horizon.saturating_sub(1)) {
        Slot::Block(n) => Some(n),
        Slot::Reserved => None,
    };
    let width = width_bound(delta);

    let mut per_block_sample_fraction = Vec::new();
    let mut raw_levels: Vec<(usize, Vec<SourcePrefix>)> = Vec::new();
    for n in top.map_or(0..0, |t| 0..t + 1) {
        let block = samples.block_samples(n);
        per_block_sample_fraction.push((n, Fraction::new(block.len() as u64, 1 << n)));
        if block.is_empty() {
            continue;
        }
        let space = erasure_solution_space(&block)?;
        if meets_threshold(block.informative_len(), n, delta) {
            let list = enumerate(&space, width as u64)?;
            raw_levels.push((n, list));
        }
    }
    if raw_levels.is_empty() {
        return Err(Error::NoGoodBlocks);
    }
    let good_blocks = raw_levels.iter().map(|(n, _)| *n).collect();
    let tree = prune(raw_levels, width)?;
    let recovered = tree.deepest().filter(|l| l.candidates.len() == 1).map(|l| l.candidates[0].clone());
    Ok(DecodeReport { tree, recovered, good_blocks, per_block_sample_fraction })
}

fn prune(raw: Vec<(usize, Vec<SourcePrefix>)>, width_bound: usize) -> Result<CandidateTree> {
    let mut levels: Vec<CandidateLevel> = raw
        .into_iter()
        .map(|(block, candidates)| CandidateLevel { block, raw_count: candidates.len(), candidates })
        .collect();
    for i in 1..levels.len() {
        let (shallow, deep) = levels.split_at_mut(i);
        let parent = &shallow[i - 1];
        let keep: BTreeSet<&SourcePrefix> = parent.candidates.iter().collect();
        deep[0].candidates.retain(|c| keep.contains(&c.prefix(parent.block)));
    }
    for i in (0..levels.len().saturating_sub(1)).rev() {
        let (shallow, deep) = levels.split_at_mut(i + 1);
        let level = &mut shallow[i];
        let heads: BTreeSet<SourcePrefix> = deep[0].candidates.iter().map(|c| c.prefix(level.block)).collect();
        level.candidates.retain(|c| heads.contains(c));
    }
    if levels.iter().any(|l| l.candidates.is_empty()) {
        return Err(Error::Inconsistent);
    }
    Ok(CandidateTree { levels, width_bound })
}
