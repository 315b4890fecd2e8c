//! The Walsh-Hadamard block code and its list decoders.
//!
//! A word `x` of `n` bits encodes to the `2^n`-bit codeword whose bit `j` is
//! the parity of `j AND x`, where bit `i` of the integer `j` multiplies word
//! bit `i`. Position 0 is the zero functional and is always 0.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};
use crate::gf2::{enumerate, AffineSpace, BitVector, Echelon};
use crate::Fraction;

/// Default cap on `n` for the exhaustive corruption decoder.
pub const DEFAULT_MAX_SCAN_BITS: usize = 20;

/// A source word of `n` bits.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Word(BitVector);

impl Word {
    pub fn new(bits: BitVector) -> Self {
        Self(bits)
    }

    pub fn from_u64(value: u64, n: usize) -> Self {
        Self(BitVector::from_u64(value, n))
    }

    pub fn n(&self) -> usize {
        self.0.len()
    }

    pub fn bits(&self) -> &BitVector {
        &self.0
    }

    pub fn into_bits(self) -> BitVector {
        self.0
    }
}

impl From<BitVector> for Word {
    fn from(bits: BitVector) -> Self {
        Self(bits)
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl FromStr for Word {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.parse().map(Word)
    }
}

/// The `2^n`-bit encoding of an `n`-bit word.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Codeword {
    n: usize,
    bits: BitVector,
}

impl Codeword {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn bits(&self) -> &BitVector {
        &self.bits
    }

    pub fn into_bits(self) -> BitVector {
        self.bits
    }

    pub fn get(&self, position: u64) -> bool {
        self.bits.get(position as usize)
    }
}

impl fmt::Display for Codeword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.bits.fmt(f)
    }
}

/// Known codeword bits: distinct positions below `2^n` with their values.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SampleSet {
    n: usize,
    pairs: BTreeMap<u64, bool>,
}

impl SampleSet {
    pub fn new(n: usize) -> Self {
        assert!(n < 64, "block length 2^{n} does not fit in a u64 position");
        Self { n, pairs: BTreeMap::new() }
    }

    pub fn from_pairs(n: usize, pairs: impl IntoIterator<Item = (u64, bool)>) -> Result<Self> {
        let mut s = Self::new(n);
        for (position, value) in pairs {
            s.insert(position, value)?;
        }
        Ok(s)
    }

    /// Samples of `codeword` at `positions`.
    pub fn from_codeword(codeword: &Codeword, positions: impl IntoIterator<Item = u64>) -> Result<Self> {
        let mut s = Self::new(codeword.n);
        for p in positions {
            s.check_position(p)?;
            s.insert(p, codeword.get(p))?;
        }
        Ok(s)
    }

    /// Adds a sample. Repeating a sample is a no-op; a different value for a
    /// known position is rejected.
    pub fn insert(&mut self, position: u64, value: bool) -> Result<()> {
        self.check_position(position)?;
        match self.pairs.insert(position, value) {
            Some(old) if old != value => {
                self.pairs.insert(position, old);
                Err(Error::ConflictingSample { position })
            }
            _ => Ok(()),
        }
    }

    fn check_position(&self, position: u64) -> Result<()> {
        let bound = 1u64 << self.n;
        if position < bound {
            Ok(())
        } else {
            Err(Error::PositionOutOfRange { position, bound })
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn get(&self, position: u64) -> Option<bool> {
        self.pairs.get(&position).copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (u64, bool)> + '_ {
        self.pairs.iter().map(|(&p, &v)| (p, v))
    }

    /// Samples that constrain the word; `(0, 0)` carries no information.
    pub fn informative_len(&self) -> usize {
        self.len() - usize::from(self.get(0) == Some(false))
    }
}

/// Encodes `w` into its Walsh-Hadamard codeword.
pub fn encode(w: &Word) -> Codeword {
    let n = w.n();
    assert!(n < 64, "cannot encode a {n}-bit word");
    let len = 1usize << n;
    let x = w.0.to_u64();
    // Bit lo of `low` is the parity of (lo AND x) over the low six bits.
    let low = (0..64u64).fold(0u64, |acc, lo| acc | (u64::from((lo & x).count_ones() & 1) << lo));
    let mut bits = BitVector::zeros(len);
    for (hi, word) in bits.words_mut().iter_mut().enumerate() {
        let flip = ((hi as u64) << 6 & x).count_ones() & 1 == 1;
        *word = if flip { !low } else { low };
    }
    bits.clear_tail();
    Codeword { n, bits }
}

/// Solution space of the linear system defined by `s`: rows are the binary
/// expansions of sampled positions, right-hand sides their values.
pub fn erasure_solution_space(s: &SampleSet) -> Result<AffineSpace> {
    let n = s.n;
    let mut ech = Echelon::new(n);
    let mut row = BitVector::zeros(n);
    for (position, value) in s.pairs() {
        if position == 0 {
            if value {
                return Err(Error::Inconsistent);
            }
            continue;
        }
        if n > 0 {
            row.words_mut()[0] = position;
        }
        ech.insert(&mut row, value)?;
    }
    Ok(ech.solution_space())
}

/// Every word whose codeword agrees with all samples in `s`.
pub fn erasure_list_decode(n: usize, s: &SampleSet) -> Result<Vec<Word>> {
    if s.n != n {
        return Err(Error::LengthMismatch { expected: n, found: s.n });
    }
    if s.is_empty() {
        return Err(Error::NoSamples);
    }
    let space = erasure_solution_space(s)?;
    Ok(enumerate(&space, u64::MAX)?.into_iter().map(Word).collect())
}

fn check_delta(delta: Fraction) -> Result<()> {
    if *delta.numer() == 0 || *delta.denom() == 0 || delta > Fraction::new(1, 2) {
        return Err(Error::InvalidDelta);
    }
    Ok(())
}

/// Every word whose codeword lies within normalized distance `1/2 - delta`
/// of `z`, ascending, using the default size cap.
pub fn corruption_list_decode(n: usize, z: &BitVector, delta: Fraction) -> Result<Vec<Word>> {
    corruption_list_decode_capped(n, z, delta, DEFAULT_MAX_SCAN_BITS)
}

/// As [`corruption_list_decode`] with an explicit cap on `n`.
///
/// All `2^n` words are scored at once with a fast Walsh-Hadamard transform:
/// entry `y` of the transform of `(-1)^z` is agreements minus disagreements
/// between `z` and `encode(y)`.
pub fn corruption_list_decode_capped(
    n: usize,
    z: &BitVector,
    delta: Fraction,
    max_n: usize,
) -> Result<Vec<Word>> {
    check_delta(delta)?;
    if n > max_n {
        return Err(Error::BlockTooLarge { block: n, cap: max_n });
    }
    let len = 1usize << n;
    if z.len() != len {
        return Err(Error::LengthMismatch { expected: len, found: z.len() });
    }
    let mut score: Vec<i64> = z.iter().map(|b| if b { -1 } else { 1 }).collect();
    let mut h = 1;
    while h < len {
        for block in score.chunks_mut(2 * h) {
            let (lo, hi) = block.split_at_mut(h);
            for (a, b) in lo.iter_mut().zip(hi.iter_mut()) {
                let (x, y) = (*a, *b);
                *a = x + y;
                *b = x - y;
            }
        }
        h *= 2;
    }
    // mismatches / 2^n <= 1/2 - p/q  <=>  2q * mismatches <= (q - 2p) * 2^n
    let (p, q) = (i128::from(*delta.numer()), i128::from(*delta.denom()));
    let bound = (q - 2 * p) * len as i128;
    let mut list: Vec<Word> = score
        .iter()
        .enumerate()
        .filter(|(_, &s)| {
            let mismatches = (len as i64 - s) / 2;
            2 * q * i128::from(mismatches) <= bound
        })
        .map(|(y, _)| Word::from_u64(y as u64, n))
        .collect();
    list.sort();
    Ok(list)
}

/// Erasure decoding by reduction to corruption decoding: fill the unknown
/// positions with all 0s and with all 1s, decode both, and merge.
pub fn erasure_via_fill_decode(n: usize, s: &SampleSet, delta: Fraction) -> Result<Vec<Word>> {
    if s.n != n {
        return Err(Error::LengthMismatch { expected: n, found: s.n });
    }
    check_delta(delta)?;
    let len = 1u64 << n;
    let (p, q) = (u128::from(*delta.numer()), u128::from(*delta.denom()));
    let have = s.len();
    if (have as u128) * q < 2 * p * u128::from(len) {
        let need = (2 * p * u128::from(len)).div_ceil(q) as u64;
        return Err(Error::InsufficientSamples { have, need });
    }
    let mut merged: BTreeSet<Word> = corruption_list_decode(n, &fill(s, false), delta)?.into_iter().collect();
    merged.extend(corruption_list_decode(n, &fill(s, true), delta)?);
    Ok(merged.into_iter().collect())
}

/// Normalized Hamming distance between two equal-length, nonempty vectors.
pub fn normalized_hamming(a: &BitVector, b: &BitVector) -> Result<Fraction> {
    let mismatches = a.hamming(b)?;
    if a.is_empty() {
        return Err(Error::InvalidParameter("distance of empty vectors"));
    }
    Ok(Fraction::new(mismatches as u64, a.len() as u64))
}

pub fn distance(a: &Codeword, b: &Codeword) -> Result<Fraction> {
    if a.n != b.n {
        return Err(Error::LengthMismatch { expected: a.n, found: b.n });
    }
    normalized_hamming(&a.bits, &b.bits)
}

/// The list bound `1 / (2 delta^2)` for corruption decoding, as a fraction.
pub fn johnson_bound(delta: Fraction) -> Fraction {
    Fraction::new(1, 2) / (delta * delta)
}

/// The received word with every unsampled position set to `value`.
pub fn fill(s: &SampleSet, value: bool) -> BitVector {
    let len = 1usize << s.n;
    let mut z = if value { BitVector::ones(len) } else { BitVector::zeros(len) };
    for (position, v) in s.pairs() {
        z.set(position as usize, v);
    }
    z
}
