//! Brute-force oracles, independent of the library's encode/solve paths.
#![allow(dead_code)]

use hstream_core::gf2::BitVector;
use hstream_core::hadamard::Word;

/// Codeword bit `j` of `x`, computed bit by bit from the definition.
pub fn parity(j: u64, x: &BitVector) -> bool {
    (0..x.len()).filter(|&i| (j >> i) & 1 == 1 && x.get(i)).count() % 2 == 1
}

pub fn all_words(n: usize) -> impl Iterator<Item = BitVector> {
    (0..1u64 << n).map(move |v| (0..n).map(|i| (v >> i) & 1 == 1).collect())
}

/// `{x : every sample (j, z) has parity(j, x) == z}`, ascending.
pub fn brute_erasure(n: usize, samples: &[(u64, bool)]) -> Vec<Word> {
    let mut out: Vec<Word> = all_words(n)
        .filter(|x| samples.iter().all(|&(j, z)| parity(j, x) == z))
        .map(Word::new)
        .collect();
    out.sort();
    out
}

/// `{y : mismatches(z, code(y)) / 2^n <= 1/2 - p/q}` by direct counting.
pub fn brute_corruption(n: usize, z: &BitVector, p: u64, q: u64) -> Vec<Word> {
    let len = 1u64 << n;
    let mut out: Vec<Word> = all_words(n)
        .filter(|y| {
            let mism = (0..len).filter(|&j| parity(j, y) != z.get(j as usize)).count() as u64;
            // mism/len <= 1/2 - p/q
            (2 * q * mism) as i128 <= (q as i128 - 2 * p as i128) * len as i128
        })
        .map(Word::new)
        .collect();
    out.sort();
    out
}

/// Stream bit at `position` for source `a`, from the block layout definition.
pub fn stream_bit(a: &BitVector, position: u64) -> bool {
    if position == 0 {
        return false;
    }
    let n = 63 - position.leading_zeros() as usize;
    parity(position - (1 << n), &a.prefix(n))
}
