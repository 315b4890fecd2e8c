//! Bit-packed linear algebra over GF(2).
//!
//! Vectors are packed little-endian into `u64` words: bit `i` lives in word
//! `i / 64` at bit position `i % 64`. Bits at or beyond `len` are kept zero so
//! that derived equality and hashing are exact.
//!
//! Gaussian elimination pivots on the lowest set index (leftmost column when a
//! vector is written as a `0`/`1` string) and operates on whole packed rows.

use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;
use core::str::FromStr;

use crate::error::{Error, Result};

const WORD: usize = 64;

#[inline]
fn words_for(len: usize) -> usize {
    len.div_ceil(WORD)
}

/// A fixed-length vector over GF(2).
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct BitVector {
    words: Vec<u64>,
    len: usize,
}

impl BitVector {
    pub fn zeros(len: usize) -> Self {
        Self { words: vec![0; words_for(len)], len }
    }

    pub fn ones(len: usize) -> Self {
        let mut v = Self { words: vec![u64::MAX; words_for(len)], len };
        v.clear_tail();
        v
    }

    /// Builds a vector of `len <= 64` bits from the low bits of `value`.
    pub fn from_u64(value: u64, len: usize) -> Self {
        assert!(len <= WORD, "from_u64 supports at most 64 bits");
        let mut v = Self { words: vec![value; words_for(len)], len };
        v.clear_tail();
        v
    }

    /// Low 64 bits as an integer (bit `i` of the result is bit `i` of the vector).
    pub fn to_u64(&self) -> u64 {
        self.words.first().copied().unwrap_or(0)
    }

    pub fn from_bools(bits: &[bool]) -> Self {
        bits.iter().copied().collect()
    }

    #[inline]
    pub fn len(&self) -> usize {
        self.len
    }

    #[inline]
    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    #[inline]
    pub fn get(&self, index: usize) -> bool {
        assert!(index < self.len, "bit index {index} out of range for length {}", self.len);
        (self.words[index / WORD] >> (index % WORD)) & 1 == 1
    }

    #[inline]
    pub fn set(&mut self, index: usize, value: bool) {
        assert!(index < self.len, "bit index {index} out of range for length {}", self.len);
        let mask = 1u64 << (index % WORD);
        if value {
            self.words[index / WORD] |= mask;
        } else {
            self.words[index / WORD] &= !mask;
        }
    }

    pub fn push(&mut self, value: bool) {
        if self.len.is_multiple_of(WORD) {
            self.words.push(0);
        }
        self.len += 1;
        self.set(self.len - 1, value);
    }

    pub fn extend_from(&mut self, other: &BitVector) {
        self.words.reserve(words_for(self.len + other.len) - self.words.len());
        for bit in other.iter() {
            self.push(bit);
        }
    }

    /// The first `len` bits.
    pub fn prefix(&self, len: usize) -> BitVector {
        assert!(len <= self.len);
        let mut out = Self { words: self.words[..words_for(len)].to_vec(), len };
        out.clear_tail();
        out
    }

    /// True if `self` is a prefix of `other`.
    pub fn is_prefix_of(&self, other: &BitVector) -> bool {
        self.len <= other.len && other.prefix(self.len) == *self
    }

    pub fn count_ones(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    /// Index of the lowest set bit.
    pub fn first_one(&self) -> Option<usize> {
        self.words
            .iter()
            .enumerate()
            .find(|(_, &w)| w != 0)
            .map(|(i, w)| i * WORD + w.trailing_zeros() as usize)
    }

    /// Index of the first position where `self` and `other` differ.
    pub fn first_difference(&self, other: &BitVector) -> Option<usize> {
        let len = self.len.min(other.len);
        self.words
            .iter()
            .zip(&other.words)
            .enumerate()
            .find(|(_, (a, b))| a != b)
            .map(|(i, (a, b))| i * WORD + (a ^ b).trailing_zeros() as usize)
            .filter(|&i| i < len)
    }

    pub fn iter(&self) -> impl Iterator<Item = bool> + '_ {
        (0..self.len).map(move |i| self.get(i))
    }

    /// Indices of set bits, ascending.
    pub fn ones_indices(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(i, &w)| {
            let mut rest = w;
            core::iter::from_fn(move || {
                if rest == 0 {
                    return None;
                }
                let tz = rest.trailing_zeros() as usize;
                rest &= rest - 1;
                Some(i * WORD + tz)
            })
        })
    }

    pub fn xor(&self, other: &BitVector) -> Result<BitVector> {
        check_len(self.len, other.len)?;
        let mut out = self.clone();
        out.xor_assign_unchecked(other);
        Ok(out)
    }

    /// Number of positions where the two vectors differ.
    pub fn hamming(&self, other: &BitVector) -> Result<usize> {
        check_len(self.len, other.len)?;
        Ok(self.words.iter().zip(&other.words).map(|(a, b)| (a ^ b).count_ones() as usize).sum())
    }

    #[inline]
    pub(crate) fn xor_assign_unchecked(&mut self, other: &BitVector) {
        debug_assert_eq!(self.len, other.len);
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    /// Packed words, little-endian; bits beyond `len` are zero.
    pub fn as_words(&self) -> &[u64] {
        &self.words
    }

    pub(crate) fn words_mut(&mut self) -> &mut [u64] {
        &mut self.words
    }

    pub(crate) fn clear_tail(&mut self) {
        let rem = self.len % WORD;
        if rem != 0 {
            if let Some(last) = self.words.last_mut() {
                *last &= (1u64 << rem) - 1;
            }
        }
    }
}

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected == found {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, found })
    }
}

impl FromIterator<bool> for BitVector {
    fn from_iter<I: IntoIterator<Item = bool>>(iter: I) -> Self {
        let mut v = BitVector::default();
        for bit in iter {
            v.push(bit);
        }
        v
    }
}

/// Lexicographic order on the `0`/`1` string, so a proper prefix sorts first.
impl Ord for BitVector {
    fn cmp(&self, other: &Self) -> Ordering {
        match self.first_difference(other) {
            Some(i) => self.get(i).cmp(&other.get(i)),
            None => self.len.cmp(&other.len),
        }
    }
}

impl PartialOrd for BitVector {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for bit in self.iter() {
            f.write_str(if bit { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitVector(\"{self}\")")
    }
}

impl FromStr for BitVector {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                _ => Err(Error::InvalidParameter("bit strings may only contain '0' and '1'")),
            })
            .collect()
    }
}

/// Parity of the positionwise AND of `u` and `v`.
pub fn dot(u: &BitVector, v: &BitVector) -> Result<bool> {
    check_len(u.len, v.len)?;
    let ones: u32 = u.words.iter().zip(&v.words).map(|(a, b)| (a & b).count_ones()).sum();
    Ok(ones & 1 == 1)
}

/// A dense matrix over GF(2), stored as packed rows of equal length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BitMatrix {
    cols: usize,
    rows: Vec<BitVector>,
}

impl BitMatrix {
    pub fn new(cols: usize) -> Self {
        Self { cols, rows: Vec::new() }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { cols, rows: vec![BitVector::zeros(cols); rows] }
    }

    pub fn identity(n: usize) -> Self {
        let rows = (0..n)
            .map(|i| {
                let mut r = BitVector::zeros(n);
                r.set(i, true);
                r
            })
            .collect();
        Self { cols: n, rows }
    }

    pub fn from_rows(cols: usize, rows: Vec<BitVector>) -> Result<Self> {
        for r in &rows {
            check_len(cols, r.len())?;
        }
        Ok(Self { cols, rows })
    }

    pub fn push_row(&mut self, row: BitVector) -> Result<()> {
        check_len(self.cols, row.len())?;
        self.rows.push(row);
        Ok(())
    }

    pub fn rows(&self) -> &[BitVector] {
        &self.rows
    }

    pub fn nrows(&self) -> usize {
        self.rows.len()
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }
}

/// Incremental row-echelon form of an augmented system `rows · x = rhs`.
///
/// Each stored pivot row has its lowest set bit at the pivot column. A new row
/// is reduced by repeatedly clearing its lowest set bit with the matching
/// pivot row; XOR with that row only touches higher columns.
#[derive(Clone, Debug)]
pub struct Echelon {
    cols: usize,
    by_col: Vec<Option<(BitVector, bool)>>,
    rank: usize,
}

impl Echelon {
    pub fn new(cols: usize) -> Self {
        Self { cols, by_col: vec![None; cols], rank: 0 }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Adds one equation. Returns `Ok(true)` if it raised the rank, `Ok(false)`
    /// if it was implied by earlier rows, and `Inconsistent` if it contradicts
    /// them. The row is consumed as scratch space.
    pub fn insert(&mut self, row: &mut BitVector, mut rhs: bool) -> Result<bool> {
        check_len(self.cols, row.len())?;
        while let Some(col) = row.first_one() {
            match &self.by_col[col] {
                Some((pivot, pivot_rhs)) => {
                    row.xor_assign_unchecked(pivot);
                    rhs ^= *pivot_rhs;
                }
                None => {
                    self.by_col[col] = Some((row.clone(), rhs));
                    self.rank += 1;
                    return Ok(true);
                }
            }
        }
        if rhs {
            Err(Error::Inconsistent)
        } else {
            Ok(false)
        }
    }

    /// The solution set of all inserted equations.
    pub fn solution_space(&self) -> AffineSpace {
        let n = self.cols;
        // Back-substitute to reduced form, highest pivot first.
        let mut rows: Vec<Option<(BitVector, bool)>> = self.by_col.clone();
        for p in (0..n).rev() {
            let Some((pivot, prhs)) = rows[p].clone() else { continue };
            for row in rows.iter_mut().take(p).flatten() {
                if row.0.get(p) {
                    row.0.xor_assign_unchecked(&pivot);
                    row.1 ^= prhs;
                }
            }
        }
        let mut offset = BitVector::zeros(n);
        for (p, row) in rows.iter().enumerate() {
            if let Some((_, rhs)) = row {
                offset.set(p, *rhs);
            }
        }
        let basis = (0..n)
            .filter(|&f| rows[f].is_none())
            .map(|f| {
                let mut v = BitVector::zeros(n);
                v.set(f, true);
                for (p, row) in rows.iter().enumerate().take(f) {
                    if let Some((r, _)) = row {
                        if r.get(f) {
                            v.set(p, true);
                        }
                    }
                }
                v
            })
            .collect();
        AffineSpace::new(offset, basis).expect("free-column basis is independent")
    }
}

/// An affine subspace `offset + span(basis)` of GF(2)^n in canonical form.
///
/// The basis is fully reduced: vectors are sorted by their lowest set index
/// (the pivot), and no vector has a bit at another vector's pivot. The offset
/// is zero at every pivot. Two spaces representing the same set therefore
/// compare equal.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSpace {
    offset: BitVector,
    basis: Vec<BitVector>,
    pivots: Vec<usize>,
}

impl AffineSpace {
    pub fn new(offset: BitVector, basis: Vec<BitVector>) -> Result<Self> {
        let n = offset.len();
        let mut ech = Echelon::new(n);
        for v in &basis {
            let mut scratch = v.clone();
            if !ech.insert(&mut scratch, false)? {
                return Err(Error::DependentBasis);
            }
        }
        let mut rows: Vec<Option<BitVector>> = ech.by_col.into_iter().map(|r| r.map(|(v, _)| v)).collect();
        for p in (0..n).rev() {
            let Some(pivot) = rows[p].clone() else { continue };
            for row in rows.iter_mut().take(p).flatten() {
                if row.get(p) {
                    row.xor_assign_unchecked(&pivot);
                }
            }
        }
        let mut offset = offset;
        let mut pivots = Vec::new();
        let mut reduced = Vec::new();
        for (p, row) in rows.into_iter().enumerate() {
            if let Some(v) = row {
                if offset.get(p) {
                    offset.xor_assign_unchecked(&v);
                }
                pivots.push(p);
                reduced.push(v);
            }
        }
        Ok(Self { offset, basis: reduced, pivots })
    }

    /// All of GF(2)^n.
    pub fn full(n: usize) -> Self {
        Self {
            offset: BitVector::zeros(n),
            basis: BitMatrix::identity(n).rows,
            pivots: (0..n).collect(),
        }
    }

    pub fn point(x: BitVector) -> Self {
        Self { offset: x, basis: Vec::new(), pivots: Vec::new() }
    }

    pub fn ambient_dim(&self) -> usize {
        self.offset.len()
    }

    pub fn dimension(&self) -> usize {
        self.basis.len()
    }

    pub fn offset(&self) -> &BitVector {
        &self.offset
    }

    pub fn basis(&self) -> &[BitVector] {
        &self.basis
    }

    /// Number of members, if it fits in a `u64`.
    pub fn cardinality(&self) -> Option<u64> {
        1u64.checked_shl(self.dimension() as u32)
    }

    pub fn contains(&self, x: &BitVector) -> bool {
        if x.len() != self.ambient_dim() {
            return false;
        }
        let mut diff = x.clone();
        diff.xor_assign_unchecked(&self.offset);
        for (p, v) in self.pivots.iter().zip(&self.basis) {
            if diff.get(*p) {
                diff.xor_assign_unchecked(v);
            }
        }
        diff.is_zero()
    }

    /// The member selected by a coefficient tuple, first coefficient in the
    /// most significant bit of `index`.
    fn member(&self, index: u64) -> BitVector {
        let k = self.dimension();
        let mut x = self.offset.clone();
        for (i, v) in self.basis.iter().enumerate() {
            if (index >> (k - 1 - i)) & 1 == 1 {
                x.xor_assign_unchecked(v);
            }
        }
        x
    }
}

/// Lists every member of `space`.
///
/// Order is lexicographic over the coefficient tuple `(c_1, …, c_k)`, where
/// `c_1` multiplies the basis vector with the smallest pivot. Because the
/// basis is reduced and `c_i` equals the member's bit at pivot `i`, this is
/// also ascending `0`/`1`-string order of the members.
pub fn enumerate(space: &AffineSpace, limit: u64) -> Result<Vec<BitVector>> {
    let size = space
        .cardinality()
        .filter(|&s| s <= limit)
        .ok_or(Error::LimitExceeded { dimension: space.dimension(), limit })?;
    Ok((0..size).map(|i| space.member(i)).collect())
}

/// Row rank over GF(2).
pub fn rank(m: &BitMatrix) -> usize {
    let mut ech = Echelon::new(m.cols);
    for row in &m.rows {
        let mut scratch = row.clone();
        ech.insert(&mut scratch, false).expect("homogeneous rows are consistent");
    }
    ech.rank()
}

/// Solves `coeffs · x = rhs`.
pub fn solve_affine(coeffs: &BitMatrix, rhs: &BitVector) -> Result<AffineSpace> {
    check_len(coeffs.nrows(), rhs.len())?;
    let mut ech = Echelon::new(coeffs.cols);
    for (row, b) in coeffs.rows.iter().zip(rhs.iter()) {
        let mut scratch = row.clone();
        ech.insert(&mut scratch, b)?;
    }
    Ok(ech.solution_space())
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::string::ToString;

    fn bv(s: &str) -> BitVector {
        s.parse().unwrap()
    }

    fn matrix(cols: usize, rows: &[&str]) -> BitMatrix {
        BitMatrix::from_rows(cols, rows.iter().map(|r| bv(r)).collect()).unwrap()
    }

    #[test]
    fn dot_examples() {
        assert!(dot(&bv("101"), &bv("110")).unwrap());
        assert!(!dot(&bv("000"), &bv("111")).unwrap());
        assert!(dot(&bv("111"), &bv("111")).unwrap());
        assert_eq!(
            dot(&bv("11"), &bv("111")),
            Err(Error::LengthMismatch { expected: 2, found: 3 })
        );
    }

    #[test]
    fn rank_examples() {
        assert_eq!(rank(&matrix(3, &["100", "010", "110"])), 2);
        assert_eq!(rank(&BitMatrix::zeros(3, 3)), 0);
        assert_eq!(rank(&BitMatrix::identity(3)), 3);
    }

    #[test]
    fn solve_worked_example() {
        // x0 = 1, x1 ^ x2 = 0
        let space = solve_affine(&matrix(3, &["100", "011"]), &bv("10")).unwrap();
        assert_eq!(space.dimension(), 1);
        let members = enumerate(&space, 4).unwrap();
        assert_eq!(members, [bv("100"), bv("111")]);
    }

    #[test]
    fn solve_contradiction() {
        let res = solve_affine(&matrix(1, &["1", "1"]), &bv("01"));
        assert_eq!(res, Err(Error::Inconsistent));
    }

    #[test]
    fn empty_system_is_full_space() {
        let space = solve_affine(&BitMatrix::new(3), &BitVector::zeros(0)).unwrap();
        assert_eq!(space.dimension(), 3);
        assert_eq!(space, AffineSpace::full(3));
        assert_eq!(
            enumerate(&space, 4),
            Err(Error::LimitExceeded { dimension: 3, limit: 4 })
        );
        assert_eq!(enumerate(&space, 8).unwrap().len(), 8);
    }

    #[test]
    fn zero_length_space_is_singleton() {
        let space = solve_affine(&BitMatrix::new(0), &BitVector::zeros(0)).unwrap();
        assert_eq!(enumerate(&space, 1).unwrap(), [BitVector::zeros(0)]);
    }

    #[test]
    fn enumerate_point() {
        let space = AffineSpace::point(bv("101"));
        assert_eq!(enumerate(&space, 1).unwrap(), [bv("101")]);
    }

    #[test]
    fn enumerate_is_sorted() {
        let space = AffineSpace::new(bv("0000"), alloc::vec![bv("1101"), bv("0110")]).unwrap();
        let members = enumerate(&space, 4).unwrap();
        let mut sorted = members.clone();
        sorted.sort();
        assert_eq!(members, sorted);
    }

    #[test]
    fn dependent_basis_rejected() {
        let res = AffineSpace::new(bv("000"), alloc::vec![bv("110"), bv("011"), bv("101")]);
        assert_eq!(res, Err(Error::DependentBasis));
    }

    #[test]
    fn canonical_form_is_unique() {
        let a = AffineSpace::new(bv("100"), alloc::vec![bv("011")]).unwrap();
        let b = AffineSpace::new(bv("111"), alloc::vec![bv("011")]).unwrap();
        assert_eq!(a, b);
        assert!(a.contains(&bv("111")));
        assert!(!a.contains(&bv("110")));
    }

    #[test]
    fn bitvector_basics() {
        let mut v = BitVector::zeros(70);
        v.set(0, true);
        v.set(69, true);
        assert_eq!(v.count_ones(), 2);
        assert_eq!(v.first_one(), Some(0));
        assert_eq!(v.ones_indices().collect::<Vec<_>>(), [0, 69]);
        assert_eq!(v.prefix(3).to_string(), "100");
        assert!(v.prefix(10).is_prefix_of(&v));
        assert_eq!(BitVector::ones(70).count_ones(), 70);
        assert!(bv("01") < bv("10"));
        assert!(bv("0") < bv("01"));
        assert!("012".parse::<BitVector>().is_err());
        assert_eq!(BitVector::from_u64(5, 3).to_string(), "101");
    }
}
