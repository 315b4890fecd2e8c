//! Walsh-Hadamard block stream codec with erasure list decoding.
//!
//! A binary source `A` is encoded block by block: the prefix of length `n` is
//! Walsh-Hadamard encoded into `2^n` bits that occupy stream positions
//! `2^n..2^(n+1)`. Position 0 is a pad bit fixed to 0. Any set of stream
//! positions that is dense enough inside some block pins the matching prefix
//! down to a short list of candidates, whatever positions were lost.
//!
//! Modules:
//! - [`gf2`]: packed vectors, matrices, Gaussian elimination and affine spaces.
//! - [`hadamard`]: the block code, exact erasure list decoding, corruption list
//!   decoding and the fill-and-merge erasure reduction.
//! - [`stream`]: the block stream encoder and its samplers-agnostic decoders.
//! - [`density`]: counting functions, block densities and sample patterns.
//! - [`adversary`]: the three-codeword pigeonhole and the game that defeats
//!   any finite set of black-box decoders.
//!
//! The crate is `no_std` and needs only `alloc`.
#![no_std]

extern crate alloc;

pub mod adversary;
pub mod density;
mod error;
pub mod gf2;
pub mod hadamard;
pub mod stream;

pub use error::{Error, Result};

/// Exact non-negative rational used for densities, distances and thresholds.
pub type Fraction = num_rational::Ratio<u64>;
