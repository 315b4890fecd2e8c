//! Finite-scale density accounting for sets of stream positions.
//!
//! Only finite evidence is computed: counting functions, window densities and
//! per-block densities. All fractions are exact.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use rand_chacha::rand_core::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gf2::BitVector;
use crate::stream::block_range;
use crate::Fraction;

/// A finite set of positions below `horizon`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PositionSet {
    positions: Vec<u64>,
    horizon: u64,
}

impl PositionSet {
    pub fn new(mut positions: Vec<u64>, horizon: u64) -> Result<Self> {
        positions.sort_unstable();
        positions.dedup();
        if let Some(&last) = positions.last() {
            if last >= horizon {
                return Err(Error::PositionOutOfRange { position: last, bound: horizon });
            }
        }
        Ok(Self { positions, horizon })
    }

    pub fn empty(horizon: u64) -> Self {
        Self { positions: Vec::new(), horizon }
    }

    pub fn all(horizon: u64) -> Self {
        Self { positions: (0..horizon).collect(), horizon }
    }

    /// The set whose characteristic string is `bits`; horizon is its length.
    pub fn from_characteristic(bits: &BitVector) -> Self {
        Self { positions: bits.ones_indices().map(|p| p as u64).collect(), horizon: bits.len() as u64 }
    }

    pub fn to_characteristic(&self) -> BitVector {
        let mut bits = BitVector::zeros(self.horizon as usize);
        for &p in &self.positions {
            bits.set(p as usize, true);
        }
        bits
    }

    pub fn positions(&self) -> &[u64] {
        &self.positions
    }

    pub fn horizon(&self) -> u64 {
        self.horizon
    }

    pub fn len(&self) -> usize {
        self.positions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.positions.is_empty()
    }

    pub fn contains(&self, position: u64) -> bool {
        self.positions.binary_search(&position).is_ok()
    }

    /// Positions of `self` not in `other`, keeping `self`'s horizon.
    pub fn difference(&self, other: &PositionSet) -> PositionSet {
        let positions = self.positions.iter().copied().filter(|&p| !other.contains(p)).collect();
        Self { positions, horizon: self.horizon }
    }

    fn count_below(&self, end: u64) -> usize {
        self.positions.partition_point(|&p| p < end)
    }
}

/// `|D ∩ [0, m)|`.
pub fn kappa(d: &PositionSet, m: u64) -> Result<usize> {
    if m > d.horizon {
        return Err(Error::BeyondHorizon { end: m, horizon: d.horizon });
    }
    Ok(d.count_below(m))
}

/// `kappa(d, m) / m`.
pub fn rho_window(d: &PositionSet, m: u64) -> Result<Fraction> {
    if m == 0 {
        return Err(Error::InvalidParameter("window length must be positive"));
    }
    Ok(Fraction::new(kappa(d, m)? as u64, m))
}

/// `|D ∩ I_n| / 2^n`.
pub fn block_density(d: &PositionSet, n: usize) -> Result<Fraction> {
    let range = block_range(n);
    if range.end > d.horizon {
        return Err(Error::BeyondHorizon { end: range.end, horizon: d.horizon });
    }
    let count = d.count_below(range.end) - d.count_below(range.start);
    Ok(Fraction::new(count as u64, 1 << n))
}

/// Blocks `n <= max_block` whose density is at least `delta / 2`, ascending.
pub fn good_blocks(d: &PositionSet, delta: Fraction, max_block: usize) -> Result<Vec<usize>> {
    if *delta.numer() == 0 || delta > Fraction::new(1, 1) {
        return Err(Error::InvalidDelta);
    }
    let half = delta / 2;
    let mut out = Vec::new();
    for n in 0..=max_block {
        if block_density(d, n)? >= half {
            out.push(n);
        }
    }
    Ok(out)
}

/// Block and window densities of a position set.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DensityProfile {
    pub per_block: Vec<(usize, Fraction)>,
    pub window: Vec<(u64, Fraction)>,
}

/// Densities of every block fully inside the horizon, and of each window
/// `[0, m)` for `m` in `windows`.
pub fn profile(d: &PositionSet, windows: &[u64]) -> Result<DensityProfile> {
    let per_block = (0..)
        .take_while(|&n| n < 63 && block_range(n).end <= d.horizon)
        .map(|n| Ok((n, block_density(d, n)?)))
        .collect::<Result<_>>()?;
    let window = windows.iter().map(|&m| Ok((m, rho_window(d, m)?))).collect::<Result<_>>()?;
    Ok(DensityProfile { per_block, window })
}

/// A deterministic pattern of sampled positions.
///
/// `Bernoulli` uses ChaCha8 (`rand_chacha::ChaCha8Rng`, 8 rounds) keyed by
/// `seed.to_le_bytes()` followed by 24 zero bytes, with the stream at its
/// initial position. One `next_u64` is drawn per position, in increasing
/// order, and position `p` is kept iff `draw / 2^64 < q`, compared exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Sampler {
    /// `{0, p, 2p, …}`.
    Periodic(u64),
    Bernoulli { q: Fraction, seed: u64 },
    /// The first `ceil(fraction · 2^n)` positions of each listed block.
    BlockBurst { blocks: Vec<usize>, fraction: Fraction },
}

impl Sampler {
    /// Replaces the seed of a Bernoulli sampler; other kinds are unchanged.
    pub fn reseed(&mut self, new_seed: u64) {
        if let Sampler::Bernoulli { seed, .. } = self {
            *seed = new_seed;
        }
    }
}

fn bernoulli_rng(seed: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    ChaCha8Rng::from_seed(key)
}

fn check_unit(f: Fraction) -> Result<()> {
    if *f.denom() == 0 || f > Fraction::new(1, 1) {
        Err(Error::InvalidParameter("fraction must lie in [0, 1]"))
    } else {
        Ok(())
    }
}

/// Realizes `kind` as a position set below `horizon`.
pub fn make_sampler(kind: &Sampler, horizon: u64) -> Result<PositionSet> {
    let positions = match kind {
        Sampler::Periodic(0) => return Err(Error::InvalidParameter("period must be positive")),
        Sampler::Periodic(p) => (0..horizon).step_by(*p as usize).collect(),
        Sampler::Bernoulli { q, seed } => {
            check_unit(*q)?;
            let (num, den) = (u128::from(*q.numer()), u128::from(*q.denom()));
            let mut rng = bernoulli_rng(*seed);
            (0..horizon).filter(|_| u128::from(rng.next_u64()) * den < num << 64).collect()
        }
        Sampler::BlockBurst { blocks, fraction } => {
            check_unit(*fraction)?;
            let mut out = Vec::new();
            for &n in blocks {
                if n >= 63 {
                    return Err(Error::InvalidParameter("block index too large"));
                }
                let range = block_range(n);
                if range.end > horizon {
                    return Err(Error::BeyondHorizon { end: range.end, horizon });
                }
                let take = (u128::from(*fraction.numer()) << n).div_ceil(u128::from(*fraction.denom())) as u64;
                out.extend(range.start..range.start + take);
            }
            out
        }
    };
    PositionSet::new(positions, horizon)
}

fn parse_fraction(s: &str) -> Result<Fraction> {
    s.trim().parse().map_err(|_| Error::InvalidParameter("expected a fraction like 1/2"))
}

/// Parses `periodic:P`, `full`, `bernoulli:Q[:SEED]` and
/// `burst:N1,N2,…:FRACTION` (also spelled `block_burst`).
impl FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split(':').collect();
        let bad = Error::InvalidParameter("unrecognized sampler spec");
        match parts.as_slice() {
            ["full"] => Ok(Sampler::Periodic(1)),
            ["periodic", p] => p.parse().map(Sampler::Periodic).map_err(|_| bad),
            ["bernoulli", q] => Ok(Sampler::Bernoulli { q: parse_fraction(q)?, seed: 0 }),
            ["bernoulli", q, seed] => Ok(Sampler::Bernoulli {
                q: parse_fraction(q)?,
                seed: seed.parse().map_err(|_| bad)?,
            }),
            ["burst" | "block_burst", blocks, fraction] => {
                let blocks = blocks
                    .split(',')
                    .map(|b| b.trim().parse::<usize>())
                    .collect::<core::result::Result<_, _>>()
                    .map_err(|_| bad)?;
                Ok(Sampler::BlockBurst { blocks, fraction: parse_fraction(fraction)? })
            }
            _ => Err(bad),
        }
    }
}

impl fmt::Display for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Sampler::Periodic(p) => write!(f, "periodic:{p}"),
            Sampler::Bernoulli { q, seed } => write!(f, "bernoulli:{q}:{seed}"),
            Sampler::BlockBurst { blocks, fraction } => {
                let list: Vec<String> = blocks.iter().map(|b| alloc::format!("{b}")).collect();
                write!(f, "burst:{}:{fraction}", list.join(","))
            }
        }
    }
}
