//! Lazily queried bit sequences standing in for an infinite sequence.
//!
//! A [`BitSource`] is either an explicit bitstring or a seeded stream. Seeded
//! streams are random access: bit `k` is the top bit of the SplitMix64
//! finaliser applied to `seed + k * 0x9E3779B97F4A7C15` (wrapping), so the
//! same seed yields the same sequence on every platform and positions can be
//! queried in any order.

use std::fmt;

use thiserror::Error;

use crate::bits::BitString;

/// Increment of the SplitMix64 sequence (the 64-bit golden ratio).
const SPLITMIX_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum SourceError {
    #[error("position {position} out of range (source has {available} bits; positions are 1-based)")]
    OutOfRange { position: u64, available: u64 },
}

/// SplitMix64 output for state `x`.
pub fn splitmix64(x: u64) -> u64 {
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum SourceKind {
    Explicit(BitString),
    Seeded(u64),
}

/// A deterministic, 1-based, random-access bit sequence with an optional
/// length limit.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct BitSource {
    kind: SourceKind,
    limit: Option<u64>,
}

impl BitSource {
    pub fn explicit(bits: BitString) -> Self {
        BitSource {
            kind: SourceKind::Explicit(bits),
            limit: None,
        }
    }

    pub fn seeded(seed: u64) -> Self {
        BitSource {
            kind: SourceKind::Seeded(seed),
            limit: None,
        }
    }

    /// Restricts the source to its first `len` bits.
    pub fn with_limit(mut self, len: u64) -> Self {
        self.limit = Some(self.limit.map_or(len, |l| l.min(len)));
        self
    }

    /// Alias of [`BitSource::with_limit`] that borrows.
    pub fn truncated(&self, len: u64) -> Self {
        self.clone().with_limit(len)
    }

    pub fn kind(&self) -> &SourceKind {
        &self.kind
    }

    pub fn limit(&self) -> Option<u64> {
        self.limit
    }

    /// Number of queryable positions, or `None` for an unbounded seeded stream.
    pub fn available(&self) -> Option<u64> {
        let natural = match &self.kind {
            SourceKind::Explicit(b) => Some(b.len() as u64),
            SourceKind::Seeded(_) => None,
        };
        match (natural, self.limit) {
            (Some(n), Some(l)) => Some(n.min(l)),
            (n, l) => n.or(l),
        }
    }

    pub fn bit(&self, position: u64) -> Result<u8, SourceError> {
        let out_of_range = || SourceError::OutOfRange {
            position,
            available: self.available().unwrap_or(u64::MAX),
        };
        if position == 0 {
            return Err(out_of_range());
        }
        if let Some(n) = self.available() {
            if position > n {
                return Err(out_of_range());
            }
        }
        Ok(match &self.kind {
            SourceKind::Explicit(b) => b.as_slice()[(position - 1) as usize],
            SourceKind::Seeded(seed) => {
                (splitmix64(seed.wrapping_add(position.wrapping_mul(SPLITMIX_GAMMA))) >> 63) as u8
            }
        })
    }

    /// The first `len` bits as a string.
    pub fn prefix(&self, len: u64) -> Result<BitString, SourceError> {
        (1..=len).map(|k| self.bit(k)).collect::<Result<Vec<u8>, _>>().map(BitString::from)
    }

    /// True when positions `1..=prefix.len()` of this source equal `prefix`.
    pub fn agrees_with(&self, prefix: &BitString) -> bool {
        prefix
            .iter()
            .enumerate()
            .all(|(k, b)| self.bit(k as u64 + 1) == Ok(b))
    }
}

impl fmt::Debug for BitSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            SourceKind::Explicit(b) => write!(f, "explicit({b:?})")?,
            SourceKind::Seeded(s) => write!(f, "seeded({s})")?,
        }
        if let Some(l) = self.limit {
            write!(f, "[..{l}]")?;
        }
        Ok(())
    }
}
