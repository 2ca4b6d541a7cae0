//! Finite bitstrings with 1-based positions, lexicographic enumeration and
//! the odd/even interleaving used to pair two sequences into one.

use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Token used for the empty string in line-oriented text formats, where an
/// empty field would be ambiguous.
pub const EMPTY_TOKEN: &str = "-";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BitsError {
    #[error("invalid character {found:?} at offset {offset}; expected '0' or '1'")]
    InvalidChar { found: char, offset: usize },
    #[error("position {position} out of range for a string of length {len} (positions are 1-based)")]
    Position { position: usize, len: usize },
    #[error("index {n} out of range: there are 2^{length} strings of length {length}")]
    LexIndex { length: u32, n: u128 },
    #[error("cannot interleave strings of lengths {x} and {y}; need |x| = |y| or |x| = |y| + 1")]
    Interleave { x: usize, y: usize },
}

/// A finite string over {0,1}.
///
/// Bits are stored as `0u8`/`1u8`. The derived ordering is lexicographic,
/// which on strings of equal length coincides with the numeric order of the
/// binary value.
#[derive(Clone, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BitString(Vec<u8>);

impl BitString {
    pub fn empty() -> Self {
        BitString(Vec::new())
    }

    pub fn from_bits<I: IntoIterator<Item = u8>>(bits: I) -> Self {
        BitString(bits.into_iter().map(|b| u8::from(b != 0)).collect())
    }

    /// The string of `len` copies of `bit`.
    pub fn repeat(bit: u8, len: usize) -> Self {
        BitString(vec![u8::from(bit != 0); len])
    }

    /// The `length`-bit big-endian binary representation of `value`.
    pub fn from_value(value: u128, length: u32) -> Self {
        debug_assert!(length <= 128);
        BitString(
            (0..length)
                .rev()
                .map(|k| ((value >> k) & 1) as u8)
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[u8] {
        &self.0
    }

    /// Bit at 1-based `position`.
    pub fn bit(&self, position: usize) -> Result<u8, BitsError> {
        if position == 0 || position > self.0.len() {
            return Err(BitsError::Position {
                position,
                len: self.0.len(),
            });
        }
        Ok(self.0[position - 1])
    }

    pub fn last(&self) -> Option<u8> {
        self.0.last().copied()
    }

    pub fn iter(&self) -> impl DoubleEndedIterator<Item = u8> + ExactSizeIterator + '_ {
        self.0.iter().copied()
    }

    pub fn push(&mut self, bit: u8) {
        self.0.push(u8::from(bit != 0));
    }

    /// `self` followed by `bit`.
    pub fn child(&self, bit: u8) -> Self {
        let mut out = self.clone();
        out.push(bit);
        out
    }

    pub fn concat(&self, other: &BitString) -> Self {
        let mut v = Vec::with_capacity(self.len() + other.len());
        v.extend_from_slice(&self.0);
        v.extend_from_slice(&other.0);
        BitString(v)
    }

    /// The first `len` bits (clamped to the string length).
    pub fn prefix(&self, len: usize) -> Self {
        BitString(self.0[..len.min(self.0.len())].to_vec())
    }

    /// Bits at 1-based positions `from..=to` (an empty string if `from > to`).
    pub fn slice(&self, from: usize, to: usize) -> Self {
        if from > to || from == 0 {
            return BitString::empty();
        }
        let to = to.min(self.0.len());
        BitString(self.0[from - 1..to].to_vec())
    }

    /// Drops the last bit; `None` on the empty string.
    pub fn parent(&self) -> Option<Self> {
        if self.0.is_empty() {
            None
        } else {
            Some(BitString(self.0[..self.0.len() - 1].to_vec()))
        }
    }

    pub fn is_prefix_of(&self, other: &BitString) -> bool {
        other.0.starts_with(&self.0)
    }

    /// All prefixes, from the empty string up to and including `self`.
    pub fn prefixes(&self) -> impl Iterator<Item = BitString> + '_ {
        (0..=self.0.len()).map(move |k| self.prefix(k))
    }

    /// Numeric value of the string read as big-endian binary.
    pub fn value(&self) -> u128 {
        self.0.iter().fold(0u128, |acc, &b| (acc << 1) | u128::from(b))
    }

    /// Text form used by line-oriented formats: the bits, or [`EMPTY_TOKEN`].
    pub fn to_token(&self) -> String {
        if self.is_empty() {
            EMPTY_TOKEN.to_string()
        } else {
            self.to_string()
        }
    }

    pub fn from_token(token: &str) -> Result<Self, BitsError> {
        if token == EMPTY_TOKEN {
            Ok(BitString::empty())
        } else {
            token.parse()
        }
    }
}

impl fmt::Display for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b == 0 { "0" } else { "1" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_empty() {
            f.write_str("\"\"")
        } else {
            write!(f, "\"{self}\"")
        }
    }
}

impl FromStr for BitString {
    type Err = BitsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .enumerate()
            .map(|(offset, c)| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                found => Err(BitsError::InvalidChar { found, offset }),
            })
            .collect::<Result<Vec<u8>, _>>()
            .map(BitString)
    }
}

impl From<Vec<u8>> for BitString {
    fn from(v: Vec<u8>) -> Self {
        BitString::from_bits(v)
    }
}

/// Parses a bitstring literal, panicking on malformed input. Intended for
/// tests and examples.
pub fn bits(s: &str) -> BitString {
    s.parse().expect("bitstring literal")
}

/// The `n`-th (1-based) string of the given length in lexicographic order.
pub fn lex_nth(length: u32, n: u128) -> Result<BitString, BitsError> {
    let count = 1u128.checked_shl(length).unwrap_or(0);
    if length >= 128 || n == 0 || n > count {
        return Err(BitsError::LexIndex { length, n });
    }
    Ok(BitString::from_value(n - 1, length))
}

/// All strings of the given length in lexicographic order.
pub fn all_of_length(length: u32) -> impl Iterator<Item = BitString> {
    assert!(length < 64, "refusing to enumerate 2^{length} strings");
    (0..1u128 << length).map(move |v| BitString::from_value(v, length))
}

/// All strings of length at most `depth`, shortest first and lexicographic
/// within each length.
pub fn all_up_to(depth: u32) -> impl Iterator<Item = BitString> {
    (0..=depth).flat_map(all_of_length)
}

/// `x_1 y_1 x_2 y_2 …`: `x` fills the odd positions, `y` the even ones.
pub fn interleave(x: &BitString, y: &BitString) -> Result<BitString, BitsError> {
    if !(x.len() == y.len() || x.len() == y.len() + 1) {
        return Err(BitsError::Interleave {
            x: x.len(),
            y: y.len(),
        });
    }
    let mut out = Vec::with_capacity(x.len() + y.len());
    for (k, &xb) in x.0.iter().enumerate() {
        out.push(xb);
        if let Some(&yb) = y.0.get(k) {
            out.push(yb);
        }
    }
    Ok(BitString(out))
}

/// Inverse of [`interleave`]: (bits at odd positions, bits at even positions).
pub fn split(z: &BitString) -> (BitString, BitString) {
    let odd = z.0.iter().step_by(2).copied().collect();
    let even = z.0.iter().skip(1).step_by(2).copied().collect();
    (BitString(odd), BitString(even))
}
