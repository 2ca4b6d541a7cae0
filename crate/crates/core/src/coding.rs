//! Safe extensions: segments along which a martingale gains little.
//!
//! For a fair `d`, a string `x` with `d(x) > 0` and `i >= 0`, a segment `y` of
//! length `i + 2` is safe when `d(xy)/d(x) < 1 + 2^-i`. By Markov's
//! inequality at least two such segments always exist; the first two in
//! lexicographic order carry one bit of information each (first ↦ 0,
//! second ↦ 1).

use std::fmt;

use thiserror::Error;

use crate::bits::{all_of_length, BitString};
use crate::martingale::{EvalError, Martingale};
use crate::rational::ExactRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodingError {
    #[error("d({x:?}) = 0; safe extensions need positive capital")]
    ZeroCapital { x: BitString },
    #[error(transparent)]
    Eval(#[from] EvalError),
    #[error(
        "only {found} safe extension(s) of {x:?} at i = {i} ({checked} candidates); \
         the martingale is not fair"
    )]
    TooFew {
        x: BitString,
        i: u32,
        found: usize,
        checked: usize,
    },
}

/// Segment length used at parameter `i`.
pub fn segment_len(i: u32) -> u32 {
    i + 2
}

/// `d(xy)·2^i < (2^i + 1)·d(x)`, i.e. `d(xy)/d(x) < 1 + 2^-i` (strict).
pub fn is_safe(dx: &ExactRational, dxy: &ExactRational, i: u32) -> bool {
    let scale = ExactRational::pow2(i64::from(i));
    let lhs = dxy * &scale;
    let rhs = &(&scale + &ExactRational::one()) * dx;
    lhs < rhs
}

/// All safe segments of length `i + 2` after `x`, in lexicographic order.
pub fn safe_extensions(d: &dyn Martingale, x: &BitString, i: u32) -> Result<Vec<BitString>, CodingError> {
    let dx = d.eval(x)?;
    if !dx.is_positive() {
        return Err(CodingError::ZeroCapital { x: x.clone() });
    }
    let mut out = Vec::new();
    for y in all_of_length(segment_len(i)) {
        if is_safe(&dx, &d.eval(&x.concat(&y))?, i) {
            out.push(y);
        }
    }
    Ok(out)
}

/// The lexicographically first and second safe segments. Stops scanning
/// once both are found.
pub fn first_two(d: &dyn Martingale, x: &BitString, i: u32) -> Result<SafePair, CodingError> {
    let dx = d.eval(x)?;
    if !dx.is_positive() {
        return Err(CodingError::ZeroCapital { x: x.clone() });
    }
    let mut found = Vec::with_capacity(2);
    let mut checked = 0;
    for y in all_of_length(segment_len(i)) {
        checked += 1;
        if is_safe(&dx, &d.eval(&x.concat(&y))?, i) {
            found.push(y);
            if found.len() == 2 {
                let second = found.pop().expect("two found");
                let first = found.pop().expect("two found");
                return Ok(SafePair { first, second });
            }
        }
    }
    Err(CodingError::TooFew {
        x: x.clone(),
        i,
        found: found.len(),
        checked,
    })
}

/// The two codewords of one stage: `first` encodes 0, `second` encodes 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SafePair {
    pub first: BitString,
    pub second: BitString,
}

impl SafePair {
    pub fn encode(&self, bit: bool) -> &BitString {
        if bit {
            &self.second
        } else {
            &self.first
        }
    }

    /// `Some(false)` for `first`, `Some(true)` for `second`, `None` otherwise.
    pub fn decode(&self, segment: &BitString) -> Option<bool> {
        if segment == &self.first {
            Some(false)
        } else if segment == &self.second {
            Some(true)
        } else {
            None
        }
    }
}

impl fmt::Display for SafePair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.first, self.second)
    }
}
