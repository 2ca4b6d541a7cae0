use std::fmt::Write as _;

use rand::Rng;
use thiserror::Error;

use super::{EvalError, Martingale, Metered};
use crate::bits::{all_up_to, BitString};
use crate::rational::ExactRational;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TableFormatError {
    #[error("line {line}: expected `<bits> <num/den>`")]
    Syntax { line: usize },
    #[error("line {line}: {msg}")]
    Value { line: usize, msg: String },
    #[error("line {line}: duplicate entry for {bits}")]
    Duplicate { line: usize, bits: String },
    #[error("missing entry for {0}")]
    Missing(String),
    #[error("line {line}: negative value {value}")]
    Negative { line: usize, value: String },
    #[error("table is empty")]
    Empty,
}

/// Values on every string of length at most `depth`. Beyond the depth the
/// table stops betting: `f(xv) = f(x)` for `|x| = depth`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    depth: u32,
    /// Heap order: index of `x` is `2^|x| - 1 + value(x)`.
    values: Vec<ExactRational>,
}

fn slot(x: &BitString) -> usize {
    (1usize << x.len()) - 1 + x.value() as usize
}

impl Table {
    pub fn from_fn<F: FnMut(&BitString) -> ExactRational>(depth: u32, mut f: F) -> Self {
        assert!(depth < 24, "table depth {depth} too large");
        let values = all_up_to(depth).map(|x| f(&x)).collect();
        Table { depth, values }
    }

    /// Tabulates another martingale to `depth`.
    pub fn tabulate(m: &dyn Martingale, depth: u32) -> Result<Self, EvalError> {
        let values = all_up_to(depth)
            .map(|x| m.eval(&x))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Table { depth, values })
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn get(&self, x: &BitString) -> &ExactRational {
        let x = if x.len() as u32 > self.depth {
            x.prefix(self.depth as usize)
        } else {
            x.clone()
        };
        &self.values[slot(&x)]
    }

    /// Overwrites one entry. Used to build deliberately broken fixtures.
    pub fn set(&mut self, x: &BitString, value: ExactRational) {
        assert!(x.len() as u32 <= self.depth);
        self.values[slot(x)] = value;
    }

    /// Text form: one line `<bits> <num/den>` per string, shortest first,
    /// with `-` for the empty string.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for x in all_up_to(self.depth) {
            let _ = writeln!(out, "{} {}", x.to_token(), self.get(&x));
        }
        out
    }

    /// Parses the text form. Blank lines and `#` comments are ignored; every
    /// string up to the deepest listed length must appear exactly once with
    /// a non-negative value. Fairness is not checked here.
    pub fn from_text(text: &str) -> Result<Self, TableFormatError> {
        let mut entries: Vec<(usize, BitString, ExactRational)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let mut parts = content.split_whitespace();
            let (Some(b), Some(v), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(TableFormatError::Syntax { line });
            };
            let x = BitString::from_token(b).map_err(|e| TableFormatError::Value {
                line,
                msg: e.to_string(),
            })?;
            let value: ExactRational = v.parse().map_err(|e: crate::rational::RationalError| {
                TableFormatError::Value {
                    line,
                    msg: e.to_string(),
                }
            })?;
            if value.is_negative() {
                return Err(TableFormatError::Negative {
                    line,
                    value: v.to_string(),
                });
            }
            entries.push((line, x, value));
        }
        let depth = entries
            .iter()
            .map(|(_, x, _)| x.len() as u32)
            .max()
            .ok_or(TableFormatError::Empty)?;
        if depth >= 24 {
            return Err(TableFormatError::Value {
                line: entries.iter().find(|e| e.1.len() as u32 == depth).map_or(0, |e| e.0),
                msg: format!("depth {depth} too large"),
            });
        }
        let mut values: Vec<Option<ExactRational>> = vec![None; (1usize << (depth + 1)) - 1];
        for (line, x, v) in entries {
            let s = slot(&x);
            if values[s].is_some() {
                return Err(TableFormatError::Duplicate {
                    line,
                    bits: x.to_token(),
                });
            }
            values[s] = Some(v);
        }
        let values = all_up_to(depth)
            .zip(values)
            .map(|(x, v)| v.ok_or_else(|| TableFormatError::Missing(x.to_token())))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Table { depth, values })
    }
}

impl Martingale for Table {
    fn eval_metered(&self, x: &BitString) -> Result<Metered, EvalError> {
        Ok(Metered::free(self.get(x).clone()))
    }

    fn describe(&self) -> String {
        format!("table(depth {})", self.depth)
    }
}

/// Splits used by [`random_fair_table`]: the left child receives
/// `(1 + u) f(x)` and the right `(1 - u) f(x)`.
const SPLITS: [(i64, i64); 9] = [
    (-1, 1),
    (-3, 4),
    (-1, 2),
    (-1, 4),
    (0, 1),
    (1, 4),
    (1, 2),
    (3, 4),
    (1, 1),
];

/// A random fair table of the given depth. The root value is drawn from
/// {1/2, 1, 2, 3}; each node splits its capital by a factor from a small set
/// that includes the all-in bets `u = ±1`, so zero-capital branches occur.
pub fn random_fair_table<R: Rng + ?Sized>(rng: &mut R, depth: u32) -> Table {
    let roots = [(1, 2), (1, 1), (2, 1), (3, 1)];
    let (rn, rd) = roots[rng.gen_range(0..roots.len())];
    let mut values: Vec<ExactRational> = Vec::with_capacity((1usize << (depth + 1)) - 1);
    values.push(ExactRational::new(rn, rd));
    for len in 0..depth {
        for v in 0..(1u128 << len) {
            let parent = values[(1usize << len) - 1 + v as usize].clone();
            let (un, ud) = SPLITS[rng.gen_range(0..SPLITS.len())];
            let u = ExactRational::new(un, ud);
            let left = &parent * &(ExactRational::one() + u.clone());
            let right = &parent * &(ExactRational::one() - u);
            // children of consecutive parents are laid out consecutively
            debug_assert_eq!(values.len(), (1usize << (len + 1)) - 1 + 2 * v as usize);
            values.push(left);
            values.push(right);
        }
    }
    Table { depth, values }
}
