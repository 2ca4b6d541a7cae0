//! The savings transform.
//!
//! The input is normalised to `f(λ) = 1`. The output starts with banked
//! capital `s = 1` and active capital `a = 1`, so `f'(λ) = 2`. Along each edge
//! `a` is multiplied by the edge ratio `f(xb)/f(x)` (1 on both children when
//! `f(x) = 0`); if `a` then exceeds 1, the excess is banked: `s += a - 1`,
//! `a := 1`. Consequently `s` never decreases, `a <= 1`, and
//! `f' = s + a <= 2s`, which gives `f'(xv) >= f'(x)/2` for every extension.

use super::decompose::edge_ratio;
use super::{EvalError, Martingale, MartingaleFn, Metered};
use crate::bits::BitString;
use crate::rational::ExactRational;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SavingsState {
    /// Banked capital.
    pub saved: ExactRational,
    /// Active capital, at most 1 after banking.
    pub active: ExactRational,
}

impl SavingsState {
    pub fn value(&self) -> ExactRational {
        &self.saved + &self.active
    }
}

pub struct Savings {
    inner: MartingaleFn,
}

impl Savings {
    /// State after reading `x`.
    pub fn state(&self, x: &BitString) -> Result<SavingsState, EvalError> {
        let mut st = SavingsState {
            saved: ExactRational::one(),
            active: ExactRational::one(),
        };
        let mut parent = self.inner.eval(&BitString::empty())?;
        let mut prefix = BitString::empty();
        for b in x.iter() {
            prefix.push(b);
            let child = self.inner.eval(&prefix)?;
            st.active = &st.active * &edge_ratio(&parent, &child);
            if st.active > ExactRational::one() {
                st.saved = &st.saved + &(&st.active - &ExactRational::one());
                st.active = ExactRational::one();
            }
            parent = child;
        }
        Ok(st)
    }

    pub fn inner(&self) -> &MartingaleFn {
        &self.inner
    }
}

impl Martingale for Savings {
    fn eval_metered(&self, x: &BitString) -> Result<Metered, EvalError> {
        Ok(Metered::free(self.state(x)?.value()))
    }

    fn describe(&self) -> String {
        format!("savings({})", self.inner.describe())
    }
}

/// Wraps `f` in the savings transform. Fails when `f(λ)` is zero (or cannot
/// be evaluated).
pub fn savings_transform(f: &MartingaleFn) -> Result<MartingaleFn, EvalError> {
    Ok(MartingaleFn::new(savings(f)?))
}

pub(crate) fn savings(f: &MartingaleFn) -> Result<Savings, EvalError> {
    let root = f.eval(&BitString::empty())?;
    if !root.is_positive() {
        return Err(EvalError::Undefined {
            input: BitString::empty(),
            what: "savings transform needs f(λ) > 0".into(),
        });
    }
    Ok(Savings { inner: f.clone() })
}
