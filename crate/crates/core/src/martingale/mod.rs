//! Univariate martingales over exact rationals.
//!
//! A martingale is a map `f` from bitstrings to non-negative rationals with
//! `f(x0) + f(x1) = 2 f(x)` at every node. Concrete representations live in
//! the submodules; all of them implement [`Martingale`] and can be wrapped in
//! the shareable handle [`MartingaleFn`].

use std::fmt;
use std::ops::Deref;
use std::sync::Arc;

use thiserror::Error;

use crate::bits::{all_up_to, BitString};
use crate::mdsl::RuntimeFault;
use crate::rational::ExactRational;

mod decompose;
mod mixture;
mod program;
mod savings;
mod table;

pub use decompose::{decompose_odd_even, edge_ratio};
pub use mixture::{mix, Mixture};
pub use program::{fix_oracle, OutcomeMemo, ProgramMartingale};
pub use savings::{savings_transform, Savings, SavingsState};
pub use table::{random_fair_table, Table, TableFormatError};

/// Failure to obtain a martingale value.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("evaluation diverged on {input:?} after {steps} steps")]
    Diverged { input: BitString, steps: u64 },
    #[error("oracle position {index} out of range while evaluating {input:?}")]
    OracleOutOfRange { input: BitString, index: u64 },
    #[error("runtime fault on {input:?}: {fault}")]
    Fault { input: BitString, fault: RuntimeFault },
    #[error("{what} on {input:?}")]
    Undefined { input: BitString, what: String },
}

impl EvalError {
    pub fn input(&self) -> &BitString {
        match self {
            EvalError::Diverged { input, .. }
            | EvalError::OracleOutOfRange { input, .. }
            | EvalError::Fault { input, .. }
            | EvalError::Undefined { input, .. } => input,
        }
    }
}

/// A value with the cost of producing it. Representations without a cost
/// model report zero steps and zero oracle use.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Metered {
    pub value: ExactRational,
    pub steps: u64,
    pub oracle_use: u64,
}

impl Metered {
    pub fn free(value: ExactRational) -> Self {
        Metered {
            value,
            steps: 0,
            oracle_use: 0,
        }
    }
}

pub trait Martingale: Send + Sync {
    fn eval_metered(&self, x: &BitString) -> Result<Metered, EvalError>;

    fn eval(&self, x: &BitString) -> Result<ExactRational, EvalError> {
        self.eval_metered(x).map(|m| m.value)
    }

    /// One-line description of the representation.
    fn describe(&self) -> String;
}

/// Cheaply clonable handle to any martingale representation.
#[derive(Clone)]
pub struct MartingaleFn(Arc<dyn Martingale>);

impl MartingaleFn {
    pub fn new<M: Martingale + 'static>(m: M) -> Self {
        MartingaleFn(Arc::new(m))
    }

    /// The constant martingale.
    pub fn constant(value: ExactRational) -> Self {
        MartingaleFn::new(Mixture::constant(value))
    }

    /// A martingale given by a closure. The closure must itself satisfy the
    /// fairness identity; use [`validate_fairness`] to check.
    pub fn from_fn<F>(name: &str, f: F) -> Self
    where
        F: Fn(&BitString) -> ExactRational + Send + Sync + 'static,
    {
        MartingaleFn::new(FnMartingale {
            name: name.to_string(),
            f: Box::new(f),
        })
    }
}

impl Deref for MartingaleFn {
    type Target = dyn Martingale;
    fn deref(&self) -> &Self::Target {
        &*self.0
    }
}

impl Martingale for MartingaleFn {
    fn eval_metered(&self, x: &BitString) -> Result<Metered, EvalError> {
        self.0.eval_metered(x)
    }
    fn describe(&self) -> String {
        self.0.describe()
    }
}

impl fmt::Debug for MartingaleFn {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0.describe())
    }
}

struct FnMartingale {
    name: String,
    #[allow(clippy::type_complexity)]
    f: Box<dyn Fn(&BitString) -> ExactRational + Send + Sync>,
}

impl Martingale for FnMartingale {
    fn eval_metered(&self, x: &BitString) -> Result<Metered, EvalError> {
        Ok(Metered::free((self.f)(x)))
    }
    fn describe(&self) -> String {
        format!("fn({})", self.name)
    }
}

/// The strategy that stakes everything on 0 at every position:
/// `2^|x|` on all-zero strings, 0 elsewhere.
pub fn doubling_on_zero() -> MartingaleFn {
    MartingaleFn::from_fn("doubling-on-zero", |x| {
        if x.iter().all(|b| b == 0) {
            ExactRational::pow2(x.len() as i64)
        } else {
            ExactRational::zero()
        }
    })
}

/// First node at which a martingale check failed.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    /// `f(x0) + f(x1) != 2 f(x)`.
    Unfair {
        node: BitString,
        value: ExactRational,
        left: ExactRational,
        right: ExactRational,
    },
    Negative { node: BitString, value: ExactRational },
    Evaluation(EvalError),
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Unfair {
                node,
                value,
                left,
                right,
            } => write!(
                f,
                "fairness fails at {}: {} + {} != 2 * {}",
                node.to_token(),
                left,
                right,
                value
            ),
            Violation::Negative { node, value } => {
                write!(f, "negative value {} at {}", value, node.to_token())
            }
            Violation::Evaluation(e) => write!(f, "{e}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FairnessReport {
    pub depth: u32,
    pub nodes_checked: usize,
    pub violation: Option<Violation>,
}

impl FairnessReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

impl fmt::Display for FairnessReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.violation {
            None => write!(f, "pass ({} nodes, depth {})", self.nodes_checked, self.depth),
            Some(v) => write!(f, "FAIL: {v}"),
        }
    }
}

/// Checks fairness at every node of length `< depth` and non-negativity at
/// every node of length `<= depth`, in shortlex order. Stops at the first
/// violation.
pub fn validate_fairness(m: &dyn Martingale, depth: u32) -> FairnessReport {
    let mut nodes_checked = 0;
    let fail = |v, n| FairnessReport {
        depth,
        nodes_checked: n,
        violation: Some(v),
    };
    for x in all_up_to(depth) {
        let value = match m.eval(&x) {
            Ok(v) => v,
            Err(e) => return fail(Violation::Evaluation(e), nodes_checked),
        };
        if value.is_negative() {
            return fail(Violation::Negative { node: x, value }, nodes_checked);
        }
        if (x.len() as u32) < depth {
            let (left, right) = match (m.eval(&x.child(0)), m.eval(&x.child(1))) {
                (Ok(l), Ok(r)) => (l, r),
                (Err(e), _) | (_, Err(e)) => return fail(Violation::Evaluation(e), nodes_checked),
            };
            if &left + &right != value.double() {
                return fail(
                    Violation::Unfair {
                        node: x,
                        value,
                        left,
                        right,
                    },
                    nodes_checked,
                );
            }
        }
        nodes_checked += 1;
    }
    FairnessReport {
        depth,
        nodes_checked,
        violation: None,
    }
}
