//! A small s-expression language for oracle martingales, with a metered
//! interpreter.
//!
//! Programs denote a value for each input string `x`, may consult an oracle
//! sequence, and are evaluated under a step budget. The interpreter reports
//! the number of steps taken and the largest oracle position read; these are
//! the computation time and oracle use that the construction and the decoder
//! both rely on.
//!
//! Grammar (comments run from `;` to end of line):
//!
//! ```text
//! expr := <rational>                 ; 3, -2, 3/4
//!       | (const <rational>)
//!       | len | acc | i
//!       | (bit expr) | (oracle expr) ; 1-based positions
//!       | (add expr expr) | (sub expr expr) | (mul expr expr) | (div expr expr)
//!       | (= e e) | (!= e e) | (< e e) | (<= e e) | (> e e) | (>= e e)
//!       | (if expr expr expr)
//!       | (fold init body)           ; binds acc and i
//!       | (loop init step stop)      ; binds acc
//!       | (diverge)
//! ```

mod ast;
mod eval;
mod parse;

pub use ast::{ArithOp, CmpOp, Expr, Program};
pub use eval::{evaluate, EvalOutcome, OutcomeValue, RuntimeFault};
pub use parse::{parse, ParseError, SyntaxErrorKind};

use crate::martingale::{fix_oracle, validate_fairness, FairnessReport};
use crate::source::BitSource;

/// Evaluates `p` on every string of length at most `depth` and checks that
/// all evaluations converge to non-negative values satisfying the fairness
/// identity.
pub fn check_program_martingale(
    p: &Program,
    oracle: &BitSource,
    depth: u32,
    budget: u64,
) -> FairnessReport {
    validate_fairness(&fix_oracle(p, oracle.clone(), budget), depth)
}
