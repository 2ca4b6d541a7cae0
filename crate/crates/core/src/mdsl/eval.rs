//! Metered big-step interpreter.
//!
//! Cost model: every evaluation of an AST node costs one step, including
//! literals, variables and each re-evaluation of a `fold`/`loop` body. The
//! budget caps the total; exceeding it, or reaching `(diverge)`, yields a
//! diverged outcome whose step count is the full budget.

use std::cmp::Ordering;

use thiserror::Error;

use super::ast::{ArithOp, Expr, Program};
use crate::bits::BitString;
use crate::rational::ExactRational;
use crate::source::BitSource;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum OutcomeValue {
    Value(ExactRational),
    /// Budget exhausted or `(diverge)` reached.
    Diverged,
    /// The oracle had no bit at this 1-based position.
    OracleOutOfRange(u64),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct EvalOutcome {
    pub result: OutcomeValue,
    pub steps: u64,
    /// Largest oracle position that was answered; 0 if none.
    pub oracle_use: u64,
}

impl EvalOutcome {
    pub fn value(&self) -> Option<&ExactRational> {
        match &self.result {
            OutcomeValue::Value(v) => Some(v),
            _ => None,
        }
    }
}

/// Runtime faults. These are errors rather than outcomes: a martingale value
/// has to be a non-negative rational.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Error)]
pub enum RuntimeFault {
    #[error("division by zero")]
    DivisionByZero,
    #[error("negative result {0}")]
    NegativeResult(ExactRational),
    #[error("input position {index} out of range for input of length {len}")]
    InputIndex { index: ExactRational, len: usize },
    #[error("oracle position {0} is not a positive integer")]
    OracleIndex(ExactRational),
}

enum Halt {
    Diverged,
    OracleOutOfRange(u64),
    Fault(RuntimeFault),
}

struct Frame {
    acc: ExactRational,
    pos: Option<ExactRational>,
}

struct Machine<'a> {
    input: &'a BitString,
    oracle: &'a BitSource,
    budget: u64,
    steps: u64,
    oracle_use: u64,
    frames: Vec<Frame>,
}

fn truth(b: bool) -> ExactRational {
    if b {
        ExactRational::one()
    } else {
        ExactRational::zero()
    }
}

impl Machine<'_> {
    fn tick(&mut self) -> Result<(), Halt> {
        if self.steps >= self.budget {
            return Err(Halt::Diverged);
        }
        self.steps += 1;
        Ok(())
    }

    fn eval(&mut self, e: &Expr) -> Result<ExactRational, Halt> {
        self.tick()?;
        match e {
            Expr::Lit(v) => Ok(v.clone()),
            Expr::Len => Ok(ExactRational::from_integer(self.input.len() as i64)),
            // The parser rejects unbound variables, so a frame exists.
            Expr::Acc => Ok(self.frames.last().expect("bound acc").acc.clone()),
            Expr::Pos => Ok(self
                .frames
                .iter()
                .rev()
                .find_map(|f| f.pos.clone())
                .expect("bound i")),
            Expr::Bit(k) => {
                let k = self.eval(k)?;
                let len = self.input.len();
                let bad = || Halt::Fault(RuntimeFault::InputIndex { index: k.clone(), len });
                let idx = k.to_i64().filter(|&i| i >= 1 && i as usize <= len).ok_or_else(bad)?;
                Ok(ExactRational::from_integer(i64::from(self.input.as_slice()[idx as usize - 1])))
            }
            Expr::Oracle(k) => {
                let k = self.eval(k)?;
                let idx = k
                    .to_i64()
                    .filter(|&i| i >= 1)
                    .ok_or_else(|| Halt::Fault(RuntimeFault::OracleIndex(k.clone())))?
                    as u64;
                match self.oracle.bit(idx) {
                    Ok(b) => {
                        self.oracle_use = self.oracle_use.max(idx);
                        Ok(ExactRational::from_integer(i64::from(b)))
                    }
                    Err(_) => Err(Halt::OracleOutOfRange(idx)),
                }
            }
            Expr::Arith(op, a, b) => {
                let a = self.eval(a)?;
                let b = self.eval(b)?;
                match op {
                    ArithOp::Add => Ok(a + b),
                    ArithOp::Sub => Ok(a - b),
                    ArithOp::Mul => Ok(a * b),
                    ArithOp::Div => a
                        .checked_div(&b)
                        .ok_or(Halt::Fault(RuntimeFault::DivisionByZero)),
                }
            }
            Expr::Cmp(op, a, b) => {
                let a = self.eval(a)?;
                let b = self.eval(b)?;
                Ok(truth(op.holds(a.cmp(&b))))
            }
            Expr::If(c, a, b) => {
                if self.eval(c)?.is_zero() {
                    self.eval(b)
                } else {
                    self.eval(a)
                }
            }
            Expr::Fold { init, body } => {
                let acc = self.eval(init)?;
                self.frames.push(Frame { acc, pos: None });
                let result = (|| {
                    for k in 1..=self.input.len() {
                        let frame = self.frames.last_mut().expect("fold frame");
                        frame.pos = Some(ExactRational::from_integer(k as i64));
                        let next = self.eval(body)?;
                        self.frames.last_mut().expect("fold frame").acc = next;
                    }
                    Ok(())
                })();
                let frame = self.frames.pop().expect("fold frame");
                result.map(|()| frame.acc)
            }
            Expr::Loop { init, step, stop } => {
                let acc = self.eval(init)?;
                self.frames.push(Frame { acc, pos: None });
                let result = (|| loop {
                    if !self.eval(stop)?.is_zero() {
                        return Ok(());
                    }
                    let next = self.eval(step)?;
                    self.frames.last_mut().expect("loop frame").acc = next;
                })();
                let frame = self.frames.pop().expect("loop frame");
                result.map(|()| frame.acc)
            }
            Expr::Diverge => Err(Halt::Diverged),
        }
    }
}

/// Evaluates `p` on input `x` against `oracle`, spending at most `budget`
/// steps.
pub fn evaluate(
    p: &Program,
    x: &BitString,
    oracle: &BitSource,
    budget: u64,
) -> Result<EvalOutcome, RuntimeFault> {
    let mut m = Machine {
        input: x,
        oracle,
        budget,
        steps: 0,
        oracle_use: 0,
        frames: Vec::new(),
    };
    let result = match m.eval(&p.body) {
        Ok(v) if v.cmp(&ExactRational::zero()) == Ordering::Less => {
            return Err(RuntimeFault::NegativeResult(v))
        }
        Ok(v) => OutcomeValue::Value(v),
        Err(Halt::Diverged) => {
            m.steps = budget;
            OutcomeValue::Diverged
        }
        Err(Halt::OracleOutOfRange(k)) => OutcomeValue::OracleOutOfRange(k),
        Err(Halt::Fault(f)) => return Err(f),
    };
    Ok(EvalOutcome {
        result,
        steps: m.steps,
        oracle_use: m.oracle_use,
    })
}
