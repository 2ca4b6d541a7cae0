use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use super::{EvalError, Martingale, MartingaleFn, Metered};
use crate::bits::BitString;
use crate::mdsl::{evaluate, EvalOutcome, OutcomeValue, Program, RuntimeFault};
use crate::source::BitSource;

type MemoEntry = (BitString, Result<EvalOutcome, RuntimeFault>);

/// Outcome cache for one program, shareable between oracles.
///
/// An outcome is stored together with the oracle bits it could have read
/// (positions `1..=oracle_use`); it is reused for any oracle that agrees on
/// those positions. Evaluation is deterministic, so a hit returns exactly
/// what a fresh evaluation would, step count included. Out-of-range outcomes
/// depend on the oracle length and are never stored.
#[derive(Default)]
pub struct OutcomeMemo {
    entries: Mutex<HashMap<BitString, Vec<MemoEntry>>>,
}

impl OutcomeMemo {
    pub fn new() -> Self {
        Self::default()
    }

    fn lookup(&self, x: &BitString, oracle: &BitSource) -> Option<Result<EvalOutcome, RuntimeFault>> {
        let entries = self.entries.lock().expect("memo lock");
        entries
            .get(x)?
            .iter()
            .find(|(read, _)| oracle.agrees_with(read))
            .map(|(_, r)| r.clone())
    }

    fn store(&self, x: &BitString, oracle: &BitSource, r: &Result<EvalOutcome, RuntimeFault>) {
        let use_ = match r {
            Ok(o) if matches!(o.result, OutcomeValue::OracleOutOfRange(_)) => return,
            Ok(o) => o.oracle_use,
            // faults carry no use; they are recomputed
            Err(_) => return,
        };
        let Ok(read) = oracle.prefix(use_) else { return };
        self.entries
            .lock()
            .expect("memo lock")
            .entry(x.clone())
            .or_default()
            .push((read, r.clone()));
    }

    pub fn len(&self) -> usize {
        self.entries.lock().expect("memo lock").values().map(Vec::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// A DSL program with its oracle and step budget fixed.
pub struct ProgramMartingale {
    name: String,
    program: Arc<Program>,
    oracle: BitSource,
    budget: u64,
    memo: Arc<OutcomeMemo>,
}

impl ProgramMartingale {
    pub fn new(name: &str, program: Arc<Program>, oracle: BitSource, budget: u64) -> Self {
        Self::with_memo(name, program, oracle, budget, Arc::new(OutcomeMemo::new()))
    }

    /// Uses a caller-supplied cache, typically shared across oracles.
    pub fn with_memo(
        name: &str,
        program: Arc<Program>,
        oracle: BitSource,
        budget: u64,
        memo: Arc<OutcomeMemo>,
    ) -> Self {
        ProgramMartingale {
            name: name.to_string(),
            program,
            oracle,
            budget,
            memo,
        }
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn oracle(&self) -> &BitSource {
        &self.oracle
    }

    /// The raw interpreter outcome, through the cache.
    pub fn outcome(&self, x: &BitString) -> Result<EvalOutcome, RuntimeFault> {
        if let Some(hit) = self.memo.lookup(x, &self.oracle) {
            return hit;
        }
        let r = evaluate(&self.program, x, &self.oracle, self.budget);
        self.memo.store(x, &self.oracle, &r);
        r
    }
}

impl Martingale for ProgramMartingale {
    fn eval_metered(&self, x: &BitString) -> Result<Metered, EvalError> {
        let out = self.outcome(x).map_err(|fault| EvalError::Fault {
            input: x.clone(),
            fault,
        })?;
        match out.result {
            OutcomeValue::Value(value) => Ok(Metered {
                value,
                steps: out.steps,
                oracle_use: out.oracle_use,
            }),
            OutcomeValue::Diverged => Err(EvalError::Diverged {
                input: x.clone(),
                steps: out.steps,
            }),
            OutcomeValue::OracleOutOfRange(index) => Err(EvalError::OracleOutOfRange {
                input: x.clone(),
                index,
            }),
        }
    }

    fn describe(&self) -> String {
        format!("program[{}]", self.name)
    }
}

/// Binds a program to an oracle and a step budget.
pub fn fix_oracle(p: &Program, oracle: BitSource, budget: u64) -> MartingaleFn {
    MartingaleFn::new(ProgramMartingale::new(
        &p.to_string(),
        Arc::new(p.clone()),
        oracle,
        budget,
    ))
}
