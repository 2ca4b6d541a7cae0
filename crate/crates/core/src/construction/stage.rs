//! One stage of the diagonalization, shared verbatim by the construction and
//! the decoder so that both sides compute identical mixtures, codeword pairs
//! and cut points `t`.
//!
//! Stage `s` (starting at 0) works on the prefix `β` built so far:
//!
//! 1. for `s >= 1`, if candidate `d_s` is treated as total and `d_s(β) > 0`,
//!    the mixture gains `(2^-s / d_s(β))·d_s`;
//! 2. the mixture is evaluated on the stage's evaluation set `E_s`, and the
//!    cut point is `t = max(t_raw, t_prev + 1)` where `t_raw` is the largest
//!    `max(steps, oracle_use + 1)` over those evaluations (and over the
//!    evaluation of `d_s(β)` in step 1);
//! 3. the first two safe segments of length `s + 2` after `β` are computed,
//!    and for each of them the first two safe segments after `β·segment`.
//!
//! Every oracle position read during a stage is strictly below its `t`.

use std::sync::Arc;

use thiserror::Error;

use crate::bits::{all_of_length, all_up_to, BitString};
use crate::coding::{first_two, CodingError, SafePair};
use crate::martingale::{EvalError, Martingale, MartingaleFn, Metered, Mixture, OutcomeMemo, ProgramMartingale};
use crate::mdsl::Program;
use crate::rational::ExactRational;
use crate::source::BitSource;

/// Which strings the mixture is evaluated on when computing `t`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum EvalSetMode {
    /// All strings of length at most `L_s`. Exponential in `L_s`.
    Full,
    /// The prefixes of the stage-start `β` and all its extensions of length
    /// at most `L_s`.
    #[default]
    Prefix,
}

impl EvalSetMode {
    pub fn name(self) -> &'static str {
        match self {
            EvalSetMode::Full => "full",
            EvalSetMode::Prefix => "prefix",
        }
    }
}

impl std::str::FromStr for EvalSetMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "full" => Ok(EvalSetMode::Full),
            "prefix" => Ok(EvalSetMode::Prefix),
            other => Err(format!("unknown evaluation set mode {other:?} (expected full or prefix)")),
        }
    }
}

/// `ε_s = 2^-s`.
pub fn epsilon(s: u32) -> ExactRational {
    ExactRational::pow2(-i64::from(s))
}

/// Segment length at stage `s`.
pub fn segment_len(s: u32) -> usize {
    s as usize + 2
}

/// `L_s = 2·Σ_{i=0..s} (i + 2) = (s + 1)(s + 4)`: length of `β` after stage `s`.
pub fn prefix_len(s: u32) -> usize {
    let s = s as usize;
    (s + 1) * (s + 4)
}

/// Length of `β` at the start of stage `s`.
pub fn stage_start_len(s: u32) -> usize {
    if s == 0 {
        0
    } else {
        prefix_len(s - 1)
    }
}

/// The evaluation set `E_s` for a stage starting at `beta_start`, shortest
/// strings first.
pub fn evaluation_set(mode: EvalSetMode, beta_start: &BitString, s: u32) -> Vec<BitString> {
    let target = prefix_len(s);
    match mode {
        EvalSetMode::Full => all_up_to(target as u32).collect(),
        EvalSetMode::Prefix => {
            let mut out: Vec<BitString> = beta_start.prefixes().collect();
            for extra in 1..=target.saturating_sub(beta_start.len()) {
                out.extend(all_of_length(extra as u32).map(|w| beta_start.concat(&w)));
            }
            out
        }
    }
}

/// Contribution of one evaluation to `t`: its step count, and one more than
/// the largest oracle position it read.
pub fn cost(m: &Metered) -> u64 {
    m.steps.max(m.oracle_use + 1)
}

/// The public part of a scenario: candidate programs in enumeration order,
/// the step budget and the evaluation-set mode. Deliberately carries no
/// totality information.
#[derive(Clone)]
pub struct CandidateSet {
    names: Vec<String>,
    programs: Vec<Arc<Program>>,
    memos: Vec<Arc<OutcomeMemo>>,
    budget: u64,
    mode: EvalSetMode,
}

impl CandidateSet {
    pub fn new(candidates: Vec<(String, Program)>, budget: u64, mode: EvalSetMode) -> Self {
        let (names, programs): (Vec<_>, Vec<_>) = candidates
            .into_iter()
            .map(|(n, p)| (n, Arc::new(p)))
            .unzip();
        let memos = programs.iter().map(|_| Arc::new(OutcomeMemo::new())).collect();
        CandidateSet {
            names,
            programs,
            memos,
            budget,
            mode,
        }
    }

    pub fn len(&self) -> usize {
        self.programs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.programs.is_empty()
    }

    pub fn name(&self, idx: usize) -> &str {
        &self.names[idx]
    }

    pub fn program(&self, idx: usize) -> &Program {
        &self.programs[idx]
    }

    pub fn budget(&self) -> u64 {
        self.budget
    }

    pub fn mode(&self) -> EvalSetMode {
        self.mode
    }

    /// Candidate `idx` (0-based) bound to `oracle`, sharing this set's cache.
    pub fn martingale(&self, idx: usize, oracle: &BitSource) -> MartingaleFn {
        MartingaleFn::new(ProgramMartingale::with_memo(
            &self.names[idx],
            self.programs[idx].clone(),
            oracle.clone(),
            self.budget,
            self.memos[idx].clone(),
        ))
    }

    /// `1 + Σ c·d_idx` over the given components.
    pub fn mixture(&self, components: &[(usize, ExactRational)], oracle: &BitSource) -> Mixture {
        components.iter().fold(Mixture::unit(), |m, (idx, c)| {
            m.with(c.clone(), self.martingale(*idx, oracle))
        })
    }
}

/// What a stage needs from earlier stages.
#[derive(Debug, Clone)]
pub struct StageInput<'a> {
    pub s: u32,
    pub beta_start: &'a BitString,
    /// Components mixed so far as (0-based candidate index, coefficient).
    pub mixed: &'a [(usize, ExactRational)],
    /// Whether candidate `d_s` is treated as total (ignored at stage 0).
    pub mix_candidate: bool,
    pub t_prev: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PreparedStage {
    pub s: u32,
    /// Components after this stage's mixing step.
    pub mixed: Vec<(usize, ExactRational)>,
    /// Coefficient added at this stage, if any.
    pub coefficient: Option<ExactRational>,
    pub t_raw: u64,
    pub t: u64,
    /// Codewords for the totality bit of `d_{s+1}`.
    pub totality_pair: SafePair,
    /// Codewords for the α-bit, indexed by the totality bit.
    pub alpha_pairs: [SafePair; 2],
    /// Largest oracle position read during this stage.
    pub reads: u64,
    pub evaluated: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StageFailure {
    /// Evaluating candidate `candidate` (0-based) failed. `None` when the
    /// failure could not be attributed.
    #[error("{error}")]
    Eval {
        candidate: Option<usize>,
        error: EvalError,
    },
    #[error(transparent)]
    Coding(CodingError),
}

fn attribute(
    set: &CandidateSet,
    mixed: &[(usize, ExactRational)],
    oracle: &BitSource,
    error: EvalError,
) -> StageFailure {
    let culprit = mixed
        .iter()
        .map(|(idx, _)| *idx)
        .find(|&idx| set.martingale(idx, oracle).eval(error.input()).is_err());
    StageFailure::Eval {
        candidate: culprit,
        error,
    }
}

/// Runs one stage against `oracle`.
pub fn prepare_stage(
    set: &CandidateSet,
    oracle: &BitSource,
    input: &StageInput<'_>,
) -> Result<PreparedStage, StageFailure> {
    let s = input.s;
    let mut mixed = input.mixed.to_vec();
    let mut coefficient = None;
    let mut t_raw = 0u64;
    let mut reads = 0u64;

    let idx = s as usize;
    if s >= 1 && input.mix_candidate && idx - 1 < set.len() {
        let cand = set.martingale(idx - 1, oracle);
        let m = cand
            .eval_metered(input.beta_start)
            .map_err(|error| StageFailure::Eval {
                candidate: Some(idx - 1),
                error,
            })?;
        t_raw = t_raw.max(cost(&m));
        reads = reads.max(m.oracle_use);
        if m.value.is_positive() {
            let c = epsilon(s).checked_div(&m.value).expect("positive divisor");
            mixed.push((idx - 1, c.clone()));
            coefficient = Some(c);
        }
    }

    let d = set.mixture(&mixed, oracle);
    let set_e = evaluation_set(set.mode, input.beta_start, s);
    for z in &set_e {
        let m = d
            .eval_metered(z)
            .map_err(|e| attribute(set, &mixed, oracle, e))?;
        t_raw = t_raw.max(cost(&m));
        reads = reads.max(m.oracle_use);
    }
    let t = t_raw.max(input.t_prev + 1);

    let coding = |x: &BitString| {
        first_two(&d, x, s).map_err(|e| match e {
            CodingError::Eval(error) => attribute(set, &mixed, oracle, error),
            other => StageFailure::Coding(other),
        })
    };
    let totality_pair = coding(input.beta_start)?;
    let alpha_pairs = [
        coding(&input.beta_start.concat(&totality_pair.first))?,
        coding(&input.beta_start.concat(&totality_pair.second))?,
    ];

    Ok(PreparedStage {
        s,
        mixed,
        coefficient,
        t_raw,
        t,
        totality_pair,
        alpha_pairs,
        reads,
        evaluated: set_e.len(),
    })
}
