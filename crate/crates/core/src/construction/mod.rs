//! The stage machine that builds `β` and the mixture `d` against a list of
//! candidate oracle martingales.
//!
//! Each stage appends two safe segments to `β`: one encoding whether the next
//! candidate is total, one encoding `α_t` for the stage's cut point `t`.
//! Total candidates are mixed into `d` with a coefficient that makes their
//! contribution at the current `β` exactly `2^-s`, so `d` covers every total
//! candidate up to a constant factor while `d(β)` stays bounded.

mod export;
mod scenario;
pub mod stage;

use std::collections::HashSet;

use thiserror::Error;

use crate::bits::BitString;
use crate::martingale::{EvalError, Martingale, MartingaleFn};
use crate::rational::ExactRational;
use crate::source::BitSource;

pub use export::{write_outputs, CSV_HEADER};
pub use scenario::{Candidate, Scenario, ScenarioError, CHECK_DEPTH_CAP, SCENARIO_VERSION};
pub use stage::{
    cost, epsilon, evaluation_set, prefix_len, prepare_stage, segment_len, stage_start_len, CandidateSet,
    EvalSetMode, PreparedStage, StageFailure, StageInput,
};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ConstructionError {
    #[error("declared-total candidate {name:?} fails on {}: {reason}", input.to_token())]
    Candidate {
        name: String,
        input: BitString,
        reason: String,
    },
    #[error(
        "alpha is too short: position {required} is needed but only {available} bits are available; \
         lengthen alpha to at least {required} bits"
    )]
    AlphaTooShort { required: u64, available: u64 },
    #[error("internal inconsistency at stage {stage}: {detail}")]
    Internal { stage: u32, detail: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageTrace {
    pub s: u32,
    pub mixed: bool,
    /// `ε_s / d_s(β)` when mixed, else 0.
    pub coefficient: ExactRational,
    /// Totality bit encoded for the next candidate.
    pub next_total: bool,
    pub totality_segment: BitString,
    pub alpha_segment: BitString,
    pub t_raw: u64,
    pub t: u64,
    pub alpha_bit: u8,
    /// `d(β)` after the stage.
    pub d_at_beta: ExactRational,
    pub running_bound: ExactRational,
    /// Size of the evaluation set.
    pub evaluated: usize,
}

/// A candidate mixed into the final `d`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MixedComponent {
    pub stage: u32,
    pub index: usize,
    pub name: String,
    pub coefficient: ExactRational,
}

#[derive(Clone)]
pub struct ConstructionResult {
    pub beta: BitString,
    pub traces: Vec<StageTrace>,
    pub components: Vec<MixedComponent>,
    pub final_d: MartingaleFn,
    candidates: CandidateSet,
    alpha: BitSource,
}

impl std::fmt::Debug for ConstructionResult {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ConstructionResult")
            .field("beta", &self.beta)
            .field("traces", &self.traces)
            .field("components", &self.components)
            .finish_non_exhaustive()
    }
}

impl ConstructionResult {
    /// Candidate `idx` (0-based) bound to the scenario's α.
    pub fn candidate(&self, idx: usize) -> MartingaleFn {
        self.candidates.martingale(idx, &self.alpha)
    }

    /// `β` as it was at the start of stage `s`.
    pub fn stage_start(&self, s: u32) -> BitString {
        self.beta.prefix(stage_start_len(s))
    }

    /// Evaluation set of stage `s`.
    pub fn evaluation_set(&self, s: u32) -> Vec<BitString> {
        evaluation_set(self.candidates.mode(), &self.stage_start(s), s)
    }

    pub fn t_values(&self) -> Vec<u64> {
        self.traces.iter().map(|t| t.t).collect()
    }

    /// One line per component: `base 1`, then `+ c * name`.
    pub fn mixture_description(&self) -> String {
        let mut out = String::from("base 1\n");
        for c in &self.components {
            out.push_str(&format!(
                "+ {} * {} ; stage {} candidate {}\n",
                c.coefficient,
                c.name,
                c.stage,
                c.index + 1
            ));
        }
        out
    }
}

/// Exact lower bound on `12·e²` from a partial Taylor sum of `e^2`.
pub fn twelve_e_squared_lower() -> ExactRational {
    let mut term = ExactRational::one();
    let mut sum = ExactRational::one();
    for k in 1..=24i64 {
        term = &(&term * &ExactRational::from_integer(2)) * &ExactRational::new(1, k);
        sum = &sum + &term;
    }
    &sum * &ExactRational::from_integer(12)
}

fn alpha_bit(alpha: &BitSource, t: u64) -> Result<u8, ConstructionError> {
    alpha.bit(t).map_err(|_| ConstructionError::AlphaTooShort {
        required: t,
        available: alpha.available().unwrap_or(0),
    })
}

fn eval_failure(set: &CandidateSet, alpha: &BitSource, stage: u32, f: StageFailure) -> ConstructionError {
    match f {
        StageFailure::Eval {
            error: EvalError::OracleOutOfRange { index, .. },
            ..
        } => ConstructionError::AlphaTooShort {
            required: index,
            available: alpha.available().unwrap_or(0),
        },
        StageFailure::Eval {
            candidate: Some(idx),
            error,
        } => ConstructionError::Candidate {
            name: set.name(idx).to_string(),
            input: error.input().clone(),
            reason: error.to_string(),
        },
        other => ConstructionError::Internal {
            stage,
            detail: other.to_string(),
        },
    }
}

/// Fairness of each mixed candidate at every node of `e_set` whose children
/// are also in `e_set`.
fn check_needed_fairness(
    set: &CandidateSet,
    alpha: &BitSource,
    mixed: &[(usize, ExactRational)],
    e_set: &[BitString],
) -> Result<(), ConstructionError> {
    let members: HashSet<&BitString> = e_set.iter().collect();
    for (idx, _) in mixed {
        let m = set.martingale(*idx, alpha);
        let fail = |input: &BitString, reason: String| ConstructionError::Candidate {
            name: set.name(*idx).to_string(),
            input: input.clone(),
            reason,
        };
        for z in e_set {
            let (z0, z1) = (z.child(0), z.child(1));
            if !(members.contains(&z0) && members.contains(&z1)) {
                continue;
            }
            let v = m.eval(z).map_err(|e| fail(z, e.to_string()))?;
            let l = m.eval(&z0).map_err(|e| fail(&z0, e.to_string()))?;
            let r = m.eval(&z1).map_err(|e| fail(&z1, e.to_string()))?;
            if v.is_negative() || l.is_negative() || r.is_negative() {
                return Err(fail(z, "negative value".into()));
            }
            if &l + &r != v.double() {
                return Err(fail(z, format!("not fair: {l} + {r} != 2 * {v}")));
            }
        }
    }
    Ok(())
}

/// Runs stages `0..=sc.stages`.
pub fn run_construction(sc: &Scenario) -> Result<ConstructionResult, ConstructionError> {
    for (name, report) in sc.check_candidates() {
        if let Some(v) = report.violation {
            return Err(match v {
                crate::martingale::Violation::Evaluation(EvalError::OracleOutOfRange { index, .. }) => {
                    ConstructionError::AlphaTooShort {
                        required: index,
                        available: sc.alpha.available().unwrap_or(0),
                    }
                }
                crate::martingale::Violation::Unfair { ref node, .. }
                | crate::martingale::Violation::Negative { ref node, .. } => ConstructionError::Candidate {
                    name,
                    input: node.clone(),
                    reason: v.to_string(),
                },
                crate::martingale::Violation::Evaluation(ref e) => ConstructionError::Candidate {
                    name,
                    input: e.input().clone(),
                    reason: v.to_string(),
                },
            });
        }
    }

    let set = sc.candidate_set();
    let alpha = &sc.alpha;
    let mut beta = BitString::empty();
    let mut mixed: Vec<(usize, ExactRational)> = Vec::new();
    let mut components = Vec::new();
    let mut traces = Vec::new();
    let mut t_prev = 0;
    let mut mixed_eps = ExactRational::one();
    let mut growth = ExactRational::one();

    for s in 0..=sc.stages {
        let mix_candidate = s >= 1 && sc.candidates.get(s as usize - 1).is_some_and(|c| c.declared_total);
        let prep = prepare_stage(
            &set,
            alpha,
            &StageInput {
                s,
                beta_start: &beta,
                mixed: &mixed,
                mix_candidate,
                t_prev,
            },
        )
        .map_err(|f| eval_failure(&set, alpha, s, f))?;

        let e_set = evaluation_set(sc.eval_set, &beta, s);
        check_needed_fairness(&set, alpha, &prep.mixed, &e_set)?;

        let next_total = sc.candidates.get(s as usize).is_some_and(|c| c.declared_total);
        let bit = alpha_bit(alpha, prep.t)?;
        let totality_segment = prep.totality_pair.encode(next_total).clone();
        let alpha_segment = prep.alpha_pairs[next_total as usize].encode(bit == 1).clone();
        beta = beta.concat(&totality_segment).concat(&alpha_segment);

        if let Some(c) = &prep.coefficient {
            let idx = s as usize - 1;
            components.push(MixedComponent {
                stage: s,
                index: idx,
                name: set.name(idx).to_string(),
                coefficient: c.clone(),
            });
            mixed_eps = &mixed_eps + &epsilon(s);
        }
        let step = &ExactRational::one() + &epsilon(s);
        growth = &growth * &(&step * &step);
        let d = set.mixture(&prep.mixed, alpha);
        let d_at_beta = d.eval(&beta).map_err(|e| ConstructionError::Internal {
            stage: s,
            detail: e.to_string(),
        })?;

        traces.push(StageTrace {
            s,
            mixed: prep.coefficient.is_some(),
            coefficient: prep.coefficient.clone().unwrap_or_else(ExactRational::zero),
            next_total,
            totality_segment,
            alpha_segment,
            t_raw: prep.t_raw,
            t: prep.t,
            alpha_bit: bit,
            d_at_beta,
            running_bound: &mixed_eps * &growth,
            evaluated: prep.evaluated,
        });
        t_prev = prep.t;
        mixed = prep.mixed;
    }

    let final_d = MartingaleFn::new(set.mixture(&mixed, alpha));
    Ok(ConstructionResult {
        beta,
        traces,
        components,
        final_d,
        candidates: set,
        alpha: alpha.clone(),
    })
}
