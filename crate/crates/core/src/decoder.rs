//! The pair-betting martingale `e(a, b)`.
//!
//! `e` reads `b` as a candidate `β`: it replays the construction stage by
//! stage using only the public candidate programs and `a` as the oracle,
//! decodes each totality bit and each α-bit from the segments of `b`, and
//! doubles its capital on `a_t` whenever the decoded bit predicts it. Once a
//! segment is not one of the two expected codewords, `e` stops betting and
//! keeps what it has.
//!
//! For `b` too short to contain a whole segment, `e(a, b)` is the average of
//! `e(a, b')` over all long extensions `b'`. Every stage that is still open
//! contributes an expected factor of 1 except a partially read α-segment whose
//! `t` is within `a`, which has a closed form.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use thiserror::Error;

use crate::bits::BitString;
use crate::bivariate::BivariateMartingale;
use crate::coding::SafePair;
use crate::construction::{prefix_len, prepare_stage, segment_len, CandidateSet, PreparedStage, StageFailure, StageInput};
use crate::martingale::EvalError;
use crate::rational::ExactRational;
use crate::source::BitSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SegmentKind {
    Totality,
    Alpha,
}

impl fmt::Display for SegmentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SegmentKind::Totality => "totality",
            SegmentKind::Alpha => "alpha",
        })
    }
}

/// One fully decoded stage.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayStage {
    pub s: u32,
    /// Decoded totality of the next candidate.
    pub totality: bool,
    pub t: u64,
    pub alpha_bit: u8,
    /// Length of the `b`-prefix consumed after this stage.
    pub consumed: usize,
    pub coefficient: Option<ExactRational>,
}

/// Why the replay stopped.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReplayEnd {
    /// `b` ended exactly at a stage boundary.
    Exhausted,
    /// The stage's `t` exceeds the horizon `|a|`.
    Beyond { s: u32, t: u64 },
    /// A stage computation failed: an oracle read beyond `a`, divergence
    /// within the budget, a runtime fault or a coding failure.
    Stopped { s: u32, failure: StageFailure },
    /// The segment is neither expected codeword; betting is frozen.
    Malformed {
        s: u32,
        kind: SegmentKind,
        expected: SafePair,
        found: BitString,
        t: u64,
    },
    /// `b` ends inside a segment.
    Partial {
        s: u32,
        kind: SegmentKind,
        expected: SafePair,
        found: BitString,
        t: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReplayRecord {
    pub stages: Vec<ReplayStage>,
    pub end: ReplayEnd,
}

impl ReplayRecord {
    pub fn flags(&self) -> Vec<bool> {
        self.stages.iter().map(|s| s.totality).collect()
    }

    pub fn t_values(&self) -> Vec<u64> {
        self.stages.iter().map(|s| s.t).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecodeError {
    #[error("malformed {kind} segment at stage {stage}: found {}, expected {} or {}",
        found.to_token(), first.to_token(), second.to_token())]
    Malformed {
        stage: u32,
        kind: SegmentKind,
        first: BitString,
        second: BitString,
        found: BitString,
    },
    #[error("beta ends inside the {kind} segment of stage {stage} ({len} bits)")]
    Truncated { stage: u32, kind: SegmentKind, len: usize },
    #[error("replay stopped at stage {stage}: {reason}")]
    Stopped { stage: u32, reason: String },
}

struct CachedStage {
    prep: PreparedStage,
    /// Largest oracle position read in this and all earlier stages.
    reads: u64,
}

/// Stage-start prefix of `b` to entries tagged with the α bits they read.
type StageCache = HashMap<BitString, Vec<(BitString, Arc<CachedStage>)>>;

/// Everything `e` knows: the public candidate programs, the step budget and
/// the evaluation-set mode, plus caches. It holds no totality flags.
pub struct DecoderContext {
    set: CandidateSet,
    stages: Mutex<StageCache>,
}

impl DecoderContext {
    pub fn new(set: CandidateSet) -> Self {
        DecoderContext {
            set,
            stages: Mutex::new(HashMap::new()),
        }
    }

    pub fn candidates(&self) -> &CandidateSet {
        &self.set
    }

    /// Stage computation through the cache. An entry is reused for any
    /// oracle agreeing with the bits it (and every earlier stage) read.
    fn stage(
        &self,
        oracle: &BitSource,
        input: &StageInput<'_>,
        reads_before: u64,
    ) -> Result<Arc<CachedStage>, StageFailure> {
        if let Some(hit) = self
            .stages
            .lock()
            .expect("stage cache lock")
            .get(input.beta_start)
            .and_then(|v| v.iter().find(|(read, _)| oracle.agrees_with(read)))
        {
            return Ok(hit.1.clone());
        }
        let prep = prepare_stage(&self.set, oracle, input)?;
        let reads = reads_before.max(prep.reads);
        let read = oracle.prefix(reads).expect("reads lie within the oracle");
        let entry = Arc::new(CachedStage { prep, reads });
        self.stages
            .lock()
            .expect("stage cache lock")
            .entry(input.beta_start.clone())
            .or_default()
            .push((read, entry.clone()));
        Ok(entry)
    }

    /// Replays the stages encoded in `b` with oracle `a`, stopping at the
    /// first stage whose `t` exceeds `horizon` when one is given.
    pub fn replay(&self, a: &BitString, b: &BitString, horizon: Option<usize>) -> ReplayRecord {
        let oracle = BitSource::explicit(a.clone());
        let mut stages = Vec::new();
        let mut consumed = 0;
        let mut mixed = Vec::new();
        let mut t_prev = 0;
        let mut last_total = false;
        let mut reads = 0;
        let mut s = 0u32;
        let end = loop {
            if consumed == b.len() {
                break ReplayEnd::Exhausted;
            }
            let beta_start = b.prefix(consumed);
            let input = StageInput {
                s,
                beta_start: &beta_start,
                mixed: &mixed,
                mix_candidate: last_total,
                t_prev,
            };
            let cached = match self.stage(&oracle, &input, reads) {
                Ok(c) => c,
                Err(failure) => break ReplayEnd::Stopped { s, failure },
            };
            let prep = &cached.prep;
            let t = prep.t;
            if horizon.is_some_and(|h| t > h as u64) {
                break ReplayEnd::Beyond { s, t };
            }
            let len = segment_len(s);
            let read_segment = |from: usize, kind: SegmentKind, pair: &SafePair| {
                if b.len() - from < len {
                    Err(ReplayEnd::Partial {
                        s,
                        kind,
                        expected: pair.clone(),
                        found: b.slice(from + 1, b.len()),
                        t,
                    })
                } else {
                    let found = b.slice(from + 1, from + len);
                    pair.decode(&found).ok_or(ReplayEnd::Malformed {
                        s,
                        kind,
                        expected: pair.clone(),
                        found,
                        t,
                    })
                }
            };
            let totality = match read_segment(consumed, SegmentKind::Totality, &prep.totality_pair) {
                Ok(v) => v,
                Err(end) => break end,
            };
            consumed += len;
            let bit = match read_segment(consumed, SegmentKind::Alpha, &prep.alpha_pairs[totality as usize]) {
                Ok(v) => v,
                Err(end) => break end,
            };
            consumed += len;
            stages.push(ReplayStage {
                s,
                totality,
                t,
                alpha_bit: bit as u8,
                consumed,
                coefficient: prep.coefficient.clone(),
            });
            mixed = prep.mixed.clone();
            t_prev = t;
            last_total = totality;
            reads = cached.reads;
            s += 1;
        };
        ReplayRecord { stages, end }
    }

    /// `e(a, b)`.
    pub fn eval_e(&self, a: &BitString, b: &BitString) -> ExactRational {
        if a.is_empty() {
            return ExactRational::one();
        }
        let rec = self.replay(a, b, Some(a.len()));
        let two = ExactRational::from_integer(2);
        let mut value = ExactRational::one();
        for st in &rec.stages {
            if a.bit(st.t as usize).expect("t within a") != st.alpha_bit {
                return ExactRational::zero();
            }
            value = &value * &two;
        }
        if let ReplayEnd::Partial {
            s,
            kind: SegmentKind::Alpha,
            expected,
            found,
            t,
        } = &rec.end
        {
            let actual = a.bit(*t as usize).expect("t within a");
            let weight = ExactRational::pow2(-((segment_len(*s) - found.len()) as i64));
            let mut factor = ExactRational::one();
            for (code, bit) in [(&expected.first, 0u8), (&expected.second, 1u8)] {
                if found.is_prefix_of(code) {
                    factor = &factor - &weight;
                    if bit == actual {
                        factor = &factor + &(&weight * &two);
                    }
                }
            }
            value = &value * &factor;
        }
        value
    }

    /// Totality flags encoded in `beta`, one per stage.
    pub fn decode_totality(&self, beta: &BitString, alpha_prefix: &BitString) -> Result<Vec<bool>, DecodeError> {
        let rec = self.replay(alpha_prefix, beta, None);
        match rec.end {
            ReplayEnd::Exhausted => Ok(rec.flags()),
            ReplayEnd::Malformed {
                s,
                kind,
                expected,
                found,
                ..
            } => Err(DecodeError::Malformed {
                stage: s,
                kind,
                first: expected.first,
                second: expected.second,
                found,
            }),
            ReplayEnd::Partial { s, kind, found, .. } => Err(DecodeError::Truncated {
                stage: s,
                kind,
                len: found.len(),
            }),
            ReplayEnd::Stopped { s, failure } => Err(DecodeError::Stopped {
                stage: s,
                reason: match failure {
                    StageFailure::Eval {
                        error: EvalError::OracleOutOfRange { index, .. },
                        ..
                    } => format!("alpha prefix too short, position {index} is needed"),
                    other => other.to_string(),
                },
            }),
            ReplayEnd::Beyond { .. } => unreachable!("no horizon"),
        }
    }

    /// `e(a, beta)` along the prefixes `a` of `alpha_prefix`, shortest first.
    pub fn capital_trace(&self, alpha_prefix: &BitString, beta: &BitString) -> Vec<(usize, ExactRational)> {
        (0..=alpha_prefix.len())
            .map(|n| (n, self.eval_e(&alpha_prefix.prefix(n), beta)))
            .collect()
    }
}

/// `L(n)`: the length of `b` that covers stages `0..=n`.
pub fn covering_len(n: u32) -> usize {
    prefix_len(n)
}

/// `e` as a bivariate martingale (first argument `a`, second `b`).
#[derive(Clone)]
pub struct DecoderMartingale(pub Arc<DecoderContext>);

impl BivariateMartingale for DecoderMartingale {
    fn eval(&self, x: &BitString, y: &BitString) -> Result<ExactRational, EvalError> {
        Ok(self.0.eval_e(x, y))
    }

    fn describe(&self) -> String {
        "decoder".into()
    }
}
