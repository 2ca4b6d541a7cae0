#![allow(dead_code)]

use std::cell::RefCell;
use std::collections::HashMap;
use std::path::PathBuf;

use pairlab::bits::{all_up_to, BitString};
use pairlab::construction::{prefix_len, prepare_stage, segment_len, CandidateSet, PreparedStage, Scenario, StageInput};
use pairlab::mdsl::{evaluate, parse, OutcomeValue};
use pairlab::rational::ExactRational;
use pairlab::source::BitSource;

pub fn workspace_root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

pub fn scenario_path(name: &str) -> PathBuf {
    workspace_root().join("scenarios").join(format!("{name}.toml"))
}

pub fn scenario(name: &str) -> Scenario {
    Scenario::load(&scenario_path(name)).expect("shipped scenario loads")
}

pub fn golden_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// `d(xy)/d(x) < 1 + 2^-i`, computed by division.
pub fn ratio_below(dx: &ExactRational, dxy: &ExactRational, i: u32) -> bool {
    let ratio = dxy.checked_div(dx).expect("positive capital");
    ratio < &ExactRational::one() + &ExactRational::pow2(-i64::from(i))
}

/// Evaluates every corpus program on all inputs of length at most 3 with a
/// fixed oracle, one line per evaluation.
pub fn corpus_report() -> String {
    let dir = workspace_root().join("book/corpus");
    let mut files: Vec<_> = std::fs::read_dir(&dir)
        .expect("corpus directory")
        .map(|e| e.expect("entry").path())
        .filter(|p| p.extension().is_some_and(|x| x == "mdsl"))
        .collect();
    files.sort();
    let oracle = BitSource::explicit(BitString::from_token("1011").unwrap());
    let mut out = String::new();
    for f in files {
        let name = f.file_stem().unwrap().to_string_lossy().to_string();
        let p = parse(&std::fs::read_to_string(&f).unwrap()).expect("corpus program parses");
        out.push_str(&format!("# {name} {p}\n"));
        for x in all_up_to(3) {
            let line = match evaluate(&p, &x, &oracle, 500) {
                Ok(o) => {
                    let result = match &o.result {
                        OutcomeValue::Value(v) => format!("value {v}"),
                        OutcomeValue::Diverged => "diverged".into(),
                        OutcomeValue::OracleOutOfRange(k) => format!("oracle-out-of-range {k}"),
                    };
                    format!("{result} steps {} use {}", o.steps, o.oracle_use)
                }
                Err(fault) => format!("fault {fault}"),
            };
            out.push_str(&format!("{} {line}\n", x.to_token()));
        }
    }
    out
}

enum Case {
    /// The stage with `t = |a|` was decoded and predicts this bit.
    Bet(u8),
    /// No stage bets on position `|a|`.
    Carry,
}

/// A literal, recursive-in-`a` transcription of the case analysis defining
/// `e`, with the freeze amendment:
///
/// - `e(λ, b) = 1`;
/// - if `b` is shorter than `L(|a| - 1)`, average over `b0` and `b1`;
/// - otherwise replay the stages with oracle `a`; if the stage with
///   `t = |a|` is reached with both segments well formed, `e(a, b)` is
///   `2·e(a⁻, b)` or 0 depending on `a_t`; in every other case (t skipped,
///   a computation that reads past `a` or diverges, a malformed segment)
///   `e(a, b) = e(a⁻, b)`.
///
/// Stages past `|a| - 1` cannot have `t <= |a|` because `t` grows by at
/// least one per stage, so extensions beyond `L(|a| - 1)` do not change the
/// value.
pub struct Transcription {
    set: CandidateSet,
    stages: RefCell<HashMap<(BitString, BitString), Option<PreparedStage>>>,
    memo: RefCell<HashMap<(BitString, BitString), ExactRational>>,
    memo_limit: usize,
}

impl Transcription {
    pub fn new(set: CandidateSet, memo_limit: usize) -> Self {
        Transcription {
            set,
            stages: RefCell::new(HashMap::new()),
            memo: RefCell::new(HashMap::new()),
            memo_limit,
        }
    }

    fn stage(
        &self,
        a: &BitString,
        s: u32,
        beta: &BitString,
        mixed: &[(usize, ExactRational)],
        mix: bool,
        t_prev: u64,
    ) -> Option<PreparedStage> {
        let key = (a.clone(), beta.clone());
        if let Some(hit) = self.stages.borrow().get(&key) {
            return hit.clone();
        }
        let oracle = BitSource::explicit(a.clone());
        let out = prepare_stage(
            &self.set,
            &oracle,
            &StageInput {
                s,
                beta_start: beta,
                mixed,
                mix_candidate: mix,
                t_prev,
            },
        )
        .ok();
        self.stages.borrow_mut().insert(key, out.clone());
        out
    }

    fn case(&self, a: &BitString, b: &BitString) -> Case {
        let n = a.len() as u64;
        let mut consumed = 0;
        let mut mixed = Vec::new();
        let mut mix = false;
        let mut t_prev = 0;
        for s in 0u32.. {
            let beta = b.prefix(consumed);
            let Some(prep) = self.stage(a, s, &beta, &mixed, mix, t_prev) else {
                return Case::Carry;
            };
            if prep.t > n {
                return Case::Carry;
            }
            let len = segment_len(s);
            if consumed + 2 * len > b.len() {
                unreachable!("b covers every stage that can bet");
            }
            let seg_t = b.slice(consumed + 1, consumed + len);
            let seg_a = b.slice(consumed + len + 1, consumed + 2 * len);
            let total = if seg_t == prep.totality_pair.first {
                false
            } else if seg_t == prep.totality_pair.second {
                true
            } else {
                return Case::Carry;
            };
            let pair = &prep.alpha_pairs[total as usize];
            let bit = if seg_a == pair.first {
                0
            } else if seg_a == pair.second {
                1
            } else {
                return Case::Carry;
            };
            if prep.t == n {
                return Case::Bet(bit);
            }
            consumed += 2 * len;
            mixed = prep.mixed;
            mix = total;
            t_prev = prep.t;
        }
        unreachable!()
    }

    pub fn e(&self, a: &BitString, b: &BitString) -> ExactRational {
        if a.is_empty() {
            return ExactRational::one();
        }
        let key = (a.clone(), b.clone());
        if let Some(v) = self.memo.borrow().get(&key) {
            return v.clone();
        }
        let n = a.len();
        let cover = prefix_len(n as u32 - 1);
        let v = if b.len() < cover {
            ExactRational::average(&self.e(a, &b.child(0)), &self.e(a, &b.child(1)))
        } else {
            let prev = self.e(&a.prefix(n - 1), b);
            match self.case(a, b) {
                Case::Bet(bit) if a.bit(n).unwrap() == bit => prev.double(),
                Case::Bet(_) => ExactRational::zero(),
                Case::Carry => prev,
            }
        };
        if b.len() <= self.memo_limit {
            self.memo.borrow_mut().insert(key, v.clone());
        }
        v
    }
}
