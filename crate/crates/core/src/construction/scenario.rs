//! Scenario files.
//!
//! ```toml
//! version = 1
//! stages = 3            # stages 0..=3 are run
//! eval_set = "prefix"   # or "full"
//! step_budget = 20000
//!
//! [alpha]
//! kind = "seeded"       # or "explicit" with bits = "0110..."
//! seed = 7
//! length = 4096         # optional; caps the number of readable bits
//!
//! [[candidates]]
//! name = "unit"
//! total = true
//! program = "(const 1)"
//! ```

use std::collections::HashSet;
use std::path::Path;

use serde::Deserialize;
use thiserror::Error;

use super::stage::{prefix_len, CandidateSet, EvalSetMode};
use crate::bits::BitString;
use crate::martingale::FairnessReport;
use crate::mdsl::{check_program_martingale, parse, ParseError, Program};
use crate::source::BitSource;

pub const SCENARIO_VERSION: u32 = 1;

/// Up-front fairness checks stop at this depth; deeper strings the run
/// touches are checked during the run itself.
pub const CHECK_DEPTH_CAP: u32 = 8;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed scenario: {0}")]
    Syntax(String),
    #[error("unsupported scenario version {found} (expected {SCENARIO_VERSION})")]
    Version { found: u32 },
    #[error("candidate {name:?}: {error}")]
    Program { name: String, error: ParseError },
    #[error("duplicate candidate name {0:?}")]
    DuplicateName(String),
    #[error("{0}")]
    Invalid(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    version: u32,
    stages: u32,
    #[serde(default)]
    eval_set: Option<String>,
    step_budget: u64,
    alpha: RawAlpha,
    #[serde(default)]
    candidates: Vec<RawCandidate>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAlpha {
    kind: String,
    #[serde(default)]
    bits: Option<String>,
    #[serde(default)]
    seed: Option<u64>,
    #[serde(default)]
    length: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCandidate {
    name: String,
    total: bool,
    program: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Candidate {
    pub name: String,
    pub program: Program,
    pub declared_total: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scenario {
    pub alpha: BitSource,
    pub candidates: Vec<Candidate>,
    pub stages: u32,
    pub eval_set: EvalSetMode,
    pub step_budget: u64,
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Scenario, ScenarioError> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| ScenarioError::Syntax(e.to_string()))?;
        if raw.version != SCENARIO_VERSION {
            return Err(ScenarioError::Version { found: raw.version });
        }
        if raw.step_budget == 0 {
            return Err(ScenarioError::Invalid("step_budget must be positive".into()));
        }
        let eval_set = match raw.eval_set.as_deref() {
            None => EvalSetMode::default(),
            Some(s) => s.parse().map_err(ScenarioError::Invalid)?,
        };
        let alpha = match (raw.alpha.kind.as_str(), raw.alpha.bits, raw.alpha.seed) {
            ("explicit", Some(b), None) => BitSource::explicit(
                BitString::from_token(b.trim())
                    .map_err(|e| ScenarioError::Invalid(format!("alpha.bits: {e}")))?,
            ),
            ("seeded", None, Some(seed)) => BitSource::seeded(seed),
            ("explicit", _, _) => {
                return Err(ScenarioError::Invalid("explicit alpha needs `bits` and no `seed`".into()))
            }
            ("seeded", _, _) => {
                return Err(ScenarioError::Invalid("seeded alpha needs `seed` and no `bits`".into()))
            }
            (other, _, _) => {
                return Err(ScenarioError::Invalid(format!(
                    "unknown alpha kind {other:?} (expected explicit or seeded)"
                )))
            }
        };
        let alpha = match raw.alpha.length {
            Some(n) => alpha.with_limit(n),
            None => alpha,
        };
        let mut seen = HashSet::new();
        let mut candidates = Vec::with_capacity(raw.candidates.len());
        for c in raw.candidates {
            if !seen.insert(c.name.clone()) {
                return Err(ScenarioError::DuplicateName(c.name));
            }
            let program = parse(&c.program).map_err(|error| ScenarioError::Program {
                name: c.name.clone(),
                error,
            })?;
            candidates.push(Candidate {
                name: c.name,
                program,
                declared_total: c.total,
            });
        }
        Ok(Scenario {
            alpha,
            candidates,
            stages: raw.stages,
            eval_set,
            step_budget: raw.step_budget,
        })
    }

    pub fn load(path: &Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::from_toml(&text)
    }

    /// Declared totality of each candidate, in order.
    pub fn flags(&self) -> Vec<bool> {
        self.candidates.iter().map(|c| c.declared_total).collect()
    }

    /// The public part of the scenario: programs, budget and mode.
    pub fn candidate_set(&self) -> CandidateSet {
        CandidateSet::new(
            self.candidates
                .iter()
                .map(|c| (c.name.clone(), c.program.clone()))
                .collect(),
            self.step_budget,
            self.eval_set,
        )
    }

    /// Length of β after the last stage.
    pub fn beta_len(&self) -> usize {
        prefix_len(self.stages)
    }

    /// Depth used by [`Scenario::check_candidates`].
    pub fn check_depth(&self) -> u32 {
        (prefix_len(self.stages) as u32).min(CHECK_DEPTH_CAP)
    }

    /// Fairness and convergence of every declared-total candidate on all
    /// strings up to [`Scenario::check_depth`].
    pub fn check_candidates(&self) -> Vec<(String, FairnessReport)> {
        let depth = self.check_depth();
        self.candidates
            .iter()
            .filter(|c| c.declared_total)
            .map(|c| {
                (
                    c.name.clone(),
                    check_program_martingale(&c.program, &self.alpha, depth, self.step_budget),
                )
            })
            .collect()
    }

    /// Human-readable resolved configuration.
    pub fn describe(&self) -> String {
        let mut out = format!(
            "stages = {}\neval_set = {}\nstep_budget = {}\nalpha = {:?}\n",
            self.stages,
            self.eval_set.name(),
            self.step_budget,
            self.alpha
        );
        for (k, c) in self.candidates.iter().enumerate() {
            out.push_str(&format!(
                "candidate {} {} total={} {}\n",
                k + 1,
                c.name,
                c.declared_total,
                c.program
            ));
        }
        out
    }
}
