//! The property suite run by `pairlab check`.
//!
//! Every property is exact and seed-pinned, so two runs give identical
//! results. With `inject_fault` the savings transform under test is replaced
//! by a copy that is off by `1/1024` at one node; the suite must then fail.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::bits::{all_of_length, all_up_to};
use crate::bivariate::{from_univariate, to_univariate, validate_bivariate};
use crate::coding::safe_extensions;
use crate::construction::{run_construction, twelve_e_squared_lower, Scenario};
use crate::decoder::{DecoderContext, DecoderMartingale};
use crate::martingale::{
    decompose_odd_even, random_fair_table, savings_transform, validate_fairness, Martingale, MartingaleFn,
};
use crate::rational::ExactRational;

pub const FOUR_CANDIDATES: &str = include_str!("../../../scenarios/four-candidates.toml");
pub const TINY: &str = include_str!("../../../scenarios/tiny.toml");

#[derive(Debug, Clone, Default)]
pub struct SuiteOptions {
    pub inject_fault: bool,
    /// Scenario for the construction and decoder properties; defaults to
    /// the shipped four-candidate scenario.
    pub scenario: Option<Scenario>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropertyResult {
    pub name: &'static str,
    pub outcome: Result<String, String>,
}

impl PropertyResult {
    pub fn passed(&self) -> bool {
        self.outcome.is_ok()
    }
}

type Check = Result<String, String>;

fn tables(seed: u64, count: usize, depth: u32) -> Vec<MartingaleFn> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| MartingaleFn::new(random_fair_table(&mut rng, depth)))
        .collect()
}

fn safe_extension_counts() -> Check {
    let mut queries = 0;
    let mut fewest = usize::MAX;
    for f in tables(1, 50, 8) {
        for i in 0..=4u32 {
            for n in 0..=(6 - i) {
                for x in all_of_length(n) {
                    if !f.eval(&x).map_err(|e| e.to_string())?.is_positive() {
                        continue;
                    }
                    let found = safe_extensions(&f, &x, i).map_err(|e| e.to_string())?.len();
                    if found < 2 {
                        return Err(format!("only {found} safe extensions at x = {}, i = {i}", x.to_token()));
                    }
                    fewest = fewest.min(found);
                    queries += 1;
                }
            }
        }
    }
    Ok(format!("{queries} queries, fewest {fewest}"))
}

fn round_trip() -> Check {
    for f in tables(2, 20, 8) {
        let back = to_univariate(&from_univariate(&f));
        for z in all_up_to(8) {
            if back.eval(&z) != f.eval(&z) {
                return Err(format!("round trip differs at {}", z.to_token()));
            }
        }
        let report = validate_bivariate(&from_univariate(&f), 4, 4);
        if let Some(v) = report.violation {
            return Err(v.to_string());
        }
    }
    Ok("20 tables, depth 8".into())
}

fn savings_halving(inject_fault: bool) -> Check {
    for f in tables(3, 20, 8) {
        let mut g = savings_transform(&f).map_err(|e| e.to_string())?;
        if inject_fault {
            let inner = g.clone();
            g = MartingaleFn::from_fn("faulty-savings", move |x| {
                let v = inner.eval(x).expect("table martingale");
                if x.to_token() == "0" {
                    &v + &ExactRational::new(1, 1024)
                } else {
                    v
                }
            });
        }
        let report = validate_fairness(&g, 8);
        if let Some(v) = report.violation {
            return Err(v.to_string());
        }
        for x in all_up_to(6) {
            let half = g.eval(&x).map_err(|e| e.to_string())?.halve();
            for extra in 1..=(8 - x.len() as u32) {
                for v in all_of_length(extra) {
                    let xv = x.concat(&v);
                    if g.eval(&xv).map_err(|e| e.to_string())? < half {
                        return Err(format!("halving fails from {} to {}", x.to_token(), xv.to_token()));
                    }
                }
            }
        }
    }
    Ok("20 tables, depth 8".into())
}

fn decomposition() -> Check {
    for f in tables(4, 20, 8) {
        let (fo, fe) = decompose_odd_even(&f, 8).map_err(|e| e.to_string())?;
        for z in all_up_to(8) {
            let prod = &fo.eval(&z).map_err(|e| e.to_string())? * &fe.eval(&z).map_err(|e| e.to_string())?;
            if prod != f.eval(&z).map_err(|e| e.to_string())? {
                return Err(format!("product differs at {}", z.to_token()));
            }
        }
    }
    Ok("20 tables, depth 8".into())
}

fn construction_and_decoder(sc: &Scenario) -> (Check, Check) {
    let r = match run_construction(sc) {
        Ok(r) => r,
        Err(e) => return (Err(e.to_string()), Err("no construction".into())),
    };
    let bound = (|| -> Check {
        for tr in &r.traces {
            if tr.d_at_beta > tr.running_bound {
                return Err(format!("stage {}: d(beta) = {} exceeds {}", tr.s, tr.d_at_beta, tr.running_bound));
            }
        }
        let last = &r.traces.last().expect("at least stage 0").d_at_beta;
        if *last >= twelve_e_squared_lower() {
            return Err(format!("final d(beta) = {last} is not below 12e^2"));
        }
        for c in &r.components {
            let cand = r.candidate(c.index);
            for z in all_up_to(8).chain((0..=sc.stages).flat_map(|s| r.evaluation_set(s))) {
                let lhs = r.final_d.eval(&z).map_err(|e| e.to_string())?;
                let rhs = &c.coefficient * &cand.eval(&z).map_err(|e| e.to_string())?;
                if lhs < rhs {
                    return Err(format!("{} not dominated at {}", c.name, z.to_token()));
                }
            }
        }
        Ok(format!("|beta| = {}, final d(beta) = {last}", r.beta.len()))
    })();
    let decode = (|| -> Check {
        let ctx = DecoderContext::new(sc.candidate_set());
        let t_last = *r.t_values().last().expect("at least stage 0");
        let alpha = sc.alpha.prefix(t_last).map_err(|e| e.to_string())?;
        let flags = ctx.decode_totality(&r.beta, &alpha).map_err(|e| e.to_string())?;
        let mut expected = sc.flags();
        expected.resize(flags.len(), false);
        if flags != expected {
            return Err(format!("decoded flags {flags:?}, declared {expected:?}"));
        }
        let last = ctx.eval_e(&alpha, &r.beta);
        let target = ExactRational::pow2(i64::from(sc.stages) + 1);
        if last != target {
            return Err(format!("final capital {last}, expected {target}"));
        }
        Ok(format!("flags {flags:?}, capital {last}"))
    })();
    (bound, decode)
}

fn decoder_fairness() -> Check {
    let sc = Scenario::from_toml(TINY).map_err(|e| e.to_string())?;
    let e = DecoderMartingale(std::sync::Arc::new(DecoderContext::new(sc.candidate_set())));
    let report = validate_bivariate(&e, 3, 10);
    match report.violation {
        None => Ok(format!("{} pairs", report.pairs_checked)),
        Some(v) => Err(v.to_string()),
    }
}

/// Runs all properties in a fixed order.
pub fn run_suite(opts: &SuiteOptions) -> Vec<PropertyResult> {
    let sc = match &opts.scenario {
        Some(sc) => Ok(sc.clone()),
        None => Scenario::from_toml(FOUR_CANDIDATES).map_err(|e| e.to_string()),
    };
    let (bound, decode) = match &sc {
        Ok(sc) => construction_and_decoder(sc),
        Err(e) => (Err(e.clone()), Err(e.clone())),
    };
    vec![
        PropertyResult {
            name: "safe-extension-counts",
            outcome: safe_extension_counts(),
        },
        PropertyResult {
            name: "bivariate-round-trip",
            outcome: round_trip(),
        },
        PropertyResult {
            name: "savings-halving",
            outcome: savings_halving(opts.inject_fault),
        },
        PropertyResult {
            name: "odd-even-product",
            outcome: decomposition(),
        },
        PropertyResult {
            name: "construction-bound-dominance",
            outcome: bound,
        },
        PropertyResult {
            name: "decoder-end-to-end",
            outcome: decode,
        },
        PropertyResult {
            name: "decoder-fairness",
            outcome: decoder_fairness(),
        },
    ]
}

/// One `PASS` or `FAIL` line per property.
pub fn describe_results(results: &[PropertyResult]) -> String {
    let mut out = String::new();
    for r in results {
        match &r.outcome {
            Ok(detail) => out.push_str(&format!("PASS {} ({detail})\n", r.name)),
            Err(why) => out.push_str(&format!("FAIL {}: {why}\n", r.name)),
        }
    }
    out
}
