//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Every check is exact.

mod common;

use std::collections::HashMap;
use std::path::Path;
use std::process::{Command, ExitCode};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use pairlab::bits::BitString;
use pairlab::bivariate::{from_univariate, to_univariate, validate_bivariate};
use pairlab::coding::safe_extensions;
use pairlab::construction::{prefix_len, run_construction, ConstructionResult, Scenario};
use pairlab::decoder::{DecoderContext, DecoderMartingale, ReplayEnd};
use pairlab::martingale::{
    decompose_odd_even, random_fair_table, savings_transform, validate_fairness, Martingale, MartingaleFn, Table,
};
use pairlab::rational::ExactRational;

use common::{golden_dir, ratio_below, scenario, scenario_path, Transcription};

type Outcome = Result<String, String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn q(n: i64, d: i64) -> ExactRational {
    ExactRational::new(n, d)
}

/// Strings of length `n` in lexicographic order, built bit by bit.
fn lex(n: usize) -> Vec<BitString> {
    let mut level = vec![BitString::empty()];
    for _ in 0..n {
        level = level.iter().flat_map(|x| [x.child(0), x.child(1)]).collect();
    }
    level
}

fn upto(n: usize) -> Vec<BitString> {
    (0..=n).flat_map(lex).collect()
}

fn tables(seed: u64, count: usize, depth: u32) -> Vec<Table> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_fair_table(&mut rng, depth)).collect()
}

fn criterion_1() -> Outcome {
    let mut queries = 0usize;
    let mut skipped = 0usize;
    let mut fewest = usize::MAX;
    for (k, table) in tables(0xACCE_0001, 200, 8).into_iter().enumerate() {
        let f = MartingaleFn::new(table.clone());
        for i in 0..=5u32 {
            let seg = i as usize + 2;
            for x in upto(8 - seg) {
                let dx = table.get(&x);
                if !dx.is_positive() {
                    skipped += 1;
                    continue;
                }
                let expected: Vec<BitString> = lex(seg)
                    .into_iter()
                    .filter(|y| ratio_below(dx, table.get(&x.concat(y)), i))
                    .collect();
                let found = safe_extensions(&f, &x, i).map_err(|e| e.to_string())?;
                ensure!(
                    found == expected,
                    "table {k}, x = {}, i = {i}: library lists {} safe extensions, enumeration {}",
                    x.to_token(),
                    found.len(),
                    expected.len()
                );
                ensure!(expected.len() >= 2, "table {k}, x = {}, i = {i}: only {} safe", x.to_token(), expected.len());
                fewest = fewest.min(expected.len());
                queries += 1;
            }
        }
    }
    Ok(format!("{queries} queries (fewest {fewest} safe), {skipped} zero-capital nodes skipped"))
}

fn criterion_2() -> Outcome {
    for (k, table) in tables(0xACCE_0002, 50, 12).into_iter().enumerate() {
        let f = MartingaleFn::new(table.clone());
        let g = from_univariate(&f);
        let back = to_univariate(&g);
        for z in upto(10) {
            let v = back.eval(&z).map_err(|e| e.to_string())?;
            ensure!(&v == table.get(&z), "table {k}: round trip differs at {}", z.to_token());
        }
        let report = validate_bivariate(&g, 6, 6);
        if let Some(v) = report.violation {
            return Err(format!("table {k}: {v}"));
        }
    }
    Ok("50 tables, strings to length 10, 6x6 rectangles".into())
}

/// Banked and active capital along `x`, recomputed from the table.
fn banking(table: &Table, x: &BitString) -> (ExactRational, ExactRational) {
    let one = ExactRational::one();
    let (mut saved, mut active) = (one.clone(), one.clone());
    for k in 1..=x.len() {
        let parent = table.get(&x.prefix(k - 1));
        let child = table.get(&x.prefix(k));
        if parent.is_positive() {
            active = (&active * child).checked_div(parent).unwrap();
        }
        if active > one {
            saved = &saved + &(&active - &one);
            active = one.clone();
        }
    }
    (saved, active)
}

fn criterion_3() -> Outcome {
    let depth = 10;
    let mut pairs = 0usize;
    for (k, table) in tables(0xACCE_0003, 50, depth).into_iter().enumerate() {
        let g = savings_transform(&MartingaleFn::new(table.clone())).map_err(|e| e.to_string())?;
        if let Some(v) = validate_fairness(&g, depth).violation {
            return Err(format!("table {k}: {v}"));
        }
        let mut value = HashMap::new();
        for x in upto(depth as usize) {
            let (saved, active) = banking(&table, &x);
            let lib = g.eval(&x).map_err(|e| e.to_string())?;
            ensure!(lib == &saved + &active, "table {k}: savings value differs at {}", x.to_token());
            ensure!(lib <= saved.double(), "table {k}: value exceeds twice the bank at {}", x.to_token());
            if let Some(parent) = x.parent() {
                let (ps, _) = banking(&table, &parent);
                ensure!(saved >= ps, "table {k}: bank decreases into {}", x.to_token());
            }
            value.insert(x, lib);
        }
        // smallest value in each subtree, strict descendants only
        let mut below: HashMap<BitString, ExactRational> = HashMap::new();
        for x in upto(depth as usize - 1).into_iter().rev() {
            let mut m: Option<ExactRational> = None;
            for c in [x.child(0), x.child(1)] {
                let here = value[&c].clone();
                let sub = below.get(&c).cloned().map_or(here.clone(), |b| here.min(b));
                m = Some(m.map_or(sub.clone(), |cur| cur.min(sub)));
            }
            let m = m.unwrap();
            ensure!(
                m >= value[&x].halve(),
                "table {k}: some extension of {} falls below half",
                x.to_token()
            );
            pairs += (1usize << (depth as usize - x.len() + 1)) - 2;
            below.insert(x, m);
        }
    }
    Ok(format!("50 tables, depth {depth}, {pairs} prefix pairs"))
}

fn criterion_4() -> Outcome {
    let mut zeros = 0usize;
    for (k, table) in tables(0xACCE_0004, 50, 8).into_iter().enumerate() {
        let (fo, fe) = decompose_odd_even(&MartingaleFn::new(table.clone()), 8).map_err(|e| e.to_string())?;
        for z in upto(8) {
            let prod = &fo.eval(&z).map_err(|e| e.to_string())? * &fe.eval(&z).map_err(|e| e.to_string())?;
            ensure!(&prod == table.get(&z), "table {k}: product differs at {}", z.to_token());
            if table.get(&z).is_zero() {
                zeros += 1;
            }
        }
    }
    ensure!(zeros > 0, "no zero-capital node was exercised");
    Ok(format!("50 tables, depth 8, {zeros} zero-capital nodes"))
}

/// `12·e²` from below: `12·Σ_{k≤30} 2^k/k!`.
fn twelve_e_squared_floor() -> ExactRational {
    let mut term = ExactRational::one();
    let mut sum = ExactRational::one();
    for k in 1..=30 {
        term = &(&term * &q(2, 1)) * &q(1, k);
        sum = &sum + &term;
    }
    &sum * &q(12, 1)
}

fn criterion_5(sc: &Scenario, r: &ConstructionResult, elapsed: Duration) -> Outcome {
    ensure!(r.beta.len() == 28, "|beta| = {}, expected 28", r.beta.len());
    let t = r.t_values();
    ensure!(t.windows(2).all(|w| w[0] < w[1]), "t not strictly increasing: {t:?}");
    let set = sc.candidate_set();
    let mut mixed = Vec::new();
    let mut sum_eps = ExactRational::one();
    let mut prod = ExactRational::one();
    let mut start = 0usize;
    for (s, tr) in r.traces.iter().enumerate() {
        let eps = ExactRational::pow2(-(s as i64));
        if tr.mixed {
            mixed.push((s - 1, tr.coefficient.clone()));
            sum_eps = &sum_eps + &eps;
        }
        let seg = s + 2;
        let i = s as u32;
        let d = set.mixture(&mixed, &sc.alpha);
        let x = r.beta.prefix(start);
        let eval = |z: &BitString| d.eval(z).map_err(|e| e.to_string());
        let pair_at = |x: &BitString| -> Result<Vec<BitString>, String> {
            let dx = eval(x)?;
            let mut safe = Vec::new();
            for y in lex(seg) {
                if ratio_below(&dx, &eval(&x.concat(&y))?, i) {
                    safe.push(y);
                    if safe.len() == 2 {
                        break;
                    }
                }
            }
            Ok(safe)
        };
        let y_t = r.beta.slice(start + 1, start + seg);
        let y_a = r.beta.slice(start + seg + 1, start + 2 * seg);
        let pair_t = pair_at(&x)?;
        ensure!(pair_t.len() == 2, "stage {s}: fewer than two safe segments");
        ensure!(
            y_t == pair_t[tr.next_total as usize],
            "stage {s}: totality segment {} is not the codeword for {}",
            y_t.to_token(),
            tr.next_total
        );
        let xt = x.concat(&y_t);
        let pair_a = pair_at(&xt)?;
        ensure!(pair_a.len() == 2, "stage {s}: fewer than two safe alpha segments");
        let bit = sc.alpha.bit(tr.t).map_err(|e| e.to_string())?;
        ensure!(bit == tr.alpha_bit, "stage {s}: alpha_{} is {bit}, trace says {}", tr.t, tr.alpha_bit);
        ensure!(y_a == pair_a[bit as usize], "stage {s}: alpha segment {} is not the codeword", y_a.to_token());
        let after = r.beta.prefix(start + 2 * seg);
        let d_beta = eval(&after)?;
        ensure!(d_beta == tr.d_at_beta, "stage {s}: d(beta) recomputes to {d_beta}, trace {}", tr.d_at_beta);
        let onep = &ExactRational::one() + &eps;
        prod = &(&prod * &onep) * &onep;
        let bound = &sum_eps * &prod;
        ensure!(bound == tr.running_bound, "stage {s}: bound {bound}, trace {}", tr.running_bound);
        ensure!(d_beta < bound, "stage {s}: d(beta) = {d_beta} not below {bound}");
        start += 2 * seg;
    }
    let last = &r.traces.last().unwrap().d_at_beta;
    ensure!(*last < twelve_e_squared_floor(), "final d(beta) = {last} not below 12e^2");
    ensure!(elapsed < Duration::from_secs(60), "construction took {elapsed:?}");
    Ok(format!(
        "|beta| = 28, t = {t:?}, final d(beta) = {last} ~ {:.4}, {:.2?}",
        last.to_f64(),
        elapsed
    ))
}

fn criterion_6(sc: &Scenario, r: &ConstructionResult) -> Outcome {
    ensure!(!r.components.is_empty(), "nothing was mixed");
    let mut checked = 0usize;
    let mut zs = upto(8);
    for s in 0..=sc.stages {
        zs.extend(r.evaluation_set(s));
    }
    zs.sort();
    zs.dedup();
    for z in &zs {
        let total = r.final_d.eval(z).map_err(|e| e.to_string())?;
        for c in &r.components {
            let part = &c.coefficient * &r.candidate(c.index).eval(z).map_err(|e| e.to_string())?;
            ensure!(total >= part, "{} not dominated at {}", c.name, z.to_token());
            checked += 1;
        }
    }
    Ok(format!("{} components, {} strings, {checked} comparisons", r.components.len(), zs.len()))
}

fn criterion_7(sc: &Scenario, r: &ConstructionResult) -> Outcome {
    let ctx = DecoderContext::new(sc.candidate_set());
    let t = r.t_values();
    let t_last = *t.last().unwrap();
    let alpha = sc.alpha.prefix(t_last).map_err(|e| e.to_string())?;
    let flags = ctx.decode_totality(&r.beta, &alpha).map_err(|e| e.to_string())?;
    let mut declared = sc.flags();
    declared.resize(flags.len().max(declared.len()), false);
    ensure!(flags == declared, "decoded {flags:?}, declared {declared:?}");
    ensure!(flags == vec![true, false, true, true], "decoded {flags:?}");
    let rec = ctx.replay(&alpha, &r.beta, None);
    ensure!(rec.t_values() == t, "replay t {:?}, construction t {t:?}", rec.t_values());
    let trace = ctx.capital_trace(&alpha, &r.beta);
    let (n, last) = trace.last().cloned().unwrap();
    let target = ExactRational::pow2(i64::from(sc.stages) + 1);
    ensure!(last == target && target == q(16, 1), "capital at |a| = {n} is {last}, expected 16");
    for n in 0..t[0] as usize {
        let a = alpha.prefix(n);
        for m in 0..=r.beta.len() {
            let v = ctx.eval_e(&a, &r.beta.prefix(m));
            ensure!(v == ExactRational::one(), "e({}, beta[..{m}]) = {v} before t_0", a.to_token());
        }
    }
    Ok(format!("flags {flags:?}, t {t:?}, capital {last} at |a| = {n}"))
}

fn criterion_8() -> Outcome {
    let started = Instant::now();
    let sc = scenario("tiny");
    let r = run_construction(&sc).map_err(|e| e.to_string())?;
    let t = r.t_values();
    ensure!(t[0] == 1 && t[1] == 2, "t = {t:?}, expected t_0 = 1 and t_1 = 2");
    ensure!(prefix_len(2) == 18, "L(2) = {}", prefix_len(2));
    let ctx = Arc::new(DecoderContext::new(sc.candidate_set()));
    let e = DecoderMartingale(ctx.clone());
    let report = validate_bivariate(&e, 3, 12);
    if let Some(v) = report.violation {
        return Err(v.to_string());
    }
    let oracle = Transcription::new(sc.candidate_set(), 14);
    let mut pairs = 0usize;
    let mut malformed = 0usize;
    for a in upto(3) {
        for b in upto(12) {
            let lib = ctx.eval_e(&a, &b);
            let lit = oracle.e(&a, &b);
            ensure!(lib == lit, "e({}, {}) = {lib}, transcription {lit}", a.to_token(), b.to_token());
            if matches!(ctx.replay(&a, &b, None).end, ReplayEnd::Malformed { .. }) {
                malformed += 1;
            }
            pairs += 1;
        }
    }
    let elapsed = started.elapsed();
    ensure!(elapsed < Duration::from_secs(300), "took {elapsed:?}");
    Ok(format!(
        "{} pairs validated, {pairs} pairs agree with the transcription ({malformed} with a malformed segment), {:.2?}",
        report.pairs_checked, elapsed
    ))
}

fn run_cli(args: &[&std::ffi::OsStr]) -> Result<(), String> {
    let out = Command::new(env!("CARGO_BIN_EXE_pairlab"))
        .args(args)
        .output()
        .map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "pairlab {:?} failed: {}", args, String::from_utf8_lossy(&out.stderr));
    Ok(())
}

fn construct_and_decode(dir: &Path) -> Result<(), String> {
    let sc = scenario_path("four-candidates");
    run_cli(&[
        "construct".as_ref(),
        sc.as_os_str(),
        "--out".as_ref(),
        dir.as_os_str(),
    ])?;
    let beta = dir.join("beta.txt");
    run_cli(&[
        "decode".as_ref(),
        sc.as_os_str(),
        "--beta".as_ref(),
        beta.as_os_str(),
        "--out".as_ref(),
        dir.as_os_str(),
    ])
}

const OUTPUTS: [&str; 5] = ["beta.txt", "trace.csv", "mixture.txt", "replay.csv", "capital.csv"];

fn compare_golden(name: &str, actual: &[u8]) -> Result<(), String> {
    let path = golden_dir().join(name);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(path.parent().unwrap()).map_err(|e| e.to_string())?;
        std::fs::write(&path, actual).map_err(|e| e.to_string())?;
    }
    let expected = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
    ensure!(expected == actual, "{name} differs from the golden copy");
    Ok(())
}

fn criterion_9() -> Outcome {
    let first = tempfile::tempdir().map_err(|e| e.to_string())?;
    let second = tempfile::tempdir().map_err(|e| e.to_string())?;
    construct_and_decode(first.path())?;
    construct_and_decode(second.path())?;
    let mut bytes = 0usize;
    for name in OUTPUTS {
        let a = std::fs::read(first.path().join(name)).map_err(|e| e.to_string())?;
        let b = std::fs::read(second.path().join(name)).map_err(|e| e.to_string())?;
        ensure!(a == b, "{name} differs between runs");
        compare_golden(&format!("four-candidates/{name}"), &a)?;
        bytes += a.len();
    }
    let corpus = common::corpus_report();
    ensure!(corpus == common::corpus_report(), "corpus evaluation is not repeatable");
    compare_golden("corpus.txt", corpus.as_bytes())?;
    Ok(format!("{} files ({bytes} bytes) identical and golden, corpus step counts golden", OUTPUTS.len()))
}

fn main() -> ExitCode {
    let sc = scenario("four-candidates");
    let started = Instant::now();
    let construction = run_construction(&sc);
    let elapsed = started.elapsed();

    let mut failed = 0;
    let mut report = |n: u32, outcome: Outcome| match outcome {
        Ok(detail) => println!("criterion {n}: PASS {detail}"),
        Err(why) => {
            failed += 1;
            println!("criterion {n}: FAIL {why}");
        }
    };
    report(1, criterion_1());
    report(2, criterion_2());
    report(3, criterion_3());
    report(4, criterion_4());
    match &construction {
        Ok(r) => {
            report(5, criterion_5(&sc, r, elapsed));
            report(6, criterion_6(&sc, r));
            report(7, criterion_7(&sc, r));
        }
        Err(e) => {
            for n in 5..=7 {
                report(n, Err(format!("construction failed: {e}")));
            }
        }
    }
    report(8, criterion_8());
    report(9, criterion_9());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
