//! Command-line front end.
//!
//! Exit codes: 0 when everything passed, 1 when a check or the construction
//! failed, 2 for usage and I/O errors.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::bits::BitString;
use crate::bivariate::{from_univariate, to_univariate, validate_bivariate};
use crate::coding::{first_two, safe_extensions};
use crate::construction::{run_construction, write_outputs, EvalSetMode, Scenario};
use crate::decoder::{DecoderContext, ReplayEnd};
use crate::martingale::{
    decompose_odd_even, fix_oracle, random_fair_table, savings_transform, validate_fairness, Martingale,
    MartingaleFn, Table,
};
use crate::mdsl::parse;
use crate::source::BitSource;
use crate::suite::{describe_results, run_suite, SuiteOptions};

#[derive(Debug, Parser)]
#[command(name = "pairlab", version, about = "Exact martingale and pair-betting laboratory")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

/// Overrides for scenario fields.
#[derive(Debug, Clone, Args, Default)]
pub struct ScenarioFlags {
    /// Number of the last stage to run.
    #[arg(long)]
    pub stages: Option<u32>,
    /// Evaluation set: full or prefix.
    #[arg(long)]
    pub eval_set: Option<EvalSetMode>,
    #[arg(long)]
    pub step_budget: Option<u64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a scenario and check its declared-total candidates.
    Validate {
        scenario: PathBuf,
        #[command(flatten)]
        flags: ScenarioFlags,
    },
    /// List the safe extensions of a string for a table or a program.
    Search {
        /// Martingale table file (`<bits> <num/den>` per line).
        #[arg(long, conflicts_with = "program", required_unless_present = "program")]
        table: Option<PathBuf>,
        /// DSL program text.
        #[arg(long)]
        program: Option<String>,
        /// Oracle bits for a program (`-` for none).
        #[arg(long, default_value = "-")]
        oracle: String,
        #[arg(long, default_value_t = 10_000)]
        budget: u64,
        /// The string to extend (`-` for the empty string).
        #[arg(long, default_value = "-")]
        x: String,
        #[arg(long, default_value_t = 0)]
        i: u32,
    },
    /// Run the construction and write beta.txt, trace.csv and mixture.txt.
    Construct {
        scenario: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        flags: ScenarioFlags,
    },
    /// Decode a beta produced by `construct` and trace the pair martingale.
    Decode {
        scenario: PathBuf,
        /// File holding beta (as written by `construct`).
        #[arg(long)]
        beta: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Number of alpha bits available to the decoder; defaults to the
        /// scenario's alpha length.
        #[arg(long)]
        alpha_len: Option<u64>,
        #[command(flatten)]
        flags: ScenarioFlags,
    },
    /// Check the univariate/bivariate round trip, savings and decomposition on a table.
    Roundtrip {
        #[arg(long, conflicts_with = "seed", required_unless_present = "seed")]
        table: Option<PathBuf>,
        /// Generate a random fair table with this seed instead.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 6)]
        depth: u32,
    },
    /// Run the full property suite.
    Check {
        /// Scenario for the construction properties (default: built-in).
        scenario: Option<PathBuf>,
        /// Replace the savings transform with a subtly unfair copy.
        #[arg(long)]
        inject_fault: bool,
    },
}

/// A failure that maps to an exit code.
#[derive(Debug)]
pub enum Failure {
    /// Exit 1.
    Check(String),
    /// Exit 2.
    Usage(String),
}

type CmdResult = Result<String, Failure>;

fn usage<E: std::fmt::Display>(e: E) -> Failure {
    Failure::Usage(e.to_string())
}

fn load_scenario(path: &Path, flags: &ScenarioFlags) -> Result<Scenario, Failure> {
    let mut sc = Scenario::load(path).map_err(usage)?;
    if let Some(s) = flags.stages {
        sc.stages = s;
    }
    if let Some(m) = flags.eval_set {
        sc.eval_set = m;
    }
    if let Some(b) = flags.step_budget {
        if b == 0 {
            return Err(Failure::Usage("step budget must be positive".into()));
        }
        sc.step_budget = b;
    }
    Ok(sc)
}

fn config_block(command: &str, sc: Option<&Scenario>, extra: &[(&str, String)]) -> String {
    let mut out = format!("# command = {command}\n");
    for (k, v) in extra {
        writeln!(out, "# {k} = {v}").expect("write to string");
    }
    if let Some(sc) = sc {
        for line in sc.describe().lines() {
            writeln!(out, "# {line}").expect("write to string");
        }
    }
    out
}

fn bits_arg(name: &str, s: &str) -> Result<BitString, Failure> {
    BitString::from_token(s.trim()).map_err(|e| Failure::Usage(format!("--{name}: {e}")))
}

fn cmd_validate(path: &Path, flags: &ScenarioFlags) -> CmdResult {
    let sc = load_scenario(path, flags)?;
    let mut out = config_block("validate", Some(&sc), &[("scenario", path.display().to_string())]);
    let mut failed = Vec::new();
    writeln!(out, "check depth {}", sc.check_depth()).expect("write to string");
    for (name, report) in sc.check_candidates() {
        writeln!(out, "{name}: {report}").expect("write to string");
        if !report.passed() {
            failed.push(format!("{name}: {report}"));
        }
    }
    for c in sc.candidates.iter().filter(|c| !c.declared_total) {
        writeln!(out, "{}: declared partial, not checked", c.name).expect("write to string");
    }
    if failed.is_empty() {
        Ok(out)
    } else {
        Err(Failure::Check(format!("{out}failed: {}", failed.join("; "))))
    }
}

fn cmd_search(
    table: Option<&Path>,
    program: Option<&str>,
    oracle: &str,
    budget: u64,
    x: &str,
    i: u32,
) -> CmdResult {
    let x = bits_arg("x", x)?;
    let (m, source): (MartingaleFn, String) = match (table, program) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            let t = Table::from_text(&text).map_err(usage)?;
            (MartingaleFn::new(t), format!("table {}", path.display()))
        }
        (None, Some(p)) => {
            let prog = parse(p).map_err(usage)?;
            let oracle = bits_arg("oracle", oracle)?;
            (fix_oracle(&prog, BitSource::explicit(oracle), budget), format!("program {prog}"))
        }
        (None, None) => return Err(Failure::Usage("give --table or --program".into())),
    };
    let mut out = config_block(
        "search",
        None,
        &[("martingale", source), ("x", x.to_token()), ("i", i.to_string())],
    );
    let list = safe_extensions(&m, &x, i).map_err(|e| Failure::Check(e.to_string()))?;
    writeln!(out, "d(x) = {}", m.eval(&x).map_err(|e| Failure::Check(e.to_string()))?).expect("write");
    for y in &list {
        let v = m.eval(&x.concat(y)).map_err(|e| Failure::Check(e.to_string()))?;
        writeln!(out, "{} {}", y.to_token(), v).expect("write to string");
    }
    writeln!(out, "count {} of {}", list.len(), 1u64 << (i + 2)).expect("write to string");
    let pair = first_two(&m, &x, i).map_err(|e| Failure::Check(e.to_string()))?;
    writeln!(out, "first {}\nsecond {}", pair.first.to_token(), pair.second.to_token()).expect("write");
    Ok(out)
}

fn cmd_construct(path: &Path, out_dir: &Path, flags: &ScenarioFlags) -> CmdResult {
    let sc = load_scenario(path, flags)?;
    let mut out = config_block(
        "construct",
        Some(&sc),
        &[
            ("scenario", path.display().to_string()),
            ("out", out_dir.display().to_string()),
        ],
    );
    let r = run_construction(&sc).map_err(|e| Failure::Check(format!("{out}error: {e}")))?;
    write_outputs(&r, out_dir).map_err(|e| Failure::Usage(format!("{}: {e}", out_dir.display())))?;
    writeln!(out, "beta {}", r.beta.to_token()).expect("write to string");
    writeln!(out, "length {}", r.beta.len()).expect("write to string");
    writeln!(out, "t {:?}", r.t_values()).expect("write to string");
    out.push_str(&r.mixture_description());
    Ok(out)
}

fn cmd_decode(path: &Path, beta_path: &Path, out_dir: &Path, alpha_len: Option<u64>, flags: &ScenarioFlags) -> CmdResult {
    let sc = load_scenario(path, flags)?;
    let text = std::fs::read_to_string(beta_path).map_err(|e| Failure::Usage(format!("{}: {e}", beta_path.display())))?;
    let beta = bits_arg("beta", &text)?;
    let len = alpha_len
        .or(sc.alpha.available())
        .ok_or_else(|| Failure::Usage("seeded alpha without a length: pass --alpha-len".into()))?;
    let alpha = sc.alpha.prefix(len).map_err(usage)?;
    let mut out = config_block(
        "decode",
        Some(&sc),
        &[
            ("scenario", path.display().to_string()),
            ("beta", beta.to_token()),
            ("alpha_len", len.to_string()),
            ("out", out_dir.display().to_string()),
        ],
    );
    // the decoder sees only the public candidate programs
    let ctx = DecoderContext::new(sc.candidate_set());
    let rec = ctx.replay(&alpha, &beta, None);
    let mut replay = String::from("stage,totality,t,alpha_bit,consumed\n");
    for st in &rec.stages {
        writeln!(replay, "{},{},{},{},{}", st.s, st.totality, st.t, st.alpha_bit, st.consumed).expect("write");
    }
    let horizon = rec.stages.last().map_or(0, |st| st.t as usize);
    let mut capital = String::from("a_len,e\n");
    for (n, v) in ctx.capital_trace(&alpha.prefix(horizon), &beta) {
        writeln!(capital, "{n},{v}").expect("write to string");
    }
    std::fs::create_dir_all(out_dir).map_err(|e| Failure::Usage(format!("{}: {e}", out_dir.display())))?;
    for (name, body) in [("replay.csv", &replay), ("capital.csv", &capital)] {
        std::fs::write(out_dir.join(name), body).map_err(|e| Failure::Usage(format!("{name}: {e}")))?;
    }
    writeln!(out, "flags {:?}", rec.flags()).expect("write to string");
    writeln!(out, "t {:?}", rec.t_values()).expect("write to string");
    writeln!(out, "final capital {}", ctx.eval_e(&alpha.prefix(horizon), &beta)).expect("write");
    match ctx.decode_totality(&beta, &alpha) {
        Ok(_) => Ok(out),
        Err(e) => {
            debug_assert!(!matches!(rec.end, ReplayEnd::Exhausted));
            Err(Failure::Check(format!("{out}{e}")))
        }
    }
}

fn cmd_roundtrip(table: Option<&Path>, seed: Option<u64>, depth: u32) -> CmdResult {
    use rand::SeedableRng;
    let (f, source) = match (table, seed) {
        (Some(path), _) => {
            let text = std::fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            (Table::from_text(&text).map_err(usage)?, format!("table {}", path.display()))
        }
        (None, Some(seed)) => {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            (random_fair_table(&mut rng, depth), format!("random seed {seed}"))
        }
        (None, None) => return Err(Failure::Usage("give --table or --seed".into())),
    };
    let depth = depth.min(f.depth());
    let f = MartingaleFn::new(f);
    let mut out = config_block("roundtrip", None, &[("martingale", source), ("depth", depth.to_string())]);
    let mut failures = Vec::new();
    let mut report = |name: &str, ok: bool, detail: String| {
        writeln!(out, "{} {name} {detail}", if ok { "PASS" } else { "FAIL" }).expect("write");
        if !ok {
            failures.push(name.to_string());
        }
    };
    let fair = validate_fairness(&f, depth);
    report("fairness", fair.passed(), fair.to_string());
    if fair.passed() {
        let g = from_univariate(&f);
        let back = to_univariate(&g);
        let same = crate::bits::all_up_to(depth).all(|z| back.eval(&z) == f.eval(&z));
        report("round-trip", same, format!("depth {depth}"));
        let half = depth / 2;
        let biv = validate_bivariate(&g, half, half);
        report("bivariate", biv.passed(), format!("{} pairs", biv.pairs_checked));
        match savings_transform(&f) {
            Ok(sv) => {
                let sf = validate_fairness(&sv, depth);
                report("savings-fairness", sf.passed(), sf.to_string());
            }
            Err(e) => report("savings-fairness", false, e.to_string()),
        }
        match decompose_odd_even(&f, depth) {
            Ok((fo, fe)) => {
                let ok = crate::bits::all_up_to(depth).all(|z| match (fo.eval(&z), fe.eval(&z), f.eval(&z)) {
                    (Ok(a), Ok(b), Ok(c)) => &a * &b == c,
                    _ => false,
                });
                report("odd-even-product", ok, format!("depth {depth}"));
            }
            Err(e) => report("odd-even-product", false, e.to_string()),
        }
    }
    if failures.is_empty() {
        Ok(out)
    } else {
        Err(Failure::Check(out))
    }
}

fn cmd_check(scenario: Option<&Path>, inject_fault: bool) -> CmdResult {
    let sc = scenario
        .map(|p| load_scenario(p, &ScenarioFlags::default()))
        .transpose()?;
    let mut out = config_block(
        "check",
        sc.as_ref(),
        &[
            ("scenario", scenario.map_or("built-in".into(), |p| p.display().to_string())),
            ("inject_fault", inject_fault.to_string()),
        ],
    );
    let results = run_suite(&SuiteOptions {
        inject_fault,
        scenario: sc,
    });
    out.push_str(&describe_results(&results));
    match results.iter().find(|r| !r.passed()) {
        None => Ok(out),
        Some(first) => Err(Failure::Check(format!("{out}first failing property: {}", first.name))),
    }
}

/// Executes a parsed command.
pub fn execute(cli: &Cli) -> CmdResult {
    match &cli.command {
        Command::Validate { scenario, flags } => cmd_validate(scenario, flags),
        Command::Search {
            table,
            program,
            oracle,
            budget,
            x,
            i,
        } => cmd_search(table.as_deref(), program.as_deref(), oracle, *budget, x, *i),
        Command::Construct { scenario, out, flags } => cmd_construct(scenario, out, flags),
        Command::Decode {
            scenario,
            beta,
            out,
            alpha_len,
            flags,
        } => cmd_decode(scenario, beta, out, *alpha_len, flags),
        Command::Roundtrip { table, seed, depth } => cmd_roundtrip(table.as_deref(), *seed, *depth),
        Command::Check {
            scenario,
            inject_fault,
        } => cmd_check(scenario.as_deref(), *inject_fault),
    }
}

/// Parses arguments, runs the command and prints its report.
pub fn run<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(&cli) {
        Ok(report) => {
            print!("{report}");
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(Failure::Check(report)) => {
            println!("{report}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
