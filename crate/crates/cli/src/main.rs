use std::collections::BTreeSet;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};

use nptrace_core::randgen::{all_words, random_model, rng_from_seed, ModelParams};
use nptrace_core::rational::{fmt_decimal, fmt_exact, fmt_plain};
use nptrace_core::{
    bisim_decide, correspondence_check, extremal_value, normalize, observe, parse_model,
    parse_resolution, parse_term, repr_of_set, trace_equiv_bounded, upto_check,
    validate_fp_resolution, validate_resolution, Certificate, EquivWitness, ExtremalMode,
    InconclusiveReason, Label, Nplts, ParsedResolution, SemanticsKind, TraceValue, Verdict,
};

#[derive(Parser)]
#[command(name = "nptrace", version, about = "Exact may/must/may-must trace semantics for NPLTS")]
struct Cli {
    /// Emit machine-readable JSON instead of human-readable text.
    #[arg(long, global = true)]
    json: bool,
    /// Additionally render values as decimals (6 significant digits).
    #[arg(long, global = true)]
    decimal: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum SemanticsArg {
    May,
    Must,
    Maymust,
}

impl From<SemanticsArg> for SemanticsKind {
    fn from(s: SemanticsArg) -> Self {
        match s {
            SemanticsArg::May => SemanticsKind::May,
            SemanticsArg::Must => SemanticsKind::Must,
            SemanticsArg::Maymust => SemanticsKind::MayMust,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Bounded,
    Bisim,
    Upto,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the trace value of a state at a word.
    Trace(TraceArgs),
    /// Decide or refute trace equivalence of two states.
    Equiv(EquivArgs),
    /// Cross-validate trace values against the scheduler oracle.
    Oracle(OracleArgs),
    /// Normalize a term to its canonical convex set.
    Normalize(NormalizeArgs),
    /// Validate a resolution file against a model.
    Validate(ValidateArgs),
}

#[derive(Args)]
struct TraceArgs {
    model: PathBuf,
    state: String,
    /// Dot-separated labels; empty string for the empty word.
    word: String,
    #[arg(long, value_enum, default_value = "maymust")]
    semantics: SemanticsArg,
}

#[derive(Args)]
struct EquivArgs {
    model: PathBuf,
    left: String,
    right: String,
    #[arg(long, value_enum, default_value = "maymust")]
    semantics: SemanticsArg,
    #[arg(long, value_enum, default_value = "bounded")]
    mode: ModeArg,
    /// Word-length bound for bounded mode.
    #[arg(long, default_value_t = nptrace_core::equiv::DEFAULT_BOUND)]
    depth: usize,
    /// Pair bound for bisim mode.
    #[arg(long, default_value_t = nptrace_core::equiv::DEFAULT_MAX_PAIRS)]
    max_pairs: usize,
    /// Certificate file for upto mode.
    #[arg(long)]
    cert: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Model file; omitted when --random is used.
    model: Option<PathBuf>,
    state: Option<String>,
    word: Option<String>,
    /// Check N seeded random models instead of a single query.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 6)]
    max_states: usize,
    #[arg(long, default_value_t = 5)]
    max_len: usize,
}

#[derive(Args)]
struct NormalizeArgs {
    /// A term string, or a path to a file containing one.
    term: String,
}

#[derive(Args)]
struct ValidateArgs {
    model: PathBuf,
    resolution: PathBuf,
}

struct Report {
    command: &'static str,
    semantics: Option<SemanticsKind>,
    result: Value,
    exact: Vec<String>,
    human: String,
    seed: Option<u64>,
    exit: u8,
}

fn emit(report: Report, json: bool, decimal: bool) -> ExitCode {
    if json {
        let mut obj = json!({
            "command": report.command,
            "semantics": report.semantics.map(|k| k.name()),
            "result": report.result,
            "exact": report.exact,
        });
        if decimal {
            let decimals: Vec<String> = report
                .exact
                .iter()
                .map(|s| {
                    let q = nptrace_core::rational::parse_rational(s, 0, 0).expect("own output");
                    fmt_decimal(&q)
                })
                .collect();
            obj["decimal"] = json!(decimals);
        }
        if let Some(seed) = report.seed {
            obj["seed"] = json!(seed);
        }
        println!("{obj}");
    } else {
        println!("{}", report.human);
        if decimal && !report.exact.is_empty() {
            let decimals: Vec<String> = report
                .exact
                .iter()
                .map(|s| {
                    let q = nptrace_core::rational::parse_rational(s, 0, 0).expect("own output");
                    fmt_decimal(&q)
                })
                .collect();
            println!("decimal: {}", decimals.join(", "));
        }
    }
    ExitCode::from(report.exit)
}

fn fail(msg: impl std::fmt::Display, json: bool) -> ExitCode {
    if json {
        eprintln!("{}", json!({ "error": msg.to_string() }));
    } else {
        eprintln!("error: {msg}");
    }
    ExitCode::from(2)
}

fn parse_word(raw: &str, labels: &BTreeSet<Label>) -> Result<Vec<Label>, String> {
    if raw.is_empty() {
        return Ok(Vec::new());
    }
    if raw.contains('.') {
        let parts: Vec<Label> = raw.split('.').map(str::to_string).collect();
        for p in &parts {
            if !labels.contains(p) {
                return Err(format!("unknown label `{p}` in word"));
            }
        }
        return Ok(parts);
    }
    if labels.contains(raw) {
        return Ok(vec![raw.to_string()]);
    }
    // Bare word of single-character labels.
    let parts: Vec<Label> = raw.chars().map(|c| c.to_string()).collect();
    for p in &parts {
        if !labels.contains(p) {
            return Err(format!("unknown label `{p}` in word `{raw}`"));
        }
    }
    Ok(parts)
}

fn load_model(path: &PathBuf) -> Result<Nplts, String> {
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    parse_model(&text, None).map_err(|e| e.to_string())
}

fn value_json(v: &TraceValue) -> Value {
    match v {
        TraceValue::Interval(i) => json!({ "lo": fmt_exact(i.lo()), "hi": fmt_exact(i.hi()) }),
        TraceValue::Prob(p) => json!(fmt_exact(p)),
    }
}

fn run_trace(args: TraceArgs, json: bool, decimal: bool) -> ExitCode {
    let m = match load_model(&args.model) {
        Ok(m) => m,
        Err(e) => return fail(e, json),
    };
    let word = match parse_word(&args.word, m.labels()) {
        Ok(w) => w,
        Err(e) => return fail(e, json),
    };
    let kind: SemanticsKind = args.semantics.into();
    let value = match nptrace_core::trace_value(&m, &args.state, &word, kind) {
        Ok(v) => v,
        Err(e) => return fail(e, json),
    };
    emit(
        Report {
            command: "trace",
            semantics: Some(kind),
            result: value_json(&value),
            exact: value.exact_strings(),
            human: value.to_string(),
            seed: None,
            exit: 0,
        },
        json,
        decimal,
    )
}

fn verdict_report(v: &Verdict) -> (Value, Vec<String>, u8) {
    match v {
        Verdict::Equivalent(w) => {
            let witness = match w {
                EquivWitness::ExploredPairs(n) => json!({ "pairs_explored": n }),
                EquivWitness::Certificate(n) => json!({ "certificate_pairs": n }),
            };
            (json!({ "verdict": "equivalent", "witness": witness }), vec![], 0)
        }
        Verdict::Inequivalent { word, left, right } => {
            let mut exact = left.exact_strings();
            exact.extend(right.exact_strings());
            (
                json!({
                    "verdict": "inequivalent",
                    "word": word.join("."),
                    "left": value_json(left),
                    "right": value_json(right),
                }),
                exact,
                1,
            )
        }
        Verdict::Inconclusive(reason) => {
            let r = match reason {
                InconclusiveReason::BoundExhausted => json!("bound exhausted"),
                InconclusiveReason::CheckerIncomplete(why) => json!(format!("incomplete: {why}")),
            };
            (json!({ "verdict": "inconclusive", "reason": r }), vec![], 3)
        }
    }
}

fn run_equiv(args: EquivArgs, json: bool, decimal: bool) -> ExitCode {
    let m = match load_model(&args.model) {
        Ok(m) => m,
        Err(e) => return fail(e, json),
    };
    let kind: SemanticsKind = args.semantics.into();
    let verdict = match args.mode {
        ModeArg::Bounded => trace_equiv_bounded(&m, &args.left, &args.right, kind, args.depth),
        ModeArg::Bisim => bisim_decide(&m, &args.left, &args.right, kind, args.max_pairs),
        ModeArg::Upto => {
            let Some(cert_path) = &args.cert else {
                return fail("--mode upto requires --cert FILE", json);
            };
            let text = match fs::read_to_string(cert_path) {
                Ok(t) => t,
                Err(e) => return fail(format!("{}: {e}", cert_path.display()), json),
            };
            match Certificate::parse(&text) {
                Ok(cert) => upto_check(&m, &cert, kind),
                Err(e) => return fail(e, json),
            }
        }
    };
    let verdict = match verdict {
        Ok(v) => v,
        Err(e) => return fail(e, json),
    };
    let (result, exact, exit) = verdict_report(&verdict);
    emit(
        Report {
            command: "equiv",
            semantics: Some(kind),
            result,
            exact,
            human: verdict.to_string(),
            seed: None,
            exit,
        },
        json,
        decimal,
    )
}

fn oracle_single(m: &Nplts, state: &str, word: &[Label]) -> Result<(bool, Value, Vec<String>, String), String> {
    let ok = correspondence_check(m, state, word).map_err(|e| e.to_string())?;
    let (sup, _) = extremal_value(m, state, word, ExtremalMode::Sup).map_err(|e| e.to_string())?;
    let (inf, _) = extremal_value(m, state, word, ExtremalMode::Inf).map_err(|e| e.to_string())?;
    let set = nptrace_core::reach(m, state, word).map_err(|e| e.to_string())?;
    let interval = observe(&set, SemanticsKind::MayMust);
    let exact = vec![fmt_exact(&inf), fmt_exact(&sup)];
    let human = format!(
        "{}: interval {}, inf {}, sup {}",
        if ok { "pass" } else { "FAIL" },
        interval,
        fmt_plain(&inf),
        fmt_plain(&sup),
    );
    let result = json!({
        "pass": ok,
        "interval": value_json(&interval),
        "inf": fmt_exact(&inf),
        "sup": fmt_exact(&sup),
    });
    Ok((ok, result, exact, human))
}

fn run_oracle(args: OracleArgs, json: bool, decimal: bool) -> ExitCode {
    if let Some(n) = args.random {
        let mut rng = rng_from_seed(args.seed);
        let params = ModelParams { max_states: args.max_states, ..ModelParams::default() };
        let mut passed = 0usize;
        let mut failures: Vec<String> = Vec::new();
        for i in 0..n {
            let m = random_model(&mut rng, &params);
            let words = all_words(m.labels(), args.max_len);
            let mut ok = true;
            'model: for x in m.states() {
                for w in &words {
                    match correspondence_check(&m, x, w) {
                        Ok(true) => {}
                        Ok(false) => {
                            ok = false;
                            failures.push(format!("model {i}: state {x}, word {}", w.join(".")));
                            break 'model;
                        }
                        Err(e) => return fail(e, json),
                    }
                }
            }
            if ok {
                passed += 1;
            }
        }
        let human = format!("{passed}/{n} pass");
        let exit = if passed == n { 0 } else { 1 };
        return emit(
            Report {
                command: "oracle",
                semantics: None,
                result: json!({ "checked": n, "passed": passed, "failures": failures }),
                exact: vec![],
                human,
                seed: Some(args.seed),
                exit,
            },
            json,
            decimal,
        );
    }

    let (Some(model), Some(state), Some(word)) = (&args.model, &args.state, &args.word) else {
        return fail("oracle needs MODEL STATE WORD or --random N", json);
    };
    let m = match load_model(model) {
        Ok(m) => m,
        Err(e) => return fail(e, json),
    };
    let word = match parse_word(word, m.labels()) {
        Ok(w) => w,
        Err(e) => return fail(e, json),
    };
    match oracle_single(&m, state, &word) {
        Ok((ok, result, exact, human)) => emit(
            Report {
                command: "oracle",
                semantics: None,
                result,
                exact,
                human,
                seed: None,
                exit: if ok { 0 } else { 1 },
            },
            json,
            decimal,
        ),
        Err(e) => fail(e, json),
    }
}

fn run_normalize(args: NormalizeArgs, json: bool, decimal: bool) -> ExitCode {
    let text = if fs::metadata(&args.term).is_ok() {
        match fs::read_to_string(&args.term) {
            Ok(t) => t,
            Err(e) => return fail(e, json),
        }
    } else {
        args.term.clone()
    };
    let term = match parse_term(text.trim()) {
        Ok(t) => t,
        Err(e) => return fail(e, json),
    };
    let set = normalize(&term);
    let gens: Vec<String> = set.generators().iter().map(|g| format!("[{g}]")).collect();
    let repr = repr_of_set(&set);
    let mut exact = Vec::new();
    for g in set.generators() {
        for (_, w) in g.support() {
            exact.push(fmt_exact(w));
        }
        exact.push(fmt_exact(g.star_mass()));
    }
    let human = format!("generators: {}\nrepresentative: {repr}", gens.join(" "));
    emit(
        Report {
            command: "normalize",
            semantics: None,
            result: json!({
                "generators": set.generators().iter().map(|g| g.to_string()).collect::<Vec<_>>(),
                "representative": repr.to_string(),
            }),
            exact,
            human,
            seed: None,
            exit: 0,
        },
        json,
        decimal,
    )
}

fn run_validate(args: ValidateArgs, json: bool, decimal: bool) -> ExitCode {
    let m = match load_model(&args.model) {
        Ok(m) => m,
        Err(e) => return fail(e, json),
    };
    let text = match fs::read_to_string(&args.resolution) {
        Ok(t) => t,
        Err(e) => return fail(format!("{}: {e}", args.resolution.display()), json),
    };
    let parsed = match parse_resolution(&text) {
        Ok(p) => p,
        Err(e) => return fail(e, json),
    };
    let diags = match &parsed {
        ParsedResolution::Reactive(r) => validate_resolution(&m, r),
        ParsedResolution::Fp(r) => validate_fp_resolution(&m, r),
    };
    let diags = match diags {
        Ok(d) => d,
        Err(e) => return fail(e, json),
    };
    let ok = diags.is_empty();
    let human = if ok {
        "valid".to_string()
    } else {
        format!("invalid:\n  {}", diags.join("\n  "))
    };
    emit(
        Report {
            command: "validate",
            semantics: None,
            result: json!({ "valid": ok, "diagnostics": diags }),
            exact: vec![],
            human,
            seed: None,
            exit: if ok { 0 } else { 1 },
        },
        json,
        decimal,
    )
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Trace(args) => run_trace(args, cli.json, cli.decimal),
        Command::Equiv(args) => run_equiv(args, cli.json, cli.decimal),
        Command::Oracle(args) => run_oracle(args, cli.json, cli.decimal),
        Command::Normalize(args) => run_normalize(args, cli.json, cli.decimal),
        Command::Validate(args) => run_validate(args, cli.json, cli.decimal),
    }
}
