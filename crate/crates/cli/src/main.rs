use std::fs;
use std::io::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive};
use serde_json::{json, Value};
use shufflegf::dfinite::{ode_series, ode_to_grammar, split_ode, verify_ode_grammar, Ode};
use shufflegf::grammar::{
    ambiguity_probe, check_class, check_proper, count_derivations, dependency_graph, enumerate,
    Grammar, IssueKind, Severity,
};
use shufflegf::series::{
    binomial_convolution, borel, cauchy_product, closed_form_prefix_walks, egf_shuffle,
    estimate_growth, hadamard, laplace, parse_sequence, quasi_inverse, to_csv,
};
use shufflegf::shuffle::{point_classic, point_terminal, shuffle_closure_slice, shuffle_words};
use shufflegf::word::word_length;
use shufflegf::{CoeffSeq, CountView, LanguageSlice, Role, Word};

const DYCK_UD: &str = "D -> _ | \"u\" D \"d\" D\n";
const DYCK_LR: &str = "E -> _ | \"l\" E \"r\" E\n";
const PREFIX_UD: &str = "P -> D | D \"u\" P\n";
const PREFIX_LR: &str = "Q -> E | E \"l\" Q\n";

#[derive(Parser)]
#[command(
    name = "shufflegf",
    version,
    about = "Shuffle products, grammars and their counting sequences"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// All interleavings of two words; the second word is barred once.
    Shuffle {
        w1: String,
        w2: String,
        /// Do not bar the second word.
        #[arg(long)]
        no_bar: bool,
    },
    /// Point every position of a word (or of each word in a file, one per line).
    Point {
        input: String,
        #[arg(
            long,
            conflicts_with = "terminal",
            required_unless_present = "terminal"
        )]
        classic: bool,
        #[arg(long)]
        terminal: bool,
    },
    /// Shuffle closure of a word or of a grammar's language.
    Closure {
        input: String,
        #[arg(long)]
        max: usize,
        #[arg(long)]
        words: bool,
    },
    /// Words of a grammar up to a length bound.
    Enumerate {
        grammar: String,
        #[arg(long)]
        max: usize,
        #[arg(long)]
        words: bool,
        /// Count derivations instead of distinct words.
        #[arg(long)]
        multiplicity: bool,
    },
    /// Shuffle dependency graph.
    Deps { grammar: String },
    /// Properness check.
    Proper { grammar: String },
    /// Smallest grammar class the rules fit in.
    Class { grammar: String },
    /// Compare derivation counts with distinct-word counts.
    Ambiguity {
        grammar: String,
        #[arg(long)]
        max: usize,
    },
    /// Derivation counts without building words.
    Count {
        grammar: String,
        #[arg(long)]
        max: usize,
    },
    /// Coefficient-sequence operations.
    Series(SeriesArgs),
    /// Fit `c_n ≈ κ αⁿ nʳ` over a window.
    Growth {
        seq: String,
        /// Inclusive window `a:b`.
        #[arg(long)]
        window: String,
    },
    /// Linear ODEs with polynomial coefficients.
    Ode {
        action: OdeAction,
        ode: String,
        #[arg(long, default_value_t = 8)]
        max: usize,
    },
    /// Quarter-plane walks as a shuffle of two Dyck languages.
    Walks {
        #[arg(long)]
        mode: WalkMode,
        #[arg(long)]
        max: usize,
    },
    /// Parse and normalise a word.
    Word { word: String },
}

#[derive(Args)]
struct SeriesArgs {
    op: SeriesOp,
    seq: String,
    other: Option<String>,
    /// Role of the input sequences.
    #[arg(long, value_enum, default_value_t = RoleArg::Ogf)]
    role: RoleArg,
    /// Print `n,value` CSV instead of JSON.
    #[arg(long)]
    csv: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum SeriesOp {
    Conv,
    Cauchy,
    Hadamard,
    Borel,
    Laplace,
    Qinv,
    EgfShuffle,
}

#[derive(Clone, Copy, ValueEnum)]
enum RoleArg {
    Ogf,
    Egf,
}

#[derive(Clone, Copy, ValueEnum)]
enum OdeAction {
    Solve,
    Split,
    Compile,
    Verify,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WalkMode {
    Closed,
    Prefix,
}

struct Failure(String);

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure(e.to_string())
    }
}

type Outcome = Result<Output, Failure>;

enum Output {
    Json(Value),
    Text(String),
}

fn read_arg(arg: &str) -> Result<String, Failure> {
    match arg.strip_prefix('@') {
        Some(path) => {
            fs::read_to_string(path).map_err(|e| Failure(format!("cannot read `{path}`: {e}")))
        }
        None => Ok(arg.to_string()),
    }
}

fn grammar_arg(arg: &str) -> Result<Grammar, Failure> {
    Ok(Grammar::parse(&read_arg(arg)?)?)
}

fn sequence_arg(arg: &str, role: Role) -> Result<CoeffSeq, Failure> {
    Ok(CoeffSeq::new(parse_sequence(&read_arg(arg)?)?, role))
}

/// Integers up to 2⁵³ as JSON numbers, everything else as decimal strings.
fn number(q: &BigRational) -> Value {
    const LIMIT: i64 = 1 << 53;
    if q.denom().is_one() {
        if let Some(v) = q.numer().to_i64().filter(|v| v.abs() <= LIMIT) {
            return json!(v);
        }
    }
    Value::String(q.to_string())
}

fn integer(n: &BigInt) -> Value {
    number(&BigRational::from_integer(n.clone()))
}

fn seq_json(s: &CoeffSeq) -> Value {
    Value::Array(s.coeffs().iter().map(number).collect())
}

fn words_json(words: &[Word]) -> Value {
    Value::Array(words.iter().map(|w| Value::String(w.to_string())).collect())
}

fn buckets_json(slice: &LanguageSlice, multiplicity: bool) -> Value {
    Value::Array(
        slice
            .buckets()
            .map(|(_, bucket)| {
                Value::Array(
                    bucket
                        .iter()
                        .map(|(w, m)| {
                            if multiplicity {
                                json!([w.to_string(), m])
                            } else {
                                json!(w.to_string())
                            }
                        })
                        .collect(),
                )
            })
            .collect(),
    )
}

fn sorted(mut words: Vec<Word>) -> Vec<Word> {
    words.sort();
    words
}

fn run(command: Command) -> Outcome {
    Ok(Output::Json(match command {
        Command::Shuffle { w1, w2, no_bar } => {
            let (w1, w2): (Word, Word) = (read_arg(&w1)?.parse()?, read_arg(&w2)?.parse()?);
            words_json(&sorted(shuffle_words(&w1, &w2, !no_bar)))
        }
        Command::Point { input, classic, .. } => {
            let text = read_arg(&input)?;
            let words = text
                .lines()
                .map(str::trim)
                .filter(|l| !l.is_empty())
                .map(str::parse)
                .collect::<Result<Vec<Word>, _>>()?;
            let max_len = words.iter().map(word_length).max().unwrap_or(0);
            let slice = LanguageSlice::from_words(words, max_len);
            let pointed = if classic {
                point_classic(&slice)
            } else {
                point_terminal(&slice)
            };
            let mut out = Vec::new();
            for (w, m) in pointed.iter() {
                out.extend(std::iter::repeat_n(w.clone(), m as usize));
            }
            words_json(&sorted(out))
        }
        Command::Closure { input, max, words } => {
            let base = if input.starts_with('@') {
                enumerate(&grammar_arg(&input)?, max)?
            } else {
                LanguageSlice::from_words([input.parse::<Word>()?], max)
            };
            let closure = shuffle_closure_slice(&base, max)?;
            let mut out = json!({
                "set": seq_json(&closure.counts(CountView::Set)),
                "multiplicity": seq_json(&closure.counts(CountView::Multiplicity)),
            });
            if words {
                out["words"] = buckets_json(&closure, true);
            }
            out
        }
        Command::Enumerate {
            grammar,
            max,
            words,
            multiplicity,
        } => {
            let slice = enumerate(&grammar_arg(&grammar)?, max)?;
            let view = if multiplicity {
                CountView::Multiplicity
            } else {
                CountView::Set
            };
            let mut out = json!({ "counts": seq_json(&slice.counts(view)) });
            if words {
                out["words"] = buckets_json(&slice, multiplicity);
            }
            out
        }
        Command::Deps { grammar } => {
            let d = dependency_graph(&grammar_arg(&grammar)?);
            json!({
                "nodes": d.nodes,
                "edges": d.edges.iter().map(|(a, b)| json!([a, b])).collect::<Vec<_>>(),
                "acyclic": d.is_acyclic(),
            })
        }
        Command::Proper { grammar } => {
            let report = check_proper(&grammar_arg(&grammar)?);
            let issues: Vec<Value> = report
                .issues
                .iter()
                .map(|i| {
                    json!({
                        "severity": match i.severity {
                            Severity::Error => "error",
                            Severity::Warning => "warning",
                        },
                        "kind": match i.kind {
                            IssueKind::NonShrinkingCycle => "non-shrinking-cycle",
                            IssueKind::NullableClosure => "nullable-closure",
                            IssueKind::NullableShuffleOperand => "nullable-shuffle-operand",
                            IssueKind::EmptyLanguage => "empty-language",
                        },
                        "chain": i.chain,
                        "line": i.line,
                        "message": i.message,
                    })
                })
                .collect();
            json!({ "proper": report.proper, "issues": issues })
        }
        Command::Class { grammar } => {
            json!({ "class": check_class(&grammar_arg(&grammar)?).name() })
        }
        Command::Ambiguity { grammar, max } => {
            let r = ambiguity_probe(&grammar_arg(&grammar)?, max)?;
            json!({
                "unambiguous": r.unambiguous,
                "first_ambiguous_length": r.first_ambiguous_length,
                "witness": r.witness.map(|(w, m)| json!({ "word": w.to_string(), "derivations": m })),
                "set": seq_json(&r.set_counts),
                "multiplicity": seq_json(&r.multiplicity_counts),
            })
        }
        Command::Count { grammar, max } => {
            json!({ "counts": seq_json(&count_derivations(&grammar_arg(&grammar)?, max)?) })
        }
        Command::Series(args) => return series(args),
        Command::Growth { seq, window } => {
            let (a, b) = window
                .split_once(':')
                .and_then(|(a, b)| {
                    Some((
                        a.trim().parse::<usize>().ok()?,
                        b.trim().parse::<usize>().ok()?,
                    ))
                })
                .ok_or_else(|| Failure(format!("window must look like `a:b`, got `{window}`")))?;
            let est = estimate_growth(&sequence_arg(&seq, Role::Ogf)?, a..=b)?;
            json!({ "alpha": est.alpha, "r": est.r, "log_kappa": est.log_kappa, "residual": est.residual })
        }
        Command::Ode { action, ode, max } => return ode_command(action, &ode, max),
        Command::Walks { mode, max } => walks(mode, max)?,
        Command::Word { word } => {
            let w: Word = read_arg(&word)?.parse()?;
            json!({
                "word": w.to_string(),
                "length": word_length(&w),
                "letters": w.letter_count(),
                "marked": w.marked_count(),
            })
        }
    }))
}

fn series(args: SeriesArgs) -> Outcome {
    let role = match args.role {
        RoleArg::Ogf => Role::Ogf,
        RoleArg::Egf => Role::Egf,
    };
    let s = sequence_arg(&args.seq, role)?;
    let second = || -> Result<CoeffSeq, Failure> {
        let other = args
            .other
            .as_deref()
            .ok_or_else(|| Failure("this operation needs two sequences".into()))?;
        sequence_arg(other, role)
    };
    let out = match args.op {
        SeriesOp::Conv => binomial_convolution(&s, &second()?)?,
        SeriesOp::Cauchy => cauchy_product(&s, &second()?)?,
        SeriesOp::Hadamard => hadamard(&s, &second()?)?,
        SeriesOp::EgfShuffle => egf_shuffle(&s, &second()?)?,
        SeriesOp::Borel => borel(&s)?,
        SeriesOp::Laplace => laplace(&s)?,
        SeriesOp::Qinv => quasi_inverse(&s)?,
    };
    Ok(if args.csv {
        Output::Text(to_csv(&out))
    } else {
        Output::Json(json!({ "role": out.role().to_string(), "coeffs": seq_json(&out) }))
    })
}

fn ode_command(action: OdeAction, text: &str, max: usize) -> Outcome {
    let ode = Ode::parse(&read_arg(text)?)?;
    Ok(match action {
        OdeAction::Solve => Output::Json(
            json!({ "ode": ode.to_string(), "series": seq_json(&ode_series(&ode, max)?) }),
        ),
        OdeAction::Split => Output::Text(split_ode(&ode).to_string()),
        OdeAction::Compile => {
            let g = ode_to_grammar(&ode)?;
            Output::Json(json!({ "P": g.p.to_string(), "N": g.n.to_string() }))
        }
        OdeAction::Verify => {
            let r = verify_ode_grammar(&ode, max)?;
            Output::Json(json!({
                "result": if r.pass { "PASS" } else { "FAIL" },
                "series": seq_json(&r.expected),
                "p": seq_json(&r.p_counts),
                "n": seq_json(&r.n_counts),
                "difference": r.difference().iter().map(integer).collect::<Vec<_>>(),
                "first_mismatch": r.first_mismatch,
            }))
        }
    })
}

fn walks(mode: WalkMode, max: usize) -> Result<Value, Failure> {
    let (d, e, start_d, start_e) = match mode {
        WalkMode::Closed => ("", "", "D", "E"),
        WalkMode::Prefix => (PREFIX_UD, PREFIX_LR, "P", "Q"),
    };
    let text = format!("S -> shuffle({start_d}, {start_e})\n{d}{e}{DYCK_UD}{DYCK_LR}");
    let g = Grammar::parse(&text)?;
    let counts = enumerate(&g, max)?.counts(CountView::Set);
    let factor = enumerate(&g.with_start(start_d)?, max)?.counts(CountView::Set);
    let mut out = json!({
        "mode": match mode {
            WalkMode::Closed => "closed",
            WalkMode::Prefix => "prefix",
        },
        "counts": seq_json(&counts),
        "convolution": seq_json(&binomial_convolution(&factor, &factor)?),
    });
    if mode == WalkMode::Prefix {
        let closed: Vec<Value> = (0..=max)
            .map(|n| integer(&closed_form_prefix_walks(n).into()))
            .collect();
        out["closed_form"] = Value::Array(closed);
    }
    Ok(out)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(output) => {
            let mut stdout = std::io::stdout().lock();
            let _ = match output {
                Output::Json(v) => writeln!(stdout, "{v}"),
                Output::Text(t) => write!(stdout, "{t}"),
            };
            ExitCode::SUCCESS
        }
        Err(Failure(message)) => {
            eprintln!("error: {message}");
            ExitCode::from(1)
        }
    }
}
