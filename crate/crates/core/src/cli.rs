//! Command-line frontend. Every subcommand prints one JSON report.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::cfl::Cfg;
use crate::corpus;
use crate::error::Error;
use crate::ops;
use crate::pda::Bpda;
use crate::relations::TwoTapeBa;
use crate::words::LassoWord;

#[derive(Debug, Parser)]
#[command(
    name = "omegamb",
    version,
    about = "Deciders for context-free ω-languages on ultimately periodic words"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Does the BPDA accept the lasso?
    MemberLasso {
        #[arg(long)]
        bpda: PathBuf,
        #[arg(long)]
        lasso: String,
    },
    /// Is the BPDA's ω-language empty?
    Empty {
        #[arg(long)]
        bpda: PathBuf,
    },
    /// Enumerate accepting runs on a lasso within step and stack bounds.
    CountRuns {
        #[arg(long)]
        bpda: PathBuf,
        #[arg(long)]
        lasso: String,
        #[arg(long, default_value_t = 64)]
        steps: usize,
        #[arg(long, default_value_t = 16)]
        stack: usize,
    },
    /// Membership in the adherence of L(G).
    Adherence {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        lasso: String,
    },
    /// Membership in the δ-limit of L(G).
    DeltaLimit {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        lasso: String,
    },
    /// Membership in L(G)^ω.
    OmegaPowerMember {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        lasso: String,
    },
    /// Count factorizations of a lasso into words of L(G).
    Decompose {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long)]
        lasso: String,
        #[arg(long, default_value_t = 12)]
        bound: usize,
    },
    /// Is the pair accepted by the 2-tape automaton?
    RelMember {
        #[arg(long)]
        rel: PathBuf,
        #[arg(long = "in")]
        input: String,
        #[arg(long = "out")]
        output: String,
    },
    /// Cardinality class of the accepting computations on a pair.
    RelClassify {
        #[arg(long)]
        rel: PathBuf,
        #[arg(long = "in")]
        input: String,
        #[arg(long = "out")]
        output: String,
    },
    /// Number of leftmost derivations of a finite word, capped.
    ParseCount {
        #[arg(long)]
        grammar: PathBuf,
        #[arg(long, allow_hyphen_values = true)]
        word: String,
        #[arg(long, default_value_t = crate::cfl::DEFAULT_CAP)]
        cap: u64,
    },
    /// The built-in example languages.
    Corpus {
        #[command(subcommand)]
        action: CorpusAction,
    },
}

#[derive(Debug, Subcommand)]
pub enum CorpusAction {
    List,
    Dump {
        name: String,
    },
    /// Compare grammars and deciders against direct predicates.
    Check {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, default_value_t = 7)]
        max_len: usize,
    },
}

fn load_json(path: &Path) -> Result<String, Error> {
    let text = std::fs::read_to_string(path)?;
    let v: Value = serde_json::from_str(&text)?;
    // accept `corpus dump` output directly
    match v.get("object") {
        Some(inner) => Ok(inner.to_string()),
        None => Ok(text),
    }
}

fn grammar(path: &Path) -> Result<Cfg, Error> {
    Cfg::from_json(&load_json(path)?)
}

fn bpda(path: &Path) -> Result<Bpda, Error> {
    Bpda::from_json(&load_json(path)?)
}

fn relation(path: &Path) -> Result<TwoTapeBa, Error> {
    TwoTapeBa::from_json(&load_json(path)?)
}

fn lasso(s: &str) -> Result<LassoWord, Error> {
    s.parse()
}

fn merge(out: &mut Map<String, Value>, v: impl Serialize) -> Result<(), Error> {
    match serde_json::to_value(v)? {
        Value::Object(m) => out.extend(m),
        other => {
            out.insert("value".into(), other);
        }
    }
    Ok(())
}

fn query(cmd: &Command) -> Value {
    let path = |p: &PathBuf| p.display().to_string();
    match cmd {
        Command::MemberLasso { bpda, lasso } => json!({"command": "member-lasso", "bpda": path(bpda), "lasso": lasso}),
        Command::Empty { bpda } => json!({"command": "empty", "bpda": path(bpda)}),
        Command::CountRuns {
            bpda,
            lasso,
            steps,
            stack,
        } => json!({"command": "count-runs", "bpda": path(bpda), "lasso": lasso, "steps": steps, "stack": stack}),
        Command::Adherence { grammar, lasso } => {
            json!({"command": "adherence", "grammar": path(grammar), "lasso": lasso})
        }
        Command::DeltaLimit { grammar, lasso } => {
            json!({"command": "delta-limit", "grammar": path(grammar), "lasso": lasso})
        }
        Command::OmegaPowerMember { grammar, lasso } => {
            json!({"command": "omega-power-member", "grammar": path(grammar), "lasso": lasso})
        }
        Command::Decompose { grammar, lasso, bound } => {
            json!({"command": "decompose", "grammar": path(grammar), "lasso": lasso, "bound": bound})
        }
        Command::RelMember { rel, input, output } => {
            json!({"command": "rel-member", "rel": path(rel), "in": input, "out": output})
        }
        Command::RelClassify { rel, input, output } => {
            json!({"command": "rel-classify", "rel": path(rel), "in": input, "out": output})
        }
        Command::ParseCount { grammar, word, cap } => {
            json!({"command": "parse-count", "grammar": path(grammar), "word": word, "cap": cap})
        }
        Command::Corpus { action } => match action {
            CorpusAction::List => json!({"command": "corpus list"}),
            CorpusAction::Dump { name } => json!({"command": "corpus dump", "name": name}),
            CorpusAction::Check { seed, samples, max_len } => {
                json!({"command": "corpus check", "seed": seed, "samples": samples, "max_len": max_len})
            }
        },
    }
}

/// Answers the query. Every error is an input error.
pub fn execute(cmd: &Command) -> Result<Map<String, Value>, Error> {
    let mut out = Map::new();
    out.insert("query".into(), query(cmd));
    match cmd {
        Command::MemberLasso { bpda: f, lasso: l } => {
            let (a, w) = (bpda(f)?, lasso(l)?);
            out.insert("verdict".into(), json!(a.accepts_lasso(&w)));
        }
        Command::Empty { bpda: f } => {
            let witness = bpda(f)?.nonempty_witness();
            out.insert("verdict".into(), json!(witness.is_none()));
            out.insert("witness".into(), json!(witness.map(|w| w.to_string())));
        }
        Command::CountRuns {
            bpda: f,
            lasso: l,
            steps,
            stack,
        } => {
            let (a, w) = (bpda(f)?, lasso(l)?);
            let r = a.count_runs_bounded(&w, *steps, *stack);
            out.insert("lower_bound".into(), json!(r.lower_bound));
            out.insert("exhaustive".into(), json!(r.exhaustive_within_bounds));
            out.insert("stack_pruned".into(), json!(r.stack_pruned));
            out.insert("label_claim".into(), serde_json::to_value(r.label_claim)?);
            out.insert(
                "degree_lower_bound".into(),
                json!(r.label_claim.degree_lower_bound().to_string()),
            );
            out.insert(
                "uncountable_certificate".into(),
                serde_json::to_value(&r.uncountable_certificate)?,
            );
            out.insert("runs".into(), serde_json::to_value(&r.runs)?);
        }
        Command::Adherence { grammar: f, lasso: l } => {
            let v = ops::adherence_member(&grammar(f)?, &lasso(l)?);
            out.insert("verdict".into(), json!(v.member));
            merge(&mut out, &v)?;
        }
        Command::DeltaLimit { grammar: f, lasso: l } => {
            let v = ops::delta_limit_member(&grammar(f)?, &lasso(l)?);
            out.insert("verdict".into(), json!(v.member));
            merge(&mut out, &v)?;
        }
        Command::OmegaPowerMember { grammar: f, lasso: l } => {
            let (g, w) = (grammar(f)?, lasso(l)?);
            out.insert("verdict".into(), json!(ops::omega_power_bpda(&g).accepts_lasso(&w)));
        }
        Command::Decompose {
            grammar: f,
            lasso: l,
            bound,
        } => {
            let r = ops::count_decompositions(&grammar(f)?, &lasso(l)?, *bound);
            out.insert("lower_bound".into(), json!(r.lower_bound));
            out.insert("exhaustive".into(), json!(r.exhaustive_within_bounds));
            out.insert(
                "uncountable_certificate".into(),
                serde_json::to_value(&r.uncountable_certificate)?,
            );
            out.insert("factorizations".into(), serde_json::to_value(&r.factorizations)?);
        }
        Command::RelMember { rel, input, output } => {
            let (t, x, y) = (relation(rel)?, lasso(input)?, lasso(output)?);
            let comp = t.accepting_computation(&x, &y);
            out.insert("verdict".into(), json!(comp.is_some()));
            out.insert("computation".into(), serde_json::to_value(comp)?);
        }
        Command::RelClassify { rel, input, output } => {
            let (t, x, y) = (relation(rel)?, lasso(input)?, lasso(output)?);
            let class = t.classify_computations(&x, &y);
            merge(&mut out, class)?;
            out.insert("label".into(), json!(class.label().to_string()));
        }
        Command::ParseCount { grammar: f, word, cap } => {
            let g = grammar(f)?;
            let w: Vec<char> = word.chars().collect();
            if let Some(&c) = w.iter().find(|&&c| !g.terminals().contains(c)) {
                return Err(Error::Alphabet(format!("letter {c:?} is not a terminal")));
            }
            merge(&mut out, g.count_derivations(&w, *cap))?;
        }
        Command::Corpus { action } => corpus_action(action, &mut out)?,
    }
    Ok(out)
}

fn corpus_action(action: &CorpusAction, out: &mut Map<String, Value>) -> Result<(), Error> {
    match action {
        CorpusAction::List => {
            let mut entries = Vec::new();
            for name in corpus::names() {
                let e = corpus::get(name)?;
                entries.push(json!({"name": e.name, "kind": e.kind(), "definition": e.definition}));
            }
            out.insert("entries".into(), Value::Array(entries));
        }
        CorpusAction::Dump { name } => {
            if let Value::Object(m) = corpus::dump(name)? {
                out.extend(m);
            }
        }
        CorpusAction::Check { seed, samples, max_len } => {
            let mut grammar_mismatches = Vec::new();
            for name in corpus::names() {
                let (Some(pred), Some(g)) = (corpus::word_predicate(name), corpus::get(name)?.grammar().cloned())
                else {
                    continue;
                };
                let generated = g.words_up_to(*max_len);
                for x in all_words(g.terminals().letters(), *max_len) {
                    let in_g = generated.contains(&x.as_slice().into());
                    if in_g != pred(&x) {
                        grammar_mismatches
                            .push(json!({"entry": name, "word": x.iter().collect::<String>(), "grammar": in_g}));
                    }
                }
            }
            let mut rng = ChaCha8Rng::seed_from_u64(*seed);
            let mut closed_form_mismatches = Vec::new();
            let l1 = corpus::get("L1")?.grammar().cloned().expect("grammar");
            let c = corpus::get("C")?.grammar().cloned().expect("grammar");
            let v = corpus::get("V")?.grammar().cloned().expect("grammar");
            let lstar = corpus::get("Lstar_omega")?.bpda().cloned().expect("bpda");
            for &form in corpus::CLOSED_FORMS {
                for _ in 0..*samples {
                    let w = corpus::sample_lasso(form, &mut rng)?;
                    let got = match form {
                        "Adh_L1" => ops::adherence_member(&l1, &w).member,
                        "Adh_C" => ops::adherence_member(&c, &w).member,
                        "delta_L1" => ops::delta_limit_member(&l1, &w).member,
                        "delta_V" => ops::delta_limit_member(&v, &w).member,
                        _ => lstar.accepts_lasso(&w),
                    };
                    if got != corpus::reference_check(form, &w)? {
                        closed_form_mismatches.push(json!({"form": form, "lasso": w.to_string(), "decider": got}));
                    }
                }
            }
            let ok = grammar_mismatches.is_empty() && closed_form_mismatches.is_empty();
            out.insert("verdict".into(), json!(ok));
            out.insert("grammar_mismatches".into(), Value::Array(grammar_mismatches));
            out.insert("closed_form_mismatches".into(), Value::Array(closed_form_mismatches));
        }
    }
    Ok(())
}

fn all_words(letters: &[char], max_len: usize) -> Vec<Vec<char>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        layer = layer
            .iter()
            .flat_map(|w: &Vec<char>| {
                letters.iter().map(move |&c| {
                    let mut x = w.clone();
                    x.push(c);
                    x
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

/// Parses `args`, runs the query and prints the report. Returns the exit
/// status: 0 on an answered query, 2 on input error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let started = Instant::now();
    match execute(&cli.command) {
        Ok(mut report) => {
            report.insert("elapsed_ms".into(), json!(started.elapsed().as_secs_f64() * 1e3));
            // a closed pipe is not an input error
            let _ = writeln!(std::io::stdout(), "{}", Value::Object(report));
            0
        }
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}
