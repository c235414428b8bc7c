//! Büchi pushdown automata.
//!
//! A run is the sequence of `(state, stack, ε)` triples where `ε` is 1 when
//! the step leaving that configuration reads a letter. Runs are compared as
//! such sequences. A run is accepting when some final state occurs
//! infinitely often and the run reads infinitely many letters. A
//! configuration with an empty stack has no successors.

mod explore;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::pds::{Pds, PdsRule, ACC, CONSUME};
use crate::words::{single_char, Alphabet, FiniteWord, LassoWord};

pub use explore::{AmbiguityReport, CertStep, Certificate, CycleMarker, LabelClaim};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Transition {
    pub from: usize,
    pub input: Option<char>,
    pub top: char,
    pub to: usize,
    pub push: Vec<char>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bpda {
    states: Vec<String>,
    input: Alphabet,
    stack: Alphabet,
    transitions: Vec<Transition>,
    initial: usize,
    initial_stack: char,
    finals: Vec<bool>,
}

/// A configuration; the stack is written top first.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct Config {
    pub state: usize,
    pub stack: String,
}

impl Config {
    pub fn new(state: usize, stack: impl Into<String>) -> Self {
        Config {
            state,
            stack: stack.into(),
        }
    }

    pub fn top(&self) -> Option<char> {
        self.stack.chars().next()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct RunStep {
    pub config: Config,
    #[serde(serialize_with = "flag_bit")]
    pub flag: bool,
}

fn flag_bit<S: serde::Serializer>(b: &bool, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_u8(*b as u8)
}

/// An ultimately periodic run: `stem` once, then `cycle` forever.
/// `input_phase` is the lasso phase at the start of the cycle.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RunLasso {
    pub stem: Vec<RunStep>,
    pub cycle: Vec<RunStep>,
    pub input_phase: usize,
}

impl RunLasso {
    /// The first `n` triples of the run.
    pub fn prefix(&self, n: usize) -> Vec<RunStep> {
        self.stem
            .iter()
            .chain(self.cycle.iter().cycle())
            .take(n)
            .cloned()
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct BpdaJson {
    states: Vec<String>,
    input_alphabet: Vec<String>,
    stack_alphabet: Vec<String>,
    initial_state: String,
    initial_stack: String,
    final_states: Vec<String>,
    transitions: Vec<TransitionJson>,
}

#[derive(Serialize, Deserialize)]
struct TransitionJson {
    from: String,
    input: Option<String>,
    top: String,
    to: String,
    push: Vec<String>,
}

impl Bpda {
    pub fn new(
        states: Vec<String>,
        input: Alphabet,
        stack: Alphabet,
        transitions: Vec<Transition>,
        initial: usize,
        initial_stack: char,
        finals: &[usize],
    ) -> Result<Self, Error> {
        let n = states.len();
        let bad = |m: String| Err(Error::Automaton(m));
        if n == 0 {
            return bad("no states".into());
        }
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return bad(format!("duplicate state {s:?}"));
            }
        }
        if initial >= n {
            return bad("initial state not declared".into());
        }
        if !stack.contains(initial_stack) {
            return bad(format!("initial stack symbol {initial_stack:?} not declared"));
        }
        for t in &transitions {
            if t.from >= n || t.to >= n {
                return bad("transition mentions undeclared state".into());
            }
            if let Some(c) = t.input {
                if !input.contains(c) {
                    return bad(format!("undeclared input letter {c:?}"));
                }
            }
            if let Some(c) = std::iter::once(t.top)
                .chain(t.push.iter().copied())
                .find(|c| !stack.contains(*c))
            {
                return bad(format!("undeclared stack symbol {c:?}"));
            }
        }
        let mut flags = vec![false; n];
        for &f in finals {
            if f >= n {
                return bad("final state not declared".into());
            }
            flags[f] = true;
        }
        let mut transitions = transitions;
        let mut seen = HashSet::new();
        transitions.retain(|t| seen.insert(t.clone()));
        Ok(Bpda {
            states,
            input,
            stack,
            transitions,
            initial,
            initial_stack,
            finals: flags,
        })
    }

    /// Compact constructor used by the corpus and tests. Transitions are
    /// `(from, input, top, to, push)` with `push` written top first.
    #[allow(clippy::type_complexity)]
    pub fn from_table(
        states: &[&str],
        input: &str,
        stack: &str,
        initial: &str,
        initial_stack: char,
        finals: &[&str],
        table: &[(&str, Option<char>, char, &str, &str)],
    ) -> Result<Self, Error> {
        let names: Vec<String> = states.iter().map(|s| s.to_string()).collect();
        let idx = |s: &str| {
            names
                .iter()
                .position(|n| n == s)
                .ok_or_else(|| Error::Automaton(format!("unknown state {s:?}")))
        };
        let transitions = table
            .iter()
            .map(|&(f, c, top, t, push)| {
                Ok(Transition {
                    from: idx(f)?,
                    input: c,
                    top,
                    to: idx(t)?,
                    push: push.chars().collect(),
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let finals = finals.iter().map(|f| idx(f)).collect::<Result<Vec<_>, _>>()?;
        Bpda::new(
            names.clone(),
            Alphabet::new(input.chars())?,
            Alphabet::new(stack.chars())?,
            transitions,
            idx(initial)?,
            initial_stack,
            &finals,
        )
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        let raw: BpdaJson = serde_json::from_str(s)?;
        let idx = |s: &str| {
            raw.states
                .iter()
                .position(|n| n == s)
                .ok_or_else(|| Error::Automaton(format!("unknown state {s:?}")))
        };
        let mut transitions = Vec::new();
        for t in &raw.transitions {
            transitions.push(Transition {
                from: idx(&t.from)?,
                input: t.input.as_deref().map(single_char).transpose()?,
                top: single_char(&t.top)?,
                to: idx(&t.to)?,
                push: t.push.iter().map(|s| single_char(s)).collect::<Result<_, _>>()?,
            });
        }
        let finals = raw.final_states.iter().map(|f| idx(f)).collect::<Result<Vec<_>, _>>()?;
        Bpda::new(
            raw.states.clone(),
            Alphabet::from_strings(&raw.input_alphabet)?,
            Alphabet::from_strings(&raw.stack_alphabet)?,
            transitions,
            idx(&raw.initial_state)?,
            single_char(&raw.initial_stack)?,
            &finals,
        )
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let raw = BpdaJson {
            states: self.states.clone(),
            input_alphabet: self.input.to_strings(),
            stack_alphabet: self.stack.to_strings(),
            initial_state: self.states[self.initial].clone(),
            initial_stack: self.initial_stack.to_string(),
            final_states: (0..self.states.len())
                .filter(|&q| self.finals[q])
                .map(|q| self.states[q].clone())
                .collect(),
            transitions: self
                .transitions
                .iter()
                .map(|t| TransitionJson {
                    from: self.states[t.from].clone(),
                    input: t.input.map(String::from),
                    top: t.top.to_string(),
                    to: self.states[t.to].clone(),
                    push: t.push.iter().map(|c| c.to_string()).collect(),
                })
                .collect(),
        };
        serde_json::to_value(raw).expect("automaton serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("automaton serializes")
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn input_alphabet(&self) -> &Alphabet {
        &self.input
    }

    pub fn stack_alphabet(&self) -> &Alphabet {
        &self.stack
    }

    pub fn transitions(&self) -> &[Transition] {
        &self.transitions
    }

    pub fn initial_config(&self) -> Config {
        Config::new(self.initial, self.initial_stack.to_string())
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn state_index(&self, name: &str) -> Option<usize> {
        self.states.iter().position(|s| s == name)
    }

    pub(crate) fn apply(&self, t: &Transition, c: &Config) -> Option<Config> {
        let mut it = c.stack.chars();
        if c.state != t.from || it.next() != Some(t.top) {
            return None;
        }
        let mut stack: String = t.push.iter().collect();
        stack.extend(it);
        Some(Config::new(t.to, stack))
    }

    /// One-step successors on `letter` (`None` is λ), each with its flag.
    pub fn step(&self, c: &Config, letter: Option<char>) -> Vec<(Config, bool)> {
        let mut out = Vec::new();
        for t in self.transitions.iter().filter(|t| t.input == letter) {
            if let Some(next) = self.apply(t, c) {
                let item = (next, letter.is_some());
                if !out.contains(&item) {
                    out.push(item);
                }
            }
        }
        out
    }

    fn pds(&self, phases: Option<&LassoWord>) -> Pds {
        let k = phases.map_or(1, |w| w.phases());
        let sym = |c: char| self.stack.index_of(c).unwrap();
        let mut rules = Vec::new();
        for t in &self.transitions {
            for ph in 0..k {
                let next = match (t.input, phases) {
                    (None, _) => ph,
                    (Some(c), Some(w)) if w.letter_at_phase(ph) == c => w.next_phase(ph),
                    (Some(_), Some(_)) => continue,
                    (Some(_), None) => 0,
                };
                let mut mask = if self.finals[t.to] { ACC } else { 0 };
                if t.input.is_some() {
                    mask |= CONSUME;
                }
                rules.push(PdsRule {
                    from: t.from * k + ph,
                    top: sym(t.top),
                    to: t.to * k + next,
                    push: t.push.iter().map(|&c| sym(c)).collect(),
                    letter: t.input,
                    mask,
                });
            }
        }
        Pds {
            states: self.states.len() * k,
            symbols: self.stack.len(),
            rules,
        }
    }

    /// Whether some accepting run reads exactly `w`.
    pub fn accepts_lasso(&self, w: &LassoWord) -> bool {
        let pds = self.pds(Some(w));
        let k = w.phases();
        pds.accepting_lasso(self.initial * k, self.stack.index_of(self.initial_stack).unwrap())
            .is_some()
    }

    /// An accepted ultimately periodic word, or `None` when `L(a)` is empty.
    pub fn nonempty_witness(&self) -> Option<LassoWord> {
        let pds = self.pds(None);
        let (stem, cycle) = pds.accepting_lasso(self.initial, self.stack.index_of(self.initial_stack).unwrap())?;
        Some(LassoWord::canonicalize(&stem, &cycle).expect("cycle word is non-empty"))
    }

    pub fn is_empty(&self) -> bool {
        self.nonempty_witness().is_none()
    }

    /// Replays a sequence of transitions from `start` at lasso phase `phase`,
    /// checking each step against the word and the recorded targets.
    /// Returns the visited steps and the final configuration and phase.
    pub fn replay(
        &self,
        w: &LassoWord,
        start: &Config,
        phase: usize,
        steps: &[CertStep],
    ) -> Result<(Vec<RunStep>, Config, usize), String> {
        let mut cur = start.clone();
        let mut ph = phase;
        let mut run = Vec::new();
        for (i, s) in steps.iter().enumerate() {
            let t = self
                .transitions
                .get(s.transition)
                .ok_or_else(|| format!("step {i}: no transition {}", s.transition))?;
            if t.input != s.input {
                return Err(format!("step {i}: input does not match transition"));
            }
            if let Some(c) = t.input {
                if w.letter_at_phase(ph) != c {
                    return Err(format!(
                        "step {i}: reads {c:?} but the word has {:?}",
                        w.letter_at_phase(ph)
                    ));
                }
            }
            let next = self
                .apply(t, &cur)
                .ok_or_else(|| format!("step {i}: transition not enabled"))?;
            if next != s.target {
                return Err(format!("step {i}: target differs from the recorded configuration"));
            }
            run.push(RunStep {
                config: cur,
                flag: t.input.is_some(),
            });
            if t.input.is_some() {
                ph = w.next_phase(ph);
            }
            cur = next;
        }
        Ok((run, cur, ph))
    }

    // ---- run coding ----

    /// Letter assignment for encoding runs as words over `Γ ∪ K ∪ {0,1}`.
    pub fn run_coding(&self) -> RunCoding {
        let mut used: HashSet<char> = HashSet::from(['0', '1']);
        let mut fresh = ('\u{E000}'..).filter(|c| !self.input.contains(*c));
        let mut pick = |want: Option<char>, used: &mut HashSet<char>| -> char {
            if let Some(c) = want {
                if used.insert(c) {
                    return c;
                }
            }
            loop {
                let c = fresh.next().expect("private use area");
                if used.insert(c) {
                    return c;
                }
            }
        };
        let stack_chars: Vec<char> = self.stack.letters().iter().map(|&c| pick(Some(c), &mut used)).collect();
        let state_chars: Vec<char> = self
            .states
            .iter()
            .map(|s| {
                let mut it = s.chars();
                let want = match (it.next(), it.next()) {
                    (Some(c), None) => Some(c),
                    _ => None,
                };
                pick(want, &mut used)
            })
            .collect();
        RunCoding {
            stack: self.stack.clone(),
            stack_chars,
            state_chars,
        }
    }

    pub fn encode_run_prefix(&self, run: &[RunStep]) -> FiniteWord {
        self.run_coding().encode(run)
    }

    pub fn decode_run_prefix(&self, x: &[char]) -> Result<Vec<RunStep>, Error> {
        self.run_coding().decode(x)
    }

    /// `x` codes a run prefix from the initial configuration that ends with
    /// flag 1, whose steps respect the transition relation and whose letters
    /// read before the last triple form a prefix of `u`; and `|u| = |x|`.
    pub fn in_r_prime(&self, u: &[char], x: &[char]) -> bool {
        if u.len() != x.len() {
            return false;
        }
        let Ok(run) = self.decode_run_prefix(x) else {
            return false;
        };
        let (Some(first), Some(last)) = (run.first(), run.last()) else {
            return false;
        };
        if first.config != self.initial_config() || !last.flag {
            return false;
        }
        let mut read = 0;
        for pair in run.windows(2) {
            let letter = if pair[0].flag {
                match u.get(read) {
                    Some(&c) => Some(c),
                    None => return false,
                }
            } else {
                None
            };
            let ok = self
                .step(&pair[0].config, letter)
                .iter()
                .any(|(c, _)| *c == pair[1].config);
            if !ok {
                return false;
            }
            if letter.is_some() {
                read += 1;
            }
        }
        true
    }

    /// `|u| = |x|` and the last letter of `x` is a final state.
    pub fn in_r_second(&self, u: &[char], x: &[char]) -> bool {
        if u.len() != x.len() {
            return false;
        }
        let coding = self.run_coding();
        matches!(x.last().and_then(|&c| coding.symbol(c)), Some(CodeSym::State(q)) if self.finals[q])
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CodeSym {
    State(usize),
    Stack(char),
    Flag(bool),
}

#[derive(Clone, Debug)]
pub struct RunCoding {
    stack: Alphabet,
    stack_chars: Vec<char>,
    state_chars: Vec<char>,
}

impl RunCoding {
    pub fn letter(&self, s: CodeSym) -> char {
        match s {
            CodeSym::State(q) => self.state_chars[q],
            CodeSym::Stack(c) => self.stack_chars[self.stack.index_of(c).expect("declared stack symbol")],
            CodeSym::Flag(b) => {
                if b {
                    '1'
                } else {
                    '0'
                }
            }
        }
    }

    pub fn symbol(&self, c: char) -> Option<CodeSym> {
        match c {
            '0' => Some(CodeSym::Flag(false)),
            '1' => Some(CodeSym::Flag(true)),
            _ => {
                if let Some(q) = self.state_chars.iter().position(|&s| s == c) {
                    Some(CodeSym::State(q))
                } else {
                    self.stack_chars
                        .iter()
                        .position(|&s| s == c)
                        .map(|i| CodeSym::Stack(self.stack.letters()[i]))
                }
            }
        }
    }

    pub fn encode(&self, run: &[RunStep]) -> FiniteWord {
        let mut out = Vec::new();
        for s in run {
            out.push(self.letter(CodeSym::State(s.config.state)));
            out.extend(s.config.stack.chars().map(|c| self.letter(CodeSym::Stack(c))));
            out.push(self.letter(CodeSym::Flag(s.flag)));
        }
        out.into()
    }

    pub fn decode(&self, x: &[char]) -> Result<Vec<RunStep>, Error> {
        let mut run = Vec::new();
        let mut i = 0;
        while i < x.len() {
            let Some(CodeSym::State(q)) = self.symbol(x[i]) else {
                return Err(Error::Encoding(format!("expected a state at position {i}")));
            };
            i += 1;
            let mut stack = String::new();
            loop {
                match x.get(i).and_then(|&c| self.symbol(c)) {
                    Some(CodeSym::Stack(g)) => stack.push(g),
                    Some(CodeSym::Flag(b)) => {
                        run.push(RunStep {
                            config: Config::new(q, stack),
                            flag: b,
                        });
                        i += 1;
                        break;
                    }
                    _ => return Err(Error::Encoding(format!("unterminated triple at position {i}"))),
                }
                i += 1;
            }
        }
        Ok(run)
    }
}
