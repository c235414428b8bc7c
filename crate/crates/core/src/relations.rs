//! Two-tape Büchi automata over pairs of ω-words.
//!
//! A computation is a sequence of transitions; two computations are equal
//! only if they use the same transitions in the same order. It accepts a
//! pair when it visits a final state infinitely often and advances both
//! tapes infinitely often.
//!
//! On a pair of lassos everything happens in the finite product graph of
//! states and the two lasso phases, which makes membership and the exact
//! cardinality class of accepting computations computable.

use serde::{Deserialize, Serialize};

use crate::degree::DegreeLabel;
use crate::error::Error;
use crate::graph::{recurrent_components, EdgeGraph, Recurrent};
use crate::words::{Alphabet, LassoWord};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RelTransition {
    pub from: usize,
    pub input: Vec<char>,
    pub output: Vec<char>,
    pub to: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoTapeBa {
    states: Vec<String>,
    input: Alphabet,
    output: Alphabet,
    transitions: Vec<RelTransition>,
    initial: usize,
    finals: Vec<bool>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "class", content = "k")]
pub enum CardinalityClass {
    Finite(u64),
    CountablyInfinite,
    Uncountable,
}

impl CardinalityClass {
    pub fn label(&self) -> DegreeLabel {
        match *self {
            CardinalityClass::Finite(k) => DegreeLabel::Finite(k),
            CardinalityClass::CountablyInfinite => DegreeLabel::Aleph0,
            CardinalityClass::Uncountable => DegreeLabel::Continuum,
        }
    }
}

/// A lower bound on the degree of ambiguity, never the degree itself.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct DegreeBound {
    pub at_least: DegreeLabel,
}

/// An accepting computation: `stem` then `cycle` forever, as transition
/// indices.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComputationLasso {
    pub stem: Vec<usize>,
    pub cycle: Vec<usize>,
}

/// Letters of a coded computation prefix.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CompSym {
    State(usize),
    In(char),
    Sep,
    Out(char),
}

#[derive(Serialize, Deserialize)]
struct RelJson {
    states: Vec<String>,
    input_alphabet: Vec<String>,
    output_alphabet: Vec<String>,
    initial_state: String,
    final_states: Vec<String>,
    transitions: Vec<RelTransitionJson>,
}

#[derive(Serialize, Deserialize)]
struct RelTransitionJson {
    from: String,
    input: String,
    output: String,
    to: String,
}

struct Product {
    graph: EdgeGraph,
    // transition index per edge
    label: Vec<usize>,
    ids: Vec<usize>,
    reach: Vec<bool>,
}

impl TwoTapeBa {
    pub fn new(
        states: Vec<String>,
        input: Alphabet,
        output: Alphabet,
        transitions: Vec<RelTransition>,
        initial: usize,
        finals: &[usize],
    ) -> Result<Self, Error> {
        let n = states.len();
        let bad = |m: String| Err(Error::Automaton(m));
        if n == 0 || initial >= n {
            return bad("initial state not declared".into());
        }
        for (i, s) in states.iter().enumerate() {
            if states[..i].contains(s) {
                return bad(format!("duplicate state {s:?}"));
            }
        }
        for t in &transitions {
            if t.from >= n || t.to >= n {
                return bad("transition mentions undeclared state".into());
            }
            if let Some(c) = t.input.iter().find(|c| !input.contains(**c)) {
                return bad(format!("undeclared input letter {c:?}"));
            }
            if let Some(c) = t.output.iter().find(|c| !output.contains(**c)) {
                return bad(format!("undeclared output letter {c:?}"));
            }
        }
        let mut flags = vec![false; n];
        for &f in finals {
            if f >= n {
                return bad("final state not declared".into());
            }
            flags[f] = true;
        }
        Ok(TwoTapeBa {
            states,
            input,
            output,
            transitions,
            initial,
            finals: flags,
        })
    }

    /// Compact constructor; transitions are `(from, input, output, to)`.
    pub fn from_table(
        states: &[&str],
        input: &str,
        output: &str,
        initial: &str,
        finals: &[&str],
        table: &[(&str, &str, &str, &str)],
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
            .map(|&(f, i, o, t)| {
                Ok(RelTransition {
                    from: idx(f)?,
                    input: i.chars().collect(),
                    output: o.chars().collect(),
                    to: idx(t)?,
                })
            })
            .collect::<Result<Vec<_>, Error>>()?;
        let finals = finals.iter().map(|f| idx(f)).collect::<Result<Vec<_>, _>>()?;
        TwoTapeBa::new(
            names.clone(),
            Alphabet::new(input.chars())?,
            Alphabet::new(output.chars())?,
            transitions,
            idx(initial)?,
            &finals,
        )
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        let raw: RelJson = serde_json::from_str(s)?;
        let idx = |s: &str| {
            raw.states
                .iter()
                .position(|n| n == s)
                .ok_or_else(|| Error::Automaton(format!("unknown state {s:?}")))
        };
        let mut transitions = Vec::new();
        for t in &raw.transitions {
            transitions.push(RelTransition {
                from: idx(&t.from)?,
                input: t.input.chars().collect(),
                output: t.output.chars().collect(),
                to: idx(&t.to)?,
            });
        }
        let finals = raw.final_states.iter().map(|f| idx(f)).collect::<Result<Vec<_>, _>>()?;
        let initial = idx(&raw.initial_state)?;
        TwoTapeBa::new(
            raw.states.clone(),
            Alphabet::from_strings(&raw.input_alphabet)?,
            Alphabet::from_strings(&raw.output_alphabet)?,
            transitions,
            initial,
            &finals,
        )
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let raw = RelJson {
            states: self.states.clone(),
            input_alphabet: self.input.to_strings(),
            output_alphabet: self.output.to_strings(),
            initial_state: self.states[self.initial].clone(),
            final_states: (0..self.states.len())
                .filter(|&q| self.finals[q])
                .map(|q| self.states[q].clone())
                .collect(),
            transitions: self
                .transitions
                .iter()
                .map(|t| RelTransitionJson {
                    from: self.states[t.from].clone(),
                    input: t.input.iter().collect(),
                    output: t.output.iter().collect(),
                    to: self.states[t.to].clone(),
                })
                .collect(),
        };
        serde_json::to_value(raw).expect("relation serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("relation serializes")
    }

    pub fn states(&self) -> &[String] {
        &self.states
    }

    pub fn transitions(&self) -> &[RelTransition] {
        &self.transitions
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_final(&self, q: usize) -> bool {
        self.finals[q]
    }

    pub fn input_alphabet(&self) -> &Alphabet {
        &self.input
    }

    pub fn output_alphabet(&self) -> &Alphabet {
        &self.output
    }

    /// Phase reached after reading `word` from phase `ph`, if it matches.
    pub(crate) fn advance(w: &LassoWord, mut ph: usize, word: &[char]) -> Option<usize> {
        for &c in word {
            if w.letter_at_phase(ph) != c {
                return None;
            }
            ph = w.next_phase(ph);
        }
        Some(ph)
    }

    fn product(&self, w1: &LassoWord, w2: &LassoWord) -> Product {
        let (k1, k2) = (w1.phases(), w2.phases());
        let node = |q: usize, a: usize, b: usize| (q * k1 + a) * k2 + b;
        let mut pairs = Vec::new();
        let mut label = Vec::new();
        for (ti, t) in self.transitions.iter().enumerate() {
            for a in 0..k1 {
                let Some(a2) = Self::advance(w1, a, &t.input) else {
                    continue;
                };
                for b in 0..k2 {
                    let Some(b2) = Self::advance(w2, b, &t.output) else {
                        continue;
                    };
                    pairs.push((node(t.from, a, b), node(t.to, a2, b2)));
                    label.push(ti);
                }
            }
        }
        let graph = EdgeGraph::new(self.states.len() * k1 * k2, pairs);
        let ids = graph.scc_ids();
        let reach = graph.reachable_from(node(self.initial, 0, 0));
        Product {
            graph,
            label,
            ids,
            reach,
        }
    }

    fn accepting_components(&self, p: &Product) -> Vec<Recurrent> {
        let t = &self.transitions;
        let fin = |e: usize| self.finals[t[p.label[e]].to];
        let reads = |e: usize| !t[p.label[e]].input.is_empty();
        let writes = |e: usize| !t[p.label[e]].output.is_empty();
        recurrent_components(&p.graph, &p.ids, &p.reach, &[&fin, &reads, &writes])
    }

    pub fn accepts_pair(&self, w1: &LassoWord, w2: &LassoWord) -> bool {
        self.accepting_computation(w1, w2).is_some()
    }

    /// An accepting computation on the pair, if any.
    pub fn accepting_computation(&self, w1: &LassoWord, w2: &LassoWord) -> Option<ComputationLasso> {
        let p = self.product(w1, w2);
        let rec = self.accepting_components(&p).into_iter().next()?;
        let g = &p.graph;
        let x = g.edges[rec.witnesses[0]].0;
        let start = self.initial * w1.phases() * w2.phases();
        let stem = g.path(start, x, |_| true)?;
        let mut via = rec.witnesses.clone();
        via.sort();
        via.dedup();
        let cycle = g.walk_through(x, x, &via, |v| p.ids[v] == rec.comp)?;
        Some(ComputationLasso {
            stem: stem.iter().map(|&e| p.label[e]).collect(),
            cycle: cycle.iter().map(|&e| p.label[e]).collect(),
        })
    }

    /// Exact cardinality class of the accepting computations on the pair.
    ///
    /// Every accepting computation eventually stays in one accepting
    /// component of the product. If such a component has a node with two
    /// internal successors there are two distinct cycles through it and
    /// continuum many computations. Otherwise every accepting component is
    /// a simple cycle, a computation is fixed by its path up to entering
    /// that cycle, and those paths are finitely many unless they can pass
    /// through some other non-trivial component.
    pub fn classify_computations(&self, w1: &LassoWord, w2: &LassoWord) -> CardinalityClass {
        let p = self.product(w1, w2);
        let g = &p.graph;
        let comps = self.accepting_components(&p);
        if comps.is_empty() {
            return CardinalityClass::Finite(0);
        }
        let internal_out = |v: usize| g.out[v].iter().filter(|&&e| p.ids[g.edges[e].1] == p.ids[v]).count();
        for rec in &comps {
            if (0..g.n).any(|v| p.ids[v] == rec.comp && internal_out(v) >= 2) {
                return CardinalityClass::Uncountable;
            }
        }
        let start = self.initial * w1.phases() * w2.phases();
        let ncomp = p.ids.iter().max().map_or(0, |m| m + 1);
        let mut nontrivial = vec![false; ncomp];
        for &(s, t) in &g.edges {
            if p.ids[s] == p.ids[t] {
                nontrivial[p.ids[s]] = true;
            }
        }
        let mut total: u64 = 0;
        for rec in &comps {
            let in_c = |v: usize| p.ids[v] == rec.comp;
            // nodes outside C that can reach C
            let mut to_c = vec![false; g.n];
            let mut changed = true;
            while changed {
                changed = false;
                for &(s, t) in &g.edges {
                    if !in_c(s) && !to_c[s] && (in_c(t) || to_c[t]) {
                        to_c[s] = true;
                        changed = true;
                    }
                }
            }
            if in_c(start) {
                total = total.saturating_add(1);
                continue;
            }
            if !to_c[start] {
                continue;
            }
            let relevant = |v: usize| p.reach[v] && to_c[v];
            if (0..g.n).any(|v| relevant(v) && nontrivial[p.ids[v]]) {
                return CardinalityClass::CountablyInfinite;
            }
            // paths from start entering C, over the acyclic region
            let mut order: Vec<usize> = (0..g.n).filter(|&v| relevant(v)).collect();
            // Tarjan numbers components in reverse topological order
            order.sort_by_key(|&v| std::cmp::Reverse(p.ids[v]));
            let mut ways = vec![0u64; g.n];
            ways[start] = 1;
            for &v in &order {
                for &e in &g.out[v] {
                    let t = g.edges[e].1;
                    if in_c(t) {
                        total = total.saturating_add(ways[v]);
                    } else if relevant(t) {
                        ways[t] = ways[t].saturating_add(ways[v]);
                    }
                }
            }
        }
        CardinalityClass::Finite(total)
    }

    /// Largest class over the pairs, as a lower bound on the degree of
    /// ambiguity of the relation.
    pub fn degree_scan(&self, pairs: &[(LassoWord, LassoWord)]) -> DegreeBound {
        let at_least = pairs
            .iter()
            .map(|(a, b)| self.classify_computations(a, b).label())
            .max()
            .unwrap_or(DegreeLabel::Finite(0));
        DegreeBound { at_least }
    }

    /// `q0 u1 e v1 q1 u2 e v2 q2 …` for a chained sequence of transitions.
    pub fn encode_computation_prefix(&self, comp: &[usize]) -> Result<Vec<CompSym>, Error> {
        let mut out = vec![CompSym::State(self.initial)];
        let mut cur = self.initial;
        for &ti in comp {
            let t = self
                .transitions
                .get(ti)
                .ok_or_else(|| Error::Encoding(format!("no transition {ti}")))?;
            if t.from != cur {
                return Err(Error::Encoding("transitions do not chain".into()));
            }
            out.extend(t.input.iter().map(|&c| CompSym::In(c)));
            out.push(CompSym::Sep);
            out.extend(t.output.iter().map(|&c| CompSym::Out(c)));
            out.push(CompSym::State(t.to));
            cur = t.to;
        }
        Ok(out)
    }

    /// Recovers `(from, input, output, to)` per step. Transitions with equal
    /// labels are indistinguishable in the coding.
    pub fn decode_computation_prefix(&self, x: &[CompSym]) -> Result<Vec<RelTransition>, Error> {
        let err = |m: &str| Error::Encoding(m.to_string());
        let mut it = x.iter().peekable();
        let Some(CompSym::State(mut cur)) = it.next().copied() else {
            return Err(err("coding must start with a state"));
        };
        let mut out = Vec::new();
        while it.peek().is_some() {
            let mut input = Vec::new();
            let mut output = Vec::new();
            loop {
                match it.next() {
                    Some(CompSym::In(c)) => input.push(*c),
                    Some(CompSym::Sep) => break,
                    _ => return Err(err("expected input letters and a separator")),
                }
            }
            let to = loop {
                match it.next() {
                    Some(CompSym::Out(c)) => output.push(*c),
                    Some(CompSym::State(q)) => break *q,
                    _ => return Err(err("expected output letters and a state")),
                }
            };
            let t = RelTransition {
                from: cur,
                input,
                output,
                to,
            };
            if !self.transitions.contains(&t) {
                return Err(err("step is not a transition"));
            }
            out.push(t);
            cur = to;
        }
        Ok(out)
    }

    /// The coding as text, with `e` as the separator.
    pub fn render_coding(&self, x: &[CompSym]) -> String {
        x.iter()
            .map(|s| match *s {
                CompSym::State(q) => self.states[q].clone(),
                CompSym::In(c) | CompSym::Out(c) => c.to_string(),
                CompSym::Sep => "e".to_string(),
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lasso(s: &str) -> LassoWord {
        s.parse().unwrap()
    }

    fn t_id() -> TwoTapeBa {
        TwoTapeBa::from_table(
            &["q0"],
            "ab",
            "ab",
            "q0",
            &["q0"],
            &[("q0", "a", "a", "q0"), ("q0", "b", "b", "q0")],
        )
        .unwrap()
    }

    #[test]
    fn membership() {
        let t = t_id();
        assert!(t.accepts_pair(&lasso("(ab)"), &lasso("(ab)")));
        assert!(!t.accepts_pair(&lasso("(a)"), &lasso("(b)")));
        let c = t.accepting_computation(&lasso("(ab)"), &lasso("(ab)")).unwrap();
        assert!(c.cycle.iter().any(|&i| !t.transitions()[i].input.is_empty()));
    }

    #[test]
    fn classes() {
        let t = t_id();
        assert_eq!(
            t.classify_computations(&lasso("(a)"), &lasso("(a)")),
            CardinalityClass::Finite(1)
        );
        let double = TwoTapeBa::from_table(
            &["q"],
            "a",
            "a",
            "q",
            &["q"],
            &[("q", "a", "a", "q"), ("q", "a", "a", "q")],
        )
        .unwrap();
        assert_eq!(
            double.classify_computations(&lasso("(a)"), &lasso("(a)")),
            CardinalityClass::Uncountable
        );
        assert_eq!(
            double.degree_scan(&[(lasso("(a)"), lasso("(a)"))]).at_least,
            DegreeLabel::Continuum
        );
        let dead = TwoTapeBa::from_table(&["q"], "a", "a", "q", &[], &[("q", "a", "a", "q")]).unwrap();
        assert_eq!(
            dead.classify_computations(&lasso("(a)"), &lasso("(a)")),
            CardinalityClass::Finite(0)
        );
        // an input-only loop before the copying loop: countably many
        let pre = TwoTapeBa::from_table(
            &["p", "q"],
            "a",
            "a",
            "p",
            &["q"],
            &[("p", "a", "", "p"), ("p", "", "", "q"), ("q", "a", "a", "q")],
        )
        .unwrap();
        assert_eq!(
            pre.classify_computations(&lasso("(a)"), &lasso("(a)")),
            CardinalityClass::CountablyInfinite
        );
        // two ways into the same copying loop
        let two = TwoTapeBa::from_table(
            &["p", "q"],
            "a",
            "a",
            "p",
            &["q"],
            &[("p", "a", "a", "q"), ("p", "a", "a", "q"), ("q", "a", "a", "q")],
        )
        .unwrap();
        assert_eq!(
            two.classify_computations(&lasso("(a)"), &lasso("(a)")),
            CardinalityClass::Finite(2)
        );
    }

    #[test]
    fn lambda_loop_does_not_accept() {
        let t = TwoTapeBa::from_table(
            &["q"],
            "a",
            "a",
            "q",
            &["q"],
            &[("q", "", "", "q"), ("q", "a", "", "q")],
        )
        .unwrap();
        assert!(!t.accepts_pair(&lasso("(a)"), &lasso("(a)")));
    }

    #[test]
    fn coding() {
        let t = TwoTapeBa::from_table(
            &["q0", "q1"],
            "a",
            "b",
            "q0",
            &[],
            &[("q0", "a", "b", "q1"), ("q0", "", "", "q0")],
        )
        .unwrap();
        let x = t.encode_computation_prefix(&[0]).unwrap();
        assert_eq!(t.render_coding(&x), "q0aebq1");
        assert_eq!(t.render_coding(&t.encode_computation_prefix(&[]).unwrap()), "q0");
        assert_eq!(t.render_coding(&t.encode_computation_prefix(&[1]).unwrap()), "q0eq0");
        assert_eq!(
            t.decode_computation_prefix(&x).unwrap(),
            vec![t.transitions()[0].clone()]
        );
        assert!(t.encode_computation_prefix(&[0, 0]).is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = t_id();
        assert_eq!(TwoTapeBa::from_json(&t.to_json()).unwrap(), t);
    }
}
