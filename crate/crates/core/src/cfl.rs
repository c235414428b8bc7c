//! Context-free grammars over single-character terminals.
//!
//! Besides the usual reductions this module counts leftmost derivations
//! exactly (with `λ` and unit rules allowed), decides infiniteness with a
//! pumping witness, and builds the prefix closure and the product with a
//! finite automaton. Those last three are what the ω-level deciders in
//! [`crate::ops`] are made of.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::graph::EdgeGraph;
use crate::words::{Alphabet, Dfa, FiniteWord};

/// Default cap for [`Cfg::count_derivations`].
pub const DEFAULT_CAP: u64 = 64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Symbol {
    T(char),
    N(usize),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Rule {
    pub lhs: usize,
    pub rhs: Vec<Symbol>,
}

/// A context-free grammar. Nonterminals are referred to by index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cfg {
    terminals: Alphabet,
    nonterminals: Vec<String>,
    start: usize,
    rules: Vec<Rule>,
}

/// Number of leftmost derivations of a word.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value")]
pub enum ParseCount {
    Exact(u64),
    MoreThan(u64),
    Infinite,
}

impl ParseCount {
    pub fn is_zero(&self) -> bool {
        *self == ParseCount::Exact(0)
    }
}

/// `prefix · left^k · middle · right^k · suffix` is in the language for every
/// `k`, and `left · right` is not empty.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Pump {
    pub prefix: FiniteWord,
    pub left: FiniteWord,
    pub middle: FiniteWord,
    pub right: FiniteWord,
    pub suffix: FiniteWord,
}

impl Pump {
    pub fn word(&self, k: usize) -> FiniteWord {
        let mut v: Vec<char> = self.prefix.letters().to_vec();
        for _ in 0..k {
            v.extend_from_slice(self.left.letters());
        }
        v.extend_from_slice(self.middle.letters());
        for _ in 0..k {
            v.extend_from_slice(self.right.letters());
        }
        v.extend_from_slice(self.suffix.letters());
        v.into()
    }
}

// Derivation counts in ℕ ∪ {∞}; finite values saturate, `0 · ∞ = 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub(crate) enum Count {
    Fin(u128),
    Inf,
}

impl Count {
    const ZERO: Count = Count::Fin(0);
    const ONE: Count = Count::Fin(1);

    fn is_zero(self) -> bool {
        self == Count::ZERO
    }

    fn add(self, o: Count) -> Count {
        match (self, o) {
            (Count::Fin(a), Count::Fin(b)) => Count::Fin(a.saturating_add(b)),
            _ => Count::Inf,
        }
    }

    fn mul(self, o: Count) -> Count {
        if self.is_zero() || o.is_zero() {
            return Count::ZERO;
        }
        match (self, o) {
            (Count::Fin(a), Count::Fin(b)) => Count::Fin(a.saturating_mul(b)),
            _ => Count::Inf,
        }
    }

    fn to_parse_count(self, cap: u64) -> ParseCount {
        match self {
            Count::Inf => ParseCount::Infinite,
            Count::Fin(k) if k <= cap as u128 => ParseCount::Exact(k as u64),
            Count::Fin(_) => ParseCount::MoreThan(cap),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct GrammarJson {
    terminals: Vec<String>,
    nonterminals: Vec<String>,
    start: String,
    rules: Vec<RuleJson>,
}

#[derive(Serialize, Deserialize)]
struct RuleJson {
    lhs: String,
    rhs: Vec<String>,
}

type ShortWords = Vec<Option<Vec<char>>>;

impl Cfg {
    pub fn new(terminals: Alphabet, nonterminals: Vec<String>, start: usize, rules: Vec<Rule>) -> Result<Self, Error> {
        let n = nonterminals.len();
        if start >= n {
            return Err(Error::Grammar("start symbol is not declared".into()));
        }
        for (i, name) in nonterminals.iter().enumerate() {
            if nonterminals[..i].contains(name) {
                return Err(Error::Grammar(format!("duplicate nonterminal {name:?}")));
            }
            let mut it = name.chars();
            if let (Some(c), None) = (it.next(), it.next()) {
                if terminals.contains(c) {
                    return Err(Error::Grammar(format!("{name:?} is both a terminal and a nonterminal")));
                }
            }
        }
        for r in &rules {
            if r.lhs >= n {
                return Err(Error::Grammar("rule with undeclared left-hand side".into()));
            }
            for s in &r.rhs {
                match *s {
                    Symbol::N(i) if i >= n => {
                        return Err(Error::Grammar("rule mentions undeclared nonterminal".into()))
                    }
                    Symbol::T(c) if !terminals.contains(c) => {
                        return Err(Error::Grammar(format!("undeclared terminal {c:?}")))
                    }
                    _ => {}
                }
            }
        }
        Ok(Cfg {
            terminals,
            nonterminals,
            start,
            rules,
        })
    }

    /// Builds a grammar from `(lhs, rhs)` pairs where the right-hand side is
    /// a space-separated list of tokens; a token is a nonterminal when it
    /// occurs as some left-hand side and a terminal letter otherwise. The
    /// first left-hand side is the start symbol unless `start` is given.
    pub fn from_rules(terminals: &str, start: &str, rules: &[(&str, &str)]) -> Result<Self, Error> {
        let terminals = Alphabet::new(terminals.chars())?;
        let mut names: Vec<String> = Vec::new();
        for name in std::iter::once(start).chain(rules.iter().map(|r| r.0)) {
            if !names.iter().any(|n| n == name) {
                names.push(name.to_string());
            }
        }
        let lookup = |tok: &str| -> Result<Symbol, Error> {
            if let Some(i) = names.iter().position(|n| n == tok) {
                return Ok(Symbol::N(i));
            }
            crate::words::single_char(tok).map(Symbol::T)
        };
        let mut out = Vec::new();
        for (lhs, rhs) in rules {
            let lhs = names.iter().position(|n| n == lhs).unwrap();
            let rhs = rhs.split_whitespace().map(lookup).collect::<Result<Vec<_>, _>>()?;
            out.push(Rule { lhs, rhs });
        }
        Cfg::new(terminals, names, 0, out)
    }

    pub fn from_json(s: &str) -> Result<Self, Error> {
        let raw: GrammarJson = serde_json::from_str(s)?;
        let terminals = Alphabet::from_strings(&raw.terminals)?;
        let names = raw.nonterminals;
        let index = |name: &str| names.iter().position(|n| n == name);
        let start = index(&raw.start).ok_or_else(|| Error::Grammar(format!("start {:?} not declared", raw.start)))?;
        let mut rules = Vec::new();
        for r in &raw.rules {
            let lhs = index(&r.lhs).ok_or_else(|| Error::Grammar(format!("undeclared nonterminal {:?}", r.lhs)))?;
            let mut rhs = Vec::new();
            for tok in &r.rhs {
                if let Some(i) = index(tok) {
                    rhs.push(Symbol::N(i));
                } else {
                    let c = crate::words::single_char(tok)
                        .map_err(|_| Error::Grammar(format!("undeclared symbol {tok:?}")))?;
                    rhs.push(Symbol::T(c));
                }
            }
            rules.push(Rule { lhs, rhs });
        }
        Cfg::new(terminals, names, start, rules)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let raw = GrammarJson {
            terminals: self.terminals.to_strings(),
            nonterminals: self.nonterminals.clone(),
            start: self.nonterminals[self.start].clone(),
            rules: self
                .rules
                .iter()
                .map(|r| RuleJson {
                    lhs: self.nonterminals[r.lhs].clone(),
                    rhs: r.rhs.iter().map(|s| self.symbol_name(*s)).collect(),
                })
                .collect(),
        };
        serde_json::to_value(raw).expect("grammar serializes")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("grammar serializes")
    }

    pub fn terminals(&self) -> &Alphabet {
        &self.terminals
    }

    pub fn nonterminals(&self) -> &[String] {
        &self.nonterminals
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn symbol_name(&self, s: Symbol) -> String {
        match s {
            Symbol::T(c) => c.to_string(),
            Symbol::N(i) => self.nonterminals[i].clone(),
        }
    }

    fn fresh_name(&self, base: &str, taken: &[String]) -> String {
        let mut name = base.to_string();
        while taken.contains(&name) || self.nonterminals.contains(&name) {
            name.push('\'');
        }
        name
    }

    fn productive(&self) -> Vec<bool> {
        let mut prod = vec![false; self.nonterminals.len()];
        let mut changed = true;
        while changed {
            changed = false;
            for r in &self.rules {
                if !prod[r.lhs]
                    && r.rhs.iter().all(|s| match s {
                        Symbol::T(_) => true,
                        Symbol::N(i) => prod[*i],
                    })
                {
                    prod[r.lhs] = true;
                    changed = true;
                }
            }
        }
        prod
    }

    /// Drops unproductive and unreachable nonterminals. The start symbol is
    /// always kept, bare when the language is empty.
    pub fn reduce(&self) -> Cfg {
        let prod = self.productive();
        let useful_rule = |r: &Rule| {
            prod[r.lhs]
                && r.rhs.iter().all(|s| match s {
                    Symbol::T(_) => true,
                    Symbol::N(i) => prod[*i],
                })
        };
        let mut reach = vec![false; self.nonterminals.len()];
        reach[self.start] = true;
        let mut stack = vec![self.start];
        while let Some(a) = stack.pop() {
            for r in self.rules.iter().filter(|r| r.lhs == a && useful_rule(r)) {
                for s in &r.rhs {
                    if let Symbol::N(b) = *s {
                        if !reach[b] {
                            reach[b] = true;
                            stack.push(b);
                        }
                    }
                }
            }
        }
        let mut remap = vec![usize::MAX; self.nonterminals.len()];
        let mut names = Vec::new();
        for (i, name) in self.nonterminals.iter().enumerate() {
            if reach[i] && (prod[i] || i == self.start) {
                remap[i] = names.len();
                names.push(name.clone());
            }
        }
        let rules = self
            .rules
            .iter()
            .filter(|r| useful_rule(r) && reach[r.lhs])
            .map(|r| Rule {
                lhs: remap[r.lhs],
                rhs: r
                    .rhs
                    .iter()
                    .map(|s| match *s {
                        Symbol::N(i) => Symbol::N(remap[i]),
                        t => t,
                    })
                    .collect(),
            })
            .collect();
        Cfg {
            terminals: self.terminals.clone(),
            nonterminals: names,
            start: remap[self.start],
            rules,
        }
    }

    pub fn is_empty_language(&self) -> bool {
        !self.productive()[self.start]
    }

    // ---- derivation counting ----

    // Number of ways each nonterminal derives λ.
    fn empty_counts(&self) -> Vec<Count> {
        let n = self.nonterminals.len();
        let mut nullable = vec![false; n];
        let mut changed = true;
        while changed {
            changed = false;
            for r in &self.rules {
                if !nullable[r.lhs] && r.rhs.iter().all(|s| matches!(s, Symbol::N(i) if nullable[*i])) {
                    nullable[r.lhs] = true;
                    changed = true;
                }
            }
        }
        // A -> B whenever B occurs in a rule of A made only of nullable symbols.
        let mut edges = Vec::new();
        for r in &self.rules {
            if r.rhs.iter().all(|s| matches!(s, Symbol::N(i) if nullable[*i])) {
                for s in &r.rhs {
                    if let Symbol::N(b) = *s {
                        edges.push((r.lhs, b));
                    }
                }
            }
        }
        let infinite = infinite_nodes(n, &edges, &nullable, &[]);
        let mut x: Vec<Count> = (0..n)
            .map(|a| if infinite[a] { Count::Inf } else { Count::ZERO })
            .collect();
        loop {
            let mut next = x.clone();
            for a in (0..n).filter(|&a| !infinite[a]) {
                let mut total = Count::ZERO;
                for r in self.rules.iter().filter(|r| r.lhs == a) {
                    let mut term = Count::ONE;
                    for s in &r.rhs {
                        term = term.mul(match *s {
                            Symbol::T(_) => Count::ZERO,
                            Symbol::N(b) => x[b],
                        });
                    }
                    total = total.add(term);
                }
                next[a] = total;
            }
            if next == x {
                return x;
            }
            x = next;
        }
    }

    /// Derivation counts `N[A][i][j]` for every span of `w`.
    pub(crate) fn span_counts(&self, w: &[char]) -> SpanCounts {
        SpanCounts::compute(self, w)
    }

    /// Number of distinct leftmost derivations of `w`, exact up to `cap`.
    pub fn count_derivations(&self, w: &[char], cap: u64) -> ParseCount {
        self.span_counts(w).get(self.start, 0, w.len()).to_parse_count(cap)
    }

    pub fn derives(&self, w: &[char]) -> bool {
        !self.count_derivations(w, 1).is_zero()
    }

    /// Which prefixes `w[..p]`, `p = 0..=|w|`, are in the language.
    pub fn prefix_membership(&self, w: &[char]) -> Vec<bool> {
        let t = self.span_counts(w);
        (0..=w.len()).map(|p| !t.get(self.start, 0, p).is_zero()).collect()
    }

    // ---- infiniteness ----

    /// Shortest word of each nonterminal, and shortest non-empty word.
    fn short_words(&self) -> (ShortWords, ShortWords) {
        let n = self.nonterminals.len();
        let mut short: Vec<Option<Vec<char>>> = vec![None; n];
        let mut nonempty: Vec<Option<Vec<char>>> = vec![None; n];
        let better = |cur: &Option<Vec<char>>, cand: &Vec<char>| match cur {
            None => true,
            Some(w) => cand.len() < w.len(),
        };
        let mut changed = true;
        while changed {
            changed = false;
            for r in &self.rules {
                let pieces: Option<Vec<Vec<char>>> = r
                    .rhs
                    .iter()
                    .map(|s| match *s {
                        Symbol::T(c) => Some(vec![c]),
                        Symbol::N(b) => short[b].clone(),
                    })
                    .collect();
                let Some(pieces) = pieces else { continue };
                let cand: Vec<char> = pieces.concat();
                if better(&short[r.lhs], &cand) {
                    short[r.lhs] = Some(cand.clone());
                    changed = true;
                }
                for (m, s) in r.rhs.iter().enumerate() {
                    let ne = match *s {
                        Symbol::T(c) => Some(vec![c]),
                        Symbol::N(b) => nonempty[b].clone(),
                    };
                    let Some(ne) = ne else { continue };
                    let mut cand = Vec::new();
                    for (l, p) in pieces.iter().enumerate() {
                        if l == m {
                            cand.extend_from_slice(&ne);
                        } else {
                            cand.extend_from_slice(p);
                        }
                    }
                    if better(&nonempty[r.lhs], &cand) {
                        nonempty[r.lhs] = Some(cand);
                        changed = true;
                    }
                }
            }
        }
        (short, nonempty)
    }

    /// Whether the language is infinite; if so, a pumping witness.
    pub fn is_infinite(&self) -> Option<Pump> {
        let g = self.reduce();
        if g.rules.is_empty() {
            return None;
        }
        let (short, nonempty) = g.short_words();
        let word_of = |s: Symbol| -> Vec<char> {
            match s {
                Symbol::T(c) => vec![c],
                Symbol::N(b) => short[b].clone().unwrap(),
            }
        };
        let can_grow = |s: Symbol| match s {
            Symbol::T(_) => true,
            Symbol::N(b) => nonempty[b].is_some(),
        };
        // edge: (rule, position) from lhs to the nonterminal at that position
        let mut labels = Vec::new();
        let mut pairs = Vec::new();
        for (ri, r) in g.rules.iter().enumerate() {
            for (m, s) in r.rhs.iter().enumerate() {
                if let Symbol::N(b) = *s {
                    labels.push((ri, m));
                    pairs.push((r.lhs, b));
                }
            }
        }
        let eg = EdgeGraph::new(g.nonterminals.len(), pairs);
        let ids = eg.scc_ids();
        let context = |e: usize, grow: bool| -> (Vec<char>, Vec<char>) {
            let (ri, m) = labels[e];
            let rhs = &g.rules[ri].rhs;
            let mut grown = !grow;
            let mut piece = |l: usize| -> Vec<char> {
                if !grown && can_grow(rhs[l]) {
                    grown = true;
                    match rhs[l] {
                        Symbol::T(c) => vec![c],
                        Symbol::N(b) => nonempty[b].clone().unwrap(),
                    }
                } else {
                    word_of(rhs[l])
                }
            };
            let left: Vec<char> = (0..m).flat_map(&mut piece).collect();
            let right: Vec<char> = (m + 1..rhs.len()).flat_map(&mut piece).collect();
            (left, right)
        };
        let grow_edge = (0..labels.len()).find(|&e| {
            let (a, b) = eg.edges[e];
            let (ri, m) = labels[e];
            ids[a] == ids[b] && g.rules[ri].rhs.iter().enumerate().any(|(l, s)| l != m && can_grow(*s))
        })?;
        let (a, b) = eg.edges[grow_edge];
        let back = eg.path(b, a, |v| ids[v] == ids[a]).unwrap();
        let cycle: Vec<usize> = std::iter::once(grow_edge).chain(back).collect();
        let stem = eg.path(g.start, a, |_| true).unwrap();
        let unfold = |edges: &[usize], first_grows: bool| -> (Vec<char>, Vec<char>) {
            let mut left = Vec::new();
            let mut rights: Vec<Vec<char>> = Vec::new();
            for (k, &e) in edges.iter().enumerate() {
                let (l, r) = context(e, first_grows && k == 0);
                left.extend(l);
                rights.push(r);
            }
            let right: Vec<char> = rights.into_iter().rev().flatten().collect();
            (left, right)
        };
        let (prefix, suffix) = unfold(&stem, false);
        let (left, right) = unfold(&cycle, true);
        Some(Pump {
            prefix: prefix.into(),
            left: left.into(),
            middle: short[a].clone().unwrap().into(),
            right: right.into(),
            suffix: suffix.into(),
        })
    }

    /// Longest word length of a finite language (`None` when the language is
    /// empty). Only meaningful when [`Cfg::is_infinite`] is `None`.
    pub fn max_word_len(&self) -> Option<usize> {
        let g = self.reduce();
        if g.rules.is_empty() {
            return None;
        }
        let n = g.nonterminals.len();
        let mut best: Vec<Option<usize>> = vec![None; n];
        // no growing cycles, so lengths stabilise after at most n rounds
        for _ in 0..=n + 1 {
            let mut changed = false;
            for r in &g.rules {
                let len: Option<usize> = r
                    .rhs
                    .iter()
                    .map(|s| match *s {
                        Symbol::T(_) => Some(1),
                        Symbol::N(b) => best[b],
                    })
                    .sum();
                if let Some(len) = len {
                    if best[r.lhs].is_none_or(|b| len > b) {
                        best[r.lhs] = Some(len);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        best[g.start]
    }

    // ---- constructions ----

    /// Grammar of `LF(L(g))`, the set of finite prefixes of words of `L(g)`.
    pub fn prefix_closure(&self) -> Cfg {
        let g = self.reduce();
        let n = g.nonterminals.len();
        if g.rules.is_empty() {
            return g;
        }
        let mut names = g.nonterminals.clone();
        for i in 0..n {
            let primed = g.fresh_name(&format!("{}'", g.nonterminals[i]), &names);
            names.push(primed);
        }
        let primed = |i: usize| n + i;
        let mut rules = g.rules.clone();
        for r in &g.rules {
            if r.rhs.is_empty() {
                rules.push(Rule {
                    lhs: primed(r.lhs),
                    rhs: Vec::new(),
                });
            }
            for (m, s) in r.rhs.iter().enumerate() {
                let head = r.rhs[..m].to_vec();
                match *s {
                    Symbol::T(c) => {
                        rules.push(Rule {
                            lhs: primed(r.lhs),
                            rhs: head.clone(),
                        });
                        let mut full = head;
                        full.push(Symbol::T(c));
                        rules.push(Rule {
                            lhs: primed(r.lhs),
                            rhs: full,
                        });
                    }
                    Symbol::N(b) => {
                        let mut v = head;
                        v.push(Symbol::N(primed(b)));
                        rules.push(Rule {
                            lhs: primed(r.lhs),
                            rhs: v,
                        });
                    }
                }
            }
        }
        let mut rules: Vec<Rule> = rules;
        dedup_rules(&mut rules);
        Cfg {
            terminals: g.terminals.clone(),
            nonterminals: names,
            start: primed(g.start),
            rules,
        }
        .reduce()
    }

    /// Equivalent grammar whose right-hand sides have length at most two.
    fn binarize(&self) -> Cfg {
        let mut names = self.nonterminals.clone();
        let mut rules = Vec::new();
        for (ri, r) in self.rules.iter().enumerate() {
            if r.rhs.len() <= 2 {
                rules.push(r.clone());
                continue;
            }
            let k = r.rhs.len();
            let mut lhs = r.lhs;
            for m in 0..k - 2 {
                let fresh = self.fresh_name(&format!("{}#{ri}.{m}", self.nonterminals[r.lhs]), &names);
                names.push(fresh);
                let next = names.len() - 1;
                rules.push(Rule {
                    lhs,
                    rhs: vec![r.rhs[m], Symbol::N(next)],
                });
                lhs = next;
            }
            rules.push(Rule {
                lhs,
                rhs: vec![r.rhs[k - 2], r.rhs[k - 1]],
            });
        }
        Cfg {
            terminals: self.terminals.clone(),
            nonterminals: names,
            start: self.start,
            rules,
        }
    }

    /// Grammar of `L(g) ∩ L(d)` by the triple construction, restricted to
    /// productive triples and then reduced.
    pub fn intersect_dfa(&self, d: &Dfa) -> Cfg {
        let g = self.binarize();
        let q = d.num_states();
        let n = g.nonterminals.len();
        let idx = |p: usize, a: usize, r: usize| (p * n + a) * q + r;
        let mut prod = vec![false; q * n * q];
        let sym_ok = |prod: &[bool], p: usize, s: Symbol, r: usize| match s {
            Symbol::T(c) => d.step(p, c) == Some(r),
            Symbol::N(b) => prod[idx(p, b, r)],
        };
        let mut changed = true;
        while changed {
            changed = false;
            for rule in &g.rules {
                for p in 0..q {
                    for r in 0..q {
                        if prod[idx(p, rule.lhs, r)] {
                            continue;
                        }
                        let ok = match rule.rhs.as_slice() {
                            [] => p == r,
                            [x] => sym_ok(&prod, p, *x, r),
                            [x, y] => (0..q).any(|m| sym_ok(&prod, p, *x, m) && sym_ok(&prod, m, *y, r)),
                            _ => unreachable!(),
                        };
                        if ok {
                            prod[idx(p, rule.lhs, r)] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        let mut ids: HashMap<usize, usize> = HashMap::new();
        let mut names = vec![g.fresh_name("S^", &[])];
        let mut id_of = |key: usize, names: &mut Vec<String>| -> usize {
            *ids.entry(key).or_insert_with(|| {
                let a = (key / q) % n;
                let (p, r) = (key / (n * q), key % q);
                names.push(format!("[{p},{},{r}]", g.nonterminals[a]));
                names.len() - 1
            })
        };
        let mut rules = Vec::new();
        for f in (0..q).filter(|&f| d.is_accepting(f)) {
            if prod[idx(d.initial(), g.start, f)] {
                let t = id_of(idx(d.initial(), g.start, f), &mut names);
                rules.push(Rule {
                    lhs: 0,
                    rhs: vec![Symbol::N(t)],
                });
            }
        }
        for rule in &g.rules {
            for p in 0..q {
                for r in 0..q {
                    if !prod[idx(p, rule.lhs, r)] {
                        continue;
                    }
                    let lhs = id_of(idx(p, rule.lhs, r), &mut names);
                    let lift =
                        |s: Symbol,
                         a: usize,
                         b: usize,
                         names: &mut Vec<String>,
                         id_of: &mut dyn FnMut(usize, &mut Vec<String>) -> usize| match s {
                            Symbol::T(c) => Symbol::T(c),
                            Symbol::N(x) => Symbol::N(id_of(idx(a, x, b), names)),
                        };
                    match rule.rhs.as_slice() {
                        [] => {
                            if p == r {
                                rules.push(Rule { lhs, rhs: vec![] });
                            }
                        }
                        [x] => {
                            if sym_ok(&prod, p, *x, r) {
                                let s = lift(*x, p, r, &mut names, &mut id_of);
                                rules.push(Rule { lhs, rhs: vec![s] });
                            }
                        }
                        [x, y] => {
                            for m in 0..q {
                                if sym_ok(&prod, p, *x, m) && sym_ok(&prod, m, *y, r) {
                                    let s1 = lift(*x, p, m, &mut names, &mut id_of);
                                    let s2 = lift(*y, m, r, &mut names, &mut id_of);
                                    rules.push(Rule { lhs, rhs: vec![s1, s2] });
                                }
                            }
                        }
                        _ => unreachable!(),
                    }
                }
            }
        }
        Cfg {
            terminals: g.terminals.clone(),
            nonterminals: names,
            start: 0,
            rules,
        }
        .reduce()
    }

    /// All words of length at most `max_len`, by bottom-up generation.
    pub fn words_up_to(&self, max_len: usize) -> BTreeSet<FiniteWord> {
        let n = self.nonterminals.len();
        let mut lang: Vec<BTreeSet<Vec<char>>> = vec![BTreeSet::new(); n];
        let mut changed = true;
        while changed {
            changed = false;
            for r in &self.rules {
                let mut partial: BTreeSet<Vec<char>> = BTreeSet::from([Vec::new()]);
                for s in &r.rhs {
                    let mut next = BTreeSet::new();
                    for p in &partial {
                        match *s {
                            Symbol::T(c) => {
                                if p.len() < max_len {
                                    let mut w = p.clone();
                                    w.push(c);
                                    next.insert(w);
                                }
                            }
                            Symbol::N(b) => {
                                for x in &lang[b] {
                                    if p.len() + x.len() <= max_len {
                                        let mut w = p.clone();
                                        w.extend_from_slice(x);
                                        next.insert(w);
                                    }
                                }
                            }
                        }
                    }
                    partial = next;
                }
                for w in partial {
                    if lang[r.lhs].insert(w) {
                        changed = true;
                    }
                }
            }
        }
        lang[self.start].iter().map(|w| FiniteWord::from(w.clone())).collect()
    }
}

fn dedup_rules(rules: &mut Vec<Rule>) {
    let mut seen = std::collections::HashSet::new();
    rules.retain(|r| seen.insert(r.clone()));
}

impl fmt::Display for Cfg {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in &self.rules {
            write!(f, "{} ->", self.nonterminals[r.lhs])?;
            if r.rhs.is_empty() {
                write!(f, " λ")?;
            }
            for s in &r.rhs {
                write!(f, " {}", self.symbol_name(*s))?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Nodes that are nonzero and can reach, through edges into nonzero nodes,
/// a nonzero node lying on a cycle or one of the extra `seeds`.
fn infinite_nodes(n: usize, edges: &[(usize, usize)], nonzero: &[bool], seeds: &[usize]) -> Vec<bool> {
    let kept: Vec<(usize, usize)> = edges
        .iter()
        .copied()
        .filter(|&(a, b)| nonzero[a] && nonzero[b])
        .collect();
    let g = EdgeGraph::new(n, kept);
    let ids = g.scc_ids();
    let mut inf = vec![false; n];
    let mut stack = Vec::new();
    for &(a, b) in &g.edges {
        if ids[a] == ids[b] && !inf[a] {
            inf[a] = true;
            stack.push(a);
        }
    }
    for &s in seeds {
        if nonzero[s] && !inf[s] {
            inf[s] = true;
            stack.push(s);
        }
    }
    // propagate backwards
    let mut preds = vec![Vec::new(); n];
    for &(a, b) in &g.edges {
        preds[b].push(a);
    }
    while let Some(v) = stack.pop() {
        for &p in &preds[v] {
            if !inf[p] {
                inf[p] = true;
                stack.push(p);
            }
        }
    }
    inf
}

/// Derivation counts for all spans of one word.
pub(crate) struct SpanCounts {
    n: usize,
    len: usize,
    counts: Vec<Count>,
}

impl SpanCounts {
    pub(crate) fn get(&self, a: usize, i: usize, j: usize) -> Count {
        self.counts[(a * (self.len + 1) + i) * (self.len + 1) + j]
    }

    fn compute(g: &Cfg, w: &[char]) -> SpanCounts {
        let n = g.nonterminals.len();
        let len = w.len();
        let side = len + 1;
        let empty = g.empty_counts();
        let mut counts = vec![Count::ZERO; n * side * side];
        let at = |a: usize, i: usize, j: usize| (a * side + i) * side + j;

        // unit-like dependencies: A -> B when B can cover a whole span while
        // the rest of the rule derives λ; weight is the product of λ-counts
        let mut weight: HashMap<(usize, usize), Count> = HashMap::new();
        for r in &g.rules {
            for (m, s) in r.rhs.iter().enumerate() {
                let Symbol::N(b) = *s else { continue };
                let mut cof = Count::ONE;
                for (l, t) in r.rhs.iter().enumerate() {
                    if l != m {
                        cof = cof.mul(match *t {
                            Symbol::T(_) => Count::ZERO,
                            Symbol::N(x) => empty[x],
                        });
                    }
                }
                if !cof.is_zero() {
                    let e = weight.entry((r.lhs, b)).or_insert(Count::ZERO);
                    *e = e.add(cof);
                }
            }
        }
        let unit_edges: Vec<(usize, usize, Count)> = weight.into_iter().map(|((a, b), c)| (a, b, c)).collect();

        // dotted items: item (rule, m) counts ways rhs[..m] derives a span
        let mut item_base = Vec::with_capacity(g.rules.len());
        let mut total_items = 0;
        for r in &g.rules {
            item_base.push(total_items);
            total_items += r.rhs.len() + 1;
        }
        let mut items = vec![Count::ZERO; total_items * side * side];
        let it = |k: usize, i: usize, j: usize| (k * side + i) * side + j;

        for i in 0..=len {
            for a in 0..n {
                counts[at(a, i, i)] = empty[a];
            }
            for (ri, r) in g.rules.iter().enumerate() {
                let mut v = Count::ONE;
                items[it(item_base[ri], i, i)] = v;
                for (m, s) in r.rhs.iter().enumerate() {
                    v = v.mul(match *s {
                        Symbol::T(_) => Count::ZERO,
                        Symbol::N(b) => empty[b],
                    });
                    items[it(item_base[ri] + m + 1, i, i)] = v;
                }
            }
        }

        for span in 1..=len {
            for i in 0..=len - span {
                let j = i + span;
                // pass 1 with the whole span excluded, pass 2 with solved values
                for pass in 0..2 {
                    for (ri, r) in g.rules.iter().enumerate() {
                        let base = item_base[ri];
                        for (m, s) in r.rhs.iter().enumerate() {
                            let mut total = Count::ZERO;
                            for p in i..=j {
                                let left = items[it(base + m, i, p)];
                                if left.is_zero() {
                                    continue;
                                }
                                let right = match *s {
                                    Symbol::T(c) => {
                                        if j == p + 1 && w[p] == c {
                                            Count::ONE
                                        } else {
                                            Count::ZERO
                                        }
                                    }
                                    Symbol::N(b) => {
                                        if pass == 0 && p == i {
                                            Count::ZERO
                                        } else {
                                            counts[at(b, p, j)]
                                        }
                                    }
                                };
                                total = total.add(left.mul(right));
                            }
                            items[it(base + m + 1, i, j)] = total;
                        }
                    }
                    if pass == 1 {
                        break;
                    }
                    let mut constant = vec![Count::ZERO; n];
                    for (ri, r) in g.rules.iter().enumerate() {
                        let v = items[it(item_base[ri] + r.rhs.len(), i, j)];
                        constant[r.lhs] = constant[r.lhs].add(v);
                    }
                    let solved = solve_linear(n, &constant, &unit_edges);
                    for a in 0..n {
                        counts[at(a, i, j)] = solved[a];
                    }
                }
            }
        }
        SpanCounts { n, len, counts }
    }
}

// Least solution of x = c + M x over ℕ ∪ {∞}.
fn solve_linear(n: usize, c: &[Count], m: &[(usize, usize, Count)]) -> Vec<Count> {
    let mut nonzero: Vec<bool> = c.iter().map(|v| !v.is_zero()).collect();
    let mut changed = true;
    while changed {
        changed = false;
        for &(a, b, _) in m {
            if nonzero[b] && !nonzero[a] {
                nonzero[a] = true;
                changed = true;
            }
        }
    }
    let mut seeds: Vec<usize> = (0..n).filter(|&a| c[a] == Count::Inf).collect();
    for &(a, b, w) in m {
        if w == Count::Inf && nonzero[b] {
            seeds.push(a);
        }
    }
    let edges: Vec<(usize, usize)> = m.iter().map(|&(a, b, _)| (a, b)).collect();
    let inf = infinite_nodes(n, &edges, &nonzero, &seeds);
    let mut x: Vec<Count> = (0..n).map(|a| if inf[a] { Count::Inf } else { Count::ZERO }).collect();
    loop {
        let mut next: Vec<Count> = (0..n).map(|a| if inf[a] { Count::Inf } else { c[a] }).collect();
        for &(a, b, w) in m {
            if !inf[a] {
                next[a] = next[a].add(w.mul(x[b]));
            }
        }
        if next == x {
            return x;
        }
        x = next;
    }
}

impl SpanCounts {
    #[allow(dead_code)]
    pub(crate) fn num_nonterminals(&self) -> usize {
        self.n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn w(s: &str) -> Vec<char> {
        s.chars().collect()
    }

    fn g_v() -> Cfg {
        Cfg::from_rules(
            "abc",
            "V",
            &[
                ("V", "V1"),
                ("V", "V2"),
                ("V1", "X C"),
                ("X", "a X b"),
                ("X", "a b"),
                ("C", "c C"),
                ("C", "c"),
                ("V2", "A Y"),
                ("A", "a A"),
                ("A", "a"),
                ("Y", "b Y c"),
                ("Y", "b c"),
            ],
        )
        .unwrap()
    }

    #[test]
    fn counts_on_v() {
        let g = g_v();
        assert_eq!(g.count_derivations(&w("ab"), 10), ParseCount::Exact(0));
        assert_eq!(g.count_derivations(&w("abc"), 10), ParseCount::Exact(2));
        assert_eq!(g.count_derivations(&w("aabc"), 10), ParseCount::Exact(1));
        assert_eq!(g.count_derivations(&w("aabbcc"), 10), ParseCount::Exact(2));
    }

    #[test]
    fn counts_with_cycles_and_lambda() {
        // S -> S | a : infinitely many derivations of "a"
        let g = Cfg::from_rules("a", "S", &[("S", "S"), ("S", "a")]).unwrap();
        assert_eq!(g.count_derivations(&w("a"), 10), ParseCount::Infinite);
        assert_eq!(g.count_derivations(&w("aa"), 10), ParseCount::Exact(0));
        // S -> S S | a | λ
        let g = Cfg::from_rules("a", "S", &[("S", "S S"), ("S", "a"), ("S", "")]).unwrap();
        assert_eq!(g.count_derivations(&w(""), 10), ParseCount::Infinite);
        // S -> A A, A -> a | λ : "a" has two derivations, λ one
        let g = Cfg::from_rules("a", "S", &[("S", "A A"), ("A", "a"), ("A", "")]).unwrap();
        assert_eq!(g.count_derivations(&w("a"), 10), ParseCount::Exact(2));
        assert_eq!(g.count_derivations(&w(""), 10), ParseCount::Exact(1));
        // cycle on a useless branch does not matter
        let g = Cfg::from_rules("ab", "S", &[("S", "a"), ("S", "B"), ("B", "B b")]).unwrap();
        assert_eq!(g.count_derivations(&w("a"), 10), ParseCount::Exact(1));
    }

    #[test]
    fn cap_is_respected() {
        // S -> S S | a : Catalan numbers
        let g = Cfg::from_rules("a", "S", &[("S", "S S"), ("S", "a")]).unwrap();
        assert_eq!(g.count_derivations(&w("aaaa"), 64), ParseCount::Exact(5));
        assert_eq!(g.count_derivations(&w("aaaaaaa"), 64), ParseCount::MoreThan(64));
    }

    #[test]
    fn reduce_examples() {
        let g = Cfg::from_rules("ab", "S", &[("S", "a"), ("B", "b")]).unwrap();
        assert_eq!(g.reduce().nonterminals(), &["S".to_string()]);
        let g = Cfg::from_rules("ab", "S", &[("S", "a"), ("S", "A"), ("A", "a A")]).unwrap();
        let r = g.reduce();
        assert_eq!(r.nonterminals(), &["S".to_string()]);
        assert_eq!(r.rules().len(), 1);
        let gv = g_v();
        assert_eq!(gv.reduce(), gv);
        let empty = Cfg::from_rules("a", "S", &[("S", "S a")]).unwrap().reduce();
        assert!(empty.rules().is_empty() && empty.nonterminals().len() == 1);
    }

    #[test]
    fn infiniteness() {
        let anbn = Cfg::from_rules("ab", "S", &[("S", "a S b"), ("S", "a b")]).unwrap();
        let p = anbn.is_infinite().expect("infinite");
        for k in 0..4 {
            assert!(anbn.derives(p.word(k).letters()), "{}", p.word(k));
        }
        let fin = Cfg::from_rules("ab", "S", &[("S", "a"), ("S", "a b")]).unwrap();
        assert!(fin.is_infinite().is_none());
        assert_eq!(fin.max_word_len(), Some(2));
        // unit cycle alone does not make a language infinite
        let unit = Cfg::from_rules("a", "S", &[("S", "T"), ("T", "S"), ("T", "a")]).unwrap();
        assert!(unit.is_infinite().is_none());
    }

    #[test]
    fn prefix_closure_examples() {
        let g = Cfg::from_rules("ab", "S", &[("S", "a b")]).unwrap();
        let words: Vec<String> = g
            .prefix_closure()
            .words_up_to(5)
            .into_iter()
            .map(String::from)
            .collect();
        assert_eq!(words, vec!["", "a", "ab"]);
        let anbn = Cfg::from_rules("ab", "S", &[("S", "a S b"), ("S", "a b")]).unwrap();
        let got = anbn.prefix_closure().words_up_to(8);
        let mut want = BTreeSet::new();
        for i in 0..=8 {
            want.insert(FiniteWord::from("a".repeat(i)));
        }
        for n in 1..=7 {
            for j in 1..=n {
                if n + j <= 8 {
                    want.insert(FiniteWord::from(format!("{}{}", "a".repeat(n), "b".repeat(j))));
                }
            }
        }
        assert_eq!(got, want);
        let empty = Cfg::from_rules("a", "S", &[("S", "S a")]).unwrap();
        assert!(empty.prefix_closure().words_up_to(4).is_empty());
    }

    #[test]
    fn intersection_examples() {
        let gv = g_v();
        let sigma = gv.terminals().clone();
        // a*b*c*
        let abc = Dfa::new(
            sigma.clone(),
            0,
            vec![true, true, true, false],
            vec![vec![0, 1, 2], vec![3, 1, 2], vec![3, 3, 2], vec![3, 3, 3]],
        )
        .unwrap();
        assert_eq!(gv.intersect_dfa(&abc).words_up_to(9), gv.words_up_to(9));
        let none = Dfa::new(sigma, 0, vec![false], vec![vec![0, 0, 0]]).unwrap();
        assert!(gv.intersect_dfa(&none).is_empty_language());
    }

    #[test]
    fn json_round_trip() {
        let src = r#"{"terminals":["a","b"],"nonterminals":["S"],"start":"S","rules":[{"lhs":"S","rhs":["a","S","b"]},{"lhs":"S","rhs":[]}]}"#;
        let g = Cfg::from_json(src).unwrap();
        assert_eq!(g.count_derivations(&w("aabb"), 4), ParseCount::Exact(1));
        assert_eq!(Cfg::from_json(&g.to_json()).unwrap(), g);
        assert!(Cfg::from_json(r#"{"terminals":["a"],"nonterminals":["a"],"start":"a","rules":[]}"#).is_err());
        assert!(Cfg::from_json(
            r#"{"terminals":["a"],"nonterminals":["S"],"start":"S","rules":[{"lhs":"S","rhs":["x"]}]}"#
        )
        .is_err());
    }
}
