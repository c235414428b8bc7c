//! Language operations: δ-limit, adherence, ω-power, substitution.
//!
//! Membership of a lasso `u·v^ω` in `W^δ` holds iff infinitely many prefixes
//! of the lasso lie in `W`, that is iff `W ∩ LF(u·v^ω)` is infinite. Since
//! `LF(W)` is prefix-closed, `Adh(W) = LF(W)^δ`.

use std::collections::HashMap;

use serde::Serialize;

use crate::cfl::{Cfg, Pump, Rule, Symbol};
use crate::error::Error;
use crate::graph::EdgeGraph;
use crate::pda::{Bpda, Transition};
use crate::words::{Alphabet, FiniteWord, LassoWord};

const WALK_BUDGET: u64 = 2_000_000;
const KEPT_FACTORIZATIONS: usize = 32;

#[derive(Clone, Debug, Serialize)]
pub struct DeltaVerdict {
    pub member: bool,
    /// On `true`: a family of prefixes in `W`, one per pumping exponent.
    pub pump: Option<Pump>,
    /// On `false`: every prefix of the lasso that lies in `W`.
    pub prefixes_in_w: Option<Vec<FiniteWord>>,
}

#[derive(Clone, Debug, Serialize)]
pub struct AdherenceVerdict {
    pub member: bool,
    pub pump: Option<Pump>,
    /// On `false`: the shortest prefix of the lasso outside `LF(W)`.
    pub refutation: Option<FiniteWord>,
}

/// Whether `w` has infinitely many prefixes in `L(g)`.
pub fn delta_limit_member(g: &Cfg, w: &LassoWord) -> DeltaVerdict {
    let hits = g.intersect_dfa(&w.prefix_dfa(g.terminals()));
    if let Some(pump) = hits.is_infinite() {
        return DeltaVerdict {
            member: true,
            pump: Some(pump),
            prefixes_in_w: None,
        };
    }
    let prefixes = match hits.max_word_len() {
        None => Vec::new(),
        Some(k) => {
            let word = w.prefix_of(k);
            g.prefix_membership(word.letters())
                .iter()
                .enumerate()
                .filter(|(_, &m)| m)
                .map(|(i, _)| word.prefix(i))
                .collect()
        }
    };
    DeltaVerdict {
        member: false,
        pump: None,
        prefixes_in_w: Some(prefixes),
    }
}

/// Whether every prefix of `w` is a prefix of some word of `L(g)`.
pub fn adherence_member(g: &Cfg, w: &LassoWord) -> AdherenceVerdict {
    let closure = g.prefix_closure();
    let d = delta_limit_member(&closure, w);
    let refutation = (!d.member).then(|| {
        let longest = d
            .prefixes_in_w
            .as_ref()
            .and_then(|p| p.iter().map(FiniteWord::len).max());
        w.prefix_of(longest.map_or(0, |k| k + 1))
    });
    AdherenceVerdict {
        member: d.member,
        pump: d.pump,
        refutation,
    }
}

fn fresh_chars<'a>(avoid: &'a Alphabet, extra: &[char]) -> impl Iterator<Item = char> + 'a {
    let extra = extra.to_vec();
    ('A'..='Z')
        .chain('\u{E000}'..)
        .filter(move |c| !avoid.contains(*c) && !extra.contains(c))
}

// Stack symbols for a top-down parser: terminals stand for themselves,
// nonterminals get fresh letters, plus a bottom marker.
fn parser_symbols(g: &Cfg) -> (Vec<char>, char) {
    let t = g.terminals();
    let bottom = if t.contains('#') {
        fresh_chars(t, &[]).next().unwrap()
    } else {
        '#'
    };
    let names: Vec<char> = fresh_chars(t, &[bottom]).take(g.nonterminals().len()).collect();
    (names, bottom)
}

fn push_of(rhs: &[Symbol], names: &[char]) -> Vec<char> {
    rhs.iter()
        .map(|s| match *s {
            Symbol::T(c) => c,
            Symbol::N(i) => names[i],
        })
        .collect()
}

/// A BPDA for `L(g)^ω`.
///
/// State `b` is the factor boundary (initial and only final state), `e`
/// parses a factor that has read nothing yet, `n` one that has. The boundary
/// can only be re-entered from `n`, so empty factors are excluded, and each
/// factorization with a choice of leftmost derivations per factor is one run.
pub fn omega_power_bpda(g: &Cfg) -> Bpda {
    let g = g.reduce();
    let (names, bottom) = parser_symbols(&g);
    let (b, e, n) = (0, 1, 2);
    let mut ts = vec![
        Transition {
            from: b,
            input: None,
            top: bottom,
            to: e,
            push: vec![names[g.start()], bottom],
        },
        Transition {
            from: n,
            input: None,
            top: bottom,
            to: b,
            push: vec![bottom],
        },
    ];
    for st in [e, n] {
        for r in g.rules() {
            ts.push(Transition {
                from: st,
                input: None,
                top: names[r.lhs],
                to: st,
                push: push_of(&r.rhs, &names),
            });
        }
        for &c in g.terminals().letters() {
            ts.push(Transition {
                from: st,
                input: Some(c),
                top: c,
                to: n,
                push: Vec::new(),
            });
        }
    }
    let stack: Vec<char> = g
        .terminals()
        .letters()
        .iter()
        .copied()
        .chain(names)
        .chain([bottom])
        .collect();
    Bpda::new(
        vec!["b".into(), "e".into(), "n".into()],
        g.terminals().clone(),
        Alphabet::new(stack).expect("parser stack symbols are distinct"),
        ts,
        b,
        bottom,
        &[b],
    )
    .expect("well-formed construction")
}

/// A BPDA for `L(g)·d^ω` that parses the finite part top-down, then loops on
/// `d` in its only final state.
pub fn concat_omega_bpda(g: &Cfg, d: char) -> Result<Bpda, Error> {
    let g = g.reduce();
    let mut input: Vec<char> = g.terminals().letters().to_vec();
    if !input.contains(&d) {
        input.push(d);
    }
    let input = Alphabet::new(input)?;
    let (names, bottom) = parser_symbols(&g);
    let (i, p, f) = (0, 1, 2);
    let mut ts = vec![
        Transition {
            from: i,
            input: None,
            top: bottom,
            to: p,
            push: vec![names[g.start()], bottom],
        },
        Transition {
            from: p,
            input: Some(d),
            top: bottom,
            to: f,
            push: vec![bottom],
        },
        Transition {
            from: f,
            input: Some(d),
            top: bottom,
            to: f,
            push: vec![bottom],
        },
    ];
    for r in g.rules() {
        ts.push(Transition {
            from: p,
            input: None,
            top: names[r.lhs],
            to: p,
            push: push_of(&r.rhs, &names),
        });
    }
    for &c in g.terminals().letters() {
        ts.push(Transition {
            from: p,
            input: Some(c),
            top: c,
            to: p,
            push: Vec::new(),
        });
    }
    let stack: Vec<char> = g
        .terminals()
        .letters()
        .iter()
        .copied()
        .chain(names)
        .chain([bottom])
        .collect();
    Bpda::new(
        vec!["i".into(), "p".into(), "f".into()],
        input,
        Alphabet::new(stack)?,
        ts,
        i,
        bottom,
        &[f],
    )
}

/// Image of `L(outer)` under the substitution sending each terminal `c` to
/// `L(map[c])`.
pub fn substitute(outer: &Cfg, map: &[(char, Cfg)]) -> Result<Cfg, Error> {
    let images: HashMap<char, &Cfg> = map.iter().map(|(c, g)| (*c, g)).collect();
    let mut terminals: Vec<char> = Vec::new();
    for &c in outer.terminals().letters() {
        let img = images.get(&c).ok_or(Error::UnmappedLetter(c))?;
        for &t in img.terminals().letters() {
            if !terminals.contains(&t) {
                terminals.push(t);
            }
        }
    }
    let mut names: Vec<String> = outer.nonterminals().to_vec();
    let mut rules: Vec<Rule> = Vec::new();
    let mut start_of: HashMap<char, usize> = HashMap::new();
    for &c in outer.terminals().letters() {
        let img = images[&c];
        let base = names.len();
        for n in img.nonterminals() {
            let mut name = format!("{n}[{c}]");
            while names.contains(&name) {
                name.push('\'');
            }
            names.push(name);
        }
        for r in img.rules() {
            rules.push(Rule {
                lhs: base + r.lhs,
                rhs: r
                    .rhs
                    .iter()
                    .map(|s| match *s {
                        Symbol::N(i) => Symbol::N(base + i),
                        t => t,
                    })
                    .collect(),
            });
        }
        start_of.insert(c, base + img.start());
    }
    for r in outer.rules() {
        rules.push(Rule {
            lhs: r.lhs,
            rhs: r
                .rhs
                .iter()
                .map(|s| match *s {
                    Symbol::T(c) => Symbol::N(start_of[&c]),
                    n => n,
                })
                .collect(),
        });
    }
    let terminals = if terminals.is_empty() {
        outer.terminals().clone()
    } else {
        Alphabet::new(terminals)?
    };
    Cfg::new(terminals, names, outer.start(), rules)
}

// ---- factorizations ----

/// An ultimately periodic factorization, as factor lengths.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Factorization {
    pub stem: Vec<usize>,
    pub cycle: Vec<usize>,
}

impl Factorization {
    /// Cut positions (end of each factor) up to position `limit`.
    pub fn cuts(&self, limit: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut pos = 0;
        for &l in self.stem.iter().chain(self.cycle.iter().cycle()) {
            pos += l;
            if pos > limit {
                break;
            }
            out.push(pos);
        }
        out
    }

    /// The first `k` factors of `w`.
    pub fn factors(&self, w: &LassoWord, k: usize) -> Vec<FiniteWord> {
        let mut out = Vec::new();
        let mut pos = 0;
        for &l in self.stem.iter().chain(self.cycle.iter().cycle()).take(k) {
            let letters: Vec<char> = (pos..pos + l).map(|i| w.letter(i)).collect();
            out.push(letters.into());
            pos += l;
        }
        out
    }
}

/// Two different factor cycles at one phase of the word, reached by `path`.
/// Any infinite sequence of the two cycles is a distinct factorization.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FactorizationCertificate {
    pub phase: usize,
    pub path: Vec<usize>,
    pub cycle_a: Vec<usize>,
    pub cycle_b: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionReport {
    pub lower_bound: u64,
    pub exhaustive_within_bounds: bool,
    pub uncountable_certificate: Option<FactorizationCertificate>,
    pub factorizations: Vec<Factorization>,
}

// Phase graph: edge p -> p' labelled ℓ when the ℓ letters read from phase p
// form a word of L(g).
fn phase_graph(g: &Cfg, w: &LassoWord, max_len: usize) -> (EdgeGraph, Vec<usize>) {
    let k = w.phases();
    let mut pairs = Vec::new();
    let mut lens = Vec::new();
    for p in 0..k {
        let mut letters = Vec::with_capacity(max_len);
        let mut ph = p;
        for _ in 0..max_len {
            letters.push(w.letter_at_phase(ph));
            ph = w.next_phase(ph);
        }
        let member = g.prefix_membership(&letters);
        let mut ph = p;
        for (l, _) in letters.iter().enumerate() {
            ph = w.next_phase(ph);
            if member[l + 1] {
                pairs.push((p, ph));
                lens.push(l + 1);
            }
        }
    }
    (EdgeGraph::new(k, pairs), lens)
}

fn primitive(cycle: &[usize]) -> bool {
    let n = cycle.len();
    (1..n)
        .filter(|d| n.is_multiple_of(*d))
        .all(|d| (0..n).any(|i| cycle[i] != cycle[i % d]))
}

/// Counts factorizations of `w` into non-empty words of `L(g)` that are
/// lassos of at most `bound` factors, each of length at most `bound`, and
/// looks for two factor cycles sharing a phase.
pub fn count_decompositions(g: &Cfg, w: &LassoWord, bound: usize) -> DecompositionReport {
    let (graph, lens) = phase_graph(g, w, bound);
    let ids = graph.scc_ids();
    // phases from which some infinite factorization continues
    let on_cycle: Vec<bool> = (0..graph.n)
        .map(|v| graph.edges.iter().any(|&(s, t)| ids[s] == ids[v] && ids[t] == ids[v]))
        .collect();
    let mut useful = on_cycle.clone();
    let mut changed = true;
    while changed {
        changed = false;
        for &(s, t) in &graph.edges {
            if useful[t] && !useful[s] {
                useful[s] = true;
                changed = true;
            }
        }
    }

    let mut count = 0u64;
    let mut found = Vec::new();
    let mut budget_hit = false;
    if useful[0] && bound > 0 {
        let mut budget = WALK_BUDGET;
        let mut walk: Vec<usize> = Vec::new();
        let mut nodes = vec![0usize];
        let mut cursor = vec![0usize];
        loop {
            let depth = walk.len();
            let v = nodes[depth];
            if cursor[depth] < graph.out[v].len() {
                let e = graph.out[v][cursor[depth]];
                cursor[depth] += 1;
                let t = graph.edges[e].1;
                if !useful[t] {
                    continue;
                }
                if budget == 0 {
                    budget_hit = true;
                    break;
                }
                budget -= 1;
                for j in (0..=depth).filter(|&j| nodes[j] == t) {
                    if j > 0 && walk[j - 1] == e {
                        continue;
                    }
                    let mut cycle = walk[j..].to_vec();
                    cycle.push(e);
                    if primitive(&cycle) {
                        count += 1;
                        if found.len() < KEPT_FACTORIZATIONS {
                            found.push(Factorization {
                                stem: walk[..j].iter().map(|&x| lens[x]).collect(),
                                cycle: cycle.iter().map(|&x| lens[x]).collect(),
                            });
                        }
                    }
                }
                if depth + 1 < bound {
                    walk.push(e);
                    nodes.push(t);
                    cursor.push(0);
                }
            } else {
                if depth == 0 {
                    break;
                }
                cursor.pop();
                nodes.pop();
                walk.pop();
            }
        }
    }

    let reach = graph.reachable_from(0);
    let mut certificate = None;
    'search: for x in (0..graph.n).filter(|&x| reach[x] && on_cycle[x]) {
        let inside = |v: usize| ids[v] == ids[x];
        let internal: Vec<usize> = graph.out[x]
            .iter()
            .copied()
            .filter(|&e| inside(graph.edges[e].1))
            .collect();
        if internal.len() >= 2 {
            let back = |e: usize| -> Vec<usize> {
                let mut c = vec![lens[e]];
                let rest = graph.path(graph.edges[e].1, x, inside).expect("same component");
                c.extend(rest.iter().map(|&r| lens[r]));
                c
            };
            let path = graph.path(0, x, |_| true).expect("reachable");
            certificate = Some(FactorizationCertificate {
                phase: x,
                path: path.iter().map(|&e| lens[e]).collect(),
                cycle_a: back(internal[0]),
                cycle_b: back(internal[1]),
            });
            break 'search;
        }
    }
    DecompositionReport {
        lower_bound: count,
        exhaustive_within_bounds: !budget_hit,
        uncountable_certificate: certificate,
        factorizations: found,
    }
}

/// Checks that the certificate's factors are words of `L(g)`, that both
/// cycles return to its phase, and that neither cycle's cut sequence is a
/// prefix of the other's.
pub fn verify_factorization_certificate(g: &Cfg, w: &LassoWord, c: &FactorizationCertificate) -> Result<(), String> {
    let walk = |start: usize, lens: &[usize]| -> Result<usize, String> {
        let mut ph = start;
        for &l in lens {
            if l == 0 {
                return Err("empty factor".into());
            }
            let mut letters = Vec::with_capacity(l);
            for _ in 0..l {
                letters.push(w.letter_at_phase(ph));
                ph = w.next_phase(ph);
            }
            if !g.derives(&letters) {
                return Err(format!("factor {} is not in the language", String::from_iter(letters)));
            }
        }
        Ok(ph)
    };
    if walk(0, &c.path)? != c.phase {
        return Err("path does not reach the phase".into());
    }
    for (name, cyc) in [("a", &c.cycle_a), ("b", &c.cycle_b)] {
        if cyc.is_empty() || walk(c.phase, cyc)? != c.phase {
            return Err(format!("cycle {name} does not return to the phase"));
        }
    }
    if c.cycle_a.starts_with(&c.cycle_b) || c.cycle_b.starts_with(&c.cycle_a) {
        return Err("cycles are equal or one is a prefix of the other".into());
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lasso(s: &str) -> LassoWord {
        s.parse().unwrap()
    }

    fn anbn() -> Cfg {
        Cfg::from_rules("ab", "S", &[("S", "a S b"), ("S", "a b")]).unwrap()
    }

    #[test]
    fn delta_and_adherence_on_anbn() {
        let g = anbn();
        assert!(!delta_limit_member(&g, &lasso("(a)")).member);
        let d = delta_limit_member(&g, &lasso("ab(a)"));
        assert!(!d.member);
        assert_eq!(d.prefixes_in_w.unwrap(), vec![FiniteWord::from("ab")]);
        assert!(adherence_member(&g, &lasso("(a)")).member);
        let a = adherence_member(&g, &lasso("abb(a)"));
        assert!(!a.member);
        assert_eq!(a.refutation.unwrap(), FiniteWord::from("abb"));
        let any_a = Cfg::from_rules("a", "S", &[("S", "a S"), ("S", "a")]).unwrap();
        let d = delta_limit_member(&any_a, &lasso("(a)"));
        assert!(d.member);
        let p = d.pump.unwrap();
        assert!(any_a.derives(p.word(3).letters()));
    }

    #[test]
    fn omega_power_of_ab() {
        let g = Cfg::from_rules("ab", "S", &[("S", "a b")]).unwrap();
        let a = omega_power_bpda(&g);
        assert!(a.accepts_lasso(&lasso("(ab)")));
        assert!(!a.accepts_lasso(&lasso("a(ab)")));
        assert!(!a.accepts_lasso(&lasso("(a)")));
        assert_eq!(a.nonempty_witness().unwrap(), lasso("(ab)"));
        let r = count_decompositions(&g, &lasso("(ab)"), 8);
        assert_eq!(r.lower_bound, 1);
        assert!(r.exhaustive_within_bounds);
        assert!(r.uncountable_certificate.is_none());
    }

    #[test]
    fn omega_power_excludes_empty_factors() {
        let g = Cfg::from_rules("a", "S", &[("S", "a"), ("S", "")]).unwrap();
        let a = omega_power_bpda(&g);
        assert!(a.accepts_lasso(&lasso("(a)")));
        let never = Cfg::from_rules("a", "S", &[("S", "")]).unwrap();
        assert!(omega_power_bpda(&never).is_empty());
    }

    #[test]
    fn a_or_aa_is_not_an_omega_code() {
        let g = Cfg::from_rules("a", "S", &[("S", "a"), ("S", "a a")]).unwrap();
        let w = lasso("(a)");
        let r = count_decompositions(&g, &w, 8);
        assert!(r.lower_bound >= 8);
        let c = r.uncountable_certificate.unwrap();
        assert!(verify_factorization_certificate(&g, &w, &c).is_ok());
        let mut bad = c.clone();
        bad.cycle_b = bad.cycle_a.clone();
        assert!(verify_factorization_certificate(&g, &w, &bad).is_err());
    }

    #[test]
    fn substitution() {
        let outer = Cfg::from_rules("xy", "S", &[("S", "x S"), ("S", "y")]).unwrap();
        let img_x = Cfg::from_rules("ab", "A", &[("A", "a")]).unwrap();
        let img_y = Cfg::from_rules("ab", "B", &[("B", "b b")]).unwrap();
        let g = substitute(&outer, &[('x', img_x.clone()), ('y', img_y)]).unwrap();
        assert!(g.derives(&['a', 'a', 'b', 'b']));
        assert!(!g.derives(&['a', 'b']));
        assert!(matches!(
            substitute(&outer, &[('x', img_x)]),
            Err(Error::UnmappedLetter('y'))
        ));
    }

    #[test]
    fn concat_omega() {
        let a = concat_omega_bpda(&anbn(), 'c').unwrap();
        assert!(a.accepts_lasso(&lasso("aabb(c)")));
        assert!(!a.accepts_lasso(&lasso("aab(c)")));
        let r = a.count_runs_bounded(&lasso("ab(c)"), 64, 16);
        assert_eq!(r.lower_bound, 1);
        assert!(r.exhaustive_within_bounds);
    }
}
