//! The example languages, automata and relations, with direct set-builder
//! predicates and closed-form checkers to test the deciders against.

use rand::RngExt;
use serde::Serialize;

use crate::cfl::Cfg;
use crate::error::Error;
use crate::ops::{concat_omega_bpda, omega_power_bpda, substitute};
use crate::pda::Bpda;
use crate::relations::TwoTapeBa;
use crate::words::{FiniteWord, LassoWord};

#[derive(Clone, Debug)]
pub enum CorpusObject {
    Grammar(Cfg),
    Bpda(Bpda),
    Relation(TwoTapeBa),
}

#[derive(Clone, Debug)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub definition: &'static str,
    pub object: CorpusObject,
}

impl CorpusEntry {
    pub fn grammar(&self) -> Option<&Cfg> {
        match &self.object {
            CorpusObject::Grammar(g) => Some(g),
            _ => None,
        }
    }

    pub fn bpda(&self) -> Option<&Bpda> {
        match &self.object {
            CorpusObject::Bpda(a) => Some(a),
            _ => None,
        }
    }

    pub fn relation(&self) -> Option<&TwoTapeBa> {
        match &self.object {
            CorpusObject::Relation(t) => Some(t),
            _ => None,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self.object {
            CorpusObject::Grammar(_) => "grammar",
            CorpusObject::Bpda(_) => "bpda",
            CorpusObject::Relation(_) => "relation",
        }
    }

    /// The object in its JSON file format.
    pub fn object_json(&self) -> serde_json::Value {
        match &self.object {
            CorpusObject::Grammar(g) => g.to_json_value(),
            CorpusObject::Bpda(a) => a.to_json_value(),
            CorpusObject::Relation(t) => t.to_json_value(),
        }
    }
}

const ENTRIES: &[(&str, &str)] = &[
    ("D", "{u d v | u, v ∈ {0,1}*, |v| = 2|u| or |v| = 2|u|+1}"),
    ("W", "0*1"),
    ("gW", "g(W) with g(a) = a·D"),
    ("L1", "{aⁿbⁿcᵖd²ⁱ} ∪ {aⁿbᵖcᵖd²ⁱ⁺¹}, n, p, i ≥ 1"),
    ("V1", "{aⁿbⁿcᵖ | n, p ≥ 1}"),
    ("V2", "{aⁿbᵖcᵖ | n, p ≥ 1}"),
    ("V", "V1 ∪ V2, one branch per part"),
    ("Lp", "non-empty palindromes over {a,b}"),
    ("C", "{u v | u, v non-empty palindromes over {a,b}}"),
    ("Lstar", "V* ∪ {a, b, c}"),
    ("V_d_omega", "BPDA for V·d^ω, parsing V top-down"),
    ("anbn_c_omega", "deterministic BPDA for {aⁿbⁿ | n ≥ 1}·c^ω"),
    ("gW_omega", "BPDA for g(W)^ω"),
    ("Lstar_omega", "BPDA for (V* ∪ {a,b,c})^ω"),
    ("T_id", "2-tape automaton copying {a,b} input to output"),
    ("T_all", "2-tape automaton accepting every pair over {a,b}"),
    ("T_double_loop", "two distinct final self-loops reading (a, a)"),
    ("T_no_final", "copying automaton without final states"),
];

pub fn names() -> Vec<&'static str> {
    ENTRIES.iter().map(|e| e.0).collect()
}

pub fn get(name: &str) -> Result<CorpusEntry, Error> {
    let (name, definition) = *ENTRIES
        .iter()
        .find(|e| e.0 == name)
        .ok_or_else(|| Error::UnknownEntry(name.to_string()))?;
    let object = match name {
        "D" => CorpusObject::Grammar(grammar_d()),
        "W" => CorpusObject::Grammar(grammar_w()),
        "gW" => CorpusObject::Grammar(grammar_gw()),
        "L1" => CorpusObject::Grammar(grammar_l1()),
        "V1" => CorpusObject::Grammar(grammar(&["V1"])),
        "V2" => CorpusObject::Grammar(grammar(&["V2"])),
        "V" => CorpusObject::Grammar(grammar_v()),
        "Lp" => CorpusObject::Grammar(grammar_lp()),
        "C" => CorpusObject::Grammar(grammar_c()),
        "Lstar" => CorpusObject::Grammar(grammar_lstar()),
        "V_d_omega" => CorpusObject::Bpda(concat_omega_bpda(&grammar_v(), 'd').expect("valid")),
        "anbn_c_omega" => CorpusObject::Bpda(anbn_c_omega()),
        "gW_omega" => CorpusObject::Bpda(omega_power_bpda(&grammar_gw())),
        "Lstar_omega" => CorpusObject::Bpda(omega_power_bpda(&grammar_lstar())),
        "T_id" => CorpusObject::Relation(relation_id(&["q0"])),
        "T_all" => CorpusObject::Relation(
            TwoTapeBa::from_table(
                &["q0"],
                "ab",
                "ab",
                "q0",
                &["q0"],
                &[
                    ("q0", "a", "a", "q0"),
                    ("q0", "a", "b", "q0"),
                    ("q0", "b", "a", "q0"),
                    ("q0", "b", "b", "q0"),
                ],
            )
            .expect("valid"),
        ),
        "T_double_loop" => CorpusObject::Relation(
            TwoTapeBa::from_table(
                &["q"],
                "a",
                "a",
                "q",
                &["q"],
                &[("q", "a", "a", "q"), ("q", "a", "a", "q")],
            )
            .expect("valid"),
        ),
        "T_no_final" => CorpusObject::Relation(relation_id(&[])),
        _ => unreachable!(),
    };
    Ok(CorpusEntry {
        name,
        definition,
        object,
    })
}

#[derive(Serialize)]
struct Dump<'a> {
    name: &'a str,
    kind: &'a str,
    definition: &'a str,
    object: serde_json::Value,
}

/// The entry with its metadata, as emitted by `corpus dump`.
pub fn dump(name: &str) -> Result<serde_json::Value, Error> {
    let e = get(name)?;
    Ok(serde_json::to_value(Dump {
        name: e.name,
        kind: e.kind(),
        definition: e.definition,
        object: e.object_json(),
    })?)
}

fn relation_id(finals: &[&str]) -> TwoTapeBa {
    TwoTapeBa::from_table(
        &["q0"],
        "ab",
        "ab",
        "q0",
        finals,
        &[("q0", "a", "a", "q0"), ("q0", "b", "b", "q0")],
    )
    .expect("valid")
}

fn build(terminals: &str, start: &str, rules: &[(String, String)]) -> Cfg {
    let refs: Vec<(&str, &str)> = rules.iter().map(|(a, b)| (a.as_str(), b.as_str())).collect();
    Cfg::from_rules(terminals, start, &refs).expect("corpus grammar is well-formed")
}

fn rules(list: &[(&str, &str)]) -> Vec<(String, String)> {
    list.iter().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

fn d_rules() -> Vec<(String, String)> {
    let mut r = rules(&[("D", "Deven"), ("D", "Dodd"), ("Deven", "d")]);
    for y in ['0', '1'] {
        r.push(("Dodd".into(), format!("d {y}")));
    }
    for x in ['0', '1'] {
        for y in ['0', '1'] {
            for z in ['0', '1'] {
                r.push(("Deven".into(), format!("{x} Deven {y} {z}")));
                r.push(("Dodd".into(), format!("{x} Dodd {y} {z}")));
            }
        }
    }
    r
}

fn grammar_d() -> Cfg {
    build("01d", "D", &d_rules())
}

fn grammar_w() -> Cfg {
    build("01", "W", &rules(&[("W", "0 W"), ("W", "1")]))
}

/// `g(W)` obtained by substituting `a·D` for each letter `a` of `W`.
pub fn grammar_gw() -> Cfg {
    let image = |a: char| {
        let mut r = vec![("S".to_string(), format!("{a} D"))];
        r.extend(d_rules());
        build("01d", "S", &r)
    };
    substitute(&grammar_w(), &[('0', image('0')), ('1', image('1'))]).expect("all letters mapped")
}

fn v_rules(parts: &[&str]) -> Vec<(String, String)> {
    let mut r = Vec::new();
    if parts.contains(&"V1") {
        r.extend(rules(&[
            ("V1", "X C"),
            ("X", "a X b"),
            ("X", "a b"),
            ("C", "c C"),
            ("C", "c"),
        ]));
    }
    if parts.contains(&"V2") {
        r.extend(rules(&[
            ("V2", "A Y"),
            ("A", "a A"),
            ("A", "a"),
            ("Y", "b Y c"),
            ("Y", "b c"),
        ]));
    }
    r
}

fn grammar(parts: &[&str]) -> Cfg {
    build("abc", parts[0], &v_rules(parts))
}

fn grammar_v() -> Cfg {
    let mut r = rules(&[("V", "V1"), ("V", "V2")]);
    r.extend(v_rules(&["V1", "V2"]));
    build("abc", "V", &r)
}

fn grammar_l1() -> Cfg {
    let mut r = rules(&[
        ("L1", "V1 E"),
        ("L1", "V2 O"),
        ("E", "d d E"),
        ("E", "d d"),
        ("O", "d E"),
    ]);
    r.extend(v_rules(&["V1", "V2"]));
    build("abcd", "L1", &r)
}

fn palindrome_rules() -> Vec<(String, String)> {
    rules(&[
        ("P", "a"),
        ("P", "b"),
        ("P", "a a"),
        ("P", "b b"),
        ("P", "a P a"),
        ("P", "b P b"),
    ])
}

fn grammar_lp() -> Cfg {
    build("ab", "P", &palindrome_rules())
}

fn grammar_c() -> Cfg {
    let mut r = rules(&[("C", "P P")]);
    r.extend(palindrome_rules());
    build("ab", "C", &r)
}

fn grammar_lstar() -> Cfg {
    let mut r = rules(&[
        ("L", "T"),
        ("L", "a"),
        ("L", "b"),
        ("L", "c"),
        ("T", ""),
        ("T", "V T"),
        ("V", "V1"),
        ("V", "V2"),
    ]);
    r.extend(v_rules(&["V1", "V2"]));
    build("abc", "L", &r)
}

fn anbn_c_omega() -> Bpda {
    Bpda::from_table(
        &["s", "t", "f"],
        "abc",
        "ZA",
        "s",
        'Z',
        &["f"],
        &[
            ("s", Some('a'), 'Z', "s", "AZ"),
            ("s", Some('a'), 'A', "s", "AA"),
            ("s", Some('b'), 'A', "t", ""),
            ("t", Some('b'), 'A', "t", ""),
            ("t", Some('c'), 'Z', "f", "Z"),
            ("f", Some('c'), 'Z', "f", "Z"),
        ],
    )
    .expect("valid")
}

// ---- direct predicates ----

// Maximal blocks of equal letters.
fn blocks(x: &[char]) -> Vec<(char, usize)> {
    let mut out: Vec<(char, usize)> = Vec::new();
    for &c in x {
        match out.last_mut() {
            Some((d, n)) if *d == c => *n += 1,
            _ => out.push((c, 1)),
        }
    }
    out
}

fn shape(x: &[char], letters: &str) -> Option<Vec<usize>> {
    let b = blocks(x);
    let want: Vec<char> = letters.chars().collect();
    if b.len() != want.len() || b.iter().zip(&want).any(|((c, _), w)| c != w) {
        return None;
    }
    Some(b.iter().map(|p| p.1).collect())
}

pub fn in_d(x: &[char]) -> bool {
    let Some(p) = x.iter().position(|&c| c == 'd') else {
        return false;
    };
    let (u, v) = (&x[..p], &x[p + 1..]);
    let bin = |s: &[char]| s.iter().all(|&c| c == '0' || c == '1');
    bin(u) && bin(v) && (v.len() == 2 * u.len() || v.len() == 2 * u.len() + 1)
}

pub fn in_w(x: &[char]) -> bool {
    matches!(x.split_last(), Some((&'1', rest)) if rest.iter().all(|&c| c == '0'))
}

/// Membership in `g(0ⁿ1)` for some `n`, by direct search over block cuts.
pub fn in_gw(x: &[char]) -> bool {
    let n = x.len();
    // ok[i]: x[..i] is a concatenation of blocks 0·D
    let mut ok = vec![false; n + 1];
    ok[0] = true;
    for i in 0..n {
        if !ok[i] || x[i] != '0' {
            continue;
        }
        for j in i + 2..=n {
            if in_d(&x[i + 1..j]) {
                ok[j] = true;
            }
        }
    }
    (0..n).any(|i| ok[i] && x[i] == '1' && in_d(&x[i + 1..]))
}

pub fn in_v1(x: &[char]) -> bool {
    matches!(shape(x, "abc").as_deref(), Some([n, m, _]) if n == m)
}

pub fn in_v2(x: &[char]) -> bool {
    matches!(shape(x, "abc").as_deref(), Some([_, m, p]) if m == p)
}

pub fn in_v(x: &[char]) -> bool {
    in_v1(x) || in_v2(x)
}

pub fn in_l1(x: &[char]) -> bool {
    let ds = x.iter().rev().take_while(|&&c| c == 'd').count();
    let head = &x[..x.len() - ds];
    ds >= 2 && ((ds % 2 == 0 && in_v1(head)) || (ds % 2 == 1 && in_v2(head)))
}

pub fn in_lp(x: &[char]) -> bool {
    !x.is_empty() && x.iter().all(|&c| c == 'a' || c == 'b') && x.iter().eq(x.iter().rev())
}

pub fn in_c(x: &[char]) -> bool {
    (1..x.len()).any(|i| in_lp(&x[..i]) && in_lp(&x[i..]))
}

pub fn in_lstar(x: &[char]) -> bool {
    if x.len() == 1 && "abc".contains(x[0]) {
        return true;
    }
    let n = x.len();
    let mut ok = vec![false; n + 1];
    ok[0] = true;
    for i in 0..n {
        if ok[i] {
            for j in i + 1..=n {
                if in_v(&x[i..j]) {
                    ok[j] = true;
                }
            }
        }
    }
    ok[n]
}

/// The set-builder predicate of a grammar entry.
pub fn word_predicate(name: &str) -> Option<fn(&[char]) -> bool> {
    Some(match name {
        "D" => in_d,
        "W" => in_w,
        "gW" => in_gw,
        "L1" => in_l1,
        "V1" => in_v1,
        "V2" => in_v2,
        "V" => in_v,
        "Lp" => in_lp,
        "C" => in_c,
        "Lstar" => in_lstar,
        _ => return None,
    })
}

// ---- closed forms on lassos ----

pub const CLOSED_FORMS: &[&str] = &["Adh_L1", "Adh_C", "delta_L1", "delta_V", "Lstar_omega"];

fn anbn(u: &[char]) -> bool {
    matches!(shape(u, "ab").as_deref(), Some([n, m]) if n == m)
}

/// Evaluates a closed-form description directly on the canonical `(u, v)`.
pub fn reference_check(name: &str, w: &LassoWord) -> Result<bool, Error> {
    let (u, v) = (w.prefix(), w.period());
    let over = |s: &str| w.letters().iter().all(|c| s.contains(*c));
    Ok(match name {
        // a^ω ∪ a⁺b^ω ∪ {aⁿbⁿ}c^ω ∪ V·d^ω
        "Adh_L1" => {
            (u.is_empty() && v == ['a'])
                || (!u.is_empty() && u.iter().all(|&c| c == 'a') && v == ['b'])
                || (anbn(u) && v == ['c'])
                || (in_v(u) && v == ['d'])
        }
        "Adh_C" => over("ab"),
        "delta_L1" => in_v(u) && v == ['d'],
        "delta_V" => anbn(u) && v == ['c'],
        "Lstar_omega" => over("abc"),
        _ => return Err(Error::UnknownEntry(name.to_string())),
    })
}

/// Letters over which a closed form is sampled.
pub fn closed_form_alphabet(name: &str) -> Option<&'static [char]> {
    Some(match name {
        "Adh_L1" | "delta_L1" => &['a', 'b', 'c', 'd'],
        "Adh_C" => &['a', 'b'],
        "delta_V" | "Lstar_omega" => &['a', 'b', 'c'],
        _ => return None,
    })
}

/// A random canonical lasso for a closed form. A third are uniform with
/// `|u| ≤ 6`, `|v| ≤ 4`; a third have `u = aⁱbʲcᵏ` (`i, j, k ≤ 3`) and a
/// short random period; a third have `u = aⁿbᵐcᵖ` with `m = n` or `p = m`
/// more often than not and the period one letter, which hits the
/// non-trivial branches of the closed forms.
pub fn sample_lasso<R: RngExt + ?Sized>(name: &str, rng: &mut R) -> Result<LassoWord, Error> {
    let letters = closed_form_alphabet(name).ok_or_else(|| Error::UnknownEntry(name.to_string()))?;
    let mut u = Vec::new();
    let v: Vec<char> = match rng.random_range(0..3) {
        0 => return Ok(LassoWord::random(rng, letters, 6, 4)),
        1 => {
            for &c in letters.iter().take(3) {
                u.extend(std::iter::repeat_n(c, rng.random_range(0..=3)));
            }
            let v_len = rng.random_range(1..=2);
            (0..v_len)
                .map(|_| letters[rng.random_range(0..letters.len())])
                .collect()
        }
        _ => {
            let n = rng.random_range(1..=3);
            let m = if rng.random_bool(0.5) {
                n
            } else {
                rng.random_range(1..=3)
            };
            let p = if rng.random_bool(0.5) {
                m
            } else {
                rng.random_range(1..=3)
            };
            for (&c, k) in letters.iter().zip([n, m, p]) {
                u.extend(std::iter::repeat_n(c, k));
            }
            let last = if rng.random_bool(0.75) {
                letters.len() - 1
            } else {
                rng.random_range(0..letters.len())
            };
            vec![letters[last]]
        }
    };
    LassoWord::canonicalize(&u, &v)
}

// ---- decoding g(W) ----

/// `x = c₁u₁dv₁ · c₂u₂dv₂ ⋯` with `c_i = 0` except the last, which is `1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GwDecomposition {
    pub n: usize,
    pub blocks: Vec<(FiniteWord, FiniteWord)>,
}

impl GwDecomposition {
    /// Block boundaries, as positions where each block ends.
    pub fn cuts(&self) -> Vec<usize> {
        let mut pos = 0;
        self.blocks
            .iter()
            .map(|(u, v)| {
                pos += u.len() + v.len() + 2;
                pos
            })
            .collect()
    }
}

/// Decodes a word of `g(W)` from right to left: the suffix after the last
/// `d` is `v`, whose length fixes `|u|`, and the segment before fixes the
/// previous `v`, and so on. `None` when `x ∉ g(W)`.
pub fn decode_gw(x: &[char]) -> Option<GwDecomposition> {
    if x.iter().any(|&c| !"01d".contains(c)) {
        return None;
    }
    let ds: Vec<usize> = (0..x.len()).filter(|&i| x[i] == 'd').collect();
    let m = ds.len();
    if m == 0 {
        return None;
    }
    let mut blocks = Vec::with_capacity(m);
    let mut end = x.len();
    for k in (0..m).rev() {
        let p = ds[k];
        if p >= end {
            return None;
        }
        let v = &x[p + 1..end];
        let ulen = v.len() / 2;
        let start = p.checked_sub(ulen + 1)?;
        if k > 0 && start <= ds[k - 1] {
            return None;
        }
        let lead = if k + 1 == m { '1' } else { '0' };
        if x[start] != lead {
            return None;
        }
        blocks.push((FiniteWord::from(&x[start + 1..p]), FiniteWord::from(v)));
        end = start;
    }
    if end != 0 {
        return None;
    }
    blocks.reverse();
    Some(GwDecomposition { n: m - 1, blocks })
}
