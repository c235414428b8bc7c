//! Alphabets, finite words and ultimately periodic ω-words.
//!
//! Every ω-word the library manipulates is a lasso `u·v^ω`, kept in a
//! canonical form so that equality of ω-words is structural equality.

use std::fmt;
use std::str::FromStr;

use rand::RngExt;
use serde::{Deserialize, Serialize};

use crate::error::Error;

/// A finite, non-empty, duplicate-free set of single-character letters.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Alphabet(Vec<char>);

impl Alphabet {
    pub fn new<I: IntoIterator<Item = char>>(letters: I) -> Result<Self, Error> {
        let mut v: Vec<char> = Vec::new();
        for c in letters {
            if v.contains(&c) {
                return Err(Error::Alphabet(format!("duplicate letter {c:?}")));
            }
            v.push(c);
        }
        if v.is_empty() {
            return Err(Error::Alphabet("alphabet is empty".into()));
        }
        Ok(Alphabet(v))
    }

    /// Parses a list of one-character strings, as used by the JSON formats.
    pub fn from_strings(items: &[String]) -> Result<Self, Error> {
        let letters = items.iter().map(|s| single_char(s)).collect::<Result<Vec<_>, _>>()?;
        Alphabet::new(letters)
    }

    pub fn letters(&self) -> &[char] {
        &self.0
    }

    pub fn contains(&self, c: char) -> bool {
        self.0.contains(&c)
    }

    pub fn index_of(&self, c: char) -> Option<usize> {
        self.0.iter().position(|&x| x == c)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn to_strings(&self) -> Vec<String> {
        self.0.iter().map(|c| c.to_string()).collect()
    }
}

pub(crate) fn single_char(s: &str) -> Result<char, Error> {
    let mut it = s.chars();
    match (it.next(), it.next()) {
        (Some(c), None) => Ok(c),
        _ => Err(Error::Alphabet(format!("symbols must be single characters, got {s:?}"))),
    }
}

/// A finite word; the empty word λ is allowed.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "String", from = "String")]
pub struct FiniteWord(Vec<char>);

impl FiniteWord {
    pub fn empty() -> Self {
        FiniteWord(Vec::new())
    }

    pub fn letters(&self) -> &[char] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `x[i]`: the prefix of length `i`.
    pub fn prefix(&self, i: usize) -> FiniteWord {
        FiniteWord(self.0[..i.min(self.0.len())].to_vec())
    }

    /// The mirror image `u^R`.
    pub fn mirror(&self) -> FiniteWord {
        FiniteWord(self.0.iter().rev().copied().collect())
    }

    pub fn concat(&self, other: &FiniteWord) -> FiniteWord {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        FiniteWord(v)
    }

    pub fn is_over(&self, alphabet: &Alphabet) -> bool {
        self.0.iter().all(|&c| alphabet.contains(c))
    }
}

impl From<Vec<char>> for FiniteWord {
    fn from(v: Vec<char>) -> Self {
        FiniteWord(v)
    }
}

impl From<&[char]> for FiniteWord {
    fn from(v: &[char]) -> Self {
        FiniteWord(v.to_vec())
    }
}

impl From<&str> for FiniteWord {
    fn from(s: &str) -> Self {
        FiniteWord(s.chars().collect())
    }
}

impl From<String> for FiniteWord {
    fn from(s: String) -> Self {
        FiniteWord(s.chars().collect())
    }
}

impl From<FiniteWord> for String {
    fn from(w: FiniteWord) -> Self {
        w.0.into_iter().collect()
    }
}

impl fmt::Display for FiniteWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.0 {
            write!(f, "{c}")?;
        }
        Ok(())
    }
}

/// An ultimately periodic ω-word `prefix · period^ω` in canonical form.
///
/// Canonical means the period is primitive and the prefix is as short as
/// possible, so two lassos denote the same ω-word iff they are equal.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct LassoWord {
    prefix: Vec<char>,
    period: Vec<char>,
}

fn primitive_root(v: &[char]) -> &[char] {
    let n = v.len();
    for d in 1..=n {
        if n.is_multiple_of(d) && (d..n).all(|i| v[i] == v[i - d]) {
            return &v[..d];
        }
    }
    v
}

impl LassoWord {
    /// Builds the canonical lasso denoting `prefix · period^ω`.
    pub fn canonicalize(prefix: &[char], period: &[char]) -> Result<Self, Error> {
        if period.is_empty() {
            return Err(Error::Lasso("period must be non-empty".into()));
        }
        let mut period = primitive_root(period).to_vec();
        let mut prefix = prefix.to_vec();
        while let (Some(&a), Some(&b)) = (prefix.last(), period.last()) {
            if a != b {
                break;
            }
            prefix.pop();
            period.rotate_right(1);
        }
        Ok(LassoWord { prefix, period })
    }

    pub fn new(prefix: impl Into<FiniteWord>, period: impl Into<FiniteWord>) -> Result<Self, Error> {
        let (u, v) = (prefix.into(), period.into());
        LassoWord::canonicalize(u.letters(), v.letters())
    }

    /// A random lasso with `|u| ≤ max_prefix` and `1 ≤ |v| ≤ max_period`
    /// before canonicalization.
    pub fn random<R: RngExt + ?Sized>(rng: &mut R, letters: &[char], max_prefix: usize, max_period: usize) -> Self {
        let u_len = rng.random_range(0..=max_prefix);
        let v_len = rng.random_range(1..=max_period.max(1));
        let mut pick =
            |n: usize| -> Vec<char> { (0..n).map(|_| letters[rng.random_range(0..letters.len())]).collect() };
        let u = pick(u_len);
        let v = pick(v_len);
        LassoWord::canonicalize(&u, &v).expect("non-empty period")
    }

    pub fn prefix(&self) -> &[char] {
        &self.prefix
    }

    pub fn period(&self) -> &[char] {
        &self.period
    }

    /// Number of distinct phases, `|u| + |v|`.
    pub fn phases(&self) -> usize {
        self.prefix.len() + self.period.len()
    }

    /// Letter read at a phase.
    pub fn letter_at_phase(&self, phase: usize) -> char {
        if phase < self.prefix.len() {
            self.prefix[phase]
        } else {
            self.period[phase - self.prefix.len()]
        }
    }

    /// Phase reached after reading one letter from `phase`.
    pub fn next_phase(&self, phase: usize) -> usize {
        if phase + 1 < self.phases() {
            phase + 1
        } else {
            self.prefix.len()
        }
    }

    /// Phase of absolute position `i` (0-based).
    pub fn phase_of(&self, i: usize) -> usize {
        let u = self.prefix.len();
        if i < u {
            i
        } else {
            u + (i - u) % self.period.len()
        }
    }

    /// Letter at absolute position `i` (0-based).
    pub fn letter(&self, i: usize) -> char {
        self.letter_at_phase(self.phase_of(i))
    }

    /// The first `n` letters, `x[n]`.
    pub fn prefix_of(&self, n: usize) -> FiniteWord {
        FiniteWord((0..n).map(|i| self.letter(i)).collect())
    }

    pub fn is_over(&self, alphabet: &Alphabet) -> bool {
        self.prefix.iter().chain(&self.period).all(|&c| alphabet.contains(c))
    }

    /// Letters occurring in the word, in first-occurrence order.
    pub fn letters(&self) -> Vec<char> {
        let mut out = Vec::new();
        for &c in self.prefix.iter().chain(&self.period) {
            if !out.contains(&c) {
                out.push(c);
            }
        }
        out
    }

    /// Deterministic acceptor of the finite prefixes of this word.
    ///
    /// States `0..=|u|+|v|` are live (state `i` means `i` letters read, with
    /// state `|u|+|v|` looping back into the period); the last state is a sink.
    pub fn prefix_dfa(&self, alphabet: &Alphabet) -> Dfa {
        let n = self.phases();
        let sink = n + 1;
        let k = alphabet.len();
        let mut table = vec![vec![sink; k]; n + 2];
        for (i, row) in table.iter_mut().enumerate().take(n + 1) {
            let (letter, next) = if i < n {
                (self.letter_at_phase(i), i + 1)
            } else {
                (self.period[0], self.prefix.len() + 1)
            };
            if let Some(j) = alphabet.index_of(letter) {
                row[j] = next;
            }
        }
        let mut accepting = vec![true; n + 2];
        accepting[sink] = false;
        Dfa {
            alphabet: alphabet.clone(),
            initial: 0,
            accepting,
            table,
        }
    }
}

impl fmt::Display for LassoWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.prefix {
            write!(f, "{c}")?;
        }
        write!(f, "(")?;
        for c in &self.period {
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl FromStr for LassoWord {
    type Err = Error;

    /// Parses the `u(v)` syntax.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = |why: &str| Error::Lasso(format!("{s:?}: {why}"));
        let open = s.find('(').ok_or_else(|| bad("missing '('"))?;
        if !s.ends_with(')') {
            return Err(bad("must end with ')'"));
        }
        let u = &s[..open];
        let v = &s[open + 1..s.len() - 1];
        if u.contains([')', '(']) || v.contains([')', '(']) {
            return Err(bad("parentheses may only delimit the period"));
        }
        if v.is_empty() {
            return Err(bad("period must be non-empty"));
        }
        let u: Vec<char> = u.chars().collect();
        let v: Vec<char> = v.chars().collect();
        LassoWord::canonicalize(&u, &v)
    }
}

impl Serialize for LassoWord {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for LassoWord {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// A complete deterministic finite automaton over a fixed alphabet.
#[derive(Clone, Debug)]
pub struct Dfa {
    alphabet: Alphabet,
    initial: usize,
    accepting: Vec<bool>,
    // table[state][letter index]
    table: Vec<Vec<usize>>,
}

impl Dfa {
    pub fn new(
        alphabet: Alphabet,
        initial: usize,
        accepting: Vec<bool>,
        table: Vec<Vec<usize>>,
    ) -> Result<Self, Error> {
        let n = table.len();
        if initial >= n || accepting.len() != n {
            return Err(Error::Automaton("inconsistent DFA dimensions".into()));
        }
        if table
            .iter()
            .any(|row| row.len() != alphabet.len() || row.iter().any(|&t| t >= n))
        {
            return Err(Error::Automaton("DFA table is not total".into()));
        }
        Ok(Dfa {
            alphabet,
            initial,
            accepting,
            table,
        })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn num_states(&self) -> usize {
        self.table.len()
    }

    pub fn initial(&self) -> usize {
        self.initial
    }

    pub fn is_accepting(&self, q: usize) -> bool {
        self.accepting[q]
    }

    pub fn step(&self, q: usize, c: char) -> Option<usize> {
        self.alphabet.index_of(c).map(|j| self.table[q][j])
    }

    pub fn accepts(&self, w: &[char]) -> bool {
        let mut q = self.initial;
        for &c in w {
            match self.step(q, c) {
                Some(t) => q = t,
                None => return false,
            }
        }
        self.accepting[q]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lasso(s: &str) -> LassoWord {
        s.parse().unwrap()
    }

    #[test]
    fn canonical_examples() {
        let w = LassoWord::new("a", "bb").unwrap();
        assert_eq!((w.prefix(), w.period()), (&['a'][..], &['b'][..]));
        let w = LassoWord::new("ab", "ab").unwrap();
        assert_eq!(w.to_string(), "(ab)");
        let w = LassoWord::new("", "abcabc").unwrap();
        assert_eq!(w.to_string(), "(abc)");
        assert!(LassoWord::new("ab", "").is_err());
    }

    #[test]
    fn prefix_examples() {
        assert_eq!(lasso("a(b)").prefix_of(3).to_string(), "abb");
        assert_eq!(lasso("(ab)").prefix_of(0), FiniteWord::empty());
        assert_eq!(lasso("abbcc(d)").prefix_of(7).to_string(), "abbccdd");
    }

    #[test]
    fn syntax() {
        assert_eq!(lasso("abbcc(d)").to_string(), "abbcc(d)");
        for bad in ["ab", "a()", "(a", "a(b)c", "a((b))", ""] {
            assert!(bad.parse::<LassoWord>().is_err(), "{bad}");
        }
    }

    #[test]
    fn prefix_dfa_examples() {
        let sigma = Alphabet::new("abcd".chars()).unwrap();
        let d = lasso("(a)").prefix_dfa(&sigma);
        assert!(d.accepts(&[]) && d.accepts(&['a'; 5]) && !d.accepts(&['a', 'b']));
        let d = lasso("b(a)").prefix_dfa(&sigma);
        assert!(d.accepts(&['b']) && d.accepts(&['b', 'a', 'a']) && !d.accepts(&['a']));
        let w = lasso("abbcc(d)");
        let d = w.prefix_dfa(&sigma);
        assert_eq!(d.num_states(), w.phases() + 2);
        assert!(d.accepts(&"abbccddd".chars().collect::<Vec<_>>()));
        assert!(!d.accepts(&"abbcd".chars().collect::<Vec<_>>()));
    }

    #[test]
    fn alphabet_rejects_duplicates_and_tokens() {
        assert!(Alphabet::new("aa".chars()).is_err());
        assert!(Alphabet::new("".chars()).is_err());
        assert!(Alphabet::from_strings(&["ab".to_string()]).is_err());
    }
}
