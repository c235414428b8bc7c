// Büchi emptiness for pushdown systems via pop summaries and the head graph.
//
// A head (p, γ) stands for every configuration with control p and top γ.
// Head edges are derived from rules, using pop summaries to skip over the
// symbols a rule pushes above the one that becomes the new top. A run that
// sees both mask bits infinitely often exists iff some reachable non-trivial
// component of the head graph has an edge carrying each bit.

use std::collections::{HashMap, HashSet};

use crate::graph::{recurrent_components, EdgeGraph};

pub(crate) const ACC: u8 = 1;
pub(crate) const CONSUME: u8 = 2;

#[derive(Clone, Debug)]
pub(crate) struct PdsRule {
    pub from: usize,
    pub top: usize,
    pub to: usize,
    pub push: Vec<usize>,
    pub letter: Option<char>,
    pub mask: u8,
}

pub(crate) struct Pds {
    pub states: usize,
    pub symbols: usize,
    pub rules: Vec<PdsRule>,
}

// (target control, mask) -> a witness word
type Summary = HashMap<(usize, u8), Vec<char>>;

impl Pds {
    fn head(&self, p: usize, g: usize) -> usize {
        p * self.symbols + g
    }

    // All (state, mask, word) reachable by popping `syms` in order from `p`.
    fn pop_sequence(&self, summaries: &[Summary], p: usize, syms: &[usize]) -> Vec<(usize, u8, Vec<char>)> {
        let mut cur: HashMap<(usize, u8), Vec<char>> = HashMap::from([((p, 0), Vec::new())]);
        for &g in syms {
            let mut next: HashMap<(usize, u8), Vec<char>> = HashMap::new();
            for (&(q, m), w) in &cur {
                for (&(r, m2), w2) in &summaries[self.head(q, g)] {
                    next.entry((r, m | m2)).or_insert_with(|| {
                        let mut v = w.clone();
                        v.extend_from_slice(w2);
                        v
                    });
                }
            }
            cur = next;
            if cur.is_empty() {
                break;
            }
        }
        let mut out: Vec<_> = cur.into_iter().map(|((q, m), w)| (q, m, w)).collect();
        out.sort();
        out
    }

    fn summaries(&self) -> Vec<Summary> {
        let mut sums: Vec<Summary> = vec![HashMap::new(); self.states * self.symbols];
        let mut changed = true;
        while changed {
            changed = false;
            for r in &self.rules {
                let found = self.pop_sequence(&sums, r.to, &r.push);
                let slot = self.head(r.from, r.top);
                for (q, m, w) in found {
                    let key = (q, m | r.mask);
                    if let std::collections::hash_map::Entry::Vacant(e) = sums[slot].entry(key) {
                        let mut word: Vec<char> = r.letter.into_iter().collect();
                        word.extend(w);
                        e.insert(word);
                        changed = true;
                    }
                }
            }
        }
        sums
    }

    /// An accepting run from `(start, [bottom])` as `(stem word, cycle word)`.
    pub fn accepting_lasso(&self, start: usize, bottom: usize) -> Option<(Vec<char>, Vec<char>)> {
        let sums = self.summaries();
        let mut pairs = Vec::new();
        let mut labels: Vec<(u8, Vec<char>)> = Vec::new();
        let mut seen = HashSet::new();
        for r in &self.rules {
            for i in 0..r.push.len() {
                for (q, m, w) in self.pop_sequence(&sums, r.to, &r.push[..i]) {
                    let (s, t) = (self.head(r.from, r.top), self.head(q, r.push[i]));
                    let mask = m | r.mask;
                    if seen.insert((s, t, mask)) {
                        let mut word: Vec<char> = r.letter.into_iter().collect();
                        word.extend(w);
                        pairs.push((s, t));
                        labels.push((mask, word));
                    }
                }
            }
        }
        let g = EdgeGraph::new(self.states * self.symbols, pairs);
        let origin = self.head(start, bottom);
        let reach = g.reachable_from(origin);
        let ids = g.scc_ids();
        let acc = |e: usize| labels[e].0 & ACC != 0;
        let consume = |e: usize| labels[e].0 & CONSUME != 0;
        let comps = recurrent_components(&g, &ids, &reach, &[&acc, &consume]);
        let rec = comps.first()?;
        let (ea, ec) = (rec.witnesses[0], rec.witnesses[1]);
        let x = g.edges[ea].0;
        let stem = g.path(origin, x, |_| true)?;
        let via: &[usize] = if ea == ec { &[ea] } else { &[ea, ec] };
        let cycle = g.walk_through(x, x, via, |v| ids[v] == rec.comp)?;
        let word = |es: &[usize]| -> Vec<char> { es.iter().flat_map(|&e| labels[e].1.clone()).collect() };
        Some((word(&stem), word(&cycle)))
    }
}
