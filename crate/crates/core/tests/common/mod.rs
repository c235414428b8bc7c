//! Independent oracles for the integration and acceptance tests. None of
//! them calls the deciders they are compared with.

#![allow(dead_code)]

use std::collections::{HashMap, HashSet};

use omegamb::words::LassoWord;
use omegamb::{Bpda, Config, TwoTapeBa};
use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use rand::RngExt;

// ---- g(W) ----

/// All words of D with length at most `max`.
pub fn d_words(max: usize) -> Vec<String> {
    let mut out = Vec::new();
    for i in 0.. {
        if 3 * i + 1 > max {
            break;
        }
        for vl in [2 * i, 2 * i + 1] {
            if i + 1 + vl > max {
                continue;
            }
            for u in bits(i) {
                for v in bits(vl) {
                    out.push(format!("{u}d{v}"));
                }
            }
        }
    }
    out
}

fn bits(n: usize) -> Vec<String> {
    (0..1u32 << n)
        .map(|m| {
            (0..n)
                .map(|k| if m >> (n - 1 - k) & 1 == 1 { '1' } else { '0' })
                .collect()
        })
        .collect()
}

/// Blocks `a·y` with `y ∈ D`, as `(lead, block)`.
pub fn blocks(max: usize) -> Vec<(char, String)> {
    let ds = d_words(max.saturating_sub(1));
    ['0', '1']
        .iter()
        .flat_map(|&a| ds.iter().map(move |y| (a, format!("{a}{y}"))))
        .collect()
}

/// Words of g(W) = g(0*1) of length at most `max`, with their block lists.
pub fn gw_words(max: usize) -> Vec<(String, Vec<String>)> {
    let bl = blocks(max);
    let mut out = Vec::new();
    let mut stack: Vec<(String, Vec<String>)> = vec![(String::new(), Vec::new())];
    while let Some((w, parts)) = stack.pop() {
        for (a, b) in &bl {
            if w.len() + b.len() > max {
                continue;
            }
            let mut p = parts.clone();
            p.push(b.clone());
            let x = format!("{w}{b}");
            if *a == '1' {
                out.push((x, p));
            } else {
                stack.push((x, p));
            }
        }
    }
    out
}

/// Words of g(W)⁺ of length at most `max`.
pub fn gw_plus_words(max: usize) -> HashSet<String> {
    let bl = blocks(max);
    let mut out = HashSet::new();
    let mut stack = vec![String::new()];
    while let Some(w) = stack.pop() {
        for (a, b) in &bl {
            if w.len() + b.len() > max {
                continue;
            }
            let x = format!("{w}{b}");
            if *a == '1' {
                out.insert(x.clone());
            }
            stack.push(x);
        }
    }
    out
}

fn is_d(y: &[char]) -> bool {
    let Some(p) = y.iter().position(|&c| c == 'd') else {
        return false;
    };
    let ok = |s: &[char]| s.iter().all(|&c| c == '0' || c == '1');
    let (u, v) = (&y[..p], &y[p + 1..]);
    ok(u) && ok(v) && (v.len() == 2 * u.len() || v.len() == 2 * u.len() + 1)
}

/// Every way of cutting `x` into blocks `0·D … 0·D 1·D`.
pub fn gw_factorizations(x: &str) -> Vec<Vec<String>> {
    let x: Vec<char> = x.chars().collect();
    let mut out = Vec::new();
    let mut stack = vec![(0usize, Vec::<String>::new())];
    while let Some((i, parts)) = stack.pop() {
        if i >= x.len() {
            continue;
        }
        for j in i + 2..=x.len() {
            if !is_d(&x[i + 1..j]) {
                continue;
            }
            let mut p = parts.clone();
            p.push(x[i..j].iter().collect());
            match x[i] {
                '1' if j == x.len() => out.push(p),
                '0' => stack.push((j, p)),
                _ => {}
            }
        }
    }
    out
}

/// Number of factorizations of `y` into words of g(W), counting every block
/// parse separately.
pub fn gw_plus_factorization_count(y: &str) -> u64 {
    let y: Vec<char> = y.chars().collect();
    let n = y.len();
    // open[j]: complete words then 0-blocks; done[j]: ends at a word boundary
    let mut open = vec![0u64; n + 1];
    let mut done = vec![0u64; n + 1];
    open[0] = 1;
    for j in 1..=n {
        for i in 0..j.saturating_sub(1) {
            if open[i] == 0 || !is_d(&y[i + 1..j]) {
                continue;
            }
            match y[i] {
                '0' => open[j] += open[i],
                '1' => done[j] += open[i],
                _ => {}
            }
        }
        open[j] += done[j];
    }
    done[n]
}

// ---- lassos ----

/// Every canonical lasso with `|u| ≤ max_u`, `1 ≤ |v| ≤ max_v`.
pub fn all_lassos(letters: &[char], max_u: usize, max_v: usize) -> Vec<LassoWord> {
    let words = |n: usize| -> Vec<Vec<char>> {
        let mut out = vec![Vec::new()];
        for _ in 0..n {
            out = out
                .into_iter()
                .flat_map(|w: Vec<char>| {
                    letters.iter().map(move |&c| {
                        let mut x = w.clone();
                        x.push(c);
                        x
                    })
                })
                .collect();
        }
        out
    };
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    for lu in 0..=max_u {
        for lv in 1..=max_v {
            for u in words(lu) {
                for v in words(lv) {
                    let w = LassoWord::canonicalize(&u, &v).unwrap();
                    if seen.insert(w.clone()) {
                        out.push(w);
                    }
                }
            }
        }
    }
    out
}

// ---- BPDA ----

pub fn random_bpda<R: RngExt>(rng: &mut R) -> Bpda {
    let n = rng.random_range(1..=3);
    let names: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let stack = ['Z', 'A'];
    let k = rng.random_range(1..=2);
    let mut table = Vec::new();
    for _ in 0..rng.random_range(1..=8) {
        let input = match rng.random_range(0..4) {
            0 => None,
            1 => Some('b'),
            _ => Some('a'),
        };
        let push: String = (0..rng.random_range(0..=2))
            .map(|_| stack[rng.random_range(0..k)])
            .collect();
        table.push((
            names[rng.random_range(0..n)].clone(),
            input,
            stack[rng.random_range(0..k)],
            names[rng.random_range(0..n)].clone(),
            push,
        ));
    }
    let finals: Vec<String> = names.iter().filter(|_| rng.random_bool(0.5)).cloned().collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let frefs: Vec<&str> = finals.iter().map(String::as_str).collect();
    let trefs: Vec<(&str, Option<char>, char, &str, &str)> = table
        .iter()
        .map(|(f, i, t, to, p)| (f.as_str(), *i, *t, to.as_str(), p.as_str()))
        .collect();
    let z: String = stack[..k].iter().collect();
    Bpda::from_table(&refs, "ab", &z, "q0", 'Z', &frefs, &trefs).unwrap()
}

/// Whether a run on `w` with stack height at most `bound` visits a final
/// state and reads a letter infinitely often, by explicit product search.
pub fn bpda_accepts_bounded(a: &Bpda, w: &LassoWord, bound: usize) -> bool {
    let mut g: DiGraph<(Config, usize), (bool, bool)> = DiGraph::new();
    let mut index = HashMap::new();
    let start = (a.initial_config(), 0);
    index.insert(start.clone(), g.add_node(start.clone()));
    let mut todo = vec![start];
    while let Some((c, ph)) = todo.pop() {
        let from = index[&(c.clone(), ph)];
        let moves = a.step(&c, None).into_iter().map(|x| (x, ph)).chain(
            a.step(&c, Some(w.letter_at_phase(ph)))
                .into_iter()
                .map(|x| (x, w.next_phase(ph))),
        );
        for ((next, read), nph) in moves {
            if next.stack.chars().count() > bound {
                continue;
            }
            let key = (next.clone(), nph);
            let to = match index.get(&key) {
                Some(&t) => t,
                None => {
                    let t = g.add_node(key.clone());
                    index.insert(key.clone(), t);
                    todo.push(key);
                    t
                }
            };
            g.add_edge(from, to, (a.is_final(next.state), read));
        }
    }
    tarjan_scc(&g).iter().any(|comp| {
        let inside: HashSet<_> = comp.iter().collect();
        let internal: Vec<_> = g
            .edge_indices()
            .filter(|&e| {
                let (s, t) = g.edge_endpoints(e).unwrap();
                inside.contains(&s) && inside.contains(&t)
            })
            .collect();
        internal.iter().any(|&e| g[e].0) && internal.iter().any(|&e| g[e].1)
    })
}

// ---- 2-tape automata ----

pub fn random_relation<R: RngExt>(rng: &mut R) -> TwoTapeBa {
    let n = rng.random_range(1..=3);
    let names: Vec<String> = (0..n).map(|i| format!("q{i}")).collect();
    let word = |rng: &mut R| -> String {
        (0..rng.random_range(0..=2))
            .map(|_| if rng.random_bool(0.7) { 'a' } else { 'b' })
            .collect()
    };
    let mut table = Vec::new();
    for _ in 0..rng.random_range(1..=6) {
        let (i, o) = (word(rng), word(rng));
        table.push((
            names[rng.random_range(0..n)].clone(),
            i,
            o,
            names[rng.random_range(0..n)].clone(),
        ));
    }
    let finals: Vec<String> = names.iter().filter(|_| rng.random_bool(0.6)).cloned().collect();
    let refs: Vec<&str> = names.iter().map(String::as_str).collect();
    let frefs: Vec<&str> = finals.iter().map(String::as_str).collect();
    let trefs: Vec<(&str, &str, &str, &str)> = table
        .iter()
        .map(|(f, i, o, t)| (f.as_str(), i.as_str(), o.as_str(), t.as_str()))
        .collect();
    TwoTapeBa::from_table(&refs, "ab", "ab", "q0", &frefs, &trefs).unwrap()
}

fn read(w: &LassoWord, mut ph: usize, s: &[char]) -> Option<usize> {
    for &c in s {
        if w.letter_at_phase(ph) != c {
            return None;
        }
        ph = w.next_phase(ph);
    }
    Some(ph)
}

/// Numbers of accepting-computation prefixes of each length in `depths`:
/// paths from the start through nodes that can still reach a cycle that
/// reaches F, reads and writes.
pub fn relation_prefix_counts(t: &TwoTapeBa, x: &LassoWord, y: &LassoWord, depths: &[usize]) -> Vec<u128> {
    type Node = (usize, usize, usize);
    let mut g: DiGraph<Node, (bool, bool, bool)> = DiGraph::new();
    let mut index = HashMap::new();
    let start = (t.initial(), 0, 0);
    index.insert(start, g.add_node(start));
    let mut todo = vec![start];
    while let Some(node @ (q, p1, p2)) = todo.pop() {
        for tr in t.transitions().iter().filter(|tr| tr.from == q) {
            let (Some(n1), Some(n2)) = (read(x, p1, &tr.input), read(y, p2, &tr.output)) else {
                continue;
            };
            let key = (tr.to, n1, n2);
            let to = *index.entry(key).or_insert_with(|| {
                todo.push(key);
                g.add_node(key)
            });
            g.add_edge(
                index[&node],
                to,
                (t.is_final(tr.to), !tr.input.is_empty(), !tr.output.is_empty()),
            );
        }
    }
    let comps = tarjan_scc(&g);
    let mut good = vec![false; g.node_count()];
    for comp in &comps {
        let inside: HashSet<_> = comp.iter().collect();
        let flags: Vec<(bool, bool, bool)> = g
            .edge_indices()
            .filter(|&e| {
                let (s, d) = g.edge_endpoints(e).unwrap();
                inside.contains(&s) && inside.contains(&d)
            })
            .map(|e| g[e])
            .collect();
        if flags.iter().any(|f| f.0) && flags.iter().any(|f| f.1) && flags.iter().any(|f| f.2) {
            for v in comp {
                good[v.index()] = true;
            }
        }
    }
    // live: can reach a good node
    let mut live = good.clone();
    let mut changed = true;
    while changed {
        changed = false;
        for e in g.edge_indices() {
            let (s, d) = g.edge_endpoints(e).unwrap();
            if live[d.index()] && !live[s.index()] {
                live[s.index()] = true;
                changed = true;
            }
        }
    }
    let max = depths.iter().copied().max().unwrap_or(0);
    let mut cur = vec![0u128; g.node_count()];
    let s = index[&start].index();
    if live[s] {
        cur[s] = 1;
    }
    let mut out = Vec::new();
    for d in 0..=max {
        if depths.contains(&d) {
            out.push(cur.iter().fold(0u128, |a, &b| a.saturating_add(b)));
        }
        let mut next = vec![0u128; g.node_count()];
        for e in g.edge_indices() {
            let (s, t) = g.edge_endpoints(e).unwrap();
            if live[t.index()] {
                next[t.index()] = next[t.index()].saturating_add(cur[s.index()]);
            }
        }
        cur = next;
    }
    out
}
