// Bounded exploration of the product of a BPDA with a lasso word.
//
// Nodes are (configuration, phase) pairs with the stack height capped.
// Accepting runs inside this region are ultimately periodic walks, counted
// in canonical form: primitive cycle, and the last stem edge differs from
// the last cycle edge. Edges with the same target and flag are merged since
// they induce the same triple sequence.

use std::collections::HashMap;

use serde::Serialize;

use super::{Bpda, Config, RunLasso, RunStep};
use crate::degree::DegreeLabel;
use crate::graph::{recurrent_components, EdgeGraph};
use crate::words::LassoWord;

const NODE_BUDGET: usize = 400_000;
const WALK_BUDGET: u64 = 4_000_000;
const KEPT_RUNS: usize = 32;

/// One step of a certificate: the transition taken and the configuration
/// it leads to.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CertStep {
    pub transition: usize,
    pub input: Option<char>,
    pub target: Config,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CycleMarker {
    A,
    B,
    Both,
}

/// Two different cycles at one reachable `(configuration, phase)` node.
/// Every infinite choice sequence of cycles is a distinct run on the word.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Certificate {
    pub node: Config,
    pub phase: usize,
    pub path_to_node: Vec<CertStep>,
    pub cycle_a: Vec<CertStep>,
    pub cycle_b: Vec<CertStep>,
    pub accepting_cycle_marker: CycleMarker,
}

impl Certificate {
    /// The path followed by one cycle per choice (`false` = a, `true` = b).
    pub fn expand(&self, choices: &[bool]) -> Vec<CertStep> {
        let mut out = self.path_to_node.clone();
        for &b in choices {
            out.extend_from_slice(if b { &self.cycle_b } else { &self.cycle_a });
        }
        out
    }

    /// Run prefixes for all `2^k` choice sequences of length `k`.
    pub fn run_prefixes(&self, a: &Bpda, w: &LassoWord, k: usize) -> Result<Vec<Vec<RunStep>>, String> {
        (0..1usize << k)
            .map(|bits| {
                let choices: Vec<bool> = (0..k).map(|i| bits >> i & 1 == 1).collect();
                a.replay(w, &a.initial_config(), 0, &self.expand(&choices))
                    .map(|(run, _, _)| run)
            })
            .collect()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", content = "k")]
pub enum LabelClaim {
    AtLeast(u64),
    Uncountable,
}

impl LabelClaim {
    pub fn degree_lower_bound(&self) -> DegreeLabel {
        match *self {
            LabelClaim::AtLeast(k) => DegreeLabel::Finite(k),
            LabelClaim::Uncountable => DegreeLabel::Continuum,
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct AmbiguityReport {
    pub lower_bound: u64,
    pub exhaustive_within_bounds: bool,
    pub stack_pruned: bool,
    pub uncountable_certificate: Option<Certificate>,
    pub label_claim: LabelClaim,
    /// Some of the runs found, in discovery order.
    pub runs: Vec<RunLasso>,
}

struct Product {
    nodes: Vec<(Config, usize)>,
    graph: EdgeGraph,
    // (transition index, reads a letter)
    info: Vec<(usize, bool)>,
    stack_pruned: bool,
    truncated: bool,
}

impl Product {
    fn build(a: &Bpda, w: &LassoWord, stack_bound: usize) -> Product {
        let start = (a.initial_config(), 0);
        let mut nodes = vec![start.clone()];
        let mut index: HashMap<(Config, usize), usize> = HashMap::from([(start, 0)]);
        let mut pairs = Vec::new();
        let mut info = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let (mut stack_pruned, mut truncated) = (false, false);
        let mut v = 0;
        while v < nodes.len() {
            let (cfg, ph) = nodes[v].clone();
            for (ti, t) in a.transitions.iter().enumerate() {
                let nph = match t.input {
                    None => ph,
                    Some(c) if w.letter_at_phase(ph) == c => w.next_phase(ph),
                    Some(_) => continue,
                };
                let Some(next) = a.apply(t, &cfg) else { continue };
                if next.stack.chars().count() > stack_bound {
                    stack_pruned = true;
                    continue;
                }
                let key = (next, nph);
                let id = match index.get(&key) {
                    Some(&id) => id,
                    None if nodes.len() >= NODE_BUDGET => {
                        truncated = true;
                        continue;
                    }
                    None => {
                        nodes.push(key.clone());
                        index.insert(key, nodes.len() - 1);
                        nodes.len() - 1
                    }
                };
                let flag = t.input.is_some();
                if seen.insert((v, id, flag)) {
                    pairs.push((v, id));
                    info.push((ti, flag));
                }
            }
            v += 1;
        }
        Product {
            graph: EdgeGraph::new(nodes.len(), pairs),
            nodes,
            info,
            stack_pruned,
            truncated,
        }
    }

    fn target(&self, e: usize) -> usize {
        self.graph.edges[e].1
    }

    fn step(&self, a: &Bpda, e: usize) -> CertStep {
        let ti = self.info[e].0;
        CertStep {
            transition: ti,
            input: a.transitions[ti].input,
            target: self.nodes[self.target(e)].0.clone(),
        }
    }

    fn run_step(&self, e: usize) -> RunStep {
        RunStep {
            config: self.nodes[self.graph.edges[e].0].0.clone(),
            flag: self.info[e].1,
        }
    }
}

fn is_primitive(cycle: &[usize]) -> bool {
    let n = cycle.len();
    (1..n)
        .filter(|d| n.is_multiple_of(*d))
        .all(|d| (0..n).any(|i| cycle[i] != cycle[i % d]))
}

impl Bpda {
    /// Counts accepting runs on `w` that are lassos of at most `step_bound`
    /// steps within stack height `stack_bound`, and looks for an
    /// uncountability certificate in the same region.
    pub fn count_runs_bounded(&self, w: &LassoWord, step_bound: usize, stack_bound: usize) -> AmbiguityReport {
        self.count_runs_with_budget(w, step_bound, stack_bound, WALK_BUDGET)
    }

    /// As [`Bpda::count_runs_bounded`] with an explicit cap on walk
    /// extensions.
    pub fn count_runs_with_budget(
        &self,
        w: &LassoWord,
        step_bound: usize,
        stack_bound: usize,
        walk_budget: u64,
    ) -> AmbiguityReport {
        let p = Product::build(self, w, stack_bound);
        let g = &p.graph;
        let f_edge = |e: usize| self.finals[p.nodes[p.target(e)].0.state];
        let consume = |e: usize| p.info[e].1;
        let ids = g.scc_ids();
        let reach = g.reachable_from(0);
        let comps = recurrent_components(g, &ids, &reach, &[&f_edge, &consume]);

        // nodes that can still reach an accepting cycle
        let mut useful = vec![false; g.n];
        let mut preds = vec![Vec::new(); g.n];
        for &(s, t) in &g.edges {
            preds[t].push(s);
        }
        let mut stack: Vec<usize> = (0..g.n).filter(|&v| comps.iter().any(|c| c.comp == ids[v])).collect();
        for &v in &stack {
            useful[v] = true;
        }
        while let Some(v) = stack.pop() {
            for &u in &preds[v] {
                if !useful[u] {
                    useful[u] = true;
                    stack.push(u);
                }
            }
        }

        let mut count: u64 = 0;
        let mut runs = Vec::new();
        let mut budget_hit = false;
        if useful[0] && step_bound > 0 {
            let mut budget = walk_budget;
            let mut walk: Vec<usize> = Vec::new();
            let mut walk_nodes = vec![0usize];
            let mut occ: HashMap<usize, Vec<usize>> = HashMap::from([(0, vec![0])]);
            let mut cursor = vec![0usize];
            'dfs: loop {
                let depth = walk.len();
                let v = walk_nodes[depth];
                if cursor[depth] < g.out[v].len() {
                    let e = g.out[v][cursor[depth]];
                    cursor[depth] += 1;
                    let t = p.target(e);
                    if !useful[t] {
                        continue;
                    }
                    if budget == 0 {
                        budget_hit = true;
                        break 'dfs;
                    }
                    budget -= 1;
                    for &j in occ.get(&t).map(Vec::as_slice).unwrap_or(&[]) {
                        if j > 0 && walk[j - 1] == e {
                            continue;
                        }
                        let mut cycle = walk[j..].to_vec();
                        cycle.push(e);
                        if cycle.iter().any(|&x| f_edge(x)) && cycle.iter().any(|&x| consume(x)) && is_primitive(&cycle)
                        {
                            count += 1;
                            if runs.len() < KEPT_RUNS {
                                runs.push(RunLasso {
                                    stem: walk[..j].iter().map(|&x| p.run_step(x)).collect(),
                                    cycle: cycle.iter().map(|&x| p.run_step(x)).collect(),
                                    input_phase: p.nodes[t].1,
                                });
                            }
                        }
                    }
                    if depth + 1 < step_bound {
                        walk.push(e);
                        walk_nodes.push(t);
                        occ.entry(t).or_default().push(depth + 1);
                        cursor.push(0);
                    }
                } else {
                    if depth == 0 {
                        break;
                    }
                    cursor.pop();
                    let t = walk_nodes.pop().unwrap();
                    occ.get_mut(&t).unwrap().pop();
                    walk.pop();
                }
            }
        }

        let certificate = self
            .find_certificate(&p, &ids, &comps, &f_edge)
            .filter(|c| self.verify_certificate(w, c).is_ok());
        AmbiguityReport {
            lower_bound: count,
            exhaustive_within_bounds: !budget_hit && !p.stack_pruned && !p.truncated,
            stack_pruned: p.stack_pruned,
            label_claim: if certificate.is_some() {
                LabelClaim::Uncountable
            } else {
                LabelClaim::AtLeast(count)
            },
            uncountable_certificate: certificate,
            runs,
        }
    }

    fn find_certificate(
        &self,
        p: &Product,
        ids: &[usize],
        comps: &[crate::graph::Recurrent],
        f_edge: &dyn Fn(usize) -> bool,
    ) -> Option<Certificate> {
        let g = &p.graph;
        for rec in comps {
            let inside = |v: usize| ids[v] == rec.comp;
            for x in (0..g.n).filter(|&x| inside(x)) {
                let internal: Vec<usize> = g.out[x].iter().copied().filter(|&e| inside(p.target(e))).collect();
                if internal.len() < 2 {
                    continue;
                }
                let mk = |e: usize| -> Option<Vec<usize>> {
                    let mut c = vec![e];
                    let mut via = rec.witnesses.clone();
                    via.dedup();
                    via.retain(|&v| v != e);
                    c.extend(g.walk_through(p.target(e), x, &via, inside)?);
                    Some(c)
                };
                let (Some(a), Some(b)) = (mk(internal[0]), mk(internal[1])) else {
                    continue;
                };
                let path = g.path(0, x, |_| true)?;
                let steps = |es: &[usize]| es.iter().map(|&e| p.step(self, e)).collect::<Vec<_>>();
                debug_assert!(a.iter().any(|&e| f_edge(e)));
                return Some(Certificate {
                    node: p.nodes[x].0.clone(),
                    phase: p.nodes[x].1,
                    path_to_node: steps(&path),
                    cycle_a: steps(&a),
                    cycle_b: steps(&b),
                    accepting_cycle_marker: CycleMarker::Both,
                });
            }
        }
        None
    }

    /// Checks a certificate against the automaton and the word. `Ok` means
    /// the word has uncountably many accepting runs.
    pub fn verify_certificate(&self, w: &LassoWord, c: &Certificate) -> Result<(), String> {
        let (_, end, ph) = self
            .replay(w, &self.initial_config(), 0, &c.path_to_node)
            .map_err(|e| format!("path: {e}"))?;
        if end != c.node || ph != c.phase {
            return Err("path does not end at the certificate node".into());
        }
        if c.phase >= w.phases() {
            return Err("phase out of range".into());
        }
        let check_cycle = |name: &str, steps: &[CertStep], needs_f: bool| -> Result<(), String> {
            if steps.is_empty() {
                return Err(format!("cycle {name} is empty"));
            }
            let (run, end, ph) = self
                .replay(w, &c.node, c.phase, steps)
                .map_err(|e| format!("cycle {name}: {e}"))?;
            if end != c.node || ph != c.phase {
                return Err(format!("cycle {name} does not return to the node"));
            }
            if !run.iter().any(|s| s.flag) {
                return Err(format!("cycle {name} reads no letter"));
            }
            if needs_f && !steps.iter().any(|s| self.finals[s.target.state]) {
                return Err(format!("cycle {name} does not visit a final state"));
            }
            Ok(())
        };
        let marker = c.accepting_cycle_marker;
        check_cycle("a", &c.cycle_a, marker != CycleMarker::B)?;
        check_cycle("b", &c.cycle_b, marker != CycleMarker::A)?;
        // from a common start, (flag, target) sequences determine the triples
        let key = |s: &[CertStep]| {
            s.iter()
                .map(|x| (x.input.is_some(), x.target.clone()))
                .collect::<Vec<_>>()
        };
        let (ka, kb) = (key(&c.cycle_a), key(&c.cycle_b));
        if ka.starts_with(&kb) || kb.starts_with(&ka) {
            return Err("cycles are equal or one is a prefix of the other".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn two_loops() -> Bpda {
        Bpda::from_table(
            &["q"],
            "a",
            "ZA",
            "q",
            'Z',
            &["q"],
            &[
                ("q", Some('a'), 'Z', "q", "Z"),
                ("q", Some('a'), 'Z', "q", "AZ"),
                ("q", None, 'A', "q", ""),
            ],
        )
        .unwrap()
    }

    #[test]
    fn primitive_cycles() {
        assert!(is_primitive(&[1]));
        assert!(is_primitive(&[1, 2]));
        assert!(!is_primitive(&[1, 1]));
        assert!(!is_primitive(&[1, 2, 1, 2]));
        assert!(is_primitive(&[1, 2, 1]));
    }

    #[test]
    fn two_loop_certificate() {
        let a = two_loops();
        let w: LassoWord = "(a)".parse().unwrap();
        let r = a.count_runs_bounded(&w, 12, 4);
        assert_eq!(r.label_claim, LabelClaim::Uncountable);
        let c = r.uncountable_certificate.unwrap();
        assert!(a.verify_certificate(&w, &c).is_ok());
        let mut bad = c.clone();
        bad.cycle_b = bad.cycle_a.clone();
        assert!(a.verify_certificate(&w, &bad).is_err());
        let prefixes = c.run_prefixes(&a, &w, 4).unwrap();
        for i in 0..prefixes.len() {
            for j in 0..i {
                assert_ne!(prefixes[i], prefixes[j]);
            }
        }
    }

    #[test]
    fn deterministic_single_run() {
        let a = Bpda::from_table(&["q"], "a", "Z", "q", 'Z', &["q"], &[("q", Some('a'), 'Z', "q", "Z")]).unwrap();
        let r = a.count_runs_bounded(&"(a)".parse().unwrap(), 16, 4);
        assert_eq!(r.lower_bound, 1);
        assert!(r.exhaustive_within_bounds);
        assert_eq!(r.label_claim, LabelClaim::AtLeast(1));
    }
}
