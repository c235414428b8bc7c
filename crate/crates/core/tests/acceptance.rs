//! Acceptance criteria, one PASS/FAIL line each.
//!
//! Runs without the libtest harness so the lines are always printed. The
//! process fails on any FAIL outside `UNATTAINABLE`; criterion 7 asks for an
//! uncountability certificate on an ultimately periodic word of g(W)^ω, which
//! cannot exist because g(W) is a code (see the README).

use std::collections::{BTreeSet, HashSet};
use std::time::Instant;

use omegamb::cfl::ParseCount;
use omegamb::corpus;
use omegamb::ops;
use omegamb::pda::RunStep;
use omegamb::{Bpda, CardinalityClass, Cfg, LassoWord};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

mod common;

const UNATTAINABLE: &[usize] = &[7];

type Outcome = (bool, String);

fn grammar(name: &str) -> Cfg {
    corpus::get(name).unwrap().grammar().unwrap().clone()
}

fn bpda(name: &str) -> Bpda {
    corpus::get(name).unwrap().bpda().unwrap().clone()
}

fn chars(s: &str) -> Vec<char> {
    s.chars().collect()
}

fn lasso(s: &str) -> LassoWord {
    s.parse().unwrap()
}

/// Unambiguity of g(W): decoder, exhaustive factorization and parse count
/// agree on every word of length at most 14.
fn criterion_1() -> Outcome {
    let g = grammar("gW");
    let words = common::gw_words(14);
    let mut failures = 0;
    for (x, parts) in &words {
        let decoded = corpus::decode_gw(&chars(x)).map(|d| {
            let last = d.blocks.len() - 1;
            d.blocks
                .iter()
                .enumerate()
                .map(|(i, (u, v))| format!("{}{u}d{v}", if i == last { '1' } else { '0' }))
                .collect::<Vec<_>>()
        });
        let oracle = common::gw_factorizations(x);
        let ok = decoded.as_ref() == Some(parts)
            && oracle == vec![parts.clone()]
            && g.count_derivations(&chars(x), 8) == ParseCount::Exact(1);
        if !ok {
            failures += 1;
        }
    }
    // the grammar generates exactly the oracle's words (checked to length 10)
    let generated: BTreeSet<String> = g.words_up_to(10).iter().map(|w| w.to_string()).collect();
    let expected: BTreeSet<String> = words
        .iter()
        .filter(|(x, _)| x.len() <= 10)
        .map(|(x, _)| x.clone())
        .collect();
    let same = generated == expected;
    (
        failures == 0 && same,
        format!(
            "{} words, {failures} failures, language match to length 10: {same}",
            words.len()
        ),
    )
}

/// g(W) is a code: unique factorization of every word of g(W)⁺ up to 14.
fn criterion_2() -> Outcome {
    let words = common::gw_plus_words(14);
    let bad = words
        .iter()
        .filter(|y| common::gw_plus_factorization_count(y) != 1)
        .count();
    (
        bad == 0,
        format!("{} words, {bad} with a factorization count other than 1", words.len()),
    )
}

/// Some ultimately periodic word of g(W)^ω has two factorizations.
fn criterion_3() -> Outcome {
    let g = grammar("gW");
    let mut stems: Vec<String> = vec![String::new()];
    stems.extend(common::gw_words(5).into_iter().map(|p| p.0));
    let mut periods: Vec<String> = common::gw_plus_words(14).into_iter().collect();
    periods.sort_by_key(|p| (p.len(), p.clone()));
    let mut tried = 0;
    for v in &periods {
        for u in &stems {
            let w = LassoWord::canonicalize(&chars(u), &chars(v)).unwrap();
            tried += 1;
            let r = ops::count_decompositions(&g, &w, 16);
            if r.lower_bound < 2 {
                continue;
            }
            let (f1, f2) = (&r.factorizations[0], &r.factorizations[1]);
            let limit = 6 * w.phases() + 32;
            let distinct = f1.cuts(limit) != f2.cuts(limit);
            // every factor of both, over several periods, is a g(W) word
            let valid = [f1, f2].iter().all(|f| {
                f.factors(&w, 3 * (f.stem.len() + f.cycle.len()))
                    .iter()
                    .all(|x| common::gw_factorizations(&x.to_string()).len() == 1)
            });
            return (
                distinct && valid,
                format!(
                    "{w}: lower bound {}, cuts {:?} vs {:?} (after {tried} candidates)",
                    r.lower_bound,
                    f1.cuts(limit),
                    f2.cuts(limit)
                ),
            );
        }
    }
    (
        false,
        format!("no lasso with two factorizations among {tried} candidates"),
    )
}

fn v_words(max: usize) -> Vec<String> {
    let mut out = BTreeSet::new();
    for n in 1..max {
        for p in 1..max {
            let rep = |c: &str, k| c.repeat(k);
            for x in [
                format!("{}{}{}", rep("a", n), rep("b", n), rep("c", p)),
                format!("{}{}{}", rep("a", n), rep("b", p), rep("c", p)),
            ] {
                if x.len() <= max {
                    out.insert(x);
                }
            }
        }
    }
    out.into_iter().collect()
}

/// Parse counts in V equal run counts of the V·d^ω automaton on x·d^ω.
fn criterion_4() -> Outcome {
    let g = grammar("V");
    let a = bpda("V_d_omega");
    let mut bad = Vec::new();
    let words = v_words(9);
    for x in &words {
        let ParseCount::Exact(k) = g.count_derivations(&chars(x), 64) else {
            bad.push(x.clone());
            continue;
        };
        let r = a.count_runs_bounded(&LassoWord::canonicalize(&chars(x), &['d']).unwrap(), 64, 16);
        if !r.exhaustive_within_bounds || r.lower_bound != k {
            bad.push(x.clone());
        }
    }
    let diagonal = (1..=3).all(|n| {
        let x = format!("{}{}{}", "a".repeat(n), "b".repeat(n), "c".repeat(n));
        let r = a.count_runs_bounded(&LassoWord::canonicalize(&chars(&x), &['d']).unwrap(), 64, 16);
        r.exhaustive_within_bounds && r.lower_bound == 2
    });
    (
        bad.is_empty() && diagonal,
        format!(
            "{} words, mismatches {bad:?}, aⁿbⁿcⁿ·d^ω has 2 runs for n ≤ 3: {diagonal}",
            words.len()
        ),
    )
}

/// Adherence and δ-limit deciders against the closed forms.
fn criterion_5() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (l1, c, v) = (grammar("L1"), grammar("C"), grammar("V"));
    let mut details = Vec::new();
    let mut total = 0;
    for form in ["Adh_C", "Adh_L1", "delta_L1", "delta_V"] {
        let (mut disagree, mut positives) = (0, 0);
        for _ in 0..500 {
            let w = corpus::sample_lasso(form, &mut rng).unwrap();
            let got = match form {
                "Adh_C" => ops::adherence_member(&c, &w).member,
                "Adh_L1" => ops::adherence_member(&l1, &w).member,
                "delta_L1" => ops::delta_limit_member(&l1, &w).member,
                _ => ops::delta_limit_member(&v, &w).member,
            };
            let want = corpus::reference_check(form, &w).unwrap();
            positives += want as usize;
            disagree += (got != want) as usize;
        }
        total += disagree;
        details.push(format!("{form} {disagree}/500 ({positives} members)"));
    }
    (total == 0, format!("disagreements: {}", details.join(", ")))
}

/// (V* ∪ {a,b,c})^ω accepts every {a,b,c}-lasso.
fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let a = bpda("Lstar_omega");
    let accepted = (0..100)
        .filter(|_| a.accepts_lasso(&LassoWord::random(&mut rng, &['a', 'b', 'c'], 6, 4)))
        .count();
    (accepted == 100, format!("{accepted}/100 accepted"))
}

/// Uncountability certificate on the g(W)^ω automaton.
fn criterion_7() -> Outcome {
    let a = bpda("gW_omega");
    let mut candidates: Vec<LassoWord> = vec![lasso("1d111(d111111)"), lasso("(1d)"), lasso("(0d1d)")];
    for (x, _) in common::gw_words(6) {
        candidates.push(LassoWord::canonicalize(&[], &chars(&x)).unwrap());
    }
    let mut best = 0;
    for w in &candidates {
        let r = a.count_runs_bounded(w, 96, 16);
        best = best.max(r.lower_bound);
        let Some(cert) = r.uncountable_certificate else {
            continue;
        };
        let verified = a.verify_certificate(w, &cert).is_ok();
        let prefixes = cert.run_prefixes(&a, w, 4);
        let distinct = match &prefixes {
            Ok(p) => p.iter().collect::<HashSet<&Vec<RunStep>>>().len() == 16,
            Err(_) => false,
        };
        return (
            verified && distinct,
            format!("{w}: certificate verified {verified}, 16 distinct valid prefixes {distinct}"),
        );
    }
    (
        false,
        format!(
            "no certificate on {} lassos of g(W)^ω; at most {best} accepting runs on any of them",
            candidates.len()
        ),
    )
}

/// Emptiness against bounded product exploration on random automata.
fn criterion_8() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let lassos = common::all_lassos(&['a', 'b'], 2, 2);
    let (mut violations, mut nonempty) = (0, 0);
    for _ in 0..300 {
        let a = common::random_bpda(&mut rng);
        let found: Vec<&LassoWord> = lassos
            .iter()
            .filter(|w| common::bpda_accepts_bounded(&a, w, 4))
            .collect();
        let witness = a.nonempty_witness();
        if !found.is_empty() {
            nonempty += 1;
            if witness.is_none() || found.iter().any(|w| !a.accepts_lasso(w)) {
                violations += 1;
            }
        }
        if let Some(w) = witness {
            if !a.accepts_lasso(&w) {
                violations += 1;
            }
        }
    }
    (
        violations == 0,
        format!("300 automata, {nonempty} with an oracle lasso, {violations} violations"),
    )
}

/// Trichotomy of computation counts on random 2-tape automata.
fn criterion_9() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut violations, mut finite, mut uncountable) = (0, 0, 0);
    for _ in 0..300 {
        let t = common::random_relation(&mut rng);
        let x = LassoWord::random(&mut rng, &['a', 'b'], 2, 2);
        let y = LassoWord::random(&mut rng, &['a', 'b'], 2, 2);
        let c = common::relation_prefix_counts(&t, &x, &y, &[32, 48, 64]);
        let class = t.classify_computations(&x, &y);
        if c[0] == c[1] && c[1] == c[2] {
            finite += 1;
            if class != CardinalityClass::Finite(c[2] as u64) {
                violations += 1;
            }
        } else if c[2] >= 256 && (c[2] as f64) >= (c[0] as f64).powf(1.5) {
            uncountable += 1;
            if class != CardinalityClass::Uncountable {
                violations += 1;
            }
        }
    }
    (
        violations == 0,
        format!("300 pairs, conclusive: {finite} finite, {uncountable} uncountable; {violations} violations"),
    )
}

/// The run coding predicates fire periodically along accepting runs.
fn criterion_10() -> Outcome {
    let cases = [
        ("V_d_omega", "abc(d)"),
        ("V_d_omega", "aabbc(d)"),
        ("V_d_omega", "abbcc(d)"),
        ("anbn_c_omega", "aabb(c)"),
        ("gW_omega", "1d111(d111111)"),
        ("gW_omega", "(0d1d)"),
        ("Lstar_omega", "(abc)"),
        ("Lstar_omega", "c(ab)"),
    ];
    let (mut runs, mut violations) = (0, 0);
    for (name, l) in cases {
        let a = bpda(name);
        let w = lasso(l);
        let coding = a.run_coding();
        for run in a.count_runs_bounded(&w, 48, 12).runs {
            runs += 1;
            let n = run.stem.len() + 2 * run.cycle.len();
            let x = coding.encode(&run.prefix(n));
            let stem_len = coding.encode(&run.stem).len();
            let period = coding.encode(&run.cycle).len();
            let fire = |m: usize, second: bool| {
                let u = w.prefix_of(m);
                let xm = &x.letters()[..m];
                if second {
                    a.in_r_second(u.letters(), xm)
                } else {
                    a.in_r_prime(u.letters(), xm)
                }
            };
            for second in [false, true] {
                let first: Vec<usize> = (stem_len + 1..=stem_len + period)
                    .filter(|&m| fire(m, second))
                    .collect();
                let next: Vec<usize> = (stem_len + period + 1..=stem_len + 2 * period)
                    .filter(|&m| fire(m, second))
                    .collect();
                let shifted: Vec<usize> = first.iter().map(|m| m + period).collect();
                if first.is_empty() || next != shifted {
                    violations += 1;
                }
            }
        }
    }
    (
        runs > 0 && violations == 0,
        format!("{runs} accepting runs, {violations} violations"),
    )
}

fn main() {
    let criteria: [fn() -> Outcome; 10] = [
        criterion_1,
        criterion_2,
        criterion_3,
        criterion_4,
        criterion_5,
        criterion_6,
        criterion_7,
        criterion_8,
        criterion_9,
        criterion_10,
    ];
    let mut unexpected = Vec::new();
    let mut passed = 0;
    for (i, f) in criteria.iter().enumerate() {
        let n = i + 1;
        let start = Instant::now();
        let (ok, detail) = f();
        let secs = start.elapsed().as_secs_f64();
        println!(
            "criterion {n:>2}: {} ({secs:.1}s) {detail}",
            if ok { "PASS" } else { "FAIL" }
        );
        if ok {
            passed += 1;
        } else if !UNATTAINABLE.contains(&n) {
            unexpected.push(n);
        }
    }
    println!("acceptance: {passed}/10 PASS; known unattainable: {UNATTAINABLE:?}");
    if !unexpected.is_empty() {
        eprintln!("unexpected failures: {unexpected:?}");
        std::process::exit(1);
    }
}
