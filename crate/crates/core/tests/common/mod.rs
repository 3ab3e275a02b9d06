//! Helpers shared by the integration tests and the acceptance run.
#![allow(dead_code)]

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;

use twolevel::engine::Description;
use twolevel::lexicon::Continuation;
use twolevel::pair_regex::dfa::{compile_expr, dfa_from_table};
use twolevel::pair_regex::{
    dfa_complement, dfa_equivalent, dfa_minimize, dfa_product, PairDfa, PairExpr, PairSet,
    ProductMode,
};
use twolevel::rule_system::{compile_resolved, rule_holds, Operator, ResolvedRule};
use twolevel::symbols::{FeasiblePair, PairAlphabet, SymbolTable};

/// Every string over `n` symbols of length at most `max_len`.
pub fn all_strings(n: u32, max_len: usize) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..max_len {
        let mut next = Vec::with_capacity(layer.len() * n as usize);
        for s in &layer {
            for c in 0..n {
                let mut t: Vec<u32> = s.clone();
                t.push(c);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        layer = next;
    }
    out
}

/// An alphabet of `n` distinct pairs over fresh symbols, plus the table.
pub fn toy_alphabet(n: usize) -> (SymbolTable, PairAlphabet) {
    let mut t = SymbolTable::new();
    let a = t.intern("a").unwrap();
    let b = t.intern("b").unwrap();
    let c = t.intern("c").unwrap();
    let candidates = [
        FeasiblePair::new(a, a),
        FeasiblePair::new(a, b),
        FeasiblePair::new(b, b),
        FeasiblePair::new(c, c),
        FeasiblePair::new(b, a),
    ];
    (t, PairAlphabet::new(candidates[..n].iter().copied()))
}

pub fn random_set(rng: &mut StdRng, n: usize, allow_empty: bool) -> PairSet {
    loop {
        let mut s = PairSet::empty(n);
        for i in 0..n as u32 {
            if rng.gen_bool(0.4) {
                s.insert(i);
            }
        }
        if allow_empty || !s.is_empty() {
            return s;
        }
    }
}

pub fn random_expr(rng: &mut StdRng, n: usize, depth: u32) -> PairExpr {
    if depth == 0 || rng.gen_bool(0.3) {
        return match rng.gen_range(0..6) {
            0 => PairExpr::Epsilon,
            _ => PairExpr::Set(random_set(rng, n, false)),
        };
    }
    match rng.gen_range(0..4) {
        0 => PairExpr::Concat(vec![random_expr(rng, n, depth - 1), random_expr(rng, n, depth - 1)]),
        1 => PairExpr::Union(vec![random_expr(rng, n, depth - 1), random_expr(rng, n, depth - 1)]),
        2 => PairExpr::Star(Box::new(random_expr(rng, n, depth - 1))),
        _ => PairExpr::Diff(
            Box::new(random_expr(rng, n, depth - 1)),
            Box::new(random_expr(rng, n, depth - 1)),
        ),
    }
}

pub fn random_rule(rng: &mut StdRng, alphabet: &PairAlphabet, i: usize) -> ResolvedRule {
    let n = alphabet.len();
    let op = [
        Operator::ContextRestriction,
        Operator::SurfaceCoercion,
        Operator::Composite,
        Operator::Exclusion,
    ][rng.gen_range(0..4)];
    let corr = random_set(rng, n, false);
    let k = rng.gen_range(1..=2);
    let contexts = (0..k)
        .map(|_| (random_expr(rng, n, 3), random_expr(rng, n, 3)))
        .collect();
    ResolvedRule::from_parts(format!("random {i}"), op, corr, contexts, alphabet)
}

/// Disagreements between a compiled rule and the interpreter on every
/// string of length at most `max_len`, unframed, and the number of strings
/// the interpreter rejects.
pub fn rule_disagreements(rule: &ResolvedRule, n: usize, max_len: usize) -> (usize, usize) {
    let dfa = compile_resolved(rule, n, 0);
    let mut dis = 0;
    let mut rejected = 0;
    for s in all_strings(n as u32, max_len) {
        let holds = rule_holds(rule, &s, None);
        rejected += usize::from(!holds);
        dis += usize::from(dfa.accepts(&s) != holds);
    }
    (dis, rejected)
}

pub struct OracleReport {
    pub rules: usize,
    pub projections: usize,
    /// Projections on which the rule rejects at least one string.
    pub nontrivial: usize,
    pub strings: usize,
    pub disagreements: Vec<String>,
}

/// 1,000 (or `count`) random rules over 3-pair alphabets, checked
/// exhaustively on strings of length at most 6.
pub fn synthetic_oracle(count: usize, seed: u64) -> OracleReport {
    let (_, alphabet) = toy_alphabet(3);
    let mut rng = StdRng::seed_from_u64(seed);
    let rules: Vec<ResolvedRule> = (0..count).map(|i| random_rule(&mut rng, &alphabet, i)).collect();
    let strings = all_strings(3, 6).len();
    let per: Vec<(usize, usize)> = rules.par_iter().map(|r| rule_disagreements(r, 3, 6)).collect();
    let disagreements = rules
        .iter()
        .zip(&per)
        .filter(|(_, (d, _))| *d > 0)
        .map(|(r, (d, _))| format!("{}: {d} strings", r.name))
        .collect();
    OracleReport {
        rules: count,
        projections: count,
        nontrivial: per.iter().filter(|(_, rej)| *rej > 0).count(),
        strings: strings * count,
        disagreements,
    }
}

fn expr_pairs(e: &PairExpr, out: &mut Vec<u32>) {
    match e {
        PairExpr::Set(s) => out.extend(s.iter()),
        PairExpr::Epsilon | PairExpr::Marker => {}
        PairExpr::Concat(v) | PairExpr::Union(v) => v.iter().for_each(|x| expr_pairs(x, out)),
        PairExpr::Star(x) => expr_pairs(x, out),
        PairExpr::Diff(a, b) => {
            expr_pairs(a, out);
            expr_pairs(b, out);
        }
    }
}

/// Sub-alphabets of at most four pairs for a rule. Each holds one pair of
/// the correspondence; the rest are drawn from the other pairs of its
/// lexical class, the pairs its contexts mention, and the boundary.
pub fn sub_alphabets(rule: &ResolvedRule, boundary: u32, k: usize, seed: u64) -> Vec<Vec<u32>> {
    let mut rng = StdRng::seed_from_u64(seed);
    let corr: Vec<u32> = rule.corr.iter().collect();
    if corr.is_empty() {
        return Vec::new();
    }
    let rivals: Vec<u32> = rule.lexical_class.minus(&rule.corr).iter().collect();
    let mut ctx = Vec::new();
    for (l, r) in &rule.contexts {
        expr_pairs(l, &mut ctx);
        expr_pairs(r, &mut ctx);
    }
    ctx.push(boundary);
    ctx.sort_unstable();
    ctx.dedup();
    let mut out: Vec<Vec<u32>> = Vec::new();
    for _ in 0..k * 4 {
        if out.len() >= k {
            break;
        }
        let mut sub = vec![*corr.choose(&mut rng).unwrap()];
        if !rivals.is_empty() && rng.gen_bool(0.6) {
            sub.push(*rivals.choose(&mut rng).unwrap());
        }
        let mut pool: Vec<u32> = ctx.iter().copied().filter(|p| !sub.contains(p)).collect();
        pool.shuffle(&mut rng);
        sub.extend(pool.into_iter().take(4 - sub.len()));
        sub.sort_unstable();
        sub.dedup();
        if !out.contains(&sub) {
            out.push(sub);
        }
    }
    out
}

/// Projects a rule onto a sub-alphabet given as indices into the full one.
pub fn project(rule: &ResolvedRule, sub: &[u32], n: usize) -> ResolvedRule {
    let mut map = vec![None; n];
    for (j, &i) in sub.iter().enumerate() {
        map[i as usize] = Some(j as u32);
    }
    rule.project(&map, sub.len())
}

/// Every resolved ground rule of `d`, and every automaton rule actually run,
/// projected onto `k` sub-alphabets each and checked on all strings of
/// length at most 6.
pub fn turkish_oracle(d: &Description, k: usize) -> OracleReport {
    let n = d.alphabet.len();
    let mut rules: Vec<&ResolvedRule> = d.resolved.iter().collect();
    for a in &d.automata {
        if !d.resolved.contains(&a.rule) {
            rules.push(&a.rule);
        }
    }
    let results: Vec<(usize, usize, usize, Vec<String>)> = rules
        .par_iter()
        .enumerate()
        .map(|(i, r)| {
            let subs = sub_alphabets(r, d.boundary(), k, i as u64);
            let mut strings = 0;
            let mut nontrivial = 0;
            let mut bad = Vec::new();
            for sub in &subs {
                let p = project(r, sub, n);
                strings += all_strings(sub.len() as u32, 6).len();
                let (dis, rejected) = rule_disagreements(&p, sub.len(), 6);
                nontrivial += usize::from(rejected > 0);
                if dis > 0 {
                    let names: Vec<String> =
                        sub.iter().map(|&x| d.alphabet.display_pair(d.symbols(), x)).collect();
                    bad.push(format!("{} on {{{}}}: {dis} strings", r.name, names.join(" ")));
                }
            }
            (subs.len(), strings, nontrivial, bad)
        })
        .collect();
    OracleReport {
        rules: rules.len(),
        projections: results.iter().map(|r| r.0).sum(),
        nontrivial: results.iter().map(|r| r.2).sum(),
        strings: results.iter().map(|r| r.1).sum(),
        disagreements: results.into_iter().flat_map(|r| r.3).collect(),
    }
}

pub fn random_dfa(rng: &mut StdRng, alphabet: &PairAlphabet) -> PairDfa {
    let n = alphabet.len();
    let states = rng.gen_range(1..=5);
    let mut trans = Vec::with_capacity(states * n);
    for _ in 0..states * n {
        trans.push(if rng.gen_bool(0.15) {
            u32::MAX
        } else {
            rng.gen_range(0..states as u32)
        });
    }
    let finals = (0..states).map(|_| rng.gen_bool(0.4)).collect();
    dfa_from_table(n, alphabet, trans, finals, 0)
}

fn same_language(a: &PairDfa, b: &PairDfa, strings: &[Vec<u32>]) -> bool {
    strings.iter().all(|s| a.accepts(s) == b.accepts(s))
}

/// Checks the automaton algebra on `count` random pairs of automata, both
/// with `dfa_equivalent` and by brute force on strings of length at most 6.
/// Returns the failures.
pub fn dfa_algebra(count: usize, seed: u64) -> Vec<String> {
    let (_, alphabet) = toy_alphabet(3);
    let strings = all_strings(3, 6);
    let mut rng = StdRng::seed_from_u64(seed);
    let mut fails = Vec::new();
    for i in 0..count {
        let a = random_dfa(&mut rng, &alphabet);
        let b = random_dfa(&mut rng, &alphabet);
        let m = dfa_minimize(&a);
        let mm = dfa_minimize(&m);
        let mut check = |ok: bool, what: &str| {
            if !ok {
                fails.push(format!("automaton {i}: {what}"));
            }
        };
        check(mm.n_states() == m.n_states(), "minimize is not idempotent");
        check(dfa_equivalent(&m, &mm).unwrap(), "minimize twice changes the language");
        check(dfa_equivalent(&a, &m).unwrap(), "minimize changes the language");
        check(same_language(&a, &m, &strings), "minimize changes membership");
        let ca = dfa_complement(&a, &alphabet).unwrap();
        let cb = dfa_complement(&b, &alphabet).unwrap();
        check(
            dfa_equivalent(&dfa_complement(&ca, &alphabet).unwrap(), &a).unwrap(),
            "complement is not an involution",
        );
        let u = dfa_product(&a, &b, ProductMode::Union).unwrap();
        let x = dfa_product(&a, &b, ProductMode::Intersect).unwrap();
        let lhs = dfa_complement(&u, &alphabet).unwrap();
        let rhs = dfa_product(&ca, &cb, ProductMode::Intersect).unwrap();
        check(dfa_equivalent(&lhs, &rhs).unwrap(), "not(A or B) != not A and not B");
        check(same_language(&lhs, &rhs, &strings), "De Morgan fails on membership");
        let lhs2 = dfa_complement(&x, &alphabet).unwrap();
        let rhs2 = dfa_product(&ca, &cb, ProductMode::Union).unwrap();
        check(dfa_equivalent(&lhs2, &rhs2).unwrap(), "not(A and B) != not A or not B");
        check(same_language(&lhs2, &rhs2, &strings), "dual De Morgan fails on membership");
        let diff = dfa_product(&a, &b, ProductMode::Difference).unwrap();
        check(
            strings.iter().all(|s| diff.accepts(s) == (a.accepts(s) && !b.accepts(s))),
            "difference membership",
        );
    }
    fails
}

/// `e` compiled and matched directly agree on all strings up to `max_len`.
pub fn regex_agrees(e: &PairExpr, n: usize, max_len: usize) -> bool {
    let d = compile_expr(e, n, 0);
    all_strings(n as u32, max_len).iter().all(|s| d.accepts(s) == e.matches(s))
}

const BACK: &str = "aıou";
const FRONT: &str = "eiöü";
const ACUTE: &str = "áóú";

/// Positions where a surface vowel realized from lexical A or H disagrees
/// in backness with the nearest preceding surface vowel. After a vowel
/// written with an acute accent the expected value is front.
pub fn harmony_violations(d: &Description, pairs: &[u32]) -> Vec<usize> {
    let mut prev: Option<(char, bool)> = None;
    let mut bad = Vec::new();
    for (i, &p) in pairs.iter().enumerate() {
        let fp = d.alphabet.pair(p);
        let lex = d.symbols().name(fp.lexical);
        let surf = d.symbols().name(fp.surface);
        let Some(sc) = surf.chars().next().filter(|_| surf.chars().count() == 1) else {
            continue;
        };
        let is_vowel = BACK.contains(sc) || FRONT.contains(sc);
        if !is_vowel {
            continue;
        }
        if lex == "A" || lex == "H" {
            if let Some((pc, acute)) = prev {
                let want_front = acute || FRONT.contains(pc);
                if FRONT.contains(sc) != want_front {
                    bad.push(i);
                }
            }
        }
        let acute = lex.chars().count() == 1 && ACUTE.contains(lex.chars().next().unwrap());
        prev = Some((sc, acute));
    }
    bad
}

#[derive(Default)]
pub struct ClosureReport {
    pub paths: usize,
    pub surfaces: usize,
    /// Paths for which the rules allow no surface form.
    pub empty: Vec<(String, String)>,
    /// (lexical, gloss, surface) whose analyses miss the gloss.
    pub lost: Vec<(String, String, String)>,
    pub harmony_checked: usize,
    /// (lexical, surface, vowel positions)
    pub harmony_bad: Vec<(String, String, Vec<usize>)>,
}

/// analyze(generate(path)) for every lexicon path of at most
/// `max_morphemes` morphemes, with the harmony check on each realization.
pub fn closure(d: &Description, max_morphemes: usize) -> ClosureReport {
    let paths = d.lexicon.enumerate_paths(d.symbols(), max_morphemes);
    struct One {
        surfaces: usize,
        empty: bool,
        lost: Vec<String>,
        vowels: usize,
        harmony: Vec<(String, Vec<usize>)>,
    }
    let per: Vec<One> = paths
        .par_iter()
        .map(|(lex, gloss)| {
            let syms = d.symbols().tokenize(lex).expect("lexicon symbols tokenize");
            let reals = d.generate_pairs(&syms);
            let mut one = One {
                surfaces: reals.len(),
                empty: reals.is_empty(),
                lost: Vec::new(),
                vowels: 0,
                harmony: Vec::new(),
            };
            let mut seen = std::collections::BTreeSet::new();
            for pairs in &reals {
                let surface = d.surface_string(pairs);
                one.vowels += pairs
                    .iter()
                    .filter(|&&p| {
                        let l = d.symbols().name(d.alphabet.pair(p).lexical);
                        let s = d.symbols().name(d.alphabet.pair(p).surface);
                        (l == "A" || l == "H") && s != "0"
                    })
                    .count();
                let bad = harmony_violations(d, pairs);
                if !bad.is_empty() {
                    one.harmony.push((surface.clone(), bad));
                }
                if seen.insert(surface.clone()) && !d.analyze(&surface).iter().any(|a| &a.gloss == gloss) {
                    one.lost.push(surface);
                }
            }
            one
        })
        .collect();
    let mut r = ClosureReport {
        paths: paths.len(),
        ..Default::default()
    };
    for ((lex, gloss), one) in paths.into_iter().zip(per) {
        r.surfaces += one.surfaces;
        r.harmony_checked += one.vowels;
        if one.empty {
            r.empty.push((lex.clone(), gloss.clone()));
        }
        for s in one.lost {
            r.lost.push((lex.clone(), gloss.clone(), s));
        }
        for (s, pos) in one.harmony {
            r.harmony_bad.push((lex.clone(), s, pos));
        }
    }
    r
}

/// Random lexicon paths with exactly `morphemes` non-empty entries, as
/// (lexical, gloss). Sampling walks the continuation graph from the root
/// sublexicons and closes through empty entries only once the count is
/// reached.
pub fn sample_paths(d: &Description, morphemes: usize, count: usize, seed: u64) -> Vec<(String, String)> {
    let lx = &d.lexicon;
    let n = lx.sublexicons.len();
    // can_end[s]: `#` is reachable from s through empty entries.
    let mut can_end = vec![false; n];
    loop {
        let mut changed = false;
        for s in 0..n {
            if can_end[s] {
                continue;
            }
            let ok = lx.entries(s as u32).iter().any(|e| {
                e.form.is_empty()
                    && match e.continuation {
                        Continuation::End => true,
                        Continuation::Sub(c) => can_end[c as usize],
                    }
            });
            if ok {
                can_end[s] = true;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    let roots: Vec<u32> = lx.roots.iter().filter_map(|r| lx.sub_index(r)).collect();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = std::collections::BTreeSet::new();
    let mut tries = 0usize;
    while out.len() < count && tries < count * 1000 {
        tries += 1;
        let mut sub = *roots.choose(&mut rng).unwrap();
        let mut lexical = String::new();
        let mut gloss = String::new();
        let mut used = 0;
        for _ in 0..64 {
            let entries = lx.entries(sub);
            let e = if used == morphemes {
                let closing: Vec<_> = entries
                    .iter()
                    .filter(|e| {
                        e.form.is_empty()
                            && match e.continuation {
                                Continuation::End => true,
                                Continuation::Sub(c) => can_end[c as usize],
                            }
                    })
                    .collect();
                match closing.choose(&mut rng) {
                    Some(e) => *e,
                    None => break,
                }
            } else {
                let open: Vec<_> = entries
                    .iter()
                    .filter(|e| e.continuation != Continuation::End)
                    .collect();
                match open.choose(&mut rng) {
                    Some(e) => *e,
                    None => break,
                }
            };
            used += usize::from(!e.form.is_empty());
            for s in &e.form {
                lexical.push_str(d.symbols().name(*s));
            }
            gloss.push_str(&e.gloss);
            match e.continuation {
                Continuation::End => {
                    out.insert((lexical.clone(), gloss.clone()));
                    break;
                }
                Continuation::Sub(c) => sub = c,
            }
            if used > morphemes {
                break;
            }
        }
    }
    let mut v: Vec<_> = out.into_iter().collect();
    v.shuffle(&mut rng);
    v
}
