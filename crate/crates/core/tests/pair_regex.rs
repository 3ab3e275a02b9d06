mod common;

use proptest::prelude::*;

use twolevel::pair_regex::dfa::{compile_expr, dfa_from_table};
use twolevel::pair_regex::{
    compile_regex, dfa_complement, dfa_equivalent, dfa_minimize, dfa_product, parse_pair_regex, PairDfa,
    PairExpr, PairSet, ProductMode, Resolver,
};
use twolevel::symbols::{parse_declarations, Declarations, PairAlphabet};
use twolevel::turkish::turkish;

fn toy() -> (Declarations, PairAlphabet) {
    let d = parse_declarations("ALPHABET\n a b %-:0 # ;\nSETS\nV = a ;\nDEFINITIONS\nMB = %-:0 ;\n").unwrap();
    let alpha = PairAlphabet::new(d.declared_pairs.iter().copied());
    (d, alpha)
}

fn compile(text: &str, d: &Declarations, alpha: &PairAlphabet) -> PairDfa {
    let re = parse_pair_regex(text, &|n| d.name_kind(n)).unwrap();
    compile_regex(&re, d, alpha).unwrap()
}

fn word(d: &Declarations, alpha: &PairAlphabet, s: &str) -> Vec<u32> {
    s.split_whitespace()
        .map(|t| {
            let sym = d.symbols.get(t).unwrap();
            alpha.index_of(twolevel::symbols::FeasiblePair::new(sym, sym)).unwrap()
        })
        .collect()
}

#[test]
fn a_bstar_a() {
    let (d, alpha) = toy();
    let dfa = compile("a b* a", &d, &alpha);
    for s in ["a a", "a b a", "a b b a"] {
        assert!(dfa.accepts(&word(&d, &alpha, s)), "{s}");
    }
    for s in ["a", "a b", ""] {
        assert!(!dfa.accepts(&word(&d, &alpha, s)), "{s}");
    }
}

#[test]
fn empty_brackets_accept_only_epsilon() {
    let (d, alpha) = toy();
    let dfa = compile("[ ]", &d, &alpha);
    assert!(dfa.accepts(&[]));
    for s in common::all_strings(alpha.len() as u32, 3).iter().skip(1) {
        assert!(!dfa.accepts(s));
    }
}

#[test]
fn boundary_macro_is_one_pair() {
    let (d, alpha) = toy();
    let dfa = dfa_minimize(&compile("MB", &d, &alpha));
    let dash = d.symbols.get("-").unwrap();
    let zero = d.symbols.get("0").unwrap();
    let p = alpha.index_of(twolevel::symbols::FeasiblePair::new(dash, zero)).unwrap();
    assert_eq!(dfa.n_states(), 2);
    assert!(dfa.accepts(&[p]));
    assert!(!dfa.accepts(&[p, p]));
}

#[test]
fn intersect_of_astar_and_aaa() {
    let (d, alpha) = toy();
    let x = dfa_product(
        &compile("a*", &d, &alpha),
        &compile("a a a", &d, &alpha),
        ProductMode::Intersect,
    )
    .unwrap();
    let aaa = word(&d, &alpha, "a a a");
    for s in common::all_strings(alpha.len() as u32, 5) {
        assert_eq!(x.accepts(&s), s == aaa);
    }
}

#[test]
fn precedence() {
    let (d, alpha) = toy();
    let a = word(&d, &alpha, "a");
    let b = word(&d, &alpha, "b");
    // Difference is tighter than union.
    let u = compile("a | b - b", &d, &alpha);
    assert!(u.accepts(&a) && !u.accepts(&b));
    // Concatenation is tighter than difference.
    let c = compile("a b - a b", &d, &alpha);
    assert!(c.is_empty_language());
    // Closure is tightest.
    let s = compile("a b*", &d, &alpha);
    assert!(s.accepts(&word(&d, &alpha, "a b b")));
    assert!(!s.accepts(&word(&d, &alpha, "a b a b")));
}

#[test]
fn turkish_atoms() {
    let desc = turkish();
    let decls = &desc.declarations;
    let r = Resolver::new(decls, &desc.alphabet);
    let name = |i: u32| desc.alphabet.display_pair(desc.symbols(), i);
    let set = |t: &str| {
        let e = r.resolve(&parse_pair_regex(t, &|n| decls.name_kind(n)).unwrap()).unwrap();
        e.as_single_pairs().unwrap()
    };
    // :Vbk is every pair with a back surface vowel.
    let vbk = set(":Vbk");
    assert!(vbk.iter().any(|i| name(i) == "A:a"));
    assert!(vbk.iter().any(|i| name(i) == "á:a"));
    assert!(!vbk.iter().any(|i| name(i) == "A:e"));
    // \[CsVed:] excludes every pair whose lexical side is a voiced stop.
    let voiced = ["b", "c", "d", "g"];
    let lex = |i: u32| desc.symbols().name(desc.alphabet.pair(i).lexical).to_string();
    let not_voiced = set("\\[CsVed:]");
    assert!(not_voiced.iter().all(|i| !voiced.contains(&lex(i).as_str())));
    let n_voiced = (0..desc.alphabet.len() as u32).filter(|&i| voiced.contains(&lex(i).as_str())).count();
    assert_eq!(not_voiced.len(), desc.alphabet.len() - n_voiced);
    // A bare symbol is its identity pair.
    let a = set("a");
    assert_eq!(a.len(), 1);
    assert_eq!(name(a.iter().next().unwrap()), "a");
}

fn expr_strategy(n: usize) -> impl Strategy<Value = PairExpr> {
    let leaf = prop_oneof![
        1 => Just(PairExpr::Epsilon),
        4 => proptest::collection::vec(any::<bool>(), n).prop_filter_map("empty set", move |bits| {
            let mut s = PairSet::empty(n);
            for (i, b) in bits.iter().enumerate() {
                if *b {
                    s.insert(i as u32);
                }
            }
            (!s.is_empty()).then_some(PairExpr::Set(s))
        }),
    ];
    leaf.prop_recursive(4, 24, 2, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| PairExpr::Concat(vec![a, b])),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| PairExpr::Union(vec![a, b])),
            inner.clone().prop_map(|a| PairExpr::Star(Box::new(a))),
            (inner.clone(), inner).prop_map(|(a, b)| PairExpr::Diff(Box::new(a), Box::new(b))),
        ]
    })
}

fn dfa_strategy(n: usize) -> impl Strategy<Value = PairDfa> {
    (1usize..=5).prop_flat_map(move |states| {
        (
            proptest::collection::vec(prop_oneof![1 => Just(u32::MAX), 6 => 0..states as u32], states * n),
            proptest::collection::vec(any::<bool>(), states),
        )
            .prop_map(move |(trans, finals)| {
                let (_, alpha) = common::toy_alphabet(n);
                dfa_from_table(n, &alpha, trans, finals, 0)
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn compiled_regex_agrees_with_matcher(e in expr_strategy(3)) {
        let d = compile_expr(&e, 3, 0);
        for s in common::all_strings(3, 6) {
            prop_assert_eq!(d.accepts(&s), e.matches(&s), "{:?} on {:?}", e, s);
        }
    }

    #[test]
    fn minimize_preserves_language(a in dfa_strategy(3)) {
        let m = dfa_minimize(&a);
        prop_assert!(dfa_equivalent(&a, &m).unwrap());
        prop_assert_eq!(dfa_minimize(&m).n_states(), m.n_states());
        for s in common::all_strings(3, 5) {
            prop_assert_eq!(a.accepts(&s), m.accepts(&s));
        }
    }

    #[test]
    fn de_morgan(a in dfa_strategy(3), b in dfa_strategy(3)) {
        let (_, alpha) = common::toy_alphabet(3);
        let u = dfa_product(&a, &b, ProductMode::Union).unwrap();
        let lhs = dfa_complement(&u, &alpha).unwrap();
        let rhs = dfa_product(
            &dfa_complement(&a, &alpha).unwrap(),
            &dfa_complement(&b, &alpha).unwrap(),
            ProductMode::Intersect,
        ).unwrap();
        prop_assert!(dfa_equivalent(&lhs, &rhs).unwrap());
        let cc = dfa_complement(&dfa_complement(&a, &alpha).unwrap(), &alpha).unwrap();
        prop_assert!(dfa_equivalent(&cc, &a).unwrap());
    }
}

#[test]
fn random_automaton_algebra() {
    let fails = common::dfa_algebra(200, 99);
    assert!(fails.is_empty(), "{fails:?}");
}

#[test]
fn mismatched_alphabets_are_rejected() {
    let (_, a3) = common::toy_alphabet(3);
    let (_, a2) = common::toy_alphabet(2);
    let x = dfa_from_table(3, &a3, vec![0, 0, 0], vec![true], 0);
    let y = dfa_from_table(2, &a2, vec![0, 0], vec![true], 0);
    assert!(dfa_product(&x, &y, ProductMode::Union).is_err());
    assert!(dfa_complement(&x, &a2).is_err());
}
