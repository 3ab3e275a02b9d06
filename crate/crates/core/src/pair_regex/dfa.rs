//! Deterministic automata over pair indices and their algebra.
//!
//! Automata are partial: a missing transition is [`DEAD`]. After
//! minimisation every live state can reach a final state, so a run that hits
//! `DEAD` can never be accepted.
//!
//! Debug dump format (one line per transition, tab separated):
//!
//! ```text
//! start <state>
//! final <state>
//! <state> <pair> <next-state>
//! ```

use std::collections::{HashMap, VecDeque};
use std::fmt::Write as _;

use thiserror::Error;

use super::{PairExpr, PairSet};
use crate::symbols::{PairAlphabet, SymbolTable};

pub const DEAD: u32 = u32::MAX;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("automata are over different pair alphabets")]
pub struct AlphabetError;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PairDfa {
    n_syms: usize,
    alphabet: u64,
    trans: Vec<u32>,
    finals: Vec<bool>,
    start: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ProductMode {
    Intersect,
    Union,
    Difference,
}

impl PairDfa {
    /// The automaton accepting nothing.
    pub fn empty(n_syms: usize, alphabet: u64) -> Self {
        PairDfa {
            n_syms,
            alphabet,
            trans: vec![DEAD; n_syms],
            finals: vec![false],
            start: 0,
        }
    }

    pub fn n_states(&self) -> usize {
        self.finals.len()
    }

    pub fn n_syms(&self) -> usize {
        self.n_syms
    }

    pub fn alphabet_id(&self) -> u64 {
        self.alphabet
    }

    pub fn start(&self) -> u32 {
        self.start
    }

    pub fn is_final(&self, s: u32) -> bool {
        s != DEAD && self.finals[s as usize]
    }

    #[inline]
    pub fn next(&self, s: u32, sym: u32) -> u32 {
        if s == DEAD {
            DEAD
        } else {
            self.trans[s as usize * self.n_syms + sym as usize]
        }
    }

    pub fn run(&self, syms: &[u32]) -> u32 {
        syms.iter().fold(self.start, |s, &c| self.next(s, c))
    }

    pub fn accepts(&self, syms: &[u32]) -> bool {
        self.is_final(self.run(syms))
    }

    pub fn is_empty_language(&self) -> bool {
        !self.finals.iter().any(|f| *f)
    }

    fn check(&self, o: &PairDfa) -> Result<(), AlphabetError> {
        if self.n_syms == o.n_syms && self.alphabet == o.alphabet {
            Ok(())
        } else {
            Err(AlphabetError)
        }
    }

    /// Tabular dump for diffing.
    pub fn dump(&self, alphabet: &PairAlphabet, table: &SymbolTable) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "start\t{}", self.start);
        for (s, f) in self.finals.iter().enumerate() {
            if *f {
                let _ = writeln!(out, "final\t{s}");
            }
        }
        for s in 0..self.n_states() {
            for c in 0..self.n_syms {
                let t = self.trans[s * self.n_syms + c];
                if t != DEAD {
                    let name = if c < alphabet.len() {
                        alphabet.display_pair(table, c as u32)
                    } else {
                        format!("<{c}>")
                    };
                    let _ = writeln!(out, "{s}\t{name}\t{t}");
                }
            }
        }
        out
    }
}

/// Nondeterministic automaton with epsilon moves and set-labelled edges.
struct Nfa {
    n_syms: usize,
    eps: Vec<Vec<u32>>,
    edges: Vec<Vec<(u32, u32)>>,
    labels: Vec<Vec<u32>>,
}

impl Nfa {
    fn new(n_syms: usize) -> Self {
        Nfa {
            n_syms,
            eps: Vec::new(),
            edges: Vec::new(),
            labels: Vec::new(),
        }
    }

    fn state(&mut self) -> u32 {
        self.eps.push(Vec::new());
        self.edges.push(Vec::new());
        (self.eps.len() - 1) as u32
    }

    fn label(&mut self, syms: Vec<u32>) -> u32 {
        self.labels.push(syms);
        (self.labels.len() - 1) as u32
    }

    /// Thompson construction; returns (start, accept).
    fn build(&mut self, e: &PairExpr, alphabet: u64) -> (u32, u32) {
        match e {
            PairExpr::Set(s) => {
                let a = self.state();
                let b = self.state();
                let l = self.label(s.iter().collect());
                self.edges[a as usize].push((l, b));
                (a, b)
            }
            PairExpr::Marker => {
                let a = self.state();
                let b = self.state();
                let l = self.label(vec![(self.n_syms - 1) as u32]);
                self.edges[a as usize].push((l, b));
                (a, b)
            }
            PairExpr::Epsilon => {
                let a = self.state();
                (a, a)
            }
            PairExpr::Concat(v) => {
                let a = self.state();
                let mut cur = a;
                for x in v {
                    let (s, t) = self.build(x, alphabet);
                    self.eps[cur as usize].push(s);
                    cur = t;
                }
                (a, cur)
            }
            PairExpr::Union(v) => {
                let a = self.state();
                let b = self.state();
                for x in v {
                    let (s, t) = self.build(x, alphabet);
                    self.eps[a as usize].push(s);
                    self.eps[t as usize].push(b);
                }
                (a, b)
            }
            PairExpr::Star(x) => {
                let a = self.state();
                let b = self.state();
                let (s, t) = self.build(x, alphabet);
                self.eps[a as usize].push(s);
                self.eps[a as usize].push(b);
                self.eps[t as usize].push(s);
                self.eps[t as usize].push(b);
                (a, b)
            }
            PairExpr::Diff(x, y) => {
                let dx = compile_expr(x, self.n_syms, alphabet);
                let dy = compile_expr(y, self.n_syms, alphabet);
                let d = product(&dx, &dy, ProductMode::Difference);
                self.embed(&d, None)
            }
        }
    }

    /// Copies a DFA in; `eps_sym` turns that symbol into an epsilon move.
    fn embed(&mut self, d: &PairDfa, eps_sym: Option<u32>) -> (u32, u32) {
        let base = self.eps.len() as u32;
        for _ in 0..d.n_states() {
            self.state();
        }
        let end = self.state();
        for s in 0..d.n_states() {
            let mut by_target: HashMap<u32, Vec<u32>> = HashMap::new();
            for c in 0..d.n_syms {
                let t = d.trans[s * d.n_syms + c];
                if t == DEAD {
                    continue;
                }
                if Some(c as u32) == eps_sym {
                    self.eps[base as usize + s].push(base + t);
                } else {
                    by_target.entry(t).or_default().push(c as u32);
                }
            }
            let mut targets: Vec<_> = by_target.into_iter().collect();
            targets.sort();
            for (t, syms) in targets {
                let l = self.label(syms);
                self.edges[base as usize + s].push((l, base + t));
            }
            if d.finals[s] {
                self.eps[base as usize + s].push(end);
            }
        }
        (base + d.start, end)
    }

    fn closure(&self, set: &mut Vec<u32>, mark: &mut [u32], stamp: u32) {
        let mut stack: Vec<u32> = set.clone();
        for s in set.iter() {
            mark[*s as usize] = stamp;
        }
        while let Some(s) = stack.pop() {
            for &t in &self.eps[s as usize] {
                if mark[t as usize] != stamp {
                    mark[t as usize] = stamp;
                    set.push(t);
                    stack.push(t);
                }
            }
        }
        set.sort_unstable();
        set.dedup();
    }

    /// Subset construction over the first `out_syms` symbols.
    fn determinize(&self, start: u32, accept: u32, out_syms: usize, alphabet: u64) -> PairDfa {
        let mut mark = vec![0u32; self.eps.len()];
        let mut stamp = 1;
        let mut init = vec![start];
        self.closure(&mut init, &mut mark, stamp);
        let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut sets: Vec<Vec<u32>> = Vec::new();
        ids.insert(init.clone(), 0);
        sets.push(init);
        let mut trans: Vec<u32> = Vec::new();
        let mut finals = Vec::new();
        let mut i = 0;
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); out_syms];
        let mut touched: Vec<u32> = Vec::new();
        while i < sets.len() {
            let cur = sets[i].clone();
            finals.push(cur.binary_search(&accept).is_ok());
            for &s in &cur {
                for &(l, t) in &self.edges[s as usize] {
                    for &c in &self.labels[l as usize] {
                        if (c as usize) < out_syms {
                            let b = &mut buckets[c as usize];
                            if b.is_empty() {
                                touched.push(c);
                            }
                            b.push(t);
                        }
                    }
                }
            }
            let row = trans.len();
            trans.extend(std::iter::repeat_n(DEAD, out_syms));
            let mut memo: HashMap<Vec<u32>, u32> = HashMap::new();
            touched.sort_unstable();
            for &c in &touched {
                let mut b = std::mem::take(&mut buckets[c as usize]);
                b.sort_unstable();
                b.dedup();
                let id = if let Some(&id) = memo.get(&b) {
                    id
                } else {
                    let key = b.clone();
                    stamp += 1;
                    let mut set = b;
                    self.closure(&mut set, &mut mark, stamp);
                    let id = match ids.get(&set) {
                        Some(&id) => id,
                        None => {
                            let id = sets.len() as u32;
                            ids.insert(set.clone(), id);
                            sets.push(set);
                            id
                        }
                    };
                    memo.insert(key, id);
                    id
                };
                trans[row + c as usize] = id;
            }
            touched.clear();
            i += 1;
        }
        PairDfa {
            n_syms: out_syms,
            alphabet,
            trans,
            finals,
            start: 0,
        }
    }
}

/// Compiles a resolved expression over `n_syms` symbols (the marker, if
/// used, is one more) into a minimal DFA.
pub fn compile_expr(e: &PairExpr, n_syms: usize, alphabet: u64) -> PairDfa {
    let mut nfa = Nfa::new(n_syms);
    let (s, t) = nfa.build(e, alphabet);
    minimize(&nfa.determinize(s, t, n_syms, alphabet))
}

const MARK_SALT: u64 = 0x6d61_726b_6572;

/// Compiles an expression over the marked alphabet without erasing.
pub(crate) fn compile_marked(e: &PairExpr, n: usize, alphabet: u64) -> PairDfa {
    compile_expr(e, n + 1, alphabet ^ MARK_SALT)
}

/// Replaces transitions on `sym` by epsilon moves and determinises over the
/// first `out_syms` symbols.
pub(crate) fn erase_symbol(d: &PairDfa, sym: u32, out_syms: usize, alphabet: u64) -> PairDfa {
    let mut nfa = Nfa::new(d.n_syms);
    let (s, t) = nfa.embed(d, Some(sym));
    minimize(&nfa.determinize(s, t, out_syms, alphabet))
}

fn trim(d: &PairDfa) -> PairDfa {
    let n = d.n_states();
    let k = d.n_syms;
    let mut reach = vec![false; n];
    let mut stack = vec![d.start];
    reach[d.start as usize] = true;
    while let Some(s) = stack.pop() {
        for c in 0..k {
            let t = d.trans[s as usize * k + c];
            if t != DEAD && !reach[t as usize] {
                reach[t as usize] = true;
                stack.push(t);
            }
        }
    }
    let mut rev: Vec<Vec<u32>> = vec![Vec::new(); n];
    for s in 0..n {
        if !reach[s] {
            continue;
        }
        for c in 0..k {
            let t = d.trans[s * k + c];
            if t != DEAD {
                rev[t as usize].push(s as u32);
            }
        }
    }
    let mut live = vec![false; n];
    let mut stack: Vec<u32> = (0..n as u32)
        .filter(|&s| reach[s as usize] && d.finals[s as usize])
        .collect();
    for &s in &stack {
        live[s as usize] = true;
    }
    while let Some(s) = stack.pop() {
        for &p in &rev[s as usize] {
            if !live[p as usize] {
                live[p as usize] = true;
                stack.push(p);
            }
        }
    }
    if !live[d.start as usize] {
        return PairDfa::empty(k, d.alphabet);
    }
    let mut map = vec![DEAD; n];
    let mut order = Vec::new();
    let mut queue = VecDeque::from([d.start]);
    map[d.start as usize] = 0;
    while let Some(s) = queue.pop_front() {
        order.push(s);
        for c in 0..k {
            let t = d.trans[s as usize * k + c];
            if t != DEAD && live[t as usize] && map[t as usize] == DEAD {
                map[t as usize] = (order.len() + queue.len()) as u32;
                queue.push_back(t);
            }
        }
    }
    let mut trans = vec![DEAD; order.len() * k];
    let mut finals = vec![false; order.len()];
    for (ns, &s) in order.iter().enumerate() {
        finals[ns] = d.finals[s as usize];
        for c in 0..k {
            let t = d.trans[s as usize * k + c];
            if t != DEAD {
                trans[ns * k + c] = map[t as usize];
            }
        }
    }
    PairDfa {
        n_syms: k,
        alphabet: d.alphabet,
        trans,
        finals,
        start: 0,
    }
}

/// Trims then merges equivalent states (Moore refinement). The result is
/// numbered in breadth-first order from the start state, so equal languages
/// give identical automata.
fn minimize(d: &PairDfa) -> PairDfa {
    let d = trim(d);
    let n = d.n_states();
    let k = d.n_syms;
    let mut class: Vec<u32> = d.finals.iter().map(|f| *f as u32).collect();
    let mut count = if class.iter().all(|c| *c == class[0]) { 1 } else { 2 };
    if count == 1 {
        class.iter_mut().for_each(|c| *c = 0);
    }
    loop {
        let mut ids: HashMap<Vec<u32>, u32> = HashMap::new();
        let mut next = vec![0u32; n];
        let mut sig = Vec::with_capacity(k + 1);
        for s in 0..n {
            sig.clear();
            sig.push(class[s]);
            for c in 0..k {
                let t = d.trans[s * k + c];
                sig.push(if t == DEAD { DEAD } else { class[t as usize] });
            }
            let len = ids.len() as u32;
            next[s] = *ids.entry(sig.clone()).or_insert(len);
        }
        let new_count = ids.len();
        class = next;
        if new_count == count {
            break;
        }
        count = new_count;
    }
    let mut rep = vec![DEAD; count];
    for s in 0..n {
        if rep[class[s] as usize] == DEAD {
            rep[class[s] as usize] = s as u32;
        }
    }
    let mut trans = vec![DEAD; count * k];
    let mut finals = vec![false; count];
    for c_id in 0..count {
        let s = rep[c_id] as usize;
        finals[c_id] = d.finals[s];
        for c in 0..k {
            let t = d.trans[s * k + c];
            if t != DEAD {
                trans[c_id * k + c] = class[t as usize];
            }
        }
    }
    trim(&PairDfa {
        n_syms: k,
        alphabet: d.alphabet,
        trans,
        finals,
        start: class[d.start as usize],
    })
}

fn product(a: &PairDfa, b: &PairDfa, mode: ProductMode) -> PairDfa {
    let k = a.n_syms;
    let alive = |x: u32, y: u32| match mode {
        ProductMode::Intersect => x != DEAD && y != DEAD,
        ProductMode::Difference => x != DEAD,
        ProductMode::Union => x != DEAD || y != DEAD,
    };
    let accept = |x: u32, y: u32| match mode {
        ProductMode::Intersect => a.is_final(x) && b.is_final(y),
        ProductMode::Difference => a.is_final(x) && !b.is_final(y),
        ProductMode::Union => a.is_final(x) || b.is_final(y),
    };
    let mut ids: HashMap<(u32, u32), u32> = HashMap::new();
    let mut states = vec![(a.start, b.start)];
    ids.insert((a.start, b.start), 0);
    let mut trans = Vec::new();
    let mut finals = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let (x, y) = states[i];
        finals.push(accept(x, y));
        for c in 0..k as u32 {
            let nx = a.next(x, c);
            let ny = b.next(y, c);
            if !alive(nx, ny) {
                trans.push(DEAD);
                continue;
            }
            let id = *ids.entry((nx, ny)).or_insert_with(|| {
                states.push((nx, ny));
                (states.len() - 1) as u32
            });
            trans.push(id);
        }
        i += 1;
    }
    minimize(&PairDfa {
        n_syms: k,
        alphabet: a.alphabet,
        trans,
        finals,
        start: 0,
    })
}

fn complement(a: &PairDfa) -> PairDfa {
    let k = a.n_syms;
    let n = a.n_states();
    let sink = n as u32;
    let mut trans = Vec::with_capacity((n + 1) * k);
    for s in 0..n {
        for c in 0..k {
            let t = a.trans[s * k + c];
            trans.push(if t == DEAD { sink } else { t });
        }
    }
    trans.extend(std::iter::repeat_n(sink, k));
    let mut finals: Vec<bool> = a.finals.iter().map(|f| !f).collect();
    finals.push(true);
    minimize(&PairDfa {
        n_syms: k,
        alphabet: a.alphabet,
        trans,
        finals,
        start: a.start,
    })
}

pub fn dfa_product(a: &PairDfa, b: &PairDfa, mode: ProductMode) -> Result<PairDfa, AlphabetError> {
    a.check(b)?;
    Ok(product(a, b, mode))
}

pub fn dfa_complement(a: &PairDfa, alphabet: &PairAlphabet) -> Result<PairDfa, AlphabetError> {
    if a.n_syms != alphabet.len() || a.alphabet != alphabet.fingerprint() {
        return Err(AlphabetError);
    }
    Ok(complement(a))
}

/// Complement relative to the automaton's own symbol count.
pub(crate) fn complement_raw(a: &PairDfa) -> PairDfa {
    complement(a)
}

pub(crate) fn product_raw(a: &PairDfa, b: &PairDfa, mode: ProductMode) -> PairDfa {
    product(a, b, mode)
}

pub fn dfa_minimize(a: &PairDfa) -> PairDfa {
    minimize(a)
}

/// Decides language equality by exploring the product of both automata.
pub fn dfa_equivalent(a: &PairDfa, b: &PairDfa) -> Result<bool, AlphabetError> {
    a.check(b)?;
    let mut seen: HashMap<(u32, u32), ()> = HashMap::new();
    let mut stack = vec![(a.start, b.start)];
    seen.insert((a.start, b.start), ());
    while let Some((x, y)) = stack.pop() {
        if a.is_final(x) != b.is_final(y) {
            return Ok(false);
        }
        for c in 0..a.n_syms as u32 {
            let nx = a.next(x, c);
            let ny = b.next(y, c);
            if nx == DEAD && ny == DEAD {
                continue;
            }
            if seen.insert((nx, ny), ()).is_none() {
                stack.push((nx, ny));
            }
        }
    }
    Ok(true)
}

/// Builds a DFA directly from a transition table; used by tests and random
/// automaton generation. Missing transitions are `DEAD`.
pub fn dfa_from_table(
    n_syms: usize,
    alphabet: &PairAlphabet,
    trans: Vec<u32>,
    finals: Vec<bool>,
    start: u32,
) -> PairDfa {
    assert_eq!(trans.len(), finals.len() * n_syms);
    PairDfa {
        n_syms,
        alphabet: alphabet.fingerprint(),
        trans,
        finals,
        start,
    }
}

/// A set of pair indices accepted as single-symbol strings from `s`.
pub fn live_symbols(d: &PairDfa, s: u32) -> PairSet {
    let mut out = PairSet::empty(d.n_syms);
    for c in 0..d.n_syms as u32 {
        if d.next(s, c) != DEAD {
            out.insert(c);
        }
    }
    out
}
