//! Regular expressions over feasible pairs.
//!
//! Syntax (whitespace separates atoms; `!` comments are stripped earlier):
//!
//! | form       | meaning                                              |
//! |------------|------------------------------------------------------|
//! | `x:y`      | the pair (x, y); either side may be a set name       |
//! | `x:`       | every feasible pair whose lexical side is in x       |
//! | `:y`       | every feasible pair whose surface side is in y       |
//! | `x`        | the identity pair (x, x), or a macro, or for a set S |
//! |            | every feasible (a, b) with a and b both in S         |
//! | `A B`      | concatenation                                        |
//! | `A \| B`   | union                                                |
//! | `A - B`    | difference                                           |
//! | `(A)`      | optional                                             |
//! | `[A]`      | grouping (`{A}` is the same)                         |
//! | `A*` `A+`  | closures                                             |
//! | `\A`       | any single feasible pair not in A (A single-pair)    |
//!
//! Precedence from loosest to tightest: union, difference, concatenation,
//! closure. `%x` is the literal character x.

pub mod dfa;

use std::collections::{HashMap, HashSet};
use std::fmt;

use thiserror::Error;

use crate::symbols::{Declarations, PairAlphabet, Symbol};
pub use dfa::{
    dfa_complement, dfa_equivalent, dfa_minimize, dfa_product, AlphabetError, PairDfa,
    ProductMode, DEAD,
};

/// One side of an atom.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Pattern {
    Any,
    Name(String),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PairRegex {
    /// `x:y`, `x:` or `:y`.
    Atom { lexical: Pattern, surface: Pattern },
    /// A bare symbol or set name.
    Bare(String),
    MacroRef(String),
    Boundary,
    /// The empty string, written `[ ]`.
    Empty,
    Concat(Vec<PairRegex>),
    Union(Vec<PairRegex>),
    Optional(Box<PairRegex>),
    Star(Box<PairRegex>),
    Plus(Box<PairRegex>),
    Group(Box<PairRegex>),
    Difference(Box<PairRegex>, Box<PairRegex>),
    NotPair(Box<PairRegex>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum NameKind {
    Symbol,
    Set,
    Macro,
    Variable,
    Unknown,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RegexError {
    #[error("parse error at {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error("unknown name `{0}`")]
    UnknownName(String),
    #[error("`{0}` denotes no feasible pair")]
    EmptyAtom(String),
    #[error("`\\` needs a single-pair operand, got `{0}`")]
    NotPairOperand(String),
    #[error("macro `{0}` refers to itself")]
    RecursiveMacro(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Atom(Option<String>, bool, Option<String>),
    Bar,
    LParen,
    RParen,
    LBrack,
    RBrack,
    LBrace,
    RBrace,
    Star,
    Plus,
    Minus,
    Backslash,
}

fn is_special(c: char) -> bool {
    c.is_whitespace() || "|()[]{}*+-\\;:_!\"=".contains(c)
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, RegexError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    let read_name = |i: &mut usize| -> Option<String> {
        let mut s = String::new();
        while *i < chars.len() {
            let c = chars[*i];
            if c == '%' {
                if *i + 1 < chars.len() {
                    s.push(chars[*i + 1]);
                    *i += 2;
                } else {
                    s.push('%');
                    *i += 1;
                }
            } else if is_special(c) {
                break;
            } else {
                s.push(c);
                *i += 1;
            }
        }
        (!s.is_empty()).then_some(s)
    };
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        let tok = match c {
            c if c.is_whitespace() => {
                i += 1;
                continue;
            }
            '|' => Tok::Bar,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            '[' => Tok::LBrack,
            ']' => Tok::RBrack,
            '{' => Tok::LBrace,
            '}' => Tok::RBrace,
            '*' => Tok::Star,
            '+' => Tok::Plus,
            '-' => Tok::Minus,
            '\\' => Tok::Backslash,
            ':' => {
                i += 1;
                let surf = read_name(&mut i);
                out.push((start, Tok::Atom(None, true, surf)));
                continue;
            }
            _ if !is_special(c) => {
                let lexn = read_name(&mut i);
                if i < chars.len() && chars[i] == ':' {
                    i += 1;
                    let surf = read_name(&mut i);
                    out.push((start, Tok::Atom(lexn, true, surf)));
                } else {
                    out.push((start, Tok::Atom(lexn, false, None)));
                }
                continue;
            }
            _ => {
                return Err(RegexError::Parse {
                    pos: i,
                    message: format!("unexpected `{c}`"),
                })
            }
        };
        out.push((start, tok));
        i += 1;
    }
    Ok(out)
}

struct Parser<'a> {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    end: usize,
    kind: &'a dyn Fn(&str) -> NameKind,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|t| &t.1)
    }

    fn here(&self) -> usize {
        self.toks.get(self.pos).map(|t| t.0).unwrap_or(self.end)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, RegexError> {
        Err(RegexError::Parse {
            pos: self.here(),
            message: message.into(),
        })
    }

    fn union(&mut self) -> Result<PairRegex, RegexError> {
        let mut alts = vec![self.diff()?];
        while self.peek() == Some(&Tok::Bar) {
            self.pos += 1;
            alts.push(self.diff()?);
        }
        Ok(if alts.len() == 1 {
            alts.pop().unwrap()
        } else {
            PairRegex::Union(alts)
        })
    }

    fn diff(&mut self) -> Result<PairRegex, RegexError> {
        let mut left = self.concat()?;
        while self.peek() == Some(&Tok::Minus) {
            self.pos += 1;
            let right = self.concat()?;
            left = PairRegex::Difference(Box::new(left), Box::new(right));
        }
        Ok(left)
    }

    fn concat(&mut self) -> Result<PairRegex, RegexError> {
        let mut items = Vec::new();
        while let Some(t) = self.peek() {
            match t {
                Tok::Bar | Tok::Minus | Tok::RParen | Tok::RBrack | Tok::RBrace => break,
                _ => items.push(self.postfix()?),
            }
        }
        Ok(match items.len() {
            0 => PairRegex::Empty,
            1 => items.pop().unwrap(),
            _ => PairRegex::Concat(items),
        })
    }

    fn postfix(&mut self) -> Result<PairRegex, RegexError> {
        let mut e = self.primary()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => e = PairRegex::Star(Box::new(e)),
                Some(Tok::Plus) => e = PairRegex::Plus(Box::new(e)),
                _ => break,
            }
            self.pos += 1;
        }
        Ok(e)
    }

    fn closing(&mut self, want: Tok) -> Result<(), RegexError> {
        if self.peek() == Some(&want) {
            self.pos += 1;
            Ok(())
        } else {
            self.err(format!("expected {want:?}"))
        }
    }

    fn side(&self, name: Option<String>) -> Result<Pattern, RegexError> {
        match name {
            None => Ok(Pattern::Any),
            Some(n) => match (self.kind)(&n) {
                NameKind::Symbol | NameKind::Set | NameKind::Variable => Ok(Pattern::Name(n)),
                NameKind::Macro => self.err(format!("macro `{n}` used as a pair side")),
                NameKind::Unknown => Err(RegexError::UnknownName(n)),
            },
        }
    }

    fn primary(&mut self) -> Result<PairRegex, RegexError> {
        let Some(t) = self.peek().cloned() else {
            return self.err("unexpected end of expression");
        };
        self.pos += 1;
        match t {
            Tok::LParen => {
                let e = self.union()?;
                self.closing(Tok::RParen)?;
                Ok(PairRegex::Optional(Box::new(e)))
            }
            Tok::LBrack => {
                let e = self.union()?;
                self.closing(Tok::RBrack)?;
                Ok(PairRegex::Group(Box::new(e)))
            }
            Tok::LBrace => {
                let e = self.union()?;
                self.closing(Tok::RBrace)?;
                Ok(PairRegex::Group(Box::new(e)))
            }
            Tok::Backslash => Ok(PairRegex::NotPair(Box::new(self.primary()?))),
            Tok::Atom(lexn, colon, surf) => {
                if !colon {
                    let n = lexn.expect("bare atom has a name");
                    if n == "#" {
                        return Ok(PairRegex::Boundary);
                    }
                    return match (self.kind)(&n) {
                        NameKind::Macro => Ok(PairRegex::MacroRef(n)),
                        NameKind::Symbol | NameKind::Set | NameKind::Variable => {
                            Ok(PairRegex::Bare(n))
                        }
                        NameKind::Unknown => Err(RegexError::UnknownName(n)),
                    };
                }
                if lexn.is_none() && surf.is_none() {
                    self.pos -= 1;
                    return self.err("`:` needs at least one side");
                }
                Ok(PairRegex::Atom {
                    lexical: self.side(lexn)?,
                    surface: self.side(surf)?,
                })
            }
            other => {
                self.pos -= 1;
                self.err(format!("unexpected {other:?}"))
            }
        }
    }
}

/// Parses a pair regular expression. `kind` classifies every name; names it
/// reports as unknown are errors.
pub fn parse_pair_regex(
    text: &str,
    kind: &dyn Fn(&str) -> NameKind,
) -> Result<PairRegex, RegexError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        end: text.chars().count(),
        kind,
    };
    let e = p.union()?;
    if p.pos != p.toks.len() {
        return p.err("unbalanced or stray token");
    }
    Ok(e)
}

impl PairRegex {
    /// Renames every occurrence of a name (in atoms and bare references).
    pub fn substitute(&self, map: &HashMap<String, String>) -> PairRegex {
        let sub_name = |n: &String| map.get(n).cloned().unwrap_or_else(|| n.clone());
        let sub_pat = |p: &Pattern| match p {
            Pattern::Any => Pattern::Any,
            Pattern::Name(n) => Pattern::Name(sub_name(n)),
        };
        let b = |e: &PairRegex| Box::new(e.substitute(map));
        match self {
            PairRegex::Atom { lexical, surface } => PairRegex::Atom {
                lexical: sub_pat(lexical),
                surface: sub_pat(surface),
            },
            PairRegex::Bare(n) => PairRegex::Bare(sub_name(n)),
            PairRegex::MacroRef(n) => PairRegex::MacroRef(n.clone()),
            PairRegex::Boundary => PairRegex::Boundary,
            PairRegex::Empty => PairRegex::Empty,
            PairRegex::Concat(v) => PairRegex::Concat(v.iter().map(|e| e.substitute(map)).collect()),
            PairRegex::Union(v) => PairRegex::Union(v.iter().map(|e| e.substitute(map)).collect()),
            PairRegex::Optional(e) => PairRegex::Optional(b(e)),
            PairRegex::Star(e) => PairRegex::Star(b(e)),
            PairRegex::Plus(e) => PairRegex::Plus(b(e)),
            PairRegex::Group(e) => PairRegex::Group(b(e)),
            PairRegex::Difference(x, y) => PairRegex::Difference(b(x), b(y)),
            PairRegex::NotPair(e) => PairRegex::NotPair(b(e)),
        }
    }

    /// Every name mentioned in atoms or bare references.
    pub fn names(&self, out: &mut Vec<String>) {
        match self {
            PairRegex::Atom { lexical, surface } => {
                for p in [lexical, surface] {
                    if let Pattern::Name(n) = p {
                        out.push(n.clone());
                    }
                }
            }
            PairRegex::Bare(n) | PairRegex::MacroRef(n) => out.push(n.clone()),
            PairRegex::Boundary | PairRegex::Empty => {}
            PairRegex::Concat(v) | PairRegex::Union(v) => v.iter().for_each(|e| e.names(out)),
            PairRegex::Optional(e)
            | PairRegex::Star(e)
            | PairRegex::Plus(e)
            | PairRegex::Group(e)
            | PairRegex::NotPair(e) => e.names(out),
            PairRegex::Difference(x, y) => {
                x.names(out);
                y.names(out);
            }
        }
    }
}

fn write_name(f: &mut fmt::Formatter<'_>, n: &str) -> fmt::Result {
    for c in n.chars() {
        if is_special(c) || c == '%' {
            write!(f, "%")?;
        }
        write!(f, "{c}")?;
    }
    Ok(())
}

impl fmt::Display for PairRegex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PairRegex::Atom { lexical, surface } => {
                if let Pattern::Name(n) = lexical {
                    write_name(f, n)?;
                }
                write!(f, ":")?;
                if let Pattern::Name(n) = surface {
                    write_name(f, n)?;
                }
                Ok(())
            }
            PairRegex::Bare(n) | PairRegex::MacroRef(n) => write_name(f, n),
            PairRegex::Boundary => write!(f, "#"),
            PairRegex::Empty => write!(f, "[ ]"),
            PairRegex::Concat(v) => {
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " ")?;
                    }
                    match e {
                        PairRegex::Union(_) | PairRegex::Difference(..) => write!(f, "[{e}]")?,
                        _ => write!(f, "{e}")?,
                    }
                }
                Ok(())
            }
            PairRegex::Union(v) => {
                for (i, e) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, " | ")?;
                    }
                    write!(f, "{e}")?;
                }
                Ok(())
            }
            PairRegex::Optional(e) => write!(f, "({e})"),
            PairRegex::Star(e) => write_closure(f, e, '*'),
            PairRegex::Plus(e) => write_closure(f, e, '+'),
            PairRegex::Group(e) => write!(f, "[{e}]"),
            PairRegex::Difference(x, y) => {
                match **y {
                    PairRegex::Difference(..) | PairRegex::Union(_) => write!(f, "{x} - [{y}]"),
                    _ => write!(f, "{x} - {y}"),
                }
            }
            PairRegex::NotPair(e) => match **e {
                PairRegex::Atom { .. }
                | PairRegex::Bare(_)
                | PairRegex::MacroRef(_)
                | PairRegex::Group(_)
                | PairRegex::Boundary => write!(f, "\\{e}"),
                _ => write!(f, "\\[{e}]"),
            },
        }
    }
}

fn write_closure(f: &mut fmt::Formatter<'_>, e: &PairRegex, op: char) -> fmt::Result {
    match e {
        PairRegex::Atom { .. }
        | PairRegex::Bare(_)
        | PairRegex::MacroRef(_)
        | PairRegex::Group(_)
        | PairRegex::Optional(_)
        | PairRegex::Boundary => write!(f, "{e}{op}"),
        _ => write!(f, "[{e}]{op}"),
    }
}

/// A set of pair indices over an alphabet of `n` symbols.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PairSet {
    words: Vec<u64>,
    n: usize,
}

impl PairSet {
    pub fn empty(n: usize) -> Self {
        PairSet {
            words: vec![0; n.div_ceil(64)],
            n,
        }
    }

    pub fn full(n: usize) -> Self {
        let mut s = Self::empty(n);
        for i in 0..n {
            s.insert(i as u32);
        }
        s
    }

    pub fn universe(&self) -> usize {
        self.n
    }

    pub fn insert(&mut self, i: u32) {
        self.words[(i / 64) as usize] |= 1 << (i % 64);
    }

    pub fn contains(&self, i: u32) -> bool {
        (i as usize) < self.n && self.words[(i / 64) as usize] & (1 << (i % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|w| *w == 0)
    }

    pub fn len(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn union_with(&mut self, o: &PairSet) {
        for (a, b) in self.words.iter_mut().zip(&o.words) {
            *a |= *b;
        }
    }

    pub fn minus(&self, o: &PairSet) -> PairSet {
        let mut r = self.clone();
        for (a, b) in r.words.iter_mut().zip(&o.words) {
            *a &= !*b;
        }
        r
    }

    pub fn complement(&self) -> PairSet {
        PairSet::full(self.n).minus(self)
    }

    pub fn iter(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.n as u32).filter(move |i| self.contains(*i))
    }
}

/// A pair regex with every name resolved to a set of alphabet indices.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum PairExpr {
    Set(PairSet),
    Epsilon,
    Concat(Vec<PairExpr>),
    Union(Vec<PairExpr>),
    Star(Box<PairExpr>),
    Diff(Box<PairExpr>, Box<PairExpr>),
    /// A position marker outside the pair alphabet, used by the rule
    /// compiler. Its symbol index is the alphabet size.
    Marker,
}

impl PairExpr {
    pub fn concat(items: Vec<PairExpr>) -> PairExpr {
        let mut flat = Vec::new();
        for e in items {
            match e {
                PairExpr::Epsilon => {}
                PairExpr::Concat(v) => flat.extend(v),
                e => flat.push(e),
            }
        }
        match flat.len() {
            0 => PairExpr::Epsilon,
            1 => flat.pop().unwrap(),
            _ => PairExpr::Concat(flat),
        }
    }

    pub fn union(items: Vec<PairExpr>) -> PairExpr {
        let mut sets: Option<PairSet> = None;
        let mut rest = Vec::new();
        for e in items {
            match e {
                PairExpr::Set(s) => match &mut sets {
                    Some(acc) => acc.union_with(&s),
                    None => sets = Some(s),
                },
                PairExpr::Union(v) => rest.extend(v),
                e => rest.push(e),
            }
        }
        if let Some(s) = sets {
            rest.insert(0, PairExpr::Set(s));
        }
        match rest.len() {
            1 => rest.pop().unwrap(),
            _ => PairExpr::Union(rest),
        }
    }

    pub fn optional(e: PairExpr) -> PairExpr {
        PairExpr::union(vec![e, PairExpr::Epsilon])
    }

    pub fn star(e: PairExpr) -> PairExpr {
        PairExpr::Star(Box::new(e))
    }

    /// Σ* for an alphabet of `n` pairs.
    pub fn any_string(n: usize) -> PairExpr {
        PairExpr::star(PairExpr::Set(PairSet::full(n)))
    }

    /// Re-indexes every set through `map` (old index -> new index) into an
    /// alphabet of size `m`. Unmapped pairs are dropped.
    pub fn project(&self, map: &[Option<u32>], m: usize) -> PairExpr {
        match self {
            PairExpr::Set(s) => {
                let mut r = PairSet::empty(m);
                for i in s.iter() {
                    if let Some(j) = map[i as usize] {
                        r.insert(j);
                    }
                }
                PairExpr::Set(r)
            }
            PairExpr::Epsilon => PairExpr::Epsilon,
            PairExpr::Marker => PairExpr::Marker,
            PairExpr::Concat(v) => PairExpr::Concat(v.iter().map(|e| e.project(map, m)).collect()),
            PairExpr::Union(v) => PairExpr::Union(v.iter().map(|e| e.project(map, m)).collect()),
            PairExpr::Star(e) => PairExpr::Star(Box::new(e.project(map, m))),
            PairExpr::Diff(a, b) => {
                PairExpr::Diff(Box::new(a.project(map, m)), Box::new(b.project(map, m)))
            }
        }
    }

    /// End positions `e` such that `s[start..e]` is in the language. This is
    /// the direct backtracking-free reference matcher.
    pub fn ends(&self, s: &[u32], start: usize) -> Vec<bool> {
        let mut out = vec![false; s.len() + 1];
        self.ends_into(s, start, &mut out);
        out
    }

    fn ends_into(&self, s: &[u32], start: usize, out: &mut [bool]) {
        match self {
            PairExpr::Set(set) => {
                if start < s.len() && set.contains(s[start]) {
                    out[start + 1] = true;
                }
            }
            PairExpr::Marker => {}
            PairExpr::Epsilon => out[start] = true,
            PairExpr::Concat(v) => {
                let mut cur = vec![false; s.len() + 1];
                cur[start] = true;
                for e in v {
                    let mut next = vec![false; s.len() + 1];
                    for (p, on) in cur.iter().enumerate() {
                        if *on {
                            e.ends_into(s, p, &mut next);
                        }
                    }
                    cur = next;
                }
                for (o, c) in out.iter_mut().zip(cur) {
                    *o |= c;
                }
            }
            PairExpr::Union(v) => {
                for e in v {
                    e.ends_into(s, start, out);
                }
            }
            PairExpr::Star(e) => {
                let mut reach = vec![false; s.len() + 1];
                reach[start] = true;
                let mut stack = vec![start];
                while let Some(p) = stack.pop() {
                    let mut next = vec![false; s.len() + 1];
                    e.ends_into(s, p, &mut next);
                    for (q, on) in next.into_iter().enumerate() {
                        if on && !reach[q] {
                            reach[q] = true;
                            stack.push(q);
                        }
                    }
                }
                for (o, c) in out.iter_mut().zip(reach) {
                    *o |= c;
                }
            }
            PairExpr::Diff(a, b) => {
                let ea = a.ends(s, start);
                let eb = b.ends(s, start);
                for (i, o) in out.iter_mut().enumerate() {
                    *o |= ea[i] && !eb[i];
                }
            }
        }
    }

    /// Whole-string membership by the reference matcher.
    pub fn matches(&self, s: &[u32]) -> bool {
        self.ends(s, 0)[s.len()]
    }

    /// The pair set if this expression denotes only single-pair strings.
    pub fn as_single_pairs(&self) -> Option<PairSet> {
        match self {
            PairExpr::Set(s) => Some(s.clone()),
            PairExpr::Union(v) => {
                let mut acc: Option<PairSet> = None;
                for e in v {
                    let s = e.as_single_pairs()?;
                    match &mut acc {
                        Some(a) => a.union_with(&s),
                        None => acc = Some(s),
                    }
                }
                acc
            }
            PairExpr::Diff(a, b) => {
                let sa = a.as_single_pairs()?;
                let sb = b.as_single_pairs()?;
                Some(sa.minus(&sb))
            }
            _ => None,
        }
    }
}

/// Turns a [`PairRegex`] into a [`PairExpr`] against declarations and an
/// alphabet.
pub struct Resolver<'a> {
    pub decls: &'a Declarations,
    pub alphabet: &'a PairAlphabet,
    /// Reject atoms that denote no feasible pair.
    pub strict: bool,
}

impl<'a> Resolver<'a> {
    pub fn new(decls: &'a Declarations, alphabet: &'a PairAlphabet) -> Self {
        Resolver {
            decls,
            alphabet,
            strict: true,
        }
    }

    fn side(&self, p: &Pattern) -> Result<Option<HashSet<Symbol>>, RegexError> {
        match p {
            Pattern::Any => Ok(None),
            Pattern::Name(n) => self
                .decls
                .side_symbols(n)
                .map(|v| Some(v.into_iter().collect()))
                .ok_or_else(|| RegexError::UnknownName(n.clone())),
        }
    }

    fn select(&self, keep: impl Fn(Symbol, Symbol) -> bool) -> PairSet {
        let mut s = PairSet::empty(self.alphabet.len());
        for (i, p) in self.alphabet.pairs().iter().enumerate() {
            if keep(p.lexical, p.surface) {
                s.insert(i as u32);
            }
        }
        s
    }

    fn checked(&self, s: PairSet, what: &PairRegex) -> Result<PairExpr, RegexError> {
        if self.strict && s.is_empty() {
            return Err(RegexError::EmptyAtom(what.to_string()));
        }
        Ok(PairExpr::Set(s))
    }

    pub fn resolve(&self, re: &PairRegex) -> Result<PairExpr, RegexError> {
        let mut stack = Vec::new();
        self.resolve_in(re, &mut stack)
    }

    fn resolve_in(&self, re: &PairRegex, stack: &mut Vec<String>) -> Result<PairExpr, RegexError> {
        Ok(match re {
            PairRegex::Atom { lexical, surface } => {
                let l = self.side(lexical)?;
                let r = self.side(surface)?;
                let s = self.select(|a, b| {
                    l.as_ref().is_none_or(|l| l.contains(&a)) && r.as_ref().is_none_or(|r| r.contains(&b))
                });
                self.checked(s, re)?
            }
            PairRegex::Bare(n) => {
                if let Some(set) = self.decls.sets.get(n) {
                    let m: HashSet<Symbol> = set.members.iter().copied().collect();
                    let s = self.select(|a, b| m.contains(&a) && m.contains(&b));
                    self.checked(s, re)?
                } else {
                    let sym = self
                        .decls
                        .symbols
                        .get(n)
                        .ok_or_else(|| RegexError::UnknownName(n.clone()))?;
                    let s = self.select(|a, b| a == sym && b == sym);
                    self.checked(s, re)?
                }
            }
            PairRegex::Boundary => {
                let s = self.select(|a, b| a == Symbol::BOUNDARY && b == Symbol::BOUNDARY);
                self.checked(s, re)?
            }
            PairRegex::MacroRef(n) => {
                if stack.contains(n) {
                    return Err(RegexError::RecursiveMacro(n.clone()));
                }
                let body = self
                    .decls
                    .definitions
                    .get(n)
                    .ok_or_else(|| RegexError::UnknownName(n.clone()))?;
                stack.push(n.clone());
                let e = self.resolve_in(body, stack)?;
                stack.pop();
                e
            }
            PairRegex::Empty => PairExpr::Epsilon,
            PairRegex::Concat(v) => PairExpr::concat(
                v.iter()
                    .map(|e| self.resolve_in(e, stack))
                    .collect::<Result<_, _>>()?,
            ),
            PairRegex::Union(v) => PairExpr::union(
                v.iter()
                    .map(|e| self.resolve_in(e, stack))
                    .collect::<Result<_, _>>()?,
            ),
            PairRegex::Optional(e) => PairExpr::optional(self.resolve_in(e, stack)?),
            PairRegex::Star(e) => PairExpr::star(self.resolve_in(e, stack)?),
            PairRegex::Plus(e) => {
                let x = self.resolve_in(e, stack)?;
                PairExpr::concat(vec![x.clone(), PairExpr::star(x)])
            }
            PairRegex::Group(e) => self.resolve_in(e, stack)?,
            PairRegex::Difference(a, b) => {
                let x = self.resolve_in(a, stack)?;
                let y = self.resolve_in(b, stack)?;
                match (&x, &y) {
                    (PairExpr::Set(sx), PairExpr::Set(sy)) => PairExpr::Set(sx.minus(sy)),
                    _ => PairExpr::Diff(Box::new(x), Box::new(y)),
                }
            }
            PairRegex::NotPair(e) => {
                let x = self.resolve_in(e, stack)?;
                match x.as_single_pairs() {
                    Some(s) => PairExpr::Set(s.complement()),
                    None => return Err(RegexError::NotPairOperand(e.to_string())),
                }
            }
        })
    }
}

/// Parses nothing; resolves and compiles an already parsed regex.
pub fn compile_regex(
    re: &PairRegex,
    decls: &Declarations,
    alphabet: &PairAlphabet,
) -> Result<PairDfa, RegexError> {
    let e = Resolver::new(decls, alphabet).resolve(re)?;
    Ok(dfa::compile_expr(&e, alphabet.len(), alphabet.fingerprint()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::parse_declarations;

    fn kinds(n: &str) -> NameKind {
        match n {
            "MB" => NameKind::Macro,
            "V" | "Cs" => NameKind::Set,
            _ => NameKind::Symbol,
        }
    }

    #[test]
    fn parses_atoms_and_operators() {
        let e = parse_pair_regex(":V", &kinds).unwrap();
        assert_eq!(
            e,
            PairRegex::Atom {
                lexical: Pattern::Any,
                surface: Pattern::Name("V".into())
            }
        );
        let e = parse_pair_regex("a", &kinds).unwrap();
        assert_eq!(e, PairRegex::Bare("a".into()));
        let e = parse_pair_regex("\\[V:]", &kinds).unwrap();
        assert!(matches!(e, PairRegex::NotPair(_)));
        let e = parse_pair_regex("y: MB", &kinds).unwrap();
        assert_eq!(
            e,
            PairRegex::Concat(vec![
                PairRegex::Atom {
                    lexical: Pattern::Name("y".into()),
                    surface: Pattern::Any
                },
                PairRegex::MacroRef("MB".into())
            ])
        );
        let e = parse_pair_regex(":r:k", &kinds).unwrap();
        assert!(matches!(e, PairRegex::Concat(ref v) if v.len() == 2));
    }

    #[test]
    fn difference_binds_looser_than_concatenation() {
        let e = parse_pair_regex("a b - c | d", &kinds).unwrap();
        let PairRegex::Union(alts) = e else { panic!() };
        assert!(matches!(&alts[0], PairRegex::Difference(l, _) if matches!(**l, PairRegex::Concat(_))));
    }

    #[test]
    fn parse_errors() {
        assert!(matches!(parse_pair_regex("[a", &kinds), Err(RegexError::Parse { .. })));
        assert!(matches!(parse_pair_regex("a)", &kinds), Err(RegexError::Parse { .. })));
        let unknown = |_: &str| NameKind::Unknown;
        assert!(matches!(parse_pair_regex("zz", &unknown), Err(RegexError::UnknownName(_))));
    }

    #[test]
    fn display_round_trips() {
        for t in ["[:Cs* (V:0) :Cs* (a) (:0)*]*", "\\[V:] a", "a - [b | c]", "(:0 - MB)*"] {
            let e = parse_pair_regex(t, &kinds).unwrap();
            let again = parse_pair_regex(&e.to_string(), &kinds).unwrap();
            assert_eq!(e, again, "{t}");
        }
    }

    #[test]
    fn resolution_of_atoms() {
        let d = parse_declarations("ALPHABET\n a b A:a A:b %-:0 ;\nSETS\nV = a b ;\nDEFINITIONS\nMB = %-:0 ;\n").unwrap();
        let alpha = PairAlphabet::new(d.declared_pairs.iter().copied());
        let r = Resolver::new(&d, &alpha);
        let k = |n: &str| d.name_kind(n);
        let count = |t: &str| match r.resolve(&parse_pair_regex(t, &k).unwrap()).unwrap() {
            PairExpr::Set(s) => s.len(),
            _ => usize::MAX,
        };
        assert_eq!(count("A:"), 2);
        assert_eq!(count(":a"), 2);
        assert_eq!(count("V"), 2);
        assert_eq!(count("MB"), 1);
        assert_eq!(count("\\A:"), 3);
        assert!(matches!(
            r.resolve(&parse_pair_regex("b:a", &k).unwrap()),
            Err(RegexError::EmptyAtom(_))
        ));
        assert!(matches!(
            r.resolve(&parse_pair_regex("\\[a b]", &k).unwrap()),
            Err(RegexError::NotPairOperand(_))
        ));
    }
}
