//! Symbol interning, alphabet and set declarations, and the feasible-pair
//! alphabet shared by every automaton.

use std::collections::hash_map::DefaultHasher;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::hash::{Hash, Hasher};

use indexmap::IndexMap;
use thiserror::Error;

use crate::pair_regex::{parse_pair_regex, NameKind, PairRegex, RegexError};

/// An interned symbol. Ids are dense and assigned in interning order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Symbol(pub u32);

impl Symbol {
    /// The NULL symbol `0`.
    pub const NULL: Symbol = Symbol(0);
    /// The word boundary `#`.
    pub const BOUNDARY: Symbol = Symbol(1);
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymbolError {
    #[error("invalid symbol: empty name")]
    InvalidSymbol,
}

/// Injective name <-> id table. `0` and `#` are always present.
#[derive(Clone, Debug)]
pub struct SymbolTable {
    names: Vec<String>,
    index: HashMap<String, Symbol>,
}

impl Default for SymbolTable {
    fn default() -> Self {
        Self::new()
    }
}

impl SymbolTable {
    pub fn new() -> Self {
        let mut t = SymbolTable {
            names: Vec::new(),
            index: HashMap::new(),
        };
        t.intern_raw("0");
        t.intern_raw("#");
        t
    }

    fn intern_raw(&mut self, name: &str) -> Symbol {
        if let Some(&s) = self.index.get(name) {
            return s;
        }
        let s = Symbol(self.names.len() as u32);
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), s);
        s
    }

    /// Interns a token, resolving `%x` escapes first.
    pub fn intern(&mut self, token: &str) -> Result<Symbol, SymbolError> {
        let name = unescape(token);
        if name.is_empty() {
            return Err(SymbolError::InvalidSymbol);
        }
        Ok(self.intern_raw(&name))
    }

    /// Looks up an already unescaped name.
    pub fn get(&self, name: &str) -> Option<Symbol> {
        self.index.get(name).copied()
    }

    pub fn name(&self, s: Symbol) -> &str {
        &self.names[s.0 as usize]
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Splits text into one symbol per character (honouring `%` escapes).
    /// Returns `None` if some character is not a known symbol.
    pub fn tokenize(&self, text: &str) -> Option<Vec<Symbol>> {
        let mut out = Vec::new();
        let mut chars = text.chars();
        while let Some(c) = chars.next() {
            let c = if c == '%' { chars.next().unwrap_or('%') } else { c };
            let mut buf = [0u8; 4];
            out.push(self.get(c.encode_utf8(&mut buf))?);
        }
        Some(out)
    }

    /// Like [`tokenize`](Self::tokenize) but interns unseen characters.
    pub fn tokenize_interning(&mut self, text: &str) -> Vec<Symbol> {
        let mut out = Vec::new();
        let mut chars = text.chars();
        while let Some(c) = chars.next() {
            let c = if c == '%' { chars.next().unwrap_or('%') } else { c };
            let mut buf = [0u8; 4];
            out.push(self.intern_raw(c.encode_utf8(&mut buf)));
        }
        out
    }
}

/// Removes `%` escapes: `%x` denotes the literal `x`.
pub fn unescape(token: &str) -> String {
    let mut out = String::with_capacity(token.len());
    let mut chars = token.chars();
    while let Some(c) = chars.next() {
        if c == '%' {
            match chars.next() {
                Some(n) => out.push(n),
                None => out.push('%'),
            }
        } else {
            out.push(c);
        }
    }
    out
}

/// Splits `lex:surf` at the first unescaped colon. Sides keep their escapes.
pub fn split_pair_token(token: &str) -> (&str, Option<&str>) {
    let bytes = token.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'%' => i += 2,
            b':' => return (&token[..i], Some(&token[i + 1..])),
            _ => i += 1,
        }
    }
    (token, None)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FeasiblePair {
    pub lexical: Symbol,
    pub surface: Symbol,
}

impl FeasiblePair {
    pub fn new(lexical: Symbol, surface: Symbol) -> Self {
        FeasiblePair { lexical, surface }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymbolSet {
    pub name: String,
    pub members: Vec<Symbol>,
}

/// The set of feasible pairs, indexed densely. Automata use the index as
/// their input symbol.
#[derive(Clone, Debug)]
pub struct PairAlphabet {
    pairs: Vec<FeasiblePair>,
    index: HashMap<FeasiblePair, u32>,
    fingerprint: u64,
}

impl PairAlphabet {
    /// Builds an alphabet from pairs; duplicates are dropped and the order is
    /// normalised to (lexical id, surface id).
    pub fn new(pairs: impl IntoIterator<Item = FeasiblePair>) -> Self {
        let set: BTreeSet<FeasiblePair> = pairs.into_iter().collect();
        let pairs: Vec<FeasiblePair> = set.into_iter().collect();
        let index = pairs
            .iter()
            .enumerate()
            .map(|(i, p)| (*p, i as u32))
            .collect();
        let mut h = DefaultHasher::new();
        pairs.hash(&mut h);
        PairAlphabet {
            pairs,
            index,
            fingerprint: h.finish(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[FeasiblePair] {
        &self.pairs
    }

    pub fn pair(&self, i: u32) -> FeasiblePair {
        self.pairs[i as usize]
    }

    pub fn index_of(&self, p: FeasiblePair) -> Option<u32> {
        self.index.get(&p).copied()
    }

    pub fn contains(&self, p: FeasiblePair) -> bool {
        self.index.contains_key(&p)
    }

    pub fn fingerprint(&self) -> u64 {
        self.fingerprint
    }

    /// Index of the boundary pair `#:#`, if present.
    pub fn boundary(&self) -> Option<u32> {
        self.index_of(FeasiblePair::new(Symbol::BOUNDARY, Symbol::BOUNDARY))
    }

    pub fn display_pair(&self, table: &SymbolTable, i: u32) -> String {
        let p = self.pair(i);
        pair_name(table, p)
    }
}

pub fn pair_name(table: &SymbolTable, p: FeasiblePair) -> String {
    let l = table.name(p.lexical);
    let s = table.name(p.surface);
    if l == s {
        l.to_string()
    } else {
        format!("{l}:{s}")
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeclarationError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: duplicate name `{name}`")]
    Duplicate { line: usize, name: String },
    #[error("line {line}: undeclared symbol `{name}`")]
    Undeclared { line: usize, name: String },
    #[error("line {line}: {source}")]
    Regex { line: usize, source: RegexError },
}

/// Everything declared before the RULES section of a rules file.
#[derive(Clone, Debug, Default)]
pub struct Declarations {
    pub symbols: SymbolTable,
    /// Symbols named in the ALPHABET block, in order of first mention.
    pub alphabet: Vec<Symbol>,
    /// Identity pairs for bare tokens plus every explicit `x:y` token.
    pub declared_pairs: Vec<FeasiblePair>,
    pub sets: IndexMap<String, SymbolSet>,
    pub definitions: IndexMap<String, PairRegex>,
}

impl Declarations {
    /// Classifies a name for the regex parser.
    pub fn name_kind(&self, name: &str) -> NameKind {
        if self.definitions.contains_key(name) {
            NameKind::Macro
        } else if self.sets.contains_key(name) {
            NameKind::Set
        } else if self.symbols.get(name).is_some() {
            NameKind::Symbol
        } else {
            NameKind::Unknown
        }
    }

    /// The symbols a name stands for on one side of a pair: the members of
    /// a set, or the symbol itself.
    pub fn side_symbols(&self, name: &str) -> Option<Vec<Symbol>> {
        if let Some(set) = self.sets.get(name) {
            Some(set.members.clone())
        } else {
            self.symbols.get(name).map(|s| vec![s])
        }
    }
}

/// One `;`-terminated statement together with the line it starts on.
#[derive(Debug, Clone)]
pub(crate) struct Statement {
    pub line: usize,
    pub text: String,
}

/// Removes `!` comments, keeping escapes and quoted strings intact.
pub(crate) fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    let mut i = 0;
    let mut in_quote = false;
    while i < bytes.len() {
        match bytes[i] {
            b'%' if !in_quote => i += 2,
            b'"' => {
                in_quote = !in_quote;
                i += 1;
            }
            b'!' if !in_quote => return &line[..i],
            _ => i += 1,
        }
    }
    line
}

/// Splits the rules-file text into named sections of raw (comment-free)
/// lines. Lines before the first header are ignored if blank.
pub(crate) fn split_sections(text: &str) -> Vec<(String, Vec<(usize, String)>)> {
    let mut out: Vec<(String, Vec<(usize, String)>)> = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let line = strip_comment(raw);
        let trimmed = line.trim();
        if matches!(trimmed, "ALPHABET" | "SETS" | "DEFINITIONS" | "RULES") {
            out.push((trimmed.to_string(), Vec::new()));
            continue;
        }
        if let Some(last) = out.last_mut() {
            last.1.push((n + 1, line.to_string()));
        } else if !trimmed.is_empty() {
            out.push((String::new(), vec![(n + 1, line.to_string())]));
        }
    }
    out
}

/// Joins lines and splits at unescaped `;`.
pub(crate) fn statements(lines: &[(usize, String)]) -> Vec<Statement> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut start = None;
    for (n, line) in lines {
        let mut chars = line.chars().peekable();
        while let Some(c) = chars.next() {
            if start.is_none() && !c.is_whitespace() {
                start = Some(*n);
            }
            match c {
                '%' => {
                    cur.push(c);
                    if let Some(nc) = chars.next() {
                        cur.push(nc);
                    }
                }
                ';' => {
                    out.push(Statement {
                        line: start.unwrap_or(*n),
                        text: std::mem::take(&mut cur),
                    });
                    start = None;
                }
                _ => cur.push(c),
            }
        }
        cur.push('\n');
    }
    if !cur.trim().is_empty() {
        out.push(Statement {
            line: start.unwrap_or(0),
            text: cur,
        });
    }
    out
}

/// Parses the ALPHABET, SETS and DEFINITIONS sections. A RULES section, if
/// present, is ignored here.
pub fn parse_declarations(text: &str) -> Result<Declarations, DeclarationError> {
    let mut decls = Declarations::default();
    let sections = split_sections(text);
    for (name, lines) in &sections {
        match name.as_str() {
            "ALPHABET" => parse_alphabet(&mut decls, lines)?,
            "SETS" => parse_sets(&mut decls, lines)?,
            "DEFINITIONS" => parse_definitions(&mut decls, lines)?,
            "RULES" => {}
            _ => {
                if let Some((line, _)) = lines.first() {
                    return Err(DeclarationError::Syntax {
                        line: *line,
                        message: "text before the first section header".into(),
                    });
                }
            }
        }
    }
    Ok(decls)
}

fn intern_at(
    decls: &mut Declarations,
    token: &str,
    line: usize,
) -> Result<Symbol, DeclarationError> {
    decls
        .symbols
        .intern(token)
        .map_err(|e| DeclarationError::Syntax {
            line,
            message: format!("{e} in `{token}`"),
        })
}

fn parse_alphabet(
    decls: &mut Declarations,
    lines: &[(usize, String)],
) -> Result<(), DeclarationError> {
    let mut seen = BTreeSet::new();
    let mut declare = |decls: &mut Declarations, s: Symbol| {
        if seen.insert(s) {
            decls.alphabet.push(s);
        }
    };
    for st in statements(lines) {
        for token in st.text.split_whitespace() {
            match split_pair_token(token) {
                (lex, None) => {
                    let s = intern_at(decls, lex, st.line)?;
                    declare(decls, s);
                    decls.declared_pairs.push(FeasiblePair::new(s, s));
                }
                (lex, Some("")) => {
                    // `X:` declares a lexical symbol whose pairs come from rules.
                    let s = intern_at(decls, lex, st.line)?;
                    declare(decls, s);
                }
                (lex, Some(surf)) => {
                    let l = intern_at(decls, lex, st.line)?;
                    let r = intern_at(decls, surf, st.line)?;
                    declare(decls, l);
                    declare(decls, r);
                    decls.declared_pairs.push(FeasiblePair::new(l, r));
                }
            }
        }
    }
    Ok(())
}

fn parse_assignment(st: &Statement) -> Result<(String, String), DeclarationError> {
    let Some(eq) = st.text.find('=') else {
        return Err(DeclarationError::Syntax {
            line: st.line,
            message: format!("expected `Name = ...` in `{}`", st.text.trim()),
        });
    };
    let name = st.text[..eq].trim().to_string();
    if name.is_empty() || name.split_whitespace().count() != 1 {
        return Err(DeclarationError::Syntax {
            line: st.line,
            message: format!("bad declaration name `{name}`"),
        });
    }
    Ok((name, st.text[eq + 1..].to_string()))
}

fn parse_sets(
    decls: &mut Declarations,
    lines: &[(usize, String)],
) -> Result<(), DeclarationError> {
    for st in statements(lines) {
        if st.text.trim().is_empty() {
            continue;
        }
        let (name, body) = parse_assignment(&st)?;
        if decls.sets.contains_key(&name)
            || decls.symbols.get(&name).is_some()
            || decls.definitions.contains_key(&name)
        {
            return Err(DeclarationError::Duplicate {
                line: st.line,
                name,
            });
        }
        let mut members = Vec::new();
        for token in body.split_whitespace() {
            let n = unescape(token);
            let sym = decls
                .symbols
                .get(&n)
                .filter(|s| decls.alphabet.contains(s))
                .ok_or_else(|| DeclarationError::Undeclared {
                    line: st.line,
                    name: n.clone(),
                })?;
            if !members.contains(&sym) {
                members.push(sym);
            }
        }
        decls.sets.insert(name.clone(), SymbolSet { name, members });
    }
    Ok(())
}

fn parse_definitions(
    decls: &mut Declarations,
    lines: &[(usize, String)],
) -> Result<(), DeclarationError> {
    for st in statements(lines) {
        if st.text.trim().is_empty() {
            continue;
        }
        let (name, body) = parse_assignment(&st)?;
        if decls.sets.contains_key(&name)
            || decls.symbols.get(&name).is_some()
            || decls.definitions.contains_key(&name)
        {
            return Err(DeclarationError::Duplicate {
                line: st.line,
                name,
            });
        }
        let re = parse_pair_regex(&body, &|n| decls.name_kind(n))
            .map_err(|source| DeclarationError::Regex {
                line: st.line,
                source,
            })?;
        decls.definitions.insert(name, re);
    }
    Ok(())
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}
