//! Continuation-class lexicons.
//!
//! ```text
//! LEXICON Root
//! [ROOT=ev]:ev^ NOUN ;     gloss:form continuation
//! bak^ VERB ;              the form doubles as gloss
//! +PLU:-lAr POSS ;
//! NEXT ;                   empty entry: continue without consuming
//! +X: # ;                  glossed entry with an empty form
//! ```
//!
//! `#` as a continuation ends the word. `!` starts a comment. The entry
//! point is the sublexicon named `Root`, or the first one if none is.

use std::collections::BTreeSet;

use indexmap::IndexMap;
use thiserror::Error;

use crate::symbols::{Symbol, SymbolTable};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Continuation {
    /// Index into [`Lexicon::sublexicons`].
    Sub(u32),
    End,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LexEntry {
    pub gloss: String,
    pub form: Vec<Symbol>,
    pub continuation: Continuation,
    pub line: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LexiconError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: continuation `{name}` is not a sublexicon")]
    Link { line: usize, name: String },
    #[error("empty entries form a cycle through {0}")]
    EmptyCycle(String),
}

#[derive(Clone, Debug, Default)]
struct Node {
    children: Vec<(Symbol, u32)>,
    /// (sublexicon, entry) pairs whose form ends here.
    ends: Vec<(u32, u32)>,
}

/// A traversal state: a node of one sublexicon's trie.
pub type LexState = u32;

#[derive(Clone, Debug)]
pub struct Lexicon {
    pub sublexicons: IndexMap<String, Vec<LexEntry>>,
    pub roots: Vec<String>,
    nodes: Vec<Node>,
    sub_roots: Vec<u32>,
}

fn strip_comment(line: &str) -> &str {
    let b = line.as_bytes();
    let mut i = 0;
    while i < b.len() {
        match b[i] {
            b'%' => i += 2,
            b'!' => return &line[..i],
            _ => i += 1,
        }
    }
    line
}

/// Splits `gloss:form` at the first unescaped colon.
fn split_gloss(token: &str) -> (Option<&str>, &str) {
    let b = token.as_bytes();
    let mut i = 0;
    while i < b.len() {
        match b[i] {
            b'%' => i += 2,
            b':' => return (Some(&token[..i]), &token[i + 1..]),
            _ => i += 1,
        }
    }
    (None, token)
}

fn unescape_gloss(s: &str) -> String {
    crate::symbols::unescape(s)
}

/// Parses one or more concatenated lexicon files.
pub fn parse_lexicon_file(text: &str, symbols: &mut SymbolTable) -> Result<Lexicon, LexiconError> {
    let mut raw: IndexMap<String, Vec<(usize, String, Vec<Symbol>, String)>> = IndexMap::new();
    let mut current: Option<String> = None;
    let mut pending = String::new();
    let mut pending_line = 0;
    for (n, line) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = strip_comment(line);
        let trimmed = line.trim();
        if let Some(rest) = trimmed.strip_prefix("LEXICON") {
            if !pending.trim().is_empty() {
                return Err(LexiconError::Syntax {
                    line: pending_line,
                    message: "entry is missing its `;`".into(),
                });
            }
            let name = rest.trim();
            if name.is_empty() || name.contains(char::is_whitespace) {
                return Err(LexiconError::Syntax {
                    line: line_no,
                    message: "bad LEXICON header".into(),
                });
            }
            raw.entry(name.to_string()).or_default();
            current = Some(name.to_string());
            continue;
        }
        let mut chars = line.chars();
        while let Some(c) = chars.next() {
            if pending.trim().is_empty() && !c.is_whitespace() {
                pending_line = line_no;
            }
            match c {
                '%' => {
                    pending.push(c);
                    if let Some(nc) = chars.next() {
                        pending.push(nc);
                    }
                }
                ';' => {
                    let Some(sub) = &current else {
                        return Err(LexiconError::Syntax {
                            line: line_no,
                            message: "entry outside any LEXICON".into(),
                        });
                    };
                    let toks: Vec<&str> = pending.split_whitespace().collect();
                    let (gloss, form, cont) = match toks.as_slice() {
                        [cont] => (String::new(), Vec::new(), cont.to_string()),
                        [entry, cont] => {
                            let (g, f) = split_gloss(entry);
                            let form = symbols.tokenize_interning(f);
                            let gloss = match g {
                                Some(g) => unescape_gloss(g),
                                None => unescape_gloss(f),
                            };
                            (gloss, form, cont.to_string())
                        }
                        _ => {
                            return Err(LexiconError::Syntax {
                                line: pending_line,
                                message: format!("cannot parse entry `{}`", pending.trim()),
                            })
                        }
                    };
                    raw[sub.as_str()].push((pending_line, gloss, form, cont));
                    pending.clear();
                }
                _ => pending.push(c),
            }
        }
        pending.push(' ');
    }
    if !pending.trim().is_empty() {
        return Err(LexiconError::Syntax {
            line: pending_line,
            message: "entry is missing its `;`".into(),
        });
    }
    let mut sublexicons = IndexMap::new();
    for (name, entries) in &raw {
        let mut out = Vec::new();
        for (line, gloss, form, cont) in entries {
            let continuation = if cont == "#" {
                Continuation::End
            } else {
                match raw.get_index_of(cont.as_str()) {
                    Some(i) => Continuation::Sub(i as u32),
                    None => {
                        return Err(LexiconError::Link {
                            line: *line,
                            name: cont.clone(),
                        })
                    }
                }
            };
            out.push(LexEntry {
                gloss: gloss.clone(),
                form: form.clone(),
                continuation,
                line: *line,
            });
        }
        sublexicons.insert(name.clone(), out);
    }
    let roots = if sublexicons.contains_key("Root") {
        vec!["Root".to_string()]
    } else {
        sublexicons.keys().take(1).cloned().collect()
    };
    Lexicon::build(sublexicons, roots)
}

impl Lexicon {
    pub fn build(
        sublexicons: IndexMap<String, Vec<LexEntry>>,
        roots: Vec<String>,
    ) -> Result<Lexicon, LexiconError> {
        let mut lex = Lexicon {
            sublexicons,
            roots,
            nodes: Vec::new(),
            sub_roots: Vec::new(),
        };
        for (si, (_, entries)) in lex.sublexicons.iter().enumerate() {
            let root = lex.nodes.len() as u32;
            lex.nodes.push(Node::default());
            lex.sub_roots.push(root);
            for (ei, e) in entries.iter().enumerate() {
                let mut cur = root;
                for &s in &e.form {
                    let found = lex.nodes[cur as usize]
                        .children
                        .iter()
                        .find(|c| c.0 == s)
                        .map(|c| c.1);
                    cur = match found {
                        Some(n) => n,
                        None => {
                            let n = lex.nodes.len() as u32;
                            lex.nodes.push(Node::default());
                            lex.nodes[cur as usize].children.push((s, n));
                            n
                        }
                    };
                }
                lex.nodes[cur as usize].ends.push((si as u32, ei as u32));
            }
        }
        for n in &mut lex.nodes {
            n.children.sort();
        }
        lex.check_empty_cycles()?;
        Ok(lex)
    }

    fn check_empty_cycles(&self) -> Result<(), LexiconError> {
        // 0 = unvisited, 1 = on stack, 2 = done
        let n = self.sublexicons.len();
        let mut color = vec![0u8; n];
        fn visit(lex: &Lexicon, s: usize, color: &mut [u8], path: &mut Vec<usize>) -> Result<(), usize> {
            color[s] = 1;
            path.push(s);
            for e in &lex.sublexicons[s] {
                if !e.form.is_empty() {
                    continue;
                }
                if let Continuation::Sub(t) = e.continuation {
                    let t = t as usize;
                    if color[t] == 1 {
                        return Err(t);
                    }
                    if color[t] == 0 {
                        visit(lex, t, color, path)?;
                    }
                }
            }
            path.pop();
            color[s] = 2;
            Ok(())
        }
        for s in 0..n {
            if color[s] == 0 {
                let mut path = Vec::new();
                if let Err(t) = visit(self, s, &mut color, &mut path) {
                    let names: Vec<&str> = path
                        .iter()
                        .skip_while(|p| **p != t)
                        .map(|p| self.sublexicons.get_index(*p).unwrap().0.as_str())
                        .collect();
                    return Err(LexiconError::EmptyCycle(names.join(" -> ")));
                }
            }
        }
        Ok(())
    }

    pub fn sub_index(&self, name: &str) -> Option<u32> {
        self.sublexicons.get_index_of(name).map(|i| i as u32)
    }

    pub fn sub_name(&self, i: u32) -> &str {
        self.sublexicons.get_index(i as usize).unwrap().0
    }

    pub fn entries(&self, sub: u32) -> &[LexEntry] {
        self.sublexicons.get_index(sub as usize).unwrap().1
    }

    pub fn entry(&self, sub: u32, idx: u32) -> &LexEntry {
        &self.entries(sub)[idx as usize]
    }

    /// The trie root of a sublexicon.
    pub fn sub_root(&self, sub: u32) -> LexState {
        self.sub_roots[sub as usize]
    }

    /// Entry-point states.
    pub fn start_states(&self) -> Vec<LexState> {
        self.roots
            .iter()
            .filter_map(|r| self.sub_index(r))
            .map(|i| self.sub_root(i))
            .collect()
    }

    pub fn children(&self, s: LexState) -> &[(Symbol, LexState)] {
        &self.nodes[s as usize].children
    }

    /// Entries whose form ends at this node, as (sublexicon, entry).
    pub fn ends(&self, s: LexState) -> &[(u32, u32)] {
        &self.nodes[s as usize].ends
    }

    /// States equivalent to `s` once finished entries fan out into their
    /// continuations. `None` in the result marks word end.
    pub fn closure(&self, s: LexState) -> (Vec<LexState>, bool) {
        let mut seen = BTreeSet::new();
        let mut stack = vec![s];
        let mut accept = false;
        seen.insert(s);
        while let Some(n) = stack.pop() {
            for &(sub, idx) in self.ends(n) {
                match self.entry(sub, idx).continuation {
                    Continuation::End => accept = true,
                    Continuation::Sub(c) => {
                        let r = self.sub_root(c);
                        if seen.insert(r) {
                            stack.push(r);
                        }
                    }
                }
            }
        }
        (seen.into_iter().collect(), accept)
    }

    /// Successor states after reading one lexical symbol.
    pub fn walk(&self, s: LexState, sym: Symbol) -> Vec<LexState> {
        let (states, _) = self.closure(s);
        let mut out: Vec<LexState> = states
            .iter()
            .filter_map(|&n| {
                self.children(n)
                    .binary_search_by_key(&sym, |c| c.0)
                    .ok()
                    .map(|i| self.children(n)[i].1)
            })
            .collect();
        out.sort_unstable();
        out.dedup();
        out
    }

    /// True if the word may end at `s`.
    pub fn is_accepting(&self, s: LexState) -> bool {
        self.closure(s).1
    }

    /// True if the symbol string spells a complete path.
    pub fn accepts(&self, syms: &[Symbol]) -> bool {
        let mut cur: Vec<LexState> = self.start_states();
        for &s in syms {
            let mut next: Vec<LexState> = cur.iter().flat_map(|&n| self.walk(n, s)).collect();
            next.sort_unstable();
            next.dedup();
            if next.is_empty() {
                return false;
            }
            cur = next;
        }
        cur.iter().any(|&n| self.is_accepting(n))
    }

    /// Every path from an entry point to `#` using at most `max_morphemes`
    /// entries with a non-empty form, as (lexical string, gloss string).
    pub fn enumerate_paths(&self, symbols: &SymbolTable, max_morphemes: usize) -> Vec<(String, String)> {
        let mut out = BTreeSet::new();
        for r in &self.roots {
            if let Some(i) = self.sub_index(r) {
                self.paths_from(symbols, i, max_morphemes, String::new(), String::new(), &mut out);
            }
        }
        out.into_iter().collect()
    }

    fn paths_from(
        &self,
        symbols: &SymbolTable,
        sub: u32,
        budget: usize,
        lexical: String,
        gloss: String,
        out: &mut BTreeSet<(String, String)>,
    ) {
        for e in self.entries(sub) {
            let cost = usize::from(!e.form.is_empty());
            if cost > budget {
                continue;
            }
            let mut l = lexical.clone();
            for s in &e.form {
                l.push_str(symbols.name(*s));
            }
            let g = format!("{gloss}{}", e.gloss);
            match e.continuation {
                Continuation::End => {
                    out.insert((l, g));
                }
                Continuation::Sub(c) => self.paths_from(symbols, c, budget - cost, l, g, out),
            }
        }
    }

    /// Sublexicons not reachable from any entry point.
    pub fn unreachable(&self) -> Vec<String> {
        let mut seen = vec![false; self.sublexicons.len()];
        let mut stack: Vec<u32> = self.roots.iter().filter_map(|r| self.sub_index(r)).collect();
        for &s in &stack {
            seen[s as usize] = true;
        }
        while let Some(s) = stack.pop() {
            for e in self.entries(s) {
                if let Continuation::Sub(c) = e.continuation {
                    if !seen[c as usize] {
                        seen[c as usize] = true;
                        stack.push(c);
                    }
                }
            }
        }
        self.sublexicons
            .keys()
            .enumerate()
            .filter(|(i, _)| !seen[*i])
            .map(|(_, k)| k.clone())
            .collect()
    }

    /// Lexical strings of every path whose glosses are exactly `tokens`
    /// (empty-gloss entries are free). On failure returns the number of
    /// tokens placed by the best partial path.
    pub fn paths_for_glosses(
        &self,
        symbols: &SymbolTable,
        tokens: &[String],
    ) -> Result<Vec<String>, usize> {
        let mut out = BTreeSet::new();
        let mut best = 0;
        for r in &self.roots {
            if let Some(i) = self.sub_index(r) {
                self.gloss_search(symbols, i, tokens, 0, String::new(), &mut out, &mut best, 0);
            }
        }
        if out.is_empty() {
            Err(best)
        } else {
            Ok(out.into_iter().collect())
        }
    }

    #[allow(clippy::too_many_arguments)]
    fn gloss_search(
        &self,
        symbols: &SymbolTable,
        sub: u32,
        tokens: &[String],
        placed: usize,
        lexical: String,
        out: &mut BTreeSet<String>,
        best: &mut usize,
        depth: usize,
    ) {
        // Between two placed tokens a path takes at most one empty entry per
        // sublexicon, since empty cycles are rejected at build time.
        if depth > (tokens.len() + 1) * (self.sublexicons.len() + 1) {
            return;
        }
        for e in self.entries(sub) {
            let next = if e.gloss.is_empty() {
                placed
            } else if let Some(k) = gloss_span(&e.gloss, &tokens[placed..]) {
                placed + k
            } else {
                continue;
            };
            *best = (*best).max(next);
            let mut l = lexical.clone();
            for s in &e.form {
                l.push_str(symbols.name(*s));
            }
            match e.continuation {
                Continuation::End => {
                    if next == tokens.len() {
                        out.insert(l);
                    }
                }
                Continuation::Sub(c) => {
                    self.gloss_search(symbols, c, tokens, next, l, out, best, depth + 1)
                }
            }
        }
    }
}

/// Number of leading tokens whose concatenation is `gloss`.
fn gloss_span(gloss: &str, tokens: &[String]) -> Option<usize> {
    let mut rest = gloss;
    for (k, t) in tokens.iter().enumerate() {
        rest = rest.strip_prefix(t.as_str())?;
        if rest.is_empty() {
            return Some(k + 1);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;

    const FRAG: &str = "
LEXICON Root
[ROOT=ev]:ev^ N ;
[ROOT=gök]:göK^ N ;
[ROOT=hukuk]:hu^kuq N ;
LEXICON N
# ;
+PLU:-lAr P ;
P ;
LEXICON P
+POSS1s:-(H)m # ;
# ;
LEXICON Empty
";

    #[test]
    fn parses_fragment() {
        let mut t = SymbolTable::new();
        let lex = parse_lexicon_file(FRAG, &mut t).unwrap();
        let root = lex.entries(lex.sub_index("Root").unwrap());
        assert_eq!(root[1].gloss, "[ROOT=gök]");
        assert!(root[1].form.contains(&t.get("K").unwrap()));
        assert_eq!(*root[2].form.last().unwrap(), t.get("q").unwrap());
        assert!(lex.entries(lex.sub_index("Empty").unwrap()).is_empty());
        assert_eq!(lex.unreachable(), vec!["Empty".to_string()]);
    }

    #[test]
    fn dangling_continuation() {
        let mut t = SymbolTable::new();
        let err = parse_lexicon_file("LEXICON Root\nev X ;\n", &mut t).unwrap_err();
        assert_eq!(err, LexiconError::Link { line: 2, name: "X".into() });
    }

    #[test]
    fn empty_cycle_is_rejected() {
        let mut t = SymbolTable::new();
        let err = parse_lexicon_file("LEXICON Root\nA ;\nLEXICON A\nRoot ;\n", &mut t).unwrap_err();
        assert!(matches!(err, LexiconError::EmptyCycle(_)));
    }

    #[test]
    fn walk_and_paths() {
        let mut t = SymbolTable::new();
        let lex = parse_lexicon_file(FRAG, &mut t).unwrap();
        let mut states = lex.start_states();
        for c in ["e", "v", "^"] {
            let s = t.get(c).unwrap();
            states = states.iter().flat_map(|&n| lex.walk(n, s)).collect();
        }
        assert_eq!(states.len(), 1);
        assert!(lex.is_accepting(states[0]));
        let dash = t.get("-").unwrap();
        assert!(!lex.walk(states[0], dash).is_empty());
        let paths = lex.enumerate_paths(&t, 1);
        assert_eq!(paths.len(), 3);
        let paths = lex.enumerate_paths(&t, 3);
        assert!(paths.contains(&("ev^-lAr-(H)m".into(), "[ROOT=ev]+PLU+POSS1s".into())));
        assert!(lex.accepts(&t.tokenize("ev^-(H)m").unwrap()));
        assert!(!lex.accepts(&t.tokenize("ev^-(H)m-lAr").unwrap()));
        let toks = vec!["[ROOT=ev]".to_string(), "+POSS1s".to_string(), "+PLU".to_string()];
        assert_eq!(lex.paths_for_glosses(&t, &toks), Err(2));
    }
}
