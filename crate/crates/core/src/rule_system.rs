//! Two-level rules: parsing, where-clause expansion, the reference
//! interpreter, compilation to constraint automata, and parallel evaluation.
//!
//! A rule `CP op LC _ RC ; LC _ RC ; ...` is evaluated on a pair string
//! framed by `#:#` on both ends. Position `i` is licensed by context `j`
//! when the pairs before it end in `LCj` and the pairs after it start with
//! `RCj`. With C the pairs of the correspondence:
//!
//! * `=>`   every C pair is licensed by some context;
//! * `<=`   a pair whose lexical side is that of some C pair, at a position
//!   licensed by any context, is itself in C;
//! * `<=>`  both;
//! * `/<=`  no C pair is licensed by any context.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use thiserror::Error;

use crate::pair_regex::dfa::{compile_marked, complement_raw, erase_symbol, product_raw};
use crate::pair_regex::{
    parse_pair_regex, NameKind, PairDfa, PairExpr, PairRegex, PairSet, Pattern, ProductMode,
    RegexError, Resolver, DEAD,
};
use crate::symbols::{
    parse_declarations, split_sections, DeclarationError, Declarations, FeasiblePair,
    PairAlphabet, SymbolTable,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Operator {
    /// `=>`
    ContextRestriction,
    /// `<=`
    SurfaceCoercion,
    /// `<=>`
    Composite,
    /// `/<=`
    Exclusion,
}

impl fmt::Display for Operator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Operator::ContextRestriction => "=>",
            Operator::SurfaceCoercion => "<=",
            Operator::Composite => "<=>",
            Operator::Exclusion => "/<=",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Context {
    pub left: PairRegex,
    pub right: PairRegex,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WhereClause {
    pub variables: Vec<(String, Vec<String>)>,
    pub matched: bool,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwoLevelRule {
    pub name: String,
    pub line: usize,
    pub correspondence: PairRegex,
    pub operator: Operator,
    pub contexts: Vec<Context>,
    pub where_clause: Option<WhereClause>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error(transparent)]
    Declaration(#[from] DeclarationError),
    #[error("rule `{rule}` (line {line}): {message}")]
    Syntax {
        rule: String,
        line: usize,
        message: String,
    },
    #[error("rule `{rule}` (line {line}): {source}")]
    Regex {
        rule: String,
        line: usize,
        source: RegexError,
    },
    #[error("rule `{rule}`: {message}")]
    Expansion { rule: String, message: String },
    #[error("rule `{rule}`: correspondence denotes no feasible pair")]
    EmptyCorrespondence { rule: String },
    #[error("rule `{rule}`: {source}")]
    UnknownPair { rule: String, source: RegexError },
}

const OPERATORS: [(&str, Operator); 4] = [
    ("/<=", Operator::Exclusion),
    ("<=>", Operator::Composite),
    ("<=", Operator::SurfaceCoercion),
    ("=>", Operator::ContextRestriction),
];

fn find_operator(text: &str) -> Option<(usize, usize, Operator)> {
    let b = text.as_bytes();
    let mut i = 0;
    while i < b.len() {
        if b[i] == b'%' {
            i += 2;
            continue;
        }
        if !text.is_char_boundary(i) {
            i += 1;
            continue;
        }
        for (tok, op) in OPERATORS {
            if text[i..].starts_with(tok) {
                return Some((i, tok.len(), op));
            }
        }
        i += 1;
    }
    None
}

/// Splits at unescaped `;`.
fn split_semicolons(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut cur = String::new();
    let mut chars = text.chars();
    while let Some(c) = chars.next() {
        match c {
            '%' => {
                cur.push(c);
                if let Some(n) = chars.next() {
                    cur.push(n);
                }
            }
            ';' => out.push(std::mem::take(&mut cur)),
            _ => cur.push(c),
        }
    }
    out.push(cur);
    out
}

/// Splits a context at its `_` slot (unescaped, standing alone).
fn split_slot(text: &str) -> Option<(&str, &str)> {
    let b = text.as_bytes();
    let mut i = 0;
    let mut found = None;
    while i < b.len() {
        match b[i] {
            b'%' => i += 2,
            b'_' => {
                if found.is_some() {
                    return None;
                }
                found = Some(i);
                i += 1;
            }
            _ => i += 1,
        }
    }
    found.map(|i| (&text[..i], &text[i + 1..]))
}

fn parse_where(text: &str, rule: &str, line: usize) -> Result<WhereClause, RuleError> {
    let err = |m: &str| RuleError::Syntax {
        rule: rule.to_string(),
        line,
        message: m.to_string(),
    };
    let spaced = text.replace('(', " ( ").replace(')', " ) ");
    let mut toks = spaced.split_whitespace().peekable();
    if toks.next() != Some("where") {
        return Err(err("expected `where`"));
    }
    let mut variables = Vec::new();
    let mut matched = false;
    while let Some(t) = toks.next() {
        if t == "matched" {
            matched = true;
            continue;
        }
        // `X and Y in (...)` binds several variables to one list.
        let mut names = vec![t.to_string()];
        while toks.peek() == Some(&"and") {
            toks.next();
            names.push(toks.next().ok_or_else(|| err("dangling `and`"))?.to_string());
        }
        if toks.next() != Some("in") {
            return Err(err(&format!("expected `in` after `{t}`")));
        }
        if toks.next() != Some("(") {
            return Err(err("expected `(`"));
        }
        let mut values = Vec::new();
        loop {
            match toks.next() {
                Some(")") => break,
                Some(v) => values.push(v.to_string()),
                None => return Err(err("unterminated value list")),
            }
        }
        for n in names {
            variables.push((n, values.clone()));
        }
    }
    if variables.is_empty() {
        return Err(err("empty where clause"));
    }
    Ok(WhereClause { variables, matched })
}

/// Parses one rule body (the text after its quoted name).
pub fn parse_rule(
    name: &str,
    line: usize,
    body: &str,
    decls: &Declarations,
) -> Result<TwoLevelRule, RuleError> {
    let syntax = |m: String| RuleError::Syntax {
        rule: name.to_string(),
        line,
        message: m,
    };
    let mut segments: Vec<String> = split_semicolons(body)
        .into_iter()
        .filter(|s| !s.trim().is_empty())
        .collect();
    let mut where_clause = None;
    if let Some(pos) = segments
        .iter()
        .position(|s| s.trim_start().starts_with("where"))
    {
        let w = segments[pos..].join(" ");
        where_clause = Some(parse_where(&w, name, line)?);
        segments.truncate(pos);
    }
    let vars: Vec<String> = where_clause
        .iter()
        .flat_map(|w| w.variables.iter().map(|v| v.0.clone()))
        .collect();
    let kind = |n: &str| {
        if vars.iter().any(|v| v == n) {
            NameKind::Variable
        } else {
            decls.name_kind(n)
        }
    };
    let first = segments.first().ok_or_else(|| syntax("empty rule".into()))?;
    let (at, len, operator) =
        find_operator(first).ok_or_else(|| syntax("missing rule operator".into()))?;
    let regex = |t: &str| {
        parse_pair_regex(t, &kind).map_err(|source| RuleError::Regex {
            rule: name.to_string(),
            line,
            source,
        })
    };
    let correspondence = regex(&first[..at])?;
    let mut contexts = Vec::new();
    let mut ctx_texts = vec![first[at + len..].to_string()];
    ctx_texts.extend(segments[1..].iter().cloned());
    for t in ctx_texts {
        let (l, r) = split_slot(&t)
            .ok_or_else(|| syntax(format!("context needs exactly one `_`: `{}`", t.trim())))?;
        contexts.push(Context {
            left: regex(l)?,
            right: regex(r)?,
        });
    }
    Ok(TwoLevelRule {
        name: name.to_string(),
        line,
        correspondence,
        operator,
        contexts,
        where_clause,
    })
}

/// Parses a complete rules file.
pub fn parse_rules_file(text: &str) -> Result<(Declarations, Vec<TwoLevelRule>), RuleError> {
    let decls = parse_declarations(text)?;
    let mut rules = Vec::new();
    for (section, lines) in split_sections(text) {
        if section != "RULES" {
            continue;
        }
        // (line, text) pieces with quoted names pulled out.
        let mut current: Option<(String, usize, String)> = None;
        for (n, line) in &lines {
            let mut rest = line.as_str();
            while let Some(q) = rest.find('"') {
                let before = &rest[..q];
                if let Some(c) = current.as_mut() {
                    c.2.push_str(before);
                }
                let after = &rest[q + 1..];
                let Some(end) = after.find('"') else {
                    return Err(RuleError::Syntax {
                        rule: String::new(),
                        line: *n,
                        message: "unterminated rule name".into(),
                    });
                };
                if let Some((name, l, body)) = current.take() {
                    rules.push(parse_rule(&name, l, &body, &decls)?);
                }
                current = Some((after[..end].trim().to_string(), *n, String::new()));
                rest = &after[end + 1..];
            }
            match current.as_mut() {
                Some(c) => {
                    c.2.push_str(rest);
                    c.2.push('\n');
                }
                None if !rest.trim().is_empty() => {
                    return Err(RuleError::Syntax {
                        rule: String::new(),
                        line: *n,
                        message: "rule text before the first rule name".into(),
                    })
                }
                None => {}
            }
        }
        if let Some((name, l, body)) = current.take() {
            rules.push(parse_rule(&name, l, &body, &decls)?);
        }
    }
    Ok((decls, rules))
}

/// Expands a where clause into ground rules.
pub fn expand_where(rule: &TwoLevelRule) -> Result<Vec<TwoLevelRule>, RuleError> {
    let Some(w) = &rule.where_clause else {
        return Ok(vec![rule.clone()]);
    };
    let mut bindings: Vec<Vec<(String, String)>> = Vec::new();
    if w.matched {
        let len = w.variables[0].1.len();
        if w.variables.iter().any(|v| v.1.len() != len) {
            return Err(RuleError::Expansion {
                rule: rule.name.clone(),
                message: "matched variables have value lists of different lengths".into(),
            });
        }
        for i in 0..len {
            bindings.push(
                w.variables
                    .iter()
                    .map(|(n, vs)| (n.clone(), vs[i].clone()))
                    .collect(),
            );
        }
    } else {
        bindings.push(Vec::new());
        for (n, vs) in &w.variables {
            let mut next = Vec::new();
            for b in &bindings {
                for v in vs {
                    let mut nb = b.clone();
                    nb.push((n.clone(), v.clone()));
                    next.push(nb);
                }
            }
            bindings = next;
        }
    }
    Ok(bindings
        .into_iter()
        .map(|b| {
            let map: HashMap<String, String> = b.iter().cloned().collect();
            let label: Vec<String> = b.iter().map(|(n, v)| format!("{n}={v}")).collect();
            TwoLevelRule {
                name: format!("{} [{}]", rule.name, label.join(" ")),
                line: rule.line,
                correspondence: rule.correspondence.substitute(&map),
                operator: rule.operator,
                contexts: rule
                    .contexts
                    .iter()
                    .map(|c| Context {
                        left: c.left.substitute(&map),
                        right: c.right.substitute(&map),
                    })
                    .collect(),
                where_clause: None,
            }
        })
        .collect())
}

fn correspondence_pairs(re: &PairRegex, decls: &Declarations, out: &mut Vec<FeasiblePair>) {
    match re {
        PairRegex::Atom {
            lexical: Pattern::Name(l),
            surface: Pattern::Name(s),
        } => {
            if let (Some(ls), Some(ss)) = (decls.side_symbols(l), decls.side_symbols(s)) {
                for a in &ls {
                    for b in &ss {
                        out.push(FeasiblePair::new(*a, *b));
                    }
                }
            }
        }
        PairRegex::Bare(n) => {
            if let Some(s) = decls.symbols.get(n) {
                out.push(FeasiblePair::new(s, s));
            }
        }
        PairRegex::Union(v) | PairRegex::Concat(v) => {
            v.iter().for_each(|e| correspondence_pairs(e, decls, out))
        }
        PairRegex::Group(e) => correspondence_pairs(e, decls, out),
        _ => {}
    }
}

/// Identity and declared pairs plus every pair named by a ground rule's
/// correspondence.
pub fn derive_feasible_pairs(decls: &Declarations, ground: &[TwoLevelRule]) -> PairAlphabet {
    let mut pairs: Vec<FeasiblePair> = decls.declared_pairs.clone();
    for r in ground {
        correspondence_pairs(&r.correspondence, decls, &mut pairs);
    }
    PairAlphabet::new(pairs)
}

/// A ground rule with all regexes resolved against an alphabet.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ResolvedRule {
    pub name: String,
    pub operator: Operator,
    /// Pairs of the correspondence.
    pub corr: PairSet,
    /// Pairs whose lexical side is the lexical side of some pair in `corr`.
    pub lexical_class: PairSet,
    pub contexts: Vec<(PairExpr, PairExpr)>,
}

impl ResolvedRule {
    pub fn resolve(
        rule: &TwoLevelRule,
        decls: &Declarations,
        alphabet: &PairAlphabet,
        strict: bool,
    ) -> Result<ResolvedRule, RuleError> {
        let mut r = Resolver::new(decls, alphabet);
        r.strict = strict;
        let wrap = |source| RuleError::UnknownPair {
            rule: rule.name.clone(),
            source,
        };
        let corr_expr = r.resolve(&rule.correspondence).map_err(wrap)?;
        let corr = corr_expr
            .as_single_pairs()
            .ok_or_else(|| RuleError::Syntax {
                rule: rule.name.clone(),
                line: rule.line,
                message: "correspondence must denote single pairs".into(),
            })?;
        if corr.is_empty() && strict {
            return Err(RuleError::EmptyCorrespondence {
                rule: rule.name.clone(),
            });
        }
        let contexts = rule
            .contexts
            .iter()
            .map(|c| Ok((r.resolve(&c.left).map_err(wrap)?, r.resolve(&c.right).map_err(wrap)?)))
            .collect::<Result<Vec<_>, RuleError>>()?;
        Ok(ResolvedRule::from_parts(
            rule.name.clone(),
            rule.operator,
            corr,
            contexts,
            alphabet,
        ))
    }

    pub fn from_parts(
        name: String,
        operator: Operator,
        corr: PairSet,
        contexts: Vec<(PairExpr, PairExpr)>,
        alphabet: &PairAlphabet,
    ) -> ResolvedRule {
        let lex: BTreeSet<_> = corr.iter().map(|i| alphabet.pair(i).lexical).collect();
        let mut lexical_class = PairSet::empty(alphabet.len());
        for (i, p) in alphabet.pairs().iter().enumerate() {
            if lex.contains(&p.lexical) {
                lexical_class.insert(i as u32);
            }
        }
        ResolvedRule {
            name,
            operator,
            corr,
            lexical_class,
            contexts,
        }
    }

    /// Restricts the rule to a sub-alphabet given as a map from old indices.
    pub fn project(&self, map: &[Option<u32>], m: usize) -> ResolvedRule {
        let proj = |s: &PairSet| {
            let mut r = PairSet::empty(m);
            for i in s.iter() {
                if let Some(j) = map[i as usize] {
                    r.insert(j);
                }
            }
            r
        };
        ResolvedRule {
            name: self.name.clone(),
            operator: self.operator,
            corr: proj(&self.corr),
            lexical_class: proj(&self.lexical_class),
            contexts: self
                .contexts
                .iter()
                .map(|(l, r)| (l.project(map, m), r.project(map, m)))
                .collect(),
        }
    }
}

fn frame(pairs: &[u32], boundary: Option<u32>) -> Vec<u32> {
    match boundary {
        Some(b) => {
            let mut f = Vec::with_capacity(pairs.len() + 2);
            f.push(b);
            f.extend_from_slice(pairs);
            f.push(b);
            f
        }
        None => pairs.to_vec(),
    }
}

/// The reference interpreter. `boundary` is the index of `#:#`; when given,
/// the string is framed with it before evaluation.
pub fn rule_holds(rule: &ResolvedRule, pairs: &[u32], boundary: Option<u32>) -> bool {
    let f = frame(pairs, boundary);
    let licensed = |i: usize, j: usize| -> bool {
        let (lc, rc) = &rule.contexts[j];
        let left = (0..=i).any(|k| lc.ends(&f, k)[i]);
        left && rc.ends(&f, i + 1).iter().any(|e| *e)
    };
    let any_licensed = |i: usize| (0..rule.contexts.len()).any(|j| licensed(i, j));
    let restriction = || (0..f.len()).all(|i| !rule.corr.contains(f[i]) || any_licensed(i));
    let coercion = || {
        (0..f.len()).all(|i| {
            !rule.lexical_class.contains(f[i]) || rule.corr.contains(f[i]) || !any_licensed(i)
        })
    };
    match rule.operator {
        Operator::ContextRestriction => restriction(),
        Operator::SurfaceCoercion => coercion(),
        Operator::Composite => restriction() && coercion(),
        Operator::Exclusion => (0..f.len()).all(|i| !rule.corr.contains(f[i]) || !any_licensed(i)),
    }
}

/// Compiles a resolved rule over an alphabet of `n` pairs. The automaton
/// accepts exactly the (framed) strings on which [`rule_holds`] is true.
pub fn compile_resolved(rule: &ResolvedRule, n: usize, alphabet_id: u64) -> PairDfa {
    let sigma = PairExpr::Set(PairSet::full(n));
    let sigma_star = PairExpr::star(sigma.clone());
    let licensed = |focus: PairExpr| -> PairExpr {
        PairExpr::union(
            rule.contexts
                .iter()
                .map(|(l, r)| {
                    PairExpr::concat(vec![
                        sigma_star.clone(),
                        l.clone(),
                        PairExpr::Marker,
                        focus.clone(),
                        r.clone(),
                        sigma_star.clone(),
                    ])
                })
                .collect(),
        )
    };
    // Marked strings with a violation at the marker; erasing the marker
    // gives the strings with some violation, whose complement is the rule.
    let good = |bad: PairExpr| -> PairDfa {
        let marked = compile_marked(&bad, n, alphabet_id);
        let erased = erase_symbol(&marked, n as u32, n, alphabet_id);
        complement_raw(&erased)
    };
    let restriction = || {
        let focus_any = PairExpr::concat(vec![
            sigma_star.clone(),
            PairExpr::Marker,
            PairExpr::Set(rule.corr.clone()),
            sigma_star.clone(),
        ]);
        let bad = PairExpr::Diff(Box::new(focus_any), Box::new(licensed(sigma.clone())));
        good(bad)
    };
    let coercion = || {
        let wrong = rule.lexical_class.minus(&rule.corr);
        good(licensed(PairExpr::Set(wrong)))
    };
    match rule.operator {
        Operator::ContextRestriction => restriction(),
        Operator::SurfaceCoercion => coercion(),
        Operator::Composite => product_raw(&restriction(), &coercion(), ProductMode::Intersect),
        Operator::Exclusion => good(licensed(PairExpr::Set(rule.corr.clone()))),
    }
}

/// A compiled ground rule.
#[derive(Clone, Debug)]
pub struct RuleAutomaton {
    pub rule: ResolvedRule,
    pub dfa: PairDfa,
}

impl RuleAutomaton {
    pub fn name(&self) -> &str {
        &self.rule.name
    }

    /// Runs the automaton on a framed string.
    pub fn accepts_framed(&self, framed: &[u32]) -> bool {
        self.dfa.accepts(framed)
    }
}

/// Resolves and compiles one ground rule.
pub fn compile_rule(
    rule: &TwoLevelRule,
    decls: &Declarations,
    alphabet: &PairAlphabet,
) -> Result<RuleAutomaton, RuleError> {
    if rule.where_clause.is_some() {
        return Err(RuleError::Expansion {
            rule: rule.name.clone(),
            message: "rule is not ground; expand its where clause first".into(),
        });
    }
    let resolved = ResolvedRule::resolve(rule, decls, alphabet, true)?;
    let dfa = compile_resolved(&resolved, alphabet.len(), alphabet.fingerprint());
    Ok(RuleAutomaton {
        rule: resolved,
        dfa,
    })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Blocker {
    pub rule: String,
    /// Position in the framed string (0 is the opening boundary).
    pub position: usize,
    /// The pair at that position (the closing boundary for final-state
    /// failures).
    pub pair: u32,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Verdict {
    pub accepted: bool,
    pub blockers: Vec<Blocker>,
}

impl Verdict {
    pub fn describe(&self, alphabet: &PairAlphabet, table: &SymbolTable) -> String {
        if self.accepted {
            return "accepted".into();
        }
        self.blockers
            .iter()
            .map(|b| {
                format!(
                    "{} at {} ({})",
                    b.rule,
                    b.position,
                    alphabet.display_pair(table, b.pair)
                )
            })
            .collect::<Vec<_>>()
            .join("; ")
    }
}

/// Runs every automaton over the framed string. Each failing automaton is
/// reported once, at the first position where its run dies, or at the
/// closing boundary if it ends outside a final state.
pub fn run_all(automata: &[RuleAutomaton], pairs: &[u32], boundary: u32) -> Verdict {
    let f = frame(pairs, Some(boundary));
    let mut blockers = Vec::new();
    for a in automata {
        let mut s = a.dfa.start();
        let mut died = None;
        for (i, &c) in f.iter().enumerate() {
            s = a.dfa.next(s, c);
            if s == DEAD {
                died = Some(i);
                break;
            }
        }
        let at = match died {
            Some(i) => Some(i),
            None if !a.dfa.is_final(s) => Some(f.len() - 1),
            None => None,
        };
        if let Some(i) = at {
            blockers.push(Blocker {
                rule: a.rule.name.clone(),
                position: i,
                pair: f[i],
            });
        }
    }
    Verdict {
        accepted: blockers.is_empty(),
        blockers,
    }
}

/// Combines the `=>` halves of rules that restrict the same pair.
///
/// Two restrictions on one pair contradict each other wherever their
/// contexts differ, so for every pair restricted by more than one rule the
/// restrictions are replaced by a single `=>` rule with the union of their
/// contexts. The `<=` halves are kept per rule: a shared-pair `<=>` rule
/// becomes `<=`, and a `=>` rule left with no pairs of its own disappears.
pub fn merge_restrictions(rules: &[ResolvedRule], n: usize) -> Vec<ResolvedRule> {
    let restricts = |r: &ResolvedRule| {
        matches!(
            r.operator,
            Operator::ContextRestriction | Operator::Composite
        )
    };
    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, r) in rules.iter().enumerate() {
        if restricts(r) {
            for p in r.corr.iter() {
                owners[p as usize].push(i);
            }
        }
    }
    let mut shared = PairSet::empty(n);
    for (p, o) in owners.iter().enumerate() {
        if o.len() > 1 {
            shared.insert(p as u32);
        }
    }
    let mut out = Vec::new();
    for r in rules {
        let overlap = restricts(r) && r.corr.iter().any(|p| shared.contains(p));
        if !overlap {
            out.push(r.clone());
            continue;
        }
        let own = r.corr.minus(&shared);
        if !own.is_empty() {
            out.push(ResolvedRule {
                name: r.name.clone(),
                operator: Operator::ContextRestriction,
                corr: own,
                lexical_class: r.lexical_class.clone(),
                contexts: r.contexts.clone(),
            });
        }
        if r.operator == Operator::Composite {
            out.push(ResolvedRule {
                operator: Operator::SurfaceCoercion,
                ..r.clone()
            });
        }
    }
    for p in shared.iter() {
        let group = &owners[p as usize];
        let mut corr = PairSet::empty(n);
        corr.insert(p);
        let names: Vec<&str> = group.iter().map(|&i| rules[i].name.as_str()).collect();
        out.push(ResolvedRule {
            name: format!("=> merged {}", names.join(" | ")),
            operator: Operator::ContextRestriction,
            corr,
            lexical_class: rules[group[0]].lexical_class.clone(),
            contexts: group
                .iter()
                .flat_map(|&i| rules[i].contexts.iter().cloned())
                .collect(),
        });
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const SMALL: &str = r#"
ALPHABET
 a b y y:0 %-:0 %(:0 %):0 # ;
SETS
C = b ;
RULES
"y deletion"
y:0 <=> C %-:0 %(:0 _ %):0 ;
"#;

    fn setup() -> (Declarations, Vec<TwoLevelRule>, PairAlphabet) {
        let (d, rules) = parse_rules_file(SMALL).unwrap();
        let alpha = derive_feasible_pairs(&d, &rules);
        (d, rules, alpha)
    }

    fn pairs(d: &Declarations, alpha: &PairAlphabet, s: &str) -> Vec<u32> {
        s.split_whitespace()
            .map(|t| {
                let (l, r) = crate::symbols::split_pair_token(t);
                let l = d.symbols.get(&crate::symbols::unescape(l)).unwrap();
                let r = r
                    .map(|r| d.symbols.get(&crate::symbols::unescape(r)).unwrap())
                    .unwrap_or(l);
                alpha.index_of(FeasiblePair::new(l, r)).unwrap()
            })
            .collect()
    }

    #[test]
    fn y_deletion_after_consonant() {
        let (d, rules, alpha) = setup();
        assert_eq!(rules.len(), 1);
        let ra = compile_rule(&rules[0], &d, &alpha).unwrap();
        let b = alpha.boundary();
        let good = pairs(&d, &alpha, "b %-:0 %(:0 y:0 %):0 a");
        let bad = pairs(&d, &alpha, "b %-:0 %(:0 y %):0 a");
        assert!(rule_holds(&ra.rule, &good, b));
        assert!(!rule_holds(&ra.rule, &bad, b));
        assert!(rule_holds(&ra.rule, &[], b));
        let framed = |p: &[u32]| frame(p, b);
        assert!(ra.accepts_framed(&framed(&good)));
        assert!(!ra.accepts_framed(&framed(&bad)));
        let v = run_all(std::slice::from_ref(&ra), &bad, b.unwrap());
        assert!(!v.accepted);
        assert_eq!(v.blockers[0].rule, "y deletion");
    }

    #[test]
    fn where_expansion() {
        let text = "ALPHABET\n a b c p t %-:0 # ;\nSETS\nX = a ;\nRULES\n\"devoice\"\nV:W <=> _ # ;\nwhere V in (b c) W in (p t) matched;\n\"each\"\nV:0 => _ ;\nwhere V in (b c);\n";
        let (_, rules) = parse_rules_file(text).unwrap();
        let g = expand_where(&rules[0]).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g[0].correspondence.to_string(), "b:p");
        assert_eq!(g[1].correspondence.to_string(), "c:t");
        assert_eq!(expand_where(&rules[1]).unwrap().len(), 2);
        let mut bad = rules[0].clone();
        bad.where_clause.as_mut().unwrap().variables[1].1.pop();
        assert!(matches!(expand_where(&bad), Err(RuleError::Expansion { .. })));
    }

    #[test]
    fn multiple_contexts_parse() {
        let text = "ALPHABET\n a b c:d # ;\nRULES\n\"two\"\nc:d <=> a _ ; b _ a ;\n";
        let (_, rules) = parse_rules_file(text).unwrap();
        assert_eq!(rules[0].contexts.len(), 2);
        assert_eq!(rules[0].operator, Operator::Composite);
    }

    #[test]
    fn always_licensed_restriction_accepts_everything() {
        let text = "ALPHABET\n a b # ;\nRULES\n\"free\"\na:a => _ ;\n";
        let (d, rules) = parse_rules_file(text).unwrap();
        let alpha = derive_feasible_pairs(&d, &rules);
        let ra = compile_rule(&rules[0], &d, &alpha).unwrap();
        let all = PairExpr::any_string(alpha.len());
        let universal = crate::pair_regex::dfa::compile_expr(&all, alpha.len(), alpha.fingerprint());
        assert!(crate::pair_regex::dfa_equivalent(&ra.dfa, &universal).unwrap());
    }
}
