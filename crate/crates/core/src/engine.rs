//! The runtime: a compiled description (rules, lexicon, pair alphabet) and
//! analysis, generation and tracing over it.
//!
//! Search is deletion-only. Every step consumes one lexical symbol; the
//! surface advances unless the pair's surface side is `0`. Rule automata
//! run in lockstep and a branch is cut as soon as one of them dies.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::lexicon::{parse_lexicon_file, Continuation, LexState, Lexicon, LexiconError};
use crate::pair_regex::DEAD;
use crate::rule_system::{
    compile_resolved, derive_feasible_pairs, expand_where, merge_restrictions, parse_rules_file,
    run_all, Blocker, ResolvedRule, RuleAutomaton, RuleError, TwoLevelRule, Verdict,
};
use crate::symbols::{Declarations, FeasiblePair, PairAlphabet, Symbol, SymbolTable};

#[derive(Debug, Error)]
pub enum DescriptionError {
    #[error(transparent)]
    Rule(#[from] RuleError),
    #[error(transparent)]
    Lexicon(#[from] LexiconError),
    #[error("unsupported: pair {0} inserts a surface symbol (lexical 0)")]
    Insertion(String),
    #[error("lexicon line {line}: symbol `{symbol}` has no feasible pair")]
    LexiconSymbol { line: usize, symbol: String },
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GenerateError {
    #[error("unknown symbol in `{0}`")]
    Token(String),
    #[error("no lexicon path places `{tag}`")]
    Morphotactics { tag: String },
}

#[derive(Clone, Debug)]
pub struct CompileOptions {
    /// Reject context atoms that denote no feasible pair.
    pub strict: bool,
    /// Combine `=>` restrictions that share a pair (see
    /// [`merge_restrictions`]).
    pub merge_restrictions: bool,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            strict: true,
            merge_restrictions: true,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Morpheme {
    pub gloss: String,
    pub form: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Analysis {
    pub lexical: String,
    pub gloss: String,
    pub morphemes: Vec<Morpheme>,
    pub pairs: Vec<FeasiblePair>,
}

/// Longest run of consecutive null-surface pairs the search will follow.
pub const MAX_NULL_RUN: usize = 24;

pub struct Description {
    pub declarations: Declarations,
    /// Where-expanded rules in file order.
    pub ground_rules: Vec<TwoLevelRule>,
    /// One resolved rule per ground rule.
    pub resolved: Vec<ResolvedRule>,
    /// The automata actually run.
    pub automata: Vec<RuleAutomaton>,
    pub lexicon: Lexicon,
    pub alphabet: PairAlphabet,
    boundary: u32,
    by_lexical: Vec<Vec<u32>>,
    surface_of: Vec<Symbol>,
    lexical_of: Vec<Symbol>,
    tables: Vec<Table>,
}

/// A rule automaton flattened for stepping.
struct Table {
    n_syms: usize,
    trans: Vec<u32>,
    finals: Vec<bool>,
    start: u32,
}

impl Table {
    #[inline]
    fn next(&self, s: u32, p: u32) -> u32 {
        self.trans[s as usize * self.n_syms + p as usize]
    }
}

impl Description {
    pub fn compile(
        rules_text: &str,
        lexicon_texts: &[&str],
        opts: &CompileOptions,
    ) -> Result<Description, DescriptionError> {
        let (mut declarations, rules) = parse_rules_file(rules_text)?;
        let mut ground_rules = Vec::new();
        for r in &rules {
            ground_rules.extend(expand_where(r)?);
        }
        let alphabet = derive_feasible_pairs(&declarations, &ground_rules);
        for p in alphabet.pairs() {
            if p.lexical == Symbol::NULL && p.surface != Symbol::NULL {
                return Err(DescriptionError::Insertion(crate::symbols::pair_name(
                    &declarations.symbols,
                    *p,
                )));
            }
        }
        let resolved = ground_rules
            .iter()
            .map(|r| ResolvedRule::resolve(r, &declarations, &alphabet, opts.strict))
            .collect::<Result<Vec<_>, _>>()?;
        let active = if opts.merge_restrictions {
            merge_restrictions(&resolved, alphabet.len())
        } else {
            resolved.clone()
        };
        let id = alphabet.fingerprint();
        let automata: Vec<RuleAutomaton> = active
            .into_iter()
            .map(|rule| {
                let dfa = compile_resolved(&rule, alphabet.len(), id);
                RuleAutomaton { rule, dfa }
            })
            .collect();
        let text = lexicon_texts.join("\n");
        let lexicon = parse_lexicon_file(&text, &mut declarations.symbols)?;
        Self::assemble(declarations, ground_rules, resolved, automata, lexicon, alphabet)
    }

    fn assemble(
        declarations: Declarations,
        ground_rules: Vec<TwoLevelRule>,
        resolved: Vec<ResolvedRule>,
        automata: Vec<RuleAutomaton>,
        lexicon: Lexicon,
        alphabet: PairAlphabet,
    ) -> Result<Description, DescriptionError> {
        let n_symbols = declarations.symbols.len();
        let mut by_lexical = vec![Vec::new(); n_symbols];
        for (i, p) in alphabet.pairs().iter().enumerate() {
            by_lexical[p.lexical.0 as usize].push(i as u32);
        }
        for (_, entries) in &lexicon.sublexicons {
            for e in entries {
                for s in &e.form {
                    if by_lexical[s.0 as usize].is_empty() {
                        return Err(DescriptionError::LexiconSymbol {
                            line: e.line,
                            symbol: declarations.symbols.name(*s).to_string(),
                        });
                    }
                }
            }
        }
        let surface_of = alphabet.pairs().iter().map(|p| p.surface).collect();
        let lexical_of = alphabet.pairs().iter().map(|p| p.lexical).collect();
        let boundary = alphabet.boundary().expect("#:# is always feasible");
        let tables = automata
            .iter()
            .map(|a| {
                let d = &a.dfa;
                let n = d.n_syms();
                let mut trans = Vec::with_capacity(d.n_states() * n);
                for s in 0..d.n_states() as u32 {
                    for p in 0..n as u32 {
                        trans.push(d.next(s, p));
                    }
                }
                Table {
                    n_syms: n,
                    trans,
                    finals: (0..d.n_states() as u32).map(|s| d.is_final(s)).collect(),
                    start: d.start(),
                }
            })
            .collect();
        Ok(Description {
            declarations,
            ground_rules,
            resolved,
            automata,
            lexicon,
            alphabet,
            boundary,
            by_lexical,
            surface_of,
            lexical_of,
            tables,
        })
    }

    pub fn symbols(&self) -> &SymbolTable {
        &self.declarations.symbols
    }

    /// Index of the `#:#` pair.
    pub fn boundary(&self) -> u32 {
        self.boundary
    }

    /// Rule states after reading the opening boundary, or `None` if some
    /// automaton rejects even that.
    fn initial_states(&self) -> Option<Vec<u32>> {
        let mut v = Vec::with_capacity(self.tables.len());
        for t in &self.tables {
            if t.start == DEAD {
                return None;
            }
            let s = t.next(t.start, self.boundary);
            if s == DEAD {
                return None;
            }
            v.push(s);
        }
        Some(v)
    }

    #[inline]
    fn step(&self, from: &[u32], p: u32, to: &mut [u32]) -> bool {
        for (i, t) in self.tables.iter().enumerate() {
            let s = t.next(from[i], p);
            if s == DEAD {
                return false;
            }
            to[i] = s;
        }
        true
    }

    fn closes(&self, states: &[u32]) -> bool {
        self.tables.iter().zip(states).all(|(t, &s)| {
            let e = t.next(s, self.boundary);
            e != DEAD && t.finals[e as usize]
        })
    }

    fn render(&self, syms: &[Symbol]) -> String {
        syms.iter().map(|s| self.symbols().name(*s)).collect()
    }

    /// Surface string of a pair string, with `0` erased.
    pub fn surface_string(&self, pairs: &[u32]) -> String {
        pairs
            .iter()
            .map(|&p| self.surface_of[p as usize])
            .filter(|s| *s != Symbol::NULL)
            .map(|s| self.symbols().name(s))
            .collect()
    }

    pub fn lexical_string(&self, pairs: &[u32]) -> String {
        pairs
            .iter()
            .map(|&p| self.symbols().name(self.lexical_of[p as usize]))
            .collect()
    }

    /// Every analysis of a surface word, sorted by lexical string then
    /// gloss, without duplicates.
    pub fn analyze(&self, surface: &str) -> Vec<Analysis> {
        let Some(surface) = self.symbols().tokenize(surface) else {
            return Vec::new();
        };
        if surface.contains(&Symbol::NULL) {
            return Vec::new();
        }
        let Some(init) = self.initial_states() else {
            return Vec::new();
        };
        let mut search = Search {
            d: self,
            surface: &surface,
            n: self.tables.len(),
            states: init,
            pairs: Vec::new(),
            entries: Vec::new(),
            found: Vec::new(),
            rules: true,
            limit: usize::MAX,
            null_budget: usize::MAX,
            null_total: 0,
            budget_hit: false,
        };
        for start in self.lexicon.start_states() {
            search.go(start, 0, 0, 0);
        }
        let mut out: Vec<Analysis> = search
            .found
            .into_iter()
            .map(|(pairs, entries)| self.make_analysis(&pairs, &entries))
            .collect();
        out.sort_by(|a, b| (&a.lexical, &a.gloss).cmp(&(&b.lexical, &b.gloss)));
        out.dedup_by(|a, b| a.lexical == b.lexical && a.gloss == b.gloss);
        out
    }

    fn make_analysis(&self, pairs: &[u32], entries: &[(u32, u32)]) -> Analysis {
        let morphemes: Vec<Morpheme> = entries
            .iter()
            .map(|&(s, i)| {
                let e = self.lexicon.entry(s, i);
                Morpheme {
                    gloss: e.gloss.clone(),
                    form: self.render(&e.form),
                }
            })
            .filter(|m| !(m.gloss.is_empty() && m.form.is_empty()))
            .collect();
        Analysis {
            lexical: morphemes.iter().map(|m| m.form.as_str()).collect(),
            gloss: morphemes.iter().map(|m| m.gloss.as_str()).collect(),
            morphemes,
            pairs: pairs.iter().map(|&p| self.alphabet.pair(p)).collect(),
        }
    }

    /// Surface forms of a lexical string. With `validate`, the string must
    /// also be a complete lexicon path.
    pub fn generate(&self, lexical: &str, validate: bool) -> Result<Vec<String>, GenerateError> {
        let syms = self
            .symbols()
            .tokenize(lexical)
            .ok_or_else(|| GenerateError::Token(lexical.to_string()))?;
        if syms.iter().any(|s| self.by_lexical[s.0 as usize].is_empty()) {
            return Err(GenerateError::Token(lexical.to_string()));
        }
        if validate && !self.lexicon.accepts(&syms) {
            return Ok(Vec::new());
        }
        Ok(self.generate_pairs(&syms).into_iter().map(|p| self.surface_string(&p)).collect::<BTreeSet<_>>().into_iter().collect())
    }

    /// Every rule-satisfying pair string with the given lexical projection.
    pub fn generate_pairs(&self, syms: &[Symbol]) -> Vec<Vec<u32>> {
        let mut out = Vec::new();
        let Some(init) = self.initial_states() else {
            return out;
        };
        let n = self.tables.len();
        let mut states = init;
        states.resize(n * (syms.len() + 1), 0);
        let mut pairs = Vec::with_capacity(syms.len());
        self.gen_rec(syms, 0, &mut states, &mut pairs, &mut out);
        out
    }

    fn gen_rec(
        &self,
        syms: &[Symbol],
        i: usize,
        states: &mut Vec<u32>,
        pairs: &mut Vec<u32>,
        out: &mut Vec<Vec<u32>>,
    ) {
        let n = self.tables.len();
        if i == syms.len() {
            if self.closes(&states[i * n..(i + 1) * n]) {
                out.push(pairs.clone());
            }
            return;
        }
        for &p in &self.by_lexical[syms[i].0 as usize] {
            let (a, b) = states.split_at_mut((i + 1) * n);
            if self.step(&a[i * n..], p, &mut b[..n]) {
                pairs.push(p);
                self.gen_rec(syms, i + 1, states, pairs, out);
                pairs.pop();
            }
        }
    }

    /// Generates from a root gloss and a tag list, e.g. `ev` with
    /// `["PLU", "ABL"]`. Tags may be given with or without the leading `+`.
    pub fn generate_from_gloss(&self, root: &str, tags: &[&str]) -> Result<Vec<String>, GenerateError> {
        let mut tokens = vec![format!("[ROOT={root}]")];
        for t in tags {
            tokens.push(if t.starts_with('+') { t.to_string() } else { format!("+{t}") });
        }
        let lexicals = self
            .lexicon
            .paths_for_glosses(self.symbols(), &tokens)
            .map_err(|placed| GenerateError::Morphotactics {
                tag: tokens[placed.min(tokens.len() - 1)].clone(),
            })?;
        let mut out = BTreeSet::new();
        for l in lexicals {
            out.extend(self.generate(&l, true)?);
        }
        Ok(out.into_iter().collect())
    }

    /// Lexicon paths spelled on the surface as `surface`, ignoring rules,
    /// as (pair string, entries). Paths with the fewest null-surface pairs
    /// come first; those with up to `slack` more are also kept. At most
    /// `limit` are returned.
    fn lexicon_alignments(&self, surface: &[Symbol], limit: usize, slack: usize) -> Vec<(Vec<u32>, Vec<(u32, u32)>)> {
        if surface.iter().any(|s| !self.surface_of.contains(s)) {
            return Vec::new();
        }
        let mut search = Search {
            d: self,
            surface,
            n: 0,
            states: Vec::new(),
            pairs: Vec::new(),
            entries: Vec::new(),
            found: Vec::new(),
            rules: false,
            limit,
            null_budget: 0,
            null_total: 0,
            budget_hit: false,
        };
        let max_budget = MAX_NULL_RUN * (surface.len() + 1);
        let mut first = None;
        for budget in 0..=max_budget {
            search.null_budget = budget;
            search.found.clear();
            search.budget_hit = false;
            for start in self.lexicon.start_states() {
                search.go(start, 0, 0, 0);
            }
            if first.is_none() && !search.found.is_empty() {
                first = Some(budget);
            }
            // A larger budget only helps if this one cut some path short.
            if !search.budget_hit || first.is_some_and(|f| budget >= f + slack) || search.found.len() >= limit {
                break;
            }
        }
        search.found
    }

    /// Alignments of a lexical string with a surface string over feasible
    /// pairs, ignoring rules.
    fn pair_alignments(&self, lexical: &[Symbol], surface: &[Symbol], limit: usize) -> Vec<Vec<u32>> {
        fn rec(
            d: &Description,
            lex: &[Symbol],
            surf: &[Symbol],
            cur: &mut Vec<u32>,
            out: &mut Vec<Vec<u32>>,
            limit: usize,
        ) {
            if out.len() >= limit {
                return;
            }
            let Some((&l, rest)) = lex.split_first() else {
                if surf.is_empty() {
                    out.push(cur.clone());
                }
                return;
            };
            for &p in &d.by_lexical[l.0 as usize] {
                let s = d.surface_of[p as usize];
                let r = if s == Symbol::NULL {
                    surf
                } else if surf.first() == Some(&s) {
                    &surf[1..]
                } else {
                    continue;
                };
                cur.push(p);
                rec(d, rest, r, cur, out, limit);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(self, lexical, surface, &mut Vec::new(), &mut out, limit);
        out
    }

    /// Explains why a word is (not) analyzed. Candidates are lexicon paths
    /// that spell the surface; the reported one is accepted if any is, or
    /// else has the fewest blocking rules.
    pub fn trace_analyze(&self, surface: &str) -> TraceReport {
        let syms = self.symbols().tokenize(surface).unwrap_or_default();
        let cands = self.lexicon_alignments(&syms, TRACE_LIMIT, TRACE_SLACK);
        let items: Vec<(Vec<u32>, Option<String>)> = cands
            .into_iter()
            .map(|(p, e)| {
                let g = self.make_analysis(&p, &e).gloss;
                (p, Some(g))
            })
            .collect();
        self.report(Direction::Analyze, surface, items)
    }

    /// Explains generation of a lexical string, optionally against a given
    /// surface form. Without one, the candidates are the rule-satisfying
    /// alignments, or if there are none, the alignment that keeps every
    /// symbol's identity pair where it can.
    pub fn trace_generate(&self, lexical: &str, surface: Option<&str>) -> TraceReport {
        let Some(lex) = self.symbols().tokenize(lexical) else {
            return TraceReport::unknown(Direction::Generate, lexical);
        };
        let in_lexicon = self.lexicon.accepts(&lex);
        let cands: Vec<Vec<u32>> = match surface {
            Some(s) => {
                let surf = self.symbols().tokenize(s).unwrap_or_default();
                self.pair_alignments(&lex, &surf, TRACE_LIMIT)
            }
            None => {
                let ok = self.generate_pairs(&lex);
                if ok.is_empty() {
                    self.default_alignment(&lex).into_iter().collect()
                } else {
                    ok
                }
            }
        };
        let mut r = self.report(Direction::Generate, lexical, cands.into_iter().map(|p| (p, None)).collect());
        r.in_lexicon = in_lexicon;
        if !in_lexicon {
            r.layer = Layer::Lexicon;
        }
        r
    }

    /// The alignment that keeps every symbol whose identity pair is
    /// feasible and otherwise takes the first feasible pair.
    fn default_alignment(&self, lex: &[Symbol]) -> Option<Vec<u32>> {
        lex.iter()
            .map(|&s| {
                let ps = &self.by_lexical[s.0 as usize];
                ps.iter()
                    .copied()
                    .find(|&p| self.surface_of[p as usize] == s)
                    .or_else(|| ps.first().copied())
            })
            .collect()
    }

    fn report(&self, direction: Direction, input: &str, cands: Vec<(Vec<u32>, Option<String>)>) -> TraceReport {
        let mut best: Option<(Vec<u32>, Option<String>, Verdict)> = None;
        let candidates = cands.len();
        for (p, g) in cands {
            let v = run_all(&self.automata, &p, self.boundary);
            let better = match &best {
                None => true,
                Some((_, _, bv)) => {
                    (!v.accepted as usize, v.blockers.len()) < (!bv.accepted as usize, bv.blockers.len())
                }
            };
            if better {
                best = Some((p, g, v));
            }
        }
        let Some((pairs, gloss, outcome)) = best else {
            return TraceReport {
                direction,
                input: input.to_string(),
                candidates: 0,
                lexical: None,
                surface: None,
                gloss: None,
                in_lexicon: false,
                steps: Vec::new(),
                layer: Layer::Lexicon,
                outcome: Verdict {
                    accepted: false,
                    blockers: Vec::new(),
                },
            };
        };
        let mut framed = vec![self.boundary];
        framed.extend_from_slice(&pairs);
        framed.push(self.boundary);
        let mut states: Vec<u32> = self.tables.iter().map(|t| t.start).collect();
        let mut steps = Vec::new();
        for (i, &p) in framed.iter().enumerate() {
            let mut died = Vec::new();
            for (k, t) in self.tables.iter().enumerate() {
                if states[k] == DEAD {
                    continue;
                }
                states[k] = t.next(states[k], p);
                if states[k] == DEAD {
                    died.push(self.automata[k].name().to_string());
                }
            }
            if i + 1 == framed.len() {
                for (k, t) in self.tables.iter().enumerate() {
                    if states[k] != DEAD && !t.finals[states[k] as usize] {
                        died.push(self.automata[k].name().to_string());
                    }
                }
            }
            steps.push(TraceStep {
                position: i,
                pair: self.alphabet.display_pair(self.symbols(), p),
                died,
            });
        }
        TraceReport {
            direction,
            input: input.to_string(),
            candidates,
            lexical: Some(self.lexical_string(&pairs)),
            surface: Some(self.surface_string(&pairs)),
            gloss,
            in_lexicon: true,
            steps,
            layer: if outcome.accepted { Layer::None } else { Layer::Rules },
            outcome,
        }
    }

    /// Names of the rules rejecting a pair string.
    pub fn blockers(&self, pairs: &[u32]) -> Vec<Blocker> {
        run_all(&self.automata, pairs, self.boundary).blockers
    }

    /// Resolves a space-separated pair string such as `a ç:c 0:0`.
    pub fn parse_pairs(&self, text: &str) -> Option<Vec<u32>> {
        text.split_whitespace()
            .map(|t| {
                let (l, s) = crate::symbols::split_pair_token(t);
                let l = self.symbols().get(&crate::symbols::unescape(l))?;
                let s = match s {
                    Some(s) => self.symbols().get(&crate::symbols::unescape(s))?,
                    None => l,
                };
                self.alphabet.index_of(FeasiblePair::new(l, s))
            })
            .collect()
    }
}

const TRACE_LIMIT: usize = 10_000;
const TRACE_SLACK: usize = 4;

struct Search<'a> {
    d: &'a Description,
    surface: &'a [Symbol],
    n: usize,
    /// Rule states, `n` per depth.
    states: Vec<u32>,
    pairs: Vec<u32>,
    entries: Vec<(u32, u32)>,
    found: Vec<(Vec<u32>, Vec<(u32, u32)>)>,
    rules: bool,
    limit: usize,
    /// Most null-surface pairs allowed on one path.
    null_budget: usize,
    null_total: usize,
    budget_hit: bool,
}

impl Search<'_> {
    fn go(&mut self, node: LexState, pos: usize, depth: usize, nulls: usize) {
        if self.found.len() >= self.limit {
            return;
        }
        let d = self.d;
        let n = self.n;
        for &(sub, idx) in d.lexicon.ends(node) {
            match d.lexicon.entry(sub, idx).continuation {
                Continuation::End => {
                    if pos == self.surface.len()
                        && (!self.rules || d.closes(&self.states[depth * n..(depth + 1) * n]))
                    {
                        let mut entries = self.entries.clone();
                        entries.push((sub, idx));
                        self.found.push((self.pairs.clone(), entries));
                    }
                }
                Continuation::Sub(c) => {
                    self.entries.push((sub, idx));
                    self.go(d.lexicon.sub_root(c), pos, depth, nulls);
                    self.entries.pop();
                }
            }
        }
        for &(sym, child) in d.lexicon.children(node) {
            for &p in &d.by_lexical[sym.0 as usize] {
                let s = d.surface_of[p as usize];
                let (npos, nnulls) = if s == Symbol::NULL {
                    if nulls >= MAX_NULL_RUN {
                        continue;
                    }
                    if self.null_total >= self.null_budget {
                        self.budget_hit = true;
                        continue;
                    }
                    (pos, nulls + 1)
                } else if pos < self.surface.len() && self.surface[pos] == s {
                    (pos + 1, 0)
                } else {
                    continue;
                };
                if self.rules {
                    if self.states.len() < (depth + 2) * n {
                        self.states.resize((depth + 2) * n, 0);
                    }
                    let (a, b) = self.states.split_at_mut((depth + 1) * n);
                    if !d.step(&a[depth * n..], p, &mut b[..n]) {
                        continue;
                    }
                }
                let null = (s == Symbol::NULL) as usize;
                self.null_total += null;
                self.pairs.push(p);
                self.go(child, npos, depth + 1, nnulls);
                self.pairs.pop();
                self.null_total -= null;
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Direction {
    Analyze,
    Generate,
}

/// Where a word failed.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Layer {
    /// It did not fail.
    None,
    /// No lexicon path matches it.
    Lexicon,
    /// Lexicon paths exist but rules block each of them.
    Rules,
}

#[derive(Clone, Debug)]
pub struct TraceStep {
    /// Position in the framed pair string.
    pub position: usize,
    pub pair: String,
    /// Automata that died on this pair (or, at the closing boundary, ended
    /// outside a final state).
    pub died: Vec<String>,
}

#[derive(Clone, Debug)]
pub struct TraceReport {
    pub direction: Direction,
    pub input: String,
    /// Number of candidate pair strings examined.
    pub candidates: usize,
    pub lexical: Option<String>,
    pub surface: Option<String>,
    pub gloss: Option<String>,
    /// For generation: whether the lexical string is a lexicon path.
    pub in_lexicon: bool,
    pub steps: Vec<TraceStep>,
    pub layer: Layer,
    pub outcome: Verdict,
}

impl TraceReport {
    fn unknown(direction: Direction, input: &str) -> TraceReport {
        TraceReport {
            direction,
            input: input.to_string(),
            candidates: 0,
            lexical: None,
            surface: None,
            gloss: None,
            in_lexicon: false,
            steps: Vec::new(),
            layer: Layer::Lexicon,
            outcome: Verdict {
                accepted: false,
                blockers: Vec::new(),
            },
        }
    }

    /// Distinct names of the blocking rules.
    pub fn blocking_rules(&self) -> Vec<String> {
        let mut v: Vec<String> = self.outcome.blockers.iter().map(|b| b.rule.clone()).collect();
        v.dedup();
        v
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        s.push_str(&format!("input\t{}\n", self.input));
        s.push_str(&format!("candidates\t{}\n", self.candidates));
        if let Some(l) = &self.lexical {
            s.push_str(&format!("lexical\t{l}\n"));
        }
        if let Some(x) = &self.surface {
            s.push_str(&format!("surface\t{x}\n"));
        }
        if let Some(g) = &self.gloss {
            s.push_str(&format!("gloss\t{g}\n"));
        }
        if self.direction == Direction::Generate {
            s.push_str(&format!("in lexicon\t{}\n", if self.in_lexicon { "yes" } else { "no" }));
        }
        for st in &self.steps {
            if st.died.is_empty() {
                s.push_str(&format!("{}\t{}\n", st.position, st.pair));
            } else {
                s.push_str(&format!("{}\t{}\tblocked by: {}\n", st.position, st.pair, st.died.join("; ")));
            }
        }
        let layer = match self.layer {
            Layer::None => "accepted",
            Layer::Lexicon => "rejected at the lexicon layer",
            Layer::Rules => "rejected at the rule layer",
        };
        s.push_str(&format!("outcome\t{layer}\n"));
        s
    }
}
