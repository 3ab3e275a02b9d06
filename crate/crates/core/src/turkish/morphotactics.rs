//! Formula files: morphotactic formulas over suffix classes, expanded into
//! continuation-class sublexicons.
//!
//! The formulas of every section are unioned and determinized over class
//! labels, then minimized. Each DFA state becomes a `LEXICON`; an edge on a
//! class becomes that class's entries, continuing to the edge's target. States
//! reached by an `ENTRY` class from the start are named after it, so root
//! lexicons can continue into them. `@X` is an empty entry to the state of
//! entry `X`.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::Write as _;

use thiserror::Error;

use crate::pair_regex::{dfa::compile_expr, PairDfa, PairExpr, PairSet, DEAD};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FormulaError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("section {section}: unknown name `{name}`")]
    Unknown { section: String, name: String },
    #[error("formula `{0}` refers to itself")]
    Recursive(String),
    #[error("section {0} has no WORD formula")]
    NoWord(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassEntry {
    pub gloss: String,
    pub form: String,
}

#[derive(Clone, Debug, Default)]
struct Section {
    name: String,
    classes: BTreeMap<String, Vec<ClassEntry>>,
    nulls: BTreeSet<String>,
    formulas: BTreeMap<String, (usize, String)>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Entry(String),
    Class { section: String, name: String },
    Jump(String),
}

/// A parsed formula file.
#[derive(Clone, Debug, Default)]
pub struct FormulaFile {
    sections: Vec<Section>,
    entries: Vec<String>,
}

/// The expansion of a formula file.
#[derive(Clone, Debug)]
pub struct Morphotactics {
    pub labels: Vec<Label>,
    pub dfa: PairDfa,
    /// Sublexicon name of each DFA state.
    pub state_names: Vec<String>,
    file: FormulaFile,
}

fn strip_comment(line: &str) -> &str {
    match line.find('!') {
        Some(i) => &line[..i],
        None => line,
    }
}

fn is_ident(t: &str) -> bool {
    !t.is_empty() && t.chars().all(|c| c.is_alphanumeric() || c == '_')
}

pub fn parse_formula_file(text: &str) -> Result<FormulaFile, FormulaError> {
    let mut file = FormulaFile::default();
    let mut class: Option<String> = None;
    let mut pending: Option<(usize, String, String)> = None;
    for (n, raw) in text.lines().enumerate() {
        let line_no = n + 1;
        let line = strip_comment(raw).trim();
        if let Some((_, _, body)) = pending.as_mut() {
            body.push(' ');
            body.push_str(line);
            if line.contains(';') {
                let (l, name, body) = pending.take().unwrap();
                finish_formula(&mut file, l, name, body)?;
            }
            continue;
        }
        if line.is_empty() {
            class = None;
            continue;
        }
        let syntax = |m: &str| FormulaError::Syntax {
            line: line_no,
            message: m.to_string(),
        };
        let mut words = line.split_whitespace();
        let head = words.next().unwrap();
        match head {
            "SECTION" => {
                let name = words.next().ok_or_else(|| syntax("SECTION needs a name"))?;
                file.sections.push(Section {
                    name: name.to_string(),
                    ..Section::default()
                });
                class = None;
            }
            "ENTRY" | "CLASS" | "NULL" => {
                let name = words
                    .next()
                    .filter(|w| is_ident(w))
                    .ok_or_else(|| syntax("expected a name"))?
                    .to_string();
                let sec = file
                    .sections
                    .last_mut()
                    .ok_or_else(|| syntax("declaration outside a SECTION"))?;
                match head {
                    "ENTRY" => {
                        file.entries.push(name);
                        class = None;
                    }
                    "NULL" => {
                        sec.nulls.insert(name);
                        class = None;
                    }
                    _ => {
                        sec.classes.entry(name.clone()).or_default();
                        class = Some(name);
                    }
                }
            }
            _ if line.contains('=') => {
                let eq = line.find('=').unwrap();
                let name = line[..eq].trim();
                if !is_ident(name) {
                    return Err(syntax("bad formula name"));
                }
                let body = line[eq + 1..].to_string();
                if body.contains(';') {
                    finish_formula(&mut file, line_no, name.to_string(), body)?;
                } else {
                    pending = Some((line_no, name.to_string(), body));
                }
                class = None;
            }
            _ => {
                let Some(c) = &class else {
                    return Err(syntax("entry outside a CLASS"));
                };
                let (Some(form), None) = (words.next(), words.next()) else {
                    return Err(syntax("class entries are `gloss form`"));
                };
                let sec = file.sections.last_mut().unwrap();
                sec.classes.get_mut(c).unwrap().push(ClassEntry {
                    gloss: head.to_string(),
                    form: form.to_string(),
                });
            }
        }
    }
    if let Some((line, _, _)) = pending {
        return Err(FormulaError::Syntax {
            line,
            message: "formula is missing its `;`".into(),
        });
    }
    Ok(file)
}

fn finish_formula(
    file: &mut FormulaFile,
    line: usize,
    name: String,
    body: String,
) -> Result<(), FormulaError> {
    let semi = body.find(';').unwrap();
    if !body[semi + 1..].trim().is_empty() {
        return Err(FormulaError::Syntax {
            line,
            message: "text after `;`".into(),
        });
    }
    let sec = file.sections.last_mut().ok_or(FormulaError::Syntax {
        line,
        message: "formula outside a SECTION".into(),
    })?;
    sec.formulas.insert(name, (line, body[..semi].to_string()));
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Name(String),
    Jump(String),
    Plus,
    LParen,
    RParen,
    Star,
    Query,
}

fn tokenize(text: &str, line: usize) -> Result<Vec<Tok>, FormulaError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let simple = match c {
            '+' => Some(Tok::Plus),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '*' => Some(Tok::Star),
            '?' => Some(Tok::Query),
            _ => None,
        };
        if let Some(t) = simple {
            out.push(t);
            i += 1;
        } else if c.is_whitespace() {
            i += 1;
        } else {
            let jump = c == '@';
            if jump {
                i += 1;
            }
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            if start == i {
                return Err(FormulaError::Syntax {
                    line,
                    message: format!("unexpected `{c}`"),
                });
            }
            let name: String = chars[start..i].iter().collect();
            out.push(if jump { Tok::Jump(name) } else { Tok::Name(name) });
        }
    }
    Ok(out)
}

struct Expander<'a> {
    file: &'a FormulaFile,
    sec: &'a Section,
    labels: &'a mut Vec<Label>,
    active: Vec<String>,
}

impl Expander<'_> {
    fn label(&mut self, l: Label) -> PairExpr {
        let i = match self.labels.iter().position(|x| *x == l) {
            Some(i) => i,
            None => {
                self.labels.push(l);
                self.labels.len() - 1
            }
        };
        // Sets are sized later; a one-element placeholder keeps the index.
        let mut s = PairSet::empty(i + 1);
        s.insert(i as u32);
        PairExpr::Set(s)
    }

    fn formula(&mut self, name: &str) -> Result<PairExpr, FormulaError> {
        if self.active.iter().any(|a| a == name) {
            return Err(FormulaError::Recursive(name.to_string()));
        }
        let (line, body) = self.sec.formulas[name].clone();
        self.active.push(name.to_string());
        let toks = tokenize(&body, line)?;
        let mut pos = 0;
        let e = self.union(&toks, &mut pos, line)?;
        if pos != toks.len() {
            return Err(FormulaError::Syntax {
                line,
                message: format!("unexpected {:?} in `{name}`", toks[pos]),
            });
        }
        self.active.pop();
        Ok(e)
    }

    fn union(&mut self, t: &[Tok], pos: &mut usize, line: usize) -> Result<PairExpr, FormulaError> {
        let mut alts = vec![self.concat(t, pos, line)?];
        while t.get(*pos) == Some(&Tok::Plus) {
            *pos += 1;
            alts.push(self.concat(t, pos, line)?);
        }
        Ok(if alts.len() == 1 {
            alts.pop().unwrap()
        } else {
            PairExpr::Union(alts)
        })
    }

    fn concat(&mut self, t: &[Tok], pos: &mut usize, line: usize) -> Result<PairExpr, FormulaError> {
        let mut items = Vec::new();
        while let Some(tok) = t.get(*pos) {
            if matches!(tok, Tok::Plus | Tok::RParen) {
                break;
            }
            let mut e = self.atom(t, pos, line)?;
            loop {
                match t.get(*pos) {
                    Some(Tok::Star) => e = PairExpr::star(e),
                    Some(Tok::Query) => e = PairExpr::Union(vec![e, PairExpr::Epsilon]),
                    _ => break,
                }
                *pos += 1;
            }
            items.push(e);
        }
        if items.is_empty() {
            return Err(FormulaError::Syntax {
                line,
                message: "empty alternative".into(),
            });
        }
        Ok(PairExpr::concat(items))
    }

    fn atom(&mut self, t: &[Tok], pos: &mut usize, line: usize) -> Result<PairExpr, FormulaError> {
        let tok = t[*pos].clone();
        *pos += 1;
        match tok {
            Tok::LParen => {
                let e = self.union(t, pos, line)?;
                if t.get(*pos) != Some(&Tok::RParen) {
                    return Err(FormulaError::Syntax {
                        line,
                        message: "missing `)`".into(),
                    });
                }
                *pos += 1;
                Ok(e)
            }
            Tok::Jump(n) => {
                if !self.file.entries.contains(&n) {
                    return Err(self.unknown(&n));
                }
                Ok(self.label(Label::Jump(n)))
            }
            Tok::Name(n) => {
                if let Some(e) = self.name(&n)? {
                    return Ok(e);
                }
                // A lowercase initial marks an optional occurrence.
                let mut c = n.chars();
                let first = c.next().unwrap();
                if first.is_lowercase() {
                    let upper: String = first.to_uppercase().chain(c).collect();
                    if let Some(e) = self.name(&upper)? {
                        return Ok(PairExpr::Union(vec![e, PairExpr::Epsilon]));
                    }
                }
                Err(self.unknown(&n))
            }
            other => Err(FormulaError::Syntax {
                line,
                message: format!("unexpected {other:?}"),
            }),
        }
    }

    fn name(&mut self, n: &str) -> Result<Option<PairExpr>, FormulaError> {
        if self.sec.formulas.contains_key(n) {
            return self.formula(n).map(Some);
        }
        if self.sec.nulls.contains(n) {
            return Ok(Some(PairExpr::Epsilon));
        }
        if self.sec.classes.contains_key(n) {
            return Ok(Some(self.label(Label::Class {
                section: self.sec.name.clone(),
                name: n.to_string(),
            })));
        }
        if self.file.entries.iter().any(|e| e == n) {
            return Ok(Some(self.label(Label::Entry(n.to_string()))));
        }
        Ok(None)
    }

    fn unknown(&self, n: &str) -> FormulaError {
        FormulaError::Unknown {
            section: self.sec.name.clone(),
            name: n.to_string(),
        }
    }
}

/// Widens every set in `e` to `n` labels.
fn widen(e: &PairExpr, n: usize) -> PairExpr {
    match e {
        PairExpr::Set(s) => {
            let mut w = PairSet::empty(n);
            for i in s.iter() {
                w.insert(i);
            }
            PairExpr::Set(w)
        }
        PairExpr::Concat(v) => PairExpr::Concat(v.iter().map(|x| widen(x, n)).collect()),
        PairExpr::Union(v) => PairExpr::Union(v.iter().map(|x| widen(x, n)).collect()),
        PairExpr::Star(x) => PairExpr::Star(Box::new(widen(x, n))),
        PairExpr::Diff(a, b) => PairExpr::Diff(Box::new(widen(a, n)), Box::new(widen(b, n))),
        other => other.clone(),
    }
}

impl FormulaFile {
    pub fn class_entries(&self, section: &str, class: &str) -> Option<&[ClassEntry]> {
        self.sections
            .iter()
            .find(|s| s.name == section)
            .and_then(|s| s.classes.get(class))
            .map(|v| v.as_slice())
    }

    /// Every (section, class) pair, in file order of sections.
    pub fn classes(&self) -> Vec<(String, String)> {
        self.sections
            .iter()
            .flat_map(|s| s.classes.keys().map(move |c| (s.name.clone(), c.clone())))
            .collect()
    }

    /// Classes and entries referenced, directly or through sub-formulas, by
    /// formula `name` of `section`.
    pub fn formula_classes(&self, section: &str, name: &str) -> Result<Vec<Label>, FormulaError> {
        let sec = self
            .sections
            .iter()
            .find(|s| s.name == section)
            .ok_or_else(|| FormulaError::NoWord(section.to_string()))?;
        let mut labels = Vec::new();
        let mut ex = Expander {
            file: self,
            sec,
            labels: &mut labels,
            active: Vec::new(),
        };
        ex.formula(name)?;
        labels.sort();
        Ok(labels)
    }

    pub fn formula_names(&self, section: &str) -> Vec<String> {
        self.sections
            .iter()
            .find(|s| s.name == section)
            .map(|s| s.formulas.keys().cloned().collect())
            .unwrap_or_default()
    }

    pub fn section_names(&self) -> Vec<String> {
        self.sections.iter().map(|s| s.name.clone()).collect()
    }

    pub fn expand(&self) -> Result<Morphotactics, FormulaError> {
        let mut labels = Vec::new();
        let mut words = Vec::new();
        for sec in &self.sections {
            if !sec.formulas.contains_key("WORD") {
                return Err(FormulaError::NoWord(sec.name.clone()));
            }
            let mut ex = Expander {
                file: self,
                sec,
                labels: &mut labels,
                active: Vec::new(),
            };
            words.push(ex.formula("WORD")?);
        }
        let n = labels.len();
        let word = widen(&PairExpr::Union(words), n);
        let dfa = compile_expr(&word, n, 0);

        let mut state_names = vec![String::new(); dfa.n_states()];
        state_names[dfa.start() as usize] = "Root".into();
        for e in &self.entries {
            let li = labels.iter().position(|l| *l == Label::Entry(e.clone()));
            if let Some(li) = li {
                let t = dfa.next(dfa.start(), li as u32);
                if t != DEAD && state_names[t as usize].is_empty() {
                    state_names[t as usize] = e.clone();
                }
            }
        }
        let mut k = 0;
        for name in state_names.iter_mut() {
            if name.is_empty() {
                k += 1;
                *name = format!("S{k}");
            }
        }
        Ok(Morphotactics {
            labels,
            dfa,
            state_names,
            file: self.clone(),
        })
    }
}

impl Morphotactics {
    /// Number of DFA edges carrying each label.
    pub fn edge_counts(&self) -> HashMap<Label, usize> {
        let mut out = HashMap::new();
        for s in 0..self.dfa.n_states() as u32 {
            for (i, l) in self.labels.iter().enumerate() {
                if self.dfa.next(s, i as u32) != DEAD {
                    *out.entry(l.clone()).or_insert(0) += 1;
                }
            }
        }
        out
    }

    /// Sublexicons for every state except the start, whose entries are the
    /// roots. Entry names that share a state get an alias sublexicon.
    pub fn lexicon_text(&self) -> String {
        let mut out = String::new();
        let start = self.dfa.start();
        for s in 0..self.dfa.n_states() as u32 {
            if s == start {
                continue;
            }
            let _ = writeln!(out, "LEXICON {}", self.state_names[s as usize]);
            for (i, l) in self.labels.iter().enumerate() {
                let t = self.dfa.next(s, i as u32);
                if t == DEAD {
                    continue;
                }
                match l {
                    Label::Class { section, name } => {
                        let target = &self.state_names[t as usize];
                        for e in self.file.class_entries(section, name).unwrap() {
                            let _ = writeln!(out, "{}:{} {target} ;", e.gloss, e.form);
                        }
                    }
                    Label::Jump(n) => {
                        let _ = writeln!(out, "{} ;", self.entry_state(n));
                    }
                    Label::Entry(_) => {}
                }
            }
            if self.dfa.is_final(s) {
                let _ = writeln!(out, "# ;");
            }
            out.push('\n');
        }
        for e in &self.file.entries {
            let name = self.entry_state(e);
            if name != *e {
                let _ = writeln!(out, "LEXICON {e}\n{name} ;\n");
            }
        }
        out
    }

    fn entry_state(&self, entry: &str) -> String {
        let li = self
            .labels
            .iter()
            .position(|l| *l == Label::Entry(entry.to_string()));
        match li.map(|i| self.dfa.next(self.dfa.start(), i as u32)) {
            Some(t) if t != DEAD => self.state_names[t as usize].clone(),
            _ => entry.to_string(),
        }
    }

    /// One row per class: section, class, entries, the formulas that use it
    /// and the number of continuation edges it labels.
    pub fn coverage_matrix(&self) -> Result<String, FormulaError> {
        let counts = self.edge_counts();
        let mut out = String::from("section\tclass\tmorphemes\tformulas\tedges\n");
        for (sec, class) in self.file.classes() {
            let label = Label::Class {
                section: sec.clone(),
                name: class.clone(),
            };
            let mut users = Vec::new();
            for f in self.file.formula_names(&sec) {
                if self.file.formula_classes(&sec, &f)?.contains(&label) {
                    users.push(f);
                }
            }
            let morphs: Vec<String> = self
                .file
                .class_entries(&sec, &class)
                .unwrap()
                .iter()
                .map(|e| format!("{}{}", e.form, e.gloss))
                .collect();
            let _ = writeln!(
                out,
                "{sec}\t{class}\t{}\t{}\t{}",
                morphs.join(" "),
                users.join(" "),
                counts.get(&label).copied().unwrap_or(0)
            );
        }
        Ok(out)
    }
}
