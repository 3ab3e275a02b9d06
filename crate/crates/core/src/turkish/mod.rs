//! The bundled Turkish description.

pub mod morphotactics;

use std::sync::OnceLock;

use thiserror::Error;

use crate::engine::{CompileOptions, Description, DescriptionError, GenerateError, Layer};
use morphotactics::{parse_formula_file, FormulaError, Morphotactics};

pub const RULES: &str = include_str!("../../data/turkish.rules");
pub const ROOTS: &str = include_str!("../../data/roots.lex");
pub const FORMULAS: &str = include_str!("../../data/morphotactics.txt");
pub const GOLDEN: &str = include_str!("../../data/golden.tsv");
pub const COVERAGE: &str = include_str!("../../data/coverage.tsv");

#[derive(Debug, Error)]
pub enum LoadError {
    #[error(transparent)]
    Formula(#[from] FormulaError),
    #[error(transparent)]
    Description(#[from] DescriptionError),
}

pub fn morphotactics() -> Result<Morphotactics, FormulaError> {
    parse_formula_file(FORMULAS)?.expand()
}

/// The generated suffix sublexicons.
pub fn suffix_lexicon() -> Result<String, FormulaError> {
    Ok(morphotactics()?.lexicon_text())
}

pub fn load_turkish_with(opts: &CompileOptions) -> Result<Description, LoadError> {
    let suffixes = suffix_lexicon()?;
    Ok(Description::compile(RULES, &[ROOTS, &suffixes], opts)?)
}

pub fn load_turkish() -> Result<Description, LoadError> {
    load_turkish_with(&CompileOptions::default())
}

/// A process-wide compiled copy of the bundled description.
pub fn turkish() -> &'static Description {
    static CELL: OnceLock<Description> = OnceLock::new();
    CELL.get_or_init(|| load_turkish().expect("bundled Turkish description compiles"))
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SyllabifyError {
    #[error("`{0}` has no vowel")]
    NoVowel(String),
    #[error("`{0}` is already marked")]
    Marked(String),
}

/// Vowels and vowel archiphonemes.
pub fn is_vowel(c: char) -> bool {
    "aeıioöuüáèóúâîûAHEIU".contains(c)
}

/// Inserts `^` after the first syllable.
pub fn syllabify_first(word: &str) -> Result<String, SyllabifyError> {
    if word.contains('^') {
        return Err(SyllabifyError::Marked(word.to_string()));
    }
    let chars: Vec<char> = word.chars().collect();
    let Some(v1) = chars.iter().position(|&c| is_vowel(c)) else {
        return Err(SyllabifyError::NoVowel(word.to_string()));
    };
    let cut = match chars[v1 + 1..].iter().position(|&c| is_vowel(c)) {
        None => chars.len(),
        Some(off) => {
            let v2 = v1 + 1 + off;
            // Of the consonants between the two vowels only the last one
            // opens the second syllable.
            if v2 == v1 + 1 {
                v2
            } else {
                v2 - 1
            }
        }
    };
    let mut out: String = chars[..cut].iter().collect();
    out.push('^');
    out.extend(&chars[cut..]);
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarity {
    Positive,
    Negative,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GoldenCase {
    pub surface: String,
    pub lexical: String,
    pub gloss: String,
    pub polarity: Polarity,
    pub source: String,
}

pub fn parse_golden(text: &str) -> Vec<GoldenCase> {
    text.lines()
        .skip(1)
        .filter(|l| !l.trim().is_empty() && !l.starts_with('!'))
        .map(|l| {
            let f: Vec<&str> = l.split('\t').collect();
            let get = |i: usize| f.get(i).map(|s| s.trim().to_string()).unwrap_or_default();
            GoldenCase {
                surface: get(0),
                lexical: get(1),
                gloss: get(2),
                polarity: if get(3) == "negative" {
                    Polarity::Negative
                } else {
                    Polarity::Positive
                },
                source: get(4),
            }
        })
        .collect()
}

pub fn golden_suite() -> Vec<GoldenCase> {
    parse_golden(GOLDEN)
}

/// Outcome of one golden case against a description.
#[derive(Clone, Debug)]
pub struct CaseResult {
    pub case: GoldenCase,
    pub pass: bool,
    pub detail: String,
    /// For a negative case, the layer that rejects it.
    pub layer: Option<Layer>,
}

impl GoldenCase {
    /// The layer a negative case is expected to fail at, from the last word
    /// of its source column.
    pub fn expected_layer(&self) -> Option<Layer> {
        match self.source.split_whitespace().last() {
            Some("lexicon") => Some(Layer::Lexicon),
            Some("rules") => Some(Layer::Rules),
            _ => None,
        }
    }
}

/// The layer rejecting a negative case. With a gloss, the reading is
/// rejected by the lexicon if no path carries that gloss. Otherwise the
/// lexical string is traced against the surface.
pub fn rejection_layer(d: &Description, case: &GoldenCase) -> Layer {
    if let Some((root, tags)) = split_gloss(&case.gloss) {
        let tags: Vec<&str> = tags.iter().map(|s| s.as_str()).collect();
        if let Err(GenerateError::Morphotactics { .. }) = d.generate_from_gloss(&root, &tags) {
            return Layer::Lexicon;
        }
    }
    d.trace_generate(&case.lexical, Some(&case.surface)).layer
}

/// Splits a gloss such as `[ROOT=ev]+LOC+PLU` into its root and tags.
pub fn split_gloss(gloss: &str) -> Option<(String, Vec<String>)> {
    let rest = gloss.strip_prefix("[ROOT=")?;
    let close = rest.find(']')?;
    let root = rest[..close].to_string();
    let tags = rest[close + 1..]
        .split('+')
        .filter(|t| !t.is_empty())
        .map(|t| t.to_string())
        .collect();
    Some((root, tags))
}

/// Positive: generate(lexical) contains the surface and analyze(surface)
/// contains (lexical, gloss). Negative: no analysis of the surface has the
/// starred gloss (any analysis at all when the gloss is blank), generating
/// from a given gloss fails on morphotactics, and the rejecting layer is the
/// one named in the source column.
pub fn run_case(d: &Description, case: &GoldenCase) -> CaseResult {
    let analyses = d.analyze(&case.surface);
    let (pass, detail) = match case.polarity {
        Polarity::Positive => {
            let generated = d.generate(&case.lexical, true);
            let gen_ok = generated
                .as_ref()
                .map(|g| g.contains(&case.surface))
                .unwrap_or(false);
            let ana_ok = analyses
                .iter()
                .any(|a| a.lexical == case.lexical && a.gloss == case.gloss);
            let detail = format!(
                "generate: {:?}; analyze: {:?}",
                generated,
                analyses
                    .iter()
                    .map(|a| format!("{} {}", a.lexical, a.gloss))
                    .collect::<Vec<_>>()
            );
            (gen_ok && ana_ok, detail)
        }
        Polarity::Negative => {
            let mut ok = true;
            let mut detail = String::new();
            if case.surface != "-" && !analyses.is_empty() {
                // A starred gloss only forbids that reading of the surface.
                let offending: Vec<String> = analyses
                    .iter()
                    .filter(|a| case.gloss.is_empty() || a.gloss == case.gloss)
                    .map(|a| format!("{} {}", a.lexical, a.gloss))
                    .collect();
                if !offending.is_empty() {
                    ok = false;
                    detail = format!("analyzed as {offending:?}");
                }
            }
            if !case.gloss.is_empty() {
                match split_gloss(&case.gloss) {
                    Some((root, tags)) => {
                        let tags: Vec<&str> = tags.iter().map(|s| s.as_str()).collect();
                        match d.generate_from_gloss(&root, &tags) {
                            Err(GenerateError::Morphotactics { .. }) => {}
                            other => {
                                ok = false;
                                detail.push_str(&format!(" gloss generates {other:?}"));
                            }
                        }
                    }
                    None => {
                        ok = false;
                        detail.push_str(" malformed gloss");
                    }
                }
            }
            (ok, detail)
        }
    };
    let layer = (case.polarity == Polarity::Negative).then(|| rejection_layer(d, case));
    let mut pass = pass;
    let mut detail = detail;
    if let (Some(got), Some(want)) = (layer, case.expected_layer()) {
        if got != want {
            pass = false;
            detail.push_str(&format!(" rejected at {got:?}, expected {want:?}"));
        }
    }
    CaseResult {
        case: case.clone(),
        pass,
        detail,
        layer,
    }
}
