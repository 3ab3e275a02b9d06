use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use twolevel::engine::{CompileOptions, Description, Layer};
use twolevel::turkish::{self, parse_golden, run_case, syllabify_first, Polarity};

/// Two-level morphological analyzer and generator. Without --rules and
/// --lexicon the bundled Turkish description is used.
#[derive(Parser, Debug)]
#[command(name = "twolevel", version)]
struct Cli {
    /// Rules file.
    #[arg(long, global = true)]
    rules: Option<PathBuf>,
    /// Lexicon file; may be repeated. Defaults to the bundled lexicon.
    #[arg(long = "lexicon", global = true)]
    lexicons: Vec<PathBuf>,
    /// Worker threads for batch input.
    #[arg(long, short = 'j', default_value_t = 1, global = true,
          value_parser = clap::value_parser!(u32).range(1..))]
    jobs: u32,
    /// Print words per second to stderr after a batch.
    #[arg(long, global = true)]
    stats: bool,
    /// Exit 1 if any word has no result.
    #[arg(long, global = true)]
    strict: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Input {
    /// Words, or `-` to read one per line from stdin.
    words: Vec<String>,
    /// Read words from a file, one per line.
    #[arg(long, short = 'f')]
    file: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Analyze surface forms.
    Analyze(Input),
    /// Generate surface forms from lexical strings.
    Generate {
        #[command(flatten)]
        input: Input,
        /// Reject lexical strings that are not lexicon paths.
        #[arg(long)]
        validate_morphotactics: bool,
        /// Treat inputs as glosses such as `[ROOT=ev]+PLU+LOC`.
        #[arg(long)]
        gloss: bool,
    },
    /// Compile the description and print its size and lint warnings.
    Compile {
        /// Print the suffix sublexicons derived from the formula file.
        #[arg(long)]
        emit_lexicon: bool,
        /// Print the morphotactic coverage matrix.
        #[arg(long)]
        coverage: bool,
    },
    /// Run a golden corpus (the bundled one by default).
    Test {
        #[arg(long)]
        golden: Option<PathBuf>,
        /// Print every case, not only failures.
        #[arg(long, short = 'v')]
        verbose: bool,
    },
    /// Show the pair string and the rules blocking it.
    Trace {
        input: String,
        /// Treat the input as a lexical string.
        #[arg(long)]
        generate: bool,
        /// Surface form to align the lexical string with.
        #[arg(long, requires = "generate")]
        surface: Option<String>,
    },
    /// Mark the first syllable of root forms with `^`.
    Syllabify(Input),
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn load(cli: &Cli) -> Result<Description> {
    if cli.rules.is_none() && cli.lexicons.is_empty() {
        return Ok(turkish::load_turkish()?);
    }
    let rules = match &cli.rules {
        Some(p) => std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
        None => turkish::RULES.to_string(),
    };
    let lexicons: Vec<String> = if cli.lexicons.is_empty() {
        vec![turkish::ROOTS.to_string(), turkish::suffix_lexicon()?]
    } else {
        cli.lexicons
            .iter()
            .map(|p| std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display())))
            .collect::<Result<_>>()?
    };
    let refs: Vec<&str> = lexicons.iter().map(|s| s.as_str()).collect();
    Ok(Description::compile(&rules, &refs, &CompileOptions::default())?)
}

fn read_words(input: &Input) -> Result<Vec<String>> {
    fn take(r: &mut dyn BufRead, words: &mut Vec<String>) -> Result<()> {
        for line in r.lines() {
            let line = line?;
            let w = line.trim();
            if !w.is_empty() {
                words.push(w.to_string());
            }
        }
        Ok(())
    }
    let mut words = Vec::new();
    if let Some(p) = &input.file {
        let f = std::fs::File::open(p).with_context(|| format!("reading {}", p.display()))?;
        take(&mut io::BufReader::new(f), &mut words)?;
    }
    for w in &input.words {
        if w == "-" {
            take(&mut io::stdin().lock(), &mut words)?;
        } else {
            words.push(w.clone());
        }
    }
    if words.is_empty() {
        bail!("no input words");
    }
    Ok(words)
}

/// Maps `f` over the words on `jobs` threads, keeping input order.
fn batch<T: Send>(jobs: u32, words: &[String], f: impl Fn(&str) -> T + Sync + Send) -> Result<Vec<T>> {
    if jobs == 1 {
        return Ok(words.iter().map(|w| f(w)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs as usize).build()?;
    Ok(pool.install(|| words.par_iter().map(|w| f(w)).collect()))
}

fn report_stats(stats: bool, n: usize, start: Instant) {
    if stats {
        let secs = start.elapsed().as_secs_f64();
        eprintln!("{n} words in {secs:.3} s ({:.0} words/sec)", n as f64 / secs.max(1e-9));
    }
}

fn run(cli: Cli) -> Result<bool> {
    let out = io::stdout();
    let mut out = io::BufWriter::new(out.lock());
    let ok = match &cli.command {
        Command::Syllabify(input) => {
            let words = read_words(input)?;
            let mut ok = true;
            for w in words {
                match syllabify_first(&w) {
                    Ok(s) => writeln!(out, "{s}")?,
                    Err(e) => {
                        eprintln!("{e}");
                        ok = false;
                    }
                }
            }
            ok
        }
        Command::Analyze(input) => {
            let words = read_words(input)?;
            let d = load(&cli)?;
            let start = Instant::now();
            let results = batch(cli.jobs, &words, |w| d.analyze(w))?;
            report_stats(cli.stats, words.len(), start);
            let mut all = true;
            for (w, analyses) in words.iter().zip(&results) {
                writeln!(out, "{w}")?;
                if analyses.is_empty() {
                    writeln!(out, "*NONE*")?;
                    all = false;
                }
                for a in analyses {
                    writeln!(out, "{}\t{}", a.lexical, a.gloss)?;
                }
                writeln!(out)?;
            }
            all || !cli.strict
        }
        Command::Generate {
            input,
            validate_morphotactics,
            gloss,
        } => {
            let words = read_words(input)?;
            let d = load(&cli)?;
            let start = Instant::now();
            let results = batch(cli.jobs, &words, |w| {
                if *gloss {
                    let Some((root, tags)) = turkish::split_gloss(w) else {
                        return Err(format!("malformed gloss `{w}`"));
                    };
                    let tags: Vec<&str> = tags.iter().map(|t| t.as_str()).collect();
                    d.generate_from_gloss(&root, &tags).map_err(|e| e.to_string())
                } else {
                    d.generate(w, *validate_morphotactics).map_err(|e| e.to_string())
                }
            })?;
            report_stats(cli.stats, words.len(), start);
            let mut all = true;
            for (w, r) in words.iter().zip(&results) {
                match r {
                    Ok(forms) if !forms.is_empty() => {
                        for f in forms {
                            writeln!(out, "{f}")?;
                        }
                    }
                    Ok(_) => {
                        eprintln!("{w}: no surface form");
                        all = false;
                    }
                    Err(e) => {
                        eprintln!("{w}: {e}");
                        all = false;
                    }
                }
            }
            all || !cli.strict
        }
        Command::Compile {
            emit_lexicon,
            coverage,
        } => {
            let d = load(&cli)?;
            let states: usize = d.automata.iter().map(|a| a.dfa.n_states()).sum();
            let entries: usize = d.lexicon.sublexicons.values().map(|v| v.len()).sum();
            writeln!(out, "ground rules\t{}", d.ground_rules.len())?;
            writeln!(out, "feasible pairs\t{}", d.alphabet.len())?;
            writeln!(out, "automata\t{}", d.automata.len())?;
            writeln!(out, "automaton states\t{states}")?;
            writeln!(out, "sublexicons\t{}", d.lexicon.sublexicons.len())?;
            writeln!(out, "entries\t{entries}")?;
            for name in d.lexicon.unreachable() {
                writeln!(out, "warning\tsublexicon {name} is unreachable")?;
            }
            let bundled = cli.lexicons.is_empty();
            if *emit_lexicon && bundled {
                write!(out, "{}", turkish::suffix_lexicon()?)?;
            }
            if *coverage && bundled {
                write!(out, "{}", turkish::morphotactics()?.coverage_matrix()?)?;
            }
            if (*emit_lexicon || *coverage) && !bundled {
                bail!("--emit-lexicon and --coverage apply to the bundled lexicon only");
            }
            true
        }
        Command::Test { golden, verbose } => {
            let cases = match golden {
                Some(p) => parse_golden(
                    &std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?,
                ),
                None => turkish::golden_suite(),
            };
            let d = load(&cli)?;
            let results: Vec<_> = {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(cli.jobs as usize).build()?;
                pool.install(|| cases.par_iter().map(|c| run_case(&d, c)).collect())
            };
            let mut failed = 0;
            for r in &results {
                let pol = match r.case.polarity {
                    Polarity::Positive => "+",
                    Polarity::Negative => "-",
                };
                if !r.pass {
                    failed += 1;
                    writeln!(out, "FAIL\t{}\t{pol}{}\t{}\t{}", r.case.source, r.case.surface, r.case.gloss, r.detail)?;
                } else if *verbose {
                    writeln!(out, "ok\t{}\t{pol}{}\t{}", r.case.source, r.case.surface, r.case.gloss)?;
                }
            }
            if failed == 0 {
                writeln!(out, "all {} cases pass", results.len())?;
            } else {
                writeln!(out, "{failed} of {} cases fail", results.len())?;
            }
            failed == 0
        }
        Command::Trace {
            input,
            generate,
            surface,
        } => {
            let d = load(&cli)?;
            let r = if *generate {
                d.trace_generate(input, surface.as_deref())
            } else {
                d.trace_analyze(input)
            };
            write!(out, "{}", r.render())?;
            r.layer == Layer::None || !cli.strict
        }
    };
    out.flush()?;
    Ok(ok)
}
