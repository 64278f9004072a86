//! `lexdiv` command-line interface: `freq`, `analyze` and `compare`.
//!
//! Exit codes: 0 success, 1 usage error, 2 input/parse error, 3 a requested
//! metric (or every metric) could not be computed.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use log::warn;

use crate::config::RunConfig;
use crate::corpus::{
    build_frequency_table, exclude_tokens, load_annotated, load_plain_text, AnnotatedCorpus, AnnotatedFormat,
    AnnotationLevel, FrequencyTable,
};
use crate::error::Error;
use crate::lexical::{lexical_scores, lfp};
use crate::morphology::{aggregate, build_paradigms};
use crate::report::{assemble, compare, read_reports, render, InputFile, MetricResult, Provenance, RenderFormat};
use crate::synonyms::{extract_distributions, load_lexicon, synonym_scores};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INPUT: i32 = 2;
pub const EXIT_NO_METRIC: i32 = 3;

const READ_BUFFER: usize = 1 << 20;

#[derive(Debug, Parser)]
#[command(name = "lexdiv", version, about = "Lexical and morphological diversity metrics for corpora")]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build a frequency table (TSV) from a corpus.
    Freq(FreqArgs),
    /// Compute every metric whose inputs are available and emit a JSON report.
    Analyze(AnalyzeArgs),
    /// Render reports side by side with deltas against a baseline.
    Compare(CompareArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Text,
    Conllu,
    Tsv3,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutputFormat {
    Markdown,
    Csv,
    Json,
}

#[derive(Debug, Args)]
struct CorpusOptions {
    /// Input corpus format.
    #[arg(long, value_enum, default_value_t = InputFormat::Text)]
    format: InputFormat,
    /// key=value configuration file; flags override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Drop tokens with this surface before analysis (repeatable).
    #[arg(long = "exclude-token", value_name = "TOKEN")]
    exclude_token: Vec<String>,
    /// Case-fold surfaces (the default).
    #[arg(long, overrides_with = "no_lowercase")]
    lowercase: bool,
    /// Keep surfaces as written.
    #[arg(long = "no-lowercase", overrides_with = "lowercase")]
    no_lowercase: bool,
}

#[derive(Debug, Args)]
struct FreqArgs {
    input: PathBuf,
    #[command(flatten)]
    corpus: CorpusOptions,
    /// Output TSV path (standard output if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct AnalyzeArgs {
    input: PathBuf,
    #[command(flatten)]
    corpus: CorpusOptions,
    /// Reference frequency table (from `lexdiv freq`) for the frequency profile.
    #[arg(long)]
    reference: Option<PathBuf>,
    /// Bilingual lexicon TSV for the synonym metrics.
    #[arg(long)]
    lexicon: Option<PathBuf>,
    /// Lemmatized source-side corpus for the synonym metrics.
    #[arg(long)]
    source: Option<PathBuf>,
    /// Format of --source (defaults to --format when that is lemmatized, else conllu).
    #[arg(long, value_enum)]
    source_format: Option<InputFormat>,
    /// System label, e.g. ORIG or TRANS (defaults to the input file stem).
    #[arg(long)]
    label: Option<String>,
    /// ISO 639-1 code of the input corpus.
    #[arg(long, default_value = "und")]
    language: String,
    /// ISO 639-1 code of the source corpus.
    #[arg(long, default_value = "und")]
    source_language: String,
    /// Output JSON path (standard output if omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CompareArgs {
    /// Report JSON files (single reports or rendered JSON comparisons).
    #[arg(required = true)]
    reports: Vec<PathBuf>,
    #[arg(long)]
    baseline: String,
    #[arg(long, value_enum, default_value_t = OutputFormat::Markdown)]
    output_format: OutputFormat,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Self { code, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) | Error::InvalidParameter(_) | Error::MissingBaseline(_) => EXIT_USAGE,
            Error::NoMetrics => EXIT_NO_METRIC,
            _ => EXIT_INPUT,
        };
        Failure::new(code, e.to_string())
    }
}

fn with_path(path: &Path) -> impl Fn(Error) -> Failure + '_ {
    move |e| {
        let f = Failure::from(e);
        Failure::new(f.code, format!("{}: {}", path.display(), f.message))
    }
}

pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let result = match cli.command {
        Command::Freq(a) => cmd_freq(&a),
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Compare(a) => cmd_compare(&a),
    };
    match result {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            f.code
        }
    }
}

fn run_config(opts: &CorpusOptions) -> Result<RunConfig, Failure> {
    let mut config = match &opts.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::new(EXIT_USAGE, format!("{}: {e}", path.display())))?;
            RunConfig::from_kv_text(&text).map_err(with_path(path))?
        }
        None => RunConfig::default(),
    };
    if opts.lowercase {
        config.lowercase = true;
    }
    if opts.no_lowercase {
        config.lowercase = false;
    }
    if !opts.exclude_token.is_empty() {
        config.unk_tokens = opts.exclude_token.iter().cloned().collect();
        config.exclude_unk = true;
    }
    config.validate()?;
    Ok(config)
}

fn load_corpus(path: &Path, format: InputFormat, config: &RunConfig) -> Result<AnnotatedCorpus, Failure> {
    let file = File::open(path).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
    let reader = BufReader::with_capacity(READ_BUFFER, file);
    let norm = config.normalization();
    let corpus = match format {
        InputFormat::Text => load_plain_text(reader, &norm),
        InputFormat::Conllu => load_annotated(reader, AnnotatedFormat::Conllu, &norm),
        InputFormat::Tsv3 => load_annotated(reader, AnnotatedFormat::Tsv3, &norm),
    }
    .map_err(with_path(path))?;
    let excluded = config.exclusion_list();
    Ok(if excluded.is_empty() { corpus } else { exclude_tokens(&corpus, &excluded) })
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, Failure> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_all(path: Option<&Path>, bytes: &[u8]) -> Result<(), Failure> {
    let mut w = output(path)?;
    w.write_all(bytes)
        .and_then(|_| w.flush())
        .map_err(|e| Failure::new(EXIT_INPUT, format!("write failed: {e}")))
}

fn cmd_freq(args: &FreqArgs) -> Result<i32, Failure> {
    let config = run_config(&args.corpus)?;
    let corpus = load_corpus(&args.input, args.corpus.format, &config)?;
    let table = build_frequency_table(&corpus)
        .map_err(with_path(&args.input))?
        .with_config_digest(config.tokenization_digest());
    let mut buf = Vec::new();
    table.write_tsv(&mut buf)?;
    write_all(args.out.as_deref(), &buf)?;
    let summary = format!("total_tokens={} types={}", table.total_tokens(), table.len());
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(EXIT_OK)
}

fn input_file(role: &str, path: &Path) -> InputFile {
    InputFile {
        role: role.to_string(),
        path: path.display().to_string(),
        bytes: fs::metadata(path).map(|m| m.len()).unwrap_or(0),
    }
}

fn is_lemmatized(format: InputFormat) -> bool {
    matches!(format, InputFormat::Conllu | InputFormat::Tsv3)
}

type Outcome = Option<Result<MetricResult, Error>>;

fn cmd_analyze(args: &AnalyzeArgs) -> Result<i32, Failure> {
    let config = run_config(&args.corpus)?;
    let format = args.corpus.format;
    let label = args.label.clone().unwrap_or_else(|| {
        args.input.file_stem().map_or_else(|| "corpus".to_string(), |s| s.to_string_lossy().into_owned())
    });
    let corpus = load_corpus(&args.input, format, &config)?.with_language(&args.language).with_label(&label);

    let mut inputs = vec![input_file("corpus", &args.input)];
    let mut skipped: Vec<String> = Vec::new();

    let reference = match &args.reference {
        Some(path) => {
            let file = File::open(path).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
            let table = FrequencyTable::read_tsv(BufReader::new(file)).map_err(with_path(path))?;
            match table.config_digest() {
                Some(d) if d == config.tokenization_digest() => {}
                Some(_) => warn!(
                    "reference {} was built with a different tokenization config (digest mismatch)",
                    path.display()
                ),
                None => warn!("reference {} carries no config digest; cannot verify tokenization", path.display()),
            }
            inputs.push(input_file("reference", path));
            Some(table)
        }
        None => {
            skipped.push("lexical frequency profile (missing --reference)".into());
            None
        }
    };

    let synonym_inputs = match (&args.lexicon, &args.source, is_lemmatized(format)) {
        (Some(lex_path), Some(src_path), true) => {
            let file =
                File::open(lex_path).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", lex_path.display())))?;
            let lexicon = load_lexicon(BufReader::new(file)).map_err(with_path(lex_path))?;
            let src_format = args
                .source_format
                .unwrap_or(if is_lemmatized(format) { format } else { InputFormat::Conllu });
            if !is_lemmatized(src_format) {
                return Err(Failure::new(EXIT_USAGE, "--source must be a lemmatized format (conllu or tsv3)"));
            }
            let source = load_corpus(src_path, src_format, &config)?.with_language(&args.source_language);
            inputs.push(input_file("lexicon", lex_path));
            inputs.push(input_file("source", src_path));
            Some((lexicon, source))
        }
        (lex, src, lemmatized) => {
            let mut missing = Vec::new();
            if lex.is_none() {
                missing.push("--lexicon");
            }
            if src.is_none() {
                missing.push("--source");
            }
            if !lemmatized {
                missing.push("lemmatized input (--format conllu|tsv3)");
            }
            skipped.push(format!("synonym metrics (missing {})", missing.join(", ")));
            None
        }
    };

    if !is_lemmatized(format) {
        skipped.push("morphological diversity (missing lemmatized input, --format conllu|tsv3)".into());
    }
    for s in &skipped {
        warn!("skipped {s}");
    }

    // Metric families are independent; results are collected in canonical order.
    let outcomes: [(&str, Outcome); 4] = std::thread::scope(|s| {
        let lexical = s.spawn(|| Some(lexical_scores(&corpus, config.mtld_threshold).map(MetricResult::Lexical)));
        let bands = s.spawn(|| {
            reference.as_ref().map(|r| lfp(&corpus, r, config.band_edges).map(MetricResult::Bands))
        });
        let synonyms = s.spawn(|| {
            synonym_inputs.as_ref().map(|(lexicon, source)| {
                let pos: Vec<_> = config.pos_filter.iter().copied().collect();
                extract_distributions(source, &corpus, lexicon, &pos)
                    .and_then(|d| synonym_scores(&d))
                    .map(MetricResult::Synonym)
            })
        });
        let morph = s.spawn(|| {
            (corpus.annotation_level() == AnnotationLevel::Lemmatized).then(|| {
                let excluded: Vec<_> = config.paradigm_pos_excluded.iter().copied().collect();
                build_paradigms(&corpus, &excluded)
                    .and_then(|t| aggregate(&t, &config.aggregate_options()))
                    .map(MetricResult::Morph)
            })
        });
        [
            ("lexical", lexical.join().expect("lexical worker panicked")),
            ("bands", bands.join().expect("LFP worker panicked")),
            ("synonyms", synonyms.join().expect("synonym worker panicked")),
            ("morphology", morph.join().expect("morphology worker panicked")),
        ]
    });

    let mut results = Vec::new();
    let mut failed = Vec::new();
    for (name, outcome) in outcomes {
        match outcome {
            Some(Ok(r)) => results.push((corpus.language().to_string(), r)),
            Some(Err(e)) => failed.push(format!("{name}: {e}")),
            None => {}
        }
    }
    for f in &failed {
        eprintln!("error: could not compute {f}");
    }
    if results.is_empty() {
        eprintln!("error: no metric could be computed");
        return Ok(EXIT_NO_METRIC);
    }

    let provenance = Provenance { inputs, config_digest: config.digest(), config: config.canonical() };
    let report = assemble(&label, corpus.language(), results, provenance, config.display_scales())?;
    write_all(args.out.as_deref(), report.to_json().as_bytes())?;
    Ok(if failed.is_empty() { EXIT_OK } else { EXIT_NO_METRIC })
}

fn cmd_compare(args: &CompareArgs) -> Result<i32, Failure> {
    let mut reports = Vec::new();
    for path in &args.reports {
        let text = fs::read_to_string(path).map_err(|e| Failure::new(EXIT_INPUT, format!("{}: {e}", path.display())))?;
        reports.extend(read_reports(&text).map_err(with_path(path))?);
    }
    if reports.len() < 2 {
        return Err(Failure::new(EXIT_USAGE, "compare needs at least two reports"));
    }
    let table = compare(&reports, &args.baseline)?;
    for w in &table.warnings {
        warn!("{w}");
    }
    let format = match args.output_format {
        OutputFormat::Markdown => RenderFormat::Markdown,
        OutputFormat::Csv => RenderFormat::Csv,
        OutputFormat::Json => RenderFormat::Json,
    };
    write_all(args.out.as_deref(), render(&table, format).as_bytes())?;
    Ok(EXIT_OK)
}
