//! Corpus ingestion: tokenization, CoNLL-U / tsv3 readers, exclusion filters
//! and frequency tables.
//!
//! Token strings are interned into a [`Vocab`] shared by surfaces and lemmas,
//! so a corpus is a handful of flat `u32` vectors. Corpora of tens of millions
//! of tokens stay well within a few hundred megabytes.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::io::{BufRead, Write};
use std::ops::Range;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use unicode_properties::{GeneralCategoryGroup, UnicodeGeneralCategory};

use crate::error::{Error, Result};

/// Interned string id.
pub type Sym = u32;

/// The 17 Universal Dependencies part-of-speech tags.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[allow(clippy::upper_case_acronyms)]
pub enum Upos {
    ADJ,
    ADP,
    ADV,
    AUX,
    CCONJ,
    DET,
    INTJ,
    NOUN,
    NUM,
    PART,
    PRON,
    PROPN,
    PUNCT,
    SCONJ,
    SYM,
    VERB,
    X,
}

impl Upos {
    pub const ALL: [Upos; 17] = [
        Upos::ADJ,
        Upos::ADP,
        Upos::ADV,
        Upos::AUX,
        Upos::CCONJ,
        Upos::DET,
        Upos::INTJ,
        Upos::NOUN,
        Upos::NUM,
        Upos::PART,
        Upos::PRON,
        Upos::PROPN,
        Upos::PUNCT,
        Upos::SCONJ,
        Upos::SYM,
        Upos::VERB,
        Upos::X,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Upos::ADJ => "ADJ",
            Upos::ADP => "ADP",
            Upos::ADV => "ADV",
            Upos::AUX => "AUX",
            Upos::CCONJ => "CCONJ",
            Upos::DET => "DET",
            Upos::INTJ => "INTJ",
            Upos::NOUN => "NOUN",
            Upos::NUM => "NUM",
            Upos::PART => "PART",
            Upos::PRON => "PRON",
            Upos::PROPN => "PROPN",
            Upos::PUNCT => "PUNCT",
            Upos::SCONJ => "SCONJ",
            Upos::SYM => "SYM",
            Upos::VERB => "VERB",
            Upos::X => "X",
        }
    }
}

impl fmt::Display for Upos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseUposError(pub String);

impl fmt::Display for ParseUposError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "unknown UPOS tag {:?}", self.0)
    }
}

impl std::error::Error for ParseUposError {}

impl FromStr for Upos {
    type Err = ParseUposError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Upos::ALL
            .iter()
            .copied()
            .find(|u| u.as_str() == s)
            .ok_or_else(|| ParseUposError(s.to_string()))
    }
}

/// String interner shared by the surfaces and lemmas of a corpus.
#[derive(Debug, Default, Clone)]
pub struct Vocab {
    index: HashMap<Box<str>, Sym>,
    strings: Vec<Box<str>>,
}

impl Vocab {
    pub fn intern(&mut self, s: &str) -> Sym {
        if let Some(&id) = self.index.get(s) {
            return id;
        }
        let id = Sym::try_from(self.strings.len()).expect("vocabulary exceeds u32::MAX entries");
        self.strings.push(s.into());
        self.index.insert(s.into(), id);
        id
    }

    pub fn get(&self, s: &str) -> Option<Sym> {
        self.index.get(s).copied()
    }

    pub fn resolve(&self, id: Sym) -> &str {
        &self.strings[id as usize]
    }

    pub fn len(&self) -> usize {
        self.strings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strings.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AnnotationLevel {
    SurfaceOnly,
    Lemmatized,
}

/// An owned token, used to build corpora programmatically.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnnotatedToken {
    pub surface: String,
    pub lemma: Option<String>,
    pub upos: Option<Upos>,
}

impl AnnotatedToken {
    pub fn surface(surface: impl Into<String>) -> Self {
        Self { surface: surface.into(), lemma: None, upos: None }
    }

    pub fn lemmatized(surface: impl Into<String>, lemma: impl Into<String>, upos: Upos) -> Self {
        Self { surface: surface.into(), lemma: Some(lemma.into()), upos: Some(upos) }
    }
}

/// Borrowed view of one corpus token.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TokenRef<'a> {
    pub surface: &'a str,
    pub lemma: Option<&'a str>,
    pub upos: Option<Upos>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NormalizationConfig {
    pub lowercase: bool,
}

impl Default for NormalizationConfig {
    fn default() -> Self {
        Self { lowercase: true }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AnnotatedFormat {
    Conllu,
    Tsv3,
}

/// An ordered, sentence-segmented token sequence with optional lemma and UPOS
/// annotations. Immutable once built.
#[derive(Debug, Clone)]
pub struct AnnotatedCorpus {
    vocab: Arc<Vocab>,
    surfaces: Vec<Sym>,
    /// Present iff the corpus is lemmatized.
    lemmas: Option<Vec<Sym>>,
    upos: Option<Vec<Option<Upos>>>,
    /// Exclusive end offset of each sentence.
    sentence_ends: Vec<usize>,
    language: String,
    label: String,
}

impl PartialEq for AnnotatedCorpus {
    fn eq(&self, other: &Self) -> bool {
        self.len() == other.len()
            && self.sentence_ends == other.sentence_ends
            && self.language == other.language
            && self.label == other.label
            && self.annotation_level() == other.annotation_level()
            && self.tokens().eq(other.tokens())
    }
}

impl AnnotatedCorpus {
    /// Builds a corpus from owned sentences. The corpus is lemmatized iff every
    /// token carries a lemma (and there is at least one token).
    pub fn from_sentences<S>(sentences: S) -> Self
    where
        S: IntoIterator,
        S::Item: IntoIterator<Item = AnnotatedToken>,
    {
        let mut builder = CorpusBuilder::default();
        for sentence in sentences {
            for tok in sentence {
                builder.push(&tok.surface, tok.lemma.as_deref(), tok.upos);
            }
            builder.end_sentence();
        }
        builder.finish()
    }

    /// Surface-only corpus with a single sentence per slice.
    pub fn from_surface_sentences(sentences: &[&[&str]]) -> Self {
        Self::from_sentences(
            sentences
                .iter()
                .map(|s| s.iter().map(|w| AnnotatedToken::surface(*w)).collect::<Vec<_>>()),
        )
    }

    pub fn with_language(mut self, language: impl Into<String>) -> Self {
        self.language = language.into();
        self
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn language(&self) -> &str {
        &self.language
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn len(&self) -> usize {
        self.surfaces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.surfaces.is_empty()
    }

    pub fn annotation_level(&self) -> AnnotationLevel {
        if self.lemmas.is_some() {
            AnnotationLevel::Lemmatized
        } else {
            AnnotationLevel::SurfaceOnly
        }
    }

    pub fn vocab(&self) -> &Vocab {
        &self.vocab
    }

    pub fn surface_ids(&self) -> &[Sym] {
        &self.surfaces
    }

    pub fn lemma_ids(&self) -> Option<&[Sym]> {
        self.lemmas.as_deref()
    }

    pub fn sentence_count(&self) -> usize {
        self.sentence_ends.len()
    }

    pub fn sentences(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        let starts = std::iter::once(0).chain(self.sentence_ends.iter().copied());
        starts.zip(self.sentence_ends.iter().copied()).map(|(s, e)| s..e)
    }

    pub fn token(&self, i: usize) -> TokenRef<'_> {
        TokenRef {
            surface: self.vocab.resolve(self.surfaces[i]),
            lemma: self.lemmas.as_ref().map(|l| self.vocab.resolve(l[i])),
            upos: self.upos.as_ref().and_then(|u| u[i]),
        }
    }

    pub fn tokens(&self) -> impl Iterator<Item = TokenRef<'_>> + '_ {
        (0..self.len()).map(move |i| self.token(i))
    }

    pub fn surfaces(&self) -> impl Iterator<Item = &str> + '_ {
        self.surfaces.iter().map(move |&s| self.vocab.resolve(s))
    }

    pub fn upos(&self, i: usize) -> Option<Upos> {
        self.upos.as_ref().and_then(|u| u[i])
    }

    /// Owned copy of the corpus, sentence by sentence.
    pub fn to_sentences(&self) -> Vec<Vec<AnnotatedToken>> {
        self.sentences()
            .map(|r| {
                r.map(|i| {
                    let t = self.token(i);
                    AnnotatedToken {
                        surface: t.surface.to_string(),
                        lemma: t.lemma.map(str::to_string),
                        upos: t.upos,
                    }
                })
                .collect()
            })
            .collect()
    }
}

#[derive(Default)]
struct CorpusBuilder {
    vocab: Vocab,
    surfaces: Vec<Sym>,
    lemmas: Vec<Sym>,
    all_lemmatized: bool,
    upos: Vec<Option<Upos>>,
    any_upos: bool,
    sentence_ends: Vec<usize>,
    started: bool,
}

impl CorpusBuilder {
    fn push(&mut self, surface: &str, lemma: Option<&str>, upos: Option<Upos>) {
        if !self.started {
            self.started = true;
            self.all_lemmatized = true;
        }
        self.surfaces.push(self.vocab.intern(surface));
        match lemma {
            Some(l) if self.all_lemmatized => {
                let id = self.vocab.intern(l);
                self.lemmas.push(id);
            }
            _ => {
                self.all_lemmatized = false;
                self.lemmas = Vec::new();
            }
        }
        self.any_upos |= upos.is_some();
        self.upos.push(upos);
    }

    fn end_sentence(&mut self) {
        let n = self.surfaces.len();
        if self.sentence_ends.last().copied().unwrap_or(0) < n {
            self.sentence_ends.push(n);
        }
    }

    fn finish(mut self) -> AnnotatedCorpus {
        self.end_sentence();
        let lemmatized = self.started && self.all_lemmatized;
        AnnotatedCorpus {
            vocab: Arc::new(self.vocab),
            surfaces: self.surfaces,
            lemmas: lemmatized.then_some(self.lemmas),
            upos: self.any_upos.then_some(self.upos),
            sentence_ends: self.sentence_ends,
            language: String::from("und"),
            label: String::new(),
        }
    }
}

fn is_punctuation(c: char) -> bool {
    c.general_category_group() == GeneralCategoryGroup::Punctuation
}

/// Splits on whitespace and detaches leading and trailing punctuation
/// characters, each as its own token.
pub fn tokenize(line: &str) -> Vec<&str> {
    let mut out = Vec::new();
    for word in line.split_whitespace() {
        let mut start = 0;
        for (i, c) in word.char_indices() {
            if !is_punctuation(c) {
                break;
            }
            out.push(&word[i..i + c.len_utf8()]);
            start = i + c.len_utf8();
        }
        let rest = &word[start..];
        let mut core_end = rest.len();
        for (i, c) in rest.char_indices().rev() {
            if !is_punctuation(c) {
                break;
            }
            core_end = i;
        }
        if core_end > 0 {
            out.push(&rest[..core_end]);
        }
        out.extend(
            rest[core_end..]
                .char_indices()
                .map(|(i, c)| &rest[core_end + i..core_end + i + c.len_utf8()]),
        );
    }
    out
}

fn normalize<'a>(s: &'a str, config: &NormalizationConfig) -> std::borrow::Cow<'a, str> {
    if config.lowercase && s.chars().any(|c| !c.is_ascii() || c.is_ascii_uppercase()) {
        let lower = s.to_lowercase();
        if lower != s {
            return lower.into();
        }
    }
    s.into()
}

/// Reads `reader` line by line, yielding each line (without terminator) with
/// its 1-based line number. Invalid UTF-8 is reported with its byte offset.
fn for_each_line<R, F>(mut reader: R, mut f: F) -> Result<()>
where
    R: BufRead,
    F: FnMut(usize, &str) -> Result<()>,
{
    let mut buf = Vec::new();
    let mut offset = 0u64;
    let mut line_no = 0usize;
    loop {
        buf.clear();
        let n = reader.read_until(b'\n', &mut buf)?;
        if n == 0 {
            return Ok(());
        }
        line_no += 1;
        let line = std::str::from_utf8(&buf)
            .map_err(|e| Error::Decode { offset: offset + e.valid_up_to() as u64 })?;
        offset += n as u64;
        f(line_no, line.trim_end_matches(['\n', '\r']))?;
    }
}

/// Loads UTF-8 text with one sentence per line. Blank lines are skipped.
pub fn load_plain_text<R: BufRead>(reader: R, config: &NormalizationConfig) -> Result<AnnotatedCorpus> {
    let mut builder = CorpusBuilder::default();
    for_each_line(reader, |_, line| {
        for piece in tokenize(line) {
            let surface = normalize(piece, config);
            builder.push(&surface, None, None);
        }
        builder.end_sentence();
        Ok(())
    })?;
    let corpus = builder.finish();
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(corpus)
}

/// Loads a lemma-annotated corpus. `config.lowercase` folds surfaces only;
/// lemmas are kept as annotated.
pub fn load_annotated<R: BufRead>(
    reader: R,
    format: AnnotatedFormat,
    config: &NormalizationConfig,
) -> Result<AnnotatedCorpus> {
    let mut builder = CorpusBuilder::default();
    for_each_line(reader, |line_no, line| {
        if line.trim().is_empty() {
            builder.end_sentence();
            return Ok(());
        }
        let parsed = match format {
            AnnotatedFormat::Conllu => parse_conllu_line(line_no, line)?,
            AnnotatedFormat::Tsv3 => Some(parse_tsv3_line(line_no, line)?),
        };
        if let Some((form, lemma, upos)) = parsed {
            let surface = normalize(form, config);
            builder.push(&surface, Some(lemma), Some(upos));
        }
        Ok(())
    })?;
    let corpus = builder.finish();
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    Ok(corpus)
}

fn parse_upos(line: usize, s: &str) -> Result<Upos> {
    if s == "_" || s.is_empty() {
        return Err(Error::Format { line, message: "missing UPOS".into() });
    }
    s.parse().map_err(|e: ParseUposError| Error::Parse { line, message: e.to_string() })
}

fn parse_conllu_line(line: usize, text: &str) -> Result<Option<(&str, &str, Upos)>> {
    if text.starts_with('#') {
        return Ok(None);
    }
    let fields: Vec<&str> = text.split('\t').collect();
    let id = fields[0];
    // multiword-token ranges and empty nodes
    if id.contains('-') || id.contains('.') {
        return Ok(None);
    }
    if id.parse::<u32>().map_or(true, |v| v == 0) {
        return Err(Error::Parse { line, message: format!("invalid token id {id:?}") });
    }
    match fields.len() {
        0..=2 => return Err(Error::Format { line, message: "missing LEMMA column".into() }),
        3 => return Err(Error::Format { line, message: "missing UPOS column".into() }),
        10 => {}
        n => return Err(Error::Parse { line, message: format!("expected 10 columns, found {n}") }),
    }
    let (form, lemma) = (fields[1], fields[2]);
    if form.is_empty() {
        return Err(Error::Parse { line, message: "empty FORM".into() });
    }
    if lemma.is_empty() || (lemma == "_" && form != "_") {
        return Err(Error::Format { line, message: "missing lemma".into() });
    }
    Ok(Some((form, lemma, parse_upos(line, fields[3])?)))
}

fn parse_tsv3_line(line: usize, text: &str) -> Result<(&str, &str, Upos)> {
    let fields: Vec<&str> = text.split('\t').collect();
    if fields.len() != 3 {
        return Err(Error::Parse {
            line,
            message: format!("expected 3 tab-separated fields, found {}", fields.len()),
        });
    }
    if fields[0].is_empty() {
        return Err(Error::Parse { line, message: "empty surface".into() });
    }
    if fields[1].is_empty() {
        return Err(Error::Format { line, message: "missing lemma".into() });
    }
    Ok((fields[0], fields[1], parse_upos(line, fields[2])?))
}

/// Removes every token whose surface is in `blocklist`. Sentences left empty
/// are dropped.
pub fn exclude_tokens<S: AsRef<str>>(corpus: &AnnotatedCorpus, blocklist: &[S]) -> AnnotatedCorpus {
    let blocked: HashSet<Sym> = blocklist.iter().filter_map(|s| corpus.vocab.get(s.as_ref())).collect();
    if blocked.is_empty() {
        return corpus.clone();
    }
    let keep: Vec<usize> = (0..corpus.len()).filter(|&i| !blocked.contains(&corpus.surfaces[i])).collect();
    let mut sentence_ends = Vec::with_capacity(corpus.sentence_ends.len());
    let mut kept = 0usize;
    let mut k = 0usize;
    for end in &corpus.sentence_ends {
        while k < keep.len() && keep[k] < *end {
            k += 1;
        }
        if k > kept {
            sentence_ends.push(k);
            kept = k;
        }
    }
    AnnotatedCorpus {
        vocab: Arc::clone(&corpus.vocab),
        surfaces: keep.iter().map(|&i| corpus.surfaces[i]).collect(),
        lemmas: corpus.lemmas.as_ref().map(|l| keep.iter().map(|&i| l[i]).collect()),
        upos: corpus.upos.as_ref().map(|u| keep.iter().map(|&i| u[i]).collect()),
        sentence_ends,
        language: corpus.language.clone(),
        label: corpus.label.clone(),
    }
}

/// Per-symbol occurrence counts of the corpus surfaces, indexed by [`Sym`].
pub(crate) fn surface_counts(corpus: &AnnotatedCorpus) -> Vec<u64> {
    let mut counts = vec![0u64; corpus.vocab.len()];
    for &s in &corpus.surfaces {
        counts[s as usize] += 1;
    }
    counts
}

/// Type counts with a deterministic ranking: descending count, ties broken
/// by ascending byte order of the type.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrequencyTable {
    ranked: Vec<(String, u64)>,
    ranks: HashMap<String, usize>,
    total_tokens: u64,
    config_digest: Option<String>,
}

impl FrequencyTable {
    pub fn from_counts<I, S>(counts: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, u64)>,
        S: Into<String>,
    {
        let mut merged: HashMap<String, u64> = HashMap::new();
        for (t, c) in counts {
            if c > 0 {
                *merged.entry(t.into()).or_default() += c;
            }
        }
        if merged.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let mut ranked: Vec<(String, u64)> = merged.into_iter().collect();
        ranked.sort_unstable_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.as_bytes().cmp(b.0.as_bytes())));
        let ranks = ranked.iter().enumerate().map(|(i, (t, _))| (t.clone(), i + 1)).collect();
        let total_tokens = ranked.iter().map(|(_, c)| c).sum();
        Ok(Self { ranked, ranks, total_tokens, config_digest: None })
    }

    pub fn with_config_digest(mut self, digest: impl Into<String>) -> Self {
        self.config_digest = Some(digest.into());
        self
    }

    pub fn config_digest(&self) -> Option<&str> {
        self.config_digest.as_deref()
    }

    pub fn total_tokens(&self) -> u64 {
        self.total_tokens
    }

    pub fn len(&self) -> usize {
        self.ranked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ranked.is_empty()
    }

    pub fn count(&self, ty: &str) -> u64 {
        self.ranks.get(ty).map_or(0, |&r| self.ranked[r - 1].1)
    }

    /// 1-based rank of `ty`, if present.
    pub fn rank(&self, ty: &str) -> Option<usize> {
        self.ranks.get(ty).copied()
    }

    /// Entries in rank order.
    pub fn ranking(&self) -> impl ExactSizeIterator<Item = (&str, u64)> + '_ {
        self.ranked.iter().map(|(t, c)| (t.as_str(), *c))
    }

    /// Writes `#total_tokens=<N>` (and `#config_digest=<hex>` when known),
    /// then one `type<TAB>count` line per entry in rank order.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "#total_tokens={}", self.total_tokens)?;
        if let Some(d) = &self.config_digest {
            writeln!(w, "#config_digest={d}")?;
        }
        for (t, c) in &self.ranked {
            writeln!(w, "{t}\t{c}")?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut declared_total = None;
        let mut digest = None;
        let mut entries = Vec::new();
        for_each_line(reader, |line_no, line| {
            if let Some(header) = line.strip_prefix('#') {
                if let Some(v) = header.strip_prefix("total_tokens=") {
                    let n = v.trim().parse::<u64>().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("invalid total_tokens {v:?}"),
                    })?;
                    declared_total = Some(n);
                } else if let Some(v) = header.strip_prefix("config_digest=") {
                    digest = Some(v.trim().to_string());
                }
                return Ok(());
            }
            if line.is_empty() {
                return Ok(());
            }
            let (ty, count) = line.rsplit_once('\t').ok_or_else(|| Error::Parse {
                line: line_no,
                message: "expected type<TAB>count".into(),
            })?;
            let count = count.parse::<u64>().ok().filter(|&c| c > 0).ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("invalid count {count:?}"),
            })?;
            if ty.is_empty() {
                return Err(Error::Parse { line: line_no, message: "empty type".into() });
            }
            entries.push((ty.to_string(), count));
            Ok(())
        })?;
        let declared_total = declared_total.ok_or(Error::Format {
            line: 1,
            message: "missing #total_tokens header".into(),
        })?;
        let n_entries = entries.len();
        let mut table = Self::from_counts(entries).map_err(|_| Error::EmptyReference)?;
        if table.len() != n_entries {
            return Err(Error::Format { line: 0, message: "duplicate types in frequency table".into() });
        }
        if table.total_tokens != declared_total {
            return Err(Error::Format {
                line: 1,
                message: format!(
                    "#total_tokens={declared_total} but counts sum to {}",
                    table.total_tokens
                ),
            });
        }
        table.config_digest = digest;
        Ok(table)
    }
}

/// Counts token surfaces.
pub fn build_frequency_table(corpus: &AnnotatedCorpus) -> Result<FrequencyTable> {
    if corpus.is_empty() {
        return Err(Error::EmptyCorpus);
    }
    let counts = surface_counts(corpus);
    FrequencyTable::from_counts(
        counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(id, &c)| (corpus.vocab.resolve(id as Sym), c)),
    )
}
