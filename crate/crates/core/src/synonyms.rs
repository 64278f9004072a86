//! Synonym frequency analysis: bilingual lexicons, translated word
//! distributions, and the PTF / CDU / SynTTR statistics over them.
//!
//! A translated word distribution records, for one source lemma, how often
//! each of its dictionary translation options occurs among the target
//! corpus lemmas. Counting is corpus-global; no word alignment is involved.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedCorpus, Upos};
use crate::error::{Error, Result};

pub const DEFAULT_POS_FILTER: [Upos; 3] = [Upos::NOUN, Upos::VERB, Upos::ADJ];

/// Source lemma plus its POS restriction (`None` = any POS, written `*`).
pub type LexiconKey = (String, Option<Upos>);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct BilingualLexicon {
    entries: BTreeMap<LexiconKey, Vec<String>>,
    pub source_language: Option<String>,
    pub target_language: Option<String>,
    /// Number of duplicate option lines dropped while loading.
    pub duplicates_dropped: usize,
}

impl BilingualLexicon {
    /// Adds an option, returning `false` if it was already present.
    pub fn insert(&mut self, source: &str, upos: Option<Upos>, option: &str) -> bool {
        let options = self.entries.entry((source.to_string(), upos)).or_default();
        if options.iter().any(|o| o == option) {
            return false;
        }
        options.push(option.to_string());
        true
    }

    pub fn options(&self, source: &str, upos: Option<Upos>) -> Option<&[String]> {
        self.entries.get(&(source.to_string(), upos)).map(Vec::as_slice)
    }

    pub fn entries(&self) -> impl Iterator<Item = (&LexiconKey, &[String])> + '_ {
        self.entries.iter().map(|(k, v)| (k, v.as_slice()))
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Options for `source` used with any of `tags`: POS-specific entries in
    /// tag order, then the wildcard entry; duplicates removed, first wins.
    fn merged_options(&self, source: &str, tags: &BTreeSet<Upos>) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        let keys = tags.iter().map(|&t| Some(t)).chain(std::iter::once(None));
        for key in keys {
            if let Some(opts) = self.options(source, key) {
                for o in opts {
                    if !out.contains(o) {
                        out.push(o.clone());
                    }
                }
            }
        }
        out
    }
}

/// Reads `source_lemma<TAB>upos-or-*<TAB>target_lemma` lines. Blank lines
/// are skipped; `#` lines are comments, except `#source_language=xx` and
/// `#target_language=yy`.
pub fn load_lexicon<R: BufRead>(reader: R) -> Result<BilingualLexicon> {
    let mut lex = BilingualLexicon::default();
    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line.map_err(|e| match e.kind() {
            std::io::ErrorKind::InvalidData => Error::Parse { line: line_no, message: "invalid UTF-8".into() },
            _ => Error::Io(e),
        })?;
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(v) = comment.strip_prefix("source_language=") {
                lex.source_language = Some(v.trim().to_string());
            } else if let Some(v) = comment.strip_prefix("target_language=") {
                lex.target_language = Some(v.trim().to_string());
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 || fields.iter().any(|f| f.is_empty()) {
            return Err(Error::Parse {
                line: line_no,
                message: "expected source_lemma<TAB>upos-or-*<TAB>target_lemma".into(),
            });
        }
        let upos = match fields[1] {
            "*" => None,
            tag => Some(tag.parse::<Upos>().map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?),
        };
        if !lex.insert(fields[0], upos, fields[2]) {
            lex.duplicates_dropped += 1;
        }
    }
    if lex.duplicates_dropped > 0 {
        log::warn!("lexicon: dropped {} duplicate option line(s)", lex.duplicates_dropped);
    }
    Ok(lex)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranslationDistribution {
    pub source_lemma: String,
    pub options: Vec<String>,
    pub counts: Vec<u64>,
}

impl TranslationDistribution {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SynonymScores {
    pub ptf: f64,
    pub cdu: f64,
    pub syn_ttr: f64,
    pub n_source_words_used: u64,
}

fn check_language(expected: &Option<String>, found: &str) -> Result<()> {
    match expected {
        Some(e) if found != "und" && e != found => {
            Err(Error::LanguageMismatch { expected: e.clone(), found: found.to_string() })
        }
        _ => Ok(()),
    }
}

/// One distribution per distinct source lemma that occurs with a tag in
/// `pos_filter` and has lexicon options, sorted by source lemma.
pub fn extract_distributions(
    source: &AnnotatedCorpus,
    target: &AnnotatedCorpus,
    lexicon: &BilingualLexicon,
    pos_filter: &[Upos],
) -> Result<Vec<TranslationDistribution>> {
    let src_lemmas = source.lemma_ids().ok_or(Error::NotLemmatized)?;
    let tgt_lemmas = target.lemma_ids().ok_or(Error::NotLemmatized)?;
    check_language(&lexicon.source_language, source.language())?;
    check_language(&lexicon.target_language, target.language())?;

    let mut used: BTreeMap<&str, BTreeSet<Upos>> = BTreeMap::new();
    for (i, &lemma) in src_lemmas.iter().enumerate() {
        if let Some(tag) = source.upos(i).filter(|t| pos_filter.contains(t)) {
            used.entry(source.vocab().resolve(lemma)).or_default().insert(tag);
        }
    }

    let mut target_counts: HashMap<&str, u64> = HashMap::new();
    {
        let mut by_id = vec![0u64; target.vocab().len()];
        for &l in tgt_lemmas {
            by_id[l as usize] += 1;
        }
        for (id, c) in by_id.into_iter().enumerate() {
            if c > 0 {
                target_counts.insert(target.vocab().resolve(id as u32), c);
            }
        }
    }

    Ok(used
        .into_iter()
        .filter_map(|(lemma, tags)| {
            let options = lexicon.merged_options(lemma, &tags);
            if options.is_empty() {
                return None;
            }
            let counts = options.iter().map(|o| target_counts.get(o.as_str()).copied().unwrap_or(0)).collect();
            Some(TranslationDistribution { source_lemma: lemma.to_string(), options, counts })
        })
        .collect())
}

fn usable(distributions: &[TranslationDistribution]) -> Result<Vec<&TranslationDistribution>> {
    let mut v: Vec<&TranslationDistribution> = distributions.iter().filter(|d| d.total() > 0).collect();
    if v.is_empty() {
        return Err(Error::NoUsableDistribution);
    }
    // fixed summation order
    v.sort_by(|a, b| a.source_lemma.cmp(&b.source_lemma).then_with(|| a.options.cmp(&b.options)));
    Ok(v)
}

/// Share of the most frequent option in one distribution.
pub fn primary_share(counts: &[u64]) -> Option<f64> {
    let total: u64 = counts.iter().sum();
    (total > 0).then(|| *counts.iter().max().unwrap() as f64 / total as f64)
}

/// Cosine distance between `counts` and the uniform vector of equal length.
pub fn cosine_distance_from_uniform(counts: &[u64]) -> Option<f64> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return None;
    }
    if counts.iter().all(|&c| c == counts[0]) {
        return Some(0.0);
    }
    let norm = counts.iter().map(|&c| (c as f64) * (c as f64)).sum::<f64>().sqrt();
    let k = counts.len() as f64;
    Some((1.0 - total as f64 / (norm * k.sqrt())).max(0.0))
}

/// Mean primary-translation share over distributions with a positive total.
pub fn ptf(distributions: &[TranslationDistribution]) -> Result<f64> {
    let v = usable(distributions)?;
    let sum: f64 = v.iter().filter_map(|d| primary_share(&d.counts)).sum();
    Ok(sum / v.len() as f64)
}

/// Mean cosine distance from uniform over distributions with a positive total.
pub fn cdu(distributions: &[TranslationDistribution]) -> Result<f64> {
    let v = usable(distributions)?;
    let sum: f64 = v.iter().filter_map(|d| cosine_distance_from_uniform(&d.counts)).sum();
    Ok(sum / v.len() as f64)
}

/// Distinct observed option lemmas over their total target occurrences.
/// A lemma offered for several source words is one type, counted once.
pub fn syn_ttr(distributions: &[TranslationDistribution]) -> Result<f64> {
    let mut observed: BTreeMap<&str, u64> = BTreeMap::new();
    for d in distributions {
        for (o, &c) in d.options.iter().zip(&d.counts) {
            if c > 0 {
                observed.insert(o, c);
            }
        }
    }
    let tokens: u64 = observed.values().sum();
    if tokens == 0 {
        return Err(Error::NoUsableDistribution);
    }
    Ok(observed.len() as f64 / tokens as f64)
}

pub fn synonym_scores(distributions: &[TranslationDistribution]) -> Result<SynonymScores> {
    Ok(SynonymScores {
        ptf: ptf(distributions)?,
        cdu: cdu(distributions)?,
        syn_ttr: syn_ttr(distributions)?,
        n_source_words_used: usable(distributions)?.len() as u64,
    })
}

/// Audit export: `source_lemma<TAB>option<TAB>count`.
pub fn write_distributions_tsv<W: Write>(distributions: &[TranslationDistribution], mut w: W) -> Result<()> {
    for d in distributions {
        for (o, c) in d.options.iter().zip(&d.counts) {
            writeln!(w, "{}\t{}\t{}", d.source_lemma, o, c)?;
        }
    }
    w.flush()?;
    Ok(())
}
