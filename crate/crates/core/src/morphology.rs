//! Inflectional paradigm diversity: per-lemma Shannon entropy and Simpson
//! index over wordform counts, and their corpus-level means.

use std::collections::{BTreeMap, HashMap};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::corpus::{AnnotatedCorpus, Sym, Upos};
use crate::error::{Error, Result};

pub const DEFAULT_PARADIGM_POS_EXCLUDED: [Upos; 3] = [Upos::PUNCT, Upos::NUM, Upos::SYM];
pub const DEFAULT_MIN_WORDFORMS: usize = 2;

/// lemma → wordform → count, both keys lowercased.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParadigmTable {
    paradigms: BTreeMap<String, BTreeMap<String, u64>>,
}

impl ParadigmTable {
    pub fn insert(&mut self, lemma: &str, wordform: &str, count: u64) {
        if count > 0 {
            *self
                .paradigms
                .entry(lemma.to_string())
                .or_default()
                .entry(wordform.to_string())
                .or_default() += count;
        }
    }

    pub fn len(&self) -> usize {
        self.paradigms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.paradigms.is_empty()
    }

    pub fn get(&self, lemma: &str) -> Option<&BTreeMap<String, u64>> {
        self.paradigms.get(lemma)
    }

    /// Paradigms in lemma order.
    pub fn iter(&self) -> impl Iterator<Item = (&str, &BTreeMap<String, u64>)> + '_ {
        self.paradigms.iter().map(|(l, p)| (l.as_str(), p))
    }

    pub fn total_tokens(&self) -> u64 {
        self.paradigms.values().flat_map(|p| p.values()).sum()
    }

    /// Audit export: `lemma<TAB>wordform<TAB>count`.
    pub fn write_tsv<W: Write>(&self, mut w: W) -> Result<()> {
        for (lemma, forms) in &self.paradigms {
            for (wf, c) in forms {
                writeln!(w, "{lemma}\t{wf}\t{c}")?;
            }
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_tsv<R: BufRead>(reader: R) -> Result<Self> {
        let mut table = ParadigmTable::default();
        for (idx, line) in reader.lines().enumerate() {
            let line_no = idx + 1;
            let line = line?;
            let line = line.trim_end_matches('\r');
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let parse_err = |message: String| Error::Parse { line: line_no, message };
            let mut fields = line.split('\t');
            let (Some(lemma), Some(wf), Some(count), None) = (fields.next(), fields.next(), fields.next(), fields.next())
            else {
                return Err(parse_err("expected lemma<TAB>wordform<TAB>count".into()));
            };
            let count: u64 = count
                .parse()
                .ok()
                .filter(|&c| c > 0)
                .ok_or_else(|| parse_err(format!("invalid count {count:?}")))?;
            if table.get(lemma).is_some_and(|p| p.contains_key(wf)) {
                return Err(parse_err(format!("duplicate pair ({lemma}, {wf})")));
            }
            table.insert(lemma, wf, count);
        }
        Ok(table)
    }
}

/// Groups lemma-bearing tokens into paradigms, skipping tokens whose UPOS
/// is in `excluded_pos`. Lemmas and wordforms are lowercased.
pub fn build_paradigms(corpus: &AnnotatedCorpus, excluded_pos: &[Upos]) -> Result<ParadigmTable> {
    let lemmas = corpus.lemma_ids().ok_or(Error::NotLemmatized)?;
    let mut pairs: HashMap<(Sym, Sym), u64> = HashMap::new();
    for (i, (&lemma, &surface)) in lemmas.iter().zip(corpus.surface_ids()).enumerate() {
        if corpus.upos(i).is_some_and(|u| excluded_pos.contains(&u)) {
            continue;
        }
        *pairs.entry((lemma, surface)).or_default() += 1;
    }
    if pairs.is_empty() {
        return Err(Error::NoLemmaTokens);
    }
    let vocab = corpus.vocab();
    let mut table = ParadigmTable::default();
    for ((lemma, surface), c) in pairs {
        table.insert(&vocab.resolve(lemma).to_lowercase(), &vocab.resolve(surface).to_lowercase(), c);
    }
    Ok(table)
}

fn probabilities(counts: &[u64]) -> Result<(Vec<f64>, bool)> {
    let total: u64 = counts.iter().sum();
    if total == 0 {
        return Err(Error::EmptyParadigm);
    }
    let positive: Vec<u64> = counts.iter().copied().filter(|&c| c > 0).collect();
    let uniform = positive.iter().all(|&c| c == positive[0]);
    Ok((positive.iter().map(|&c| c as f64 / total as f64).collect(), uniform))
}

/// Entropy of a wordform distribution in nats. Zero counts contribute nothing.
pub fn shannon_h(counts: &[u64]) -> Result<f64> {
    let (p, uniform) = probabilities(counts)?;
    if uniform {
        return Ok((p.len() as f64).ln());
    }
    Ok(-p.iter().map(|&q| q * q.ln()).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SimpsonForm {
    /// Σp²: 1 for a single wordform, 1/k for k equally frequent ones.
    #[default]
    SumOfSquares,
    /// 1/Σp², the effective number of wordforms.
    Reciprocal,
}

pub fn simpson_d(counts: &[u64]) -> Result<f64> {
    simpson(counts, SimpsonForm::SumOfSquares)
}

pub fn simpson(counts: &[u64], form: SimpsonForm) -> Result<f64> {
    let (p, uniform) = probabilities(counts)?;
    let sum_sq = if uniform { 1.0 / p.len() as f64 } else { p.iter().map(|q| q * q).sum::<f64>() };
    Ok(match form {
        SimpsonForm::SumOfSquares => sum_sq,
        SimpsonForm::Reciprocal => 1.0 / sum_sq,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LemmaWeighting {
    #[default]
    Unweighted,
    /// Weight each lemma by its token count.
    TokenWeighted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AggregateOptions {
    pub min_wordforms: usize,
    pub weighting: LemmaWeighting,
    pub simpson_form: SimpsonForm,
}

impl Default for AggregateOptions {
    fn default() -> Self {
        Self {
            min_wordforms: DEFAULT_MIN_WORDFORMS,
            weighting: LemmaWeighting::Unweighted,
            simpson_form: SimpsonForm::SumOfSquares,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MorphAggregate {
    pub mean_h: f64,
    pub mean_d: f64,
    pub single_wordform_lemmas: u64,
    pub multi_wordform_lemmas: u64,
    /// Lemmas with at least `min_wordforms` wordforms, i.e. those averaged.
    pub lemmas_averaged: u64,
}

/// Means of H and D over lemmas with at least `min_wordforms` distinct
/// wordforms, accumulated in lemma order.
pub fn aggregate(table: &ParadigmTable, options: &AggregateOptions) -> Result<MorphAggregate> {
    if options.min_wordforms == 0 {
        return Err(Error::InvalidParameter("min_wordforms must be at least 1".into()));
    }
    if table.is_empty() {
        return Err(Error::EmptyParadigm);
    }
    let (mut sum_h, mut sum_d, mut weight) = (0.0f64, 0.0f64, 0.0f64);
    let (mut single, mut multi, mut averaged) = (0u64, 0u64, 0u64);
    for (_, forms) in table.iter() {
        if forms.len() == 1 {
            single += 1;
        } else {
            multi += 1;
        }
        if forms.len() < options.min_wordforms {
            continue;
        }
        let counts: Vec<u64> = forms.values().copied().collect();
        let w = match options.weighting {
            LemmaWeighting::Unweighted => 1.0,
            LemmaWeighting::TokenWeighted => counts.iter().sum::<u64>() as f64,
        };
        sum_h += w * shannon_h(&counts)?;
        sum_d += w * simpson(&counts, options.simpson_form)?;
        weight += w;
        averaged += 1;
    }
    if averaged == 0 {
        return Err(Error::BelowWordformThreshold { min_wordforms: options.min_wordforms });
    }
    Ok(MorphAggregate {
        mean_h: sum_h / weight,
        mean_d: sum_d / weight,
        single_wordform_lemmas: single,
        multi_wordform_lemmas: multi,
        lemmas_averaged: averaged,
    })
}
