//! Run configuration: defaults, `key=value` config files, and the digests
//! embedded in reports and frequency tables.

use std::collections::{BTreeMap, BTreeSet};
use std::str::FromStr;

use sha2::{Digest, Sha256};

use crate::corpus::{NormalizationConfig, Upos};
use crate::error::{Error, Result};
use crate::lexical::{DEFAULT_BAND_EDGES, DEFAULT_MTLD_THRESHOLD};
use crate::morphology::{AggregateOptions, LemmaWeighting, SimpsonForm, DEFAULT_MIN_WORDFORMS, DEFAULT_PARADIGM_POS_EXCLUDED};
use crate::report::DisplayScales;
use crate::synonyms::DEFAULT_POS_FILTER;

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub lowercase: bool,
    /// Placeholder tokens removed when `exclude_unk` is set.
    pub unk_tokens: BTreeSet<String>,
    pub exclude_unk: bool,
    pub band_edges: (usize, usize),
    pub mtld_threshold: f64,
    pub pos_filter: BTreeSet<Upos>,
    pub min_wordforms: usize,
    pub synttr_scale: u64,
    pub paradigm_pos_excluded: BTreeSet<Upos>,
    pub simpson_form: SimpsonForm,
    pub lemma_weighting: LemmaWeighting,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            lowercase: true,
            unk_tokens: BTreeSet::from(["UNK".to_string()]),
            exclude_unk: false,
            band_edges: DEFAULT_BAND_EDGES,
            mtld_threshold: DEFAULT_MTLD_THRESHOLD,
            pos_filter: DEFAULT_POS_FILTER.into_iter().collect(),
            min_wordforms: DEFAULT_MIN_WORDFORMS,
            synttr_scale: 100_000,
            paradigm_pos_excluded: DEFAULT_PARADIGM_POS_EXCLUDED.into_iter().collect(),
            simpson_form: SimpsonForm::SumOfSquares,
            lemma_weighting: LemmaWeighting::Unweighted,
        }
    }
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true/false, got {v:?}"))),
    }
}

fn parse_num<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: invalid number {v:?}")))
}

fn parse_list(v: &str) -> impl Iterator<Item = &str> {
    v.split(',').map(str::trim).filter(|s| !s.is_empty())
}

fn parse_upos_set(key: &str, v: &str) -> Result<BTreeSet<Upos>> {
    parse_list(v)
        .map(|t| t.parse::<Upos>().map_err(|e| Error::Config(format!("{key}: {e}"))))
        .collect()
}

fn join<I: IntoIterator<Item = S>, S: ToString>(items: I) -> String {
    items.into_iter().map(|s| s.to_string()).collect::<Vec<_>>().join(",")
}

fn sha256_hex(text: &str) -> String {
    hex::encode(Sha256::digest(text.as_bytes()))
}

impl RunConfig {
    /// Parses a `key=value` file on top of the defaults. `#` starts a comment line.
    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut config = Self::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key=value", i + 1)))?;
            config.set(k.trim(), v.trim())?;
        }
        config.validate()?;
        Ok(config)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "lowercase" => self.lowercase = parse_bool(key, v)?,
            "unk_tokens" => self.unk_tokens = parse_list(v).map(str::to_string).collect(),
            "exclude_unk" => self.exclude_unk = parse_bool(key, v)?,
            "band_edges" => {
                let edges: Vec<usize> = parse_list(v).map(|e| parse_num(key, e)).collect::<Result<_>>()?;
                let [a, b] = edges[..] else {
                    return Err(Error::Config(format!("{key}: expected two ranks, got {v:?}")));
                };
                self.band_edges = (a, b);
            }
            "mtld_threshold" => self.mtld_threshold = parse_num(key, v)?,
            "pos_filter" => self.pos_filter = parse_upos_set(key, v)?,
            "min_wordforms" => self.min_wordforms = parse_num(key, v)?,
            "synttr_scale" => self.synttr_scale = parse_num(key, v)?,
            "paradigm_pos_excluded" => self.paradigm_pos_excluded = parse_upos_set(key, v)?,
            "simpson_form" => {
                self.simpson_form = match v {
                    "sum_of_squares" => SimpsonForm::SumOfSquares,
                    "reciprocal" => SimpsonForm::Reciprocal,
                    _ => return Err(Error::Config(format!("{key}: expected sum_of_squares or reciprocal"))),
                }
            }
            "lemma_weighting" => {
                self.lemma_weighting = match v {
                    "unweighted" => LemmaWeighting::Unweighted,
                    "token_weighted" => LemmaWeighting::TokenWeighted,
                    _ => return Err(Error::Config(format!("{key}: expected unweighted or token_weighted"))),
                }
            }
            _ => return Err(Error::Config(format!("unknown key {key:?}"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        let (a, b) = self.band_edges;
        if a == 0 || b <= a {
            return Err(Error::Config(format!("band_edges must be positive and strictly increasing, got {a},{b}")));
        }
        if !(self.mtld_threshold > 0.0 && self.mtld_threshold < 1.0) {
            return Err(Error::Config(format!("mtld_threshold must lie in (0, 1), got {}", self.mtld_threshold)));
        }
        if self.min_wordforms < 2 {
            return Err(Error::Config(format!("min_wordforms must be at least 2, got {}", self.min_wordforms)));
        }
        if self.synttr_scale == 0 {
            return Err(Error::Config("synttr_scale must be positive".into()));
        }
        if self.exclude_unk && self.unk_tokens.is_empty() {
            return Err(Error::Config("exclude_unk is set but unk_tokens is empty".into()));
        }
        Ok(())
    }

    pub fn normalization(&self) -> NormalizationConfig {
        NormalizationConfig { lowercase: self.lowercase }
    }

    /// Tokens to drop, normalized the same way as corpus surfaces.
    pub fn exclusion_list(&self) -> Vec<String> {
        if !self.exclude_unk {
            return Vec::new();
        }
        let mut v: Vec<String> = self
            .unk_tokens
            .iter()
            .map(|t| if self.lowercase { t.to_lowercase() } else { t.clone() })
            .collect();
        v.sort();
        v.dedup();
        v
    }

    pub fn aggregate_options(&self) -> AggregateOptions {
        AggregateOptions {
            min_wordforms: self.min_wordforms,
            weighting: self.lemma_weighting,
            simpson_form: self.simpson_form,
        }
    }

    pub fn display_scales(&self) -> DisplayScales {
        DisplayScales { syn_ttr: self.synttr_scale as f64, ..DisplayScales::default() }
    }

    pub fn canonical(&self) -> BTreeMap<String, String> {
        let mut m = BTreeMap::new();
        m.insert("lowercase".into(), self.lowercase.to_string());
        m.insert("unk_tokens".into(), join(&self.unk_tokens));
        m.insert("exclude_unk".into(), self.exclude_unk.to_string());
        m.insert("band_edges".into(), format!("{},{}", self.band_edges.0, self.band_edges.1));
        m.insert("mtld_threshold".into(), self.mtld_threshold.to_string());
        m.insert("pos_filter".into(), join(&self.pos_filter));
        m.insert("min_wordforms".into(), self.min_wordforms.to_string());
        m.insert("synttr_scale".into(), self.synttr_scale.to_string());
        m.insert("paradigm_pos_excluded".into(), join(&self.paradigm_pos_excluded));
        m.insert(
            "simpson_form".into(),
            match self.simpson_form {
                SimpsonForm::SumOfSquares => "sum_of_squares",
                SimpsonForm::Reciprocal => "reciprocal",
            }
            .into(),
        );
        m.insert(
            "lemma_weighting".into(),
            match self.lemma_weighting {
                LemmaWeighting::Unweighted => "unweighted",
                LemmaWeighting::TokenWeighted => "token_weighted",
            }
            .into(),
        );
        m
    }

    /// SHA-256 over the canonical configuration.
    pub fn digest(&self) -> String {
        let text: String = self.canonical().iter().map(|(k, v)| format!("{k}={v}\n")).collect();
        sha256_hex(&text)
    }

    /// Digest of the settings that change token sequences (case folding and
    /// exclusion); stored with frequency tables.
    pub fn tokenization_digest(&self) -> String {
        sha256_hex(&format!("lowercase={}\nexclude={}\n", self.lowercase, join(self.exclusion_list())))
    }
}
