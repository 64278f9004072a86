//! Test helpers: naive reference implementations of every metric, working
//! directly on string token lists, plus small fixtures.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_lexdiv"))
}

pub fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn lexdiv")
}

pub fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p
}

/// `|a - b| <= rel * max(|a|, |b|)`, or both exactly equal.
pub fn rel_close(a: f64, b: f64, rel: f64) -> bool {
    a == b || (a - b).abs() <= rel * a.abs().max(b.abs())
}

pub fn oracle_ttr(tokens: &[String]) -> f64 {
    let types: HashSet<&String> = tokens.iter().collect();
    types.len() as f64 / tokens.len() as f64
}

pub fn oracle_yules_i(tokens: &[String]) -> Option<f64> {
    let mut counts: HashMap<&str, u64> = HashMap::new();
    for t in tokens {
        *counts.entry(t).or_default() += 1;
    }
    let v = counts.len() as f64;
    let m2: u64 = counts.values().map(|c| c * c).sum();
    if m2 as f64 == v {
        None
    } else {
        Some(v * v / (m2 as f64 - v))
    }
}

fn mtld_one_way<'a>(tokens: impl Iterator<Item = &'a String>, n: usize, thr: f64) -> f64 {
    let mut factors = 0.0;
    let mut window: Vec<&String> = Vec::new();
    for t in tokens {
        window.push(t);
        let distinct = window.iter().collect::<HashSet<_>>().len();
        if (distinct as f64) / (window.len() as f64) < thr {
            factors += 1.0;
            window.clear();
        }
    }
    if !window.is_empty() {
        let distinct = window.iter().collect::<HashSet<_>>().len();
        let ttr = distinct as f64 / window.len() as f64;
        factors += (1.0 - ttr) / (1.0 - thr);
    }
    if factors == 0.0 {
        n as f64
    } else {
        n as f64 / factors
    }
}

pub fn oracle_mtld(tokens: &[String], thr: f64) -> f64 {
    let n = tokens.len();
    (mtld_one_way(tokens.iter(), n, thr) + mtld_one_way(tokens.iter().rev(), n, thr)) / 2.0
}

/// Band percentages against a reference given as raw `(type, count)` pairs.
pub fn oracle_lfp(tokens: &[String], reference: &[(String, u64)], edges: (usize, usize)) -> [f64; 3] {
    let mut merged: BTreeMap<&str, u64> = BTreeMap::new();
    for (t, c) in reference {
        *merged.entry(t).or_default() += c;
    }
    let mut order: Vec<(&str, u64)> = merged.into_iter().collect();
    // stable sort over byte-ordered keys: ties stay in byte order
    order.sort_by_key(|&(_, c)| std::cmp::Reverse(c));
    let mut band = [0u64; 3];
    for t in tokens {
        let rank = order.iter().position(|(w, _)| *w == t.as_str()).map(|p| p + 1);
        let b = match rank {
            Some(r) if r <= edges.0 => 0,
            Some(r) if r <= edges.1 => 1,
            _ => 2,
        };
        band[b] += 1;
    }
    let n = tokens.len() as f64;
    band.map(|c| c as f64 / n * 100.0)
}

/// One annotated token as plain strings.
#[derive(Debug, Clone)]
pub struct Tok {
    pub surface: String,
    pub lemma: String,
    pub upos: String,
}

impl Tok {
    pub fn new(surface: &str, lemma: &str, upos: &str) -> Self {
        Tok { surface: surface.into(), lemma: lemma.into(), upos: upos.into() }
    }
}

/// `(source_lemma, upos-or-*, option)` triples.
pub type LexiconRows = Vec<(String, String, String)>;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynOracle {
    pub ptf: f64,
    pub cdu: f64,
    pub syn_ttr: f64,
}

/// Recounts every translated word distribution from scratch. Option order
/// does not matter for any of the three statistics, so options are a set.
pub fn oracle_synonyms(source: &[Tok], target: &[Tok], lexicon: &LexiconRows, pos: &[&str]) -> Option<SynOracle> {
    let mut tags_by_lemma: BTreeMap<&str, BTreeSet<&str>> = BTreeMap::new();
    for t in source {
        if pos.contains(&t.upos.as_str()) {
            tags_by_lemma.entry(&t.lemma).or_default().insert(&t.upos);
        }
    }
    let mut dists: Vec<Vec<u64>> = Vec::new();
    let mut observed: BTreeMap<&str, u64> = BTreeMap::new();
    for (lemma, tags) in &tags_by_lemma {
        let options: BTreeSet<&str> = lexicon
            .iter()
            .filter(|(s, p, _)| s == lemma && (p == "*" || tags.contains(p.as_str())))
            .map(|(_, _, o)| o.as_str())
            .collect();
        if options.is_empty() {
            continue;
        }
        let counts: Vec<u64> =
            options.iter().map(|o| target.iter().filter(|t| t.lemma == *o).count() as u64).collect();
        for (o, &c) in options.iter().zip(&counts) {
            if c > 0 {
                observed.insert(o, c);
            }
        }
        if counts.iter().sum::<u64>() > 0 {
            dists.push(counts);
        }
    }
    if dists.is_empty() {
        return None;
    }
    let m = dists.len() as f64;
    let ptf = dists.iter().map(|c| *c.iter().max().unwrap() as f64 / c.iter().sum::<u64>() as f64).sum::<f64>() / m;
    let cdu = dists
        .iter()
        .map(|c| {
            let dot: f64 = c.iter().map(|&x| x as f64).sum();
            let norm: f64 = c.iter().map(|&x| (x * x) as f64).sum::<f64>().sqrt();
            (1.0 - dot / (norm * (c.len() as f64).sqrt())).max(0.0)
        })
        .sum::<f64>()
        / m;
    let syn_ttr = observed.len() as f64 / observed.values().sum::<u64>() as f64;
    Some(SynOracle { ptf, cdu, syn_ttr })
}

/// Mean H (nats) and mean Σp² over lemmas with at least two distinct
/// lowercased wordforms, skipping tokens tagged with `excluded`.
pub fn oracle_morph(tokens: &[Tok], excluded: &[&str]) -> Option<(f64, f64)> {
    let mut paradigms: BTreeMap<String, BTreeMap<String, u64>> = BTreeMap::new();
    for t in tokens.iter().filter(|t| !excluded.contains(&t.upos.as_str())) {
        *paradigms.entry(t.lemma.to_lowercase()).or_default().entry(t.surface.to_lowercase()).or_default() += 1;
    }
    let (mut h, mut d, mut n) = (0.0, 0.0, 0usize);
    for forms in paradigms.values().filter(|f| f.len() >= 2) {
        let total: u64 = forms.values().sum();
        let p: Vec<f64> = forms.values().map(|&c| c as f64 / total as f64).collect();
        h += -p.iter().map(|q| q * q.ln()).sum::<f64>();
        d += p.iter().map(|q| q * q).sum::<f64>();
        n += 1;
    }
    (n > 0).then(|| (h / n as f64, d / n as f64))
}

pub fn to_conllu(sentences: &[Vec<Tok>]) -> String {
    let mut s = String::new();
    for sent in sentences {
        for (i, t) in sent.iter().enumerate() {
            s.push_str(&format!("{}\t{}\t{}\t{}\t_\t_\t_\t_\t_\t_\n", i + 1, t.surface, t.lemma, t.upos));
        }
        s.push('\n');
    }
    s
}

pub fn to_annotated(sentences: &[Vec<Tok>]) -> lexdiv::AnnotatedCorpus {
    lexdiv::AnnotatedCorpus::from_sentences(sentences.iter().map(|s| {
        s.iter()
            .map(|t| lexdiv::AnnotatedToken::lemmatized(&t.surface, &t.lemma, t.upos.parse().unwrap()))
            .collect::<Vec<_>>()
    }))
}
