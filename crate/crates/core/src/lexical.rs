//! Type/token statistics: TTR, Yule's I, MTLD and the three-band lexical
//! frequency profile.

use serde::{Deserialize, Serialize};

use crate::corpus::{surface_counts, AnnotatedCorpus, FrequencyTable, Sym};
use crate::error::{Error, Result};

pub const DEFAULT_MTLD_THRESHOLD: f64 = 0.72;
pub const DEFAULT_BAND_EDGES: (usize, usize) = (1000, 2000);

/// Share of corpus tokens (in percent) falling into each reference-rank band.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BandProfile {
    pub b1_pct: f64,
    pub b2_pct: f64,
    pub b3_pct: f64,
    pub band_edges: (usize, usize),
}

impl BandProfile {
    /// The "Beyond 2000" score, i.e. the last band.
    pub fn beyond(&self) -> f64 {
        self.b3_pct
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LexicalScores {
    pub ttr: f64,
    /// `None` when every type is a hapax and the statistic is undefined.
    pub yules_i: Option<f64>,
    pub mtld: f64,
    pub token_count: u64,
    pub type_count: u64,
}

fn check_threshold(threshold: f64) -> Result<()> {
    if threshold > 0.0 && threshold < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("MTLD threshold must lie in (0, 1), got {threshold}")))
    }
}

fn non_empty(corpus: &AnnotatedCorpus) -> Result<()> {
    if corpus.is_empty() {
        Err(Error::EmptyCorpus)
    } else {
        Ok(())
    }
}

pub fn ttr(corpus: &AnnotatedCorpus) -> Result<f64> {
    non_empty(corpus)?;
    let types = surface_counts(corpus).iter().filter(|&&c| c > 0).count();
    Ok(types as f64 / corpus.len() as f64)
}

/// Yule's I from a list of per-type counts: `V² / (M2 − V)` with
/// `M2 = Σ_m m²·V(m)` over the frequency spectrum.
fn yules_i_from_counts(counts: &[u64]) -> Option<f64> {
    let mut spectrum: Vec<u64> = counts.iter().copied().filter(|&c| c > 0).collect();
    spectrum.sort_unstable();
    let v = spectrum.len() as u128;
    let mut m2: u128 = 0;
    for run in spectrum.chunk_by(|a, b| a == b) {
        let m = run[0] as u128;
        m2 += m * m * run.len() as u128;
    }
    if m2 == v {
        return None;
    }
    Some((v * v) as f64 / (m2 - v) as f64)
}

pub fn yules_i(corpus: &AnnotatedCorpus) -> Result<Option<f64>> {
    non_empty(corpus)?;
    Ok(yules_i_from_counts(&surface_counts(corpus)))
}

/// One directional MTLD pass. `seen` must hold `vocab_len` zeroed slots.
fn mtld_pass<I>(tokens: I, vocab_len: usize, n: usize, threshold: f64) -> f64
where
    I: Iterator<Item = Sym>,
{
    // Stamp array: slot == factor id means "seen in the current factor".
    let mut seen = vec![0u32; vocab_len];
    let mut factor_id = 1u32;
    let mut factors = 0.0f64;
    let mut types = 0usize;
    let mut count = 0usize;
    for t in tokens {
        let slot = &mut seen[t as usize];
        if *slot != factor_id {
            *slot = factor_id;
            types += 1;
        }
        count += 1;
        if (types as f64) / (count as f64) < threshold {
            factors += 1.0;
            factor_id += 1;
            types = 0;
            count = 0;
        }
    }
    if count > 0 {
        let ttr = types as f64 / count as f64;
        factors += (1.0 - ttr) / (1.0 - threshold);
    }
    if factors == 0.0 {
        n as f64
    } else {
        n as f64 / factors
    }
}

/// Bidirectional MTLD. The forward and backward passes run on separate
/// threads; each pass is sequential, so the result matches a serial run.
pub fn mtld(corpus: &AnnotatedCorpus, threshold: f64) -> Result<f64> {
    non_empty(corpus)?;
    check_threshold(threshold)?;
    let ids = corpus.surface_ids();
    let (vocab_len, n) = (corpus.vocab().len(), ids.len());
    let (forward, backward) = std::thread::scope(|s| {
        let fwd = s.spawn(|| mtld_pass(ids.iter().copied(), vocab_len, n, threshold));
        let bwd = mtld_pass(ids.iter().rev().copied(), vocab_len, n, threshold);
        (fwd.join().expect("forward MTLD pass panicked"), bwd)
    });
    Ok((forward + backward) / 2.0)
}

/// Three-band lexical frequency profile against `reference`. Tokens missing
/// from the reference fall into the last band.
pub fn lfp(corpus: &AnnotatedCorpus, reference: &FrequencyTable, band_edges: (usize, usize)) -> Result<BandProfile> {
    non_empty(corpus)?;
    if reference.is_empty() {
        return Err(Error::EmptyReference);
    }
    let (e1, e2) = band_edges;
    if e1 == 0 || e2 <= e1 {
        return Err(Error::InvalidParameter(format!(
            "band edges must be positive and strictly increasing, got ({e1}, {e2})"
        )));
    }
    let mut band_tokens = [0u64; 3];
    let vocab = corpus.vocab();
    for (id, &c) in surface_counts(corpus).iter().enumerate() {
        if c == 0 {
            continue;
        }
        let band = match reference.rank(vocab.resolve(id as Sym)) {
            Some(r) if r <= e1 => 0,
            Some(r) if r <= e2 => 1,
            _ => 2,
        };
        band_tokens[band] += c;
    }
    let n = corpus.len() as f64;
    Ok(BandProfile {
        b1_pct: band_tokens[0] as f64 / n * 100.0,
        b2_pct: band_tokens[1] as f64 / n * 100.0,
        b3_pct: band_tokens[2] as f64 / n * 100.0,
        band_edges,
    })
}

/// TTR, Yule's I and MTLD in one go, sharing the type counts.
pub fn lexical_scores(corpus: &AnnotatedCorpus, mtld_threshold: f64) -> Result<LexicalScores> {
    non_empty(corpus)?;
    check_threshold(mtld_threshold)?;
    let counts = surface_counts(corpus);
    let type_count = counts.iter().filter(|&&c| c > 0).count() as u64;
    let token_count = corpus.len() as u64;
    Ok(LexicalScores {
        ttr: type_count as f64 / token_count as f64,
        yules_i: yules_i_from_counts(&counts),
        mtld: mtld(corpus, mtld_threshold)?,
        token_count,
        type_count,
    })
}
