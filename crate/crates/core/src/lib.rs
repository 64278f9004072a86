//! Corpus diversity analytics for comparing machine-translation output with
//! its training data.
//!
//! Metrics: a three-band lexical frequency profile, TTR, Yule's I, MTLD,
//! synonym-distribution statistics (PTF, CDU, SynTTR) and the mean Shannon
//! entropy and Simpson index of inflectional paradigms.

pub mod cli;
pub mod config;
pub mod corpus;
pub mod error;
pub mod lexical;
pub mod morphology;
pub mod report;
pub mod synonyms;

pub use config::RunConfig;
pub use corpus::{
    build_frequency_table, exclude_tokens, load_annotated, load_plain_text, AnnotatedCorpus, AnnotatedFormat,
    AnnotatedToken, AnnotationLevel, FrequencyTable, NormalizationConfig, Upos,
};
pub use error::{Error, Result};
pub use lexical::{lexical_scores, lfp, mtld, ttr, yules_i, BandProfile, LexicalScores};
pub use morphology::{aggregate, build_paradigms, shannon_h, simpson, simpson_d, MorphAggregate, ParadigmTable, SimpsonForm};
pub use report::{assemble, compare, render, ComparisonTable, DiversityReport, RenderFormat};
pub use synonyms::{
    cdu, extract_distributions, load_lexicon, ptf, syn_ttr, synonym_scores, BilingualLexicon, SynonymScores,
    TranslationDistribution,
};
