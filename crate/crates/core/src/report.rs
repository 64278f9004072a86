//! Per-corpus diversity reports, cross-system comparison tables and their
//! markdown / CSV / JSON renderings.
//!
//! Raw metric values are the source of truth. Display scaling (TTR ×1000,
//! Yule's I ×10000, H and D ×100, SynTTR ×100000 by default) is applied only
//! when rendering markdown and CSV; JSON carries raw values next to the scale.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lexical::{BandProfile, LexicalScores, DEFAULT_BAND_EDGES};
use crate::morphology::MorphAggregate;
use crate::synonyms::SynonymScores;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Metric {
    LfpB1,
    LfpB2,
    LfpB3,
    Ttr,
    YulesI,
    Mtld,
    Ptf,
    Cdu,
    SynTtr,
    ShannonH,
    SimpsonD,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Direction {
    HigherMoreDiverse,
    LowerMoreDiverse,
    Neutral,
}

impl Direction {
    pub fn arrow(self) -> &'static str {
        match self {
            Direction::HigherMoreDiverse => "↑",
            Direction::LowerMoreDiverse => "↓",
            Direction::Neutral => "",
        }
    }
}

impl Metric {
    /// Canonical output order.
    pub const ALL: [Metric; 11] = [
        Metric::LfpB1,
        Metric::LfpB2,
        Metric::LfpB3,
        Metric::Ttr,
        Metric::YulesI,
        Metric::Mtld,
        Metric::Ptf,
        Metric::Cdu,
        Metric::SynTtr,
        Metric::ShannonH,
        Metric::SimpsonD,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Metric::LfpB1 => "lfp_b1",
            Metric::LfpB2 => "lfp_b2",
            Metric::LfpB3 => "lfp_b3",
            Metric::Ttr => "ttr",
            Metric::YulesI => "yules_i",
            Metric::Mtld => "mtld",
            Metric::Ptf => "ptf",
            Metric::Cdu => "cdu",
            Metric::SynTtr => "syn_ttr",
            Metric::ShannonH => "shannon_h",
            Metric::SimpsonD => "simpson_d",
        }
    }

    pub fn from_key(key: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.key() == key)
    }

    pub fn display_name(self) -> &'static str {
        match self {
            Metric::LfpB1 => "B1",
            Metric::LfpB2 => "B2",
            Metric::LfpB3 => "B3",
            Metric::Ttr => "TTR",
            Metric::YulesI => "Yule's I",
            Metric::Mtld => "MTLD",
            Metric::Ptf => "PTF",
            Metric::Cdu => "CDU",
            Metric::SynTtr => "SynTTR",
            Metric::ShannonH => "H",
            Metric::SimpsonD => "D",
        }
    }

    pub fn direction(self) -> Direction {
        match self {
            Metric::Ttr | Metric::YulesI | Metric::Mtld | Metric::LfpB3 | Metric::SynTtr | Metric::ShannonH => {
                Direction::HigherMoreDiverse
            }
            Metric::LfpB1 | Metric::Ptf | Metric::Cdu | Metric::SimpsonD => Direction::LowerMoreDiverse,
            Metric::LfpB2 => Direction::Neutral,
        }
    }
}

/// Presentation multipliers per metric family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisplayScales {
    pub lfp: f64,
    pub ttr: f64,
    pub yules_i: f64,
    pub mtld: f64,
    pub ptf: f64,
    pub cdu: f64,
    pub syn_ttr: f64,
    pub morph: f64,
}

impl Default for DisplayScales {
    fn default() -> Self {
        Self { lfp: 1.0, ttr: 1000.0, yules_i: 10000.0, mtld: 1.0, ptf: 1.0, cdu: 1.0, syn_ttr: 100000.0, morph: 100.0 }
    }
}

impl DisplayScales {
    pub fn scale(&self, metric: Metric) -> f64 {
        match metric {
            Metric::LfpB1 | Metric::LfpB2 | Metric::LfpB3 => self.lfp,
            Metric::Ttr => self.ttr,
            Metric::YulesI => self.yules_i,
            Metric::Mtld => self.mtld,
            Metric::Ptf => self.ptf,
            Metric::Cdu => self.cdu,
            Metric::SynTtr => self.syn_ttr,
            Metric::ShannonH | Metric::SimpsonD => self.morph,
        }
    }

    fn set(&mut self, metric: Metric, value: f64) {
        let slot = match metric {
            Metric::LfpB1 | Metric::LfpB2 | Metric::LfpB3 => &mut self.lfp,
            Metric::Ttr => &mut self.ttr,
            Metric::YulesI => &mut self.yules_i,
            Metric::Mtld => &mut self.mtld,
            Metric::Ptf => &mut self.ptf,
            Metric::Cdu => &mut self.cdu,
            Metric::SynTtr => &mut self.syn_ttr,
            Metric::ShannonH | Metric::SimpsonD => &mut self.morph,
        };
        *slot = value;
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MetricValue {
    Value(f64),
    Undefined(String),
}

pub const YULES_I_UNDEFINED: &str = "every type occurs exactly once (M2 = V)";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InputFile {
    pub role: String,
    pub path: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Provenance {
    pub inputs: Vec<InputFile>,
    pub config_digest: String,
    /// Canonical key/value form of the run configuration.
    #[serde(default)]
    pub config: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiversityReport {
    pub label: String,
    pub language: String,
    pub lexical: Option<LexicalScores>,
    pub bands: Option<BandProfile>,
    pub synonym: Option<SynonymScores>,
    pub morph: Option<MorphAggregate>,
    pub provenance: Provenance,
    pub scales: DisplayScales,
}

/// One computed metric family, tagged with the language of the corpus it
/// was computed on.
#[derive(Debug, Clone, PartialEq)]
pub enum MetricResult {
    Lexical(LexicalScores),
    Bands(BandProfile),
    Synonym(SynonymScores),
    Morph(MorphAggregate),
}

pub fn assemble<I>(
    label: &str,
    language: &str,
    results: I,
    provenance: Provenance,
    scales: DisplayScales,
) -> Result<DiversityReport>
where
    I: IntoIterator<Item = (String, MetricResult)>,
{
    let mut report = DiversityReport {
        label: label.to_string(),
        language: language.to_string(),
        lexical: None,
        bands: None,
        synonym: None,
        morph: None,
        provenance,
        scales,
    };
    let mut any = false;
    for (lang, result) in results {
        if lang != "und" {
            if report.language == "und" {
                report.language = lang;
            } else if lang != report.language {
                return Err(Error::LanguageMismatch { expected: report.language, found: lang });
            }
        }
        let duplicate = match result {
            MetricResult::Lexical(v) => report.lexical.replace(v).is_some(),
            MetricResult::Bands(v) => report.bands.replace(v).is_some(),
            MetricResult::Synonym(v) => report.synonym.replace(v).is_some(),
            MetricResult::Morph(v) => report.morph.replace(v).is_some(),
        };
        if duplicate {
            return Err(Error::InvalidParameter("metric family supplied twice".into()));
        }
        any = true;
    }
    if !any {
        return Err(Error::NoMetrics);
    }
    Ok(report)
}

impl DiversityReport {
    /// Present metrics in canonical order.
    pub fn values(&self) -> Vec<(Metric, MetricValue)> {
        let mut out = Vec::new();
        if let Some(b) = &self.bands {
            out.push((Metric::LfpB1, MetricValue::Value(b.b1_pct)));
            out.push((Metric::LfpB2, MetricValue::Value(b.b2_pct)));
            out.push((Metric::LfpB3, MetricValue::Value(b.b3_pct)));
        }
        if let Some(l) = &self.lexical {
            out.push((Metric::Ttr, MetricValue::Value(l.ttr)));
            out.push((
                Metric::YulesI,
                match l.yules_i {
                    Some(v) => MetricValue::Value(v),
                    None => MetricValue::Undefined(YULES_I_UNDEFINED.into()),
                },
            ));
            out.push((Metric::Mtld, MetricValue::Value(l.mtld)));
        }
        if let Some(s) = &self.synonym {
            out.push((Metric::Ptf, MetricValue::Value(s.ptf)));
            out.push((Metric::Cdu, MetricValue::Value(s.cdu)));
            out.push((Metric::SynTtr, MetricValue::Value(s.syn_ttr)));
        }
        if let Some(m) = &self.morph {
            out.push((Metric::ShannonH, MetricValue::Value(m.mean_h)));
            out.push((Metric::SimpsonD, MetricValue::Value(m.mean_d)));
        }
        out
    }

    pub fn value(&self, metric: Metric) -> Option<MetricValue> {
        self.values().into_iter().find(|(m, _)| *m == metric).map(|(_, v)| v)
    }

    fn counts(&self) -> IndexMap<String, u64> {
        let mut c = IndexMap::new();
        if let Some(l) = &self.lexical {
            c.insert("token_count".into(), l.token_count);
            c.insert("type_count".into(), l.type_count);
        }
        if let Some(b) = &self.bands {
            c.insert("lfp_band1_max_rank".into(), b.band_edges.0 as u64);
            c.insert("lfp_band2_max_rank".into(), b.band_edges.1 as u64);
        }
        if let Some(s) = &self.synonym {
            c.insert("n_source_words_used".into(), s.n_source_words_used);
        }
        if let Some(m) = &self.morph {
            c.insert("single_wordform_lemmas".into(), m.single_wordform_lemmas);
            c.insert("multi_wordform_lemmas".into(), m.multi_wordform_lemmas);
            c.insert("lemmas_averaged".into(), m.lemmas_averaged);
        }
        c
    }

    fn to_doc(&self, deltas: Option<&[Cell]>) -> ReportDoc {
        let mut metrics = IndexMap::new();
        for (metric, value) in self.values() {
            let scale = self.scales.scale(metric);
            let (raw, undefined_reason) = match value {
                MetricValue::Value(v) => (Some(v), None),
                MetricValue::Undefined(r) => (None, Some(r)),
            };
            let delta = deltas.and_then(|cells| cells.iter().find(|c| c.metric == metric)).and_then(|c| c.delta);
            metrics.insert(
                metric.key().to_string(),
                MetricEntry {
                    raw,
                    scaled: raw.map(|v| v * scale),
                    scale,
                    direction: metric.direction(),
                    undefined_reason,
                    delta,
                },
            );
        }
        ReportDoc {
            schema_version: SCHEMA_VERSION,
            label: self.label.clone(),
            language: self.language.clone(),
            metrics,
            counts: self.counts(),
            provenance: self.provenance.clone(),
        }
    }

    /// Pretty JSON with a trailing newline.
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.to_doc(None)).expect("report serialization");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let value: serde_json::Value = serde_json::from_str(text)?;
        check_schema(&value)?;
        Self::from_doc(serde_json::from_value(value)?)
    }

    fn from_doc(doc: ReportDoc) -> Result<Self> {
        let mut scales = DisplayScales::default();
        let mut raw: BTreeMap<Metric, Option<f64>> = BTreeMap::new();
        for (key, entry) in &doc.metrics {
            let metric = Metric::from_key(key).ok_or_else(|| Error::Report(format!("unknown metric {key:?}")))?;
            if entry.raw.is_none() && metric != Metric::YulesI {
                return Err(Error::Report(format!("metric {key} has no raw value")));
            }
            scales.set(metric, entry.scale);
            raw.insert(metric, entry.raw);
        }
        let get = |m: Metric| raw.get(&m).copied().flatten();
        let count = |k: &str| doc.counts.get(k).copied();
        let missing = |what: &str| Error::Report(format!("missing {what}"));

        let lexical = match (get(Metric::Ttr), get(Metric::Mtld)) {
            (Some(ttr), Some(mtld)) => Some(LexicalScores {
                ttr,
                yules_i: get(Metric::YulesI),
                mtld,
                token_count: count("token_count").ok_or_else(|| missing("token_count"))?,
                type_count: count("type_count").ok_or_else(|| missing("type_count"))?,
            }),
            _ => None,
        };
        let bands = match (get(Metric::LfpB1), get(Metric::LfpB2), get(Metric::LfpB3)) {
            (Some(b1_pct), Some(b2_pct), Some(b3_pct)) => Some(BandProfile {
                b1_pct,
                b2_pct,
                b3_pct,
                band_edges: (
                    count("lfp_band1_max_rank").map_or(DEFAULT_BAND_EDGES.0, |v| v as usize),
                    count("lfp_band2_max_rank").map_or(DEFAULT_BAND_EDGES.1, |v| v as usize),
                ),
            }),
            _ => None,
        };
        let synonym = match (get(Metric::Ptf), get(Metric::Cdu), get(Metric::SynTtr)) {
            (Some(ptf), Some(cdu), Some(syn_ttr)) => Some(SynonymScores {
                ptf,
                cdu,
                syn_ttr,
                n_source_words_used: count("n_source_words_used").unwrap_or(0),
            }),
            _ => None,
        };
        let morph = match (get(Metric::ShannonH), get(Metric::SimpsonD)) {
            (Some(mean_h), Some(mean_d)) => Some(MorphAggregate {
                mean_h,
                mean_d,
                single_wordform_lemmas: count("single_wordform_lemmas").unwrap_or(0),
                multi_wordform_lemmas: count("multi_wordform_lemmas").unwrap_or(0),
                lemmas_averaged: count("lemmas_averaged").unwrap_or(0),
            }),
            _ => None,
        };
        if lexical.is_none() && bands.is_none() && synonym.is_none() && morph.is_none() {
            return Err(Error::NoMetrics);
        }
        Ok(DiversityReport {
            label: doc.label,
            language: doc.language,
            lexical,
            bands,
            synonym,
            morph,
            provenance: doc.provenance,
            scales,
        })
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct MetricEntry {
    raw: Option<f64>,
    scaled: Option<f64>,
    scale: f64,
    direction: Direction,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    undefined_reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    delta: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ReportDoc {
    schema_version: u32,
    label: String,
    language: String,
    metrics: IndexMap<String, MetricEntry>,
    #[serde(default)]
    counts: IndexMap<String, u64>,
    provenance: Provenance,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ComparisonDoc {
    schema_version: u32,
    kind: String,
    baseline: String,
    warnings: Vec<String>,
    reports: Vec<ReportDoc>,
}

fn check_schema(value: &serde_json::Value) -> Result<()> {
    let found = value
        .get("schema_version")
        .and_then(serde_json::Value::as_u64)
        .ok_or_else(|| Error::Report("missing schema_version".into()))?;
    if found != u64::from(SCHEMA_VERSION) {
        return Err(Error::SchemaVersion { found: found.min(u64::from(u32::MAX)) as u32, expected: SCHEMA_VERSION });
    }
    Ok(())
}

/// Parses either a single report or a rendered JSON comparison table (whose
/// embedded reports are returned).
pub fn read_reports(text: &str) -> Result<Vec<DiversityReport>> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    check_schema(&value)?;
    if value.get("reports").is_some() {
        let doc: ComparisonDoc = serde_json::from_value(value)?;
        doc.reports
            .into_iter()
            .map(|r| {
                if r.schema_version != SCHEMA_VERSION {
                    return Err(Error::SchemaVersion { found: r.schema_version, expected: SCHEMA_VERSION });
                }
                DiversityReport::from_doc(r)
            })
            .collect()
    } else {
        Ok(vec![DiversityReport::from_doc(serde_json::from_value(value)?)?])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum CellValue {
    Absent,
    Undefined(String),
    Value(f64),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    pub metric: Metric,
    pub value: CellValue,
    pub scale: f64,
    /// Raw difference to the baseline; `None` when either side is not a number.
    pub delta: Option<f64>,
}

impl Cell {
    pub fn scaled(&self) -> Option<f64> {
        match self.value {
            CellValue::Value(v) => Some(v * self.scale),
            _ => None,
        }
    }

    pub fn scaled_delta(&self) -> Option<f64> {
        self.delta.map(|d| d * self.scale)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonRow {
    pub report: DiversityReport,
    pub cells: Vec<Cell>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ComparisonTable {
    pub baseline: String,
    /// Columns: metrics present in at least one report, canonical order.
    pub metrics: Vec<Metric>,
    /// Baseline first, then the other systems by label.
    pub rows: Vec<ComparisonRow>,
    pub warnings: Vec<String>,
}

pub fn compare(reports: &[DiversityReport], baseline_label: &str) -> Result<ComparisonTable> {
    let mut labels = BTreeSet::new();
    for r in reports {
        if !labels.insert(r.label.as_str()) {
            return Err(Error::DuplicateLabel(r.label.clone()));
        }
    }
    let base = reports
        .iter()
        .find(|r| r.label == baseline_label)
        .ok_or_else(|| Error::MissingBaseline(baseline_label.to_string()))?;
    if let Some(other) = reports.iter().find(|r| r.language != base.language) {
        return Err(Error::LanguageMismatch { expected: base.language.clone(), found: other.language.clone() });
    }

    let mut ordered: Vec<&DiversityReport> = reports.iter().filter(|r| r.label != baseline_label).collect();
    ordered.sort_by(|a, b| a.label.cmp(&b.label));
    ordered.insert(0, base);

    let metrics: Vec<Metric> = Metric::ALL
        .into_iter()
        .filter(|&m| reports.iter().any(|r| r.value(m).is_some()))
        .collect();

    let mut warnings = Vec::new();
    for r in &ordered[1..] {
        if r.provenance.config_digest != base.provenance.config_digest {
            warnings.push(format!(
                "config digest mismatch: {} was computed with {} but baseline {} with {}",
                r.label, r.provenance.config_digest, base.label, base.provenance.config_digest
            ));
        }
        for &m in &metrics {
            if r.scales.scale(m) != base.scales.scale(m) {
                warnings.push(format!(
                    "display scale mismatch for {}: {} uses {} but baseline uses {}",
                    m.key(),
                    r.label,
                    r.scales.scale(m),
                    base.scales.scale(m)
                ));
            }
        }
    }

    let rows = ordered
        .into_iter()
        .map(|r| {
            let cells = metrics
                .iter()
                .map(|&m| {
                    let value = match r.value(m) {
                        None => CellValue::Absent,
                        Some(MetricValue::Undefined(why)) => CellValue::Undefined(why),
                        Some(MetricValue::Value(v)) => CellValue::Value(v),
                    };
                    let delta = match (&value, base.value(m)) {
                        (CellValue::Value(v), Some(MetricValue::Value(b))) => Some(v - b),
                        _ => None,
                    };
                    Cell { metric: m, value, scale: r.scales.scale(m), delta }
                })
                .collect();
            ComparisonRow { report: r.clone(), cells }
        })
        .collect();

    Ok(ComparisonTable { baseline: baseline_label.to_string(), metrics, rows, warnings })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RenderFormat {
    Markdown,
    Csv,
    Json,
}

/// Decimal rounding to two places, halves away from zero, applied to the
/// exact binary value of `x`.
pub fn format_2dp(x: f64) -> String {
    if !x.is_finite() {
        return x.to_string();
    }
    let exact = format!("{:.60}", x.abs());
    let (int_part, frac) = exact.split_once('.').expect("fixed-point format");
    let mut digits: Vec<u8> = int_part.bytes().chain(frac.bytes().take(2)).collect();
    if frac.as_bytes()[2] >= b'5' {
        let mut i = digits.len();
        loop {
            if i == 0 {
                digits.insert(0, b'1');
                break;
            }
            i -= 1;
            if digits[i] == b'9' {
                digits[i] = b'0';
            } else {
                digits[i] += 1;
                break;
            }
        }
    }
    let split = digits.len() - 2;
    let negative = x < 0.0 && digits.iter().any(|&d| d != b'0');
    format!(
        "{}{}.{}",
        if negative { "-" } else { "" },
        std::str::from_utf8(&digits[..split]).unwrap(),
        std::str::from_utf8(&digits[split..]).unwrap()
    )
}

fn md_value(cell: &Cell) -> String {
    match &cell.value {
        CellValue::Absent => "n/a".into(),
        CellValue::Undefined(_) => "—".into(),
        CellValue::Value(_) => format_2dp(cell.scaled().unwrap()),
    }
}

fn md_delta(cell: &Cell) -> String {
    match (&cell.value, cell.scaled_delta()) {
        (CellValue::Absent, _) => "n/a".into(),
        (_, None) => "—".into(),
        (_, Some(d)) => format_2dp(d),
    }
}

fn csv_quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "\"\""))
}

pub fn render(table: &ComparisonTable, format: RenderFormat) -> String {
    match format {
        RenderFormat::Markdown => render_markdown(table),
        RenderFormat::Csv => render_csv(table),
        RenderFormat::Json => render_json(table),
    }
}

fn render_markdown(table: &ComparisonTable) -> String {
    let mut out = String::new();
    out.push_str("| System |");
    for m in &table.metrics {
        let arrow = m.direction().arrow();
        let name = if arrow.is_empty() { m.display_name().to_string() } else { format!("{} {arrow}", m.display_name()) };
        let _ = write!(out, " {name} | Δ {} |", m.display_name());
    }
    out.push_str("\n|---|");
    for _ in &table.metrics {
        out.push_str("---:|---:|");
    }
    out.push('\n');
    for row in &table.rows {
        let _ = write!(out, "| {} |", row.report.label.replace('|', "\\|"));
        for cell in &row.cells {
            let _ = write!(out, " {} | {} |", md_value(cell), md_delta(cell));
        }
        out.push('\n');
    }
    if !table.warnings.is_empty() {
        out.push_str("\n**Warnings**\n\n");
        for w in &table.warnings {
            let _ = writeln!(out, "- {w}");
        }
    }
    out
}

fn render_csv(table: &ComparisonTable) -> String {
    let mut out = String::from("label");
    for m in &table.metrics {
        let _ = write!(out, ",{0},{0}_delta", m.key());
    }
    out.push('\n');
    for row in &table.rows {
        out.push_str(&csv_quote(&row.report.label));
        for cell in &row.cells {
            let value = match &cell.value {
                CellValue::Absent => String::new(),
                CellValue::Undefined(_) => "undefined".into(),
                CellValue::Value(_) => format_2dp(cell.scaled().unwrap()),
            };
            let delta = cell.scaled_delta().map(format_2dp).unwrap_or_default();
            let _ = write!(out, ",{value},{delta}");
        }
        out.push('\n');
    }
    for w in &table.warnings {
        let _ = writeln!(out, "{},{}", csv_quote("#warning"), csv_quote(w));
    }
    out
}

fn render_json(table: &ComparisonTable) -> String {
    let doc = ComparisonDoc {
        schema_version: SCHEMA_VERSION,
        kind: "comparison".into(),
        baseline: table.baseline.clone(),
        warnings: table.warnings.clone(),
        reports: table.rows.iter().map(|r| r.report.to_doc(Some(&r.cells))).collect(),
    };
    let mut s = serde_json::to_string_pretty(&doc).expect("comparison serialization");
    s.push('\n');
    s
}
