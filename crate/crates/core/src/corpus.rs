//! Corpus ingestion: line-delimited JSON records, filtering, a shared
//! word/entity vocabulary and timestamp normalization.

use std::collections::HashSet;
use std::fs;
use std::path::Path;

use chrono::{DateTime, NaiveDate, NaiveDateTime, Utc};
use log::warn;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};

use crate::error::{io_err, Error, Result};

/// Normalized timestamps are stored as fixed-point fractions of this scale,
/// so that running time statistics are exact integer sums.
pub const TIME_SCALE: u64 = 1 << 32;

pub fn fixed_to_tau(fixed: u64) -> f64 {
    fixed as f64 / TIME_SCALE as f64
}

pub fn tau_to_fixed(tau: f64) -> u64 {
    (tau.clamp(0.0, 1.0) * TIME_SCALE as f64).round() as u64
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TokenKind {
    #[serde(rename = "w")]
    Word,
    #[serde(rename = "e")]
    Entity,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawToken {
    pub s: String,
    pub k: TokenKind,
}

/// One line of the ingestion format.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RawRecord {
    pub id: String,
    #[serde(default)]
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub text: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tokens: Option<Vec<RawToken>>,
    pub timestamp: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
}

pub fn parse_timestamp(raw: &str) -> Result<DateTime<Utc>> {
    let raw = raw.trim();
    if let Ok(t) = DateTime::parse_from_rfc3339(raw) {
        return Ok(t.with_timezone(&Utc));
    }
    for fmt in ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"] {
        if let Ok(t) = NaiveDateTime::parse_from_str(raw, fmt) {
            return Ok(t.and_utc());
        }
    }
    if let Ok(d) = NaiveDate::parse_from_str(raw, "%Y-%m-%d") {
        return Ok(d.and_hms_opt(0, 0, 0).expect("midnight").and_utc());
    }
    Err(Error::Timestamp(raw.to_string()))
}

#[derive(Clone, Debug, Default)]
pub struct Stopwords(HashSet<String>);

const ENGLISH_STOPWORDS: &str = "a about above after again against all am an and any are as at be \
because been before being below between both but by can could did do does doing down during each \
few for from further had has have having he her here hers herself him himself his how i if in into \
is it its itself just me more most my myself no nor not now of off on once only or other our ours \
ourselves out over own same she should so some such than that the their theirs them themselves then \
there these they this those through to too under until up very was we were what when where which \
while who whom why will with would you your yours yourself yourselves also said says one two new \
like get got may might must us";

impl Stopwords {
    pub fn none() -> Self {
        Stopwords(HashSet::new())
    }

    pub fn english() -> Self {
        Self::from_words(ENGLISH_STOPWORDS.split_whitespace())
    }

    pub fn from_words<'a>(words: impl IntoIterator<Item = &'a str>) -> Self {
        Stopwords(words.into_iter().map(str::to_lowercase).collect())
    }

    /// One word per line; blank lines and `#` comments are ignored.
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(io_err(path))?;
        Ok(Self::from_words(
            text.lines()
                .map(str::trim)
                .filter(|l| !l.is_empty() && !l.starts_with('#')),
        ))
    }

    pub fn contains(&self, word: &str) -> bool {
        self.0.contains(&word.to_lowercase())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Fallback tokenizer for unannotated text: whitespace split, non-alphabetic
/// characters dropped, lowercased, stopwords removed.
pub fn tokenize(text: &str, stopwords: &Stopwords) -> Vec<String> {
    text.split_whitespace()
        .map(|w| {
            w.chars()
                .filter(|c| c.is_alphabetic())
                .flat_map(char::to_lowercase)
                .collect::<String>()
        })
        .filter(|w| !w.is_empty() && !stopwords.contains(w))
        .collect()
}

#[derive(Clone, Debug)]
pub struct FilterConfig {
    /// Minimum length of the original text, in characters.
    pub min_chars: usize,
    /// Optional minimum number of tokens after tokenization.
    pub min_tokens: Option<usize>,
    pub exclude_categories: Vec<String>,
    pub stopwords: Stopwords,
    /// Drop words that occur more often in one document than in all others.
    pub drop_infrequent: bool,
}

impl Default for FilterConfig {
    fn default() -> Self {
        Self {
            min_chars: 500,
            min_tokens: None,
            exclude_categories: vec!["deals".to_string()],
            stopwords: Stopwords::english(),
            drop_infrequent: true,
        }
    }
}

impl FilterConfig {
    /// Keeps everything: no length, category, stopword or frequency filters.
    pub fn permissive() -> Self {
        Self {
            min_chars: 0,
            min_tokens: None,
            exclude_categories: Vec::new(),
            stopwords: Stopwords::none(),
            drop_infrequent: false,
        }
    }
}

/// A tokenized document before vocabulary construction.
#[derive(Clone, Debug)]
pub struct DocumentInput {
    pub id: String,
    pub title: String,
    pub category: Option<String>,
    pub timestamp: DateTime<Utc>,
    pub chars: usize,
    pub tokens: Vec<(String, TokenKind)>,
}

impl DocumentInput {
    /// Applies the record-level rules: annotated tokens win over text, the
    /// title is tokenized and placed in front, stopwords are removed from
    /// word tokens.
    pub fn from_record(record: RawRecord, stopwords: &Stopwords) -> Result<Self> {
        let timestamp = parse_timestamp(&record.timestamp)?;
        let mut tokens: Vec<(String, TokenKind)> = tokenize(&record.title, stopwords)
            .into_iter()
            .map(|w| (w, TokenKind::Word))
            .collect();
        let chars = match (&record.text, &record.tokens) {
            (Some(text), _) => text.chars().count(),
            (None, Some(toks)) => {
                toks.iter().map(|t| t.s.chars().count()).sum::<usize>()
                    + toks.len().saturating_sub(1)
            }
            (None, None) => 0,
        };
        match (record.tokens, record.text) {
            (Some(toks), _) => tokens.extend(
                toks.into_iter()
                    .filter(|t| t.k == TokenKind::Entity || !stopwords.contains(&t.s))
                    .filter(|t| !t.s.is_empty())
                    .map(|t| (t.s, t.k)),
            ),
            (None, Some(text)) => tokens.extend(
                tokenize(&text, stopwords)
                    .into_iter()
                    .map(|w| (w, TokenKind::Word)),
            ),
            (None, None) => {}
        }
        Ok(Self {
            id: record.id,
            title: record.title,
            category: record.category,
            timestamp,
            chars,
            tokens,
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VocabEntry {
    pub surface: String,
    pub kind: TokenKind,
    pub count: u64,
}

/// Dense word ids shared by words and entities.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(from = "Vec<VocabEntry>", into = "Vec<VocabEntry>")]
pub struct Vocabulary {
    entries: Vec<VocabEntry>,
    index: FxHashMap<(TokenKind, String), u32>,
}

impl From<Vec<VocabEntry>> for Vocabulary {
    fn from(entries: Vec<VocabEntry>) -> Self {
        let index = entries
            .iter()
            .enumerate()
            .map(|(i, e)| ((e.kind, e.surface.clone()), i as u32))
            .collect();
        Self { entries, index }
    }
}

impl From<Vocabulary> for Vec<VocabEntry> {
    fn from(v: Vocabulary) -> Self {
        v.entries
    }
}

impl Vocabulary {
    fn intern(&mut self, surface: &str, kind: TokenKind) -> u32 {
        if let Some(&id) = self.index.get(&(kind, surface.to_string())) {
            self.entries[id as usize].count += 1;
            return id;
        }
        let id = self.entries.len() as u32;
        self.entries.push(VocabEntry {
            surface: surface.to_string(),
            kind,
            count: 1,
        });
        self.index.insert((kind, surface.to_string()), id);
        id
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, id: u32) -> &VocabEntry {
        &self.entries[id as usize]
    }

    pub fn id(&self, surface: &str, kind: TokenKind) -> Option<u32> {
        self.index.get(&(kind, surface.to_string())).copied()
    }

    /// Looks a surface up as a word first, then as an entity.
    pub fn lookup(&self, surface: &str) -> Option<u32> {
        self.id(surface, TokenKind::Word)
            .or_else(|| self.id(surface, TokenKind::Entity))
    }

    pub fn surface(&self, id: u32) -> &str {
        &self.entries[id as usize].surface
    }

    pub fn kind(&self, id: u32) -> TokenKind {
        self.entries[id as usize].kind
    }

    pub fn count(&self, id: u32) -> u64 {
        self.entries[id as usize].count
    }

    pub fn entries(&self) -> &[VocabEntry] {
        &self.entries
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub id: String,
    pub title: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub category: Option<String>,
    pub timestamp: DateTime<Utc>,
    /// Normalized timestamp in `TIME_SCALE` fixed point.
    pub time: u64,
    pub tokens: Vec<u32>,
}

impl Document {
    pub fn tau(&self) -> f64 {
        fixed_to_tau(self.time)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub documents: Vec<Document>,
    pub vocab: Vocabulary,
    /// Total number of token instances.
    pub n: u64,
    pub t_min: DateTime<Utc>,
    pub t_max: DateTime<Utc>,
}

pub fn load_corpus(path: &Path, filters: &FilterConfig) -> Result<Corpus> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    let mut inputs = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record_err = |message: String| Error::Record {
            path: path.to_path_buf(),
            line: i + 1,
            message,
        };
        let record: RawRecord =
            serde_json::from_str(line).map_err(|e| record_err(e.to_string()))?;
        let input = DocumentInput::from_record(record, &filters.stopwords)
            .map_err(|e| record_err(e.to_string()))?;
        inputs.push(input);
    }
    Corpus::build(inputs, filters)
}

impl Corpus {
    /// Applies the document filters, builds the vocabulary, optionally drops
    /// infrequent words and normalizes timestamps.
    pub fn build(inputs: Vec<DocumentInput>, filters: &FilterConfig) -> Result<Corpus> {
        let mut vocab = Vocabulary::default();
        let mut documents = Vec::new();
        for input in inputs {
            if let Some(cat) = &input.category {
                if filters.exclude_categories.iter().any(|c| c == cat) {
                    continue;
                }
            }
            if input.chars < filters.min_chars {
                continue;
            }
            if filters.min_tokens.is_some_and(|m| input.tokens.len() < m) {
                continue;
            }
            if input.tokens.is_empty() {
                continue;
            }
            let tokens = input
                .tokens
                .iter()
                .map(|(s, k)| vocab.intern(s, *k))
                .collect();
            documents.push(Document {
                id: input.id,
                title: input.title,
                category: input.category,
                timestamp: input.timestamp,
                time: 0,
                tokens,
            });
        }
        let mut corpus = Corpus {
            n: 0,
            documents,
            vocab,
            t_min: DateTime::<Utc>::UNIX_EPOCH,
            t_max: DateTime::<Utc>::UNIX_EPOCH,
        };
        if filters.drop_infrequent {
            corpus = filter_infrequent(corpus);
        }
        corpus.finish()
    }

    /// Recounts, drops empty documents and normalizes timestamps.
    fn finish(mut self) -> Result<Corpus> {
        self.documents.retain(|d| !d.tokens.is_empty());
        if self.documents.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        self.n = self.documents.iter().map(|d| d.tokens.len() as u64).sum();
        let t_min = self.documents.iter().map(|d| d.timestamp).min().unwrap();
        let t_max = self.documents.iter().map(|d| d.timestamp).max().unwrap();
        self.t_min = t_min;
        self.t_max = t_max;
        let span = (t_max - t_min).num_milliseconds();
        if span == 0 {
            warn!("all documents share one timestamp; time modelling is disabled");
        }
        for doc in &mut self.documents {
            doc.time = if span == 0 {
                0
            } else {
                let offset = (doc.timestamp - t_min).num_milliseconds();
                // Exact rational rounding; the endpoints map to 0 and TIME_SCALE.
                ((offset as u128 * TIME_SCALE as u128 + span as u128 / 2) / span as u128) as u64
            };
        }
        Ok(self)
    }

    /// True when every document has the same timestamp.
    pub fn time_degenerate(&self) -> bool {
        self.t_min == self.t_max
    }

    pub fn vocab_len(&self) -> usize {
        self.vocab.len()
    }

    pub fn doc_index(&self, id: &str) -> Option<usize> {
        self.documents.iter().position(|d| d.id == id)
    }

    pub fn num_docs(&self) -> usize {
        self.documents.len()
    }
}

/// Removes every word whose largest count inside a single document strictly
/// exceeds its combined count in all other documents, then re-densifies the
/// vocabulary.
pub fn filter_infrequent(corpus: Corpus) -> Corpus {
    let v = corpus.vocab.len();
    let mut max_in_doc = vec![0u64; v];
    let mut local: FxHashMap<u32, u64> = FxHashMap::default();
    for doc in &corpus.documents {
        local.clear();
        for &w in &doc.tokens {
            *local.entry(w).or_default() += 1;
        }
        for (&w, &c) in &local {
            let m = &mut max_in_doc[w as usize];
            *m = (*m).max(c);
        }
    }
    let mut remap = vec![None; v];
    let mut entries = Vec::new();
    for (w, entry) in corpus.vocab.entries.iter().enumerate() {
        let total = entry.count;
        if max_in_doc[w] > total - max_in_doc[w] {
            continue;
        }
        remap[w] = Some(entries.len() as u32);
        entries.push(entry.clone());
    }
    let documents = corpus
        .documents
        .into_iter()
        .map(|mut d| {
            d.tokens = d.tokens.iter().filter_map(|&w| remap[w as usize]).collect();
            d
        })
        .collect();
    let rebuilt = Corpus {
        documents,
        vocab: Vocabulary::from(entries),
        ..corpus
    };
    match rebuilt.clone().finish() {
        Ok(c) => c,
        // Every document lost all of its tokens; keep the empty shell so the
        // caller's emptiness check reports it.
        Err(_) => Corpus {
            documents: Vec::new(),
            n: 0,
            ..rebuilt
        },
    }
}
