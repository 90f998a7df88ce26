//! Corpus ingestion. Articles become [`Document`]s; redirect records are
//! folded into their target's synonyms instead of becoming documents.

use std::collections::{BTreeMap, HashMap};
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::analysis::analyze;
use crate::error::{Error, Result};
use crate::persist;

pub type DocId = u32;

const STORE_MAGIC: &str = "TITLEQA-STORE";
const STORE_VERSION: u32 = 1;

/// Longest redirect chain followed before the redirect is dropped.
pub const MAX_REDIRECT_DEPTH: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub doc_id: DocId,
    pub title: String,
    pub synonyms: Vec<String>,
    pub body: String,
    pub popularity: f64,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorpusStats {
    pub documents: usize,
    pub tokens: usize,
}

/// One line of a corpus dump.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DumpRecord {
    pub title: String,
    #[serde(default)]
    pub text: String,
    #[serde(default)]
    pub redirect: Option<String>,
}

#[derive(Debug, Clone, Copy)]
pub struct IngestOptions {
    /// When false, redirect records are discarded outright.
    pub fold_redirects: bool,
}

impl Default for IngestOptions {
    fn default() -> Self {
        Self {
            fold_redirects: true,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct CorpusStore {
    documents: Vec<Document>,
    synonym_map: BTreeMap<String, DocId>,
    stats: CorpusStats,
    #[serde(skip)]
    warnings: Vec<String>,
}

impl CorpusStore {
    pub fn documents(&self) -> &[Document] {
        &self.documents
    }

    pub fn document(&self, id: DocId) -> Option<&Document> {
        self.documents.get(id as usize)
    }

    pub fn synonym_map(&self) -> &BTreeMap<String, DocId> {
        &self.synonym_map
    }

    pub fn stats(&self) -> CorpusStats {
        self.stats
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }

    /// Warnings raised while building this store (not persisted).
    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn lookup_title(&self, title: &str) -> Option<DocId> {
        self.documents
            .iter()
            .find(|d| d.title == title)
            .map(|d| d.doc_id)
            .or_else(|| self.synonym_map.get(title).copied())
    }

    /// Set every document's popularity to `ln(1 + views)` of its title.
    pub fn apply_pageviews(&mut self, views: &PageViewStats) {
        for doc in &mut self.documents {
            doc.popularity = popularity_score(views, &doc.title);
        }
    }

    /// Build a store from already-parsed records, in order.
    pub fn from_records<I>(records: I, opts: IngestOptions) -> Self
    where
        I: IntoIterator<Item = DumpRecord>,
    {
        let mut builder = Builder::default();
        for rec in records {
            builder.push(rec, opts);
        }
        builder.finish()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        persist::write_framed(path, STORE_MAGIC, STORE_VERSION, self, false)
    }

    pub fn load(path: &Path) -> Result<Self> {
        persist::read_framed(path, STORE_MAGIC, STORE_VERSION)
    }

    fn warn(&mut self, msg: String) {
        warn!("{msg}");
        self.warnings.push(msg);
    }
}

#[derive(Default)]
struct Builder {
    store: CorpusStore,
    by_title: HashMap<String, DocId>,
    // source title -> target title, in input order
    redirects: Vec<(String, String)>,
}

impl Builder {
    fn push(&mut self, rec: DumpRecord, opts: IngestOptions) {
        if let Some(target) = rec.redirect {
            if opts.fold_redirects {
                self.redirects.push((rec.title, target));
            }
            return;
        }
        if let Some(&id) = self.by_title.get(&rec.title) {
            self.store.warn(format!(
                "duplicate title {:?}: later record replaces earlier",
                rec.title
            ));
            self.store.documents[id as usize].body = rec.text;
            return;
        }
        let doc_id = self.store.documents.len() as DocId;
        self.by_title.insert(rec.title.clone(), doc_id);
        self.store.documents.push(Document {
            doc_id,
            title: rec.title,
            synonyms: Vec::new(),
            body: rec.text,
            popularity: 0.0,
        });
    }

    fn finish(mut self) -> CorpusStore {
        let redirect_of: HashMap<&str, &str> = self
            .redirects
            .iter()
            .map(|(s, t)| (s.as_str(), t.as_str()))
            .collect();
        let mut resolved = Vec::new();
        let mut warnings = Vec::new();
        for (source, target) in &self.redirects {
            match resolve(target, &redirect_of, &self.by_title) {
                Ok(id) => resolved.push((source.clone(), id)),
                Err(why) => {
                    warnings.push(format!("redirect {source:?} -> {target:?} dropped: {why}"))
                }
            }
        }
        for (source, id) in resolved {
            if self.by_title.contains_key(&source) {
                warnings.push(format!(
                    "redirect {source:?} dropped: an article already has that title"
                ));
                continue;
            }
            if let Some(&prev) = self.store.synonym_map.get(&source) {
                if prev != id {
                    warnings.push(format!(
                        "redirect {source:?} dropped: already a synonym of another document"
                    ));
                }
                continue;
            }
            self.store.synonym_map.insert(source.clone(), id);
            self.store.documents[id as usize].synonyms.push(source);
        }
        for w in warnings {
            self.store.warn(w);
        }
        self.store.stats = CorpusStats {
            documents: self.store.documents.len(),
            tokens: self
                .store
                .documents
                .iter()
                .map(|d| analyze(&d.body).len())
                .sum(),
        };
        self.store
    }
}

fn resolve(
    target: &str,
    redirect_of: &HashMap<&str, &str>,
    by_title: &HashMap<String, DocId>,
) -> std::result::Result<DocId, &'static str> {
    let mut current = target;
    for _ in 0..MAX_REDIRECT_DEPTH {
        if let Some(&id) = by_title.get(current) {
            return Ok(id);
        }
        match redirect_of.get(current) {
            Some(next) => current = next,
            None => return Err("target does not exist"),
        }
    }
    Err("redirect chain too deep")
}

/// Read a JSON Lines dump with redirects folded into synonyms.
pub fn ingest_corpus(dump_path: &Path) -> Result<CorpusStore> {
    ingest_corpus_with(dump_path, IngestOptions::default())
}

pub fn ingest_corpus_with(dump_path: &Path, opts: IngestOptions) -> Result<CorpusStore> {
    let file = File::open(dump_path).map_err(|e| Error::io(dump_path, e))?;
    let mut records = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(dump_path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let malformed = |message: String| Error::Malformed {
            path: dump_path.to_path_buf(),
            line: i + 1,
            message,
        };
        let rec: DumpRecord = serde_json::from_str(&line).map_err(|e| malformed(e.to_string()))?;
        if rec.title.trim().is_empty() {
            return Err(malformed("empty title".into()));
        }
        if matches!(&rec.redirect, Some(t) if t.trim().is_empty()) {
            return Err(malformed("empty redirect target".into()));
        }
        records.push(rec);
    }
    Ok(CorpusStore::from_records(records, opts))
}

/// Per-title page view counts.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PageViewStats {
    views: HashMap<String, u64>,
    warnings: Vec<String>,
}

impl PageViewStats {
    pub fn views(&self, title: &str) -> u64 {
        self.views.get(title).copied().unwrap_or(0)
    }

    pub fn add(&mut self, title: &str, count: u64) {
        *self.views.entry(title.to_string()).or_insert(0) += count;
    }

    pub fn len(&self) -> usize {
        self.views.len()
    }

    pub fn is_empty(&self) -> bool {
        self.views.is_empty()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }
}

/// Read `title<TAB>count` lines, summing duplicates. Lines whose count is
/// not a non-negative integer are skipped with a warning.
pub fn load_pageviews(tsv_path: &Path) -> Result<PageViewStats> {
    let file = File::open(tsv_path).map_err(|e| Error::io(tsv_path, e))?;
    let mut stats = PageViewStats::default();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| Error::io(tsv_path, e))?;
        if line.is_empty() {
            continue;
        }
        let parsed = line
            .rsplit_once('\t')
            .and_then(|(title, count)| count.trim().parse::<u64>().ok().map(|c| (title, c)));
        match parsed {
            Some((title, count)) => stats.add(title, count),
            None => {
                let msg = format!(
                    "{}:{}: skipping bad page-view line",
                    tsv_path.display(),
                    i + 1
                );
                warn!("{msg}");
                stats.warnings.push(msg);
            }
        }
    }
    Ok(stats)
}

/// `ln(1 + views)`; zero for unseen titles.
pub fn popularity_score(stats: &PageViewStats, title: &str) -> f64 {
    (stats.views(title) as f64).ln_1p()
}
