use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Field, UnitId};
use crate::analysis::{analyze, analyze_with_offsets};
use crate::corpus::{CorpusStore, DocId};
use crate::error::{Error, Result};
use crate::persist;

/// Passage window length, in analyzed tokens.
pub const PASSAGE_WINDOW: usize = 50;
/// Distance between consecutive passage window starts.
pub const PASSAGE_STRIDE: usize = 25;

const INDEX_MAGIC: &str = "TITLEQA-INDEX";
const INDEX_VERSION: u32 = 1;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub(crate) struct FieldIndex {
    /// term -> (unit, term frequency), sorted by unit
    postings: BTreeMap<String, Vec<(UnitId, u32)>>,
    unit_len: Vec<u32>,
    /// Euclidean norm of each unit's tf-idf vector.
    norms: Vec<f64>,
    total_terms: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FieldStats {
    pub units: usize,
    pub total_terms: u64,
    pub vocabulary: usize,
}

impl FieldIndex {
    fn with_units(n: usize) -> Self {
        Self {
            unit_len: vec![0; n],
            ..Self::default()
        }
    }

    fn add(&mut self, unit: UnitId, terms: &[String]) {
        for t in terms {
            let list = self.postings.entry(t.clone()).or_default();
            match list.last_mut() {
                Some((u, tf)) if *u == unit => *tf += 1,
                _ => list.push((unit, 1)),
            }
        }
        self.unit_len[unit as usize] += terms.len() as u32;
        self.total_terms += terms.len() as u64;
    }

    fn finish(&mut self) {
        let n = self.unit_len.len() as f64;
        let mut sq = vec![0.0f64; self.unit_len.len()];
        for list in self.postings.values() {
            let idf = (n / list.len() as f64).ln();
            for &(u, tf) in list {
                let w = tf as f64 * idf;
                sq[u as usize] += w * w;
            }
        }
        self.norms = sq.into_iter().map(f64::sqrt).collect();
    }

    pub(crate) fn units(&self) -> usize {
        self.unit_len.len()
    }

    pub(crate) fn postings(&self, term: &str) -> &[(UnitId, u32)] {
        self.postings.get(term).map(Vec::as_slice).unwrap_or(&[])
    }

    pub(crate) fn df(&self, term: &str) -> usize {
        self.postings(term).len()
    }

    pub(crate) fn collection_tf(&self, term: &str) -> u64 {
        self.postings(term).iter().map(|&(_, tf)| tf as u64).sum()
    }

    pub(crate) fn total_terms(&self) -> u64 {
        self.total_terms
    }

    pub(crate) fn unit_len(&self, unit: UnitId) -> u32 {
        self.unit_len[unit as usize]
    }

    pub(crate) fn norm(&self, unit: UnitId) -> f64 {
        self.norms[unit as usize]
    }

    fn stats(&self) -> FieldStats {
        FieldStats {
            units: self.units(),
            total_terms: self.total_terms,
            vocabulary: self.postings.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Passage {
    pub doc_id: DocId,
    /// Offset of the window's first token within the document's analyzed body.
    pub offset: usize,
    /// The source text spanned by the window.
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub(crate) struct DocEntry {
    pub title: String,
    pub synonyms: Vec<String>,
    pub popularity: f64,
}

/// Per-field postings over a corpus plus the passage table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InvertedIndex {
    title: FieldIndex,
    content: FieldIndex,
    passage: FieldIndex,
    passages: Vec<Passage>,
    /// First passage of each document, if any.
    first_passage: Vec<Option<UnitId>>,
    docs: Vec<DocEntry>,
    title_lookup: BTreeMap<String, DocId>,
}

impl InvertedIndex {
    /// Index titles (with synonyms), bodies, and overlapping body windows.
    pub fn build(corpus: &CorpusStore) -> Result<Self> {
        if corpus.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        let n = corpus.len();
        let mut title = FieldIndex::with_units(n);
        let mut content = FieldIndex::with_units(n);
        let mut passages = Vec::new();
        let mut first_passage = Vec::with_capacity(n);
        let mut docs = Vec::with_capacity(n);
        let mut title_lookup = BTreeMap::new();
        let mut windows: Vec<Vec<String>> = Vec::new();

        for doc in corpus.documents() {
            let id = doc.doc_id;
            let mut title_terms = analyze(&doc.title).tokens().to_vec();
            for syn in &doc.synonyms {
                title_terms.extend_from_slice(analyze(syn).tokens());
                title_lookup.entry(syn.clone()).or_insert(id);
            }
            title_lookup.insert(doc.title.clone(), id);
            title.add(id, &title_terms);

            let body = analyze_with_offsets(&doc.body);
            let terms: Vec<String> = body.iter().map(|t| t.term.clone()).collect();
            content.add(id, &terms);

            first_passage.push((!body.is_empty()).then_some(passages.len() as UnitId));
            let mut offset = 0;
            while offset < body.len() {
                let end = (offset + PASSAGE_WINDOW).min(body.len());
                let span = &body[offset..end];
                passages.push(Passage {
                    doc_id: id,
                    offset,
                    text: doc.body[span[0].start..span[span.len() - 1].end].to_string(),
                });
                windows.push(terms[offset..end].to_vec());
                offset += PASSAGE_STRIDE;
            }

            docs.push(DocEntry {
                title: doc.title.clone(),
                synonyms: doc.synonyms.clone(),
                popularity: doc.popularity,
            });
        }

        let mut passage = FieldIndex::with_units(passages.len());
        for (pid, w) in windows.iter().enumerate() {
            passage.add(pid as UnitId, w);
        }
        for f in [&mut title, &mut content, &mut passage] {
            f.finish();
        }
        Ok(Self {
            title,
            content,
            passage,
            passages,
            first_passage,
            docs,
            title_lookup,
        })
    }

    pub(crate) fn field(&self, field: Field) -> &FieldIndex {
        match field {
            Field::Title => &self.title,
            Field::Content => &self.content,
            Field::Passage => &self.passage,
        }
    }

    pub fn field_stats(&self, field: Field) -> FieldStats {
        self.field(field).stats()
    }

    /// Document frequency of an analyzed term in `field`.
    pub fn doc_freq(&self, field: Field, term: &str) -> usize {
        self.field(field).df(term)
    }

    /// Units of `field` containing `term`, with term frequencies.
    pub fn postings(&self, field: Field, term: &str) -> &[(UnitId, u32)] {
        self.field(field).postings(term)
    }

    pub fn doc_count(&self) -> usize {
        self.docs.len()
    }

    pub fn passages(&self) -> &[Passage] {
        &self.passages
    }

    pub fn passage(&self, id: UnitId) -> &Passage {
        &self.passages[id as usize]
    }

    pub fn doc_title(&self, id: DocId) -> &str {
        &self.docs[id as usize].title
    }

    pub fn doc_synonyms(&self, id: DocId) -> &[String] {
        &self.docs[id as usize].synonyms
    }

    pub fn doc_popularity(&self, id: DocId) -> f64 {
        self.docs[id as usize].popularity
    }

    /// Text of the document's first passage window; empty for empty bodies.
    pub fn excerpt(&self, id: DocId) -> &str {
        match self.first_passage[id as usize] {
            Some(p) => &self.passages[p as usize].text,
            None => "",
        }
    }

    /// Resolve a title or redirect synonym to its document.
    pub fn lookup_title(&self, title: &str) -> Option<DocId> {
        self.title_lookup.get(title).copied()
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        persist::write_framed(path, INDEX_MAGIC, INDEX_VERSION, self, false)
    }

    pub fn load(path: &Path) -> Result<Self> {
        persist::read_framed(path, INDEX_MAGIC, INDEX_VERSION)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{DumpRecord, IngestOptions};

    fn corpus(recs: &[(&str, &str, Option<&str>)]) -> CorpusStore {
        CorpusStore::from_records(
            recs.iter().map(|(t, x, r)| DumpRecord {
                title: t.to_string(),
                text: x.to_string(),
                redirect: r.map(str::to_string),
            }),
            IngestOptions::default(),
        )
    }

    fn words(n: usize) -> String {
        (0..n)
            .map(|i| format!("w{i}"))
            .collect::<Vec<_>>()
            .join(" ")
    }

    #[test]
    fn passage_windows_at_stride() {
        let idx = InvertedIndex::build(&corpus(&[("D", &words(60), None)])).unwrap();
        let offsets: Vec<usize> = idx.passages().iter().map(|p| p.offset).collect();
        assert_eq!(offsets, vec![0, 25, 50]);
        assert_eq!(idx.field(Field::Passage).unit_len(2), 10);
        assert!(idx.passage(2).text.starts_with("w50"));
        assert!(idx.passage(2).text.ends_with("w59"));
        assert_eq!(idx.excerpt(0), idx.passage(0).text);
    }

    #[test]
    fn synonyms_are_title_terms() {
        let idx = InvertedIndex::build(&corpus(&[
            ("University of North Carolina at Charlotte", "campus", None),
            (
                "UNCC",
                "",
                Some("University of North Carolina at Charlotte"),
            ),
        ]))
        .unwrap();
        assert_eq!(idx.postings(Field::Title, "uncc"), &[(0, 1)]);
        assert_eq!(idx.lookup_title("UNCC"), Some(0));
    }

    #[test]
    fn empty_body_is_indexed_by_title_only() {
        let idx = InvertedIndex::build(&corpus(&[("Lonely Title", "", None)])).unwrap();
        assert_eq!(idx.field_stats(Field::Content).vocabulary, 0);
        assert_eq!(idx.field_stats(Field::Title).total_terms, 2);
        assert!(idx.passages().is_empty());
        assert_eq!(idx.excerpt(0), "");
    }

    #[test]
    fn empty_corpus_is_an_error() {
        assert!(matches!(
            InvertedIndex::build(&CorpusStore::default()),
            Err(Error::EmptyCorpus)
        ));
    }

    #[test]
    fn statistics_are_consistent() {
        let idx = InvertedIndex::build(&corpus(&[
            ("A", "red green red", None),
            ("B", "green blue", None),
            ("C", &words(80), None),
        ]))
        .unwrap();
        for field in [Field::Title, Field::Content, Field::Passage] {
            let f = idx.field(field);
            let mut lens = vec![0u32; f.units()];
            for list in f.postings.values() {
                for &(u, tf) in list {
                    lens[u as usize] += tf;
                }
                let mut units: Vec<_> = list.iter().map(|p| p.0).collect();
                units.dedup();
                assert_eq!(units.len(), list.len());
            }
            assert_eq!(lens, f.unit_len);
            assert_eq!(f.total_terms, lens.iter().map(|&l| l as u64).sum::<u64>());
        }
        assert_eq!(idx.doc_freq(Field::Content, "green"), 2);
        assert_eq!(idx.postings(Field::Content, "red"), &[(0, 2)]);
        assert!(idx
            .passages()
            .iter()
            .all(|p| (p.doc_id as usize) < idx.doc_count()));
    }

    #[test]
    fn save_load_roundtrip() {
        let idx = InvertedIndex::build(&corpus(&[("A", "x y z", None)])).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("index");
        idx.save(&p).unwrap();
        assert_eq!(InvertedIndex::load(&p).unwrap(), idx);
        std::fs::write(&p, "NOT-AN-INDEX v9\n{}").unwrap();
        assert!(matches!(InvertedIndex::load(&p), Err(Error::Format { .. })));
    }
}
