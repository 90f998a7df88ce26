//! Retrieval: the inverted index, two ranking backends over it, a
//! fixture-backed stand-in for a remote web engine, and capped fusion of
//! their result lists.

mod fusion;
mod index;
mod qlm;
mod vsm;
mod webmock;

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::DocId;
use crate::error::{Error, Result};

pub use fusion::fuse_results;
pub use index::{FieldStats, InvertedIndex, Passage, PASSAGE_STRIDE, PASSAGE_WINDOW};
pub use qlm::search_qlm;
pub use vsm::search_vsm;
pub use webmock::{search_webmock, WebMock, WebMockEntry, WebMockHit};

/// Identifier of an index unit: a document id for the title and content
/// fields, a passage id for the passage field.
pub type UnitId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    Title,
    Content,
    Passage,
}

impl Field {
    pub fn name(self) -> &'static str {
        match self {
            Field::Title => "title",
            Field::Content => "content",
            Field::Passage => "passage",
        }
    }
}

/// Search engines, in the fixed order used for fusion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EngineId {
    Vsm,
    Qlm,
    Webmock,
}

impl EngineId {
    pub const ALL: [EngineId; 3] = [EngineId::Vsm, EngineId::Qlm, EngineId::Webmock];

    pub fn name(self) -> &'static str {
        match self {
            EngineId::Vsm => "vsm",
            EngineId::Qlm => "qlm",
            EngineId::Webmock => "webmock",
        }
    }

    /// Whether the engine reports a native relevance score.
    pub fn has_native_score(self) -> bool {
        !matches!(self, EngineId::Webmock)
    }

    /// Whether the engine can serve passage-field queries.
    pub fn serves_passages(self) -> bool {
        !matches!(self, EngineId::Webmock)
    }
}

impl fmt::Display for EngineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EngineId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "vsm" => Ok(EngineId::Vsm),
            "qlm" => Ok(EngineId::Qlm),
            "webmock" => Ok(EngineId::Webmock),
            other => Err(Error::Config(format!("unknown engine `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Clause {
    pub field: Field,
    /// An analyzed term.
    pub term: String,
    pub weight: f64,
}

/// A weighted bag of per-field term clauses. A query targets either
/// documents (title/content clauses) or passages, never both.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Query {
    clauses: Vec<Clause>,
}

impl Query {
    pub fn new(clauses: Vec<Clause>) -> Result<Self> {
        let passages = clauses.iter().filter(|c| c.field == Field::Passage).count();
        if passages != 0 && passages != clauses.len() {
            return Err(Error::MixedQuery);
        }
        if let Some(c) = clauses.iter().find(|c| c.weight.is_nan() || c.weight < 0.0) {
            return Err(Error::Config(format!(
                "clause weight for `{}` must be non-negative",
                c.term
            )));
        }
        Ok(Self { clauses })
    }

    /// One clause per term for every `(field, weight)` pair.
    pub fn from_terms<S: AsRef<str>>(terms: &[S], fields: &[(Field, f64)]) -> Result<Self> {
        let clauses = fields
            .iter()
            .flat_map(|&(field, weight)| {
                terms.iter().map(move |t| Clause {
                    field,
                    term: t.as_ref().to_string(),
                    weight,
                })
            })
            .collect();
        Self::new(clauses)
    }

    pub fn clauses(&self) -> &[Clause] {
        &self.clauses
    }

    pub fn is_empty(&self) -> bool {
        self.clauses.is_empty()
    }

    pub fn targets_passages(&self) -> bool {
        self.clauses
            .first()
            .map(|c| c.field == Field::Passage)
            .unwrap_or(false)
    }

    /// Distinct terms in first-seen order.
    pub fn normalized_terms(&self) -> Vec<String> {
        let mut out: Vec<String> = Vec::new();
        for c in &self.clauses {
            if !out.contains(&c.term) {
                out.push(c.term.clone());
            }
        }
        out
    }

    /// Multiply every weight by `factor` (must be positive).
    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            clauses: self
                .clauses
                .iter()
                .map(|c| Clause {
                    weight: c.weight * factor,
                    ..c.clone()
                })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchResult {
    pub engine: EngineId,
    pub unit_id: UnitId,
    /// Owning document, when the hit resolves to an indexed document.
    pub doc_id: Option<DocId>,
    pub title: String,
    pub text: String,
    /// 1-based rank within the engine's list.
    pub rank: u32,
    pub native_score: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct EngineCaps {
    pub vsm: usize,
    pub qlm: usize,
    pub webmock: usize,
    pub total: usize,
}

impl EngineCaps {
    pub fn for_engine(&self, engine: EngineId) -> usize {
        match engine {
            EngineId::Vsm => self.vsm,
            EngineId::Qlm => self.qlm,
            EngineId::Webmock => self.webmock,
        }
    }
}

impl Default for EngineCaps {
    fn default() -> Self {
        Self {
            vsm: 20,
            qlm: 20,
            webmock: 50,
            total: 90,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineConfig {
    pub caps: EngineCaps,
    /// When false, fusion applies neither per-engine nor total caps.
    pub caps_enabled: bool,
    /// Result depth requested from each engine. `None` means the engine's
    /// cap (or unbounded when caps are disabled).
    pub depth: Option<usize>,
    /// Dirichlet smoothing mass for the query-likelihood engine.
    pub mu: f64,
    pub content_weight: f64,
    pub title_weight: f64,
}

impl Default for EngineConfig {
    fn default() -> Self {
        Self {
            caps: EngineCaps::default(),
            caps_enabled: true,
            depth: None,
            mu: 2000.0,
            content_weight: 1.0,
            title_weight: 0.3,
        }
    }
}

impl EngineConfig {
    /// How many results to request from `engine`.
    pub fn depth_for(&self, engine: EngineId) -> usize {
        match (self.depth, self.caps_enabled) {
            (Some(d), _) => d,
            (None, true) => self.caps.for_engine(engine),
            (None, false) => usize::MAX,
        }
    }
}

/// Score descending, then unit id ascending.
pub(crate) fn rank_order(a: &(UnitId, f64), b: &(UnitId, f64)) -> Ordering {
    b.1.total_cmp(&a.1).then(a.0.cmp(&b.0))
}

/// Sort scored units, keep the top `k`, and turn them into results.
pub(crate) fn top_k(
    index: &InvertedIndex,
    engine: EngineId,
    passages: bool,
    mut scored: Vec<(UnitId, f64)>,
    k: usize,
) -> Vec<SearchResult> {
    scored.sort_by(rank_order);
    scored.truncate(k);
    scored
        .into_iter()
        .enumerate()
        .map(|(i, (unit_id, score))| {
            let (doc_id, text) = if passages {
                let p = index.passage(unit_id);
                (p.doc_id, p.text.clone())
            } else {
                (unit_id, index.excerpt(unit_id).to_string())
            };
            SearchResult {
                engine,
                unit_id,
                doc_id: Some(doc_id),
                title: index.doc_title(doc_id).to_string(),
                text,
                rank: i as u32 + 1,
                native_score: Some(score),
            }
        })
        .collect()
}
