//! Question answering pipeline: classify the clue, query the engines, turn
//! hit titles into candidate answers, gather supporting passages, score
//! them and rank.

use std::collections::{BTreeMap, HashMap};
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use crate::analysis::{analyze, TokenStream};
use crate::corpus::DocId;
use crate::error::{Error, Result};
use crate::ranker::{rank_candidates, Model};
use crate::scoring::{
    aggregate_evidence, assemble_feature_vector, presence_name, score_passage, Evidence,
    FeatureLayout, ScoreVector, ScorerSet, Stage, DEFAULT_PHRASE_MAX_K, POPULARITY,
};
use crate::search::{
    fuse_results, search_qlm, search_vsm, EngineConfig, EngineId, Field, InvertedIndex, Query,
    SearchResult, UnitId, WebMock,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Category {
    #[serde(rename = "FACTOID")]
    Factoid,
    /// Fill in the blank.
    #[serde(rename = "FITB")]
    Fitb,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Factoid => "FACTOID",
            Category::Fitb => "FITB",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "FACTOID" => Some(Category::Factoid),
            "FITB" => Some(Category::Fitb),
            _ => None,
        }
    }
}

fn blank_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"_{2,}").expect("valid regex"))
}

/// FITB iff the text holds a run of two or more underscores.
pub fn classify_question(text: &str) -> Category {
    if blank_re().is_match(text) {
        Category::Fitb
    } else {
        Category::Factoid
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Question {
    pub text: String,
    pub category: Category,
    pub gold_answer: Option<String>,
}

impl Question {
    pub fn new(text: impl Into<String>, gold_answer: Option<String>) -> Self {
        let text = text.into();
        let category = classify_question(&text);
        Self {
            text,
            category,
            gold_answer,
        }
    }

    pub fn with_category(mut self, category: Category) -> Self {
        self.category = category;
        self
    }

    /// The text the engines see: blanks removed for FITB clues.
    pub fn query_text(&self) -> String {
        match self.category {
            Category::Factoid => self.text.clone(),
            Category::Fitb => blank_re().replace_all(&self.text, "").into_owned(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateAnswer {
    pub answer_text: String,
    pub source_titles: Vec<String>,
    pub source_docs: Vec<DocId>,
    pub evidence: Vec<Evidence>,
    pub score_vector: Option<ScoreVector>,
    pub confidence: f64,
    /// 1-based; 0 until ranked.
    pub final_rank: usize,
}

impl CandidateAnswer {
    pub fn new(answer_text: String) -> Self {
        Self {
            answer_text,
            source_titles: Vec::new(),
            source_docs: Vec::new(),
            evidence: Vec::new(),
            score_vector: None,
            confidence: 0.0,
            final_rank: 0,
        }
    }

    /// Evidence with the highest-ranked passage-stage hit, falling back to
    /// the first evidence item.
    pub fn best_evidence(&self) -> Option<&Evidence> {
        self.evidence
            .iter()
            .filter(|e| e.stage == Stage::Passage)
            .min_by_key(|e| e.result.rank)
            .or_else(|| self.evidence.first())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Engines queried for answer candidates, in any order.
    pub engines: Vec<EngineId>,
    /// Engines queried for supporting passages.
    pub passage_engines: Vec<EngineId>,
    pub engine: EngineConfig,
    /// Passages retrieved per candidate from each passage engine.
    pub passage_depth: usize,
    /// Also propose each hit document's redirect synonyms as answers.
    pub synonym_candidates: bool,
    pub scorers: ScorerSet,
    pub phrase_max_k: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            engines: vec![EngineId::Vsm, EngineId::Qlm],
            passage_engines: vec![EngineId::Vsm, EngineId::Qlm],
            engine: EngineConfig::default(),
            passage_depth: 5,
            synonym_candidates: true,
            scorers: ScorerSet::default(),
            phrase_max_k: DEFAULT_PHRASE_MAX_K,
        }
    }
}

impl PipelineConfig {
    pub fn layout(&self) -> FeatureLayout {
        let mut search = self.engines.clone();
        search.sort();
        search.dedup();
        let mut passage: Vec<EngineId> = self
            .passage_engines
            .iter()
            .copied()
            .filter(|e| e.serves_passages())
            .collect();
        passage.sort();
        passage.dedup();
        FeatureLayout::for_run(&search, &passage, &self.scorers)
    }
}

/// What the pipeline searches over.
#[derive(Debug, Clone, Copy)]
pub struct Resources<'a> {
    pub index: &'a InvertedIndex,
    pub webmock: Option<&'a WebMock>,
}

fn weighted_query(text: &str, cfg: &PipelineConfig) -> Result<Query> {
    let tokens = analyze(text);
    if tokens.is_empty() {
        return Err(Error::NoQuery);
    }
    Query::from_terms(
        tokens.tokens(),
        &[
            (Field::Content, cfg.engine.content_weight),
            (Field::Title, cfg.engine.title_weight),
        ],
    )
}

/// Every analyzed question term against content (favoured) and title
/// (disfavoured).
pub fn build_factoid_query(q: &Question, cfg: &PipelineConfig) -> Result<Query> {
    weighted_query(&q.text, cfg)
}

/// As the factoid query, over the clue with its blanks deleted.
pub fn build_fitb_query(q: &Question, cfg: &PipelineConfig) -> Result<Query> {
    weighted_query(&blank_re().replace_all(&q.text, ""), cfg)
}

pub fn build_query(q: &Question, cfg: &PipelineConfig) -> Result<Query> {
    match q.category {
        Category::Factoid => build_factoid_query(q, cfg),
        Category::Fitb => build_fitb_query(q, cfg),
    }
}

/// Lowercased alphanumerics with single spaces for whitespace runs and
/// other characters dropped, plus each output char's source byte range.
fn normalize_for_alignment(s: &str) -> (Vec<char>, Vec<(usize, usize)>) {
    let mut chars = Vec::new();
    let mut spans = Vec::new();
    for (i, c) in s.char_indices() {
        let end = i + c.len_utf8();
        if c.is_alphanumeric() {
            for lc in c.to_lowercase() {
                chars.push(lc);
                spans.push((i, end));
            }
        } else if c.is_whitespace() && chars.last().is_some_and(|&l| l != ' ') {
            chars.push(' ');
            spans.push((i, end));
        }
    }
    (chars, spans)
}

fn normalize_fragment(s: &str) -> Vec<char> {
    let mut out: Vec<char> = Vec::new();
    for c in s.chars() {
        if c.is_alphanumeric() {
            out.extend(c.to_lowercase());
        } else if c.is_whitespace() && out.last() != Some(&' ') {
            out.push(' ');
        }
    }
    out
}

/// The part of `title` covering the clue's blanks: the question text before
/// the first blank and after the last must align with the title's start
/// and end. Known text between blanks is kept.
pub fn extract_fitb_answer(title: &str, q: &Question) -> Option<String> {
    let blanks: Vec<_> = blank_re().find_iter(&q.text).collect();
    let (first, last) = (blanks.first()?, blanks.last()?);
    let prefix = normalize_fragment(&q.text[..first.start()]);
    let suffix = normalize_fragment(&q.text[last.end()..]);
    // a fragment that is only a separator aligns with anything
    let prefix: &[char] = if prefix == [' '] { &[] } else { &prefix };
    let suffix: &[char] = if suffix == [' '] { &[] } else { &suffix };

    let (chars, spans) = normalize_for_alignment(title);
    let n = chars.len();
    // trailing separator in the title would block suffix alignment
    let n = if chars.last() == Some(&' ') { n - 1 } else { n };
    if prefix.len() + suffix.len() > n
        || chars[..prefix.len()] != *prefix
        || chars[n - suffix.len()..n] != *suffix
    {
        return None;
    }
    let (lo, hi) = (prefix.len(), n - suffix.len());
    if lo >= hi {
        return None;
    }
    let answer = title[spans[lo].0..spans[hi - 1].1].trim();
    (!answer.is_empty()).then(|| answer.to_string())
}

/// One candidate per result title (and per redirect synonym when enabled).
/// FITB clues keep only titles that align with the blanks.
pub fn generate_candidates(
    results: &[SearchResult],
    q: &Question,
    index: Option<&InvertedIndex>,
    synonym_candidates: bool,
) -> Vec<CandidateAnswer> {
    let mut out = Vec::new();
    for r in results {
        let mut titles = vec![r.title.clone()];
        if synonym_candidates {
            if let (Some(idx), Some(doc)) = (index, r.doc_id) {
                titles.extend(idx.doc_synonyms(doc).iter().cloned());
            }
        }
        for title in titles {
            let answer = match q.category {
                Category::Factoid => Some(title.clone()),
                Category::Fitb => extract_fitb_answer(&title, q),
            };
            let Some(answer_text) = answer else { continue };
            let mut c = CandidateAnswer::new(answer_text);
            c.source_titles.push(r.title.clone());
            c.source_docs.extend(r.doc_id);
            c.evidence.push(Evidence {
                stage: Stage::Search,
                result: r.clone(),
            });
            out.push(c);
        }
    }
    out
}

/// Merge candidates whose answers have the same analyzed term set. The
/// longest spelling survives; evidence and sources are concatenated.
pub fn merge_candidates(cands: Vec<CandidateAnswer>) -> Vec<CandidateAnswer> {
    let mut out: Vec<CandidateAnswer> = Vec::new();
    let mut by_terms: HashMap<Vec<String>, usize> = HashMap::new();
    for c in cands {
        let key: Vec<String> = analyze(&c.answer_text)
            .term_set()
            .into_iter()
            .map(str::to_string)
            .collect();
        match by_terms.get(&key) {
            Some(&i) => {
                let target = &mut out[i];
                if c.answer_text.chars().count() > target.answer_text.chars().count() {
                    target.answer_text = c.answer_text;
                }
                for t in c.source_titles {
                    if !target.source_titles.contains(&t) {
                        target.source_titles.push(t);
                    }
                }
                for d in c.source_docs {
                    if !target.source_docs.contains(&d) {
                        target.source_docs.push(d);
                    }
                }
                target.evidence.extend(c.evidence);
            }
            None => {
                by_terms.insert(key, out.len());
                out.push(c);
            }
        }
    }
    out
}

fn run_engine(
    engine: EngineId,
    res: &Resources<'_>,
    query: &Query,
    k: usize,
    cfg: &PipelineConfig,
) -> Vec<SearchResult> {
    match engine {
        EngineId::Vsm => search_vsm(res.index, query, k),
        EngineId::Qlm => search_qlm(res.index, query, k, cfg.engine.mu),
        EngineId::Webmock => res
            .webmock
            .map(|w| w.search(query, k, Some(res.index)))
            .unwrap_or_default(),
    }
}

/// Query every enabled engine and fuse the capped lists.
pub fn retrieve(
    q: &Question,
    res: &Resources<'_>,
    cfg: &PipelineConfig,
) -> Result<Vec<SearchResult>> {
    let query = build_query(q, cfg)?;
    let mut lists = BTreeMap::new();
    for &engine in &cfg.engines {
        if lists.contains_key(&engine) {
            continue;
        }
        let k = cfg.engine.depth_for(engine);
        lists.insert(engine, run_engine(engine, res, &query, k, cfg));
    }
    Ok(fuse_results(&lists, &cfg.engine))
}

/// Candidates for `q` with their search-stage evidence, merged, but not
/// yet scored.
pub fn candidate_set(
    q: &Question,
    res: &Resources<'_>,
    cfg: &PipelineConfig,
) -> Result<Vec<CandidateAnswer>> {
    let fused = retrieve(q, res, cfg)?;
    Ok(merge_candidates(generate_candidates(
        &fused,
        q,
        Some(res.index),
        cfg.synonym_candidates,
    )))
}

/// Attach supporting passages and a feature vector to every candidate.
pub fn score_candidates(
    q: &Question,
    cands: &mut [CandidateAnswer],
    res: &Resources<'_>,
    cfg: &PipelineConfig,
    layout: &FeatureLayout,
) -> Result<()> {
    let question = analyze(&q.query_text());
    let mut token_cache: HashMap<(EngineId, bool, UnitId), TokenStream> = HashMap::new();
    for cand in cands.iter_mut() {
        let answer = analyze(&cand.answer_text);
        let mut terms = question.clone();
        terms.extend(&answer);
        if !terms.is_empty() {
            let pq = Query::from_terms(terms.tokens(), &[(Field::Passage, 1.0)])?;
            for &engine in &cfg.passage_engines {
                if !engine.serves_passages() {
                    continue;
                }
                for r in run_engine(engine, res, &pq, cfg.passage_depth, cfg) {
                    cand.evidence.push(Evidence {
                        stage: Stage::Passage,
                        result: r,
                    });
                }
            }
        }

        let mut per_passage = Vec::with_capacity(cand.evidence.len());
        for ev in &cand.evidence {
            let r = &ev.result;
            let key = (r.engine, ev.stage == Stage::Passage, r.unit_id);
            let passage = token_cache.entry(key).or_insert_with(|| analyze(&r.text));
            per_passage.push(score_passage(
                ev,
                passage,
                &question,
                &answer,
                &cfg.scorers,
                cfg.phrase_max_k,
            ));
        }
        let aggregates = aggregate_evidence(&per_passage)?;

        let mut extras = BTreeMap::new();
        for ev in &cand.evidence {
            let stage_ok = ev.stage == Stage::Search || ev.result.engine.serves_passages();
            if stage_ok {
                extras.insert(presence_name(ev.stage, ev.result.engine), 1.0);
            }
        }
        if cfg.scorers.popularity {
            let best = cand
                .source_docs
                .iter()
                .map(|&d| res.index.doc_popularity(d))
                .fold(0.0, f64::max);
            extras.insert(POPULARITY.to_string(), best);
        }
        cand.score_vector = Some(assemble_feature_vector(layout, &aggregates, &extras)?);
    }
    Ok(())
}

/// Question in, ranked candidate answers out.
pub fn answer_question(
    q: &Question,
    res: &Resources<'_>,
    model: &Model,
    cfg: &PipelineConfig,
) -> Result<Vec<CandidateAnswer>> {
    let layout = cfg.layout();
    answer_question_with_layout(q, res, model, cfg, &layout)
}

pub fn answer_question_with_layout(
    q: &Question,
    res: &Resources<'_>,
    model: &Model,
    cfg: &PipelineConfig,
    layout: &FeatureLayout,
) -> Result<Vec<CandidateAnswer>> {
    let mut cands = candidate_set(q, res, cfg)?;
    score_candidates(q, &mut cands, res, cfg, layout)?;
    rank_candidates(cands, model)
}
