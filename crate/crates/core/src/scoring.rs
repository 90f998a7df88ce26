//! Evidence scoring. Every supporting passage of a candidate gets a map of
//! named scores; a candidate's passages are then collapsed to min/max/mean
//! per score and laid out in a fixed, name-sorted feature vector.

use std::collections::{BTreeMap, HashMap, HashSet};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{extract_ngrams, NGramKind, TokenStream};
use crate::error::{Error, Result};
use crate::search::{EngineId, SearchResult};

/// Named scores for one supporting passage. A missing key means the scorer
/// had nothing to say about this passage.
pub type EvidenceScores = BTreeMap<String, f64>;

/// Which retrieval step produced a piece of evidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    /// First-stage answer search; the hit's title became the candidate.
    Search,
    /// Second-stage passage retrieval for a candidate.
    Passage,
}

impl Stage {
    pub fn name(self) -> &'static str {
        match self {
            Stage::Search => "search",
            Stage::Passage => "passage",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub stage: Stage,
    pub result: SearchResult,
}

/// Scorer families that can be switched on and off per run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScorerSet {
    pub ngram: bool,
    pub phrase: bool,
    pub rank: bool,
    pub popularity: bool,
}

impl Default for ScorerSet {
    fn default() -> Self {
        Self {
            ngram: true,
            phrase: true,
            rank: true,
            popularity: true,
        }
    }
}

impl ScorerSet {
    pub fn names(&self) -> Vec<&'static str> {
        let mut v = Vec::new();
        if self.ngram {
            v.push("ngram");
        }
        if self.phrase {
            v.push("phrase");
        }
        if self.rank {
            v.push("rank");
        }
        if self.popularity {
            v.push("popularity");
        }
        v
    }

    pub fn parse_list(s: &str) -> Result<Self> {
        let mut set = ScorerSet {
            ngram: false,
            phrase: false,
            rank: false,
            popularity: false,
        };
        for name in s.split(',').map(str::trim).filter(|n| !n.is_empty()) {
            match name {
                "ngram" => set.ngram = true,
                "phrase" => set.phrase = true,
                "rank" => set.rank = true,
                "popularity" => set.popularity = true,
                other => return Err(Error::Config(format!("unknown scorer `{other}`"))),
            }
        }
        Ok(set)
    }
}

/// Overlap between two analyzed texts, over distinct grams.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Overlap {
    pub unigram: usize,
    /// Common unigrams over the summed lengths of both texts.
    pub unigram_rel: f64,
    pub bigram: usize,
    pub skip_bigram: usize,
    pub trigram: usize,
}

fn common_grams(a: &TokenStream, b: &TokenStream, kind: NGramKind) -> usize {
    let ga = extract_ngrams(a, kind);
    let gb = extract_ngrams(b, kind);
    let sb = gb.distinct();
    ga.distinct().iter().filter(|g| sb.contains(*g)).count()
}

pub fn overlap(a: &TokenStream, b: &TokenStream) -> Overlap {
    let unigram = common_grams(a, b, NGramKind::Unigram);
    let total = a.len() + b.len();
    Overlap {
        unigram,
        unigram_rel: if total == 0 {
            0.0
        } else {
            unigram as f64 / total as f64
        },
        bigram: common_grams(a, b, NGramKind::Bigram),
        skip_bigram: common_grams(a, b, NGramKind::SkipBigram),
        trigram: common_grams(a, b, NGramKind::Trigram),
    }
}

/// N-gram overlap of the passage with the question and with the candidate.
pub fn ngram_overlap_scores(
    passage: &TokenStream,
    question: &TokenStream,
    candidate: &TokenStream,
) -> EvidenceScores {
    let mut out = EvidenceScores::new();
    for (side, other) in [("question", question), ("candidate", candidate)] {
        let o = overlap(passage, other);
        out.insert(format!("ngram.{side}.unigram"), o.unigram as f64);
        out.insert(format!("ngram.{side}.unigram_rel"), o.unigram_rel);
        out.insert(format!("ngram.{side}.bigram"), o.bigram as f64);
        out.insert(format!("ngram.{side}.skip_bigram"), o.skip_bigram as f64);
        out.insert(format!("ngram.{side}.trigram"), o.trigram as f64);
    }
    out
}

/// Default longest phrase length considered by [`common_phrase_score`].
pub const DEFAULT_PHRASE_MAX_K: usize = 12;

/// Number of distinct common contiguous k-grams, summed over
/// `k = 2..=min(|a|, |b|, max_k)`. A shared phrase of length L counts each
/// of its sub-phrases, so long matches weigh super-linearly.
pub fn common_phrase_score(a: &TokenStream, b: &TokenStream, max_k: usize) -> f64 {
    let (a, b) = (a.tokens(), b.tokens());
    let upper = a.len().min(b.len()).min(max_k);
    let mut total = 0usize;
    for k in 2..=upper {
        let sb: HashSet<&[String]> = b.windows(k).collect();
        let common = a
            .windows(k)
            .collect::<HashSet<_>>()
            .into_iter()
            .filter(|g| sb.contains(g))
            .count();
        if common == 0 {
            // every longer common phrase contains a common k-gram
            break;
        }
        total += common;
    }
    total as f64
}

/// Reciprocal rank, plus the engine's native score when it has one.
pub fn engine_rank_scores(result: &SearchResult, stage: Stage) -> EvidenceScores {
    let prefix = format!("rank.{}.{}", stage.name(), result.engine.name());
    let mut out = EvidenceScores::new();
    out.insert(format!("{prefix}.rr"), 1.0 / result.rank.max(1) as f64);
    if let Some(s) = result.native_score {
        out.insert(format!("{prefix}.score"), s);
    }
    out
}

/// All enabled per-passage scores for one piece of evidence.
pub fn score_passage(
    evidence: &Evidence,
    passage: &TokenStream,
    question: &TokenStream,
    candidate: &TokenStream,
    scorers: &ScorerSet,
    phrase_max_k: usize,
) -> EvidenceScores {
    let mut out = EvidenceScores::new();
    if scorers.ngram {
        out.extend(ngram_overlap_scores(passage, question, candidate));
    }
    if scorers.phrase {
        out.insert(
            "phrase.question".into(),
            common_phrase_score(passage, question, phrase_max_k),
        );
        out.insert(
            "phrase.candidate".into(),
            common_phrase_score(passage, candidate, phrase_max_k),
        );
    }
    if scorers.rank {
        out.extend(engine_rank_scores(&evidence.result, evidence.stage));
    }
    out
}

/// `<name>.min`, `<name>.max` and `<name>.mean` of every score, over the
/// passages that carry it.
pub fn aggregate_evidence(per_passage: &[EvidenceScores]) -> Result<BTreeMap<String, f64>> {
    if per_passage.is_empty() {
        return Err(Error::NoEvidence);
    }
    let mut columns: BTreeMap<&str, Vec<f64>> = BTreeMap::new();
    for scores in per_passage {
        for (name, &v) in scores {
            columns.entry(name.as_str()).or_default().push(v);
        }
    }
    let mut out = BTreeMap::new();
    for (name, values) in columns {
        let min = values.iter().copied().fold(f64::INFINITY, f64::min);
        let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let mean = values.iter().sum::<f64>() / values.len() as f64;
        // keep mean inside [min, max] despite rounding
        let mean = mean.clamp(min, max);
        out.insert(format!("{name}.min"), min);
        out.insert(format!("{name}.max"), max);
        out.insert(format!("{name}.mean"), mean);
    }
    Ok(out)
}

/// Sorted, de-duplicated feature names shared by every candidate of a run.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureLayout {
    names: Vec<String>,
    positions: HashMap<String, usize>,
    hash: String,
}

impl FeatureLayout {
    pub fn new<I, S>(names: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let mut names: Vec<String> = names.into_iter().map(Into::into).collect();
        names.sort();
        names.dedup();
        let mut hasher = Sha256::new();
        for n in &names {
            hasher.update(n.as_bytes());
            hasher.update([0u8]);
        }
        let hash = hex::encode(&hasher.finalize()[..8]);
        let positions = names
            .iter()
            .enumerate()
            .map(|(i, n)| (n.clone(), i))
            .collect();
        Self {
            names,
            positions,
            hash,
        }
    }

    /// The layout implied by the enabled engines and scorers.
    pub fn for_run(
        search_engines: &[EngineId],
        passage_engines: &[EngineId],
        scorers: &ScorerSet,
    ) -> Self {
        let mut base: Vec<String> = Vec::new();
        if scorers.ngram {
            for side in ["question", "candidate"] {
                for g in ["unigram", "unigram_rel", "bigram", "skip_bigram", "trigram"] {
                    base.push(format!("ngram.{side}.{g}"));
                }
            }
        }
        if scorers.phrase {
            base.push("phrase.question".into());
            base.push("phrase.candidate".into());
        }
        let mut names = Vec::new();
        let stages = [
            (Stage::Search, search_engines),
            (Stage::Passage, passage_engines),
        ];
        for (stage, engines) in stages {
            for &engine in engines {
                if stage == Stage::Passage && !engine.serves_passages() {
                    continue;
                }
                if scorers.rank {
                    let prefix = format!("rank.{}.{}", stage.name(), engine.name());
                    base.push(format!("{prefix}.rr"));
                    if engine.has_native_score() {
                        base.push(format!("{prefix}.score"));
                    }
                }
                names.push(presence_name(stage, engine));
            }
        }
        for b in base {
            for agg in ["min", "max", "mean"] {
                names.push(format!("{b}.{agg}"));
            }
        }
        if scorers.popularity {
            names.push(POPULARITY.to_string());
        }
        Self::new(names)
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.positions.get(name).copied()
    }

    /// Short stable digest of the layout.
    pub fn hash(&self) -> &str {
        &self.hash
    }
}

pub const POPULARITY: &str = "popularity";

/// Name of the 0/1 flag recording whether `engine` produced evidence at `stage`.
pub fn presence_name(stage: Stage, engine: EngineId) -> String {
    format!("present.{}.{}", stage.name(), engine.name())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreVector {
    pub values: Vec<f64>,
    pub layout_hash: String,
}

/// Fill a vector from aggregates plus candidate-level extras. Dimensions
/// without a value are zero.
pub fn assemble_feature_vector(
    layout: &FeatureLayout,
    aggregates: &BTreeMap<String, f64>,
    extras: &BTreeMap<String, f64>,
) -> Result<ScoreVector> {
    let mut values = vec![0.0; layout.len()];
    for (name, &v) in aggregates.iter().chain(extras) {
        let pos = layout
            .position(name)
            .ok_or_else(|| Error::UnknownDimension(name.clone()))?;
        values[pos] = v;
    }
    Ok(ScoreVector {
        values,
        layout_hash: layout.hash().to_string(),
    })
}
