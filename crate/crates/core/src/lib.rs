//! Answer trivia questions with encyclopedia titles: index an article dump,
//! retrieve and merge title candidates, score their supporting passages and
//! rank them with a trained confidence model.

pub mod analysis;
pub mod config;
pub mod corpus;
pub mod error;
pub mod eval;
mod persist;
pub mod pipeline;
pub mod ranker;
pub mod scoring;
pub mod search;
pub mod training;

pub use analysis::{analyze, token_set_match, TokenStream};
pub use config::RunConfig;
pub use corpus::{
    ingest_corpus, ingest_corpus_with, load_pageviews, CorpusStore, DocId, Document, IngestOptions,
};
pub use error::{Error, Result};
pub use eval::{compute_metrics, load_questions, render_table, run_eval, EvalReport, Metrics};
pub use pipeline::{
    answer_question, CandidateAnswer, Category, PipelineConfig, Question, Resources,
};
pub use ranker::{FeatureMatrix, Model, TrainingConfig};
pub use scoring::{FeatureLayout, ScoreVector};
pub use search::{EngineConfig, EngineId, InvertedIndex, Query, SearchResult, WebMock};
pub use training::{collect_training_data, fit_model, write_feature_dump, TrainingData};
