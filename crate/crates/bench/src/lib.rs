//! Inputs shared by the benchmarks: the bundled mini-corpus, indexed.

use std::path::PathBuf;

use titleqa::{
    ingest_corpus, load_pageviews, load_questions, CorpusStore, InvertedIndex, Question,
};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data/minicorpus")
}

pub fn corpus() -> CorpusStore {
    let dir = data_dir();
    let mut store = ingest_corpus(&dir.join("corpus.jsonl")).expect("mini-corpus");
    store.apply_pageviews(&load_pageviews(&dir.join("pageviews.tsv")).expect("page views"));
    store
}

pub fn index() -> InvertedIndex {
    InvertedIndex::build(&corpus()).expect("index")
}

pub fn questions() -> Vec<Question> {
    load_questions(&data_dir().join("questions.jsonl")).expect("questions")
}
