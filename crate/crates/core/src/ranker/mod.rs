//! Confidence models: turn a candidate's feature vector into one number in
//! `[0, 1]`, and order candidates by it.
//!
//! Learners are looked up by name ([`learner_by_name`]) so a run's config can
//! pick one without the pipeline knowing which.

mod logistic;
mod naive_bayes;

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pipeline::CandidateAnswer;
use crate::scoring::{FeatureLayout, ScoreVector};

pub use logistic::{
    column_moments, sigmoid, standardize, train_logistic, LogisticModel, Objective,
};
pub use naive_bayes::{train_naive_bayes, ClassGaussians, NaiveBayesModel, VARIANCE_FLOOR};

pub const MODEL_FORMAT_VERSION: u32 = 1;

/// Candidates-by-dimensions training data with 0/1 correctness labels.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub dimensions: Vec<String>,
    pub layout_hash: String,
    pub rows: Vec<Vec<f64>>,
    pub labels: Vec<u8>,
}

impl FeatureMatrix {
    pub fn new(
        dimensions: Vec<String>,
        layout_hash: String,
        rows: Vec<Vec<f64>>,
        labels: Vec<u8>,
    ) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Config(format!(
                "{} rows but {} labels",
                rows.len(),
                labels.len()
            )));
        }
        if let Some(r) = rows.iter().position(|r| r.len() != dimensions.len()) {
            return Err(Error::Config(format!(
                "row {r} has {} values, layout has {}",
                rows[r].len(),
                dimensions.len()
            )));
        }
        if labels.iter().any(|&y| y > 1) {
            return Err(Error::Config("labels must be 0 or 1".into()));
        }
        Ok(Self {
            dimensions,
            layout_hash,
            rows,
            labels,
        })
    }

    pub fn empty(layout: &FeatureLayout) -> Self {
        Self {
            dimensions: layout.names().to_vec(),
            layout_hash: layout.hash().to_string(),
            rows: Vec::new(),
            labels: Vec::new(),
        }
    }

    pub fn push(&mut self, v: &ScoreVector, label: bool) -> Result<()> {
        if v.layout_hash != self.layout_hash {
            return Err(Error::LayoutMismatch {
                expected: self.layout_hash.clone(),
                found: v.layout_hash.clone(),
            });
        }
        self.rows.push(v.values.clone());
        self.labels.push(label as u8);
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.dimensions.len()
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn positives(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }

    pub(crate) fn check_trainable(&self) -> Result<()> {
        for (row, r) in self.rows.iter().enumerate() {
            if let Some(column) = r.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row, column });
            }
        }
        let pos = self.positives();
        if pos == 0 || pos == self.len() {
            return Err(Error::SingleClass);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingConfig {
    pub learning_rate: f64,
    pub epochs: usize,
    pub l2: f64,
    /// `None` means `#negatives / #positives`.
    pub positive_weight: Option<f64>,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.1,
            epochs: 500,
            l2: 1e-4,
            positive_weight: None,
            seed: 0,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::Config(
                "learning rate must be finite and >= 0".into(),
            ));
        }
        if self.epochs == 0 {
            return Err(Error::Config("epochs must be at least 1".into()));
        }
        if self.l2.is_nan() || self.l2 < 0.0 {
            return Err(Error::Config("l2 strength must be >= 0".into()));
        }
        if let Some(w) = self.positive_weight {
            if !(w > 0.0 && w.is_finite()) {
                return Err(Error::Config("positive-class weight must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// A fitted (or trivial) confidence model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "learner", rename_all = "kebab-case")]
pub enum Model {
    /// Untrained: every candidate gets 0.5.
    Uniform,
    Logistic(LogisticModel),
    NaiveBayes(NaiveBayesModel),
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    #[serde(flatten)]
    model: Model,
}

impl Model {
    pub fn name(&self) -> &'static str {
        match self {
            Model::Uniform => "uniform",
            Model::Logistic(_) => "logistic",
            Model::NaiveBayes(_) => "naive-bayes",
        }
    }

    pub fn layout_hash(&self) -> Option<&str> {
        match self {
            Model::Uniform => None,
            Model::Logistic(m) => Some(&m.layout_hash),
            Model::NaiveBayes(m) => Some(&m.layout_hash),
        }
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let file = ModelFile {
            format_version: MODEL_FORMAT_VERSION,
            model: self.clone(),
        };
        let mut text = serde_json::to_string_pretty(&file).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        text.push('\n');
        fs::write(path, text).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::Format {
            path: path.to_path_buf(),
            message: e.to_string(),
        })?;
        if file.format_version != MODEL_FORMAT_VERSION {
            return Err(Error::Format {
                path: path.to_path_buf(),
                message: format!("unsupported model format version {}", file.format_version),
            });
        }
        Ok(file.model)
    }
}

/// Confidence in `[0, 1]` for one feature vector.
pub fn predict_confidence(model: &Model, v: &ScoreVector) -> Result<f64> {
    if let Some(expected) = model.layout_hash() {
        if expected != v.layout_hash {
            return Err(Error::LayoutMismatch {
                expected: expected.to_string(),
                found: v.layout_hash.clone(),
            });
        }
    }
    match model {
        Model::Uniform => Ok(0.5),
        Model::Logistic(m) => {
            m.check_width(v.values.len())?;
            Ok(m.predict_row(&v.values))
        }
        Model::NaiveBayes(m) => Ok(m.predict_row(&v.values)),
    }
}

/// Something that fits a [`Model`] to a feature matrix.
pub trait Learner {
    fn name(&self) -> &'static str;
    fn fit(&self, m: &FeatureMatrix) -> Result<Model>;
}

pub struct LogisticLearner(pub TrainingConfig);

impl Learner for LogisticLearner {
    fn name(&self) -> &'static str {
        "logistic"
    }

    fn fit(&self, m: &FeatureMatrix) -> Result<Model> {
        train_logistic(m, &self.0).map(Model::Logistic)
    }
}

pub struct NaiveBayesLearner;

impl Learner for NaiveBayesLearner {
    fn name(&self) -> &'static str {
        "naive-bayes"
    }

    fn fit(&self, m: &FeatureMatrix) -> Result<Model> {
        train_naive_bayes(m).map(Model::NaiveBayes)
    }
}

pub const LEARNERS: &[&str] = &["logistic", "naive-bayes"];

pub fn learner_by_name(name: &str, cfg: &TrainingConfig) -> Result<Box<dyn Learner>> {
    match name {
        "logistic" => Ok(Box::new(LogisticLearner(cfg.clone()))),
        "naive-bayes" => Ok(Box::new(NaiveBayesLearner)),
        other => Err(Error::Config(format!(
            "unknown learner `{other}` (known: {})",
            LEARNERS.join(", ")
        ))),
    }
}

/// Set every candidate's confidence, sort by confidence descending (ties by
/// answer text ascending) and number the result from 1.
pub fn rank_candidates(
    mut cands: Vec<CandidateAnswer>,
    model: &Model,
) -> Result<Vec<CandidateAnswer>> {
    for c in &mut cands {
        if let Some(v) = &c.score_vector {
            c.confidence = predict_confidence(model, v)?;
        } else if matches!(model, Model::Uniform) {
            c.confidence = 0.5;
        } else {
            return Err(Error::Config(format!(
                "candidate {:?} has no feature vector",
                c.answer_text
            )));
        }
    }
    order_by_confidence(&mut cands);
    Ok(cands)
}

/// Sort already-scored candidates and assign final ranks.
pub fn order_by_confidence(cands: &mut [CandidateAnswer]) {
    cands.sort_by(|a, b| {
        b.confidence
            .total_cmp(&a.confidence)
            .then_with(|| a.answer_text.cmp(&b.answer_text))
    });
    for (i, c) in cands.iter_mut().enumerate() {
        c.final_rank = i + 1;
    }
}
