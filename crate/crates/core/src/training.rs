//! Turning labelled questions into a feature matrix and a fitted model.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use log::{info, warn};

use crate::analysis::token_set_match;
use crate::error::{Error, Result};
use crate::eval::map_in_order;
use crate::pipeline::{answer_question_with_layout, PipelineConfig, Question, Resources};
use crate::ranker::{learner_by_name, FeatureMatrix, Model, TrainingConfig};

/// A feature matrix plus the (question, answer) pair behind each row.
#[derive(Debug, Clone)]
pub struct TrainingData {
    pub matrix: FeatureMatrix,
    pub keys: Vec<(String, String)>,
}

/// Run the pipeline over every question with a gold answer and label each
/// candidate by token-set match against it.
pub fn collect_training_data(
    questions: &[Question],
    res: &Resources<'_>,
    cfg: &PipelineConfig,
    workers: usize,
) -> Result<TrainingData> {
    let layout = cfg.layout();
    let labelled: Vec<&Question> = questions
        .iter()
        .filter(|q| {
            q.gold_answer
                .as_deref()
                .is_some_and(|g| !g.trim().is_empty())
        })
        .collect();
    let per_question = map_in_order(&labelled, workers, |q| {
        match answer_question_with_layout(q, res, &Model::Uniform, cfg, &layout) {
            Err(Error::NoQuery) => {
                warn!("no query terms for {:?}", q.text);
                Ok(Vec::new())
            }
            other => other,
        }
    })?;

    let mut matrix = FeatureMatrix::empty(&layout);
    let mut keys = Vec::new();
    for (q, cands) in labelled.iter().zip(per_question) {
        let gold = q.gold_answer.as_deref().unwrap_or_default();
        for c in cands {
            if let Some(v) = &c.score_vector {
                matrix.push(v, token_set_match(&c.answer_text, gold))?;
                keys.push((q.text.clone(), c.answer_text.clone()));
            }
        }
    }
    info!(
        "{} training rows ({} positive) from {} questions",
        matrix.len(),
        matrix.positives(),
        labelled.len()
    );
    Ok(TrainingData { matrix, keys })
}

pub fn fit_model(data: &TrainingData, learner: &str, training: &TrainingConfig) -> Result<Model> {
    training.validate()?;
    learner_by_name(learner, training)?.fit(&data.matrix)
}

fn clean(s: &str) -> String {
    s.replace(['\t', '\n', '\r'], " ")
}

/// Write the matrix as TSV: question, answer, label, then one column per
/// dimension.
pub fn write_feature_dump(path: &Path, data: &TrainingData) -> Result<()> {
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = BufWriter::new(file);
    let mut emit = || -> std::io::Result<()> {
        write!(w, "question\tanswer\tlabel")?;
        for d in &data.matrix.dimensions {
            write!(w, "\t{d}")?;
        }
        writeln!(w)?;
        for (((q, a), row), y) in data
            .keys
            .iter()
            .zip(&data.matrix.rows)
            .zip(&data.matrix.labels)
        {
            write!(w, "{}\t{}\t{y}", clean(q), clean(a))?;
            for v in row {
                write!(w, "\t{v}")?;
            }
            writeln!(w)?;
        }
        w.flush()
    };
    emit().map_err(|e| Error::io(path, e))
}
