//! Gaussian naive Bayes, kept as a comparison baseline for the logistic
//! ranker.

use serde::{Deserialize, Serialize};

use super::FeatureMatrix;
use crate::error::Result;

pub const VARIANCE_FLOOR: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassGaussians {
    pub log_prior: f64,
    pub means: Vec<f64>,
    pub variances: Vec<f64>,
}

impl ClassGaussians {
    fn fit(rows: &[&Vec<f64>], width: usize, prior: f64) -> Self {
        let n = rows.len() as f64;
        let mut means = vec![0.0; width];
        for r in rows {
            for (m, v) in means.iter_mut().zip(r.iter()) {
                *m += v / n;
            }
        }
        let mut variances = vec![0.0; width];
        for r in rows {
            for ((s, v), m) in variances.iter_mut().zip(r.iter()).zip(&means) {
                *s += (v - m) * (v - m) / n;
            }
        }
        for s in variances.iter_mut() {
            *s = s.max(VARIANCE_FLOOR);
        }
        Self {
            log_prior: prior.ln(),
            means,
            variances,
        }
    }

    fn log_joint(&self, row: &[f64]) -> f64 {
        let ll: f64 = row
            .iter()
            .zip(&self.means)
            .zip(&self.variances)
            .map(|((x, m), v)| {
                -0.5 * ((2.0 * std::f64::consts::PI * v).ln() + (x - m) * (x - m) / v)
            })
            .sum();
        self.log_prior + ll
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NaiveBayesModel {
    pub dimensions: Vec<String>,
    pub layout_hash: String,
    pub negative: ClassGaussians,
    pub positive: ClassGaussians,
}

pub fn train_naive_bayes(m: &FeatureMatrix) -> Result<NaiveBayesModel> {
    m.check_trainable()?;
    let width = m.width();
    let (pos, neg): (Vec<_>, Vec<_>) = m.rows.iter().zip(&m.labels).partition(|(_, &y)| y == 1);
    let pos: Vec<&Vec<f64>> = pos.into_iter().map(|(r, _)| r).collect();
    let neg: Vec<&Vec<f64>> = neg.into_iter().map(|(r, _)| r).collect();
    let n = m.rows.len() as f64;
    Ok(NaiveBayesModel {
        dimensions: m.dimensions.clone(),
        layout_hash: m.layout_hash.clone(),
        negative: ClassGaussians::fit(&neg, width, neg.len() as f64 / n),
        positive: ClassGaussians::fit(&pos, width, pos.len() as f64 / n),
    })
}

impl NaiveBayesModel {
    /// Posterior probability of the positive class.
    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let lp = self.positive.log_joint(row);
        let ln = self.negative.log_joint(row);
        let top = lp.max(ln);
        let log_evidence = top + ((lp - top).exp() + (ln - top).exp()).ln();
        (lp - log_evidence).exp().clamp(0.0, 1.0)
    }
}
