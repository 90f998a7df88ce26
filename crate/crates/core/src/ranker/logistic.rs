//! Class-weighted, L2-regularized logistic regression trained by full-batch
//! gradient descent on z-scored features.

use serde::{Deserialize, Serialize};

use super::{FeatureMatrix, TrainingConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LogisticModel {
    pub dimensions: Vec<String>,
    pub layout_hash: String,
    pub means: Vec<f64>,
    pub deviations: Vec<f64>,
    pub weights: Vec<f64>,
    pub bias: f64,
    pub config: TrainingConfig,
    /// Positive-class weight actually used (resolved from the config).
    pub positive_weight: f64,
}

pub fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Column means and population standard deviations; constant columns get
/// deviation 1.
pub fn column_moments(rows: &[Vec<f64>], width: usize) -> (Vec<f64>, Vec<f64>) {
    let n = rows.len().max(1) as f64;
    let mut means = vec![0.0; width];
    for r in rows {
        for (m, v) in means.iter_mut().zip(r) {
            *m += v;
        }
    }
    means.iter_mut().for_each(|m| *m /= n);
    let mut devs = vec![0.0; width];
    for r in rows {
        for ((d, v), m) in devs.iter_mut().zip(r).zip(&means) {
            *d += (v - m) * (v - m);
        }
    }
    for d in devs.iter_mut() {
        *d = (*d / n).sqrt();
        if d.is_nan() || *d <= 1e-12 {
            *d = 1.0;
        }
    }
    (means, devs)
}

pub fn standardize(row: &[f64], means: &[f64], devs: &[f64]) -> Vec<f64> {
    row.iter()
        .zip(means)
        .zip(devs)
        .map(|((v, m), d)| (v - m) / d)
        .collect()
}

/// The training objective: per-example weights `c_i` (the positive-class
/// weight for positives, 1 for negatives),
/// `(1/n) * sum c_i * CE(y_i, sigmoid(w.x_i + b)) + (l2/2) * |w|^2`.
#[derive(Debug, Clone, Copy)]
pub struct Objective<'a> {
    pub rows: &'a [Vec<f64>],
    pub labels: &'a [u8],
    pub positive_weight: f64,
    pub l2: f64,
}

impl Objective<'_> {
    fn example_weight(&self, y: u8) -> f64 {
        if y == 1 {
            self.positive_weight
        } else {
            1.0
        }
    }

    pub fn loss(&self, weights: &[f64], bias: f64) -> f64 {
        let n = self.rows.len() as f64;
        let mut total = 0.0;
        for (x, &y) in self.rows.iter().zip(self.labels) {
            let z = dot(weights, x) + bias;
            // -ln sigmoid(z) = softplus(-z)
            let ce = if y == 1 { softplus(-z) } else { softplus(z) };
            total += self.example_weight(y) * ce;
        }
        total / n + 0.5 * self.l2 * dot(weights, weights)
    }

    /// Gradient of [`Objective::loss`] with respect to `(weights, bias)`.
    pub fn gradient(&self, weights: &[f64], bias: f64) -> (Vec<f64>, f64) {
        let n = self.rows.len() as f64;
        let mut gw = vec![0.0; weights.len()];
        let mut gb = 0.0;
        for (x, &y) in self.rows.iter().zip(self.labels) {
            let err = self.example_weight(y) * (sigmoid(dot(weights, x) + bias) - y as f64);
            for (g, v) in gw.iter_mut().zip(x) {
                *g += err * v;
            }
            gb += err;
        }
        for (g, w) in gw.iter_mut().zip(weights) {
            *g = *g / n + self.l2 * w;
        }
        (gw, gb / n)
    }
}

fn softplus(z: f64) -> f64 {
    if z > 0.0 {
        z + (-z).exp().ln_1p()
    } else {
        z.exp().ln_1p()
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn train_logistic(m: &FeatureMatrix, cfg: &TrainingConfig) -> Result<LogisticModel> {
    cfg.validate()?;
    m.check_trainable()?;
    let width = m.width();
    let (means, deviations) = column_moments(&m.rows, width);
    let rows: Vec<Vec<f64>> = m
        .rows
        .iter()
        .map(|r| standardize(r, &means, &deviations))
        .collect();
    let positives = m.labels.iter().filter(|&&y| y == 1).count();
    let negatives = m.labels.len() - positives;
    let positive_weight = cfg
        .positive_weight
        .unwrap_or(negatives as f64 / positives as f64);
    let objective = Objective {
        rows: &rows,
        labels: &m.labels,
        positive_weight,
        l2: cfg.l2,
    };
    let mut weights = vec![0.0; width];
    let mut bias = 0.0;
    for _ in 0..cfg.epochs {
        let (gw, gb) = objective.gradient(&weights, bias);
        for (w, g) in weights.iter_mut().zip(&gw) {
            *w -= cfg.learning_rate * g;
        }
        bias -= cfg.learning_rate * gb;
    }
    Ok(LogisticModel {
        dimensions: m.dimensions.clone(),
        layout_hash: m.layout_hash.clone(),
        means,
        deviations,
        weights,
        bias,
        config: cfg.clone(),
        positive_weight,
    })
}

impl LogisticModel {
    /// A model with every weight and the bias at zero: predicts 0.5.
    pub fn zeroed(dimensions: Vec<String>, layout_hash: String) -> Self {
        let n = dimensions.len();
        Self {
            dimensions,
            layout_hash,
            means: vec![0.0; n],
            deviations: vec![1.0; n],
            weights: vec![0.0; n],
            bias: 0.0,
            config: TrainingConfig::default(),
            positive_weight: 1.0,
        }
    }

    pub fn predict_row(&self, row: &[f64]) -> f64 {
        let z = standardize(row, &self.means, &self.deviations);
        sigmoid(dot(&self.weights, &z) + self.bias)
    }

    pub(crate) fn check_width(&self, width: usize) -> Result<()> {
        if width != self.weights.len() {
            return Err(Error::LayoutMismatch {
                expected: format!("{} dimensions", self.weights.len()),
                found: format!("{width} dimensions"),
            });
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> FeatureMatrix {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..20 {
            rows.push(vec![-1.0]);
            labels.push(0);
            rows.push(vec![1.0]);
            labels.push(1);
        }
        FeatureMatrix::new(vec!["x".into()], "h".into(), rows, labels).unwrap()
    }

    #[test]
    fn separable_toy_set() {
        let m = toy();
        let model = train_logistic(&m, &TrainingConfig::default()).unwrap();
        for (r, &y) in m.rows.iter().zip(&m.labels) {
            assert_eq!((model.predict_row(r) >= 0.5) as u8, y);
        }
    }

    #[test]
    fn zero_rate_keeps_zero_weights() {
        let cfg = TrainingConfig {
            learning_rate: 0.0,
            epochs: 1,
            ..TrainingConfig::default()
        };
        let model = train_logistic(&toy(), &cfg).unwrap();
        assert!(model.weights.iter().all(|&w| w == 0.0));
        assert_eq!(model.bias, 0.0);
        for x in [-5.0, 0.0, 2.0] {
            assert_eq!(model.predict_row(&[x]), 0.5);
        }
    }

    #[test]
    fn zero_epochs_rejected() {
        let cfg = TrainingConfig {
            epochs: 0,
            ..TrainingConfig::default()
        };
        assert!(matches!(
            train_logistic(&toy(), &cfg),
            Err(Error::Config(_))
        ));
    }

    #[test]
    fn constant_column_gets_unit_deviation_and_zero_weight() {
        let mut m = toy();
        for r in &mut m.rows {
            r.push(7.0);
        }
        m.dimensions.push("c".into());
        let model = train_logistic(&m, &TrainingConfig::default()).unwrap();
        assert_eq!(model.deviations[1], 1.0);
        assert_eq!(model.weights[1], 0.0);
    }

    #[test]
    fn negated_parameters_flip_confidence() {
        let m = toy();
        let model = train_logistic(&m, &TrainingConfig::default()).unwrap();
        let mut neg = model.clone();
        neg.weights.iter_mut().for_each(|w| *w = -*w);
        neg.bias = -neg.bias;
        for x in [-2.0, 0.3, 1.7] {
            let c = model.predict_row(&[x]);
            assert!((neg.predict_row(&[x]) - (1.0 - c)).abs() < 1e-12);
        }
    }

    #[test]
    fn sigmoid_is_stable() {
        assert_eq!(sigmoid(0.0), 0.5);
        assert!(sigmoid(-800.0) >= 0.0);
        assert!(sigmoid(800.0) <= 1.0);
        assert!((softplus(-800.0)).abs() < 1e-300);
        assert!((softplus(800.0) - 800.0).abs() < 1e-9);
    }
}
