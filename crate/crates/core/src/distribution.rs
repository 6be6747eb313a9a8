use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOLERANCE: f64 = 1e-9;

/// Probability vector over the class labels; every classifier returns one.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassDistribution {
    probabilities: Vec<f64>,
}

impl ClassDistribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        let sum: f64 = probabilities.iter().sum();
        if probabilities.is_empty()
            || probabilities.iter().any(|p| !(0.0..=1.0).contains(p))
            || (sum - 1.0).abs() > SUM_TOLERANCE
        {
            return Err(Error::InvalidArgument(format!(
                "not a probability vector: {probabilities:?}"
            )));
        }
        Ok(ClassDistribution { probabilities })
    }

    /// Normalizes non-negative weights. All-zero weights give the uniform
    /// distribution.
    pub fn from_weights(weights: &[f64]) -> Self {
        let total: f64 = weights.iter().sum();
        if total > 0.0 {
            ClassDistribution {
                probabilities: weights.iter().map(|w| w / total).collect(),
            }
        } else {
            Self::uniform(weights.len())
        }
    }

    /// Softmax of unnormalized log scores, max-subtracted.
    /// Scores of `-inf` get probability zero.
    pub fn from_log_scores(scores: &[f64]) -> Self {
        let max = scores.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if max == f64::NEG_INFINITY {
            return Self::uniform(scores.len());
        }
        let weights: Vec<f64> = scores.iter().map(|&s| (s - max).exp()).collect();
        Self::from_weights(&weights)
    }

    pub fn uniform(n: usize) -> Self {
        ClassDistribution {
            probabilities: vec![1.0 / n as f64; n],
        }
    }

    pub fn one_hot(n: usize, class: usize) -> Self {
        let mut probabilities = vec![0.0; n];
        probabilities[class] = 1.0;
        ClassDistribution { probabilities }
    }

    pub fn probabilities(&self) -> &[f64] {
        &self.probabilities
    }

    pub fn get(&self, class: usize) -> f64 {
        self.probabilities[class]
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Most probable class; ties go to the lower index.
    pub fn argmax(&self) -> usize {
        argmax(&self.probabilities)
    }
}

pub(crate) fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn softmax_is_stable() {
        let d = ClassDistribution::from_log_scores(&[-1000.0, -1000.0]);
        assert_eq!(d.probabilities(), &[0.5, 0.5]);
        let d = ClassDistribution::from_log_scores(&[f64::NEG_INFINITY, -3.0]);
        assert_eq!(d.probabilities(), &[0.0, 1.0]);
        let d = ClassDistribution::from_log_scores(&[0.75f64.ln(), 0.25f64.ln()]);
        assert!((d.get(0) - 0.75).abs() < 1e-15);
    }

    #[test]
    fn argmax_prefers_lower_index() {
        assert_eq!(ClassDistribution::uniform(3).argmax(), 0);
        assert_eq!(ClassDistribution::from_weights(&[1.0, 2.0, 2.0]).argmax(), 1);
    }

    #[test]
    fn validation() {
        assert!(ClassDistribution::new(vec![0.5, 0.5]).is_ok());
        assert!(ClassDistribution::new(vec![0.5, 0.6]).is_err());
        assert!(ClassDistribution::new(vec![1.5, -0.5]).is_err());
        assert!(ClassDistribution::new(vec![]).is_err());
    }
}
