use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::eval::Prediction;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocPoint {
    pub fpr: f64,
    pub tpr: f64,
    /// Scores at or above this count as positive. The first point uses +inf.
    pub threshold: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RocCurve {
    pub points: Vec<RocPoint>,
    pub auc: f64,
}

impl RocCurve {
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "fpr,tpr,threshold")?;
        for p in &self.points {
            writeln!(out, "{},{},{}", p.fpr, p.tpr, p.threshold)?;
        }
        Ok(())
    }
}

/// Sweeps the threshold down through the distinct scores; tied scores move
/// the curve in one diagonal step. AUC by the trapezoid rule.
pub fn roc_points(scored: &[(f64, bool)]) -> Result<RocCurve> {
    let positives = scored.iter().filter(|s| s.1).count();
    let negatives = scored.len() - positives;
    if positives == 0 || negatives == 0 {
        return Err(Error::InvalidArgument(
            "ROC needs at least one positive and one negative instance".into(),
        ));
    }
    if scored.iter().any(|s| s.0.is_nan()) {
        return Err(Error::InvalidArgument("ROC scores must not be NaN".into()));
    }
    let mut sorted = scored.to_vec();
    sorted.sort_by(|a, b| b.0.total_cmp(&a.0));
    let (p, n) = (positives as f64, negatives as f64);
    let mut points = vec![RocPoint { fpr: 0.0, tpr: 0.0, threshold: f64::INFINITY }];
    let (mut tp, mut fp) = (0usize, 0usize);
    let mut auc = 0.0;
    let mut i = 0;
    while i < sorted.len() {
        let score = sorted[i].0;
        while i < sorted.len() && sorted[i].0 == score {
            if sorted[i].1 {
                tp += 1;
            } else {
                fp += 1;
            }
            i += 1;
        }
        let prev = *points.last().expect("curve starts at the origin");
        let next = RocPoint { fpr: fp as f64 / n, tpr: tp as f64 / p, threshold: score };
        auc += (next.fpr - prev.fpr) * (next.tpr + prev.tpr) / 2.0;
        points.push(next);
    }
    Ok(RocCurve { points, auc })
}

/// Fraction of (positive, negative) pairs where the positive scores higher,
/// ties counting one half.
pub fn pair_count_auc(scored: &[(f64, bool)]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for a in scored.iter().filter(|s| s.1) {
        for b in scored.iter().filter(|s| !s.1) {
            pairs += 1.0;
            if a.0 > b.0 {
                wins += 1.0;
            } else if a.0 == b.0 {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// (P(not normal), is the record not normal) for each prediction. With
/// binary labels this is the anomaly probability.
pub fn detection_scores(predictions: &[Prediction], normal: usize) -> Vec<(f64, bool)> {
    predictions
        .iter()
        .map(|p| (1.0 - p.distribution.get(normal), p.actual != normal))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn hand_examples() {
        let perfect = [(0.9, true), (0.8, true), (0.2, false), (0.1, false)];
        let c = roc_points(&perfect).unwrap();
        assert_eq!(c.auc, 1.0);
        assert!(c.points.iter().any(|p| p.fpr == 0.0 && p.tpr == 1.0));
        let tied = [(0.5, true), (0.5, false), (0.5, true)];
        let c = roc_points(&tied).unwrap();
        assert_eq!(c.points.len(), 2);
        assert_eq!(c.auc, 0.5);
        let mixed = [(0.9, true), (0.8, false), (0.7, true), (0.1, false)];
        assert_eq!(roc_points(&mixed).unwrap().auc, 0.75);
        assert_eq!(pair_count_auc(&mixed), 0.75);
        assert!(roc_points(&[(0.3, true)]).is_err());
    }

    proptest! {
        #[test]
        fn sweep_matches_pair_counting(
            scored in prop::collection::vec((0u8..6, any::<bool>()), 2..20)
        ) {
            let scored: Vec<(f64, bool)> = scored.into_iter().map(|(s, y)| (f64::from(s) / 5.0, y)).collect();
            prop_assume!(scored.iter().any(|s| s.1) && scored.iter().any(|s| !s.1));
            let c = roc_points(&scored).unwrap();
            prop_assert!((c.auc - pair_count_auc(&scored)).abs() <= 1e-12);
            prop_assert!(c.points.windows(2).all(|w| w[1].fpr >= w[0].fpr && w[1].tpr >= w[0].tpr));
            let last = c.points.last().unwrap();
            prop_assert_eq!((last.fpr, last.tpr), (1.0, 1.0));
        }
    }
}
