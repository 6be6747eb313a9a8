use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::entropy::entropy;

/// Gains at or below this are treated as zero.
pub(crate) const MIN_GAIN: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SplitRule {
    /// Left branch takes values `<= threshold`.
    Threshold(f64),
    /// One branch per nominal value.
    Multiway,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Split {
    pub feature: usize,
    pub rule: SplitRule,
    /// Information gain in bits.
    pub gain: f64,
}

/// Column-major copy of a dataset for repeated split evaluation.
pub(crate) struct Columns {
    pub values: Vec<Vec<f64>>,
    /// `Some(cardinality)` for nominal features.
    pub cards: Vec<Option<usize>>,
    pub labels: Vec<usize>,
    pub classes: usize,
}

impl Columns {
    pub fn new(ds: &Dataset) -> Self {
        let schema = ds.schema();
        let values = (0..schema.feature_count())
            .map(|f| ds.records().iter().map(|r| r.values[f]).collect())
            .collect();
        Columns {
            values,
            cards: schema.features().iter().map(|f| f.kind.cardinality()).collect(),
            labels: ds.records().iter().map(|r| r.label).collect(),
            classes: schema.class_count(),
        }
    }

    pub fn class_counts(&self, indices: &[usize]) -> Vec<f64> {
        let mut counts = vec![0.0; self.classes];
        for &i in indices {
            counts[self.labels[i]] += 1.0;
        }
        counts
    }

    /// Best split on one feature with its gain, if any split leaves at least
    /// two branches holding `min_leaf` records.
    pub fn feature_split(
        &self,
        indices: &[usize],
        feature: usize,
        parent: &[f64],
        min_leaf: usize,
    ) -> Option<(f64, SplitRule)> {
        let n = indices.len() as f64;
        let parent_entropy = entropy(parent);
        let column = &self.values[feature];
        match self.cards[feature] {
            Some(card) => {
                let mut counts = vec![vec![0.0; self.classes]; card];
                for &i in indices {
                    counts[column[i] as usize][self.labels[i]] += 1.0;
                }
                let sizes: Vec<f64> = counts.iter().map(|c| c.iter().sum()).collect();
                if sizes.iter().filter(|&&s| s >= min_leaf as f64).count() < 2 {
                    return None;
                }
                let children: f64 = counts
                    .iter()
                    .zip(&sizes)
                    .filter(|(_, &s)| s > 0.0)
                    .map(|(c, &s)| s / n * entropy(c))
                    .sum();
                Some((parent_entropy - children, SplitRule::Multiway))
            }
            None => {
                let mut pairs: Vec<(f64, usize)> =
                    indices.iter().map(|&i| (column[i], self.labels[i])).collect();
                pairs.sort_unstable_by(|a, b| a.0.total_cmp(&b.0));
                let mut left = vec![0.0; self.classes];
                let mut right = parent.to_vec();
                let mut best: Option<(f64, f64)> = None;
                for i in 1..pairs.len() {
                    let (prev, label) = pairs[i - 1];
                    left[label] += 1.0;
                    right[label] -= 1.0;
                    let next = pairs[i].0;
                    if prev == next || i < min_leaf || pairs.len() - i < min_leaf {
                        continue;
                    }
                    let l = i as f64;
                    let gain = parent_entropy - l / n * entropy(&left) - (n - l) / n * entropy(&right);
                    if best.is_none_or(|(g, _)| gain > g) {
                        let mid = prev + (next - prev) / 2.0;
                        let threshold = if mid < next { mid } else { prev };
                        best = Some((gain, threshold));
                    }
                }
                best.map(|(g, t)| (g, SplitRule::Threshold(t)))
            }
        }
    }
}

/// Highest-gain split over `candidates` among the records at `indices`, or
/// `None` when no split gains information. Ties go to the lower feature
/// index, then the lower threshold.
pub fn best_split(ds: &Dataset, indices: &[usize], candidates: &[usize]) -> Option<Split> {
    let columns = Columns::new(ds);
    best_split_in(&columns, indices, candidates, 1)
}

pub(crate) fn best_split_in(
    columns: &Columns,
    indices: &[usize],
    candidates: &[usize],
    min_leaf: usize,
) -> Option<Split> {
    if indices.len() < 2 {
        return None;
    }
    let parent = columns.class_counts(indices);
    let mut best: Option<Split> = None;
    for &f in candidates {
        if let Some((gain, rule)) = columns.feature_split(indices, f, &parent, min_leaf) {
            if gain > MIN_GAIN && better(gain, f, best.as_ref()) {
                best = Some(Split { feature: f, rule, gain });
            }
        }
    }
    best
}

pub(crate) fn better(gain: f64, feature: usize, current: Option<&Split>) -> bool {
    match current {
        None => true,
        Some(b) => gain > b.gain || (gain == b.gain && feature < b.feature),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Feature, FeatureSchema, Record};

    fn ds(rows: &[(f64, f64, usize)]) -> Dataset {
        let schema = FeatureSchema::new(
            vec![Feature::numeric("x"), Feature::numeric("y")],
            vec!["A".into(), "B".into()],
        )
        .unwrap();
        Dataset::new(schema, rows.iter().map(|&(x, y, c)| Record::new(vec![x, y], c)).collect())
            .unwrap()
    }

    #[test]
    fn four_record_example() {
        let d = ds(&[(1.0, 0.0, 0), (2.0, 0.0, 0), (8.0, 0.0, 1), (9.0, 0.0, 1)]);
        let s = best_split(&d, &[0, 1, 2, 3], &[0, 1]).unwrap();
        assert_eq!(s.feature, 0);
        assert_eq!(s.rule, SplitRule::Threshold(5.0));
        assert!((s.gain - 1.0).abs() < 1e-12);
        // the other midpoints (1.5 and 8.5) gain less
        let h = |p: f64| if p == 0.0 || p == 1.0 { 0.0 } else { -p * p.log2() - (1.0 - p) * (1.0 - p).log2() };
        let g15 = 1.0 - 0.75 * h(1.0 / 3.0);
        assert!(g15 < s.gain);
    }

    #[test]
    fn pure_node_has_no_split() {
        let d = ds(&[(1.0, 0.0, 0), (2.0, 1.0, 0), (3.0, 2.0, 0)]);
        assert!(best_split(&d, &[0, 1, 2], &[0, 1]).is_none());
    }

    #[test]
    fn ties_go_to_lower_feature() {
        let d = ds(&[(1.0, 1.0, 0), (2.0, 2.0, 0), (8.0, 8.0, 1), (9.0, 9.0, 1)]);
        assert_eq!(best_split(&d, &[0, 1, 2, 3], &[1, 0]).unwrap().feature, 0);
    }

    #[test]
    fn nominal_multiway_gain() {
        let schema = FeatureSchema::new(
            vec![Feature::nominal("p", ["tcp", "udp", "icmp"])],
            vec!["A".into(), "B".into()],
        )
        .unwrap();
        let rows = [(0, 0), (0, 0), (1, 1), (2, 1)];
        let d = Dataset::new(
            schema,
            rows.iter().map(|&(v, c)| Record::new(vec![v as f64], c)).collect(),
        )
        .unwrap();
        let s = best_split(&d, &[0, 1, 2, 3], &[0]).unwrap();
        assert_eq!(s.rule, SplitRule::Multiway);
        assert!((s.gain - 1.0).abs() < 1e-12);
    }

    #[test]
    fn adjacent_floats_keep_threshold_between_values() {
        let a = 1.0f64;
        let b = f64::from_bits(a.to_bits() + 1);
        let d = ds(&[(a, 0.0, 0), (b, 0.0, 1)]);
        let s = best_split(&d, &[0, 1], &[0]).unwrap();
        let SplitRule::Threshold(t) = s.rule else { panic!() };
        assert!(a <= t && t < b);
    }
}
