use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use super::Dataset;
use crate::error::{Error, Result};
use crate::rng::seeded;

/// Fold assignment for k-fold cross-validation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FoldPlan {
    assignments: Vec<usize>,
    k: usize,
    seed: u64,
}

impl FoldPlan {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn assignments(&self) -> &[usize] {
        &self.assignments
    }

    pub fn fold_of(&self, record: usize) -> usize {
        self.assignments[record]
    }

    /// Held-out record indices of `fold`, ascending.
    pub fn test_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] == fold)
            .collect()
    }

    /// Training record indices for `fold`, ascending.
    pub fn train_indices(&self, fold: usize) -> Vec<usize> {
        (0..self.assignments.len())
            .filter(|&i| self.assignments[i] != fold)
            .collect()
    }

    pub fn fold_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.k];
        for &f in &self.assignments {
            sizes[f] += 1;
        }
        sizes
    }
}

/// Groups records by class, shuffles each group with a generator seeded by
/// `seed`, then deals records round-robin into `k` folds. The dealing
/// position carries over between classes, so both the per-class and the
/// total fold sizes differ by at most one.
pub fn stratified_folds(ds: &Dataset, k: usize, seed: u64) -> Result<FoldPlan> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("fold count must be >= 2, got {k}")));
    }
    if k > ds.len() {
        return Err(Error::InvalidArgument(format!(
            "fold count {k} exceeds record count {}",
            ds.len()
        )));
    }
    let mut rng = seeded(seed);
    let mut assignments = vec![0; ds.len()];
    let mut next = 0usize;
    for mut group in class_groups(ds) {
        group.shuffle(&mut rng);
        for i in group {
            assignments[i] = next % k;
            next += 1;
        }
    }
    Ok(FoldPlan {
        assignments,
        k,
        seed,
    })
}

fn class_groups(ds: &Dataset) -> Vec<Vec<usize>> {
    let mut groups = vec![Vec::new(); ds.class_count()];
    for (i, r) in ds.records().iter().enumerate() {
        groups[r.label].push(i);
    }
    groups
}

/// Sample of `round(fraction * N)` records without replacement, in original
/// order. Stratified sampling apportions the total across classes by
/// largest remainder, so each class gets the floor or ceiling of its quota.
pub fn sample_fraction(ds: &Dataset, fraction: f64, seed: u64, stratified: bool) -> Result<Dataset> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "sample fraction must be in (0, 1], got {fraction}"
        )));
    }
    let target = (fraction * ds.len() as f64).round() as usize;
    if target == 0 {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} of {} records selects nothing",
            ds.len()
        )));
    }
    let mut rng = seeded(seed);
    let mut chosen = if stratified {
        let groups = class_groups(ds);
        let quotas = apportion(
            &groups.iter().map(|g| g.len()).collect::<Vec<_>>(),
            fraction,
            target,
        );
        let mut chosen = Vec::with_capacity(target);
        for (mut group, take) in groups.into_iter().zip(quotas) {
            group.shuffle(&mut rng);
            chosen.extend_from_slice(&group[..take]);
        }
        chosen
    } else {
        let mut all: Vec<usize> = (0..ds.len()).collect();
        all.shuffle(&mut rng);
        all.truncate(target);
        all
    };
    chosen.sort_unstable();
    Ok(ds.subset(&chosen))
}

fn apportion(sizes: &[usize], fraction: f64, target: usize) -> Vec<usize> {
    let quotas: Vec<f64> = sizes.iter().map(|&n| n as f64 * fraction).collect();
    let mut counts: Vec<usize> = quotas
        .iter()
        .zip(sizes)
        .map(|(&q, &n)| (q.floor() as usize).min(n))
        .collect();
    let mut order: Vec<usize> = (0..sizes.len()).collect();
    order.sort_by(|&a, &b| {
        let ra = quotas[a] - quotas[a].floor();
        let rb = quotas[b] - quotas[b].floor();
        rb.total_cmp(&ra).then(a.cmp(&b))
    });
    let mut assigned: usize = counts.iter().sum();
    for &c in order.iter().cycle().take(sizes.len() * 2) {
        if assigned >= target {
            break;
        }
        if counts[c] < sizes[c] && (counts[c] as f64) < quotas[c].ceil() {
            counts[c] += 1;
            assigned += 1;
        }
    }
    counts
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Feature, FeatureSchema, Record};
    use proptest::prelude::*;

    pub(crate) fn labelled(counts: &[usize]) -> Dataset {
        let classes: Vec<String> = (0..counts.len().max(2)).map(|c| format!("c{c}")).collect();
        let schema = FeatureSchema::new(vec![Feature::numeric("x")], classes).unwrap();
        let mut records = Vec::new();
        for (label, &n) in counts.iter().enumerate() {
            for _ in 0..n {
                records.push(Record::new(vec![records.len() as f64], label));
            }
        }
        Dataset::new(schema, records).unwrap()
    }

    fn per_class_fold_counts(ds: &Dataset, plan: &FoldPlan) -> Vec<Vec<usize>> {
        let mut counts = vec![vec![0; plan.k()]; ds.class_count()];
        for (i, r) in ds.records().iter().enumerate() {
            counts[r.label][plan.fold_of(i)] += 1;
        }
        counts
    }

    #[test]
    fn divisible_case_is_exact() {
        let ds = labelled(&[60, 40]);
        let plan = stratified_folds(&ds, 10, 1).unwrap();
        for row in per_class_fold_counts(&ds, &plan) {
            assert!(row.iter().all(|&c| c == row[0]));
        }
        let counts = per_class_fold_counts(&ds, &plan);
        assert!(counts[0].iter().all(|&c| c == 6));
        assert!(counts[1].iter().all(|&c| c == 4));
    }

    #[test]
    fn deterministic_per_seed() {
        let ds = labelled(&[37, 11, 5]);
        assert_eq!(
            stratified_folds(&ds, 7, 9).unwrap(),
            stratified_folds(&ds, 7, 9).unwrap()
        );
        assert_ne!(
            stratified_folds(&ds, 7, 9).unwrap().assignments(),
            stratified_folds(&ds, 7, 10).unwrap().assignments()
        );
    }

    #[test]
    fn full_size_fold_sizes() {
        // NSL-KDD train: 67,343 normal and 58,630 anomalous records.
        let ds = labelled(&[67_343, 58_630]);
        let plan = stratified_folds(&ds, 10, 42).unwrap();
        let n = 125_973usize;
        let (lo, hi) = (n / 10, n.div_ceil(10));
        assert_eq!((lo, hi), (12_597, 12_598));
        assert!(plan.fold_sizes().iter().all(|&s| s == lo || s == hi));
        assert_eq!(plan.fold_sizes().iter().sum::<usize>(), n);
    }

    #[test]
    fn fold_count_errors() {
        let ds = labelled(&[3, 2]);
        assert!(stratified_folds(&ds, 1, 0).is_err());
        assert!(stratified_folds(&ds, 6, 0).is_err());
        assert!(stratified_folds(&ds, 5, 0).is_ok());
    }

    #[test]
    fn sample_full_fraction_is_a_copy() {
        let ds = labelled(&[13, 8]);
        let s = sample_fraction(&ds, 1.0, 3, true).unwrap();
        assert_eq!(s.records(), ds.records());
        let s = sample_fraction(&ds, 1.0, 3, false).unwrap();
        assert_eq!(s.records(), ds.records());
    }

    #[test]
    fn sample_twenty_percent() {
        let ds = labelled(&[67_343, 58_630]);
        let s = sample_fraction(&ds, 0.2, 5, true).unwrap();
        assert!(s.len() == 25_194 || s.len() == 25_195, "{}", s.len());
        let counts = s.class_counts();
        assert!((counts[0] as f64 - 0.2 * 67_343.0).abs() <= 1.0);
        assert!((counts[1] as f64 - 0.2 * 58_630.0).abs() <= 1.0);
        assert_eq!(s, sample_fraction(&ds, 0.2, 5, true).unwrap());

        let small = sample_fraction(&labelled(&[5, 5]), 0.2, 0, true).unwrap();
        assert_eq!(small.class_counts(), vec![1, 1]);
    }

    #[test]
    fn sample_fraction_errors() {
        let ds = labelled(&[5, 5]);
        for f in [0.0, -0.1, 1.5, f64::NAN] {
            assert!(sample_fraction(&ds, f, 0, true).is_err());
        }
        assert!(sample_fraction(&ds, 0.01, 0, false).is_err());
    }

    proptest! {
        #[test]
        fn stratification_bounds(
            counts in prop::collection::vec(1usize..60, 2..5),
            k in 2usize..12,
            seed in any::<u64>(),
        ) {
            let ds = labelled(&counts);
            prop_assume!(k <= ds.len());
            let plan = stratified_folds(&ds, k, seed).unwrap();
            for row in per_class_fold_counts(&ds, &plan) {
                let max = row.iter().max().unwrap();
                let min = row.iter().min().unwrap();
                prop_assert!(max - min <= 1);
            }
            let sizes = plan.fold_sizes();
            prop_assert!(sizes.iter().max().unwrap() - sizes.iter().min().unwrap() <= 1);
            let mut seen = vec![0; ds.len()];
            for f in 0..k {
                for i in plan.test_indices(f) {
                    seen[i] += 1;
                }
            }
            prop_assert!(seen.iter().all(|&s| s == 1));
        }

        #[test]
        fn stratified_sample_proportions(
            counts in prop::collection::vec(1usize..200, 2..5),
            fraction in 0.05f64..=1.0,
            seed in any::<u64>(),
        ) {
            let ds = labelled(&counts);
            let target = (fraction * ds.len() as f64).round() as usize;
            prop_assume!(target >= 1);
            let s = sample_fraction(&ds, fraction, seed, true).unwrap();
            prop_assert_eq!(s.len(), target);
            for (c, &n) in s.class_counts().iter().zip(&counts) {
                prop_assert!((*c as f64 - fraction * n as f64).abs() <= 1.0);
            }
        }
    }
}
