//! Independent oracles: brute-force enumeration for junction-tree inference,
//! the naive_bayes module for naive-structure networks, and pair counting
//! for ROC area. Each check returns the largest deviation it observed.

use nids_core::bayes_net::{
    build_junction_tree, fit_cpts, predict_bn, query_class_marginal, query_marginals,
    BayesNetModel, Cpt, NetworkStructure,
};
use nids_core::dataset::{Dataset, Feature, FeatureSchema, Record};
use nids_core::eval::{pair_count_auc, roc_points};
use nids_core::naive_bayes::{predict_nb, train_nb, NbOptions};
use nids_core::rng::seeded;
use nids_core::Result;
use rand::Rng;

/// Random DAG over `n` binary nodes in topological index order; the class is
/// the last node.
pub fn random_binary_network(n: usize, seed: u64) -> BayesNetModel {
    let mut rng = seeded(seed);
    let mut parents = vec![Vec::new(); n];
    for (v, ps) in parents.iter_mut().enumerate().skip(1) {
        for p in 0..v {
            if ps.len() < 3 && rng.gen_bool(0.45) {
                ps.push(p);
            }
        }
    }
    let structure = NetworkStructure::new((0..n).collect(), parents.clone()).expect("valid DAG");
    let cpts = (0..n)
        .map(|v| {
            let q = 1usize << parents[v].len();
            let mut table = Vec::with_capacity(2 * q);
            for _ in 0..q {
                let p: f64 = rng.gen_range(0.02..0.98);
                table.extend([p, 1.0 - p]);
            }
            Cpt::new(v, 2, parents[v].clone(), vec![2; parents[v].len()], table).expect("valid CPT")
        })
        .collect();
    BayesNetModel::new(structure, vec![2; n], cpts, n - 1).expect("valid network")
}

/// Posterior of `node` by summing the joint over all 2^n assignments.
pub fn enumerate(model: &BayesNetModel, evidence: &[Option<usize>], node: usize) -> [f64; 2] {
    let n = model.node_count();
    let mut totals = [0.0; 2];
    for bits in 0..(1usize << n) {
        let a: Vec<usize> = (0..n).map(|i| (bits >> i) & 1).collect();
        if a.iter().zip(evidence).all(|(x, e)| e.is_none_or(|e| e == *x)) {
            totals[a[node]] += model.joint(&a);
        }
    }
    let z = totals[0] + totals[1];
    [totals[0] / z, totals[1] / z]
}

/// Every evidence pattern over the non-class nodes: each is unobserved, 0 or 1.
pub fn evidence_patterns(n: usize) -> Vec<Vec<Option<usize>>> {
    let mut out = vec![vec![None; n]];
    for v in 0..n.saturating_sub(1) {
        out = out
            .into_iter()
            .flat_map(|e| {
                [None, Some(0), Some(1)].into_iter().map(move |x| {
                    let mut e = e.clone();
                    e[v] = x;
                    e
                })
            })
            .collect();
    }
    out
}

/// Largest gap between junction-tree marginals and enumeration over
/// `networks` random networks of 2 to 6 binary nodes, every evidence pattern.
pub fn junction_tree_max_error(networks: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for seed in 0..networks {
        let n = 2 + (seed as usize % 5);
        let model = random_binary_network(n, seed);
        let jt = build_junction_tree(model.structure())?;
        if !jt.has_running_intersection() || !jt.covers_families(model.structure()) {
            return Ok(f64::INFINITY);
        }
        let class = n - 1;
        for evidence in evidence_patterns(n) {
            let got = query_class_marginal(&model, &jt, &evidence, class)?;
            let want = enumerate(&model, &evidence, class);
            for (g, w) in got.probabilities().iter().zip(want) {
                worst = worst.max((g - w).abs());
            }
            for (v, dist) in query_marginals(&model, &jt, &evidence)?.iter().enumerate() {
                let want = match evidence[v] {
                    Some(x) => [f64::from(u8::from(x == 0)), f64::from(u8::from(x == 1))],
                    None => enumerate(&model, &evidence, v),
                };
                for (g, w) in dist.probabilities().iter().zip(want) {
                    worst = worst.max((g - w).abs());
                }
            }
        }
    }
    Ok(worst)
}

fn random_nominal_dataset(seed: u64, rows: usize, cards: &[usize]) -> Dataset {
    let mut rng = seeded(seed);
    let features = cards
        .iter()
        .enumerate()
        .map(|(i, &c)| Feature::nominal(format!("f{i}"), (0..c).map(|v| format!("v{v}"))))
        .collect();
    let schema = FeatureSchema::new(features, vec!["normal".into(), "anomaly".into()])
        .expect("valid schema");
    let records = (0..rows)
        .map(|_| {
            let label = usize::from(rng.gen_bool(0.4));
            let values = cards
                .iter()
                .map(|&c| {
                    if rng.gen_bool(0.6) {
                        (label * (c - 1)) as f64
                    } else {
                        rng.gen_range(0..c) as f64
                    }
                })
                .collect();
            Record::new(values, label)
        })
        .collect();
    Dataset::new(schema, records).expect("records fit the schema")
}

/// Largest gap between a naive-structure network and Naive Bayes, both
/// trained on the same data, over `records` random probe records.
pub fn naive_equivalence_max_error(records: usize) -> Result<f64> {
    let cards = [2, 3, 4, 2, 5, 3];
    let train = random_nominal_dataset(11, 300, &cards);
    let probe = random_nominal_dataset(12, records, &cards);
    let nb = train_nb(&train, NbOptions::default())?;
    let structure = NetworkStructure::naive(cards.len() + 1, cards.len())?;
    let model = fit_cpts(&train, &structure, 1.0)?;
    let jt = build_junction_tree(&structure)?;
    let mut worst: f64 = 0.0;
    for r in probe.records() {
        let p = predict_bn(&model, &jt, r)?;
        let q = predict_nb(&nb, r)?;
        for (x, y) in p.probabilities().iter().zip(q.probabilities()) {
            worst = worst.max((x - y).abs());
        }
    }
    Ok(worst)
}

/// Probability that a random positive outscores a random negative, ties
/// counting one half.
pub fn mann_whitney(scored: &[(f64, bool)]) -> f64 {
    let mut wins = 0.0;
    let mut pairs = 0.0;
    for &(sp, _) in scored.iter().filter(|s| s.1) {
        for &(sn, _) in scored.iter().filter(|s| !s.1) {
            pairs += 1.0;
            if sp > sn {
                wins += 1.0;
            } else if sp == sn {
                wins += 0.5;
            }
        }
    }
    wins / pairs
}

/// Largest gap between the sweep AUC (and the library's pair count) and the
/// Mann-Whitney oracle over `sets` random score sets of at most 20 instances.
pub fn auc_max_error(sets: usize) -> Result<f64> {
    let mut rng = seeded(99);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < sets {
        let n = rng.gen_range(2..=20);
        // Coarse scores force plenty of ties.
        let coarse = rng.gen_bool(0.5);
        let scored: Vec<(f64, bool)> = (0..n)
            .map(|_| {
                let s = if coarse {
                    f64::from(rng.gen_range(0..5u8)) / 4.0
                } else {
                    rng.gen::<f64>()
                };
                (s, rng.gen_bool(0.5))
            })
            .collect();
        let positives = scored.iter().filter(|s| s.1).count();
        if positives == 0 || positives == n {
            continue;
        }
        let curve = roc_points(&scored)?;
        let oracle = mann_whitney(&scored);
        worst = worst
            .max((curve.auc - oracle).abs())
            .max((pair_count_auc(&scored) - oracle).abs());
        let last = curve.points.last().expect("curve has points");
        if (last.fpr, last.tpr) != (1.0, 1.0) {
            return Ok(f64::INFINITY);
        }
        done += 1;
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn junction_tree_matches_enumeration_on_200_networks() {
        let e = junction_tree_max_error(200).unwrap();
        assert!(e <= 1e-9, "max abs error {e:e}");
    }

    #[test]
    fn naive_network_matches_naive_bayes_on_1000_records() {
        let e = naive_equivalence_max_error(1000).unwrap();
        assert!(e <= 1e-9, "max abs error {e:e}");
    }

    #[test]
    fn sweep_auc_matches_pair_counting_on_500_sets() {
        let e = auc_max_error(500).unwrap();
        assert!(e <= 1e-12, "max abs error {e:e}");
    }

    #[test]
    fn evidence_patterns_are_exhaustive() {
        let p = evidence_patterns(4);
        assert_eq!(p.len(), 27);
        assert!(p.iter().all(|e| e[3].is_none()));
    }

    #[test]
    fn mann_whitney_counts_ties_as_half() {
        assert_eq!(mann_whitney(&[(1.0, true), (1.0, false)]), 0.5);
        assert_eq!(mann_whitney(&[(2.0, true), (1.0, false), (0.5, false)]), 1.0);
    }
}
