use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::data::DiscreteData;
use super::structure::{check_permutation, NetworkStructure};
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Count tables up to this many cells are dense; larger ones are counted by
/// sorting keys.
const DENSE_CELLS: usize = 1 << 22;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct K2Options {
    pub max_parents: usize,
    /// Dirichlet pseudo-count per CPT cell.
    pub alpha: f64,
    /// A node that may be added as a parent without using up the budget.
    pub uncounted_parent: Option<usize>,
}

/// Score after the initial (empty) parent set and after each accepted parent.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct K2Trace {
    pub scores: Vec<Vec<f64>>,
}

/// Log Cooper-Herskovits marginal likelihood of `node` given `parents` under
/// a uniform Dirichlet(`alpha`) prior.
pub fn k2_score(ds: &Dataset, node: usize, parents: &[usize], alpha: f64) -> Result<f64> {
    let data = DiscreteData::from_dataset(ds)?;
    data.check_node(node)?;
    for &p in parents {
        data.check_node(p)?;
        if p == node {
            return Err(Error::InvalidArgument(format!("node {node} cannot be its own parent")));
        }
    }
    check_alpha(alpha)?;
    Ok(family_score(&data, node, parents, alpha))
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("K2 prior must be positive, got {alpha}")))
    }
}

pub(crate) fn family_score(data: &DiscreteData, node: usize, parents: &[usize], alpha: f64) -> f64 {
    let r = data.cards()[node];
    let ra = r as f64 * alpha;
    let lg_ra = libm::lgamma(ra);
    let lg_a = libm::lgamma(alpha);
    let (configs, q) = data.config_indices(parents);
    let column = data.column(node);

    let mut score = 0.0;
    let mut add_config = |counts: &mut dyn Iterator<Item = u32>| {
        let mut nj = 0u32;
        let mut cells = 0.0;
        for n in counts {
            if n > 0 {
                nj += n;
                cells += libm::lgamma(f64::from(n) + alpha) - lg_a;
            }
        }
        if nj > 0 {
            score += lg_ra - libm::lgamma(f64::from(nj) + ra) + cells;
        }
    };

    if q.saturating_mul(r) <= DENSE_CELLS {
        let mut counts = vec![0u32; q * r];
        for (&c, &v) in configs.iter().zip(column) {
            counts[c * r + v as usize] += 1;
        }
        for row in counts.chunks_exact(r) {
            add_config(&mut row.iter().copied());
        }
    } else {
        let mut keys: Vec<(usize, u16)> = configs.iter().copied().zip(column.iter().copied()).collect();
        keys.sort_unstable();
        let mut start = 0;
        while start < keys.len() {
            let config = keys[start].0;
            let mut end = start;
            let mut runs = Vec::new();
            while end < keys.len() && keys[end].0 == config {
                let value = keys[end].1;
                let mut run = 0u32;
                while end < keys.len() && keys[end] == (config, value) {
                    run += 1;
                    end += 1;
                }
                runs.push(run);
            }
            add_config(&mut runs.into_iter());
            start = end;
        }
    }
    score
}

/// Greedy K2 search: each node, in `ordering`, repeatedly takes the single
/// predecessor that raises its score the most, until nothing improves or the
/// parent budget is spent. Ties go to the lowest node index.
pub fn k2_search(
    ds: &Dataset,
    ordering: &[usize],
    max_parents: usize,
    alpha: f64,
) -> Result<NetworkStructure> {
    let data = DiscreteData::from_dataset(ds)?;
    let options = K2Options {
        max_parents,
        alpha,
        uncounted_parent: None,
    };
    k2_search_traced(&data, ordering, &options).map(|(s, _)| s)
}

pub fn k2_search_traced(
    data: &DiscreteData,
    ordering: &[usize],
    options: &K2Options,
) -> Result<(NetworkStructure, K2Trace)> {
    let n = data.node_count();
    check_permutation(ordering, n)?;
    check_alpha(options.alpha)?;
    let mut parents = vec![Vec::new(); n];
    let mut trace = K2Trace {
        scores: vec![Vec::new(); n],
    };
    for (pos, &node) in ordering.iter().enumerate() {
        let predecessors = &ordering[..pos];
        let mut current = family_score(data, node, &[], options.alpha);
        trace.scores[node].push(current);
        let mut chosen: Vec<usize> = Vec::new();
        loop {
            let counted = chosen
                .iter()
                .filter(|&&p| Some(p) != options.uncounted_parent)
                .count();
            let mut candidates: Vec<usize> = predecessors
                .iter()
                .copied()
                .filter(|p| !chosen.contains(p))
                .filter(|&p| Some(p) == options.uncounted_parent || counted < options.max_parents)
                .collect();
            if candidates.is_empty() {
                break;
            }
            candidates.sort_unstable();
            let scored: Vec<(usize, f64)> = candidates
                .par_iter()
                .map(|&c| {
                    let mut trial = chosen.clone();
                    trial.push(c);
                    trial.sort_unstable();
                    (c, family_score(data, node, &trial, options.alpha))
                })
                .collect();
            let (best, best_score) = scored
                .into_iter()
                .fold((usize::MAX, f64::NEG_INFINITY), |acc, (c, s)| {
                    if s > acc.1 {
                        (c, s)
                    } else {
                        acc
                    }
                });
            if best_score > current {
                chosen.push(best);
                current = best_score;
                trace.scores[node].push(current);
            } else {
                break;
            }
        }
        chosen.sort_unstable();
        parents[node] = chosen;
    }
    Ok((NetworkStructure::new(ordering.to_vec(), parents)?, trace))
}
