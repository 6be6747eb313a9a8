use serde::{Deserialize, Serialize};

use super::data::DiscreteData;
use super::structure::NetworkStructure;
use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Refuse CPTs bigger than this many cells.
const MAX_CPT_CELLS: usize = 1 << 26;

/// P(node | parents) stored as `[config * card + value]`, first parent most
/// significant in the configuration index.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Cpt {
    node: usize,
    card: usize,
    parents: Vec<usize>,
    parent_cards: Vec<usize>,
    table: Vec<f64>,
}

impl Cpt {
    /// Each row of `table` must be a distribution over `card` values.
    pub fn new(
        node: usize,
        card: usize,
        parents: Vec<usize>,
        parent_cards: Vec<usize>,
        table: Vec<f64>,
    ) -> Result<Self> {
        if parents.len() != parent_cards.len() {
            return Err(Error::InvalidArgument("parent cardinalities do not match parents".into()));
        }
        if card == 0 || parent_cards.contains(&0) {
            return Err(Error::InvalidArgument("cardinalities must be positive".into()));
        }
        let q: usize = parent_cards.iter().product();
        if table.len() != q * card {
            return Err(Error::InvalidArgument(format!(
                "CPT of node {node} needs {} cells, got {}",
                q * card,
                table.len()
            )));
        }
        for row in table.chunks_exact(card) {
            let sum: f64 = row.iter().sum();
            if row.iter().any(|p| !(0.0..=1.0).contains(p)) || (sum - 1.0).abs() > 1e-9 {
                return Err(Error::InvalidArgument(format!(
                    "CPT row of node {node} is not a distribution"
                )));
            }
        }
        Ok(Cpt {
            node,
            card,
            parents,
            parent_cards,
            table,
        })
    }

    pub fn node(&self) -> usize {
        self.node
    }

    pub fn card(&self) -> usize {
        self.card
    }

    pub fn parents(&self) -> &[usize] {
        &self.parents
    }

    pub fn config_count(&self) -> usize {
        self.table.len() / self.card
    }

    pub fn table(&self) -> &[f64] {
        &self.table
    }

    /// Distribution of the node under parent configuration `config`.
    pub fn row(&self, config: usize) -> &[f64] {
        &self.table[config * self.card..(config + 1) * self.card]
    }

    /// P(node = assignment[node] | parents = assignment[parents]) where
    /// `assignment` holds a value for every node of the network.
    #[inline]
    pub fn prob(&self, assignment: &[usize]) -> f64 {
        let config = self
            .parents
            .iter()
            .zip(&self.parent_cards)
            .fold(0, |acc, (&p, &c)| acc * c + assignment[p]);
        self.table[config * self.card + assignment[self.node]]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BayesNetModel {
    structure: NetworkStructure,
    cards: Vec<usize>,
    cpts: Vec<Cpt>,
    class_node: usize,
}

impl BayesNetModel {
    pub fn new(
        structure: NetworkStructure,
        cards: Vec<usize>,
        cpts: Vec<Cpt>,
        class_node: usize,
    ) -> Result<Self> {
        let n = structure.node_count();
        if cards.len() != n || cpts.len() != n || class_node >= n {
            return Err(Error::InvalidArgument("network sizes are inconsistent".into()));
        }
        for (node, cpt) in cpts.iter().enumerate() {
            let expected: Vec<usize> = structure.parents(node).iter().map(|&p| cards[p]).collect();
            if cpt.node != node
                || cpt.card != cards[node]
                || cpt.parents != structure.parents(node)
                || cpt.parent_cards != expected
            {
                return Err(Error::InvalidArgument(format!(
                    "CPT of node {node} does not match the structure"
                )));
            }
        }
        Ok(BayesNetModel {
            structure,
            cards,
            cpts,
            class_node,
        })
    }

    pub fn structure(&self) -> &NetworkStructure {
        &self.structure
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn cpt(&self, node: usize) -> &Cpt {
        &self.cpts[node]
    }

    pub fn node_count(&self) -> usize {
        self.cards.len()
    }

    pub fn class_node(&self) -> usize {
        self.class_node
    }

    /// Joint probability of a full assignment.
    pub fn joint(&self, assignment: &[usize]) -> f64 {
        self.cpts.iter().map(|c| c.prob(assignment)).product()
    }
}

/// Estimates every CPT as (N_jk + alpha) / (N_j + r * alpha). Configurations
/// never seen in training get a uniform row.
pub fn fit_cpts(ds: &Dataset, structure: &NetworkStructure, alpha: f64) -> Result<BayesNetModel> {
    let data = DiscreteData::from_dataset(ds)?;
    fit_cpts_discrete(&data, structure, alpha)
}

pub(crate) fn fit_cpts_discrete(
    data: &DiscreteData,
    structure: &NetworkStructure,
    alpha: f64,
) -> Result<BayesNetModel> {
    if structure.node_count() != data.node_count() {
        return Err(Error::InvalidArgument(format!(
            "structure has {} nodes, data has {}",
            structure.node_count(),
            data.node_count()
        )));
    }
    if !alpha.is_finite() || alpha < 0.0 {
        return Err(Error::InvalidArgument(format!("invalid CPT prior {alpha}")));
    }
    let cards = data.cards().to_vec();
    let mut cpts = Vec::with_capacity(cards.len());
    for node in 0..cards.len() {
        let parents = structure.parents(node).to_vec();
        let r = cards[node];
        let (configs, q) = data.config_indices(&parents);
        if q.saturating_mul(r) > MAX_CPT_CELLS {
            return Err(Error::Training(format!(
                "CPT of node {node} would have {q} x {r} cells"
            )));
        }
        let mut counts = vec![0.0f64; q * r];
        for (&c, &v) in configs.iter().zip(data.column(node)) {
            counts[c * r + v as usize] += 1.0;
        }
        for row in counts.chunks_exact_mut(r) {
            let nj: f64 = row.iter().sum();
            let denom = nj + r as f64 * alpha;
            if denom > 0.0 {
                for cell in row.iter_mut() {
                    *cell = (*cell + alpha) / denom;
                }
            } else {
                row.fill(1.0 / r as f64);
            }
        }
        let parent_cards = parents.iter().map(|&p| cards[p]).collect();
        cpts.push(Cpt {
            node,
            card: r,
            parents,
            parent_cards,
            table: counts,
        });
    }
    BayesNetModel::new(structure.clone(), cards, cpts, data.class_node())
}
