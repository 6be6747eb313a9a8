use crate::dataset::Dataset;
use crate::error::{Error, Result};

/// Column-major view of an all-nominal dataset with the class appended as
/// the last node.
#[derive(Clone, Debug)]
pub struct DiscreteData {
    columns: Vec<Vec<u16>>,
    cards: Vec<usize>,
    rows: usize,
}

impl DiscreteData {
    pub fn from_dataset(ds: &Dataset) -> Result<Self> {
        let schema = ds.schema();
        let mut cards = Vec::with_capacity(schema.feature_count() + 1);
        for (f, feature) in schema.features().iter().enumerate() {
            let card = feature.kind.cardinality().ok_or_else(|| {
                Error::InvalidArgument(format!(
                    "feature {f} (`{}`) is numeric; discretize it before network learning",
                    feature.name
                ))
            })?;
            cards.push(card);
        }
        cards.push(schema.class_count());
        if cards.iter().any(|&c| c > u16::MAX as usize) {
            return Err(Error::InvalidArgument("node cardinality exceeds 65535".into()));
        }
        let n_features = schema.feature_count();
        let mut columns = vec![Vec::with_capacity(ds.len()); n_features + 1];
        for r in ds.records() {
            for (f, col) in columns.iter_mut().take(n_features).enumerate() {
                col.push(r.values[f] as u16);
            }
            columns[n_features].push(r.label as u16);
        }
        Ok(DiscreteData {
            columns,
            cards,
            rows: ds.len(),
        })
    }

    pub fn node_count(&self) -> usize {
        self.cards.len()
    }

    pub fn class_node(&self) -> usize {
        self.cards.len() - 1
    }

    pub fn cards(&self) -> &[usize] {
        &self.cards
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn column(&self, node: usize) -> &[u16] {
        &self.columns[node]
    }

    pub(crate) fn check_node(&self, node: usize) -> Result<()> {
        if node >= self.node_count() {
            Err(Error::InvalidArgument(format!(
                "node {node} out of range for {} nodes",
                self.node_count()
            )))
        } else {
            Ok(())
        }
    }

    /// Parent-configuration index of every row, with the first parent most
    /// significant. Returns the indices and the configuration count.
    pub(crate) fn config_indices(&self, parents: &[usize]) -> (Vec<usize>, usize) {
        let mut idx = vec![0usize; self.rows];
        let mut q = 1usize;
        for &p in parents {
            let card = self.cards[p];
            for (slot, &v) in idx.iter_mut().zip(&self.columns[p]) {
                *slot = *slot * card + v as usize;
            }
            q = q.saturating_mul(card);
        }
        (idx, q)
    }
}
