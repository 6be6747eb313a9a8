use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// DAG given as an ordering plus per-node sorted parent lists. Every parent
/// precedes its child in the ordering, which makes the graph acyclic.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetworkStructure {
    ordering: Vec<usize>,
    parents: Vec<Vec<usize>>,
}

impl NetworkStructure {
    pub fn new(ordering: Vec<usize>, mut parents: Vec<Vec<usize>>) -> Result<Self> {
        let n = parents.len();
        check_permutation(&ordering, n)?;
        let mut position = vec![0; n];
        for (pos, &node) in ordering.iter().enumerate() {
            position[node] = pos;
        }
        for (child, ps) in parents.iter_mut().enumerate() {
            ps.sort_unstable();
            if ps.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "node {child} lists a parent twice"
                )));
            }
            for &p in ps.iter() {
                if p >= n {
                    return Err(Error::InvalidArgument(format!(
                        "parent {p} of node {child} out of range"
                    )));
                }
                if position[p] >= position[child] {
                    return Err(Error::InvalidArgument(format!(
                        "parent {p} does not precede node {child} in the ordering"
                    )));
                }
            }
        }
        Ok(NetworkStructure { ordering, parents })
    }

    /// No arcs at all.
    pub fn empty(ordering: Vec<usize>) -> Result<Self> {
        let n = ordering.len();
        Self::new(ordering, vec![Vec::new(); n])
    }

    /// `class` is the sole parent of every other node.
    pub fn naive(node_count: usize, class: usize) -> Result<Self> {
        if class >= node_count {
            return Err(Error::InvalidArgument("class node out of range".into()));
        }
        let ordering = std::iter::once(class)
            .chain((0..node_count).filter(|&n| n != class))
            .collect();
        let parents = (0..node_count)
            .map(|n| if n == class { Vec::new() } else { vec![class] })
            .collect();
        Self::new(ordering, parents)
    }

    pub fn node_count(&self) -> usize {
        self.parents.len()
    }

    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    pub fn parents(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn all_parents(&self) -> &[Vec<usize>] {
        &self.parents
    }

    pub fn arc_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    /// Acyclicity by Kahn's algorithm, independent of the stored ordering.
    pub fn is_acyclic(&self) -> bool {
        let n = self.node_count();
        let mut indegree: Vec<usize> = self.parents.iter().map(Vec::len).collect();
        let mut children = vec![Vec::new(); n];
        for (c, ps) in self.parents.iter().enumerate() {
            for &p in ps {
                children[p].push(c);
            }
        }
        let mut ready: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = ready.pop() {
            seen += 1;
            for &c in &children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(c);
                }
            }
        }
        seen == n
    }
}

pub(crate) fn check_permutation(ordering: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if ordering.len() != n {
        return Err(Error::InvalidArgument(format!(
            "ordering has {} entries for {n} nodes",
            ordering.len()
        )));
    }
    for &v in ordering {
        if v >= n || std::mem::replace(&mut seen[v], true) {
            return Err(Error::InvalidArgument("ordering is not a permutation".into()));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn validation() {
        assert!(NetworkStructure::new(vec![0, 1], vec![vec![], vec![0]]).is_ok());
        assert!(NetworkStructure::new(vec![1, 0], vec![vec![], vec![0]]).is_err());
        assert!(NetworkStructure::new(vec![0, 0], vec![vec![], vec![]]).is_err());
        assert!(NetworkStructure::new(vec![0, 1], vec![vec![], vec![0, 0]]).is_err());
        assert!(NetworkStructure::new(vec![0, 1], vec![vec![], vec![2]]).is_err());
    }

    #[test]
    fn naive_structure() {
        let s = NetworkStructure::naive(4, 3).unwrap();
        assert_eq!(s.ordering(), &[3, 0, 1, 2]);
        assert_eq!(s.parents(0), &[3]);
        assert!(s.parents(3).is_empty());
        assert!(s.is_acyclic());
        assert_eq!(s.arc_count(), 3);
    }
}
