use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::cpt::BayesNetModel;
use super::factor::Factor;
use super::structure::NetworkStructure;
use crate::dataset::Record;
use crate::distribution::ClassDistribution;
use crate::error::{Error, Result};

/// Refuse to materialize clique potentials larger than this.
const MAX_POTENTIAL_CELLS: usize = 1 << 24;

/// Clique tree of the moralized, triangulated network.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JunctionTree {
    node_count: usize,
    /// Sorted member lists.
    cliques: Vec<Vec<usize>>,
    edges: Vec<(usize, usize)>,
    /// Sorted intersection of the cliques joined by each edge.
    separators: Vec<Vec<usize>>,
    /// Clique holding each node's CPT.
    family_clique: Vec<usize>,
}

impl JunctionTree {
    pub fn cliques(&self) -> &[Vec<usize>] {
        &self.cliques
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn separators(&self) -> &[Vec<usize>] {
        &self.separators
    }

    pub fn family_clique(&self, node: usize) -> usize {
        self.family_clique[node]
    }

    /// The cliques containing any given node form a connected subtree.
    pub fn has_running_intersection(&self) -> bool {
        let m = self.cliques.len();
        let adj = self.adjacency();
        (0..self.node_count).all(|v| {
            let holding: Vec<usize> = (0..m).filter(|&c| self.cliques[c].contains(&v)).collect();
            let Some(&start) = holding.first() else {
                return false;
            };
            let mut seen = vec![false; m];
            let mut stack = vec![start];
            seen[start] = true;
            let mut reached = 1;
            while let Some(c) = stack.pop() {
                for &(nb, _) in &adj[c] {
                    if !seen[nb] && self.cliques[nb].contains(&v) {
                        seen[nb] = true;
                        reached += 1;
                        stack.push(nb);
                    }
                }
            }
            reached == holding.len()
        })
    }

    /// Every node's family (node plus parents) lies inside its assigned clique.
    pub fn covers_families(&self, structure: &NetworkStructure) -> bool {
        (0..self.node_count).all(|v| {
            let clique = &self.cliques[self.family_clique[v]];
            clique.contains(&v) && structure.parents(v).iter().all(|p| clique.contains(p))
        })
    }

    fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.cliques.len()];
        for (e, &(a, b)) in self.edges.iter().enumerate() {
            adj[a].push((b, e));
            adj[b].push((a, e));
        }
        adj
    }
}

/// Moralize, triangulate by greedy min-fill elimination (lowest index on
/// ties), keep the maximal elimination cliques and join them with a
/// maximum-weight spanning tree on separator size.
pub fn build_junction_tree(structure: &NetworkStructure) -> Result<JunctionTree> {
    let n = structure.node_count();
    if n == 0 {
        return Err(Error::InvalidArgument("network has no nodes".into()));
    }
    let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for child in 0..n {
        let ps = structure.parents(child);
        for (i, &p) in ps.iter().enumerate() {
            adj[child].insert(p);
            adj[p].insert(child);
            for &q in &ps[i + 1..] {
                adj[p].insert(q);
                adj[q].insert(p);
            }
        }
    }

    let mut eliminated = vec![false; n];
    let mut candidates: Vec<Vec<usize>> = Vec::with_capacity(n);
    for _ in 0..n {
        let mut best: Option<(usize, usize)> = None;
        for v in (0..n).filter(|&v| !eliminated[v]) {
            let nbrs: Vec<usize> = adj[v].iter().copied().collect();
            let mut fill = 0;
            for (i, &a) in nbrs.iter().enumerate() {
                for &b in &nbrs[i + 1..] {
                    if !adj[a].contains(&b) {
                        fill += 1;
                    }
                }
            }
            if best.is_none_or(|(f, _)| fill < f) {
                best = Some((fill, v));
            }
        }
        let (_, v) = best.expect("an uneliminated node remains");
        let nbrs: Vec<usize> = adj[v].iter().copied().collect();
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                adj[a].insert(b);
                adj[b].insert(a);
            }
        }
        let mut clique = nbrs.clone();
        clique.push(v);
        clique.sort_unstable();
        candidates.push(clique);
        for &a in &nbrs {
            adj[a].remove(&v);
        }
        adj[v].clear();
        eliminated[v] = true;
    }

    let is_subset = |a: &[usize], b: &[usize]| a.iter().all(|x| b.binary_search(x).is_ok());
    let mut cliques: Vec<Vec<usize>> = Vec::new();
    for (i, c) in candidates.iter().enumerate() {
        let dominated = candidates.iter().enumerate().any(|(j, d)| {
            j != i && is_subset(c, d) && (c.len() < d.len() || j < i)
        });
        if !dominated {
            cliques.push(c.clone());
        }
    }

    let m = cliques.len();
    let mut pairs = Vec::new();
    for i in 0..m {
        for j in i + 1..m {
            let w = cliques[i].iter().filter(|x| cliques[j].binary_search(x).is_ok()).count();
            pairs.push((w, i, j));
        }
    }
    pairs.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    let mut root: Vec<usize> = (0..m).collect();
    fn find(root: &mut [usize], mut x: usize) -> usize {
        while root[x] != x {
            root[x] = root[root[x]];
            x = root[x];
        }
        x
    }
    let mut edges = Vec::with_capacity(m.saturating_sub(1));
    let mut separators = Vec::with_capacity(m.saturating_sub(1));
    for (_, i, j) in pairs {
        let (ri, rj) = (find(&mut root, i), find(&mut root, j));
        if ri != rj {
            root[ri] = rj;
            edges.push((i, j));
            separators.push(
                cliques[i]
                    .iter()
                    .copied()
                    .filter(|x| cliques[j].binary_search(x).is_ok())
                    .collect(),
            );
        }
    }

    let mut family_clique = Vec::with_capacity(n);
    for v in 0..n {
        let mut family = structure.parents(v).to_vec();
        family.push(v);
        let c = cliques
            .iter()
            .position(|c| family.iter().all(|x| c.binary_search(x).is_ok()))
            .ok_or_else(|| Error::Model(format!("no clique covers the family of node {v}")))?;
        family_clique.push(c);
    }

    Ok(JunctionTree {
        node_count: n,
        cliques,
        edges,
        separators,
        family_clique,
    })
}

fn check_evidence(model: &BayesNetModel, jt: &JunctionTree, evidence: &[Option<usize>]) -> Result<()> {
    if jt.node_count != model.node_count() {
        return Err(Error::Model("junction tree does not match the network".into()));
    }
    if evidence.len() != model.node_count() {
        return Err(Error::InvalidArgument(format!(
            "evidence covers {} nodes, network has {}",
            evidence.len(),
            model.node_count()
        )));
    }
    for (v, e) in evidence.iter().enumerate() {
        if let Some(x) = e {
            if *x >= model.cards()[v] {
                return Err(Error::InvalidArgument(format!(
                    "evidence value {x} out of range for node {v}"
                )));
            }
        }
    }
    Ok(())
}

/// Product of the clique's assigned CPTs with observed nodes fixed to their
/// evidence. The result ranges only over the clique's unobserved nodes.
fn reduced_potential(
    model: &BayesNetModel,
    clique: &[usize],
    families: &[usize],
    evidence: &[Option<usize>],
) -> Result<Factor> {
    let vars: Vec<usize> = clique.iter().copied().filter(|&v| evidence[v].is_none()).collect();
    let cards: Vec<usize> = vars.iter().map(|&v| model.cards()[v]).collect();
    let size = cards.iter().try_fold(1usize, |a, &c| a.checked_mul(c));
    let size = match size {
        Some(s) if s <= MAX_POTENTIAL_CELLS => s,
        _ => return Err(Error::Model("clique potential too large for exact inference".into())),
    };
    let mut assignment: Vec<usize> = evidence.iter().map(|e| e.unwrap_or(0)).collect();
    let mut local = vec![0usize; vars.len()];
    let mut logs = Vec::with_capacity(size);
    loop {
        for (&v, &x) in vars.iter().zip(&local) {
            assignment[v] = x;
        }
        let lp: f64 = families.iter().map(|&f| model.cpt(f).prob(&assignment).ln()).sum();
        logs.push(lp);
        let mut k = local.len();
        let mut more = false;
        while k > 0 {
            k -= 1;
            local[k] += 1;
            if local[k] < cards[k] {
                more = true;
                break;
            }
            local[k] = 0;
        }
        if !more {
            break;
        }
    }
    let max = logs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(Error::InconsistentEvidence);
    }
    let values = logs.into_iter().map(|l| (l - max).exp()).collect();
    Factor::new(vars, cards, values)
}

/// Calibrated clique beliefs (each normalized) after a collect and a
/// distribute pass rooted at clique 0.
fn calibrate(
    model: &BayesNetModel,
    jt: &JunctionTree,
    evidence: &[Option<usize>],
    wanted: Option<usize>,
) -> Result<Vec<Option<Factor>>> {
    check_evidence(model, jt, evidence)?;
    let m = jt.cliques.len();
    let mut assigned = vec![Vec::new(); m];
    for v in 0..jt.node_count {
        assigned[jt.family_clique[v]].push(v);
    }
    let potentials = (0..m)
        .map(|c| reduced_potential(model, &jt.cliques[c], &assigned[c], evidence))
        .collect::<Result<Vec<_>>>()?;

    let adj = jt.adjacency();
    let mut order = Vec::with_capacity(m);
    let mut parent = vec![usize::MAX; m];
    let mut parent_edge = vec![usize::MAX; m];
    let mut seen = vec![false; m];
    for root in 0..m {
        if seen[root] {
            continue;
        }
        seen[root] = true;
        let start = order.len();
        order.push(root);
        let mut head = start;
        while head < order.len() {
            let c = order[head];
            head += 1;
            for &(nb, e) in &adj[c] {
                if !seen[nb] {
                    seen[nb] = true;
                    parent[nb] = c;
                    parent_edge[nb] = e;
                    order.push(nb);
                }
            }
        }
    }
    let mut children = vec![Vec::new(); m];
    for &c in &order {
        if parent[c] != usize::MAX {
            children[parent[c]].push(c);
        }
    }
    let sep_vars = |c: usize| -> Vec<usize> {
        jt.separators[parent_edge[c]]
            .iter()
            .copied()
            .filter(|&v| evidence[v].is_none())
            .collect()
    };

    let mut up: Vec<Option<Factor>> = vec![None; m];
    for &c in order.iter().rev() {
        if parent[c] == usize::MAX {
            continue;
        }
        let mut f = potentials[c].clone();
        for &ch in &children[c] {
            f = f.product(up[ch].as_ref().expect("children are processed first"));
        }
        let mut msg = f.marginalize_to(&sep_vars(c));
        msg.normalize()?;
        up[c] = Some(msg);
    }

    let mut down: Vec<Option<Factor>> = vec![None; m];
    for &c in &order {
        let p = parent[c];
        if p == usize::MAX {
            continue;
        }
        let mut f = potentials[p].clone();
        if let Some(d) = &down[p] {
            f = f.product(d);
        }
        for &sib in children[p].iter().filter(|&&s| s != c) {
            f = f.product(up[sib].as_ref().expect("collect pass done"));
        }
        let mut msg = f.marginalize_to(&sep_vars(c));
        msg.normalize()?;
        down[c] = Some(msg);
    }

    let mut beliefs = vec![None; m];
    for c in 0..m {
        if wanted.is_some_and(|w| w != c) {
            continue;
        }
        let mut b = potentials[c].clone();
        if let Some(d) = &down[c] {
            b = b.product(d);
        }
        for &ch in &children[c] {
            b = b.product(up[ch].as_ref().expect("collect pass done"));
        }
        b.normalize()?;
        beliefs[c] = Some(b);
    }
    Ok(beliefs)
}

/// Posterior marginal of every node. Observed nodes get a point mass on
/// their evidence value.
pub fn query_marginals(
    model: &BayesNetModel,
    jt: &JunctionTree,
    evidence: &[Option<usize>],
) -> Result<Vec<ClassDistribution>> {
    let beliefs = calibrate(model, jt, evidence, None)?;
    (0..model.node_count())
        .map(|v| match evidence.get(v).copied().flatten() {
            Some(x) => Ok(ClassDistribution::one_hot(model.cards()[v], x)),
            None => {
                let c = jt.cliques.iter().position(|c| c.contains(&v)).expect("node in a clique");
                marginal_of(beliefs[c].as_ref().expect("all beliefs computed"), v)
            }
        })
        .collect()
}

fn marginal_of(belief: &Factor, node: usize) -> Result<ClassDistribution> {
    let mut f = belief.marginalize_to(&[node]);
    f.normalize()?;
    ClassDistribution::new(f.values().to_vec())
}

/// Posterior of `node` given the evidence. `node` must be unobserved.
pub fn query_class_marginal(
    model: &BayesNetModel,
    jt: &JunctionTree,
    evidence: &[Option<usize>],
    node: usize,
) -> Result<ClassDistribution> {
    if node >= model.node_count() {
        return Err(Error::InvalidArgument(format!("node {node} out of range")));
    }
    if evidence.get(node).copied().flatten().is_some() {
        return Err(Error::InvalidArgument(format!("queried node {node} is observed")));
    }
    let c = jt.cliques.iter().position(|c| c.contains(&node)).expect("node in a clique");
    let beliefs = calibrate(model, jt, evidence, Some(c))?;
    marginal_of(beliefs[c].as_ref().expect("belief computed"), node)
}

/// Class posterior for a discretized record: every non-class node, in
/// increasing order, is observed from the record's features.
pub fn predict_bn(model: &BayesNetModel, jt: &JunctionTree, record: &Record) -> Result<ClassDistribution> {
    let class = model.class_node();
    let n = model.node_count();
    if record.values.len() + 1 != n {
        return Err(Error::SchemaMismatch(format!(
            "record has {} features, network expects {}",
            record.values.len(),
            n - 1
        )));
    }
    let mut evidence = Vec::with_capacity(n);
    let mut features = record.values.iter();
    for v in 0..n {
        if v == class {
            evidence.push(None);
        } else {
            let x = *features.next().expect("length checked");
            if x.is_nan() || x < 0.0 || x.fract() != 0.0 {
                return Err(Error::InvalidArgument(format!("value {x} is not a category index")));
            }
            evidence.push(Some(x as usize));
        }
    }
    query_class_marginal(model, jt, &evidence, class)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bayes_net::cpt::Cpt;
    use crate::rng::seeded;
    use rand::Rng;

    fn random_network(n: usize, seed: u64, max_parents: usize) -> BayesNetModel {
        let mut rng = seeded(seed);
        let cards: Vec<usize> = (0..n).map(|_| rng.gen_range(2..=3)).collect();
        let mut parents = vec![Vec::new(); n];
        for (v, ps) in parents.iter_mut().enumerate().skip(1) {
            for p in 0..v {
                if ps.len() < max_parents && rng.gen_bool(0.5) {
                    ps.push(p);
                }
            }
        }
        let structure = NetworkStructure::new((0..n).collect(), parents.clone()).unwrap();
        let cpts = (0..n)
            .map(|v| {
                let pc: Vec<usize> = parents[v].iter().map(|&p| cards[p]).collect();
                let q: usize = pc.iter().product();
                let mut table = Vec::new();
                for _ in 0..q {
                    let w: Vec<f64> = (0..cards[v]).map(|_| rng.gen_range(0.05..1.0)).collect();
                    let s: f64 = w.iter().sum();
                    table.extend(w.iter().map(|x| x / s));
                }
                Cpt::new(v, cards[v], parents[v].clone(), pc, table).unwrap()
            })
            .collect();
        BayesNetModel::new(structure, cards, cpts, n - 1).unwrap()
    }

    /// Posterior of `node` by summing the joint over every full assignment.
    fn enumerate(model: &BayesNetModel, evidence: &[Option<usize>], node: usize) -> Vec<f64> {
        let cards = model.cards();
        let mut totals = vec![0.0; cards[node]];
        let mut a = vec![0usize; cards.len()];
        loop {
            if a.iter().zip(evidence).all(|(x, e)| e.is_none_or(|e| e == *x)) {
                totals[a[node]] += model.joint(&a);
            }
            let mut k = a.len();
            let mut more = false;
            while k > 0 {
                k -= 1;
                a[k] += 1;
                if a[k] < cards[k] {
                    more = true;
                    break;
                }
                a[k] = 0;
            }
            if !more {
                break;
            }
        }
        let s: f64 = totals.iter().sum();
        totals.iter().map(|t| t / s).collect()
    }

    #[test]
    fn matches_brute_force_enumeration() {
        for seed in 0..40u64 {
            let n = 2 + (seed as usize % 5);
            let model = random_network(n, seed, 3);
            let jt = build_junction_tree(model.structure()).unwrap();
            assert!(jt.has_running_intersection(), "seed {seed}");
            assert!(jt.covers_families(model.structure()));
            assert_eq!(jt.edges().len() + 1, jt.cliques().len());
            let mut rng = seeded(seed + 1000);
            let evidence: Vec<Option<usize>> = (0..n)
                .map(|v| {
                    (v != n - 1 && rng.gen_bool(0.5)).then(|| rng.gen_range(0..model.cards()[v]))
                })
                .collect();
            let marginals = query_marginals(&model, &jt, &evidence).unwrap();
            for v in 0..n {
                let want = if let Some(x) = evidence[v] {
                    let mut p = vec![0.0; model.cards()[v]];
                    p[x] = 1.0;
                    p
                } else {
                    enumerate(&model, &evidence, v)
                };
                for (g, w) in marginals[v].probabilities().iter().zip(&want) {
                    assert!((g - w).abs() < 1e-9, "seed {seed} node {v}: {g} vs {w}");
                }
            }
            let class = query_class_marginal(&model, &jt, &evidence, n - 1).unwrap();
            assert_eq!(class.probabilities(), marginals[n - 1].probabilities());
        }
    }

    #[test]
    fn two_node_example() {
        // C -> X, P(C=1) = 0.3, P(X=1|C=0) = 0.2, P(X=1|C=1) = 0.9
        let s = NetworkStructure::new(vec![1, 0], vec![vec![1], vec![]]).unwrap();
        let cpts = vec![
            Cpt::new(0, 2, vec![1], vec![2], vec![0.8, 0.2, 0.1, 0.9]).unwrap(),
            Cpt::new(1, 2, vec![], vec![], vec![0.7, 0.3]).unwrap(),
        ];
        let model = BayesNetModel::new(s, vec![2, 2], cpts, 1).unwrap();
        let jt = build_junction_tree(model.structure()).unwrap();
        let p = predict_bn(&model, &jt, &Record::new(vec![1.0], 0)).unwrap();
        let want = 0.3 * 0.9 / (0.3 * 0.9 + 0.7 * 0.2);
        assert!((p.get(1) - want).abs() < 1e-12);
    }

    #[test]
    fn impossible_evidence_is_reported() {
        let s = NetworkStructure::new(vec![1, 0], vec![vec![1], vec![]]).unwrap();
        let cpts = vec![
            Cpt::new(0, 2, vec![1], vec![2], vec![1.0, 0.0, 1.0, 0.0]).unwrap(),
            Cpt::new(1, 2, vec![], vec![], vec![0.5, 0.5]).unwrap(),
        ];
        let model = BayesNetModel::new(s, vec![2, 2], cpts, 1).unwrap();
        let jt = build_junction_tree(model.structure()).unwrap();
        let err = query_class_marginal(&model, &jt, &[Some(1), None], 1).unwrap_err();
        assert!(matches!(err, Error::InconsistentEvidence));
        assert!(query_class_marginal(&model, &jt, &[None, Some(0)], 1).is_err());
        assert!(query_class_marginal(&model, &jt, &[Some(2), None], 1).is_err());
    }

    #[test]
    fn textbook_cliques() {
        // chain A -> B -> C
        let chain = NetworkStructure::new(vec![0, 1, 2], vec![vec![], vec![0], vec![1]]).unwrap();
        let jt = build_junction_tree(&chain).unwrap();
        let mut cliques = jt.cliques().to_vec();
        cliques.sort();
        assert_eq!(cliques, vec![vec![0, 1], vec![1, 2]]);
        assert_eq!(jt.separators(), &[vec![1]]);

        // diamond A -> B, A -> C, B -> D, C -> D: moralizing marries B and C
        let diamond =
            NetworkStructure::new(vec![0, 1, 2, 3], vec![vec![], vec![0], vec![0], vec![1, 2]])
                .unwrap();
        let jt = build_junction_tree(&diamond).unwrap();
        let mut cliques = jt.cliques().to_vec();
        cliques.sort();
        assert_eq!(cliques, vec![vec![0, 1, 2], vec![1, 2, 3]]);
        assert_eq!(jt.separators(), &[vec![1, 2]]);

        // naive star: one (class, feature) clique per feature, joined at the class
        let star = NetworkStructure::naive(5, 4).unwrap();
        let jt = build_junction_tree(&star).unwrap();
        let mut cliques = jt.cliques().to_vec();
        cliques.sort();
        assert_eq!(cliques, vec![vec![0, 4], vec![1, 4], vec![2, 4], vec![3, 4]]);
        assert!(jt.separators().iter().all(|s| s == &[4]));
    }

    #[test]
    fn no_evidence_on_naive_structure_gives_prior() {
        let s = NetworkStructure::new(vec![2, 0, 1], vec![vec![2], vec![2], vec![]]).unwrap();
        let cpts = vec![
            Cpt::new(0, 2, vec![2], vec![2], vec![0.8, 0.2, 0.1, 0.9]).unwrap(),
            Cpt::new(1, 2, vec![2], vec![2], vec![0.5, 0.5, 0.3, 0.7]).unwrap(),
            Cpt::new(2, 2, vec![], vec![], vec![0.6, 0.4]).unwrap(),
        ];
        let model = BayesNetModel::new(s, vec![2, 2, 2], cpts, 2).unwrap();
        let jt = build_junction_tree(model.structure()).unwrap();
        let p = query_class_marginal(&model, &jt, &[None, None, None], 2).unwrap();
        assert!((p.get(0) - 0.6).abs() < 1e-12);
        let a = predict_bn(&model, &jt, &Record::new(vec![1.0, 0.0], 0)).unwrap();
        let b = predict_bn(&model, &jt, &Record::new(vec![1.0, 0.0], 1)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn disconnected_network_still_forms_a_tree() {
        let s = NetworkStructure::empty(vec![0, 1, 2, 3]).unwrap();
        let jt = build_junction_tree(&s).unwrap();
        assert_eq!(jt.cliques().len(), 4);
        assert_eq!(jt.edges().len(), 3);
        assert!(jt.separators().iter().all(Vec::is_empty));
        assert!(jt.has_running_intersection());
    }

    #[test]
    fn larger_networks_keep_tree_properties() {
        for seed in 0..10u64 {
            let model = random_network(14, seed, 2);
            let jt = build_junction_tree(model.structure()).unwrap();
            assert!(jt.has_running_intersection());
            assert!(jt.covers_families(model.structure()));
            assert_eq!(jt.edges().len() + 1, jt.cliques().len());
        }
    }
}
