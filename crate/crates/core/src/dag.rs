//! Bayesian-network structure over column groups.
//!
//! A node is an ordered group of dataset columns; the graph induces the
//! factorized reference measure the divergence is taken against.

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::dataset::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeSpec {
    pub id: String,
    pub columns: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DagSpec {
    nodes: Vec<NodeSpec>,
    parents: Vec<Vec<String>>,
}

#[derive(Serialize, Deserialize)]
struct NodeRecord {
    id: String,
    columns: Vec<usize>,
    #[serde(default)]
    parents: Vec<String>,
}

#[derive(Serialize, Deserialize)]
struct DagRecord {
    nodes: Vec<NodeRecord>,
}

/// Column sets derived from a validated graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedNode {
    pub columns: Vec<usize>,
    /// Union of the parents' columns, sorted; empty for root nodes.
    pub parent_columns: Vec<usize>,
    /// `columns ∪ parent_columns`, sorted.
    pub joint_columns: Vec<usize>,
}

impl ResolvedNode {
    pub fn has_parents(&self) -> bool {
        !self.parent_columns.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedDag {
    pub order: Vec<usize>,
    pub nodes: Vec<ResolvedNode>,
    /// Every column referenced by some node, sorted.
    pub all_columns: Vec<usize>,
}

impl ResolvedDag {
    pub fn parentless_count(&self) -> usize {
        self.nodes.iter().filter(|n| !n.has_parents()).count()
    }
}

impl DagSpec {
    /// Builds a graph; `parents[l]` lists the ids of node `l`'s parents.
    pub fn new(nodes: Vec<NodeSpec>, parents: Vec<Vec<String>>) -> Result<Self> {
        if nodes.len() != parents.len() {
            return Err(Error::InvalidDag(format!(
                "{} nodes but {} parent lists",
                nodes.len(),
                parents.len()
            )));
        }
        let dag = Self { nodes, parents };
        dag.topological_order()?;
        Ok(dag)
    }

    /// A graph with no edges, one node per group, ids `g0, g1, ...`.
    pub fn edgeless(groups: &[Vec<usize>]) -> Result<Self> {
        let nodes = groups
            .iter()
            .enumerate()
            .map(|(i, cols)| NodeSpec {
                id: format!("g{i}"),
                columns: cols.clone(),
            })
            .collect::<Vec<_>>();
        let parents = vec![Vec::new(); nodes.len()];
        Self::new(nodes, parents)
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn parents(&self) -> &[Vec<String>] {
        &self.parents
    }

    pub fn edge_count(&self) -> usize {
        self.parents.iter().map(Vec::len).sum()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let record: DagRecord =
            serde_json::from_str(text).map_err(|e| Error::InvalidDag(format!("bad graph JSON: {e}")))?;
        let (nodes, parents) = record
            .nodes
            .into_iter()
            .map(|n| {
                (
                    NodeSpec {
                        id: n.id,
                        columns: n.columns,
                    },
                    n.parents,
                )
            })
            .unzip();
        Self::new(nodes, parents)
    }

    pub fn to_json(&self) -> String {
        let record = DagRecord {
            nodes: self
                .nodes
                .iter()
                .zip(&self.parents)
                .map(|(n, p)| NodeRecord {
                    id: n.id.clone(),
                    columns: n.columns.clone(),
                    parents: p.clone(),
                })
                .collect(),
        };
        serde_json::to_string(&record).expect("graph serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    /// Rewrites column indices through `f`, e.g. after selecting columns.
    pub fn map_columns(&self, f: impl Fn(usize) -> usize) -> Result<Self> {
        let nodes = self
            .nodes
            .iter()
            .map(|n| NodeSpec {
                id: n.id.clone(),
                columns: n.columns.iter().map(|&c| f(c)).collect(),
            })
            .collect();
        Self::new(nodes, self.parents.clone())
    }

    fn parent_indices(&self) -> Result<Vec<Vec<usize>>> {
        let mut by_id = HashMap::new();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id.is_empty() {
                return Err(Error::InvalidDag(format!("node {i} has an empty id")));
            }
            if by_id.insert(node.id.as_str(), i).is_some() {
                return Err(Error::InvalidDag(format!("duplicate node id {:?}", node.id)));
            }
        }
        self.parents
            .iter()
            .enumerate()
            .map(|(i, ps)| {
                let mut seen = BTreeSet::new();
                ps.iter()
                    .map(|p| {
                        let j = *by_id
                            .get(p.as_str())
                            .ok_or_else(|| Error::InvalidDag(format!("unknown parent id {p:?}")))?;
                        if j == i {
                            return Err(Error::InvalidDag(format!("node {p:?} is its own parent")));
                        }
                        if !seen.insert(j) {
                            return Err(Error::InvalidDag(format!("parent {p:?} listed twice")));
                        }
                        Ok(j)
                    })
                    .collect()
            })
            .collect()
    }

    fn check_columns(&self, n_cols: Option<usize>) -> Result<()> {
        let mut owner: HashMap<usize, &str> = HashMap::new();
        for node in &self.nodes {
            if node.columns.is_empty() {
                return Err(Error::InvalidDag(format!("node {:?} has no columns", node.id)));
            }
            let mut own = BTreeSet::new();
            for &c in &node.columns {
                if let Some(n) = n_cols {
                    if c >= n {
                        return Err(Error::InvalidDag(format!(
                            "column {c} of node {:?} out of range (dataset has {n})",
                            node.id
                        )));
                    }
                }
                if !own.insert(c) {
                    return Err(Error::InvalidDag(format!(
                        "column {c} repeated in node {:?}",
                        node.id
                    )));
                }
                if let Some(other) = owner.insert(c, &node.id) {
                    return Err(Error::InvalidDag(format!(
                        "column {c} shared by nodes {other:?} and {:?}",
                        node.id
                    )));
                }
            }
        }
        Ok(())
    }

    /// Topological order that is stable with respect to node list order.
    fn topological_order(&self) -> Result<Vec<usize>> {
        self.check_columns(None)?;
        let parents = self.parent_indices()?;
        let n = self.nodes.len();
        let mut placed = vec![false; n];
        let mut order = Vec::with_capacity(n);
        while order.len() < n {
            let next = (0..n).find(|&i| !placed[i] && parents[i].iter().all(|&p| placed[p]));
            match next {
                Some(i) => {
                    placed[i] = true;
                    order.push(i);
                }
                None => {
                    let stuck: Vec<_> = (0..n)
                        .filter(|&i| !placed[i])
                        .map(|i| self.nodes[i].id.as_str())
                        .collect();
                    return Err(Error::InvalidDag(format!("cycle detected among {stuck:?}")));
                }
            }
        }
        Ok(order)
    }

    /// Validates against a dataset and resolves per-node column sets.
    pub fn resolve<T>(&self, dataset: &Dataset<T>) -> Result<ResolvedDag>
    where
        T: crate::Scalar,
    {
        self.resolve_for_width(dataset.n_cols())
    }

    pub fn resolve_for_width(&self, n_cols: usize) -> Result<ResolvedDag> {
        if self.nodes.is_empty() {
            return Err(Error::InvalidDag("graph has no nodes".into()));
        }
        self.check_columns(Some(n_cols))?;
        let order = self.topological_order()?;
        let parents = self.parent_indices()?;
        let nodes = self
            .nodes
            .iter()
            .zip(&parents)
            .map(|(node, ps)| {
                let parent_columns: BTreeSet<usize> = ps
                    .iter()
                    .flat_map(|&p| self.nodes[p].columns.iter().copied())
                    .collect();
                let joint: BTreeSet<usize> =
                    parent_columns.iter().chain(&node.columns).copied().collect();
                ResolvedNode {
                    columns: node.columns.clone(),
                    parent_columns: parent_columns.into_iter().collect(),
                    joint_columns: joint.into_iter().collect(),
                }
            })
            .collect();
        let all_columns: BTreeSet<usize> = self
            .nodes
            .iter()
            .flat_map(|n| n.columns.iter().copied())
            .collect();
        Ok(ResolvedDag {
            order,
            nodes,
            all_columns: all_columns.into_iter().collect(),
        })
    }
}

/// Checks `dag` against `dataset` and returns a topological order of node
/// indices, stable by node list order among incomparable nodes.
pub fn validate_dag<T: crate::Scalar>(dag: &DagSpec, dataset: &Dataset<T>) -> Result<Vec<usize>> {
    Ok(dag.resolve(dataset)?.order)
}

/// Two parentless nodes: the graph whose divergence is `I(A; B)`.
pub fn mi_dag(a: &[usize], b: &[usize]) -> Result<DagSpec> {
    DagSpec::new(
        vec![node("A", a), node("B", b)],
        vec![Vec::new(), Vec::new()],
    )
}

/// `A <- C -> B`: the graph whose divergence is `I(A; B | C)`.
pub fn cmi_dag(a: &[usize], b: &[usize], c: &[usize]) -> Result<DagSpec> {
    DagSpec::new(
        vec![node("A", a), node("B", b), node("C", c)],
        vec![vec!["C".into()], vec!["C".into()], Vec::new()],
    )
}

/// One parentless node per group: total correlation.
pub fn tc_dag(groups: &[Vec<usize>]) -> Result<DagSpec> {
    DagSpec::edgeless(groups)
}

fn node(id: &str, cols: &[usize]) -> NodeSpec {
    NodeSpec {
        id: id.into(),
        columns: cols.to_vec(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn chain_fork() -> DagSpec {
        // X1 <- X3 -> X2
        DagSpec::new(
            vec![node("X1", &[0]), node("X2", &[1]), node("X3", &[2])],
            vec![vec!["X3".into()], vec!["X3".into()], vec![]],
        )
        .unwrap()
    }

    fn ds(cols: usize) -> Dataset<f64> {
        Dataset::new(vec![0.0; cols * 2], cols, None).unwrap()
    }

    #[test]
    fn fork_orders_common_parent_first() {
        let order = validate_dag(&chain_fork(), &ds(3)).unwrap();
        assert_eq!(order, vec![2, 0, 1]);
    }

    #[test]
    fn edgeless_keeps_input_order() {
        let dag = tc_dag(&[vec![0], vec![1], vec![2]]).unwrap();
        assert_eq!(validate_dag(&dag, &ds(3)).unwrap(), vec![0, 1, 2]);
    }

    #[test]
    fn two_cycle_is_rejected() {
        let err = DagSpec::new(
            vec![node("a", &[0]), node("b", &[1])],
            vec![vec!["b".into()], vec!["a".into()]],
        )
        .unwrap_err();
        assert!(err.to_string().contains("cycle"), "{err}");
    }

    #[test]
    fn structural_errors() {
        let unknown = DagSpec::new(vec![node("a", &[0])], vec![vec!["zz".into()]]);
        assert!(unknown.unwrap_err().to_string().contains("unknown parent"));
        let selfp = DagSpec::new(vec![node("a", &[0])], vec![vec!["a".into()]]);
        assert!(selfp.unwrap_err().to_string().contains("own parent"));
        assert!(mi_dag(&[0, 1], &[1]).is_err());
        assert!(mi_dag(&[], &[1]).is_err());
        let dup = DagSpec::new(vec![node("a", &[0]), node("a", &[1])], vec![vec![], vec![]]);
        assert!(dup.is_err());
    }

    #[test]
    fn out_of_range_column_needs_dataset() {
        let dag = mi_dag(&[0], &[5]).unwrap();
        assert!(validate_dag(&dag, &ds(3)).is_err());
        assert!(validate_dag(&dag, &ds(6)).is_ok());
    }

    #[test]
    fn special_case_shapes() {
        let mi = mi_dag(&[0], &[1]).unwrap();
        assert_eq!((mi.nodes().len(), mi.edge_count()), (2, 0));
        let cmi = cmi_dag(&[0], &[1], &[2]).unwrap();
        assert_eq!(cmi.parents()[0], vec!["C".to_string()]);
        assert_eq!(cmi.parents()[1], vec!["C".to_string()]);
        assert!(cmi.parents()[2].is_empty());
        let tc = tc_dag(&[vec![0], vec![1], vec![2], vec![3]]).unwrap();
        assert_eq!((tc.nodes().len(), tc.edge_count()), (4, 0));
    }

    #[test]
    fn resolve_builds_column_sets() {
        let r = cmi_dag(&[0], &[3, 1], &[2]).unwrap().resolve(&ds(5)).unwrap();
        assert_eq!(r.all_columns, vec![0, 1, 2, 3]);
        assert_eq!(r.nodes[1].joint_columns, vec![1, 2, 3]);
        assert_eq!(r.nodes[0].parent_columns, vec![2]);
        assert_eq!(r.parentless_count(), 1);
    }

    #[test]
    fn json_round_trip() {
        let dag = chain_fork();
        let text = dag.to_json();
        assert!(text.starts_with(r#"{"nodes":[{"id":"X1","columns":[0],"parents":["X3"]}"#));
        assert_eq!(DagSpec::from_json(&text).unwrap(), dag);
        assert!(DagSpec::from_json(r#"{"nodes":[{"id":"a"}]}"#).is_err());
    }

    fn random_dag(n: usize, perm: &[usize], edges: &[(usize, usize)]) -> (Vec<NodeSpec>, Vec<Vec<String>>) {
        let nodes = (0..n).map(|i| node(&format!("n{i}"), &[i])).collect();
        let mut parents = vec![Vec::new(); n];
        for &(a, b) in edges {
            // forward edge in the sampled order: perm[a] -> perm[b] for a < b
            let (lo, hi) = (a.min(b), a.max(b));
            if lo != hi {
                let name = format!("n{}", perm[lo]);
                if !parents[perm[hi]].contains(&name) {
                    parents[perm[hi]].push(name);
                }
            }
        }
        (nodes, parents)
    }

    proptest! {
        #[test]
        fn random_forward_dags_validate_and_back_edge_fails(
            perm in Just((0..7).collect::<Vec<usize>>()).prop_shuffle(),
            edges in proptest::collection::vec((0usize..7, 0usize..7), 1..15),
        ) {
            let (nodes, parents) = random_dag(7, &perm, &edges);
            let dag = DagSpec::new(nodes.clone(), parents.clone()).unwrap();
            let order = validate_dag(&dag, &ds(7)).unwrap();
            let pos: Vec<usize> = {
                let mut p = vec![0; 7];
                for (k, &i) in order.iter().enumerate() { p[i] = k; }
                p
            };
            for (child, ps) in parents.iter().enumerate() {
                for p in ps {
                    let pi: usize = p[1..].parse().unwrap();
                    prop_assert!(pos[pi] < pos[child]);
                }
            }
            // add one back edge along an existing path (first forward edge reversed)
            if let Some((child, p)) = parents.iter().enumerate().find_map(|(c, ps)| ps.first().map(|p| (c, p.clone()))) {
                let pi: usize = p[1..].parse().unwrap();
                let mut bad = parents.clone();
                bad[pi].push(format!("n{child}"));
                prop_assert!(DagSpec::new(nodes, bad).is_err());
            }
        }
    }
}
