//! Directed acyclic causal graphs over named variables.
//!
//! A [`CausalGraph`] is the substrate everything else builds on: linear
//! structural models attach coefficients to its edges, the d-separation
//! and taxonomy routines walk it, and the samplers follow its topological
//! order. Nodes carry a [`NodeKind`] so that latent confounders and
//! selection indicators can be told apart from observed variables.

use std::collections::HashMap;

use crate::error::{Error, Result};

/// Role of a variable in the causal diagram.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub enum NodeKind {
    /// Measurable variable.
    Observed,
    /// Unmeasured variable (confounders, outcome disturbances).
    Latent,
    /// Entry-into-the-data-pool indicator; conditioned on by selection.
    Selection,
}

impl NodeKind {
    /// Parse the lowercase keyword used in model files.
    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "observed" => Some(NodeKind::Observed),
            "latent" => Some(NodeKind::Latent),
            "selection" => Some(NodeKind::Selection),
            _ => None,
        }
    }
}

/// Immutable DAG with named, kinded nodes and at most one edge per ordered
/// pair. Constructed once, validated eagerly, then shared freely.
#[derive(Debug, Clone)]
pub struct CausalGraph {
    names: Vec<String>,
    kinds: Vec<NodeKind>,
    lookup: HashMap<String, usize>,
    /// Edge list in declaration order; endpoints are node indices.
    edges: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    topo: Vec<usize>,
}

impl CausalGraph {
    /// Build and validate a graph from node declarations and parent->child
    /// edges. Rejects duplicate names, duplicate edges, undeclared
    /// endpoints, and cycles.
    pub fn new<S: AsRef<str>>(nodes: &[(S, NodeKind)], edges: &[(S, S)]) -> Result<Self> {
        let mut names = Vec::with_capacity(nodes.len());
        let mut kinds = Vec::with_capacity(nodes.len());
        let mut lookup = HashMap::with_capacity(nodes.len());
        for (name, kind) in nodes {
            let name = name.as_ref().to_owned();
            if lookup.insert(name.clone(), names.len()).is_some() {
                return Err(Error::DuplicateNode(name));
            }
            names.push(name);
            kinds.push(*kind);
        }

        let mut edge_ix = Vec::with_capacity(edges.len());
        let mut parents = vec![Vec::new(); names.len()];
        let mut children = vec![Vec::new(); names.len()];
        for (p, c) in edges {
            let p = *lookup
                .get(p.as_ref())
                .ok_or_else(|| Error::UnknownNode(p.as_ref().to_owned()))?;
            let c = *lookup
                .get(c.as_ref())
                .ok_or_else(|| Error::UnknownNode(c.as_ref().to_owned()))?;
            if edge_ix.contains(&(p, c)) {
                return Err(Error::DuplicateEdge(names[p].clone(), names[c].clone()));
            }
            edge_ix.push((p, c));
            parents[c].push(p);
            children[p].push(c);
        }

        let topo = topological_order(names.len(), &edge_ix).map_err(|cycle| {
            Error::CyclicGraph(cycle.iter().map(|&i| names[i].clone()).collect())
        })?;

        Ok(CausalGraph {
            names,
            kinds,
            lookup,
            edges: edge_ix,
            parents,
            children,
            topo,
        })
    }

    /// Number of nodes.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    /// Resolve a name to its index.
    pub fn node_id(&self, name: &str) -> Result<usize> {
        self.lookup
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownNode(name.to_owned()))
    }

    pub fn name(&self, id: usize) -> &str {
        &self.names[id]
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn kind(&self, id: usize) -> NodeKind {
        self.kinds[id]
    }

    /// Edges as (parent, child) index pairs, in declaration order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn parents_of(&self, id: usize) -> &[usize] {
        &self.parents[id]
    }

    pub fn children_of(&self, id: usize) -> &[usize] {
        &self.children[id]
    }

    /// A topological order (parents before children), fixed at build time.
    pub fn topological_order(&self) -> &[usize] {
        &self.topo
    }

    /// Position of the edge parent->child in the edge list, if present.
    pub fn edge_index(&self, parent: usize, child: usize) -> Option<usize> {
        self.edges
            .iter()
            .position(|&(p, c)| p == parent && c == child)
    }

    /// Mask of nodes with a directed path into any seed, the seeds excluded.
    pub fn proper_ancestors(&self, seeds: &[usize]) -> Vec<bool> {
        let mut mask = self.ancestral_mask(seeds);
        for &s in seeds {
            mask[s] = false;
        }
        mask
    }

    /// Mask of seeds plus every ancestor of a seed.
    pub fn ancestral_mask(&self, seeds: &[usize]) -> Vec<bool> {
        self.closure(seeds, |v| &self.parents[v])
    }

    /// Mask of seeds plus every descendant of a seed.
    pub fn descendant_mask(&self, seeds: &[usize]) -> Vec<bool> {
        self.closure(seeds, |v| &self.children[v])
    }

    fn closure<'a, F>(&'a self, seeds: &[usize], step: F) -> Vec<bool>
    where
        F: Fn(usize) -> &'a [usize],
    {
        let mut mask = vec![false; self.len()];
        let mut stack: Vec<usize> = seeds.to_vec();
        for &s in seeds {
            mask[s] = true;
        }
        while let Some(v) = stack.pop() {
            for &w in step(v) {
                if !mask[w] {
                    mask[w] = true;
                    stack.push(w);
                }
            }
        }
        mask
    }

    /// Copy of the graph with one node (and its incident edges) removed.
    /// Used to check the instrument condition "no channel to the outcome
    /// except through the treatment".
    pub fn without_node(&self, id: usize) -> CausalGraph {
        let nodes: Vec<(String, NodeKind)> = self
            .names
            .iter()
            .zip(&self.kinds)
            .enumerate()
            .filter(|&(i, _)| i != id)
            .map(|(_, (n, k))| (n.clone(), *k))
            .collect();
        let edges: Vec<(String, String)> = self
            .edges
            .iter()
            .filter(|&&(p, c)| p != id && c != id)
            .map(|&(p, c)| (self.names[p].clone(), self.names[c].clone()))
            .collect();
        // Node/edge subsets of a valid DAG stay valid.
        CausalGraph::new(&nodes, &edges).expect("subgraph of a DAG is a DAG")
    }
}

/// Kahn's algorithm; on failure returns the nodes left on cycles.
fn topological_order(
    n: usize,
    edges: &[(usize, usize)],
) -> std::result::Result<Vec<usize>, Vec<usize>> {
    let mut indegree = vec![0usize; n];
    let mut children = vec![Vec::new(); n];
    for &(p, c) in edges {
        indegree[c] += 1;
        children[p].push(c);
    }
    let mut queue: Vec<usize> = (0..n).filter(|&v| indegree[v] == 0).collect();
    queue.reverse();
    let mut order = Vec::with_capacity(n);
    while let Some(v) = queue.pop() {
        order.push(v);
        for &c in &children[v] {
            indegree[c] -= 1;
            if indegree[c] == 0 {
                queue.push(c);
            }
        }
    }
    if order.len() == n {
        Ok(order)
    } else {
        Err((0..n).filter(|&v| indegree[v] > 0).collect())
    }
}
