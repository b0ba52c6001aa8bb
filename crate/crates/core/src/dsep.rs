//! d-separation and the confounding-vs-selection bias taxonomy.
//!
//! [`d_separated`] uses the standard reachability formulation (ancestral
//! closure of the conditioning set plus a direction-tagged traversal); an
//! exhaustive path enumerator cross-checks it in the test suite.
//!
//! [`bias_taxonomy`] enumerates the open bias channels between a treatment
//! and an outcome under a conditioning set. A channel is an open path from
//! the treatment to one of the outcome's parents, extended by that
//! parent's edge into the outcome. This covers the ordinary back-door and
//! collider paths and also the "virtual collider" channels — paths that
//! reach the outcome's own disturbance through a conditioned descendant of
//! the outcome — which have no simple treatment-outcome path of their own.
//! A channel is labeled `Confounding` when it traverses an ancestor of the
//! treatment (a factor affecting treatment), else `SelectionInduced`;
//! exactly the channels severed by randomizing the treatment end up
//! labeled `Confounding` on the shipped model corpus.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::CausalGraph;

/// Node-pair independence query: is `a` independent of `b` given `given`?
#[derive(Debug, Clone)]
pub struct SeparationQuery {
    pub a: String,
    pub b: String,
    pub given: Vec<String>,
}

impl SeparationQuery {
    pub fn new(
        a: impl Into<String>,
        b: impl Into<String>,
        given: impl IntoIterator<Item = impl Into<String>>,
    ) -> Self {
        SeparationQuery {
            a: a.into(),
            b: b.into(),
            given: given.into_iter().map(Into::into).collect(),
        }
    }

    /// Parse the query syntax `A _||_ B | C,D` (the conditioning part is
    /// optional).
    pub fn parse(text: &str) -> Result<Self> {
        let (a, rest) = text.split_once("_||_").ok_or_else(|| {
            Error::InvalidQuery(format!("expected `A _||_ B | C,D`, got {text:?}"))
        })?;
        let (b, given) = match rest.split_once('|') {
            Some((b, g)) => (b, g),
            None => (rest, ""),
        };
        let given: Vec<String> = given
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(str::to_owned)
            .collect();
        let a = a.trim();
        let b = b.trim();
        if a.is_empty() || b.is_empty() {
            return Err(Error::InvalidQuery("empty node name in query".into()));
        }
        Ok(SeparationQuery::new(a, b, given))
    }

    fn resolve(&self, graph: &CausalGraph) -> Result<(usize, usize, Vec<bool>)> {
        let a = graph.node_id(&self.a)?;
        let b = graph.node_id(&self.b)?;
        if a == b {
            return Err(Error::InvalidQuery("query endpoints must differ".into()));
        }
        let mut cond = vec![false; graph.len()];
        for name in &self.given {
            let id = graph.node_id(name)?;
            if id == a || id == b {
                return Err(Error::InvalidQuery(format!(
                    "conditioning set may not contain endpoint {name}"
                )));
            }
            cond[id] = true;
        }
        Ok((a, b, cond))
    }
}

/// True iff every path between the query endpoints is blocked by the
/// conditioning set (colliders open only when they or a descendant are
/// conditioned on).
pub fn d_separated(graph: &CausalGraph, query: &SeparationQuery) -> Result<bool> {
    let (a, b, cond) = query.resolve(graph)?;
    Ok(!reachable(graph, a, &cond)[b])
}

/// Active-trail reachability from `start` given the conditioning mask.
/// Traversal state is (node, arrived-against-the-edge): `up` means the
/// last step went child -> parent or is the start.
fn reachable(graph: &CausalGraph, start: usize, cond: &[bool]) -> Vec<bool> {
    let n = graph.len();
    let cond_nodes: Vec<usize> = (0..n).filter(|&v| cond[v]).collect();
    let anc_of_cond = graph.ancestral_mask(&cond_nodes);

    let mut reach = vec![false; n];
    // visited[(v, up)]
    let mut visited = vec![[false; 2]; n];
    let mut stack: Vec<(usize, bool)> = vec![(start, true)];

    while let Some((v, up)) = stack.pop() {
        if visited[v][up as usize] {
            continue;
        }
        visited[v][up as usize] = true;
        if !cond[v] {
            reach[v] = true;
        }

        if up {
            // Arrived from a child (or starting): may continue to parents
            // and to children unless v itself is conditioned on.
            if !cond[v] {
                for &p in graph.parents_of(v) {
                    stack.push((p, true));
                }
                for &c in graph.children_of(v) {
                    stack.push((c, false));
                }
            }
        } else {
            // Arrived from a parent: v is a chain/collider point.
            if !cond[v] {
                for &c in graph.children_of(v) {
                    stack.push((c, false));
                }
            }
            // Collider opens when v is conditioned on or has a conditioned
            // descendant.
            if anc_of_cond[v] {
                for &p in graph.parents_of(v) {
                    stack.push((p, true));
                }
            }
        }
    }
    reach
}

/// Verdict of the instrument-sensitivity prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum IvSensitivity {
    /// Conditioning on the instrument changes the treatment-outcome
    /// association: residual confounding is present.
    Sensitive,
    /// The instrument is independent of the outcome given treatment and
    /// the conditioning set; conditioning on it cannot move the slope.
    Insensitive,
}

/// Predict from graph structure alone whether conditioning on a declared
/// instrument will move the treatment-outcome association. The node must
/// be a valid instrument: with the treatment removed, it has no open
/// channel to the outcome.
pub fn iv_effect_prediction(
    graph: &CausalGraph,
    treatment: &str,
    outcome: &str,
    iv: &str,
    conditioned: &[&str],
) -> Result<IvSensitivity> {
    let t = graph.node_id(treatment)?;
    graph.node_id(outcome)?;
    graph.node_id(iv)?;

    // Instrument validity: removing the treatment must disconnect the
    // instrument from the outcome (given nothing).
    let pruned = graph.without_node(t);
    if pruned.node_id(iv).is_ok() && pruned.node_id(outcome).is_ok() {
        let open = !d_separated(
            &pruned,
            &SeparationQuery::new(iv, outcome, Vec::<String>::new()),
        )?;
        if open {
            return Err(Error::NotAnInstrument(format!(
                "{iv} reaches {outcome} without passing through {treatment}"
            )));
        }
    }

    let mut given: Vec<String> = vec![treatment.to_owned()];
    given.extend(conditioned.iter().map(|s| (*s).to_owned()));
    let separated = d_separated(graph, &SeparationQuery::new(outcome, iv, given))?;
    Ok(if separated {
        IvSensitivity::Insensitive
    } else {
        IvSensitivity::Sensitive
    })
}

/// Label of one open bias channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum PathClass {
    /// Traverses an ancestor of the treatment; removable by randomization.
    Confounding,
    /// Induced purely by conditioning on common consequences.
    SelectionInduced,
}

/// One open channel, as the node sequence from treatment to outcome. In a
/// virtual-collider channel the outcome appears twice: once as the
/// conditioned collider's ancestor along the way and once as the final
/// endpoint.
#[derive(Debug, Clone, Serialize)]
pub struct BiasPath {
    pub nodes: Vec<String>,
    pub class: PathClass,
}

/// All open bias channels between treatment and outcome under a
/// conditioning set, with summary flags.
#[derive(Debug, Clone, Serialize)]
pub struct PathReport {
    pub open_paths: Vec<BiasPath>,
    pub has_confounding_component: bool,
    pub has_selection_component: bool,
}

/// Exhaustive enumeration refuses graphs larger than this.
pub const PATH_ENUMERATION_LIMIT: usize = 20;

/// Enumerate the open non-causal channels between `treatment` and
/// `outcome` given `conditioned`, labeling each per [`PathClass`].
pub fn bias_taxonomy(
    graph: &CausalGraph,
    treatment: &str,
    outcome: &str,
    conditioned: &[&str],
) -> Result<PathReport> {
    if graph.len() > PATH_ENUMERATION_LIMIT {
        return Err(Error::PathExplosion {
            nodes: graph.len(),
            limit: PATH_ENUMERATION_LIMIT,
        });
    }
    let t = graph.node_id(treatment)?;
    let y = graph.node_id(outcome)?;
    if t == y {
        return Err(Error::InvalidQuery(
            "treatment must differ from outcome".into(),
        ));
    }
    let mut cond = vec![false; graph.len()];
    for name in conditioned {
        let id = graph.node_id(name)?;
        if id == t || id == y {
            return Err(Error::InvalidQuery(format!(
                "conditioning set may not contain {name}"
            )));
        }
        cond[id] = true;
    }

    let cond_nodes: Vec<usize> = (0..graph.len()).filter(|&v| cond[v]).collect();
    let anc_of_cond = graph.ancestral_mask(&cond_nodes);
    let anc_of_treatment = graph.proper_ancestors(&[t]);

    let mut report = PathReport {
        open_paths: vec![],
        has_confounding_component: false,
        has_selection_component: false,
    };
    let mut push = |nodes: Vec<usize>| {
        // The treatment endpoint never counts as "traversed".
        let confounding = nodes[1..].iter().any(|&v| anc_of_treatment[v]);
        let class = if confounding {
            PathClass::Confounding
        } else {
            PathClass::SelectionInduced
        };
        match class {
            PathClass::Confounding => report.has_confounding_component = true,
            PathClass::SelectionInduced => report.has_selection_component = true,
        }
        report.open_paths.push(BiasPath {
            nodes: nodes.iter().map(|&v| graph.name(v).to_owned()).collect(),
            class,
        });
    };

    // Node-level channels: open simple treatment-outcome paths that are
    // not fully forward-directed (those are the causal pathway, not bias).
    for (nodes, dirs) in open_simple_paths(graph, t, y, &cond, &anc_of_cond) {
        if dirs.iter().all(|&forward| forward) {
            continue;
        }
        push(nodes);
    }

    // Virtual-collider channels: open simple paths from the treatment to
    // an unconditioned parent of the outcome that pass through the outcome
    // itself, closed by that parent's edge back into the outcome. These
    // carry the bias created when a conditioned descendant of the outcome
    // opens the collider at the outcome; they have no simple
    // treatment-outcome form, so the outcome appears twice.
    for &parent in graph.parents_of(y) {
        if parent == t || cond[parent] {
            continue;
        }
        for (mut nodes, _) in open_simple_paths(graph, t, parent, &cond, &anc_of_cond) {
            if !nodes.contains(&y) {
                continue;
            }
            nodes.push(y);
            push(nodes);
        }
    }

    Ok(report)
}

/// All open simple undirected paths from `from` to `to`, with the forward
/// flag of every step.
fn open_simple_paths(
    graph: &CausalGraph,
    from: usize,
    to: usize,
    cond: &[bool],
    anc_of_cond: &[bool],
) -> Vec<(Vec<usize>, Vec<bool>)> {
    let mut state = PathSearch {
        graph,
        cond,
        anc_of_cond,
        target: to,
        nodes: vec![from],
        dirs: vec![],
        on_path: {
            let mut m = vec![false; graph.len()];
            m[from] = true;
            m
        },
        found: vec![],
    };
    state.dfs(from);
    state.found
}

/// DFS over simple undirected paths, tracking edge directions so collider
/// openness can be judged incrementally.
struct PathSearch<'a> {
    graph: &'a CausalGraph,
    cond: &'a [bool],
    anc_of_cond: &'a [bool],
    target: usize,
    nodes: Vec<usize>,
    /// dirs[i]: the step nodes[i] -> nodes[i+1] follows the edge forward.
    dirs: Vec<bool>,
    on_path: Vec<bool>,
    found: Vec<(Vec<usize>, Vec<bool>)>,
}

impl PathSearch<'_> {
    fn dfs(&mut self, v: usize) {
        if v == self.target {
            self.found.push((self.nodes.clone(), self.dirs.clone()));
            return;
        }
        let neighbors: Vec<(usize, bool)> = self
            .graph
            .children_of(v)
            .iter()
            .map(|&c| (c, true))
            .chain(self.graph.parents_of(v).iter().map(|&p| (p, false)))
            .collect();
        for (w, forward) in neighbors {
            if self.on_path[w] {
                continue;
            }
            // Interior-node openness for v is decided one step late, once
            // both adjacent edge directions are known.
            if let Some(&prev_forward) = self.dirs.last() {
                let collider = prev_forward && !forward;
                let open = if collider {
                    self.anc_of_cond[v]
                } else {
                    !self.cond[v]
                };
                if !open {
                    continue;
                }
            }
            self.nodes.push(w);
            self.dirs.push(forward);
            self.on_path[w] = true;
            self.dfs(w);
            self.on_path[w] = false;
            self.dirs.pop();
            self.nodes.pop();
        }
    }
}
