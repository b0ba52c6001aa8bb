//! Linear structural causal models and their Gaussian algebra.
//!
//! A [`LinearSCM`] attaches a path coefficient to every edge of a
//! [`CausalGraph`] and a disturbance variance to every node. All
//! disturbances are mutually independent Gaussians, which makes every
//! conditional expectation linear and lets regression slopes be read off
//! the implied covariance matrix.
//!
//! Standardized models (the default convention here) take the user's path
//! coefficients literally and auto-derive each node's residual variance so
//! that every variable ends up with unit variance; a model for which that
//! residual would be negative is rejected as infeasible.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{CausalGraph, NodeKind};

/// Condition-number guard: past this, conditioning-set solves are treated
/// as singular rather than inverted.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Slack allowed when checking standardization feasibility.
const FEASIBILITY_TOL: f64 = 1e-9;

/// Declarative description of a model, as parsed from a model file or
/// assembled programmatically. `build_model` turns it into a validated
/// [`LinearSCM`].
#[derive(Debug, Clone)]
pub struct ModelSpec {
    pub nodes: Vec<(String, NodeKind)>,
    pub edges: Vec<EdgeSpec>,
    pub standardized: bool,
    /// Explicit disturbance variances; only meaningful when not
    /// standardized. Unlisted nodes default to variance 1.
    pub noise_variances: Vec<(String, f64)>,
}

/// One directed edge with its structural coefficient.
#[derive(Debug, Clone)]
pub struct EdgeSpec {
    pub parent: String,
    pub child: String,
    pub coefficient: f64,
}

impl EdgeSpec {
    pub fn new(parent: impl Into<String>, child: impl Into<String>, coefficient: f64) -> Self {
        EdgeSpec {
            parent: parent.into(),
            child: child.into(),
            coefficient,
        }
    }
}

/// A validated linear SCM: graph, coefficients, disturbance variances, and
/// the implied covariance matrix (cached at construction). Immutable after
/// construction; all operations are pure.
#[derive(Debug, Clone)]
pub struct LinearSCM {
    graph: CausalGraph,
    /// Parallel to `graph.edges()`.
    coefficients: Vec<f64>,
    /// Per-node disturbance variance (auto-derived when standardized).
    noise_variances: Vec<f64>,
    standardized: bool,
    covariance: DMatrix<f64>,
}

/// Build a [`LinearSCM`] from a spec, deriving residual variances when the
/// model is standardized and validating feasibility.
pub fn build_model(spec: &ModelSpec) -> Result<LinearSCM> {
    let graph = CausalGraph::new(
        &spec.nodes,
        &spec
            .edges
            .iter()
            .map(|e| (e.parent.clone(), e.child.clone()))
            .collect::<Vec<_>>(),
    )?;

    let mut coefficients = vec![0.0; spec.edges.len()];
    for e in &spec.edges {
        if !e.coefficient.is_finite() {
            return Err(Error::InfeasibleModel(format!(
                "non-finite coefficient on edge {} -> {}",
                e.parent, e.child
            )));
        }
        let p = graph.node_id(&e.parent)?;
        let c = graph.node_id(&e.child)?;
        let ix = graph.edge_index(p, c).expect("edge was inserted");
        coefficients[ix] = e.coefficient;
    }

    let mut noise = vec![1.0f64; graph.len()];
    if spec.standardized {
        if !spec.noise_variances.is_empty() {
            return Err(Error::InvalidConfig(
                "noise variances cannot be given for a standardized model".into(),
            ));
        }
    } else {
        for (name, v) in &spec.noise_variances {
            let id = graph.node_id(name)?;
            if !v.is_finite() || *v < 0.0 {
                return Err(Error::NonpositiveVariance(format!(
                    "noise variance of {name} must be finite and >= 0, got {v}"
                )));
            }
            noise[id] = *v;
        }
    }

    LinearSCM::assemble(graph, coefficients, noise, spec.standardized)
}

impl LinearSCM {
    fn assemble(
        graph: CausalGraph,
        coefficients: Vec<f64>,
        mut noise_variances: Vec<f64>,
        standardized: bool,
    ) -> Result<Self> {
        let covariance =
            implied_covariance_inner(&graph, &coefficients, &mut noise_variances, standardized)?;
        Ok(LinearSCM {
            graph,
            coefficients,
            noise_variances,
            standardized,
            covariance,
        })
    }

    pub fn graph(&self) -> &CausalGraph {
        &self.graph
    }

    pub fn standardized(&self) -> bool {
        self.standardized
    }

    /// Structural coefficient on parent->child; 0 when the edge is absent.
    pub fn coefficient(&self, parent: &str, child: &str) -> Result<f64> {
        let p = self.graph.node_id(parent)?;
        let c = self.graph.node_id(child)?;
        Ok(self
            .graph
            .edge_index(p, c)
            .map_or(0.0, |ix| self.coefficients[ix]))
    }

    /// Per-node disturbance variances, indexed like the graph's nodes.
    pub fn noise_variances(&self) -> &[f64] {
        &self.noise_variances
    }

    pub fn noise_variance(&self, node: &str) -> Result<f64> {
        Ok(self.noise_variances[self.graph.node_id(node)?])
    }

    /// Coefficients indexed like `graph().edges()`.
    pub fn coefficients(&self) -> &[f64] {
        &self.coefficients
    }

    /// The model-implied covariance matrix over all nodes, latent included,
    /// in node-declaration order. Equals the path-tracing result.
    pub fn implied_covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Covariance of two named variables under the model.
    pub fn covariance_of(&self, a: &str, b: &str) -> Result<f64> {
        let i = self.graph.node_id(a)?;
        let j = self.graph.node_id(b)?;
        Ok(self.covariance[(i, j)])
    }

    /// Sum over directed treatment->outcome paths of coefficient products;
    /// the incremental effect of an intervention on the treatment. Depends
    /// only on directed-path coefficients, never on disturbance variances.
    pub fn total_effect(&self, treatment: &str, outcome: &str) -> Result<f64> {
        let t = self.graph.node_id(treatment)?;
        let o = self.graph.node_id(outcome)?;
        let mut effect = vec![0.0f64; self.graph.len()];
        effect[t] = 1.0;
        for &v in self.graph.topological_order() {
            if effect[v] == 0.0 {
                continue;
            }
            for &c in self.graph.children_of(v) {
                let ix = self.graph.edge_index(v, c).expect("edge exists");
                effect[c] += effect[v] * self.coefficients[ix];
            }
        }
        Ok(if t == o { 1.0 } else { effect[o] })
    }

    /// Coefficient of `regressor` in the least-squares projection of
    /// `outcome` on {regressor} ∪ conditioning, computed from the implied
    /// covariance matrix. With Gaussian disturbances this is exactly
    /// ∂/∂r E(outcome | regressor, conditioning).
    pub fn partial_regression_slope(
        &self,
        outcome: &str,
        regressor: &str,
        conditioning: &[&str],
    ) -> Result<f64> {
        let y = self.graph.node_id(outcome)?;
        let r = self.graph.node_id(regressor)?;
        let mut design = vec![r];
        for c in conditioning {
            let id = self.graph.node_id(c)?;
            if id == y || id == r {
                return Err(Error::InvalidQuery(format!(
                    "conditioning set may not contain {} ",
                    self.graph.name(id)
                )));
            }
            if design.contains(&id) {
                return Err(Error::InvalidQuery(format!(
                    "duplicate conditioning node {}",
                    self.graph.name(id)
                )));
            }
            design.push(id);
        }

        let k = design.len();
        let mut s = DMatrix::zeros(k, k);
        let mut v = DVector::zeros(k);
        for (a, &ia) in design.iter().enumerate() {
            v[a] = self.covariance[(ia, y)];
            for (b, &ib) in design.iter().enumerate() {
                s[(a, b)] = self.covariance[(ia, ib)];
            }
        }
        let beta = solve_guarded(&s, &v, "conditioning set is collinear")?;
        Ok(beta[0])
    }
}

/// Solve `S x = v` for a symmetric PSD `S`, failing with `SingularDesign`
/// when the condition number exceeds [`CONDITION_LIMIT`].
pub(crate) fn solve_guarded(
    s: &DMatrix<f64>,
    v: &DVector<f64>,
    context: &str,
) -> Result<DVector<f64>> {
    let svd = s.clone().svd(true, true);
    let max_sv = svd.singular_values.max();
    let min_sv = svd.singular_values.min();
    if !(min_sv > 0.0) || max_sv / min_sv > CONDITION_LIMIT {
        return Err(Error::SingularDesign(format!(
            "{context} (condition number {:.3e})",
            if min_sv > 0.0 {
                max_sv / min_sv
            } else {
                f64::INFINITY
            }
        )));
    }
    svd.solve(v, 0.0)
        .map_err(|e| Error::SingularDesign(e.to_string()))
}

/// Forward-substitution evaluation of Sigma = (I-B)^-1 Psi (I-B)^-T in
/// topological order. When `standardized`, residual variances are derived
/// on the fly (Psi_i = 1 - Var(parent combination)) and checked for
/// feasibility.
fn implied_covariance_inner(
    graph: &CausalGraph,
    coefficients: &[f64],
    noise_variances: &mut [f64],
    standardized: bool,
) -> Result<DMatrix<f64>> {
    let n = graph.len();
    let mut sigma = DMatrix::zeros(n, n);
    let mut seen: Vec<usize> = Vec::with_capacity(n);

    for &i in graph.topological_order() {
        let pa: Vec<(usize, f64)> = graph
            .parents_of(i)
            .iter()
            .map(|&p| {
                let ix = graph.edge_index(p, i).expect("edge exists");
                (p, coefficients[ix])
            })
            .collect();

        // Cross-covariances with everything already placed.
        for &j in &seen {
            let mut s = 0.0;
            for &(p, c) in &pa {
                s += c * sigma[(p, j)];
            }
            sigma[(i, j)] = s;
            sigma[(j, i)] = s;
        }

        // Variance of the linear parent combination.
        let mut parent_var = 0.0;
        for &(p, cp) in &pa {
            for &(q, cq) in &pa {
                parent_var += cp * cq * sigma[(p, q)];
            }
        }

        if standardized {
            let residual = 1.0 - parent_var;
            if residual < -FEASIBILITY_TOL {
                return Err(Error::InfeasibleStandardization {
                    node: graph.name(i).to_owned(),
                    parent_variance: parent_var,
                    deficit: parent_var - 1.0,
                });
            }
            noise_variances[i] = residual.max(0.0);
        }
        sigma[(i, i)] = parent_var + noise_variances[i];
        seen.push(i);
    }

    Ok(sigma)
}

/// A partial assignment of values to nodes, used when evaluating
/// conditional quantities at a point (for example x, z, or s values).
#[derive(Debug, Clone, Default)]
pub struct EvaluationPoint {
    assignments: Vec<(String, f64)>,
}

impl EvaluationPoint {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, node: impl Into<String>, value: f64) -> Self {
        self.assignments.push((node.into(), value));
        self
    }

    /// Parse `"X=1,Z=0.5"`.
    pub fn parse(s: &str) -> Result<Self> {
        let mut point = EvaluationPoint::new();
        for part in s.split(',').filter(|p| !p.trim().is_empty()) {
            let (name, value) = part
                .split_once('=')
                .ok_or_else(|| Error::InvalidQuery(format!("expected NAME=VALUE, got {part:?}")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::InvalidQuery(format!("bad numeric value in {part:?}")))?;
            point = point.with(name.trim(), value);
        }
        Ok(point)
    }

    pub fn get(&self, node: &str) -> Option<f64> {
        self.assignments
            .iter()
            .find(|(n, _)| n == node)
            .map(|&(_, v)| v)
    }

    pub fn assignments(&self) -> &[(String, f64)] {
        &self.assignments
    }

    /// Check that every assigned node exists in the graph.
    pub fn validate(&self, graph: &CausalGraph) -> Result<()> {
        for (name, _) in &self.assignments {
            graph.node_id(name)?;
        }
        Ok(())
    }
}
