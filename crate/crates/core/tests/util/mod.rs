//! Shared test oracles, deliberately independent of the library's own
//! implementation paths: covariance by exhaustive directed-path
//! enumeration (usable on graphs up to ~8 nodes), d-separation by
//! exhaustive undirected-path enumeration, and partial correlations taken
//! straight from a covariance matrix.

#![allow(dead_code)]

use biaslab::graph::CausalGraph;
use biaslab::scm::LinearSCM;
use nalgebra::DMatrix;
use std::path::PathBuf;

/// Covariance by path tracing: T[i][k] sums coefficient products over all
/// directed paths k -> i (T[k][k] = 1), then Sigma = T Psi T^T.
pub fn wright_covariance(model: &LinearSCM) -> DMatrix<f64> {
    let graph = model.graph();
    let n = graph.len();
    let mut t = DMatrix::zeros(n, n);
    for k in 0..n {
        let mut acc = vec![0.0f64; n];
        directed_paths(graph, model, k, 1.0, &mut acc);
        for i in 0..n {
            t[(i, k)] = acc[i];
        }
    }
    let psi = DMatrix::from_diagonal(&nalgebra::DVector::from_row_slice(model.noise_variances()));
    &t * psi * t.transpose()
}

fn directed_paths(graph: &CausalGraph, model: &LinearSCM, at: usize, weight: f64, acc: &mut [f64]) {
    acc[at] += weight;
    for &c in graph.children_of(at) {
        let ix = graph.edge_index(at, c).unwrap();
        directed_paths(graph, model, c, weight * model.coefficients()[ix], acc);
    }
}

/// Brute-force d-separation: enumerate every simple undirected path and
/// apply the blocking rules directly.
pub fn path_dsep(graph: &CausalGraph, a: usize, b: usize, cond: &[bool]) -> bool {
    let cond_nodes: Vec<usize> = (0..graph.len()).filter(|&v| cond[v]).collect();
    let anc_of_cond = graph.ancestral_mask(&cond_nodes);
    let mut on_path = vec![false; graph.len()];
    on_path[a] = true;
    !any_open_path(graph, a, b, cond, &anc_of_cond, &mut on_path, None)
}

fn any_open_path(
    graph: &CausalGraph,
    at: usize,
    target: usize,
    cond: &[bool],
    anc_of_cond: &[bool],
    on_path: &mut [bool],
    arrived_forward: Option<bool>,
) -> bool {
    if at == target {
        return true;
    }
    let neighbors: Vec<(usize, bool)> = graph
        .children_of(at)
        .iter()
        .map(|&c| (c, true))
        .chain(graph.parents_of(at).iter().map(|&p| (p, false)))
        .collect();
    for (w, forward) in neighbors {
        if on_path[w] {
            continue;
        }
        if let Some(prev_forward) = arrived_forward {
            let collider = prev_forward && !forward;
            let open = if collider { anc_of_cond[at] } else { !cond[at] };
            if !open {
                continue;
            }
        }
        on_path[w] = true;
        if any_open_path(graph, w, target, cond, anc_of_cond, on_path, Some(forward)) {
            on_path[w] = false;
            return true;
        }
        on_path[w] = false;
    }
    false
}

/// Partial correlation of (a, b) given `given`, from a covariance matrix.
pub fn partial_correlation(sigma: &DMatrix<f64>, a: usize, b: usize, given: &[usize]) -> f64 {
    let mut ids = vec![a, b];
    ids.extend_from_slice(given);
    let k = ids.len();
    let mut sub = DMatrix::zeros(k, k);
    for (i, &vi) in ids.iter().enumerate() {
        for (j, &vj) in ids.iter().enumerate() {
            sub[(i, j)] = sigma[(vi, vj)];
        }
    }
    let omega = sub.try_inverse().expect("covariance submatrix invertible");
    -omega[(0, 1)] / (omega[(0, 0)] * omega[(1, 1)]).sqrt()
}

/// Path to a shipped model fixture.
pub fn model_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../models")
        .join(name)
}

pub fn load_fixture(name: &str) -> LinearSCM {
    biaslab::model_file::load_model(&model_path(name)).expect("fixture parses")
}

/// Standard normal density.
pub fn normal_pdf(x: f64) -> f64 {
    (-(x * x) / 2.0).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// Standard normal CDF via an erf rational approximation (absolute error
/// below 1.5e-7, far inside every tolerance used here).
pub fn normal_cdf(x: f64) -> f64 {
    let t = 1.0 / (1.0 + 0.3275911 * x.abs() / std::f64::consts::SQRT_2);
    let poly = t
        * (0.254829592
            + t * (-0.284496736 + t * (1.421413741 + t * (-1.453152027 + t * 1.061405429))));
    let erf = 1.0 - poly * (-(x * x) / 2.0).exp();
    if x >= 0.0 {
        0.5 * (1.0 + erf)
    } else {
        0.5 * (1.0 - erf)
    }
}

/// Variance of a unit-variance Gaussian truncated to [-h, h].
pub fn truncated_variance(h: f64) -> f64 {
    if !h.is_finite() {
        return 1.0;
    }
    let mass = 2.0 * normal_cdf(h) - 1.0;
    1.0 - 2.0 * h * normal_pdf(h) / mass
}

/// Exact regression slope of `y` on (`x`, extra) within the band
/// |S| <= h, for a jointly Gaussian model. Conditioning on the event
/// shrinks the S-direction variance to `truncated_variance(h)` and leaves
/// the orthogonal components untouched:
/// Cov(A, B | event) = Cov(A, B) - Cov(A, S) Cov(B, S) (1 - v(h)) / Var(S).
pub fn band_conditioned_slope(
    model: &LinearSCM,
    y: &str,
    x: &str,
    s: &str,
    h: f64,
    extra: &[&str],
) -> f64 {
    let graph = model.graph();
    let sigma = model.implied_covariance();
    let si = graph.node_id(s).unwrap();
    let shrink = (1.0 - truncated_variance(h)) / sigma[(si, si)];

    let banded =
        |a: usize, b: usize| -> f64 { sigma[(a, b)] - sigma[(a, si)] * sigma[(b, si)] * shrink };

    let yi = graph.node_id(y).unwrap();
    let mut design = vec![graph.node_id(x).unwrap()];
    design.extend(extra.iter().map(|e| graph.node_id(e).unwrap()));
    let k = design.len();
    let mut s_mat = DMatrix::zeros(k, k);
    let mut v = nalgebra::DVector::zeros(k);
    for (i, &a) in design.iter().enumerate() {
        v[i] = banded(a, yi);
        for (j, &b) in design.iter().enumerate() {
            s_mat[(i, j)] = banded(a, b);
        }
    }
    let beta = s_mat
        .lu()
        .solve(&v)
        .expect("banded design matrix invertible");
    beta[0]
}

/// Sample mean.
pub fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Sample correlation.
pub fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let ma = mean(a);
    let mb = mean(b);
    let mut caa = 0.0;
    let mut cbb = 0.0;
    let mut cab = 0.0;
    for (x, y) in a.iter().zip(b) {
        caa += (x - ma) * (x - ma);
        cbb += (y - mb) * (y - mb);
        cab += (x - ma) * (y - mb);
    }
    cab / (caa * cbb).sqrt()
}
