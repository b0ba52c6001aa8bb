//! Seeded Monte Carlo oracle.
//!
//! Samples datasets from linear or nonlinear structural models, runs
//! least-squares regressions, and emulates selection by band-conditioning,
//! so that every closed form in [`crate::analytic`] can be checked against
//! an independent empirical estimate.
//!
//! Reproducibility contract: a dataset is a pure function of
//! (model, seed, replication index). Replication streams come from a
//! counter-based construction — one ChaCha stream per replication index
//! under the master seed — so replications can run concurrently and in any
//! order without changing the numbers. Experiment reports aggregate in
//! replication-index order.

use indexmap::IndexMap;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{FunctionSpec, NonlinearOutcomeModel, RECIPROCAL_GUARD};
use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::scm::{solve_guarded, LinearSCM};

/// Simulation settings shared by samplers and experiments.
#[derive(Debug, Clone, Serialize)]
pub struct SimConfig {
    /// Rows per replication.
    pub n: usize,
    /// Master seed; replication r uses stream r under this seed.
    pub seed: u64,
    /// Independent replications.
    pub replications: usize,
    /// Default half-width used when an experiment band-conditions.
    pub selection_band: f64,
}

impl SimConfig {
    pub fn new(n: usize, seed: u64) -> Self {
        SimConfig {
            n,
            seed,
            replications: 1,
            selection_band: 0.05,
        }
    }

    pub fn with_replications(mut self, replications: usize) -> Self {
        self.replications = replications;
        self
    }

    pub fn with_selection_band(mut self, half_width: f64) -> Self {
        self.selection_band = half_width;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::InvalidConfig(format!(
                "n must be >= 2, got {}",
                self.n
            )));
        }
        if self.replications < 1 {
            return Err(Error::InvalidConfig("replications must be >= 1".into()));
        }
        if !(self.selection_band > 0.0) {
            return Err(Error::InvalidConfig(format!(
                "selection band half-width must be > 0, got {}",
                self.selection_band
            )));
        }
        Ok(())
    }
}

/// One ChaCha stream per (seed, replication): deterministic and
/// order-independent under parallel execution.
fn replication_rng(seed: u64, replication: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(replication as u64);
    rng
}

/// Draw one replication from a linear SCM. Rows are generated in
/// topological order with independent Gaussian disturbances; columns
/// (latent ones included) appear in node-declaration order.
pub fn sample_linear(model: &LinearSCM, config: &SimConfig, replication: usize) -> Result<Dataset> {
    config.validate()?;
    let graph = model.graph();
    let n_nodes = graph.len();
    if n_nodes == 0 {
        return Err(Error::InfeasibleModel("model has no variables".into()));
    }
    let noise_sd: Vec<f64> = model.noise_variances().iter().map(|v| v.sqrt()).collect();
    let topo = graph.topological_order().to_vec();
    let parent_coeffs: Vec<Vec<(usize, f64)>> = (0..n_nodes)
        .map(|v| {
            graph
                .parents_of(v)
                .iter()
                .map(|&p| {
                    let ix = graph.edge_index(p, v).expect("edge exists");
                    (p, model.coefficients()[ix])
                })
                .collect()
        })
        .collect();

    let mut rng = replication_rng(config.seed, replication);
    let mut columns: Vec<Vec<f64>> = vec![Vec::with_capacity(config.n); n_nodes];
    let mut row = vec![0.0f64; n_nodes];
    for _ in 0..config.n {
        for &v in &topo {
            let mut value = noise_sd[v] * rng.sample::<f64, _>(StandardNormal);
            for &(p, c) in &parent_coeffs[v] {
                value += c * row[p];
            }
            row[v] = value;
        }
        for (v, col) in columns.iter_mut().enumerate() {
            col.push(row[v]);
        }
    }

    Dataset::new(
        columns
            .into_iter()
            .enumerate()
            .map(|(v, col)| (graph.name(v).to_owned(), col))
            .collect(),
    )
}

/// Evaluate a function during sampling: arguments inside the reciprocal
/// guard are clamped to the guard boundary instead of failing, since a
/// continuous X hits the excluded point with positive probability at
/// large n. Downstream oracles restrict to |X| >= 0.5 anyway.
fn eval_sampling(f: &FunctionSpec, x: f64) -> f64 {
    let x = match f {
        FunctionSpec::Reciprocal(_) if x.abs() < RECIPROCAL_GUARD => {
            RECIPROCAL_GUARD.copysign(if x == 0.0 { 1.0 } else { x })
        }
        _ => x,
    };
    f.eval(x).expect("clamped argument is inside the domain")
}

/// Draw one replication of (Z, U, X, Y) from a nonlinear outcome model:
/// Z, U standard normal, X = c3 Z + c1 U + e', Y = f(X) + U g(X) + e''.
pub fn sample_nonlinear(
    model: &NonlinearOutcomeModel,
    config: &SimConfig,
    replication: usize,
) -> Result<Dataset> {
    config.validate()?;
    let mut rng = replication_rng(config.seed, replication);
    let sd_x = model.x_noise_variance().sqrt();
    let sd_y = model.y_noise_variance().sqrt();
    let (c3, c1) = (model.c3(), model.c1());

    let mut z_col = Vec::with_capacity(config.n);
    let mut u_col = Vec::with_capacity(config.n);
    let mut x_col = Vec::with_capacity(config.n);
    let mut y_col = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let z: f64 = rng.sample(StandardNormal);
        let u: f64 = rng.sample(StandardNormal);
        let x = c3 * z + c1 * u + sd_x * rng.sample::<f64, _>(StandardNormal);
        let y = eval_sampling(model.f(), x)
            + u * eval_sampling(model.g(), x)
            + sd_y * rng.sample::<f64, _>(StandardNormal);
        z_col.push(z);
        u_col.push(u);
        x_col.push(x);
        y_col.push(y);
    }

    Dataset::new(vec![
        ("Z".into(), z_col),
        ("U".into(), u_col),
        ("X".into(), x_col),
        ("Y".into(), y_col),
    ])
}

/// Uniform-disturbance sampler for the unit-square attenuation
/// illustration: U, Z independent Uniform(0,1), X = U + c Z.
pub fn sample_unit_square(c: f64, config: &SimConfig, replication: usize) -> Result<Dataset> {
    config.validate()?;
    let mut rng = replication_rng(config.seed, replication);
    let mut u_col = Vec::with_capacity(config.n);
    let mut z_col = Vec::with_capacity(config.n);
    let mut x_col = Vec::with_capacity(config.n);
    for _ in 0..config.n {
        let u: f64 = rng.random();
        let z: f64 = rng.random();
        u_col.push(u);
        z_col.push(z);
        x_col.push(u + c * z);
    }
    Dataset::new(vec![
        ("U".into(), u_col),
        ("Z".into(), z_col),
        ("X".into(), x_col),
    ])
}

/// Least-squares fit with intercept and classical standard errors.
#[derive(Debug, Clone, Serialize)]
pub struct RegressionResult {
    pub intercept: f64,
    pub intercept_se: f64,
    /// Slope per regressor, in the order the regressors were given.
    pub coefficients: IndexMap<String, f64>,
    pub standard_errors: IndexMap<String, f64>,
    pub n_used: usize,
    pub residual_variance: f64,
}

impl RegressionResult {
    pub fn coefficient(&self, name: &str) -> Result<f64> {
        self.coefficients
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownColumn(name.to_owned()))
    }

    pub fn standard_error(&self, name: &str) -> Result<f64> {
        self.standard_errors
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownColumn(name.to_owned()))
    }
}

/// Ordinary least squares of `response` on `regressors` (plus intercept).
/// Cross-moments are accumulated in centered form; the normal equations
/// are solved behind the same condition-number guard used for the
/// analytic conditioning algebra.
pub fn ols(data: &Dataset, response: &str, regressors: &[&str]) -> Result<RegressionResult> {
    let y = data.column(response)?;
    let cols: Vec<&[f64]> = regressors
        .iter()
        .map(|r| data.column(r))
        .collect::<Result<_>>()?;
    let n = data.n_rows();
    let k = cols.len();
    if n < k + 2 {
        return Err(Error::InsufficientData {
            got: n,
            need: k + 2,
        });
    }

    let nf = n as f64;
    let y_mean = y.iter().sum::<f64>() / nf;
    let x_means: Vec<f64> = cols.iter().map(|c| c.iter().sum::<f64>() / nf).collect();

    // Centered cross-products.
    let mut sxx = DMatrix::zeros(k, k);
    let mut sxy = DVector::zeros(k);
    let mut syy = 0.0;
    for row in 0..n {
        let dy = y[row] - y_mean;
        syy += dy * dy;
        for a in 0..k {
            let da = cols[a][row] - x_means[a];
            sxy[a] += da * dy;
            for b in a..k {
                sxx[(a, b)] += da * (cols[b][row] - x_means[b]);
            }
        }
    }
    for a in 0..k {
        for b in 0..a {
            sxx[(a, b)] = sxx[(b, a)];
        }
    }

    let (beta, inv_diag, quad) = if k > 0 {
        let beta = solve_guarded(&sxx, &sxy, "design matrix is rank deficient")?;
        let inv = sxx
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::SingularDesign("design matrix is rank deficient".into()))?;
        let xm = DVector::from_vec(x_means.clone());
        let quad = (xm.transpose() * &inv * &xm)[(0, 0)];
        (
            beta.clone(),
            (0..k).map(|j| inv[(j, j)]).collect::<Vec<_>>(),
            quad,
        )
    } else {
        (DVector::zeros(0), vec![], 0.0)
    };

    let rss = (syy - beta.dot(&sxy)).max(0.0);
    let df = (n - k - 1) as f64;
    let sigma2 = rss / df;

    let intercept = y_mean - beta.iter().zip(&x_means).map(|(b, m)| b * m).sum::<f64>();
    let intercept_se = (sigma2 * (1.0 / nf + quad)).sqrt();

    let mut coefficients = IndexMap::with_capacity(k);
    let mut standard_errors = IndexMap::with_capacity(k);
    for (j, name) in regressors.iter().enumerate() {
        coefficients.insert((*name).to_owned(), beta[j]);
        standard_errors.insert((*name).to_owned(), (sigma2 * inv_diag[j]).sqrt());
    }

    Ok(RegressionResult {
        intercept,
        intercept_se,
        coefficients,
        standard_errors,
        n_used: n,
        residual_variance: sigma2,
    })
}

/// Keep rows with |s - center| <= half_width; all columns are retained.
pub fn select_band(data: &Dataset, s: &str, center: f64, half_width: f64) -> Result<Dataset> {
    if !(half_width > 0.0) {
        return Err(Error::InvalidConfig(format!(
            "band half-width must be > 0, got {half_width}"
        )));
    }
    let col = data.column(s)?;
    let mask: Vec<bool> = col
        .iter()
        .map(|&v| (v - center).abs() <= half_width)
        .collect();
    if !mask.iter().any(|&m| m) {
        return Err(Error::EmptySelection {
            column: s.to_owned(),
            center,
            half_width,
        });
    }
    Ok(data.filter_rows(&mask))
}

/// Band-conditioning request for an experiment; the half-width comes from
/// [`SimConfig::selection_band`].
#[derive(Debug, Clone, Serialize)]
pub struct BandRequest {
    pub node: String,
    pub center: f64,
}

/// One conditioning set's empirical-vs-analytic comparison.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentArm {
    pub conditioning: Vec<String>,
    /// Mean treatment slope across replications.
    pub empirical: f64,
    /// Monte Carlo standard error of the mean slope.
    pub std_error: f64,
    /// Gaussian-algebra counterpart from the implied covariance matrix.
    pub analytic: f64,
    pub z_score: f64,
    /// max(4 * SE, 0.02); an arm passes when |empirical - analytic| stays
    /// within it.
    pub tolerance: f64,
    pub pass: bool,
    /// Rows entering each regression (after any band selection), averaged
    /// over replications.
    pub mean_rows: f64,
}

/// Full report of a slope-comparison experiment.
#[derive(Debug, Clone, Serialize)]
pub struct ExperimentReport {
    pub treatment: String,
    pub outcome: String,
    pub config: SimConfig,
    pub band: Option<BandRequest>,
    pub band_half_width: Option<f64>,
    pub arms: Vec<ExperimentArm>,
}

/// Tolerance rule stated in every report: four standard errors or an
/// absolute 0.02, whichever is larger.
pub fn default_tolerance(std_error: f64) -> f64 {
    (4.0 * std_error).max(0.02)
}

/// For each conditioning set, regress the outcome on the treatment plus
/// that set over `config.replications` replications (optionally after
/// band-selecting rows) and compare the mean slope against the
/// Gaussian-algebra value from the model's implied covariance matrix.
/// Under banding, the analytic counterpart conditions on the band node
/// exactly (its vanishing-bandwidth limit).
pub fn bias_experiment(
    model: &LinearSCM,
    treatment: &str,
    outcome: &str,
    conditioning_sets: &[Vec<String>],
    band: Option<BandRequest>,
    config: &SimConfig,
) -> Result<ExperimentReport> {
    config.validate()?;
    model.graph().node_id(treatment)?;
    model.graph().node_id(outcome)?;
    for set in conditioning_sets {
        for node in set {
            model.graph().node_id(node)?;
        }
    }
    if let Some(b) = &band {
        model.graph().node_id(&b.node)?;
    }

    // slopes[arm][replication], rows[arm][replication]
    let per_rep: Vec<Result<Vec<(f64, f64, f64)>>> = (0..config.replications)
        .into_par_iter()
        .map(|rep| {
            let mut data = sample_linear(model, config, rep)?;
            if let Some(b) = &band {
                data = select_band(&data, &b.node, b.center, config.selection_band)?;
            }
            conditioning_sets
                .iter()
                .map(|set| {
                    let mut regressors: Vec<&str> = vec![treatment];
                    regressors.extend(set.iter().map(|s| s.as_str()));
                    let fit = ols(&data, outcome, &regressors)?;
                    Ok((
                        fit.coefficient(treatment)?,
                        fit.standard_error(treatment)?,
                        fit.n_used as f64,
                    ))
                })
                .collect()
        })
        .collect();
    let per_rep: Vec<Vec<(f64, f64, f64)>> = per_rep.into_iter().collect::<Result<_>>()?;

    let mut arms = Vec::with_capacity(conditioning_sets.len());
    for (arm_ix, set) in conditioning_sets.iter().enumerate() {
        let slopes: Vec<f64> = per_rep.iter().map(|r| r[arm_ix].0).collect();
        let empirical = mean(&slopes);
        let std_error = if slopes.len() > 1 {
            (sample_variance(&slopes) / slopes.len() as f64).sqrt()
        } else {
            per_rep[0][arm_ix].1
        };

        let mut analytic_conditioning: Vec<&str> = set.iter().map(|s| s.as_str()).collect();
        if let Some(b) = &band {
            if !analytic_conditioning.contains(&b.node.as_str()) {
                analytic_conditioning.push(&b.node);
            }
        }
        let analytic =
            model.partial_regression_slope(outcome, treatment, &analytic_conditioning)?;

        let tolerance = default_tolerance(std_error);
        let delta = empirical - analytic;
        arms.push(ExperimentArm {
            conditioning: set.clone(),
            empirical,
            std_error,
            analytic,
            z_score: if std_error > 0.0 {
                delta / std_error
            } else {
                0.0
            },
            tolerance,
            pass: delta.abs() <= tolerance,
            mean_rows: mean(&per_rep.iter().map(|r| r[arm_ix].2).collect::<Vec<_>>()),
        });
    }

    Ok(ExperimentReport {
        treatment: treatment.to_owned(),
        outcome: outcome.to_owned(),
        config: config.clone(),
        band_half_width: band.as_ref().map(|_| config.selection_band),
        band,
        arms,
    })
}

/// Local bin mean: average of `y` over rows with `x` within
/// `bin_width / 2` of `at`, optionally restricted to a z-band and to
/// |x| >= min_abs_x.
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BinnedMean {
    pub mean: f64,
    pub std_error: f64,
    pub n: usize,
}

/// Restriction applied before binning.
#[derive(Debug, Clone, Copy)]
pub struct BinFilter<'a> {
    /// Keep rows with |column - center| <= half_width.
    pub z_band: Option<(&'a str, f64, f64)>,
    /// Keep rows with |x| >= this (0 disables).
    pub min_abs_x: f64,
}

impl Default for BinFilter<'_> {
    fn default() -> Self {
        BinFilter {
            z_band: None,
            min_abs_x: 0.0,
        }
    }
}

pub fn binned_mean(
    data: &Dataset,
    x: &str,
    y: &str,
    at: f64,
    bin_width: f64,
    filter: BinFilter<'_>,
) -> Result<BinnedMean> {
    let xs = data.column(x)?;
    let ys = data.column(y)?;
    let zs = match filter.z_band {
        Some((name, _, _)) => Some(data.column(name)?),
        None => None,
    };
    let half = bin_width / 2.0;

    let mut n = 0usize;
    let mut sum = 0.0;
    let mut sumsq = 0.0;
    for i in 0..xs.len() {
        if (xs[i] - at).abs() > half || xs[i].abs() < filter.min_abs_x {
            continue;
        }
        if let (Some(z), Some((_, center, hw))) = (zs, filter.z_band) {
            if (z[i] - center).abs() > hw {
                continue;
            }
        }
        n += 1;
        sum += ys[i];
        sumsq += ys[i] * ys[i];
    }
    if n < 2 {
        return Err(Error::InsufficientData { got: n, need: 2 });
    }
    let mean = sum / n as f64;
    let var = (sumsq - sum * sum / n as f64).max(0.0) / (n as f64 - 1.0);
    Ok(BinnedMean {
        mean,
        std_error: (var / n as f64).sqrt(),
        n,
    })
}

/// Central finite difference of binned conditional means:
/// (mean(at + spacing) - mean(at - spacing)) / (2 spacing).
#[derive(Debug, Clone, Copy, Serialize)]
pub struct BinnedSlope {
    pub estimate: f64,
    pub std_error: f64,
    pub n_low: usize,
    pub n_high: usize,
}

pub fn binned_slope(
    data: &Dataset,
    x: &str,
    y: &str,
    at: f64,
    spacing: f64,
    bin_width: f64,
    filter: BinFilter<'_>,
) -> Result<BinnedSlope> {
    if !(spacing > 0.0) {
        return Err(Error::InvalidConfig("spacing must be > 0".into()));
    }
    let lo = binned_mean(data, x, y, at - spacing, bin_width, filter)?;
    let hi = binned_mean(data, x, y, at + spacing, bin_width, filter)?;
    let estimate = (hi.mean - lo.mean) / (2.0 * spacing);
    let std_error =
        (hi.std_error * hi.std_error + lo.std_error * lo.std_error).sqrt() / (2.0 * spacing);
    Ok(BinnedSlope {
        estimate,
        std_error,
        n_low: lo.n,
        n_high: hi.n,
    })
}

pub(crate) fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

pub(crate) fn sample_variance(values: &[f64]) -> f64 {
    let m = mean(values);
    values.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / (values.len() as f64 - 1.0)
}
