//! Data-facing diagnostics: the instrument-sensitivity test for residual
//! confounding and the covariate screen.
//!
//! The sensitivity test compares the treatment slope with and without the
//! declared instrument in the regression. A change beyond `k` bootstrap
//! standard errors of the difference is evidence of confounding; no change
//! is compatible with a clean study or with pure selection bias, which an
//! instrument cannot move. Instrumenthood itself is an assumption supplied
//! by the caller on theoretical grounds — nothing here verifies it from
//! data, and the verdict ships with the caveats that make that explicit.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::dataset::Dataset;
use crate::error::{Error, Result};
use crate::mc::{ols, sample_variance};

/// Tunables for [`iv_sensitivity_test`] and [`covariate_screen`]. The
/// thresholds are configuration, not constants.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityConfig {
    /// Flag confounding when |delta| > k * delta_se.
    pub k: f64,
    /// Bootstrap resamples for the standard error of the slope change.
    pub resamples: usize,
    /// Master seed for the bootstrap.
    pub seed: u64,
    /// |t| below this counts as a statistically negligible association in
    /// the covariate screen.
    pub negligible_t: f64,
}

impl Default for SensitivityConfig {
    fn default() -> Self {
        SensitivityConfig {
            k: 4.0,
            resamples: 1000,
            seed: 0,
            negligible_t: 2.0,
        }
    }
}

impl SensitivityConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_k(mut self, k: f64) -> Self {
        self.k = k;
        self
    }

    pub fn with_resamples(mut self, resamples: usize) -> Self {
        self.resamples = resamples;
        self
    }
}

/// Outcome of the instrument-sensitivity test.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    ConfoundingSuspected,
    NoEvidenceOfConfounding,
}

/// Full result of [`iv_sensitivity_test`], JSON-serializable.
#[derive(Debug, Clone, Serialize)]
pub struct SensitivityVerdict {
    pub slope_without_iv: f64,
    pub slope_with_iv: f64,
    /// slope_with_iv - slope_without_iv.
    pub delta: f64,
    /// Bootstrap standard error of `delta` (paired row resampling).
    pub delta_se: f64,
    pub verdict: Verdict,
    pub caveats: Vec<String>,
}

const CAVEATS: [&str; 3] = [
    "If the outcome depends on the treatment nonlinearly, conditioning on the \
     instrument can manufacture bias of its own, so a detected change is not \
     always pre-existing confounding.",
    "Fine-tuned cancellations can leave the association unchanged despite real \
     confounding; an unchanged slope is evidence, not proof, of a clean study.",
    "The verdict assumes the declared instrument is valid on theoretical \
     grounds; nothing in the data certifies instrumenthood.",
];

/// Compare the treatment coefficient of `y ~ x + extra` against
/// `y ~ x + z + extra`. The standard error of the change comes from a
/// seeded nonparametric bootstrap that refits both regressions on each
/// row resample.
pub fn iv_sensitivity_test(
    data: &Dataset,
    x: &str,
    y: &str,
    z: &str,
    extra_conditioning: &[&str],
    config: &SensitivityConfig,
) -> Result<SensitivityVerdict> {
    let n = data.n_rows();
    if n < 30 {
        return Err(Error::InsufficientData { got: n, need: 30 });
    }
    if config.resamples < 2 {
        return Err(Error::InvalidConfig(
            "need at least 2 bootstrap resamples".into(),
        ));
    }

    let mut without: Vec<&str> = vec![x];
    without.extend_from_slice(extra_conditioning);
    let mut with: Vec<&str> = vec![x, z];
    with.extend_from_slice(extra_conditioning);

    let slope_without_iv = ols(data, y, &without)?.coefficient(x)?;
    let slope_with_iv = ols(data, y, &with)?.coefficient(x)?;
    let delta = slope_with_iv - slope_without_iv;

    // Paired bootstrap: the same row resample feeds both regressions, so
    // the dependence between the two slopes is carried into delta_se.
    // Each resample draws from its own counter-indexed stream. One
    // cross-moment accumulation per resample serves both fits (the
    // no-instrument design is a submatrix of the full one).
    let mut column_refs: Vec<&[f64]> = vec![data.column(x)?, data.column(z)?];
    for e in extra_conditioning {
        column_refs.push(data.column(e)?);
    }
    column_refs.push(data.column(y)?);
    let k = column_refs.len();
    // Row-major copy so each resampled row is one contiguous read.
    let mut rows = vec![0.0f64; n * k];
    for (c, col) in column_refs.iter().enumerate() {
        for (r, &v) in col.iter().enumerate() {
            rows[r * k + c] = v;
        }
    }
    let full_design: Vec<usize> = (0..k - 1).collect();
    let reduced_design: Vec<usize> = std::iter::once(0).chain(2..k - 1).collect();

    let deltas: Vec<f64> = (0..config.resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
            rng.set_stream(b as u64);
            let moments = ResampledMoments::accumulate(&rows, k, n, &mut rng);
            let sv = moments.slope_of_first(&full_design)?;
            let sw = moments.slope_of_first(&reduced_design)?;
            Ok(sv - sw)
        })
        .collect::<Result<_>>()?;
    let delta_se = sample_variance(&deltas).sqrt();

    let verdict = if delta.abs() > config.k * delta_se {
        Verdict::ConfoundingSuspected
    } else {
        Verdict::NoEvidenceOfConfounding
    };

    Ok(SensitivityVerdict {
        slope_without_iv,
        slope_with_iv,
        delta,
        delta_se,
        verdict,
        caveats: CAVEATS.iter().map(|s| (*s).to_owned()).collect(),
    })
}

/// Uncentered cross-moments of a bootstrap row resample. The last column
/// is the response; any subset of the others forms a design.
struct ResampledMoments {
    /// sums[i][j] = sum over resampled rows of col_i * col_j.
    sums: nalgebra::DMatrix<f64>,
    /// Per-column sums.
    totals: nalgebra::DVector<f64>,
    n: f64,
}

impl ResampledMoments {
    /// `rows` is an n-by-k row-major matrix; draws n rows with
    /// replacement.
    fn accumulate<R: Rng>(rows: &[f64], k: usize, n: usize, rng: &mut R) -> Self {
        let mut sums = nalgebra::DMatrix::zeros(k, k);
        let mut totals = nalgebra::DVector::zeros(k);
        for _ in 0..n {
            let row = rng.random_range(0..n);
            let v = &rows[row * k..(row + 1) * k];
            for a in 0..k {
                totals[a] += v[a];
                for b in a..k {
                    sums[(a, b)] += v[a] * v[b];
                }
            }
        }
        for a in 0..k {
            for b in 0..a {
                sums[(a, b)] = sums[(b, a)];
            }
        }
        ResampledMoments {
            sums,
            totals,
            n: n as f64,
        }
    }

    /// Slope of the first design column in the regression of the response
    /// (last column) on the design columns, with intercept.
    fn slope_of_first(&self, design: &[usize]) -> Result<f64> {
        let y = self.sums.nrows() - 1;
        let k = design.len();
        let mut sxx = nalgebra::DMatrix::zeros(k, k);
        let mut sxy = nalgebra::DVector::zeros(k);
        for (i, &a) in design.iter().enumerate() {
            sxy[i] = self.sums[(a, y)] - self.totals[a] * self.totals[y] / self.n;
            for (j, &b) in design.iter().enumerate() {
                sxx[(i, j)] = self.sums[(a, b)] - self.totals[a] * self.totals[b] / self.n;
            }
        }
        let beta = sxx
            .lu()
            .solve(&sxy)
            .ok_or_else(|| Error::SingularDesign("bootstrap resample is degenerate".into()))?;
        Ok(beta[0])
    }
}

/// Screening advice for one candidate covariate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Advice {
    /// Materially associated with the outcome given the treatment: a
    /// useful bias reducer.
    Retain,
    /// Strong treatment predictor with negligible outcome association:
    /// the dangerous profile, likely to amplify residual bias.
    Discard,
    /// Neither association is clear.
    Indeterminate,
}

/// Associations and advice for one candidate.
#[derive(Debug, Clone, Serialize)]
pub struct CovariateAdvice {
    pub covariate: String,
    /// Marginal correlation with the treatment.
    pub treatment_association: f64,
    /// Partial correlation with the outcome given the treatment and the
    /// other candidates.
    pub outcome_association: f64,
    pub treatment_t: f64,
    pub outcome_t: f64,
    pub advice: Advice,
}

/// Rank candidates by their importance to the outcome rather than the
/// treatment. `Discard` is only ever advised when the outcome association
/// is statistically negligible, the treatment association is not, and the
/// outcome association does not exceed the treatment association in
/// standardized magnitude.
pub fn covariate_screen(
    data: &Dataset,
    x: &str,
    y: &str,
    candidates: &[&str],
    config: &SensitivityConfig,
) -> Result<Vec<CovariateAdvice>> {
    let n = data.n_rows();
    if n < 30 {
        return Err(Error::InsufficientData { got: n, need: 30 });
    }
    data.column(x)?;
    data.column(y)?;

    let mut out = Vec::with_capacity(candidates.len());
    for (ix, &w) in candidates.iter().enumerate() {
        let treatment_association = correlation(data.column(w)?, data.column(x)?);
        let t_df = (n - 2) as f64;
        let treatment_t = t_stat(treatment_association, t_df);

        // Outcome importance is judged inside the joint outcome model:
        // y ~ x + all candidates.
        let mut given: Vec<&str> = vec![x];
        given.extend(
            candidates
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != ix)
                .map(|(_, &c)| c),
        );
        let outcome_association = partial_correlation(data, w, y, &given)?;
        let o_df = (n - 2 - given.len()) as f64;
        let outcome_t = t_stat(outcome_association, o_df);

        let outcome_negligible = outcome_t.abs() < config.negligible_t;
        let treatment_strong = treatment_t.abs() >= config.negligible_t;
        let advice = if !outcome_negligible {
            Advice::Retain
        } else if treatment_strong && outcome_association.abs() <= treatment_association.abs() {
            Advice::Discard
        } else {
            Advice::Indeterminate
        };

        out.push(CovariateAdvice {
            covariate: w.to_owned(),
            treatment_association,
            outcome_association,
            treatment_t,
            outcome_t,
            advice,
        });
    }
    Ok(out)
}

fn t_stat(r: f64, df: f64) -> f64 {
    if r.abs() >= 1.0 {
        return f64::INFINITY.copysign(r);
    }
    r * (df / (1.0 - r * r)).sqrt()
}

fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut caa = 0.0;
    let mut cbb = 0.0;
    let mut cab = 0.0;
    for (x, y) in a.iter().zip(b) {
        let dx = x - ma;
        let dy = y - mb;
        caa += dx * dx;
        cbb += dy * dy;
        cab += dx * dy;
    }
    cab / (caa * cbb).sqrt()
}

/// Partial correlation of (a, b) given `given`, from the inverse of the
/// sample covariance matrix over {a, b} ∪ given.
fn partial_correlation(data: &Dataset, a: &str, b: &str, given: &[&str]) -> Result<f64> {
    use nalgebra::DMatrix;

    let mut names: Vec<&str> = vec![a, b];
    names.extend_from_slice(given);
    let cols: Vec<&[f64]> = names
        .iter()
        .map(|n| data.column(n))
        .collect::<Result<_>>()?;
    let n = data.n_rows() as f64;
    let k = cols.len();
    let means: Vec<f64> = cols.iter().map(|c| c.iter().sum::<f64>() / n).collect();

    let mut cov = DMatrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let s: f64 = cols[i]
                .iter()
                .zip(cols[j])
                .map(|(a, b)| (a - means[i]) * (b - means[j]))
                .sum();
            cov[(i, j)] = s / (n - 1.0);
            cov[(j, i)] = cov[(i, j)];
        }
    }
    let precision = cov
        .try_inverse()
        .ok_or_else(|| Error::SingularDesign("covariance matrix is singular".into()))?;
    Ok(-precision[(0, 1)] / (precision[(0, 0)] * precision[(1, 1)]).sqrt())
}
