//! Closed-form bias calculators.
//!
//! Everything in this module is straight formula evaluation: the slope of
//! the outcome on the treatment with and without the instrument in the
//! conditioning set, the two bias measures derived from those slopes, the
//! threshold at which an imperfect instrument flips from amplifier to
//! reducer, the nonlinear-outcome generalizations, the selection-bias
//! formula, and the attenuation ratio. Each closed form has an independent
//! check elsewhere: Gaussian conditional algebra in [`crate::scm`] and the
//! Monte Carlo engine in [`crate::mc`].

use serde::Serialize;

use crate::catalog;
use crate::error::{Error, Result};

/// Two bias values are considered equal within this tolerance when
/// classifying amplifier vs reducer.
const CLASSIFY_TOL: f64 = 1e-12;

/// Least-squares projection of the confounder U on (X, Z):
/// E(U|x, z) = beta * x + alpha * z.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct UProjection {
    pub beta: f64,
    pub alpha: f64,
}

/// How conditioning on the covariate changes the bias.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    /// |bz| > |b0|: conditioning increases the bias.
    Amplifier,
    /// |bz| < |b0|: conditioning decreases the bias.
    Reducer,
    /// |bz| = |b0| (in particular, both zero).
    Neutral,
    /// b0 = 0 but bz != 0: conditioning manufactures bias from nothing.
    NewBias,
}

/// The full slope/bias summary for one model (or one evaluation point of a
/// nonlinear model).
///
/// `a1` is the interventional slope, `a2` the crude regression slope, `a3`
/// the slope after conditioning; `b0 = a2 - a1` and `bz = a3 - a1` are the
/// unconditioned and conditioned biases. `amplification` is the structural
/// factor 1/(1 - c3^2) carried by the instrument channel; in the pure-IV
/// linear case `bz = b0 * amplification`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BiasReport {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub b0: f64,
    pub bz: f64,
    pub amplification: f64,
    pub classification: Classification,
}

impl BiasReport {
    /// Assemble a report from the three slopes of an arbitrary model. Here
    /// `amplification` is the realized ratio bz/b0 (1 when both biases
    /// vanish, infinite when conditioning manufactures bias from none);
    /// for the canonical instrument model it coincides with 1/(1 - c3^2).
    pub fn from_slopes(a1: f64, a2: f64, a3: f64) -> Self {
        let b0 = a2 - a1;
        let bz = a3 - a1;
        let amplification = if b0 != 0.0 {
            bz / b0
        } else if bz == 0.0 {
            1.0
        } else {
            f64::INFINITY
        };
        BiasReport {
            a1,
            a2,
            a3,
            b0,
            bz,
            amplification,
            classification: classify(b0, bz),
        }
    }
}

fn classify(b0: f64, bz: f64) -> Classification {
    if b0.abs() <= CLASSIFY_TOL && bz.abs() > CLASSIFY_TOL {
        Classification::NewBias
    } else if (bz.abs() - b0.abs()).abs() <= CLASSIFY_TOL {
        Classification::Neutral
    } else if bz.abs() > b0.abs() {
        Classification::Amplifier
    } else {
        Classification::Reducer
    }
}

fn check_instrument_strength(c3: f64) -> Result<f64> {
    if !c3.is_finite() || c3.abs() >= 1.0 {
        return Err(Error::DegenerateInstrument(c3.abs()));
    }
    Ok(1.0 - c3 * c3)
}

/// Projection coefficients of U on (X, Z) in the standardized instrument
/// model: beta = c1/(1-c3^2), alpha = -c1*c3/(1-c3^2).
pub fn u_projection(c1: f64, c3: f64) -> Result<UProjection> {
    let denom = check_instrument_strength(c3)?;
    Ok(UProjection {
        beta: c1 / denom,
        alpha: -c1 * c3 / denom,
    })
}

/// Bias pair for the pure instrument model:
/// b0 = c1*c2, bz = c1*c2/(1-c3^2). Validates that the standardized model
/// is feasible before reporting.
pub fn linear_bias_pair(c0: f64, c1: f64, c2: f64, c3: f64) -> Result<BiasReport> {
    let denom = check_instrument_strength(c3)?;
    catalog::iv_model(c0, c1, c2, c3)?;
    let b0 = c1 * c2;
    let bz = c1 * c2 / denom;
    Ok(BiasReport {
        a1: c0,
        a2: c0 + b0,
        a3: c0 + bz,
        b0,
        bz,
        amplification: 1.0 / denom,
        classification: classify(b0, bz),
    })
}

/// Bias pair when Z also has a direct effect c4 on the outcome:
/// b0 = c2*c1 + c3*c4 while bz stays c2*c1/(1-c3^2). Conditioning on Z now
/// removes the c4 channel, so Z acts as a reducer once |bz| < |b0|.
pub fn imperfect_instrument_report(
    c0: f64,
    c1: f64,
    c2: f64,
    c3: f64,
    c4: f64,
) -> Result<BiasReport> {
    let denom = check_instrument_strength(c3)?;
    catalog::imperfect_iv_model(c0, c1, c2, c3, c4)?;
    let b0 = c2 * c1 + c3 * c4;
    let bz = c2 * c1 / denom;
    Ok(BiasReport {
        a1: c0,
        a2: c0 + b0,
        a3: c0 + bz,
        b0,
        bz,
        amplification: 1.0 / denom,
        classification: classify(b0, bz),
    })
}

/// The signed threshold on c4 at which Z stops amplifying: with positive
/// coefficient products, Z is a bias reducer once
/// c4/c3 >= c2*c1/(1-c3^2), i.e. c4 >= c3*c2*c1/(1-c3^2).
///
/// The classification in [`imperfect_instrument_report`] compares |bz| and
/// |b0| instead, which also covers negative products; this function
/// reports the signed form for side-by-side comparison.
pub fn reducer_threshold(c1: f64, c2: f64, c3: f64) -> Result<f64> {
    let denom = check_instrument_strength(c3)?;
    Ok(c3 * c2 * c1 / denom)
}

/// Whether the crude and conditioned slopes have opposite (nonzero) signs,
/// i.e. conditioning on the instrument flips the sign of the association.
pub fn simpson_reversal(c0: f64, c1: f64, c2: f64, c3: f64) -> Result<bool> {
    let report = linear_bias_pair(c0, c1, c2, c3)?;
    Ok(report.a2 * report.a3 < 0.0)
}

/// Fraction of a unit change in X that is transported to the confounder
/// when the instrument is left free: Var(U) / (Var(U) + c^2 Var(Z)).
pub fn attenuation_factor(var_u: f64, c: f64, var_z: f64) -> Result<f64> {
    if !(var_u > 0.0) {
        return Err(Error::NonpositiveVariance(format!(
            "Var(U) must be > 0, got {var_u}"
        )));
    }
    if !(var_z >= 0.0) {
        return Err(Error::NonpositiveVariance(format!(
            "Var(Z) must be >= 0, got {var_z}"
        )));
    }
    Ok(var_u / (var_u + c * c * var_z))
}

/// Bias induced by conditioning on the selection node S in the model
/// X -> Y (c0), X -> S (beta1), Y -> S (beta2), standardized:
///
/// b0 = -beta2 (1 - c0^2)(beta1 + c0 beta2) / (1 - (beta1 + c0 beta2)^2)
///
/// Zero exactly when beta2 = 0, c0^2 = 1, or beta1 = -c0 beta2.
pub fn selection_bias(c0: f64, beta1: f64, beta2: f64) -> Result<f64> {
    let p = beta1 + c0 * beta2;
    if !(p * p < 1.0) {
        return Err(Error::DegenerateSelection(p * p));
    }
    catalog::selection_model(c0, beta1, beta2)?;
    Ok(-beta2 * (1.0 - c0 * c0) * p / (1.0 - p * p))
}

// ── Nonlinear outcome models ─────────────────────────────────────────────

/// Symbolically differentiable function families: everything the
/// nonlinear-outcome analysis needs. `Reciprocal(a)` is a/x and is
/// undefined within `RECIPROCAL_GUARD` of x = 0.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum FunctionSpec {
    /// coefficients[i] * x^i
    Polynomial(Vec<f64>),
    /// a / x
    Reciprocal(f64),
    /// k
    Constant(f64),
}

/// Evaluation guard for `Reciprocal`: |x| must be at least this large.
pub const RECIPROCAL_GUARD: f64 = 1e-6;

impl FunctionSpec {
    /// Identity function x.
    pub fn identity() -> Self {
        FunctionSpec::Polynomial(vec![0.0, 1.0])
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        match self {
            FunctionSpec::Polynomial(coeffs) => {
                Ok(coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c))
            }
            FunctionSpec::Reciprocal(a) => {
                check_reciprocal_domain(x)?;
                Ok(a / x)
            }
            FunctionSpec::Constant(k) => Ok(*k),
        }
    }

    /// Exact analytic derivative at x (power rule / -a/x^2 / 0).
    pub fn eval_derivative(&self, x: f64) -> Result<f64> {
        match self {
            FunctionSpec::Polynomial(coeffs) => Ok(coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .fold(0.0, |acc, (i, &c)| acc * x + i as f64 * c)),
            FunctionSpec::Reciprocal(a) => {
                check_reciprocal_domain(x)?;
                Ok(-a / (x * x))
            }
            FunctionSpec::Constant(_) => Ok(0.0),
        }
    }

    /// Parse `poly:a0,a1,...`, `reciprocal:a`, or `constant:k`.
    pub fn parse(s: &str) -> Result<Self> {
        let (kind, args) = s.split_once(':').unwrap_or((s, ""));
        let parse_f64 = |v: &str| -> Result<f64> {
            v.trim()
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad number {v:?} in function spec")))
        };
        match kind.trim() {
            "poly" | "polynomial" => {
                let coeffs = args
                    .split(',')
                    .filter(|p| !p.trim().is_empty())
                    .map(parse_f64)
                    .collect::<Result<Vec<_>>>()?;
                if coeffs.is_empty() {
                    return Err(Error::InvalidConfig(
                        "polynomial needs at least one coefficient".into(),
                    ));
                }
                Ok(FunctionSpec::Polynomial(coeffs))
            }
            "reciprocal" => Ok(FunctionSpec::Reciprocal(parse_f64(args)?)),
            "constant" => Ok(FunctionSpec::Constant(parse_f64(args)?)),
            other => Err(Error::InvalidConfig(format!(
                "unknown function kind {other:?} (expected poly, reciprocal, or constant)"
            ))),
        }
    }
}

fn check_reciprocal_domain(x: f64) -> Result<()> {
    if x.abs() < RECIPROCAL_GUARD {
        return Err(Error::DomainError(format!(
            "reciprocal evaluated at x = {x}, inside the guard |x| >= {RECIPROCAL_GUARD}"
        )));
    }
    Ok(())
}

/// Linear treatment equation X = c3 Z + c1 U + e' paired with a nonlinear
/// outcome Y = f(X) + U g(X) + e''. Z, U are standard normal and
/// independent; the X equation keeps the standardized convention, so
/// Var(e') = 1 - c3^2 - c1^2 must be nonnegative.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearOutcomeModel {
    c3: f64,
    c1: f64,
    f: FunctionSpec,
    g: FunctionSpec,
    x_noise_variance: f64,
    y_noise_variance: f64,
}

impl NonlinearOutcomeModel {
    /// Standardized-X constructor: derives Var(e') = 1 - c3^2 - c1^2.
    pub fn new(
        c3: f64,
        c1: f64,
        f: FunctionSpec,
        g: FunctionSpec,
        y_noise_variance: f64,
    ) -> Result<Self> {
        check_instrument_strength(c3)?;
        let x_residual = 1.0 - c3 * c3 - c1 * c1;
        if x_residual < 0.0 {
            return Err(Error::InfeasibleStandardization {
                node: "X".into(),
                parent_variance: c3 * c3 + c1 * c1,
                deficit: -x_residual,
            });
        }
        if !(y_noise_variance >= 0.0) {
            return Err(Error::NonpositiveVariance(format!(
                "outcome noise variance must be >= 0, got {y_noise_variance}"
            )));
        }
        Ok(NonlinearOutcomeModel {
            c3,
            c1,
            f,
            g,
            x_noise_variance: x_residual,
            y_noise_variance,
        })
    }

    pub fn c3(&self) -> f64 {
        self.c3
    }

    pub fn c1(&self) -> f64 {
        self.c1
    }

    pub fn f(&self) -> &FunctionSpec {
        &self.f
    }

    pub fn g(&self) -> &FunctionSpec {
        &self.g
    }

    pub fn x_noise_variance(&self) -> f64 {
        self.x_noise_variance
    }

    pub fn y_noise_variance(&self) -> f64 {
        self.y_noise_variance
    }

    /// E(Y | x) = f(x) + c1 x g(x).
    pub fn marginal_mean(&self, x: f64) -> Result<f64> {
        Ok(self.f.eval(x)? + self.c1 * x * self.g.eval(x)?)
    }

    /// E(Y | x, z) = f(x) + beta g(x) (x - c3 z).
    pub fn conditional_mean(&self, x: f64, z: f64) -> Result<f64> {
        let proj = u_projection(self.c1, self.c3)?;
        Ok(self.f.eval(x)? + proj.beta * self.g.eval(x)? * (x - self.c3 * z))
    }
}

/// The three slopes of the nonlinear model at (x, z):
///
/// a1 = f'(x)
/// a2 = f'(x) + c1 (x g'(x) + g(x))
/// a3 = f'(x) + beta (x g'(x) + g(x) - c3 g'(x) z)
pub fn nonlinear_slopes(model: &NonlinearOutcomeModel, x: f64, z: f64) -> Result<(f64, f64, f64)> {
    let proj = u_projection(model.c1, model.c3)?;
    let fp = model.f.eval_derivative(x)?;
    let g = model.g.eval(x)?;
    let gp = model.g.eval_derivative(x)?;
    let a1 = fp;
    let a2 = fp + model.c1 * (x * gp + g);
    let a3 = fp + proj.beta * (x * gp + g - model.c3 * gp * z);
    Ok((a1, a2, a3))
}

/// Bias pair of the nonlinear model at (x, z):
///
/// b0 = c1 (x g'(x) + g(x))
/// bz = (b0 - c1 c3 g'(x) z) / (1 - c3^2)
///
/// Unlike the linear case the conditioned bias depends on the value of z,
/// and b0 = 0 with bz != 0 is possible (classification `NewBias`).
pub fn nonlinear_bias_pair(model: &NonlinearOutcomeModel, x: f64, z: f64) -> Result<BiasReport> {
    let denom = check_instrument_strength(model.c3)?;
    let (a1, a2, a3) = nonlinear_slopes(model, x, z)?;
    let gp = model.g.eval_derivative(x)?;
    let g = model.g.eval(x)?;
    let b0 = model.c1 * (x * gp + g);
    let bz = (b0 - model.c1 * model.c3 * gp * z) / denom;
    Ok(BiasReport {
        a1,
        a2,
        a3,
        b0,
        bz,
        amplification: 1.0 / denom,
        classification: classify(b0, bz),
    })
}
