//! biaslab: a structural-causal-model laboratory for studying how
//! conditioning on covariates moves confounding and selection bias.
//!
//! The crate has three legs that check each other:
//!
//! - [`analytic`]: closed-form slope and bias formulas for the linear
//!   instrument model, its imperfect-instrument variant, nonlinear outcome
//!   models, the selection model, and the attenuation intuition.
//! - [`scm`]: linear structural models with implied covariance matrices
//!   and Gaussian conditional algebra, an independent route to the same
//!   regression slopes.
//! - [`mc`]: a seeded Monte Carlo engine (sampling, least squares,
//!   band-conditioned selection) that estimates everything empirically.
//!
//! [`graph`] and [`dsep`] supply the structural layer (DAGs,
//! d-separation, the confounding-vs-selection taxonomy), [`diagnostics`]
//! the data-facing instrument-sensitivity test, and [`model_file`] /
//! [`dataset`] the text formats. [`catalog`] holds the standard models
//! used across tests and the CLI.

pub mod analytic;
pub mod catalog;
pub mod dataset;
pub mod diagnostics;
pub mod dsep;
pub mod error;
pub mod graph;
pub mod mc;
pub mod model_file;
pub mod scm;

pub use error::{Error, Result};
