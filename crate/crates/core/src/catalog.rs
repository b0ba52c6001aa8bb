//! Canonical model builders used throughout the crate.
//!
//! These are the four standard structures the analysis revolves around;
//! the same models ship as text fixtures under `models/` (fig1.scm through
//! fig4.scm) for the command-line tool.

use crate::error::Result;
use crate::graph::NodeKind;
use crate::scm::{build_model, EdgeSpec, LinearSCM, ModelSpec};

fn standardized(nodes: Vec<(String, NodeKind)>, edges: Vec<EdgeSpec>) -> Result<LinearSCM> {
    build_model(&ModelSpec {
        nodes,
        edges,
        standardized: true,
        noise_variances: vec![],
    })
}

/// Instrument + latent confounder model (fig1.scm):
/// Z -> X (c3), U -> X (c1), U -> Y (c2), X -> Y (c0), all standardized.
pub fn iv_model(c0: f64, c1: f64, c2: f64, c3: f64) -> Result<LinearSCM> {
    standardized(
        vec![
            ("Z".into(), NodeKind::Observed),
            ("U".into(), NodeKind::Latent),
            ("X".into(), NodeKind::Observed),
            ("Y".into(), NodeKind::Observed),
        ],
        vec![
            EdgeSpec::new("Z", "X", c3),
            EdgeSpec::new("U", "X", c1),
            EdgeSpec::new("U", "Y", c2),
            EdgeSpec::new("X", "Y", c0),
        ],
    )
}

/// Same structure with a direct Z -> Y edge (c4), making Z both a
/// confounder and an imperfect instrument (fig2.scm).
pub fn imperfect_iv_model(c0: f64, c1: f64, c2: f64, c3: f64, c4: f64) -> Result<LinearSCM> {
    standardized(
        vec![
            ("Z".into(), NodeKind::Observed),
            ("U".into(), NodeKind::Latent),
            ("X".into(), NodeKind::Observed),
            ("Y".into(), NodeKind::Observed),
        ],
        vec![
            EdgeSpec::new("Z", "X", c3),
            EdgeSpec::new("U", "X", c1),
            EdgeSpec::new("U", "Y", c2),
            EdgeSpec::new("X", "Y", c0),
            EdgeSpec::new("Z", "Y", c4),
        ],
    )
}

/// Minimal selection model: X exogenous, Y = c0 X + disturbance,
/// S = b1 X + b2 Y + disturbance, standardized. Conditioning on S is what
/// induces the spurious X-Y association.
pub fn selection_model(c0: f64, b1: f64, b2: f64) -> Result<LinearSCM> {
    standardized(
        vec![
            ("X".into(), NodeKind::Observed),
            ("Y".into(), NodeKind::Observed),
            ("S".into(), NodeKind::Selection),
        ],
        vec![
            EdgeSpec::new("X", "Y", c0),
            EdgeSpec::new("X", "S", b1),
            EdgeSpec::new("Y", "S", b2),
        ],
    )
}

/// Selection model with an instrument Z -> X (c3) added, used to check
/// that conditioning on Z leaves selection-induced bias untouched.
pub fn selection_model_with_iv(c0: f64, b1: f64, b2: f64, c3: f64) -> Result<LinearSCM> {
    standardized(
        vec![
            ("Z".into(), NodeKind::Observed),
            ("X".into(), NodeKind::Observed),
            ("Y".into(), NodeKind::Observed),
            ("S".into(), NodeKind::Selection),
        ],
        vec![
            EdgeSpec::new("Z", "X", c3),
            EdgeSpec::new("X", "Y", c0),
            EdgeSpec::new("X", "S", b1),
            EdgeSpec::new("Y", "S", b2),
        ],
    )
}

/// Mixed-bias model (fig4.scm): three selection indicators with different
/// bias signatures. S1 sits below both an ancestor of X (U1) and the
/// outcome, S2 below the treatment and an outcome parent (U2), S3 below
/// U1 and U2 only. UY is the outcome's own disturbance, made explicit so
/// the collider at Y can be reasoned about.
///
/// Edges: Z->X, U1->X, X->Y, UY->Y, U2->Y, U1->S1, Y->S1, X->S2, U2->S2,
/// U1->S3, U2->S3.
pub fn mixed_bias_model() -> Result<LinearSCM> {
    standardized(
        vec![
            ("Z".into(), NodeKind::Observed),
            ("U1".into(), NodeKind::Latent),
            ("U2".into(), NodeKind::Latent),
            ("UY".into(), NodeKind::Latent),
            ("X".into(), NodeKind::Observed),
            ("Y".into(), NodeKind::Observed),
            ("S1".into(), NodeKind::Selection),
            ("S2".into(), NodeKind::Selection),
            ("S3".into(), NodeKind::Selection),
        ],
        vec![
            EdgeSpec::new("Z", "X", 0.5),
            EdgeSpec::new("U1", "X", 0.5),
            EdgeSpec::new("X", "Y", 0.3),
            EdgeSpec::new("UY", "Y", 0.5),
            EdgeSpec::new("U2", "Y", 0.4),
            EdgeSpec::new("U1", "S1", 0.4),
            EdgeSpec::new("Y", "S1", 0.4),
            EdgeSpec::new("X", "S2", 0.4),
            EdgeSpec::new("U2", "S2", 0.4),
            EdgeSpec::new("U1", "S3", 0.4),
            EdgeSpec::new("U2", "S3", 0.4),
        ],
    )
}
