//! Line-oriented text format for model files.
//!
//! ```text
//! # comment
//! [variables]
//! Z observed
//! U latent
//! X observed
//! Y observed
//!
//! [edges]
//! Z -> X : 0.6
//! U -> X : 0.5
//! U -> Y : 0.4
//! X -> Y : 0.3
//!
//! [options]
//! standardized = true
//! ```
//!
//! Kinds are `observed`, `latent`, or `selection`. When
//! `standardized = false`, disturbance variances may be set with
//! `noise_variance.NAME = v` (unlisted nodes default to 1). Parse errors
//! carry the offending line number.

use crate::error::{Error, Result};
use crate::graph::NodeKind;
use crate::scm::{build_model, EdgeSpec, LinearSCM, ModelSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Section {
    None,
    Variables,
    Edges,
    Options,
}

/// Parse the text format into a [`ModelSpec`] without building the model.
pub fn parse_model_spec(text: &str) -> Result<ModelSpec> {
    let mut section = Section::None;
    let mut spec = ModelSpec {
        nodes: vec![],
        edges: vec![],
        standardized: true,
        noise_variances: vec![],
    };
    let mut standardized_set = false;

    for (ix, raw) in text.lines().enumerate() {
        let line_no = ix + 1;
        let line = match raw.find('#') {
            Some(pos) => &raw[..pos],
            None => raw,
        }
        .trim();
        if line.is_empty() {
            continue;
        }

        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| Error::Parse {
                line: line_no,
                message: "unterminated section header".into(),
            })?;
            section = match name.trim() {
                "variables" => Section::Variables,
                "edges" => Section::Edges,
                "options" => Section::Options,
                other => {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("unknown section [{other}]"),
                    })
                }
            };
            continue;
        }

        match section {
            Section::None => {
                return Err(Error::Parse {
                    line: line_no,
                    message: "content before any section header".into(),
                })
            }
            Section::Variables => {
                let mut parts = line.split_whitespace();
                let name = parts.next().unwrap();
                let kind = parts.next().ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!("expected `NAME kind`, got {line:?}"),
                })?;
                if parts.next().is_some() {
                    return Err(Error::Parse {
                        line: line_no,
                        message: "trailing tokens after variable declaration".into(),
                    });
                }
                let kind = NodeKind::parse(kind).ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: format!(
                        "unknown kind {kind:?} (expected observed, latent, or selection)"
                    ),
                })?;
                spec.nodes.push((name.to_owned(), kind));
            }
            Section::Edges => {
                let (lhs, coeff) = line.rsplit_once(':').ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: "expected `PARENT -> CHILD : coefficient`".into(),
                })?;
                let (parent, child) = lhs.split_once("->").ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: "missing `->` in edge".into(),
                })?;
                let coefficient: f64 = coeff.trim().parse().map_err(|_| Error::Parse {
                    line: line_no,
                    message: format!("bad coefficient {:?}", coeff.trim()),
                })?;
                spec.edges
                    .push(EdgeSpec::new(parent.trim(), child.trim(), coefficient));
            }
            Section::Options => {
                let (key, value) = line.split_once('=').ok_or_else(|| Error::Parse {
                    line: line_no,
                    message: "expected `key = value`".into(),
                })?;
                let key = key.trim();
                let value = value.trim();
                if key == "standardized" {
                    spec.standardized = match value {
                        "true" => true,
                        "false" => false,
                        other => {
                            return Err(Error::Parse {
                                line: line_no,
                                message: format!(
                                    "standardized must be true or false, got {other:?}"
                                ),
                            })
                        }
                    };
                    standardized_set = true;
                } else if let Some(node) = key.strip_prefix("noise_variance.") {
                    let v: f64 = value.parse().map_err(|_| Error::Parse {
                        line: line_no,
                        message: format!("bad variance {value:?}"),
                    })?;
                    spec.noise_variances.push((node.to_owned(), v));
                } else {
                    return Err(Error::Parse {
                        line: line_no,
                        message: format!("unknown option {key:?}"),
                    });
                }
            }
        }
    }

    if spec.standardized && standardized_set && !spec.noise_variances.is_empty() {
        return Err(Error::InvalidConfig(
            "noise_variance options require standardized = false".into(),
        ));
    }
    Ok(spec)
}

/// Parse and build in one step.
pub fn parse_model(text: &str) -> Result<LinearSCM> {
    build_model(&parse_model_spec(text)?)
}

/// Read a model file from disk.
pub fn load_model(path: &std::path::Path) -> Result<LinearSCM> {
    parse_model(&std::fs::read_to_string(path)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const IV_TEXT: &str = "\
# instrument + latent confounder
[variables]
Z observed
U latent
X observed
Y observed

[edges]
Z -> X : 0.6
U -> X : 0.5
U -> Y : 0.4
X -> Y : 0.3

[options]
standardized = true
";

    #[test]
    fn round_trips_the_iv_model() {
        let m = parse_model(IV_TEXT).unwrap();
        assert_eq!(m.graph().len(), 4);
        assert_relative_eq!(m.coefficient("Z", "X").unwrap(), 0.6);
        assert_relative_eq!(m.noise_variance("X").unwrap(), 0.39, epsilon = 1e-12);
        assert!(m.standardized());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let bad = "[variables]\nZ observed\nU wat\n";
        match parse_model_spec(bad).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }

        let bad = "[variables]\nZ observed\n[edges]\nZ X : 0.5\n";
        match parse_model_spec(bad).unwrap_err() {
            Error::Parse { line, .. } => assert_eq!(line, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_section_and_option_are_rejected() {
        assert!(matches!(
            parse_model_spec("[nodes]\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_model_spec("[options]\nseed = 3\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn non_standardized_noise_variances() {
        let text = "\
[variables]
X observed
Y observed
[edges]
X -> Y : 2.0
[options]
standardized = false
noise_variance.X = 4.0
";
        let m = parse_model(text).unwrap();
        assert_relative_eq!(m.covariance_of("X", "X").unwrap(), 4.0);
        // Var(Y) = 4 * 4 + 1 (default disturbance).
        assert_relative_eq!(m.covariance_of("Y", "Y").unwrap(), 17.0);
    }
}
