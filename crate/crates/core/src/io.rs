//! The `hingechain/1` chain file: a TOML document
//!
//! ```toml
//! format = "hingechain/1"
//! dimension = 3
//! endpoint = [3.0, 0.0, 0.0]
//! panels = [[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]]   # optional, one normal per body
//!
//! [[hinge]]
//! label = "elbow"                              # optional
//! point = [1.0, 0.0, 0.0]
//! directions = [[0.0, 1.0, 0.0]]               # d - 2 vectors
//! ```
//!
//! Directions are orthonormalized on load; a warning is emitted when that
//! moves any coordinate by more than [`ADJUSTMENT_WARNING`].

use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;
use toml::Spanned;

use crate::chain::{ChainError, ChainSpec};
use crate::geom::{AffineSubspace, Hinge, Point, Vector};
use crate::panel::{PanelChainSpec, PanelError};

pub const FORMAT_TAG: &str = "hingechain/1";
pub const ADJUSTMENT_WARNING: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum FileError {
    #[error("cannot read {path}: {message}")]
    Io { path: String, message: String },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: field `{field}`: {message}")]
    Field { field: String, line: usize, message: String },
    #[error("chain has no panels")]
    NotPanelChain,
}

#[derive(Deserialize)]
struct RawFile {
    format: Spanned<String>,
    dimension: Spanned<usize>,
    endpoint: Spanned<Vec<f64>>,
    #[serde(default)]
    hinge: Vec<Spanned<RawHinge>>,
    panels: Option<Spanned<Vec<Vec<f64>>>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawHinge {
    point: Spanned<Vec<f64>>,
    directions: Option<Spanned<Vec<Vec<f64>>>>,
    label: Option<String>,
}

/// A loaded chain with its optional panel structure.
#[derive(Debug, Clone)]
pub struct ChainFile {
    pub chain: ChainSpec,
    pub panel: Option<PanelChainSpec>,
    pub labels: Vec<Option<String>>,
    pub warnings: Vec<String>,
}

impl ChainFile {
    pub fn panel(&self) -> Result<&PanelChainSpec, FileError> {
        self.panel.as_ref().ok_or(FileError::NotPanelChain)
    }

    /// Label of 0-based hinge `i`, or its 1-based number.
    pub fn label(&self, i: usize) -> String {
        self.labels[i].clone().unwrap_or_else(|| format!("{}", i + 1))
    }
}

fn line_of(text: &str, span: Range<usize>) -> usize {
    text[..span.start.min(text.len())].matches('\n').count() + 1
}

fn field_error(text: &str, field: impl Into<String>, span: Range<usize>, message: impl ToString) -> FileError {
    FileError::Field { field: field.into(), line: line_of(text, span), message: message.to_string() }
}

fn vector(text: &str, field: &str, raw: &Spanned<Vec<f64>>, dim: usize) -> Result<Vector, FileError> {
    let v = raw.get_ref();
    if v.len() != dim {
        return Err(field_error(text, field, raw.span(), format!("expected {dim} coordinates, found {}", v.len())));
    }
    if v.iter().any(|x| !x.is_finite()) {
        return Err(field_error(text, field, raw.span(), "non-finite coordinate"));
    }
    Ok(Vector::from_vec(v.clone()))
}

/// Parses a chain file from text.
pub fn parse_chain_file(text: &str) -> Result<ChainFile, FileError> {
    let raw: RawFile = toml::from_str(text).map_err(|e| FileError::Syntax {
        line: e.span().map(|s| line_of(text, s)).unwrap_or(1),
        message: e.message().to_string(),
    })?;
    if raw.format.get_ref() != FORMAT_TAG {
        return Err(field_error(
            text,
            "format",
            raw.format.span(),
            format!("expected \"{FORMAT_TAG}\", found \"{}\"", raw.format.get_ref()),
        ));
    }
    let dim = *raw.dimension.get_ref();
    if dim < 2 {
        return Err(field_error(text, "dimension", raw.dimension.span(), "dimension must be at least 2"));
    }
    let endpoint: Point = vector(text, "endpoint", &raw.endpoint, dim)?;
    if raw.hinge.is_empty() {
        return Err(field_error(text, "hinge", 0..0, "at least one [[hinge]] is required"));
    }

    let mut hinges = Vec::with_capacity(raw.hinge.len());
    let mut labels = Vec::with_capacity(raw.hinge.len());
    let mut warnings = Vec::new();
    for (i, spanned) in raw.hinge.iter().enumerate() {
        let h = spanned.get_ref();
        let name = format!("hinge[{}]", i + 1);
        let point = vector(text, &format!("{name}.point"), &h.point, dim)?;
        let dirs_field = format!("{name}.directions");
        let directions = h.directions.clone().unwrap_or_else(|| Spanned::new(spanned.span(), Vec::new()));
        let dirs = directions.get_ref();
        if dirs.len() != dim - 2 {
            return Err(field_error(
                text,
                dirs_field,
                directions.span(),
                format!("expected {} direction vectors, found {}", dim - 2, dirs.len()),
            ));
        }
        let dirs = dirs
            .iter()
            .map(|d| vector(text, &dirs_field, &Spanned::new(directions.span(), d.clone()), dim))
            .collect::<Result<Vec<_>, _>>()?;
        let (flat, adjustment) = AffineSubspace::orthonormalized(point, dirs)
            .map_err(|e| field_error(text, dirs_field.clone(), directions.span(), e))?;
        if adjustment > ADJUSTMENT_WARNING {
            warnings.push(format!(
                "line {}: {dirs_field} adjusted by {adjustment:.3e} during orthonormalization",
                line_of(text, directions.span())
            ));
        }
        let hinge = Hinge::new(flat).map_err(|e| field_error(text, name.clone(), spanned.span(), e))?;
        hinges.push(hinge);
        labels.push(h.label.clone());
    }

    let hinge_span = |i: usize| raw.hinge.get(i).map(|h| h.span()).unwrap_or(0..0);
    let chain = ChainSpec::new(dim, hinges, endpoint).map_err(|e| match &e {
        ChainError::DegenerateHinge { index, .. }
        | ChainError::CoincidentHinges { index }
        | ChainError::DimensionMismatch { index, .. } => {
            field_error(text, format!("hinge[{}]", index + 1), hinge_span(*index), e)
        }
        ChainError::DegenerateLink => field_error(text, "endpoint", raw.endpoint.span(), e),
        _ => field_error(text, "hinge", 0..0, e),
    })?;

    let panel = match &raw.panels {
        None => None,
        Some(p) => {
            let normals = p
                .get_ref()
                .iter()
                .map(|v| vector(text, "panels", &Spanned::new(p.span(), v.clone()), dim))
                .collect::<Result<Vec<_>, _>>()?;
            Some(
                PanelChainSpec::new(chain.clone(), normals)
                    .map_err(|e| field_error(text, panel_field(&e), p.span(), e))?,
            )
        }
    };
    Ok(ChainFile { chain, panel, labels, warnings })
}

fn panel_field(e: &PanelError) -> String {
    match e {
        PanelError::NotPanel { body, .. } => format!("panels[{body}]"),
        _ => "panels".to_string(),
    }
}

/// Reads and parses a chain file.
pub fn load_chain_file(path: &Path) -> Result<ChainFile, FileError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| FileError::Io { path: path.display().to_string(), message: e.to_string() })?;
    parse_chain_file(&text)
}

#[derive(Serialize)]
struct OutFile<'a> {
    format: &'a str,
    dimension: usize,
    endpoint: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    panels: Option<Vec<Vec<f64>>>,
    hinge: Vec<OutHinge>,
}

#[derive(Serialize)]
struct OutHinge {
    #[serde(skip_serializing_if = "Option::is_none")]
    label: Option<String>,
    point: Vec<f64>,
    directions: Vec<Vec<f64>>,
}

/// Writes a chain in the file format; reading it back gives the same chain.
pub fn write_chain_file(chain: &ChainSpec, panels: Option<&[Vector]>, labels: &[Option<String>]) -> String {
    let out = OutFile {
        format: FORMAT_TAG,
        dimension: chain.dim(),
        endpoint: chain.endpoint().iter().copied().collect(),
        panels: panels.map(|p| p.iter().map(|v| v.iter().copied().collect()).collect()),
        hinge: chain
            .hinges()
            .iter()
            .enumerate()
            .map(|(i, h)| OutHinge {
                label: labels.get(i).cloned().flatten(),
                point: h.base().iter().copied().collect(),
                directions: h.flat().directions().iter().map(|d| d.iter().copied().collect()).collect(),
            })
            .collect(),
    };
    toml::to_string(&out).expect("chain serializes")
}

#[cfg(test)]
mod tests {
    use super::*;

    const PLANAR: &str = r#"
format = "hingechain/1"
dimension = 2
endpoint = [3.0, 0.0]

[[hinge]]
point = [1.0, 0.0]

[[hinge]]
label = "wrist"
point = [2.0, 0.0]
"#;

    #[test]
    fn parses_planar_chain() {
        let f = parse_chain_file(PLANAR).unwrap();
        assert_eq!(f.chain.n(), 2);
        assert_eq!(f.label(0), "1");
        assert_eq!(f.label(1), "wrist");
        assert!(f.warnings.is_empty());
        assert!(matches!(f.panel(), Err(FileError::NotPanelChain)));
    }

    #[test]
    fn names_missing_fields() {
        let text = PLANAR.replace("endpoint = [3.0, 0.0]\n", "");
        let err = parse_chain_file(&text).unwrap_err().to_string();
        assert!(err.contains("endpoint"), "{err}");
    }

    #[test]
    fn names_bad_lengths_with_lines() {
        let text = PLANAR.replace("point = [2.0, 0.0]", "point = [2.0, 0.0, 1.0]");
        match parse_chain_file(&text).unwrap_err() {
            FileError::Field { field, line, .. } => {
                assert_eq!(field, "hinge[2].point");
                assert_eq!(line, 11);
            }
            other => panic!("{other}"),
        }
    }

    #[test]
    fn rejects_wrong_tag_and_unknown_keys() {
        let text = PLANAR.replace("hingechain/1", "hingechain/9");
        assert!(parse_chain_file(&text).unwrap_err().to_string().contains("format"));
        let text = PLANAR.replace("label = \"wrist\"", "lable = \"wrist\"");
        assert!(parse_chain_file(&text).unwrap_err().to_string().contains("lable"));
    }

    #[test]
    fn hinge_through_origin_is_reported() {
        let text = PLANAR.replace("point = [1.0, 0.0]", "point = [0.0, 0.0]");
        let err = parse_chain_file(&text).unwrap_err().to_string();
        assert!(err.contains("hinge[1]") && err.contains("origin"), "{err}");
    }

    #[test]
    fn orthonormalizes_with_warning() {
        let text = r#"
format = "hingechain/1"
dimension = 4
endpoint = [2.0, 0.0, 0.0, 0.0]
[[hinge]]
point = [1.0, 0.0, 0.0, 0.0]
directions = [[0.0, 2.0, 0.0, 0.0], [0.0, 1.0, 1.0, 0.0]]
"#;
        let f = parse_chain_file(text).unwrap();
        assert_eq!(f.warnings.len(), 1);
        let dirs = f.chain.hinges()[0].flat().directions();
        assert!((dirs[0][1] - 1.0).abs() < 1e-15 && (dirs[1][2] - 1.0).abs() < 1e-15);
        // rescaling alone is not worth a warning
        let scaled = text.replace(", [0.0, 1.0, 1.0, 0.0]", ", [0.0, 0.0, 3.0, 0.0]");
        assert!(parse_chain_file(&scaled).unwrap().warnings.is_empty());
    }

    #[test]
    fn written_files_read_back() {
        let text = r#"
format = "hingechain/1"
dimension = 3
endpoint = [2.0, 0.0, 0.0]
panels = [[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]]
[[hinge]]
label = "a"
point = [1.0, 0.0, 0.0]
directions = [[0.0, 1.0, 0.0]]
"#;
        let f = parse_chain_file(text).unwrap();
        let normals = f.panel().unwrap().normals().to_vec();
        let again = parse_chain_file(&write_chain_file(&f.chain, Some(&normals), &f.labels)).unwrap();
        assert_eq!(again.chain, f.chain);
        assert_eq!(again.labels, f.labels);
        assert_eq!(again.panel.unwrap().normals(), &normals[..]);
    }

    #[test]
    fn invalid_panels_are_rejected() {
        let text = r#"
format = "hingechain/1"
dimension = 3
endpoint = [2.0, 0.0, 0.5]
panels = [[0.0, 0.0, 1.0], [0.0, 0.0, 1.0]]
[[hinge]]
point = [1.0, 0.0, 0.0]
directions = [[0.0, 1.0, 0.0]]
"#;
        let err = parse_chain_file(text).unwrap_err().to_string();
        assert!(err.contains("panels[1]"), "{err}");
    }
}
