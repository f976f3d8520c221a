//! JSON descriptor files.
//!
//! ```json
//! {
//!   "schema": 1,
//!   "label": "T4",
//!   "dim": 4,
//!   "nilpotency_class": 1,
//!   "orientable": true,
//!   "spin": true,
//!   "is_torus": true,
//!   "holonomy_gens": [],
//!   "affine_parts": [],
//!   "presentation": "< a, b | [a,b] >",
//!   "underlying": { "label": "...", "dim": 3, "holonomy_gens": [[...]], "presentation": "..." }
//! }
//! ```
//!
//! Holonomy generators are flat row-major integer lists of length `dim²`;
//! affine parts are rational strings `"p/q"`. Unknown fields are rejected and
//! only schema version 1 is accepted.

use num_rational::BigRational;
use serde::Deserialize;
use thiserror::Error;

use crate::crystal::{AlmostBieberbachDescriptor, CrystalError, CrystalGroup, UnderlyingGroup};
use crate::grouppres::{Presentation, PresentationError};
use crate::linalg::IntMatrix;

pub const SCHEMA_VERSION: u64 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormatError {
    #[error("line {line}, column {column}: {message}")]
    Json {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("missing \"schema\": {SCHEMA_VERSION}")]
    MissingSchema,
    #[error("unsupported schema version {0}, expected {SCHEMA_VERSION}")]
    UnsupportedSchema(u64),
    #[error("{field}: {source}")]
    Presentation {
        field: String,
        source: PresentationError,
    },
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error(transparent)]
    Crystal(#[from] CrystalError),
}

impl From<serde_json::Error> for FormatError {
    fn from(e: serde_json::Error) -> Self {
        let message = e.to_string();
        // serde_json appends " at line L column C"; keep just the message
        let message = match message.rfind(" at line ") {
            Some(i) => message[..i].to_string(),
            None => message,
        };
        FormatError::Json {
            line: e.line(),
            column: e.column(),
            message,
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawDescriptor {
    pub schema: Option<u64>,
    pub label: String,
    pub dim: usize,
    pub nilpotency_class: u8,
    pub orientable: bool,
    pub spin: bool,
    #[serde(default)]
    pub is_torus: bool,
    pub holonomy_gens: Option<Vec<Vec<i64>>>,
    pub affine_parts: Option<Vec<Vec<String>>>,
    pub presentation: Option<String>,
    pub underlying: Option<RawUnderlying>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
pub(crate) struct RawUnderlying {
    pub label: Option<String>,
    pub dim: Option<usize>,
    pub holonomy_gens: Option<Vec<Vec<i64>>>,
    pub affine_parts: Option<Vec<Vec<String>>>,
    pub presentation: Option<String>,
}

pub(crate) fn check_schema(schema: Option<u64>) -> Result<(), FormatError> {
    match schema {
        Some(SCHEMA_VERSION) => Ok(()),
        Some(v) => Err(FormatError::UnsupportedSchema(v)),
        None => Err(FormatError::MissingSchema),
    }
}

fn invalid(field: &str, message: impl Into<String>) -> FormatError {
    FormatError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

fn parse_presentation(field: &str, text: &str) -> Result<Presentation, FormatError> {
    Presentation::parse(text).map_err(|source| FormatError::Presentation {
        field: field.into(),
        source,
    })
}

fn parse_matrices(field: &str, dim: usize, gens: &[Vec<i64>]) -> Result<Vec<IntMatrix>, FormatError> {
    gens.iter()
        .enumerate()
        .map(|(i, flat)| {
            if flat.len() != dim * dim {
                return Err(invalid(
                    &format!("{field}[{i}]"),
                    format!("{} entries, expected {} for dimension {dim}", flat.len(), dim * dim),
                ));
            }
            let rows: Vec<&[i64]> = flat.chunks(dim.max(1)).collect();
            Ok(if dim == 0 {
                IntMatrix::zeros(0, 0)
            } else {
                IntMatrix::from_rows(&rows)
            })
        })
        .collect()
}

fn parse_affine(field: &str, parts: &[Vec<String>]) -> Result<Vec<Vec<BigRational>>, FormatError> {
    parts
        .iter()
        .enumerate()
        .map(|(i, v)| {
            v.iter()
                .enumerate()
                .map(|(j, s)| {
                    s.trim().parse::<BigRational>().map_err(|_| {
                        invalid(
                            &format!("{field}[{i}][{j}]"),
                            format!("`{s}` is not a rational number p/q"),
                        )
                    })
                })
                .collect()
        })
        .collect()
}

fn crystal_group(
    label: &str,
    field: &str,
    dim: usize,
    gens: &[Vec<i64>],
    affine: Option<&[Vec<String>]>,
) -> Result<CrystalGroup, FormatError> {
    let mats = parse_matrices(&format!("{field}holonomy_gens"), dim, gens)?;
    let affine = affine
        .map(|a| parse_affine(&format!("{field}affine_parts"), a))
        .transpose()?;
    Ok(CrystalGroup::new(label, dim, mats, affine)?)
}

impl RawDescriptor {
    pub(crate) fn into_descriptor(self) -> Result<AlmostBieberbachDescriptor, FormatError> {
        let holonomy = match &self.holonomy_gens {
            Some(gens) => Some(crystal_group(
                &self.label,
                "",
                self.dim,
                gens,
                self.affine_parts.as_deref(),
            )?),
            None if self.affine_parts.is_some() => {
                return Err(invalid("affine_parts", "given without holonomy_gens"))
            }
            None => None,
        };
        let presentation = self
            .presentation
            .as_deref()
            .map(|p| parse_presentation("presentation", p))
            .transpose()?;
        let underlying = self
            .underlying
            .map(|u| -> Result<UnderlyingGroup, FormatError> {
                let label = u
                    .label
                    .clone()
                    .unwrap_or_else(|| format!("{}/underlying", self.label));
                let crystal = match (&u.holonomy_gens, u.dim) {
                    (Some(gens), Some(dim)) => Some(crystal_group(
                        &label,
                        "underlying.",
                        dim,
                        gens,
                        u.affine_parts.as_deref(),
                    )?),
                    (Some(_), None) => {
                        return Err(invalid("underlying.dim", "required with holonomy_gens"))
                    }
                    (None, _) if u.affine_parts.is_some() => {
                        return Err(invalid(
                            "underlying.affine_parts",
                            "given without holonomy_gens",
                        ))
                    }
                    (None, _) => None,
                };
                let presentation = u
                    .presentation
                    .as_deref()
                    .map(|p| parse_presentation("underlying.presentation", p))
                    .transpose()?;
                Ok(UnderlyingGroup {
                    label,
                    crystal,
                    presentation,
                })
            })
            .transpose()?;
        let d = AlmostBieberbachDescriptor {
            label: self.label,
            dim: self.dim,
            nilpotency_class: self.nilpotency_class,
            orientable: self.orientable,
            spin: self.spin,
            is_torus: self.is_torus,
            holonomy,
            presentation,
            underlying,
        };
        d.validate()?;
        Ok(d)
    }
}

/// Parses a standalone descriptor file.
pub fn parse_descriptor(text: &str) -> Result<AlmostBieberbachDescriptor, FormatError> {
    let raw: RawDescriptor = serde_json::from_str(text)?;
    check_schema(raw.schema)?;
    raw.into_descriptor()
}
