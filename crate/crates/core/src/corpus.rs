//! Corpus entries and the batch verification harness.
//!
//! A corpus entry wraps a descriptor with its provenance and the values it is
//! expected to produce:
//!
//! ```json
//! {
//!   "schema": 1,
//!   "kind": "manifold",
//!   "citation": "... [cited] ...",
//!   "expected": { "b1": 2, "form": { "type": "hyperbolic", "n": 1 } },
//!   "descriptor": { "label": "...", ... }
//! }
//! ```
//!
//! `kind` is `manifold` (the default; the full b₁ → b₂ → form pipeline) or
//! `group` (b₁ and abelianization only, for groups that are not closed
//! oriented 4-manifold groups). Expected values must be backed by one of the
//! provenance markers in [`PROVENANCE_MARKERS`] inside the citation.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{analyze, analyze_group, AnalyzeOptions, GroupReport, ManifoldReport};
use crate::crystal::AlmostBieberbachDescriptor;
use crate::format::{check_schema, FormatError, RawDescriptor};
use crate::forms::FormClass;

/// Provenance markers: taken from a cited source, computed independently, or
/// immediate from the construction.
pub const PROVENANCE_MARKERS: [&str; 3] = ["[cited]", "[computed]", "[construction]"];

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EntryKind {
    #[default]
    Manifold,
    Group,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Expected {
    pub b1: Option<usize>,
    pub form: Option<FormClass>,
    pub abelianization: Option<String>,
}

impl Expected {
    fn is_empty(&self) -> bool {
        self.b1.is_none() && self.form.is_none() && self.abelianization.is_none()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CorpusEntry {
    pub kind: EntryKind,
    pub descriptor: AlmostBieberbachDescriptor,
    pub citation: String,
    pub expected: Option<Expected>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    schema: Option<u64>,
    #[serde(default)]
    kind: EntryKind,
    citation: String,
    expected: Option<RawExpected>,
    descriptor: RawDescriptor,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawExpected {
    b1: Option<usize>,
    form: Option<RawForm>,
    abelianization: Option<String>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForm {
    #[serde(rename = "type")]
    kind: String,
    n: usize,
}

impl RawForm {
    fn into_class(self) -> Result<FormClass, FormatError> {
        match (self.kind.as_str(), self.n) {
            ("zero", 0) => Ok(FormClass::Zero),
            ("hyperbolic", n) => Ok(FormClass::hyperbolic(n)),
            (kind, n) => Err(FormatError::Invalid {
                field: "expected.form".into(),
                message: format!("cannot expect form type `{kind}` with n = {n}"),
            }),
        }
    }
}

impl CorpusEntry {
    pub fn validate(&self) -> Result<(), FormatError> {
        if self.citation.trim().is_empty() {
            return Err(FormatError::Invalid {
                field: "citation".into(),
                message: "must not be empty".into(),
            });
        }
        if let Some(exp) = &self.expected {
            if exp.is_empty() {
                return Err(FormatError::Invalid {
                    field: "expected".into(),
                    message: "present but empty".into(),
                });
            }
            if !PROVENANCE_MARKERS.iter().any(|m| self.citation.contains(m)) {
                return Err(FormatError::Invalid {
                    field: "citation".into(),
                    message: format!(
                        "expected values need a provenance marker, one of {}",
                        PROVENANCE_MARKERS.join(" ")
                    ),
                });
            }
            if self.kind == EntryKind::Group && exp.form.is_some() {
                return Err(FormatError::Invalid {
                    field: "expected.form".into(),
                    message: "group entries have no intersection form".into(),
                });
            }
        }
        Ok(())
    }
}

/// A corpus file or a bare descriptor file.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Document {
    Descriptor(AlmostBieberbachDescriptor),
    Entry(CorpusEntry),
}

/// Parses either file kind; entries are recognized by their `descriptor` key.
pub fn parse_document(text: &str) -> Result<Document, FormatError> {
    let probe: serde_json::Value = serde_json::from_str(text)?;
    if probe.get("descriptor").is_some() {
        parse_entry(text).map(Document::Entry)
    } else {
        crate::format::parse_descriptor(text).map(Document::Descriptor)
    }
}

pub fn parse_entry(text: &str) -> Result<CorpusEntry, FormatError> {
    let raw: RawEntry = serde_json::from_str(text)?;
    check_schema(raw.schema)?;
    // the nested descriptor inherits the entry's schema version
    match raw.descriptor.schema {
        None | Some(crate::format::SCHEMA_VERSION) => {}
        Some(v) => return Err(FormatError::UnsupportedSchema(v)),
    }
    let expected = raw
        .expected
        .map(|e| -> Result<Expected, FormatError> {
            Ok(Expected {
                b1: e.b1,
                form: e.form.map(RawForm::into_class).transpose()?,
                abelianization: e.abelianization,
            })
        })
        .transpose()?;
    let entry = CorpusEntry {
        kind: raw.kind,
        descriptor: raw.descriptor.into_descriptor()?,
        citation: raw.citation,
        expected,
    };
    entry.validate()?;
    Ok(entry)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum Outcome {
    Manifold(ManifoldReport),
    Group(GroupReport),
}

impl Outcome {
    pub fn b1(&self) -> usize {
        match self {
            Outcome::Manifold(r) => r.b1,
            Outcome::Group(r) => r.b1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Pass,
    Fail,
    Error,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EntryResult {
    pub file: String,
    pub label: Option<String>,
    pub status: Status,
    /// Mismatches for `fail`, the diagnostic for `error`.
    pub problems: Vec<String>,
    pub report: Option<Outcome>,
}

fn abelianization_of(d: &AlmostBieberbachDescriptor) -> Option<String> {
    d.presentation
        .as_ref()
        .or_else(|| d.underlying.as_ref().and_then(|u| u.presentation.as_ref()))
        .map(|p| crate::grouppres::abelian_invariants(p).to_string())
}

/// Runs the pipeline on one entry and compares against its expectations.
pub fn evaluate_entry(file: &str, entry: &CorpusEntry, opts: &AnalyzeOptions) -> EntryResult {
    let label = Some(entry.descriptor.label.clone());
    let outcome = match entry.kind {
        EntryKind::Manifold => analyze(&entry.descriptor, opts).map(Outcome::Manifold),
        EntryKind::Group => analyze_group(&entry.descriptor, opts).map(Outcome::Group),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            return EntryResult {
                file: file.into(),
                label,
                status: Status::Error,
                problems: vec![e.to_string()],
                report: None,
            }
        }
    };
    let mut problems = Vec::new();
    if let Some(exp) = &entry.expected {
        if let Some(b1) = exp.b1 {
            if outcome.b1() != b1 {
                problems.push(format!("b1: expected {b1}, got {}", outcome.b1()));
            }
        }
        if let (Some(want), Outcome::Manifold(r)) = (&exp.form, &outcome) {
            if r.form != *want {
                problems.push(format!("form: expected {want}, got {}", r.form));
            }
        }
        if let Some(want) = &exp.abelianization {
            match abelianization_of(&entry.descriptor) {
                Some(got) if got == *want => {}
                Some(got) => problems.push(format!("abelianization: expected {want}, got {got}")),
                None => problems.push("abelianization expected but no presentation given".into()),
            }
        }
    }
    EntryResult {
        file: file.into(),
        label,
        status: if problems.is_empty() {
            Status::Pass
        } else {
            Status::Fail
        },
        problems,
        report: Some(outcome),
    }
}

fn evaluate_file(path: &Path, opts: &AnalyzeOptions) -> EntryResult {
    let file = path
        .file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    let error = |msg: String| EntryResult {
        file: file.clone(),
        label: None,
        status: Status::Error,
        problems: vec![msg],
        report: None,
    };
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return error(format!("cannot read: {e}")),
    };
    match parse_entry(&text) {
        Ok(entry) => evaluate_entry(&file, &entry, opts),
        Err(e) => error(e.to_string()),
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CorpusRun {
    pub entries: Vec<EntryResult>,
    pub warnings: Vec<String>,
}

impl CorpusRun {
    /// 0 when every entry passes, 1 if any entry errored, otherwise 2.
    pub fn exit_code(&self) -> i32 {
        if self.entries.iter().any(|e| e.status == Status::Error) {
            1
        } else if self.entries.iter().any(|e| e.status == Status::Fail) {
            2
        } else {
            0
        }
    }

    /// Plain-text summary table: label | b1 | b2 | form | status.
    pub fn render_table(&self) -> String {
        let rows: Vec<[String; 5]> = self
            .entries
            .iter()
            .map(|e| {
                let label = e.label.clone().unwrap_or_else(|| e.file.clone());
                let (b1, b2, form) = match &e.report {
                    Some(Outcome::Manifold(r)) => {
                        (r.b1.to_string(), r.b2.to_string(), r.form.to_string())
                    }
                    Some(Outcome::Group(r)) => (r.b1.to_string(), "-".into(), "-".into()),
                    None => ("-".into(), "-".into(), "-".into()),
                };
                let status = match e.status {
                    Status::Pass => "PASS",
                    Status::Fail => "FAIL",
                    Status::Error => "ERROR",
                };
                [label, b1, b2, form, status.to_string()]
            })
            .collect();
        let header = ["label", "b1", "b2", "form", "status"].map(String::from);
        let mut widths = header.clone().map(|h| h.len());
        for r in &rows {
            for (w, cell) in widths.iter_mut().zip(r) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let line = |cells: &[String; 5]| {
            let padded: Vec<String> = cells
                .iter()
                .zip(widths)
                .map(|(c, w)| format!("{c:<w$}"))
                .collect();
            padded.join(" | ").trim_end().to_string()
        };
        let mut out = line(&header);
        out.push('\n');
        out.push_str(
            &widths
                .iter()
                .map(|w| "-".repeat(*w))
                .collect::<Vec<_>>()
                .join("-|-"),
        );
        out.push('\n');
        for (r, e) in rows.iter().zip(&self.entries) {
            out.push_str(&line(r));
            out.push('\n');
            for p in &e.problems {
                out.push_str(&format!("    {p}\n"));
            }
        }
        out
    }
}

/// JSON files of a corpus directory, in file-name order.
pub fn corpus_files(dir: &Path) -> io::Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)?
        .map(|e| e.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    files.retain(|p| p.is_file() && p.extension().is_some_and(|x| x == "json"));
    files.sort();
    Ok(files)
}

/// Evaluates every entry of a corpus directory. Entries fail independently.
///
/// With `threads = Some(n)`, `n > 1`, entries run on a dedicated pool of `n`
/// threads; results come back in file order either way.
pub fn run_corpus(
    dir: &Path,
    opts: &AnalyzeOptions,
    threads: Option<usize>,
) -> io::Result<CorpusRun> {
    let files = corpus_files(dir)?;
    let mut warnings = Vec::new();
    if files.is_empty() {
        warnings.push(format!("no corpus entries (*.json) in {}", dir.display()));
    }
    let entries = match threads {
        Some(n) if n > 1 => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(io::Error::other)?;
            pool.install(|| files.par_iter().map(|f| evaluate_file(f, opts)).collect())
        }
        _ => files.iter().map(|f| evaluate_file(f, opts)).collect(),
    };
    Ok(CorpusRun { entries, warnings })
}
