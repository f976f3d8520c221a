//! Exact topological invariants of flat and almost-flat 4-manifolds.
//!
//! Starting from an algebraic description of the fundamental group (a finite
//! presentation, holonomy matrices, or the underlying crystallographic group),
//! the pipeline computes the first Betti number, the second Betti number via
//! the Euler relation, and the class of the intersection form. All arithmetic
//! is exact.
//!
//! - [`linalg`]: integer matrices, Smith and Hermite normal forms, kernels.
//! - [`grouppres`]: presentation parser and abelianization.
//! - [`crystal`]: holonomy groups, fixed sublattices, descriptors.
//! - [`forms`]: symmetric bilinear forms and their classification.
//! - [`classify`]: the end-to-end manifold report.
//! - [`format`] and [`corpus`]: JSON files and the batch harness.

pub mod classify;
pub mod corpus;
pub mod crystal;
pub mod format;
pub mod forms;
pub mod grouppres;
pub mod linalg;

pub use classify::{analyze, AnalyzeOptions, ManifoldReport};
pub use crystal::{AlmostBieberbachDescriptor, CrystalGroup, Route};
pub use forms::{FormClass, SymForm};
pub use grouppres::{AbelianInvariants, Presentation};
pub use linalg::IntMatrix;
