//! Crystallographic and almost-Bieberbach group descriptors.
//!
//! The first Betti number of a Bieberbach group is the rank of the sublattice
//! fixed by its holonomy. An almost-Bieberbach group `E` with 2-step nilpotent
//! `N` has the same first Betti number as its underlying crystallographic
//! group `E / √[N,N]`, so descriptors can carry either a presentation of `E`,
//! holonomy data, or the underlying group, and every route present must agree.

use std::collections::{HashSet, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Serialize;
use thiserror::Error;

use crate::grouppres::{first_betti, Presentation};
use crate::linalg::{determinant, kernel_basis, rank, IntMatrix};

pub const DEFAULT_MAX_GROUP_ORDER: usize = 10_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CrystalError {
    #[error("holonomy generator {index} is {rows}x{cols}, expected {dim}x{dim}")]
    DimensionMismatch {
        index: usize,
        rows: usize,
        cols: usize,
        dim: usize,
    },
    #[error("holonomy generator {index} has determinant {det}, not ±1")]
    NotUnimodular { index: usize, det: BigInt },
    #[error("holonomy group has more than {bound} elements")]
    NotFinite { bound: usize },
    #[error("affine parts: {0}")]
    AffineMismatch(String),
    #[error("b1 routes disagree: {first_route} gives {first}, {second_route} gives {second}")]
    InconsistentRoutes {
        first_route: Route,
        first: usize,
        second_route: Route,
        second: usize,
    },
    #[error("descriptor `{0}` has no presentation, holonomy or underlying group")]
    MissingData(String),
    #[error("invalid descriptor `{label}`: {message}")]
    InvalidDescriptor { label: String, message: String },
}

/// How a first Betti number was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Route {
    /// Abelianization of a presentation of the group itself.
    Presentation,
    /// Fixed sublattice of the group's own holonomy (flat case).
    Holonomy,
    /// Through the underlying crystallographic group.
    Underlying,
}

impl fmt::Display for Route {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Route::Presentation => "presentation",
            Route::Holonomy => "holonomy",
            Route::Underlying => "underlying",
        })
    }
}

/// Lattice ℤ^dim with an integral holonomy action, optionally with the
/// translation parts of the generators. The translations are kept for the
/// record; b₁ depends only on the linear action.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CrystalGroup {
    pub label: String,
    dim: usize,
    holonomy_gens: Vec<IntMatrix>,
    affine_parts: Option<Vec<Vec<BigRational>>>,
}

impl CrystalGroup {
    /// Checks generator shapes, unimodularity and the alignment of affine
    /// parts. Finiteness is checked separately by [`enumerate_point_group`].
    pub fn new(
        label: impl Into<String>,
        dim: usize,
        holonomy_gens: Vec<IntMatrix>,
        affine_parts: Option<Vec<Vec<BigRational>>>,
    ) -> Result<Self, CrystalError> {
        for (index, g) in holonomy_gens.iter().enumerate() {
            if g.shape() != (dim, dim) {
                return Err(CrystalError::DimensionMismatch {
                    index,
                    rows: g.rows(),
                    cols: g.cols(),
                    dim,
                });
            }
            let det = determinant(g).expect("square");
            if !det.abs().is_one() {
                return Err(CrystalError::NotUnimodular { index, det });
            }
        }
        if let Some(parts) = &affine_parts {
            if parts.len() != holonomy_gens.len() {
                return Err(CrystalError::AffineMismatch(format!(
                    "{} translation vectors for {} generators",
                    parts.len(),
                    holonomy_gens.len()
                )));
            }
            if let Some(i) = parts.iter().position(|p| p.len() != dim) {
                return Err(CrystalError::AffineMismatch(format!(
                    "translation {i} has length {}, expected {dim}",
                    parts[i].len()
                )));
            }
        }
        Ok(CrystalGroup {
            label: label.into(),
            dim,
            holonomy_gens,
            affine_parts,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn holonomy_gens(&self) -> &[IntMatrix] {
        &self.holonomy_gens
    }

    pub fn affine_parts(&self) -> Option<&[Vec<BigRational>]> {
        self.affine_parts.as_deref()
    }

    /// Same lattice, every generator replaced by `c⁻¹ g c`.
    pub fn conjugated(&self, c: &IntMatrix, c_inv: &IntMatrix) -> Result<Self, CrystalError> {
        let gens = self
            .holonomy_gens
            .iter()
            .map(|g| &(c_inv * g) * c)
            .collect();
        CrystalGroup::new(self.label.clone(), self.dim, gens, None)
    }
}

/// All elements of the group generated by the holonomy, breadth first from
/// the identity, multiplying on the right by the generators in the given
/// order.
pub fn enumerate_point_group(
    g: &CrystalGroup,
    max_order: usize,
) -> Result<Vec<IntMatrix>, CrystalError> {
    let identity = IntMatrix::identity(g.dim);
    let mut seen: HashSet<IntMatrix> = HashSet::new();
    let mut order = vec![identity.clone()];
    let mut queue = VecDeque::from([identity.clone()]);
    seen.insert(identity);
    while let Some(h) = queue.pop_front() {
        for gen in &g.holonomy_gens {
            let next = &h * gen;
            if seen.contains(&next) {
                continue;
            }
            if order.len() >= max_order {
                return Err(CrystalError::NotFinite { bound: max_order });
            }
            seen.insert(next.clone());
            order.push(next.clone());
            queue.push_back(next);
        }
    }
    Ok(order)
}

/// Stacked `h - I` over the generators; its kernel is the fixed sublattice.
fn fixed_point_system(dim: usize, gens: &[IntMatrix]) -> IntMatrix {
    let id = IntMatrix::identity(dim);
    let blocks: Vec<IntMatrix> = gens.iter().map(|h| h.sub(&id)).collect();
    IntMatrix::vstack(dim, &blocks)
}

/// Rank of `{z ∈ ℤ^dim : h z = z for all holonomy generators h}`.
///
/// A vector fixed by the generators is fixed by the whole group, so the
/// generators suffice; the closure is still enumerated to reject infinite
/// holonomy.
pub fn fixed_sublattice_rank(g: &CrystalGroup, max_order: usize) -> Result<usize, CrystalError> {
    enumerate_point_group(g, max_order)?;
    Ok(g.dim - rank(&fixed_point_system(g.dim, &g.holonomy_gens)))
}

/// Basis of the fixed sublattice, as columns.
pub fn fixed_sublattice_basis(
    g: &CrystalGroup,
    max_order: usize,
) -> Result<IntMatrix, CrystalError> {
    enumerate_point_group(g, max_order)?;
    Ok(kernel_basis(&fixed_point_system(g.dim, &g.holonomy_gens)))
}

/// First Betti number of a Bieberbach group from its holonomy.
pub fn betti_via_holonomy(g: &CrystalGroup, max_order: usize) -> Result<usize, CrystalError> {
    fixed_sublattice_rank(g, max_order)
}

/// The underlying crystallographic group `Q = E / √[N,N]`, by presentation,
/// by holonomy data, or both.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct UnderlyingGroup {
    pub label: String,
    pub crystal: Option<CrystalGroup>,
    pub presentation: Option<Presentation>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlmostBieberbachDescriptor {
    pub label: String,
    /// Dimension of the manifold (Hirsch length of the group).
    pub dim: usize,
    /// Nilpotency class of the Fitting subgroup `N`; 1 is the flat case.
    pub nilpotency_class: u8,
    pub orientable: bool,
    pub spin: bool,
    /// Marks the 4-torus, the only case allowed to reach b₁ = 4.
    pub is_torus: bool,
    /// Holonomy of the group itself; only meaningful when `N` is abelian.
    pub holonomy: Option<CrystalGroup>,
    pub presentation: Option<Presentation>,
    pub underlying: Option<UnderlyingGroup>,
}

impl AlmostBieberbachDescriptor {
    pub fn validate(&self) -> Result<(), CrystalError> {
        let invalid = |message: String| CrystalError::InvalidDescriptor {
            label: self.label.clone(),
            message,
        };
        if !(1..=3).contains(&self.nilpotency_class) {
            return Err(invalid(format!(
                "nilpotency class {} outside 1..=3",
                self.nilpotency_class
            )));
        }
        if self.presentation.is_none() && self.holonomy.is_none() && self.underlying.is_none() {
            return Err(CrystalError::MissingData(self.label.clone()));
        }
        if let Some(h) = &self.holonomy {
            if self.nilpotency_class != 1 {
                return Err(invalid(
                    "holonomy data on the group itself requires nilpotency class 1; \
                     use the underlying group instead"
                        .into(),
                ));
            }
            if h.dim() != self.dim {
                return Err(invalid(format!(
                    "holonomy acts on rank {} lattice, descriptor dimension is {}",
                    h.dim(),
                    self.dim
                )));
            }
        }
        if let Some(u) = &self.underlying {
            if u.crystal.is_none() && u.presentation.is_none() {
                return Err(invalid("underlying group carries no data".into()));
            }
        }
        if self.is_torus && self.nilpotency_class != 1 {
            return Err(invalid("the torus is flat (nilpotency class 1)".into()));
        }
        Ok(())
    }
}

/// b₁ together with the route it was read from and every route checked.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BettiDerivation {
    pub b1: usize,
    pub route: Route,
    pub checked: Vec<(Route, usize)>,
}

/// First Betti number of the group, by every route the descriptor supports.
///
/// Routes in order of preference: presentation of the group, its own
/// holonomy, then the underlying group (presentation before holonomy). The
/// first one available is reported; all of them must agree.
pub fn underlying_betti(
    d: &AlmostBieberbachDescriptor,
    max_order: usize,
) -> Result<BettiDerivation, CrystalError> {
    d.validate()?;
    let mut checked = Vec::new();
    if let Some(p) = &d.presentation {
        checked.push((Route::Presentation, first_betti(p)));
    }
    if let Some(h) = &d.holonomy {
        checked.push((Route::Holonomy, betti_via_holonomy(h, max_order)?));
    }
    if let Some(u) = &d.underlying {
        if let Some(p) = &u.presentation {
            checked.push((Route::Underlying, first_betti(p)));
        }
        if let Some(c) = &u.crystal {
            checked.push((Route::Underlying, betti_via_holonomy(c, max_order)?));
        }
    }
    let (route, b1) = *checked
        .first()
        .ok_or_else(|| CrystalError::MissingData(d.label.clone()))?;
    if let Some(&(second_route, second)) = checked.iter().find(|(_, b)| *b != b1) {
        return Err(CrystalError::InconsistentRoutes {
            first_route: route,
            first: b1,
            second_route,
            second,
        });
    }
    Ok(BettiDerivation { b1, route, checked })
}
