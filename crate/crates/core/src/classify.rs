//! Descriptor → b₁ → b₂ → intersection form.
//!
//! An almost-flat 4-manifold has Euler characteristic 0, so Poincaré duality
//! gives `2 - 2·b₁ + b₂ = 0`. Its intersection form is even, and away from the
//! torus it is `(b₁ - 1)·H` with `1 ≤ b₁ ≤ 3`. The torus (b₁ = 4) is admitted
//! only when the descriptor says so, and its form `3H` is cross-checked
//! against the cup product on Λ²(ℤ⁴).

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::crystal::{underlying_betti, AlmostBieberbachDescriptor, CrystalError, Route};
use crate::forms::{self, FormClass, Parity};
use crate::grouppres::abelian_invariants;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClassifyError {
    #[error("`{0}` is not orientable; the intersection form needs a fundamental class")]
    NotOrientable(String),
    #[error("`{label}` has dimension {dim}, expected a 4-manifold")]
    NotFourDimensional { label: String, dim: usize },
    #[error("first Betti number {0} outside 1..=4")]
    BettiOutOfRange(usize),
    #[error("first Betti number {b1} with torus marker {is_torus}: only the torus has b1 = 4")]
    TorusMismatch { b1: usize, is_torus: bool },
    #[error("`{label}` is marked non-spin but has b1 = {b1}; non-spin almost-flat 4-manifolds have b1 = 1")]
    SpinInconsistency { label: String, b1: usize },
    #[error("internal consistency check failed: {0}")]
    Inconsistent(String),
    #[error(transparent)]
    Crystal(#[from] CrystalError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct AnalyzeOptions {
    /// A non-spin descriptor with b₁ ≠ 1 is an error rather than a warning.
    pub strict_spin: bool,
    pub max_group_order: usize,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions {
            strict_spin: true,
            max_group_order: crate::crystal::DEFAULT_MAX_GROUP_ORDER,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ManifoldReport {
    pub label: String,
    pub b1: usize,
    pub b2: usize,
    pub chi: i64,
    pub parity: Parity,
    pub form: FormClass,
    pub route: Route,
    pub warnings: Vec<String>,
}

impl fmt::Display for ManifoldReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}: b1={} b2={} chi={} {} form={} via {}",
            self.label, self.b1, self.b2, self.chi, self.parity, self.form, self.route
        )?;
        for w in &self.warnings {
            write!(f, "\n  warning: {w}")?;
        }
        Ok(())
    }
}

/// b₂ from b₁ through the Euler relation.
pub fn b2_from_b1(b1: usize) -> Result<usize, ClassifyError> {
    if !(1..=4).contains(&b1) {
        return Err(ClassifyError::BettiOutOfRange(b1));
    }
    Ok(2 * b1 - 2)
}

pub fn euler_characteristic(b1: usize, b2: usize) -> i64 {
    2 - 2 * b1 as i64 + b2 as i64
}

pub fn form_from_b1(b1: usize, is_torus: bool) -> Result<FormClass, ClassifyError> {
    match (b1, is_torus) {
        (1..=3, false) => Ok(FormClass::hyperbolic(b1 - 1)),
        (4, true) => Ok(FormClass::Hyperbolic(3)),
        (1..=4, _) => Err(ClassifyError::TorusMismatch { b1, is_torus }),
        _ => Err(ClassifyError::BettiOutOfRange(b1)),
    }
}

/// Materializes the form for `b1` and checks it against the class, rank and
/// parity the report claims.
fn check_form(b1: usize, b2: usize, is_torus: bool, form: &FormClass) -> Result<(), ClassifyError> {
    let concrete = if is_torus {
        forms::torus_form_oracle()
    } else {
        forms::hyperbolic(b1 - 1)
    };
    let checks = [
        (forms::classify(&concrete) == *form, "class"),
        (concrete.rank() == b2, "rank = b2"),
        (forms::is_even(&concrete), "evenness"),
        (forms::signature(&concrete) == 0, "signature 0"),
    ];
    match checks.iter().find(|(ok, _)| !ok) {
        Some((_, what)) => Err(ClassifyError::Inconsistent(format!(
            "materialized form for b1 = {b1} fails {what}"
        ))),
        None => Ok(()),
    }
}

pub fn analyze(
    d: &AlmostBieberbachDescriptor,
    opts: &AnalyzeOptions,
) -> Result<ManifoldReport, ClassifyError> {
    if !d.orientable {
        return Err(ClassifyError::NotOrientable(d.label.clone()));
    }
    if d.dim != 4 {
        return Err(ClassifyError::NotFourDimensional {
            label: d.label.clone(),
            dim: d.dim,
        });
    }
    let derivation = underlying_betti(d, opts.max_group_order)?;
    let b1 = derivation.b1;
    let b2 = b2_from_b1(b1)?;
    let mut warnings = Vec::new();
    if !d.spin && b1 != 1 {
        if opts.strict_spin {
            return Err(ClassifyError::SpinInconsistency {
                label: d.label.clone(),
                b1,
            });
        }
        warnings.push(format!(
            "marked non-spin but b1 = {b1}; expected b1 = 1 for non-spin manifolds"
        ));
    }
    let form = form_from_b1(b1, d.is_torus)?;
    check_form(b1, b2, d.is_torus, &form)?;
    let chi = euler_characteristic(b1, b2);
    if chi != 0 {
        return Err(ClassifyError::Inconsistent(format!("Euler characteristic {chi}")));
    }
    Ok(ManifoldReport {
        label: d.label.clone(),
        b1,
        b2,
        chi,
        parity: Parity::Even,
        form,
        route: derivation.route,
        warnings,
    })
}

/// b₁ (and, given a presentation, the full abelianization) of a group that is
/// not itself a closed oriented 4-manifold group.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct GroupReport {
    pub label: String,
    pub b1: usize,
    pub route: Route,
    pub abelianization: Option<String>,
    pub warnings: Vec<String>,
}

impl fmt::Display for GroupReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: b1={} via {}", self.label, self.b1, self.route)?;
        if let Some(ab) = &self.abelianization {
            write!(f, " H1={ab}")?;
        }
        for w in &self.warnings {
            write!(f, "\n  warning: {w}")?;
        }
        Ok(())
    }
}

pub fn analyze_group(
    d: &AlmostBieberbachDescriptor,
    opts: &AnalyzeOptions,
) -> Result<GroupReport, ClassifyError> {
    let derivation = underlying_betti(d, opts.max_group_order)?;
    let presentation = d
        .presentation
        .as_ref()
        .or_else(|| d.underlying.as_ref().and_then(|u| u.presentation.as_ref()));
    Ok(GroupReport {
        label: d.label.clone(),
        b1: derivation.b1,
        route: derivation.route,
        abelianization: presentation.map(|p| abelian_invariants(p).to_string()),
        warnings: Vec::new(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::crystal::{CrystalGroup, UnderlyingGroup};
    use crate::linalg::IntMatrix;

    fn flat(label: &str, gens: Vec<IntMatrix>) -> AlmostBieberbachDescriptor {
        AlmostBieberbachDescriptor {
            label: label.into(),
            dim: 4,
            nilpotency_class: 1,
            orientable: true,
            spin: true,
            is_torus: false,
            holonomy: Some(CrystalGroup::new(label, 4, gens, None).unwrap()),
            presentation: None,
            underlying: None,
        }
    }

    #[test]
    fn b2_examples() {
        assert_eq!(b2_from_b1(1).unwrap(), 0);
        assert_eq!(b2_from_b1(2).unwrap(), 2);
        assert_eq!(b2_from_b1(4).unwrap(), 6);
        assert_eq!(b2_from_b1(0), Err(ClassifyError::BettiOutOfRange(0)));
        assert_eq!(b2_from_b1(5), Err(ClassifyError::BettiOutOfRange(5)));
    }

    #[test]
    fn form_examples() {
        assert_eq!(form_from_b1(1, false).unwrap(), FormClass::Zero);
        assert_eq!(form_from_b1(2, false).unwrap(), FormClass::Hyperbolic(1));
        assert_eq!(form_from_b1(3, false).unwrap(), FormClass::Hyperbolic(2));
        assert_eq!(form_from_b1(4, true).unwrap(), FormClass::Hyperbolic(3));
        assert_eq!(
            form_from_b1(4, false),
            Err(ClassifyError::TorusMismatch { b1: 4, is_torus: false })
        );
        assert_eq!(
            form_from_b1(2, true),
            Err(ClassifyError::TorusMismatch { b1: 2, is_torus: true })
        );
        assert_eq!(form_from_b1(0, false), Err(ClassifyError::BettiOutOfRange(0)));
        assert_eq!(form_from_b1(7, true), Err(ClassifyError::BettiOutOfRange(7)));
    }

    #[test]
    fn torus_report() {
        let mut d = flat("T4", vec![]);
        d.is_torus = true;
        let r = analyze(&d, &AnalyzeOptions::default()).unwrap();
        assert_eq!((r.b1, r.b2, r.chi), (4, 6, 0));
        assert_eq!(r.form, FormClass::Hyperbolic(3));
        assert_eq!(r.route, Route::Holonomy);

        d.is_torus = false;
        assert!(matches!(
            analyze(&d, &AnalyzeOptions::default()),
            Err(ClassifyError::TorusMismatch { b1: 4, .. })
        ));
    }

    #[test]
    fn half_turn_bieberbach_is_h() {
        let d = flat("G2xS1", vec![IntMatrix::from_diagonal_i64(&[1, 1, -1, -1])]);
        let r = analyze(&d, &AnalyzeOptions::default()).unwrap();
        assert_eq!((r.b1, r.b2), (2, 2));
        assert_eq!(r.form, FormClass::Hyperbolic(1));
    }

    #[test]
    fn non_spin_underlying_c2_is_zero() {
        let c2 = "< t1,t2,t3,al | [t1,t2], [t1,t3], [t2,t3], al^2 = t1, \
                  al*t2*al^-1 = t2^-1, al*t3*al^-1 = t3^-1 >";
        let d = AlmostBieberbachDescriptor {
            label: "AB-case5-Z2".into(),
            dim: 4,
            nilpotency_class: 2,
            orientable: true,
            spin: false,
            is_torus: false,
            holonomy: None,
            presentation: None,
            underlying: Some(UnderlyingGroup {
                label: "C2".into(),
                crystal: None,
                presentation: Some(c2.parse().unwrap()),
            }),
        };
        let r = analyze(&d, &AnalyzeOptions::default()).unwrap();
        assert_eq!((r.b1, r.b2), (1, 0));
        assert_eq!(r.form, FormClass::Zero);
        assert_eq!(r.route, Route::Underlying);
        assert!(r.warnings.is_empty());
    }

    #[test]
    fn spin_inconsistency_strict_and_lenient() {
        let mut d = flat("bad-spin", vec![IntMatrix::from_diagonal_i64(&[1, 1, -1, -1])]);
        d.spin = false;
        assert_eq!(
            analyze(&d, &AnalyzeOptions::default()),
            Err(ClassifyError::SpinInconsistency {
                label: "bad-spin".into(),
                b1: 2
            })
        );
        let lenient = AnalyzeOptions {
            strict_spin: false,
            ..AnalyzeOptions::default()
        };
        let r = analyze(&d, &lenient).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.form, FormClass::Hyperbolic(1));
    }

    #[test]
    fn rejects_non_orientable_and_wrong_dimension() {
        let mut d = flat("refl", vec![IntMatrix::from_diagonal_i64(&[1, 1, 1, -1])]);
        d.orientable = false;
        assert_eq!(
            analyze(&d, &AnalyzeOptions::default()),
            Err(ClassifyError::NotOrientable("refl".into()))
        );
        let mut d = flat("minus", vec![IntMatrix::identity(4).neg()]);
        assert_eq!(
            analyze(&d, &AnalyzeOptions::default()),
            Err(ClassifyError::BettiOutOfRange(0))
        );
        d.dim = 3;
        assert!(matches!(
            analyze(&d, &AnalyzeOptions::default()),
            Err(ClassifyError::NotFourDimensional { dim: 3, .. })
        ));
    }

    #[test]
    fn report_json_layout() {
        let d = flat("G2xS1", vec![IntMatrix::from_diagonal_i64(&[1, 1, -1, -1])]);
        let r = analyze(&d, &AnalyzeOptions::default()).unwrap();
        assert_eq!(
            serde_json::to_string(&r).unwrap(),
            r#"{"label":"G2xS1","b1":2,"b2":2,"chi":0,"parity":"even","form":{"type":"hyperbolic","n":1},"route":"holonomy","warnings":[]}"#
        );
    }
}
