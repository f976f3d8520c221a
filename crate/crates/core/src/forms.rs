//! Symmetric integral bilinear forms.
//!
//! Parity, unimodularity and signature are computed exactly. The signature
//! comes from the integer characteristic polynomial: a real symmetric matrix
//! has only real eigenvalues, so Descartes' rule of signs counts the positive
//! and negative roots with multiplicity, with no approximation involved.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::linalg::{determinant, IntMatrix, LinalgError};

/// Largest search space `equivalent_small` will walk per column.
pub const MAX_SEARCH_VECTORS: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FormError {
    #[error(transparent)]
    Matrix(#[from] LinalgError),
    #[error("form matrix is {rows}x{cols}, expected square")]
    NotSquare { rows: usize, cols: usize },
    #[error("form matrix is not symmetric at ({row}, {col})")]
    NotSymmetric { row: usize, col: usize },
    #[error("forms have different ranks {left} and {right}")]
    RankMismatch { left: usize, right: usize },
    #[error("form entries too large for the bounded search")]
    EntryTooLarge,
    #[error("search space of {0} vectors per column is too large")]
    SearchTooLarge(u64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Parity {
    Even,
    Odd,
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// A symmetric bilinear form on ℤ^n given by its Gram matrix.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SymForm {
    q: IntMatrix,
}

impl SymForm {
    pub fn new(q: IntMatrix) -> Result<Self, FormError> {
        if !q.is_square() {
            return Err(FormError::NotSquare {
                rows: q.rows(),
                cols: q.cols(),
            });
        }
        for i in 0..q.rows() {
            for j in 0..i {
                if q[(i, j)] != q[(j, i)] {
                    return Err(FormError::NotSymmetric { row: i, col: j });
                }
            }
        }
        Ok(SymForm { q })
    }

    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Result<Self, FormError> {
        Self::new(IntMatrix::from_rows(rows))
    }

    pub fn empty() -> Self {
        SymForm {
            q: IntMatrix::zeros(0, 0),
        }
    }

    pub fn rank(&self) -> usize {
        self.q.rows()
    }

    pub fn matrix(&self) -> &IntMatrix {
        &self.q
    }

    pub fn into_matrix(self) -> IntMatrix {
        self.q
    }

    /// `aᵀ q b`.
    pub fn evaluate(&self, a: &[BigInt], b: &[BigInt]) -> BigInt {
        assert_eq!(a.len(), self.rank());
        assert_eq!(b.len(), self.rank());
        let mut acc = BigInt::zero();
        for (i, ai) in a.iter().enumerate() {
            if ai.is_zero() {
                continue;
            }
            for (j, bj) in b.iter().enumerate() {
                acc += ai * &self.q[(i, j)] * bj;
            }
        }
        acc
    }

    pub fn direct_sum(&self, other: &SymForm) -> SymForm {
        SymForm {
            q: self.q.direct_sum(&other.q),
        }
    }

    pub fn negated(&self) -> SymForm {
        SymForm { q: self.q.neg() }
    }

    /// The form in the basis given by the columns of `u`: `uᵀ q u`.
    pub fn transformed(&self, u: &IntMatrix) -> Result<SymForm, FormError> {
        let q = u.transpose().checked_mul(&self.q)?.checked_mul(u)?;
        SymForm::new(q)
    }

    pub fn determinant(&self) -> BigInt {
        determinant(&self.q).expect("form matrix is square")
    }
}

/// Same text format as [`IntMatrix`], with symmetry checked.
impl FromStr for SymForm {
    type Err = FormError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        SymForm::new(s.parse()?)
    }
}

impl fmt::Display for SymForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.q.fmt(f)
    }
}

/// Equivalence class of a form, as far as the recognizer decides it.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum FormClass {
    Zero,
    /// `n` orthogonal copies of the hyperbolic plane, `n ≥ 1`.
    Hyperbolic(usize),
    Other {
        rank: usize,
        signature: i64,
        parity: Parity,
        det_abs: BigInt,
    },
}

impl FormClass {
    /// `nH`, with `0H` normalized to [`FormClass::Zero`].
    pub fn hyperbolic(n: usize) -> Self {
        if n == 0 {
            FormClass::Zero
        } else {
            FormClass::Hyperbolic(n)
        }
    }

    pub fn rank(&self) -> usize {
        match self {
            FormClass::Zero => 0,
            FormClass::Hyperbolic(n) => 2 * n,
            FormClass::Other { rank, .. } => *rank,
        }
    }

    /// Number of hyperbolic summands, if the class is `nH` (including `0`).
    pub fn hyperbolic_multiplicity(&self) -> Option<usize> {
        match self {
            FormClass::Zero => Some(0),
            FormClass::Hyperbolic(n) => Some(*n),
            FormClass::Other { .. } => None,
        }
    }
}

/// `0`, `nH`, or `Other(rank r, signature s, parity, |det| d)`.
impl fmt::Display for FormClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FormClass::Zero => f.write_str("0"),
            FormClass::Hyperbolic(n) => write!(f, "{n}H"),
            FormClass::Other {
                rank,
                signature,
                parity,
                det_abs,
            } => write!(
                f,
                "Other(rank {rank}, signature {signature}, {parity}, |det| {det_abs})"
            ),
        }
    }
}

impl Serialize for FormClass {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            FormClass::Zero => {
                let mut m = serializer.serialize_map(Some(2))?;
                m.serialize_entry("type", "zero")?;
                m.serialize_entry("n", &0)?;
                m.end()
            }
            FormClass::Hyperbolic(n) => {
                let mut m = serializer.serialize_map(Some(2))?;
                m.serialize_entry("type", "hyperbolic")?;
                m.serialize_entry("n", n)?;
                m.end()
            }
            FormClass::Other {
                rank,
                signature,
                parity,
                det_abs,
            } => {
                let mut m = serializer.serialize_map(Some(5))?;
                m.serialize_entry("type", "other")?;
                m.serialize_entry("rank", rank)?;
                m.serialize_entry("signature", signature)?;
                m.serialize_entry("parity", parity)?;
                m.serialize_entry("det", &det_abs.to_string())?;
                m.end()
            }
        }
    }
}

/// `n` orthogonal copies of `[[0,1],[1,0]]`.
pub fn hyperbolic(n: usize) -> SymForm {
    let mut q = IntMatrix::zeros(2 * n, 2 * n);
    for k in 0..n {
        q[(2 * k, 2 * k + 1)] = BigInt::one();
        q[(2 * k + 1, 2 * k)] = BigInt::one();
    }
    SymForm { q }
}

/// `f(a,a)` is even for every integral `a` exactly when every diagonal entry
/// is even, since `aᵀqa ≡ Σ qᵢᵢaᵢ² (mod 2)`.
pub fn is_even(f: &SymForm) -> bool {
    (0..f.rank()).all(|i| f.q[(i, i)].is_even())
}

pub fn parity(f: &SymForm) -> Parity {
    if is_even(f) {
        Parity::Even
    } else {
        Parity::Odd
    }
}

pub fn is_unimodular(f: &SymForm) -> bool {
    f.determinant().abs().is_one()
}

/// Characteristic polynomial `det(xI - q)`, coefficients from degree 0 up,
/// by the Faddeev-LeVerrier recurrence. The divisions are exact over ℤ.
pub fn characteristic_polynomial(q: &IntMatrix) -> Vec<BigInt> {
    assert!(q.is_square());
    let n = q.rows();
    let mut coeffs = vec![BigInt::zero(); n + 1];
    coeffs[n] = BigInt::one();
    let mut m = IntMatrix::zeros(n, n);
    for k in 1..=n {
        let mut next = q * &m;
        for i in 0..n {
            next[(i, i)] += &coeffs[n - k + 1];
        }
        m = next;
        let am = q * &m;
        let trace: BigInt = (0..n).map(|i| am[(i, i)].clone()).sum();
        let (quot, rem) = trace.div_rem(&BigInt::from(k));
        debug_assert!(rem.is_zero());
        coeffs[n - k] = -quot;
    }
    coeffs
}

fn sign_changes<'a>(seq: impl Iterator<Item = &'a BigInt>, alternate: bool) -> usize {
    let mut last: Option<bool> = None;
    let mut changes = 0;
    for (i, c) in seq.enumerate() {
        if c.is_zero() {
            continue;
        }
        let positive = c.is_positive() ^ (alternate && i % 2 == 1);
        if last.is_some_and(|l| l != positive) {
            changes += 1;
        }
        last = Some(positive);
    }
    changes
}

/// Number of positive, negative and zero eigenvalues, with multiplicity.
pub fn inertia(f: &SymForm) -> (usize, usize, usize) {
    let p = characteristic_polynomial(&f.q);
    let zeros = p.iter().take_while(|c| c.is_zero()).count();
    let rest = &p[zeros..];
    // p(-x) flips the sign of odd-degree terms; the parity shift from
    // stripping x^zeros does not change the count of sign changes.
    let pos = sign_changes(rest.iter(), false);
    let neg = sign_changes(rest.iter(), true);
    (pos, neg, zeros)
}

pub fn signature(f: &SymForm) -> i64 {
    let (pos, neg, _) = inertia(f);
    pos as i64 - neg as i64
}

/// Recognizes `nH` among the indefinite even unimodular forms.
///
/// Even, unimodular, signature 0 and nonzero rank gives `Hyperbolic(rank/2)`;
/// by the classification of indefinite even unimodular forms this is the
/// actual isometry class. Anything else is reported as `Other` with its
/// invariants, including degenerate forms (`|det| = 0`).
pub fn classify(f: &SymForm) -> FormClass {
    let rank = f.rank();
    if rank == 0 {
        return FormClass::Zero;
    }
    let det_abs = f.determinant().abs();
    let parity = parity(f);
    let signature = signature(f);
    if parity == Parity::Even && det_abs.is_one() && signature == 0 && rank % 2 == 0 {
        FormClass::Hyperbolic(rank / 2)
    } else {
        FormClass::Other {
            rank,
            signature,
            parity,
            det_abs,
        }
    }
}

struct Candidate {
    coords: Vec<i64>,
    /// q1 · coords
    image: Vec<i64>,
    norm: i64,
}

fn dot(a: &[i64], b: &[i64]) -> Option<i64> {
    a.iter()
        .zip(b)
        .try_fold(0i64, |acc, (x, y)| acc.checked_add(x.checked_mul(*y)?))
}

/// Searches for `U` with entries in `[-bound, bound]`, `det U = ±1` and
/// `Uᵀ q1 U = q2`.
///
/// Columns are fixed left to right; after choosing `k` columns the leading
/// `k x k` block of `Uᵀ q1 U` must already agree with `q2`. Candidate columns
/// are tried in lexicographic order, so the witness returned is the
/// lexicographically first one (reading `U` column by column). `None` only
/// means nothing was found within the bound.
pub fn equivalent_small(
    f1: &SymForm,
    f2: &SymForm,
    bound: u32,
) -> Result<Option<IntMatrix>, FormError> {
    let n = f1.rank();
    if n != f2.rank() {
        return Err(FormError::RankMismatch {
            left: n,
            right: f2.rank(),
        });
    }
    if n == 0 {
        return Ok(Some(IntMatrix::zeros(0, 0)));
    }
    let q1 = f1.q.to_i64_rows().ok_or(FormError::EntryTooLarge)?;
    let q2 = f2.q.to_i64_rows().ok_or(FormError::EntryTooLarge)?;
    let b = i64::from(bound);
    let side = 2 * u64::from(bound) + 1;
    let total = side
        .checked_pow(n as u32)
        .filter(|&t| t <= MAX_SEARCH_VECTORS)
        .ok_or(FormError::SearchTooLarge(side.saturating_pow(n as u32)))?;

    let mut candidates = Vec::new();
    let mut coords = vec![-b; n];
    for _ in 0..total {
        if coords.iter().any(|&c| c != 0) {
            let image: Option<Vec<i64>> = q1.iter().map(|row| dot(row, &coords)).collect();
            let image = image.ok_or(FormError::EntryTooLarge)?;
            let norm = dot(&coords, &image).ok_or(FormError::EntryTooLarge)?;
            candidates.push(Candidate {
                coords: coords.clone(),
                image,
                norm,
            });
        }
        // lexicographic increment, last coordinate fastest
        for c in coords.iter_mut().rev() {
            if *c < b {
                *c += 1;
                break;
            }
            *c = -b;
        }
    }

    let mut chosen: Vec<usize> = Vec::with_capacity(n);
    if search_columns(&candidates, &q2, &mut chosen) {
        let mut u = IntMatrix::zeros(n, n);
        for (j, &ci) in chosen.iter().enumerate() {
            for (i, &x) in candidates[ci].coords.iter().enumerate() {
                u[(i, j)] = BigInt::from(x);
            }
        }
        return Ok(Some(u));
    }
    Ok(None)
}

fn search_columns(cands: &[Candidate], q2: &[Vec<i64>], chosen: &mut Vec<usize>) -> bool {
    let n = q2.len();
    let j = chosen.len();
    if j == n {
        return unimodular_columns(cands, chosen);
    }
    for (ci, c) in cands.iter().enumerate() {
        if c.norm != q2[j][j] {
            continue;
        }
        let consistent = chosen
            .iter()
            .enumerate()
            .all(|(i, &prev)| dot(&cands[prev].coords, &c.image) == Some(q2[i][j]));
        if !consistent {
            continue;
        }
        chosen.push(ci);
        if search_columns(cands, q2, chosen) {
            return true;
        }
        chosen.pop();
    }
    false
}

fn unimodular_columns(cands: &[Candidate], chosen: &[usize]) -> bool {
    let n = chosen.len();
    let mut u = IntMatrix::zeros(n, n);
    for (j, &ci) in chosen.iter().enumerate() {
        for (i, &x) in cands[ci].coords.iter().enumerate() {
            u[(i, j)] = BigInt::from(x);
        }
    }
    determinant(&u).is_ok_and(|d| d.abs().is_one())
}

/// Cup-product pairing on Λ²(ℤ⁴), the second cohomology of the 4-torus.
///
/// Basis e₁∧e₂, e₁∧e₃, e₁∧e₄, e₂∧e₃, e₂∧e₄, e₃∧e₄. The pairing of `eᵢ∧eⱼ`
/// with `eₖ∧eₗ` is the sign of the permutation `(i j k l)` when the index
/// sets are disjoint and 0 otherwise.
pub fn torus_form_oracle() -> SymForm {
    let basis: Vec<[usize; 2]> = (0..4)
        .flat_map(|i| (i + 1..4).map(move |j| [i, j]))
        .collect();
    let mut q = IntMatrix::zeros(basis.len(), basis.len());
    for (a, x) in basis.iter().enumerate() {
        for (b, y) in basis.iter().enumerate() {
            let perm = [x[0], x[1], y[0], y[1]];
            let disjoint = x.iter().all(|i| !y.contains(i));
            if disjoint {
                q[(a, b)] = BigInt::from(permutation_sign(&perm));
            }
        }
    }
    SymForm::new(q).expect("wedge pairing in even degree is symmetric")
}

fn permutation_sign(perm: &[usize]) -> i64 {
    let mut inversions = 0;
    for i in 0..perm.len() {
        for j in i + 1..perm.len() {
            if perm[i] > perm[j] {
                inversions += 1;
            }
        }
    }
    if inversions % 2 == 0 {
        1
    } else {
        -1
    }
}

/// Signature as an `i64`, or `None` if the form is degenerate.
pub fn nondegenerate_signature(f: &SymForm) -> Option<i64> {
    let (_, _, zeros) = inertia(f);
    (zeros == 0).then(|| signature(f))
}

impl FormClass {
    /// Parity and signature implied by the class.
    pub fn signature(&self) -> i64 {
        match self {
            FormClass::Zero | FormClass::Hyperbolic(_) => 0,
            FormClass::Other { signature, .. } => *signature,
        }
    }

    pub fn parity(&self) -> Parity {
        match self {
            FormClass::Zero | FormClass::Hyperbolic(_) => Parity::Even,
            FormClass::Other { parity, .. } => *parity,
        }
    }

    pub fn det_abs(&self) -> BigInt {
        match self {
            FormClass::Zero | FormClass::Hyperbolic(_) => BigInt::one(),
            FormClass::Other { det_abs, .. } => det_abs.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn form(rows: &[&[i64]]) -> SymForm {
        SymForm::from_rows(rows).unwrap()
    }

    #[test]
    fn hyperbolic_examples() {
        assert_eq!(hyperbolic(1), form(&[&[0, 1], &[1, 0]]));
        assert_eq!(hyperbolic(0).rank(), 0);
        assert_eq!(
            hyperbolic(2),
            form(&[&[0, 1, 0, 0], &[1, 0, 0, 0], &[0, 0, 0, 1], &[0, 0, 1, 0]])
        );
    }

    #[test]
    fn rejects_asymmetric() {
        assert_eq!(
            SymForm::from_rows(&[[0, 1], [2, 0]]),
            Err(FormError::NotSymmetric { row: 1, col: 0 })
        );
        assert!(matches!(
            "2 3\n0 0 0\n0 0 0".parse::<SymForm>(),
            Err(FormError::NotSquare { .. })
        ));
        assert!(matches!(
            "2 2\n0 1\n1 z".parse::<SymForm>(),
            Err(FormError::Matrix(LinalgError::Parse { line: 3, col: 3, .. }))
        ));
    }

    #[test]
    fn parity_examples() {
        assert!(is_even(&hyperbolic(1)));
        assert!(!is_even(&SymForm::new(IntMatrix::identity(2)).unwrap()));
        assert!(is_even(&SymForm::empty()));
    }

    #[test]
    fn unimodular_examples() {
        assert!(is_unimodular(&hyperbolic(1)));
        assert!(!is_unimodular(&form(&[&[2]])));
        assert!(is_unimodular(&SymForm::empty()));
    }

    #[test]
    fn signature_examples() {
        assert_eq!(signature(&hyperbolic(1)), 0);
        assert_eq!(signature(&SymForm::new(IntMatrix::identity(3)).unwrap()), 3);
        assert_eq!(
            signature(&SymForm::new(IntMatrix::from_diagonal_i64(&[1, -1, -1])).unwrap()),
            -1
        );
        assert_eq!(signature(&SymForm::empty()), 0);
        // degenerate: eigenvalues 0, 0, 2
        let degenerate = form(&[&[1, 1, 0], &[1, 1, 0], &[0, 0, 0]]);
        assert_eq!(inertia(&degenerate), (1, 0, 2));
        assert_eq!(nondegenerate_signature(&degenerate), None);
    }

    #[test]
    fn characteristic_polynomial_of_hyperbolic_plane() {
        let p = characteristic_polynomial(hyperbolic(1).matrix());
        let want: Vec<BigInt> = [-1, 0, 1].iter().map(|&x| BigInt::from(x)).collect();
        assert_eq!(p, want);
    }

    #[test]
    fn classify_examples() {
        assert_eq!(classify(&SymForm::empty()), FormClass::Zero);
        assert_eq!(
            classify(&SymForm::new(IntMatrix::identity(2)).unwrap()),
            FormClass::Other {
                rank: 2,
                signature: 2,
                parity: Parity::Odd,
                det_abs: BigInt::one()
            }
        );
        assert_eq!(classify(&hyperbolic(3)), FormClass::Hyperbolic(3));
        let degenerate = SymForm::new(IntMatrix::zeros(2, 2)).unwrap();
        assert!(matches!(
            classify(&degenerate),
            FormClass::Other { det_abs, .. } if det_abs.is_zero()
        ));
    }

    #[test]
    fn classify_scrambled_2h() {
        let u = IntMatrix::from_rows(&[[1, 2, 0, 1], [0, 1, 1, 0], [0, 0, 1, -2], [0, 0, 0, 1]]);
        let scrambled = hyperbolic(2).transformed(&u).unwrap();
        assert_eq!(classify(&scrambled), FormClass::Hyperbolic(2));
        let w = equivalent_small(&hyperbolic(2), &scrambled, 2).unwrap().unwrap();
        assert_eq!(hyperbolic(2).transformed(&w).unwrap(), scrambled);
    }

    #[test]
    fn equivalent_small_examples() {
        let swapped = form(&[&[0, 1], &[1, 0]]);
        let u = equivalent_small(&hyperbolic(1), &swapped, 1).unwrap().unwrap();
        assert_eq!(hyperbolic(1).transformed(&u).unwrap(), swapped);

        let odd = SymForm::new(IntMatrix::from_diagonal_i64(&[1, -1])).unwrap();
        assert_eq!(equivalent_small(&hyperbolic(1), &odd, 3).unwrap(), None);

        assert_eq!(
            equivalent_small(&hyperbolic(1), &hyperbolic(2), 1),
            Err(FormError::RankMismatch { left: 2, right: 4 })
        );
        assert!(matches!(
            equivalent_small(&hyperbolic(4), &hyperbolic(4), 100),
            Err(FormError::SearchTooLarge(_))
        ));
    }

    #[test]
    fn equivalent_small_is_lexicographically_first() {
        // H is its own image under [[-1,0],[0,-1]], the lexicographically
        // smallest automorphism with entries in [-1, 1].
        let u = equivalent_small(&hyperbolic(1), &hyperbolic(1), 1).unwrap().unwrap();
        assert_eq!(u, IntMatrix::from_rows(&[[-1, 0], [0, -1]]));
    }

    #[test]
    fn torus_oracle_shape() {
        let t = torus_form_oracle();
        assert_eq!(t.rank(), 6);
        assert_eq!(t.matrix()[(0, 5)], BigInt::one());
        assert_eq!(t.matrix()[(1, 4)], BigInt::from(-1));
        assert_eq!(t.matrix()[(2, 3)], BigInt::one());
        assert!(is_even(&t));
        assert_eq!(t.determinant(), BigInt::from(-1));
        assert_eq!(signature(&t), 0);
        assert_eq!(classify(&t), FormClass::Hyperbolic(3));
    }

    #[test]
    fn class_display_and_json() {
        assert_eq!(FormClass::Zero.to_string(), "0");
        assert_eq!(FormClass::Hyperbolic(1).to_string(), "1H");
        assert_eq!(
            serde_json::to_string(&FormClass::Hyperbolic(2)).unwrap(),
            r#"{"type":"hyperbolic","n":2}"#
        );
        assert_eq!(
            serde_json::to_string(&FormClass::Zero).unwrap(),
            r#"{"type":"zero","n":0}"#
        );
        assert_eq!(FormClass::hyperbolic(0), FormClass::Zero);
    }
}
