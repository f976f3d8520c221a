//! Exact integer matrix algebra.
//!
//! Everything here works over arbitrary-precision integers: Smith and Hermite
//! normal forms with their transformation matrices, ranks, integral kernels and
//! determinants. Empty matrices (zero rows or zero columns) are legal inputs for
//! every operation.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LinalgError {
    #[error("expected {expected} entries for a {rows}x{cols} matrix, got {actual}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected: usize,
        actual: usize,
    },
    #[error("row {row} has {len} entries, expected {expected}")]
    RaggedRows {
        row: usize,
        len: usize,
        expected: usize,
    },
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NonSquare { rows: usize, cols: usize },
    #[error("cannot multiply a {0}x{1} matrix by a {2}x{3} matrix")]
    IncompatibleProduct(usize, usize, usize, usize),
    #[error("{line}:{col}: {message}")]
    Parse {
        line: usize,
        col: usize,
        message: String,
    },
}

/// Dense row-major matrix of exact integers.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct IntMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BigInt>,
}

impl IntMatrix {
    pub fn new(rows: usize, cols: usize, data: Vec<BigInt>) -> Result<Self, LinalgError> {
        let expected = rows * cols;
        if data.len() != expected {
            return Err(LinalgError::ShapeMismatch {
                rows,
                cols,
                expected,
                actual: data.len(),
            });
        }
        Ok(IntMatrix { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        IntMatrix {
            rows,
            cols,
            data: vec![BigInt::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = BigInt::one();
        }
        m
    }

    /// Builds a matrix from machine-integer rows.
    ///
    /// Panics if the rows have different lengths; meant for literals. Use
    /// [`IntMatrix::try_from_rows`] for untrusted input.
    pub fn from_rows<R: AsRef<[i64]>>(rows: &[R]) -> Self {
        let rows: Vec<Vec<BigInt>> = rows
            .iter()
            .map(|r| r.as_ref().iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Self::try_from_rows(rows).expect("ragged matrix literal")
    }

    pub fn try_from_rows(rows: Vec<Vec<BigInt>>) -> Result<Self, LinalgError> {
        let ncols = rows.first().map_or(0, Vec::len);
        let nrows = rows.len();
        let mut data = Vec::with_capacity(nrows * ncols);
        for (i, row) in rows.into_iter().enumerate() {
            if row.len() != ncols {
                return Err(LinalgError::RaggedRows {
                    row: i,
                    len: row.len(),
                    expected: ncols,
                });
            }
            data.extend(row);
        }
        Ok(IntMatrix {
            rows: nrows,
            cols: ncols,
            data,
        })
    }

    /// Square diagonal matrix with the given entries.
    pub fn diagonal(entries: &[BigInt]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in entries.iter().enumerate() {
            m[(i, i)] = d.clone();
        }
        m
    }

    pub fn from_diagonal_i64(entries: &[i64]) -> Self {
        let big: Vec<BigInt> = entries.iter().map(|&x| BigInt::from(x)).collect();
        Self::diagonal(&big)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn entries(&self) -> &[BigInt] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[BigInt] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn column(&self, c: usize) -> Vec<BigInt> {
        (0..self.rows).map(|r| self[(r, c)].clone()).collect()
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_identity(&self) -> bool {
        self.is_square()
            && (0..self.rows).all(|i| {
                (0..self.cols).all(|j| {
                    let e = &self[(i, j)];
                    if i == j {
                        e.is_one()
                    } else {
                        e.is_zero()
                    }
                })
            })
    }

    pub fn is_symmetric(&self) -> bool {
        self.is_square() && (0..self.rows).all(|i| (0..i).all(|j| self[(i, j)] == self[(j, i)]))
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)].clone();
            }
        }
        t
    }

    pub fn checked_mul(&self, rhs: &IntMatrix) -> Result<IntMatrix, LinalgError> {
        if self.cols != rhs.rows {
            return Err(LinalgError::IncompatibleProduct(
                self.rows, self.cols, rhs.rows, rhs.cols,
            ));
        }
        let mut out = Self::zeros(self.rows, rhs.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..rhs.cols {
                    let b = &rhs[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        Ok(out)
    }

    /// Entrywise `self - rhs`. Panics on shape mismatch.
    pub fn sub(&self, rhs: &IntMatrix) -> IntMatrix {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in subtraction");
        let data = self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect();
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data,
        }
    }

    pub fn neg(&self) -> IntMatrix {
        IntMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|x| -x).collect(),
        }
    }

    /// Stacks matrices with equal column counts on top of each other.
    ///
    /// `cols` fixes the width when `blocks` is empty.
    pub fn vstack(cols: usize, blocks: &[IntMatrix]) -> Self {
        let mut data = Vec::new();
        let mut rows = 0;
        for b in blocks {
            assert_eq!(b.cols, cols, "vstack width mismatch");
            data.extend(b.data.iter().cloned());
            rows += b.rows;
        }
        IntMatrix { rows, cols, data }
    }

    /// Block-diagonal sum.
    pub fn direct_sum(&self, other: &IntMatrix) -> IntMatrix {
        let mut out = Self::zeros(self.rows + other.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out[(i, j)] = self[(i, j)].clone();
            }
        }
        for i in 0..other.rows {
            for j in 0..other.cols {
                out[(self.rows + i, self.cols + j)] = other[(i, j)].clone();
            }
        }
        out
    }

    /// Submatrix on the given row and column index sets.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> IntMatrix {
        let mut data = Vec::with_capacity(rows.len() * cols.len());
        for &r in rows {
            for &c in cols {
                data.push(self[(r, c)].clone());
            }
        }
        IntMatrix {
            rows: rows.len(),
            cols: cols.len(),
            data,
        }
    }

    pub fn to_i64_rows(&self) -> Option<Vec<Vec<i64>>> {
        (0..self.rows)
            .map(|r| self.row(r).iter().map(ToPrimitive::to_i64).collect())
            .collect()
    }

    pub fn max_abs_entry(&self) -> BigInt {
        self.data
            .iter()
            .map(Signed::abs)
            .max()
            .unwrap_or_else(BigInt::zero)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for j in 0..self.cols {
            self.data.swap(a * self.cols + j, b * self.cols + j);
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for i in 0..self.rows {
            self.data.swap(i * self.cols + a, i * self.cols + b);
        }
    }

    /// row[dst] += k * row[src]
    fn add_row_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for j in 0..self.cols {
            let s = &self.data[src * self.cols + j] * k;
            self.data[dst * self.cols + j] += s;
        }
    }

    /// col[dst] += k * col[src]
    fn add_col_multiple(&mut self, dst: usize, src: usize, k: &BigInt) {
        if k.is_zero() {
            return;
        }
        for i in 0..self.rows {
            let s = &self.data[i * self.cols + src] * k;
            self.data[i * self.cols + dst] += s;
        }
    }

    fn negate_row(&mut self, r: usize) {
        for j in 0..self.cols {
            let x = std::mem::take(&mut self.data[r * self.cols + j]);
            self.data[r * self.cols + j] = -x;
        }
    }
}

impl Index<(usize, usize)> for IntMatrix {
    type Output = BigInt;

    fn index(&self, (r, c): (usize, usize)) -> &BigInt {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &self.data[r * self.cols + c]
    }
}

impl IndexMut<(usize, usize)> for IntMatrix {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut BigInt {
        assert!(r < self.rows && c < self.cols, "index ({r}, {c}) out of bounds");
        &mut self.data[r * self.cols + c]
    }
}

impl Mul for &IntMatrix {
    type Output = IntMatrix;

    fn mul(self, rhs: &IntMatrix) -> IntMatrix {
        self.checked_mul(rhs).unwrap()
    }
}

/// Text format: a header line `rows cols`, then the entries row-major,
/// whitespace separated. One row per line on output.
impl fmt::Display for IntMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} {}", self.rows, self.cols)?;
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(ToString::to_string).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

impl FromStr for IntMatrix {
    type Err = LinalgError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut tokens = s.lines().enumerate().flat_map(|(ln, line)| {
            let base = line.as_ptr() as usize;
            line.split_whitespace()
                .map(move |tok| (ln + 1, tok.as_ptr() as usize - base + 1, tok))
        });
        let mut last_pos = (1, 1);
        let mut next_int = |what: &str| -> Result<BigInt, LinalgError> {
            match tokens.next() {
                Some((line, col, tok)) => {
                    last_pos = (line, col + tok.len());
                    tok.parse::<BigInt>().map_err(|_| LinalgError::Parse {
                        line,
                        col,
                        message: format!("expected {what}, found `{tok}`"),
                    })
                }
                None => Err(LinalgError::Parse {
                    line: last_pos.0,
                    col: last_pos.1,
                    message: format!("unexpected end of input, expected {what}"),
                }),
            }
        };
        let dim = |x: BigInt, what: &str| {
            x.to_usize().ok_or_else(|| LinalgError::Parse {
                line: 1,
                col: 1,
                message: format!("invalid {what} count `{x}`"),
            })
        };
        let rows = dim(next_int("row count")?, "row")?;
        let cols = dim(next_int("column count")?, "column")?;
        let n = rows.checked_mul(cols).ok_or_else(|| LinalgError::Parse {
            line: 1,
            col: 1,
            message: "matrix too large".into(),
        })?;
        let mut data = Vec::with_capacity(n.min(1 << 16));
        for _ in 0..n {
            data.push(next_int("integer entry")?);
        }
        if let Some((line, col, tok)) = tokens.next() {
            return Err(LinalgError::Parse {
                line,
                col,
                message: format!("trailing token `{tok}` after {rows}x{cols} entries"),
            });
        }
        IntMatrix::new(rows, cols, data)
    }
}

/// Smith normal form `u * a * v = diag(d, 0, ...)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnfResult {
    /// Nonzero elementary divisors, positive, each dividing the next.
    pub d: Vec<BigInt>,
    pub u: IntMatrix,
    pub v: IntMatrix,
    pub original_shape: (usize, usize),
}

impl SnfResult {
    pub fn rank(&self) -> usize {
        self.d.len()
    }

    /// The full `rows x cols` diagonal matrix `u * a * v`.
    pub fn diagonal_matrix(&self) -> IntMatrix {
        let (m, n) = self.original_shape;
        let mut out = IntMatrix::zeros(m, n);
        for (i, d) in self.d.iter().enumerate() {
            out[(i, i)] = d.clone();
        }
        out
    }
}

/// Position of the nonzero entry of least absolute value in `a[t.., t..]`.
fn min_pivot(a: &IntMatrix, t: usize) -> Option<(usize, usize)> {
    let mut best: Option<((usize, usize), BigInt)> = None;
    for i in t..a.rows {
        for j in t..a.cols {
            let x = &a[(i, j)];
            if x.is_zero() {
                continue;
            }
            let ax = x.abs();
            if best.as_ref().is_none_or(|(_, b)| ax < *b) {
                let done = ax.is_one();
                best = Some(((i, j), ax));
                if done {
                    return best.map(|(p, _)| p);
                }
            }
        }
    }
    best.map(|(p, _)| p)
}

/// Smith normal form with unimodular transforms.
///
/// The pivot at each step is the nonzero entry of least absolute value in the
/// remaining block; eliminations use floor division so every remainder is
/// strictly smaller than the pivot.
pub fn smith_normal_form(a: &IntMatrix) -> SnfResult {
    let (m, n) = a.shape();
    let mut w = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut v = IntMatrix::identity(n);
    let mut rank = 0;

    'outer: for t in 0..m.min(n) {
        loop {
            let Some((pi, pj)) = min_pivot(&w, t) else {
                break 'outer;
            };
            w.swap_rows(t, pi);
            u.swap_rows(t, pi);
            w.swap_cols(t, pj);
            v.swap_cols(t, pj);

            let p = w[(t, t)].clone();
            let mut clean = true;
            for i in t + 1..m {
                if w[(i, t)].is_zero() {
                    continue;
                }
                let q = -w[(i, t)].div_floor(&p);
                w.add_row_multiple(i, t, &q);
                u.add_row_multiple(i, t, &q);
                clean &= w[(i, t)].is_zero();
            }
            for j in t + 1..n {
                if w[(t, j)].is_zero() {
                    continue;
                }
                let q = -w[(t, j)].div_floor(&p);
                w.add_col_multiple(j, t, &q);
                v.add_col_multiple(j, t, &q);
                clean &= w[(t, j)].is_zero();
            }
            if !clean {
                continue;
            }

            // Row and column t are clear; enforce divisibility of the rest.
            let offender = (t + 1..m).find(|&i| (t + 1..n).any(|j| !w[(i, j)].is_multiple_of(&p)));
            match offender {
                Some(i) => {
                    let one = BigInt::one();
                    w.add_row_multiple(t, i, &one);
                    u.add_row_multiple(t, i, &one);
                }
                None => break,
            }
        }
        if w[(t, t)].is_negative() {
            w.negate_row(t);
            u.negate_row(t);
        }
        rank = t + 1;
    }

    let d = (0..rank).map(|i| w[(i, i)].clone()).collect();
    SnfResult {
        d,
        u,
        v,
        original_shape: (m, n),
    }
}

/// Row-style Hermite normal form `u * a = h`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HermiteForm {
    pub h: IntMatrix,
    pub u: IntMatrix,
    /// Column index of the pivot in each nonzero row of `h`.
    pub pivot_cols: Vec<usize>,
}

impl HermiteForm {
    pub fn rank(&self) -> usize {
        self.pivot_cols.len()
    }
}

/// Row echelon form with positive pivots and the entries above each pivot
/// reduced into `[0, pivot)`. Zero rows sink to the bottom.
pub fn hermite_normal_form(a: &IntMatrix) -> HermiteForm {
    let (m, n) = a.shape();
    let mut h = a.clone();
    let mut u = IntMatrix::identity(m);
    let mut pivot_cols = Vec::new();
    let mut r = 0;

    for c in 0..n {
        if r == m {
            break;
        }
        loop {
            let best = (r..m)
                .filter(|&i| !h[(i, c)].is_zero())
                .min_by_key(|&i| h[(i, c)].abs());
            let Some(i) = best else { break };
            h.swap_rows(r, i);
            u.swap_rows(r, i);
            let p = h[(r, c)].clone();
            let mut clean = true;
            for i in r + 1..m {
                if h[(i, c)].is_zero() {
                    continue;
                }
                let q = -h[(i, c)].div_floor(&p);
                h.add_row_multiple(i, r, &q);
                u.add_row_multiple(i, r, &q);
                clean &= h[(i, c)].is_zero();
            }
            if clean {
                break;
            }
        }
        if h[(r, c)].is_zero() {
            continue;
        }
        if h[(r, c)].is_negative() {
            h.negate_row(r);
            u.negate_row(r);
        }
        let p = h[(r, c)].clone();
        for i in 0..r {
            let q = -h[(i, c)].div_floor(&p);
            h.add_row_multiple(i, r, &q);
            u.add_row_multiple(i, r, &q);
        }
        pivot_cols.push(c);
        r += 1;
    }
    HermiteForm { h, u, pivot_cols }
}

/// Rank over the rationals.
pub fn rank(a: &IntMatrix) -> usize {
    hermite_normal_form(a).rank()
}

/// Basis of the integral kernel `{x : a x = 0}` as the columns of a
/// `cols x k` matrix.
///
/// The basis is saturated (it spans kernel space ∩ ℤ^cols) and canonical: its
/// transpose is in Hermite normal form.
pub fn kernel_basis(a: &IntMatrix) -> IntMatrix {
    let snf = smith_normal_form(a);
    let n = a.cols();
    let r = snf.rank();
    let free: Vec<usize> = (r..n).collect();
    let all: Vec<usize> = (0..n).collect();
    let raw = snf.v.select(&all, &free);
    hermite_normal_form(&raw.transpose()).h.transpose()
}

/// Exact determinant by fraction-free (Bareiss) elimination.
pub fn determinant(a: &IntMatrix) -> Result<BigInt, LinalgError> {
    if !a.is_square() {
        return Err(LinalgError::NonSquare {
            rows: a.rows(),
            cols: a.cols(),
        });
    }
    let n = a.rows();
    if n == 0 {
        return Ok(BigInt::one());
    }
    let mut m = a.clone();
    let mut negate = false;
    let mut prev = BigInt::one();
    for k in 0..n - 1 {
        if m[(k, k)].is_zero() {
            match (k + 1..n).find(|&i| !m[(i, k)].is_zero()) {
                Some(i) => {
                    m.swap_rows(k, i);
                    negate = !negate;
                }
                None => return Ok(BigInt::zero()),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let x = &m[(i, j)] * &m[(k, k)] - &m[(i, k)] * &m[(k, j)];
                m[(i, j)] = x / &prev;
            }
        }
        prev = m[(k, k)].clone();
    }
    let d = m[(n - 1, n - 1)].clone();
    Ok(if negate { -d } else { d })
}
