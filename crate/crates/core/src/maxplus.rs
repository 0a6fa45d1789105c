//! Max-plus (tropical) arithmetic over `R ∪ {ε}`.
//!
//! `⊕` is `max` and `⊗` is `+`. The element `ε = -∞` is neutral for `⊕`
//! and absorbing for `⊗`; `0` is the `⊗` identity. Matrices are dense and
//! row-major, which suits the small networks this crate targets.

use std::fmt;

use crate::error::{Error, Result};

/// An element of the max-plus semiring.
///
/// Holds either a finite `f64` or `ε`, stored as `f64::NEG_INFINITY`.
/// `NaN` and `+∞` are unrepresentable.
#[derive(Clone, Copy, PartialEq, PartialOrd, Default)]
#[repr(transparent)]
pub struct MaxPlus(f64);

impl MaxPlus {
    /// `ε`, the additive zero.
    pub const EPSILON: MaxPlus = MaxPlus(f64::NEG_INFINITY);
    /// `0`, the multiplicative unit.
    pub const ONE: MaxPlus = MaxPlus(0.0);

    /// Builds a finite scalar. Rejects `NaN` and both infinities; use
    /// [`MaxPlus::EPSILON`] for `ε`.
    pub fn new(value: f64) -> Result<Self> {
        if value.is_finite() {
            Ok(MaxPlus(value))
        } else {
            Err(Error::InvalidScalar(value))
        }
    }

    /// Like [`MaxPlus::new`] but maps `-∞` to `ε`.
    pub fn from_extended(value: f64) -> Result<Self> {
        if value == f64::NEG_INFINITY {
            Ok(Self::EPSILON)
        } else {
            Self::new(value)
        }
    }

    #[inline]
    pub fn is_epsilon(self) -> bool {
        self.0 == f64::NEG_INFINITY
    }

    /// The underlying value, `-∞` for `ε`.
    #[inline]
    pub fn value(self) -> f64 {
        self.0
    }

    /// `Some(v)` for finite scalars, `None` for `ε`.
    pub fn finite(self) -> Option<f64> {
        (!self.is_epsilon()).then_some(self.0)
    }

    /// `self ⊕ other = max(self, other)`.
    #[inline]
    pub fn oplus(self, other: MaxPlus) -> MaxPlus {
        if self.0 >= other.0 {
            self
        } else {
            other
        }
    }

    /// `self ⊗ other = self + other`, short-circuiting to `ε`.
    #[inline]
    pub fn otimes(self, other: MaxPlus) -> MaxPlus {
        if self.is_epsilon() || other.is_epsilon() {
            MaxPlus::EPSILON
        } else {
            MaxPlus(self.0 + other.0)
        }
    }
}

impl fmt::Debug for MaxPlus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl fmt::Display for MaxPlus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_epsilon() {
            f.write_str("ε")
        } else {
            write!(f, "{}", self.0)
        }
    }
}

impl From<u32> for MaxPlus {
    fn from(v: u32) -> Self {
        MaxPlus(f64::from(v))
    }
}

/// `a ⊕ b`.
#[inline]
pub fn oplus(a: MaxPlus, b: MaxPlus) -> MaxPlus {
    a.oplus(b)
}

/// `a ⊗ b`.
#[inline]
pub fn otimes(a: MaxPlus, b: MaxPlus) -> MaxPlus {
    a.otimes(b)
}

/// `‖x‖ = max_i x_i`. Errors on an empty slice.
pub fn norm(values: &[MaxPlus]) -> Result<MaxPlus> {
    values
        .iter()
        .copied()
        .reduce(MaxPlus::oplus)
        .ok_or(Error::Empty("norm"))
}

/// Dense row-major matrix over the max-plus semiring.
#[derive(Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    entries: Vec<MaxPlus>,
}

impl Matrix {
    /// All-`ε` matrix (the null matrix `ℰ`).
    pub fn null(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            entries: vec![MaxPlus::EPSILON; rows * cols],
        }
    }

    /// `E = diag(0, …, 0)` with `ε` off the diagonal.
    pub fn identity(n: usize) -> Self {
        Self::diagonal(&vec![MaxPlus::ONE; n])
    }

    /// Square matrix with `diag` on the diagonal and `ε` elsewhere.
    pub fn diagonal(diag: &[MaxPlus]) -> Self {
        let n = diag.len();
        let mut m = Self::null(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.entries[i * n + i] = d;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<MaxPlus>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::DimensionMismatch {
                op: "from_rows",
                left: (r, c),
                right: (1, bad.len()),
            });
        }
        Ok(Matrix {
            rows: r,
            cols: c,
            entries: rows.into_iter().flatten().collect(),
        })
    }

    /// Builds a matrix from `f64`s, treating `-∞` as `ε`.
    pub fn from_f64_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows = rows
            .iter()
            .map(|row| row.iter().map(|&v| MaxPlus::from_extended(v)).collect())
            .collect::<Result<Vec<Vec<_>>>>()?;
        Self::from_rows(rows)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    /// Entry at zero-based `(i, j)`. Panics when out of bounds.
    #[inline]
    pub fn get(&self, i: usize, j: usize) -> MaxPlus {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds"
        );
        self.entries[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: MaxPlus) {
        assert!(
            i < self.rows && j < self.cols,
            "index ({i}, {j}) out of bounds"
        );
        self.entries[i * self.cols + j] = value;
    }

    pub fn entries(&self) -> &[MaxPlus] {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[MaxPlus] {
        &self.entries[i * self.cols..(i + 1) * self.cols]
    }

    pub fn diagonal_entries(&self) -> Vec<MaxPlus> {
        (0..self.rows.min(self.cols))
            .map(|i| self.get(i, i))
            .collect()
    }

    pub fn transpose(&self) -> Matrix {
        let mut t = Matrix::null(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t.entries[j * self.rows + i] = self.entries[i * self.cols + j];
            }
        }
        t
    }

    pub fn is_null(&self) -> bool {
        self.entries.iter().all(|e| e.is_epsilon())
    }

    /// Elementwise `⊕`.
    pub fn oplus(&self, other: &Matrix) -> Result<Matrix> {
        self.same_shape("mat_oplus", other)?;
        Ok(Matrix {
            rows: self.rows,
            cols: self.cols,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(&a, &b)| a.oplus(b))
                .collect(),
        })
    }

    /// Max-plus product: `(A ⊗ B)_ij = ⊕_m A_im ⊗ B_mj`.
    pub fn otimes(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch {
                op: "mat_otimes",
                left: self.shape(),
                right: other.shape(),
            });
        }
        let mut out = Matrix::null(self.rows, other.cols);
        for i in 0..self.rows {
            let out_row = &mut out.entries[i * other.cols..(i + 1) * other.cols];
            for m in 0..self.cols {
                let a = self.entries[i * self.cols + m];
                if a.is_epsilon() {
                    continue;
                }
                let b_row = &other.entries[m * other.cols..(m + 1) * other.cols];
                for (o, &b) in out_row.iter_mut().zip(b_row) {
                    *o = o.oplus(a.otimes(b));
                }
            }
        }
        Ok(out)
    }

    /// Matrix-vector product `A ⊗ x`.
    pub fn apply(&self, x: &[MaxPlus]) -> Result<Vec<MaxPlus>> {
        if self.cols != x.len() {
            return Err(Error::DimensionMismatch {
                op: "mat_vec",
                left: self.shape(),
                right: (x.len(), 1),
            });
        }
        Ok((0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(x)
                    .fold(MaxPlus::EPSILON, |acc, (&a, &v)| acc.oplus(a.otimes(v)))
            })
            .collect())
    }

    /// `A^q` by repeated multiplication; `A^0 = E`.
    pub fn power(&self, q: u32) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                op: "mat_power",
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut acc = Matrix::identity(self.rows);
        for _ in 0..q {
            acc = self.otimes(&acc)?;
        }
        Ok(acc)
    }

    /// `⊕_{j=from}^{to} A^j`, `ℰ` when the range is empty.
    pub fn power_sum(&self, from: u32, to: u32) -> Result<Matrix> {
        if !self.is_square() {
            return Err(Error::NotSquare {
                op: "power_sum",
                rows: self.rows,
                cols: self.cols,
            });
        }
        let mut sum = Matrix::null(self.rows, self.cols);
        let mut power = self.power(from)?;
        for j in from..=to {
            if j > from {
                power = self.otimes(&power)?;
            }
            sum = sum.oplus(&power)?;
        }
        Ok(sum)
    }

    /// `‖A‖ = max_ij a_ij`.
    pub fn norm(&self) -> Result<MaxPlus> {
        norm(&self.entries)
    }

    /// Elementwise `A ≤ B` with `ε` below everything.
    pub fn leq(&self, other: &Matrix) -> Result<bool> {
        self.same_shape("mat_leq", other)?;
        Ok(self.entries.iter().zip(&other.entries).all(|(a, b)| a <= b))
    }

    fn same_shape(&self, op: &'static str, other: &Matrix) -> Result<()> {
        if self.shape() == other.shape() {
            Ok(())
        } else {
            Err(Error::DimensionMismatch {
                op,
                left: self.shape(),
                right: other.shape(),
            })
        }
    }
}

impl fmt::Debug for Matrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for i in 0..self.rows {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{:?}", self.row(i))?;
        }
        f.write_str("]")
    }
}
