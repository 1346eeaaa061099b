//! Dense row-major matrices with exactly the arithmetic the dynamics need.
//!
//! Matrices with zero rows or zero columns are legal values (degenerate
//! trajectory blocks use them) and every operation is total on them.
//! Shape rules: constructors validate and return errors; arithmetic between
//! mismatched shapes is a programming bug and panics.

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Debug, PartialEq)]
pub struct DenseMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: Real> DenseMatrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![T::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.set(i, i, T::one());
        }
        m
    }

    /// Builds from row-major data; rejects length mismatch and non-finite
    /// entries (external inputs come through here).
    pub fn from_vec(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::invalid(format!(
                "data length {} does not match {}x{}",
                data.len(),
                rows,
                cols
            )));
        }
        if !data.iter().all(|v| v.is_finite()) {
            return Err(Error::invalid("matrix entries must be finite"));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> T) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Diagonal rectangular matrix; entries beyond `values` are zero.
    pub fn diagonal(rows: usize, cols: usize, values: &[T]) -> Self {
        let mut m = Self::zeros(rows, cols);
        for (i, &v) in values.iter().take(rows.min(cols)).enumerate() {
            m.set(i, i, v);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[T] {
        &self.data
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: T) {
        debug_assert!(i < self.rows && j < self.cols);
        self.data[i * self.cols + j] = v;
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn transpose(&self) -> Self {
        let mut out = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.set(j, i, self.get(i, j));
            }
        }
        out
    }

    /// `self · rhs`. Accumulates row-wise (axpy ordering) so the inner loop
    /// vectorizes; the operation order is fixed, hence bit-deterministic.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.rows, "matmul inner dimensions");
        let mut out = Self::zeros(self.rows, rhs.cols);
        if self.rows == 0 || rhs.cols == 0 || self.cols == 0 {
            return out;
        }
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
            for (t, &a) in arow.iter().enumerate() {
                let brow = &rhs.data[t * rhs.cols..(t + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    /// `self · rhsᵀ` without materializing the transpose (row·row dot).
    pub fn matmul_transb(&self, rhs: &Self) -> Self {
        assert_eq!(self.cols, rhs.cols, "matmul_transb inner dimensions");
        let mut out = Self::zeros(self.rows, rhs.rows);
        if self.rows == 0 || rhs.rows == 0 {
            return out;
        }
        if self.cols == 0 {
            return out;
        }
        for i in 0..self.rows {
            let arow = self.row(i);
            let orow = &mut out.data[i * rhs.rows..(i + 1) * rhs.rows];
            for (j, o) in orow.iter_mut().enumerate() {
                *o = dot(arow, rhs.row(j));
            }
        }
        out
    }

    /// `selfᵀ · rhs` without materializing the transpose.
    pub fn tr_matmul(&self, rhs: &Self) -> Self {
        assert_eq!(self.rows, rhs.rows, "tr_matmul inner dimensions");
        let mut out = Self::zeros(self.cols, rhs.cols);
        if self.cols == 0 || rhs.cols == 0 || self.rows == 0 {
            return out;
        }
        for t in 0..self.rows {
            let arow = self.row(t);
            let brow = rhs.row(t);
            for (i, &a) in arow.iter().enumerate() {
                let orow = &mut out.data[i * rhs.cols..(i + 1) * rhs.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    pub fn add(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a + b)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.zip_with(rhs, |a, b| a - b)
    }

    /// `self + s·rhs` in one pass.
    pub fn add_scaled(&self, rhs: &Self, s: T) -> Self {
        self.zip_with(rhs, |a, b| a + s * b)
    }

    pub fn scaled(&self, s: T) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&v| v * s).collect(),
        }
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(T, T) -> T) -> Self {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "shape mismatch");
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }

    /// First `r` rows as a new matrix (`r` may be 0 or `rows`).
    pub fn top_rows(&self, r: usize) -> Self {
        assert!(r <= self.rows);
        Self {
            rows: r,
            cols: self.cols,
            data: self.data[..r * self.cols].to_vec(),
        }
    }

    /// Rows `r..` as a new matrix (possibly 0-row).
    pub fn bottom_rows(&self, r: usize) -> Self {
        assert!(r <= self.rows);
        Self {
            rows: self.rows - r,
            cols: self.cols,
            data: self.data[r * self.cols..].to_vec(),
        }
    }

    /// First `c` columns as a new matrix.
    pub fn left_cols(&self, c: usize) -> Self {
        assert!(c <= self.cols);
        Self::from_fn(self.rows, c, |i, j| self.get(i, j))
    }

    pub fn vstack(top: &Self, bottom: &Self) -> Self {
        assert_eq!(top.cols, bottom.cols, "vstack column mismatch");
        let mut data = Vec::with_capacity(top.data.len() + bottom.data.len());
        data.extend_from_slice(&top.data);
        data.extend_from_slice(&bottom.data);
        Self {
            rows: top.rows + bottom.rows,
            cols: top.cols,
            data,
        }
    }

    /// Frobenius norm with Neumaier-compensated accumulation of the squares,
    /// so long sums don't drift at f32.
    pub fn frobenius_norm(&self) -> T {
        compensated_sum(self.data.iter().map(|&v| v * v)).sqrt()
    }

    pub fn max_abs(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, &v| acc.max(v.abs()))
    }
}

#[inline]
fn dot<T: Real>(a: &[T], b: &[T]) -> T {
    // Four independent accumulators: fixed association, so deterministic,
    // and wide enough for the compiler to keep the FP units busy.
    let mut s0 = T::zero();
    let mut s1 = T::zero();
    let mut s2 = T::zero();
    let mut s3 = T::zero();
    let mut ca = a.chunks_exact(4);
    let mut cb = b.chunks_exact(4);
    for (xa, xb) in (&mut ca).zip(&mut cb) {
        s0 = s0 + xa[0] * xb[0];
        s1 = s1 + xa[1] * xb[1];
        s2 = s2 + xa[2] * xb[2];
        s3 = s3 + xa[3] * xb[3];
    }
    let mut tail = T::zero();
    for (&x, &y) in ca.remainder().iter().zip(cb.remainder()) {
        tail = tail + x * y;
    }
    ((s0 + s1) + (s2 + s3)) + tail
}

/// Neumaier variant of Kahan summation.
pub fn compensated_sum<T: Real>(values: impl IntoIterator<Item = T>) -> T {
    let mut sum = T::zero();
    let mut comp = T::zero();
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp = comp + ((sum - t) + v);
        } else {
            comp = comp + ((v - t) + sum);
        }
        sum = t;
    }
    sum + comp
}

/// Convenience for tests and diagnostics: max entrywise |a−b|.
pub fn max_abs_diff<T: Real>(a: &DenseMatrix<T>, b: &DenseMatrix<T>) -> T {
    assert_eq!((a.rows(), a.cols()), (b.rows(), b.cols()), "shape mismatch");
    a.data
        .iter()
        .zip(&b.data)
        .fold(T::zero(), |acc, (&x, &y)| acc.max((x - y).abs()))
}
