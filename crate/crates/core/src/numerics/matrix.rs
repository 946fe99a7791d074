use std::ops::{Add, Index, IndexMut, Mul, Sub};

use num_complex::Complex;
use num_traits::Zero;

use super::{NumericsError, Real};

/// Dense complex matrix stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Real> CMatrix<T> {
    /// Zero matrix. Panics on an empty shape.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "empty matrix {rows}x{cols}");
        Self {
            rows,
            cols,
            data: vec![Complex::zero(); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut out = Self::zeros(n, n);
        for i in 0..n {
            out[(i, i)] = Complex::new(T::one(), T::zero());
        }
        out
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        assert!(rows >= 1 && cols >= 1, "empty matrix {rows}x{cols}");
        let mut data = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                data.push(f(r, c));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from row-major entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self, NumericsError> {
        if rows == 0 || cols == 0 {
            return Err(NumericsError::Empty { rows, cols });
        }
        if data.len() != rows * cols {
            return Err(NumericsError::EntryCount {
                rows,
                cols,
                len: data.len(),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real_diagonal(diag: &[T]) -> Self {
        let mut out = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            out[(i, i)] = Complex::new(d, T::zero());
        }
        out
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

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn row(&self, r: usize) -> &[Complex<T>] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |r, c| self[(c, r)].conj())
    }

    pub fn trace(&self) -> Complex<T> {
        (0..self.rows.min(self.cols)).fold(Complex::zero(), |acc, i| acc + self[(i, i)])
    }

    pub fn scale(&self, k: T) -> Self {
        self.map(|z| z * k)
    }

    pub fn scale_complex(&self, k: Complex<T>) -> Self {
        self.map(|z| z * k)
    }

    pub fn map(&self, f: impl Fn(Complex<T>) -> Complex<T>) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| f(z)).collect(),
        }
    }

    /// `(A + Aᴴ) / 2`. Absorbs rounding that breaks exact Hermitian symmetry.
    pub fn hermitian_part(&self) -> Self {
        assert!(self.is_square(), "hermitian_part of non-square matrix");
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |r, c| {
            (self[(r, c)] + self[(c, r)].conj()) * half
        })
    }

    /// Largest `|A(m,n) − conj(A(n,m))|`; infinite for non-square input.
    pub fn hermitian_defect(&self) -> T {
        if !self.is_square() {
            return T::infinity();
        }
        let mut worst = T::zero();
        for r in 0..self.rows {
            for c in r..self.cols {
                worst = worst.max((self[(r, c)] - self[(c, r)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self, abs_tol: T) -> bool {
        self.hermitian_defect() <= abs_tol
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, z| acc.max(z.norm()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data
            .iter()
            .fold(T::zero(), |acc, z| acc + z.norm_sqr())
            .sqrt()
    }

    /// Matrix product. Panics on inner-dimension mismatch.
    pub fn matmul(&self, rhs: &Self) -> Self {
        assert_eq!(
            self.cols, rhs.rows,
            "matmul shape mismatch {:?} x {:?}",
            self.shape(),
            rhs.shape()
        );
        let mut out = Self::zeros(self.rows, rhs.cols);
        for r in 0..self.rows {
            let out_row = &mut out.data[r * rhs.cols..(r + 1) * rhs.cols];
            for k in 0..self.cols {
                let a = self.data[r * self.cols + k];
                if a.is_zero() {
                    continue;
                }
                let rhs_row = &rhs.data[k * rhs.cols..(k + 1) * rhs.cols];
                for (o, &b) in out_row.iter_mut().zip(rhs_row) {
                    *o = *o + a * b;
                }
            }
        }
        out
    }

    /// `tr(self · rhs)` without forming the product.
    pub fn trace_of_product(&self, rhs: &Self) -> Complex<T> {
        assert_eq!(self.cols, rhs.rows, "trace_of_product shape mismatch");
        assert_eq!(self.rows, rhs.cols, "trace_of_product shape mismatch");
        let mut acc = Complex::zero();
        for r in 0..self.rows {
            for k in 0..self.cols {
                acc = acc + self[(r, k)] * rhs[(k, r)];
            }
        }
        acc
    }

    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        let mut out = vec![Complex::zero(); self.rows];
        self.mul_vec_into(v, &mut out);
        out
    }

    pub fn mul_vec_into(&self, v: &[Complex<T>], out: &mut [Complex<T>]) {
        assert_eq!(v.len(), self.cols, "mul_vec length mismatch");
        assert_eq!(out.len(), self.rows, "mul_vec output length mismatch");
        // four partial sums keep the adds independent
        for (r, o) in out.iter_mut().enumerate() {
            let row = self.row(r);
            let mut acc = [Complex::<T>::zero(); 4];
            let mut rows = row.chunks_exact(4);
            let mut vs = v.chunks_exact(4);
            for (a, x) in (&mut rows).zip(&mut vs) {
                for k in 0..4 {
                    acc[k] = acc[k] + a[k] * x[k];
                }
            }
            let mut tail = Complex::<T>::zero();
            for (&a, &x) in rows.remainder().iter().zip(vs.remainder()) {
                tail = tail + a * x;
            }
            *o = (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail;
        }
    }
}

impl<T> Index<(usize, usize)> for CMatrix<T> {
    type Output = Complex<T>;

    fn index(&self, (r, c): (usize, usize)) -> &Complex<T> {
        debug_assert!(r < self.rows && c < self.cols);
        &self.data[r * self.cols + c]
    }
}

impl<T> IndexMut<(usize, usize)> for CMatrix<T> {
    fn index_mut(&mut self, (r, c): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(r < self.rows && c < self.cols);
        &mut self.data[r * self.cols + c]
    }
}

impl<T: Real> Add for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn add(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.shape(), rhs.shape(), "add shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<T: Real> Sub for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn sub(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        assert_eq!(self.shape(), rhs.shape(), "sub shape mismatch");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<T: Real> Mul for &CMatrix<T> {
    type Output = CMatrix<T>;

    fn mul(self, rhs: &CMatrix<T>) -> CMatrix<T> {
        self.matmul(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn adjoint_and_trace() {
        let a = CMatrix::from_vec(2, 2, vec![c(1., 1.), c(2., 0.), c(0., 3.), c(4., -1.)]).unwrap();
        let ah = a.adjoint();
        assert_eq!(ah[(0, 1)], c(0., -3.));
        assert_eq!(ah[(1, 0)], c(2., 0.));
        assert_eq!(a.trace(), c(5., 0.));
    }

    #[test]
    fn hermitian_part_is_hermitian() {
        let a = CMatrix::from_fn(3, 3, |r, k| c(r as f64 + 0.3 * k as f64, (r * k) as f64 - 1.0));
        assert!(!a.is_hermitian(1e-12));
        assert!(a.hermitian_part().is_hermitian(0.0));
    }

    #[test]
    fn matmul_matches_hand_product() {
        let a = CMatrix::from_vec(2, 2, vec![c(2., 0.), c(0., 1.), c(0., -1.), c(2., 0.)]).unwrap();
        let p = &a * &a;
        // [[2, j], [-j, 2]]^2 = [[5, 4j], [-4j, 5]]
        assert_eq!(p[(0, 0)], c(5., 0.));
        assert_eq!(p[(0, 1)], c(0., 4.));
        assert_eq!(p[(1, 0)], c(0., -4.));
        assert_eq!(a.trace_of_product(&a), p.trace());
    }

    #[test]
    fn from_vec_rejects_bad_shapes() {
        assert!(matches!(
            CMatrix::<f64>::from_vec(0, 2, vec![]),
            Err(NumericsError::Empty { .. })
        ));
        assert!(matches!(
            CMatrix::from_vec(2, 2, vec![c(1., 0.)]),
            Err(NumericsError::EntryCount { len: 1, .. })
        ));
    }
}
