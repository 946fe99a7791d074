use num_complex::Complex;
use num_traits::Zero;

use super::{CMatrix, NumericsError, Real};

/// Absolute asymmetry tolerated by [`hermitian_solve`], scaled by the
/// largest entry magnitude when that exceeds one.
const HERMITIAN_TOL: f64 = 1e-12;

/// Lower-triangular factor `L` with `A = L Lᴴ` and real positive diagonal.
#[derive(Clone, Debug)]
pub struct Cholesky<T> {
    factor: CMatrix<T>,
}

impl<T: Real> Cholesky<T> {
    /// Factors a Hermitian positive-definite matrix. Only the lower
    /// triangle of `a` is read.
    pub fn new(a: &CMatrix<T>) -> Result<Self, NumericsError> {
        if !a.is_square() {
            return Err(NumericsError::Shape {
                op: "cholesky",
                left: a.shape(),
                right: a.shape(),
            });
        }
        let n = a.rows();
        let mut l = CMatrix::zeros(n, n);
        for j in 0..n {
            let mut d = a[(j, j)].re;
            for k in 0..j {
                d = d - l[(j, k)].norm_sqr();
            }
            if !(d > T::zero()) {
                return Err(NumericsError::NotPositiveDefinite { pivot: j });
            }
            let d = d.sqrt();
            l[(j, j)] = Complex::new(d, T::zero());
            for i in (j + 1)..n {
                let mut s = a[(i, j)];
                for k in 0..j {
                    s = s - l[(i, k)] * l[(j, k)].conj();
                }
                l[(i, j)] = s / d;
            }
        }
        Ok(Self { factor: l })
    }

    pub fn factor(&self) -> &CMatrix<T> {
        &self.factor
    }

    /// Solves `A x = b` for one right-hand side in place.
    pub fn solve_vec_in_place(&self, b: &mut [Complex<T>]) {
        let l = &self.factor;
        let n = l.rows();
        assert_eq!(b.len(), n, "cholesky solve length mismatch");
        for i in 0..n {
            let mut s = b[i];
            for k in 0..i {
                s = s - l[(i, k)] * b[k];
            }
            b[i] = s / l[(i, i)].re;
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..n {
                s = s - l[(k, i)].conj() * b[k];
            }
            b[i] = s / l[(i, i)].re;
        }
    }

    pub fn solve(&self, b: &CMatrix<T>) -> Result<CMatrix<T>, NumericsError> {
        let n = self.factor.rows();
        if b.rows() != n {
            return Err(NumericsError::Shape {
                op: "cholesky solve",
                left: self.factor.shape(),
                right: b.shape(),
            });
        }
        let mut out = CMatrix::zeros(n, b.cols());
        let mut col = vec![Complex::zero(); n];
        for c in 0..b.cols() {
            for (r, v) in col.iter_mut().enumerate() {
                *v = b[(r, c)];
            }
            self.solve_vec_in_place(&mut col);
            for (r, v) in col.iter().enumerate() {
                out[(r, c)] = *v;
            }
        }
        Ok(out)
    }
}

/// Solves `A X = B` for Hermitian positive-definite `A`.
pub fn hermitian_solve<T: Real>(a: &CMatrix<T>, b: &CMatrix<T>) -> Result<CMatrix<T>, NumericsError> {
    if !a.is_square() || a.rows() != b.rows() {
        return Err(NumericsError::Shape {
            op: "hermitian_solve",
            left: a.shape(),
            right: b.shape(),
        });
    }
    let tol = T::lit(HERMITIAN_TOL) * a.max_abs().max(T::one());
    let defect = a.hermitian_defect();
    if defect > tol {
        return Err(NumericsError::NotHermitian {
            defect: defect.as_f64(),
        });
    }
    Cholesky::new(a)?.solve(b)
}

/// True when the smallest eigenvalue of Hermitian `a` is at least
/// `-rel_tol · tr(a)`. Decided by factoring `a + rel_tol·tr(a)·I`.
pub fn is_positive_semidefinite<T: Real>(a: &CMatrix<T>, rel_tol: T) -> bool {
    if !a.is_square() {
        return false;
    }
    let shift = rel_tol * a.trace().re.abs() + T::min_positive_value();
    let mut shifted = a.clone();
    for i in 0..a.rows() {
        shifted[(i, i)] = shifted[(i, i)] + Complex::new(shift, T::zero());
    }
    Cholesky::new(&shifted).is_ok()
}
