//! Small dense symmetric positive-definite linear algebra (row-major storage).

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Lower Cholesky factor `L` with `A = L Lᵀ`.
#[derive(Debug, Clone)]
pub struct Cholesky<T> {
    n: usize,
    l: Vec<T>,
}

impl<T: Scalar> Cholesky<T> {
    /// Factors the symmetric matrix `a` (`n × n`, row-major; only the lower
    /// triangle is read).
    pub fn factor(a: &[T], n: usize) -> Result<Self> {
        assert_eq!(a.len(), n * n, "matrix storage does not match dimension");
        let mut l = vec![T::zero(); n * n];
        for j in 0..n {
            let mut diag = a[j * n + j];
            for k in 0..j {
                diag = diag - l[j * n + k] * l[j * n + k];
            }
            if !(diag > T::zero()) {
                return Err(Error::Factorization { pivot: j });
            }
            let ljj = diag.sqrt();
            l[j * n + j] = ljj;
            for i in (j + 1)..n {
                let mut s = a[i * n + j];
                for k in 0..j {
                    s = s - l[i * n + k] * l[j * n + k];
                }
                l[i * n + j] = s / ljj;
            }
        }
        Ok(Self { n, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn factor_entry(&self, i: usize, j: usize) -> T {
        self.l[i * self.n + j]
    }

    pub fn logdet(&self) -> T {
        (0..self.n).fold(T::zero(), |acc, i| acc + self.l[i * self.n + i].ln()) * T::lit(2.0)
    }

    pub fn solve(&self, b: &[T]) -> Vec<T> {
        let n = self.n;
        let mut y = b.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for k in 0..i {
                s = s - self.l[i * n + k] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for k in (i + 1)..n {
                s = s - self.l[k * n + i] * y[k];
            }
            y[i] = s / self.l[i * n + i];
        }
        y
    }

    /// Full inverse, row-major.
    pub fn inverse(&self) -> Vec<T> {
        let n = self.n;
        let mut inv = vec![T::zero(); n * n];
        let mut e = vec![T::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = T::zero());
            e[j] = T::one();
            let col = self.solve(&e);
            for i in 0..n {
                inv[i * n + j] = col[i];
            }
        }
        inv
    }
}
