//! Pfaffians of complex skew-symmetric matrices.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Accepted `max |M + Mᵀ|` for a matrix treated as skew-symmetric.
pub const SKEW_TOL: f64 = 1e-10;

/// Dense square matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl SkewMatrix {
    pub fn zeros(dim: usize) -> Self {
        SkewMatrix {
            dim,
            data: vec![Complex64::new(0.0, 0.0); dim * dim],
        }
    }

    /// Builds the matrix from its strict upper triangle `f(a, b)`, `a < b`.
    pub fn from_upper(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut m = SkewMatrix::zeros(dim);
        for a in 0..dim {
            for b in a + 1..dim {
                let x = f(a, b);
                m.set(a, b, x);
                m.set(b, a, -x);
            }
        }
        m
    }

    pub fn from_rows(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                actual: data.len(),
            });
        }
        Ok(SkewMatrix { dim, data })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> Complex64 {
        self.data[a * self.dim + b]
    }

    #[inline]
    pub fn set(&mut self, a: usize, b: usize, x: Complex64) {
        self.data[a * self.dim + b] = x;
    }

    /// `max |M_ab + M_ba|`, diagonal included.
    pub fn skew_defect(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..self.dim {
            for b in a..self.dim {
                worst = worst.max((self.get(a, b) + self.get(b, a)).norm());
            }
        }
        worst
    }

    fn swap(&mut self, i: usize, j: usize) {
        let n = self.dim;
        for c in 0..n {
            self.data.swap(i * n + c, j * n + c);
        }
        for r in 0..n {
            self.data.swap(r * n + i, r * n + j);
        }
    }
}

/// Pfaffian by Parlett–Reid `LTLᵀ` reduction with partial pivoting.
pub fn pfaffian(m: &SkewMatrix) -> Result<Complex64> {
    let n = m.dim();
    if n % 2 == 1 {
        return Err(Error::InvalidParameter(format!(
            "Pfaffian of odd dimension {n}"
        )));
    }
    let defect = m.skew_defect();
    if defect > SKEW_TOL {
        return Err(Error::InvalidParameter(format!(
            "matrix is not skew-symmetric (defect {defect:.3e})"
        )));
    }
    let mut a = m.clone();
    let mut pf = Complex64::new(1.0, 0.0);
    let mut tau = vec![Complex64::new(0.0, 0.0); n];
    let mut col = vec![Complex64::new(0.0, 0.0); n];
    for k in (0..n.saturating_sub(1)).step_by(2) {
        let pivot = (k + 1..n)
            .max_by(|&x, &y| a.get(x, k).norm().total_cmp(&a.get(y, k).norm()))
            .expect("non-empty range");
        if pivot != k + 1 {
            a.swap(k + 1, pivot);
            pf = -pf;
        }
        let head = a.get(k, k + 1);
        if head == Complex64::new(0.0, 0.0) {
            return Ok(Complex64::new(0.0, 0.0));
        }
        pf *= head;
        if k + 2 < n {
            for j in k + 2..n {
                tau[j] = a.get(k, j) / head;
                col[j] = a.get(j, k + 1);
            }
            for i in k + 2..n {
                for j in k + 2..n {
                    let x = a.get(i, j) + tau[i] * col[j] - col[i] * tau[j];
                    a.set(i, j, x);
                }
            }
        }
    }
    Ok(pf)
}
