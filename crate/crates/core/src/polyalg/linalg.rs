//! Dense Gaussian elimination over either backend.

use thiserror::Error;

use super::scalar::Scalar;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("matrix is rank deficient (column {0} has no pivot)")]
    Singular(usize),
    #[error("system is inconsistent (residual {0:e})")]
    Inconsistent(f64),
    #[error("dimension mismatch")]
    Dimension,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<S: Scalar> {
    rows: usize,
    cols: usize,
    data: Vec<S>,
}

impl<S: Scalar> Matrix<S> {
    pub fn zeros(ctx: &S::Ctx, rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![S::zero(ctx); rows * cols] }
    }

    pub fn identity(ctx: &S::Ctx, n: usize) -> Self {
        let mut m = Self::zeros(ctx, n, n);
        for i in 0..n {
            m.set(i, i, S::one(ctx));
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<S>>) -> Option<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return None;
        }
        Some(Self { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> &S {
        &self.data[i * self.cols + j]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: S) {
        self.data[i * self.cols + j] = v;
    }

    pub fn mul_vec(&self, x: &[S]) -> Vec<S> {
        (0..self.rows)
            .map(|i| {
                (0..self.cols).fold(S::zero(&x[0].ctx()), |acc, j| acc.add(&self.get(i, j).mul(&x[j])))
            })
            .collect()
    }

    pub fn norm(&self) -> f64 {
        self.data.iter().map(|c| c.abs()).fold(0.0, f64::max)
    }

    /// Solves `A x = b` for `rows >= cols` by partially pivoted elimination.
    ///
    /// Overdetermined systems must be consistent: the residual of the
    /// returned solution is checked against `tau * max(|b|, |A||x|)` in the
    /// numeric backend, and must vanish exactly in the exact backend.
    pub fn solve(&self, b: &[S]) -> Result<Vec<S>, LinalgError> {
        if b.len() != self.rows || self.rows < self.cols {
            return Err(LinalgError::Dimension);
        }
        if self.cols == 0 {
            let r = b.iter().map(|x| x.abs()).fold(0.0, f64::max);
            return if b.iter().all(|x| x.is_zero()) {
                Ok(vec![])
            } else {
                Err(LinalgError::Inconsistent(r))
            };
        }
        let ctx = b[0].ctx();
        let (n, m) = (self.rows, self.cols);
        let mut a = self.data.clone();
        let mut rhs = b.to_vec();
        let scale = self.norm();
        for col in 0..m {
            let (piv, mag) = (col..n)
                .map(|r| (r, a[r * m + col].abs()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            let pivot_ok = if S::EXACT {
                (col..n).any(|r| !a[r * m + col].is_exact_zero())
            } else {
                mag > S::tolerance(&ctx) * scale && !a[piv * m + col].is_exact_zero()
            };
            if !pivot_ok {
                return Err(LinalgError::Singular(col));
            }
            let piv = if S::EXACT {
                (col..n).find(|&r| !a[r * m + col].is_exact_zero()).unwrap_or(piv)
            } else {
                piv
            };
            if piv != col {
                for j in 0..m {
                    a.swap(piv * m + j, col * m + j);
                }
                rhs.swap(piv, col);
            }
            let inv = a[col * m + col].inv().expect("nonzero pivot");
            for r in col + 1..n {
                if a[r * m + col].is_exact_zero() {
                    continue;
                }
                let f = a[r * m + col].mul(&inv);
                for j in col..m {
                    let v = a[r * m + j].sub(&f.mul(&a[col * m + j]));
                    a[r * m + j] = v;
                }
                rhs[r] = rhs[r].sub(&f.mul(&rhs[col]));
            }
        }
        let mut x = vec![S::zero(&ctx); m];
        for col in (0..m).rev() {
            let mut acc = rhs[col].clone();
            for j in col + 1..m {
                acc = acc.sub(&a[col * m + j].mul(&x[j]));
            }
            x[col] = acc.div(&a[col * m + col]).expect("nonzero pivot");
        }
        if n > m {
            let ax = self.mul_vec(&x);
            let res: Vec<S> = ax.iter().zip(b).map(|(u, v)| u.sub(v)).collect();
            let rmax = res.iter().map(|r| r.abs()).fold(0.0, f64::max);
            let bmax = b.iter().map(|r| r.abs()).fold(0.0, f64::max);
            let xmax = x.iter().map(|r| r.abs()).fold(0.0, f64::max);
            let tol_scale = bmax.max(scale * xmax);
            if !res.iter().all(|r| r.is_negligible(tol_scale)) {
                return Err(LinalgError::Inconsistent(rmax));
            }
        }
        Ok(x)
    }
}
