//! Householder QR for tall dense matrices, column-major storage.

/// Columns whose residual norm after projecting out earlier columns falls
/// below this fraction of their original norm are treated as dependent.
const RANK_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone)]
pub(crate) struct Qr {
    n: usize,
    p: usize,
    /// Householder vectors below the diagonal, R above it.
    qr: Vec<f64>,
    rdiag: Vec<f64>,
}

impl Qr {
    /// Factorizes the `n × p` column-major matrix `a`.
    ///
    /// Returns the index of the first column that is linearly dependent on
    /// the columns before it.
    pub(crate) fn new(mut a: Vec<f64>, n: usize, p: usize) -> Result<Qr, usize> {
        debug_assert_eq!(a.len(), n * p);
        let mut rdiag = vec![0.0; p];
        for k in 0..p {
            let original = a[k * n..(k + 1) * n]
                .iter()
                .fold(0.0f64, |acc, v| acc.hypot(*v));
            let mut nrm = a[k * n + k..(k + 1) * n]
                .iter()
                .fold(0.0f64, |acc, v| acc.hypot(*v));
            if original == 0.0 || nrm <= RANK_TOLERANCE * original {
                return Err(k);
            }
            if a[k * n + k] < 0.0 {
                nrm = -nrm;
            }
            for v in &mut a[k * n + k..(k + 1) * n] {
                *v /= nrm;
            }
            a[k * n + k] += 1.0;
            for j in k + 1..p {
                let mut s = 0.0;
                for i in k..n {
                    s += a[k * n + i] * a[j * n + i];
                }
                s = -s / a[k * n + k];
                for i in k..n {
                    a[j * n + i] += s * a[k * n + i];
                }
            }
            rdiag[k] = -nrm;
        }
        Ok(Qr { n, p, qr: a, rdiag })
    }

    fn r(&self, i: usize, j: usize) -> f64 {
        if i == j {
            self.rdiag[i]
        } else {
            self.qr[j * self.n + i]
        }
    }

    /// Least-squares solution of `A x ≈ b`.
    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let (n, p) = (self.n, self.p);
        let mut y = b.to_vec();
        for k in 0..p {
            let col = &self.qr[k * n..(k + 1) * n];
            let mut s = 0.0;
            for i in k..n {
                s += col[i] * y[i];
            }
            s = -s / col[k];
            for i in k..n {
                y[i] += s * col[i];
            }
        }
        let mut x = vec![0.0; p];
        for k in (0..p).rev() {
            let mut s = y[k];
            for j in k + 1..p {
                s -= self.r(k, j) * x[j];
            }
            x[k] = s / self.rdiag[k];
        }
        x
    }

    /// Diagonal of `(AᵀA)⁻¹ = R⁻¹ R⁻ᵀ`.
    pub(crate) fn inverse_gram_diagonal(&self) -> Vec<f64> {
        let p = self.p;
        // rinv is upper triangular, row-major
        let mut rinv = vec![0.0; p * p];
        for j in 0..p {
            rinv[j * p + j] = 1.0 / self.rdiag[j];
            for i in (0..j).rev() {
                let mut s = 0.0;
                for k in i + 1..=j {
                    s += self.r(i, k) * rinv[k * p + j];
                }
                rinv[i * p + j] = -s / self.rdiag[i];
            }
        }
        (0..p)
            .map(|i| (i..p).map(|k| rinv[i * p + k].powi(2)).sum())
            .collect()
    }
}

/// Cholesky factor of a symmetric positive-definite `p × p` row-major matrix.
#[derive(Debug, Clone)]
pub(crate) struct Cholesky {
    p: usize,
    l: Vec<f64>,
}

impl Cholesky {
    pub(crate) fn new(a: &[f64], p: usize) -> Option<Cholesky> {
        let mut l = vec![0.0; p * p];
        for i in 0..p {
            for j in 0..=i {
                let mut s = a[i * p + j];
                for k in 0..j {
                    s -= l[i * p + k] * l[j * p + k];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return None;
                    }
                    l[i * p + i] = s.sqrt();
                } else {
                    l[i * p + j] = s / l[j * p + j];
                }
            }
        }
        Some(Cholesky { p, l })
    }

    pub(crate) fn solve(&self, b: &[f64]) -> Vec<f64> {
        let p = self.p;
        let mut y = b.to_vec();
        for i in 0..p {
            for k in 0..i {
                y[i] -= self.l[i * p + k] * y[k];
            }
            y[i] /= self.l[i * p + i];
        }
        for i in (0..p).rev() {
            for k in i + 1..p {
                y[i] -= self.l[k * p + i] * y[k];
            }
            y[i] /= self.l[i * p + i];
        }
        y
    }

    /// Diagonal of the inverse of the factored matrix.
    pub(crate) fn inverse_diagonal(&self) -> Vec<f64> {
        (0..self.p)
            .map(|j| {
                let mut e = vec![0.0; self.p];
                e[j] = 1.0;
                self.solve(&e)[j]
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_square_system() {
        // columns (1,1,1), (0,1,2)
        let qr = Qr::new(vec![1.0, 1.0, 1.0, 0.0, 1.0, 2.0], 3, 2).unwrap();
        let x = qr.solve(&[1.0, 3.0, 5.0]);
        assert!((x[0] - 1.0).abs() < 1e-12 && (x[1] - 2.0).abs() < 1e-12);
        // (XᵀX)⁻¹ = [[5/6, -1/2], [-1/2, 1/2]]
        let diag = qr.inverse_gram_diagonal();
        assert!((diag[0] - 5.0 / 6.0).abs() < 1e-12);
        assert!((diag[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn reports_dependent_column() {
        let a = vec![1.0, 1.0, 1.0, 0.0, 1.0, 2.0, 0.0, 2.0, 4.0];
        assert_eq!(Qr::new(a, 3, 3).unwrap_err(), 2);
        assert_eq!(Qr::new(vec![0.0; 6], 3, 2).unwrap_err(), 0);
    }

    #[test]
    fn cholesky_inverse() {
        let a = [4.0, 2.0, 2.0, 3.0];
        let c = Cholesky::new(&a, 2).unwrap();
        let x = c.solve(&[2.0, 1.0]);
        assert!((x[0] - 0.5).abs() < 1e-12 && x[1].abs() < 1e-12);
        let d = c.inverse_diagonal();
        assert!((d[0] - 3.0 / 8.0).abs() < 1e-12 && (d[1] - 0.5).abs() < 1e-12);
        assert!(Cholesky::new(&[1.0, 1.0, 1.0, 1.0], 2).is_none());
    }
}
