//! Dense row-major matrices for the small systems that show up at
//! interfaces (mortar cross-mass blocks, Woodbury capacitance systems,
//! quadratic forms of the polynomial verifier).

/// Dense row-major matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMat {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMat {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// y = A x
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        let mut y = vec![0.0; self.rows];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            y[i] = super::dot(row, x);
        }
        y
    }

    /// y = A^T x
    pub fn matvec_transpose(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.rows);
        let mut y = vec![0.0; self.cols];
        for i in 0..self.rows {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for j in 0..self.cols {
                y[j] += row[j] * x[i];
            }
        }
        y
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn max_asymmetry(&self) -> f64 {
        assert_eq!(self.rows, self.cols);
        let mut m: f64 = 0.0;
        for i in 0..self.rows {
            for j in 0..i {
                m = m.max((self[(i, j)] - self[(j, i)]).abs());
            }
        }
        m
    }

    /// Cholesky factorization A = L L^T. Fails on non-SPD input.
    pub fn cholesky(&self) -> Option<DenseCholesky> {
        assert_eq!(self.rows, self.cols);
        let n = self.rows;
        let mut l = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let mut s = self[(i, j)];
                for k in 0..j {
                    s -= l[i * n + k] * l[j * n + k];
                }
                if i == j {
                    if s <= 0.0 {
                        return None;
                    }
                    l[i * n + i] = s.sqrt();
                } else {
                    l[i * n + j] = s / l[j * n + j];
                }
            }
        }
        Some(DenseCholesky { n, l })
    }
}

impl std::ops::Index<(usize, usize)> for DenseMat {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMat {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Lower-triangular Cholesky factor of a dense SPD matrix.
#[derive(Debug, Clone)]
pub struct DenseCholesky {
    n: usize,
    l: Vec<f64>,
}

impl DenseCholesky {
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let n = self.n;
        let mut x = b.to_vec();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.l[i * n + k] * x[k];
            }
            x[i] /= self.l[i * n + i];
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= self.l[k * n + i] * x[k];
            }
            x[i] /= self.l[i * n + i];
        }
        x
    }
}

/// Eigendecomposition of a dense symmetric matrix by cyclic Jacobi
/// rotations. The sweep order is fixed (row-major over the strict upper
/// triangle) so results are deterministic.
#[derive(Debug, Clone)]
pub struct JacobiEigen {
    pub eigenvalues: Vec<f64>,
    /// Column j holds the eigenvector of `eigenvalues[j]`.
    pub eigenvectors: DenseMat,
}

impl JacobiEigen {
    /// `off_tol` bounds the largest surviving off-diagonal entry.
    pub fn new(a: &DenseMat, off_tol: f64) -> Self {
        assert_eq!(a.rows, a.cols);
        let n = a.rows;
        let mut m = a.clone();
        let mut v = DenseMat::identity(n);

        let max_sweeps = 100;
        for _ in 0..max_sweeps {
            let mut off: f64 = 0.0;
            for p in 0..n {
                for q in (p + 1)..n {
                    off = off.max(m[(p, q)].abs());
                }
            }
            if off <= off_tol {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = m[(p, q)];
                    if apq.abs() <= off_tol * 1e-2 {
                        continue;
                    }
                    let app = m[(p, p)];
                    let aqq = m[(q, q)];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = if theta >= 0.0 {
                        1.0 / (theta + (1.0 + theta * theta).sqrt())
                    } else {
                        -1.0 / (-theta + (1.0 + theta * theta).sqrt())
                    };
                    let c = 1.0 / (1.0 + t * t).sqrt();
                    let s = t * c;
                    for k in 0..n {
                        let mkp = m[(k, p)];
                        let mkq = m[(k, q)];
                        m[(k, p)] = c * mkp - s * mkq;
                        m[(k, q)] = s * mkp + c * mkq;
                    }
                    for k in 0..n {
                        let mpk = m[(p, k)];
                        let mqk = m[(q, k)];
                        m[(p, k)] = c * mpk - s * mqk;
                        m[(q, k)] = s * mpk + c * mqk;
                    }
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - s * vkq;
                        v[(k, q)] = s * vkp + c * vkq;
                    }
                }
            }
        }

        let eigenvalues = (0..n).map(|i| m[(i, i)]).collect();
        Self {
            eigenvalues,
            eigenvectors: v,
        }
    }

    /// Largest eigenvalue with its eigenvector.
    pub fn largest(&self) -> (f64, Vec<f64>) {
        let n = self.eigenvalues.len();
        let mut idx = 0;
        for i in 1..n {
            if self.eigenvalues[i] > self.eigenvalues[idx] {
                idx = i;
            }
        }
        let vec = (0..n).map(|k| self.eigenvectors[(k, idx)]).collect();
        (self.eigenvalues[idx], vec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cholesky_solve_roundtrip() {
        let mut a = DenseMat::zeros(3, 3);
        // SPD by construction: diag dominant
        let vals = [[4.0, 1.0, 0.5], [1.0, 3.0, 0.2], [0.5, 0.2, 2.0]];
        for i in 0..3 {
            for j in 0..3 {
                a[(i, j)] = vals[i][j];
            }
        }
        let f = a.cholesky().unwrap();
        let b = vec![1.0, -2.0, 3.0];
        let x = f.solve(&b);
        let r = a.matvec(&x);
        for i in 0..3 {
            assert!((r[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite() {
        let mut a = DenseMat::zeros(2, 2);
        a[(0, 0)] = 1.0;
        a[(1, 1)] = -1.0;
        assert!(a.cholesky().is_none());
    }

    #[test]
    fn jacobi_eigen_known_spectrum() {
        // diag(1, 2, 5) conjugated by a rotation keeps the spectrum
        let mut a = DenseMat::zeros(2, 2);
        a[(0, 0)] = 2.0;
        a[(0, 1)] = 1.0;
        a[(1, 0)] = 1.0;
        a[(1, 1)] = 2.0;
        let e = JacobiEigen::new(&a, 1e-12);
        let mut evs = e.eigenvalues.clone();
        evs.sort_by(|x, y| x.partial_cmp(y).unwrap());
        assert!((evs[0] - 1.0).abs() < 1e-12);
        assert!((evs[1] - 3.0).abs() < 1e-12);
        let (lmax, v) = e.largest();
        assert!((lmax - 3.0).abs() < 1e-12);
        // eigenvector of 3 is (1,1)/sqrt(2) up to sign
        assert!((v[0].abs() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-10);
        assert!((v[0] - v[1]).abs() < 1e-10);
    }
}
