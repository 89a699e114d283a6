//! SPD tridiagonal factorization (L D L^T) used for mortar mass matrices.

#[derive(Debug, Clone)]
pub struct TridiagFactor {
    d: Vec<f64>, // pivots
    l: Vec<f64>, // subdiagonal multipliers, len n-1
    diag: Vec<f64>,
    sub: Vec<f64>,
}

impl TridiagFactor {
    /// `diag` has length n, `sub` length n-1 (entries (i+1, i)).
    pub fn new(diag: &[f64], sub: &[f64]) -> Option<Self> {
        let n = diag.len();
        assert!(n >= 1 && sub.len() + 1 == n);
        let mut d = vec![0.0; n];
        let mut l = vec![0.0; n.saturating_sub(1)];
        d[0] = diag[0];
        if d[0] <= 0.0 {
            return None;
        }
        for i in 1..n {
            l[i - 1] = sub[i - 1] / d[i - 1];
            d[i] = diag[i] - l[i - 1] * sub[i - 1];
            if d[i] <= 0.0 || !d[i].is_finite() {
                return None;
            }
        }
        Some(Self {
            d,
            l,
            diag: diag.to_vec(),
            sub: sub.to_vec(),
        })
    }

    pub fn dim(&self) -> usize {
        self.d.len()
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        debug_assert_eq!(b.len(), n);
        let mut x = b.to_vec();
        for i in 1..n {
            x[i] -= self.l[i - 1] * x[i - 1];
        }
        for i in 0..n {
            x[i] /= self.d[i];
        }
        for i in (0..n - 1).rev() {
            x[i] -= self.l[i] * x[i + 1];
        }
        x
    }

    /// y = M x with the original tridiagonal matrix.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let n = self.d.len();
        debug_assert_eq!(x.len(), n);
        let mut y = vec![0.0; n];
        for i in 0..n {
            y[i] = self.diag[i] * x[i];
            if i > 0 {
                y[i] += self.sub[i - 1] * x[i - 1];
            }
            if i + 1 < n {
                y[i] += self.sub[i] * x[i + 1];
            }
        }
        y
    }

    /// x^T M x
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        super::dot(&self.matvec(x), x)
    }
}
