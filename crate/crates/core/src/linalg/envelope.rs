//! Envelope (skyline) Cholesky factorization for sparse SPD matrices.
//!
//! Fill-in during Cholesky stays inside the envelope, so for the banded
//! matrices produced by structured lattice meshes this is a direct sparse
//! factorization with no symbolic analysis step. Inner loops run over
//! contiguous row slices.

/// Lower-triangular envelope Cholesky factor. Row `i` stores the entries
/// of columns `first[i]..=i` contiguously.
#[derive(Debug, Clone)]
pub struct EnvelopeCholesky {
    n: usize,
    first: Vec<usize>,
    start: Vec<usize>, // start[i]: offset of row i in data; len n+1
    data: Vec<f64>,
}

/// Total stored entries of the envelope spanned by symmetric triplets.
pub fn envelope_size(n: usize, triplets: &[(usize, usize, f64)]) -> usize {
    let mut first: Vec<usize> = (0..n).collect();
    for &(i, j, _) in triplets {
        let (r, c) = if i >= j { (i, j) } else { (j, i) };
        if c < first[r] {
            first[r] = c;
        }
    }
    (0..n).map(|i| i - first[i] + 1).sum()
}

impl EnvelopeCholesky {
    /// Factorize from symmetric triplets (only the lower triangle of the
    /// input is read; duplicates are summed). Returns `None` when a
    /// non-positive pivot is met.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Option<Self> {
        let mut first: Vec<usize> = (0..n).collect();
        for &(i, j, _) in triplets {
            let (r, c) = if i >= j { (i, j) } else { (j, i) };
            if c < first[r] {
                first[r] = c;
            }
        }
        let mut start = vec![0usize; n + 1];
        for i in 0..n {
            start[i + 1] = start[i] + (i - first[i] + 1);
        }
        let mut data = vec![0.0; start[n]];
        for &(i, j, v) in triplets {
            let (r, c) = if i >= j { (i, j) } else { (j, i) };
            if i == j && r != c {
                continue;
            }
            data[start[r] + (c - first[r])] += v;
        }

        for i in 0..n {
            let fi = first[i];
            let (prev, cur) = data.split_at_mut(start[i]);
            let row_i = &mut cur[..(i - fi + 1)];
            for j in fi..i {
                let fj = first[j];
                let lo = fi.max(fj);
                let row_j = &prev[start[j]..start[j + 1]];
                let a = &row_i[(lo - fi)..(j - fi)];
                let b = &row_j[(lo - fj)..(j - fj)];
                let mut s = row_i[j - fi];
                for k in 0..a.len() {
                    s -= a[k] * b[k];
                }
                row_i[j - fi] = s / row_j[j - fj];
            }
            let mut d = row_i[i - fi];
            for k in 0..(i - fi) {
                d -= row_i[k] * row_i[k];
            }
            if d <= 0.0 || !d.is_finite() {
                return None;
            }
            row_i[i - fi] = d.sqrt();
        }

        Some(Self {
            n,
            first,
            start,
            data,
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve A x = b where A = L L^T.
    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        debug_assert_eq!(b.len(), self.n);
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }

    pub fn solve_in_place(&self, x: &mut [f64]) {
        let n = self.n;
        // forward: L y = b
        for i in 0..n {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let mut s = x[i];
            let xs = &x[fi..i];
            for k in 0..xs.len() {
                s -= row[k] * xs[k];
            }
            x[i] = s / row[row.len() - 1];
        }
        // backward: L^T x = y (column traversal of L)
        for i in (0..n).rev() {
            let fi = self.first[i];
            let row = &self.data[self.start[i]..self.start[i + 1]];
            let xi = x[i] / row[row.len() - 1];
            x[i] = xi;
            let xs = &mut x[fi..i];
            for k in 0..xs.len() {
                xs[k] -= row[k] * xi;
            }
        }
    }
}
