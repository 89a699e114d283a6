//! Restart-free GMRES with modified Gram-Schmidt orthogonalization and
//! Givens rotations for the Hessenberg least-squares update.
//!
//! The interface systems this is used for are small, so the full Krylov
//! basis is kept and no restarting is needed.

use super::{dot, norm2};

#[derive(Debug, Clone)]
pub struct GmresOutcome {
    pub solution: Vec<f64>,
    /// Relative residual after each iteration (length = iterations used).
    pub residuals: Vec<f64>,
    pub converged: bool,
    pub stagnated: bool,
    /// Approximate solution after each iteration, in order.
    pub iterates: Vec<Vec<f64>>,
}

/// Solve A x = b (matrix-free) from a zero initial guess, stopping when
/// the relative residual drops below `tol` or `max_iter` is reached.
pub fn gmres<F>(apply: F, b: &[f64], tol: f64, max_iter: usize) -> GmresOutcome
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == 0.0 || n == 0 {
        return GmresOutcome {
            solution: vec![0.0; n],
            residuals: vec![],
            converged: true,
            stagnated: false,
            iterates: vec![],
        };
    }

    let max_iter = max_iter.min(n);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(max_iter + 1);
    basis.push(b.iter().map(|v| v / bnorm).collect());

    // column-major Hessenberg after Givens, plus rotation bookkeeping
    let mut h_cols: Vec<Vec<f64>> = Vec::new();
    let mut cs: Vec<f64> = Vec::new();
    let mut sn: Vec<f64> = Vec::new();
    let mut g = vec![bnorm]; // rotated rhs

    let mut residuals = Vec::new();
    let mut iterates = Vec::new();
    let mut converged = false;
    let mut stagnated = false;

    let solution_at = |k: usize, h_cols: &[Vec<f64>], g: &[f64], basis: &[Vec<f64>]| {
        // back substitution on the k x k upper-triangular system
        let mut y = vec![0.0; k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in (i + 1)..k {
                s -= h_cols[j][i] * y[j];
            }
            y[i] = s / h_cols[i][i];
        }
        let mut x = vec![0.0; basis[0].len()];
        for (j, yj) in y.iter().enumerate() {
            for i in 0..x.len() {
                x[i] += yj * basis[j][i];
            }
        }
        x
    };

    for k in 0..max_iter {
        let mut w = apply(&basis[k]);
        let mut col = Vec::with_capacity(k + 2);
        for v in basis.iter() {
            let h = dot(&w, v);
            for i in 0..n {
                w[i] -= h * v[i];
            }
            col.push(h);
        }
        let hnext = norm2(&w);
        col.push(hnext);

        // apply accumulated rotations to the new column
        for i in 0..k {
            let t = cs[i] * col[i] + sn[i] * col[i + 1];
            col[i + 1] = -sn[i] * col[i] + cs[i] * col[i + 1];
            col[i] = t;
        }
        // new rotation eliminating col[k+1]
        let (c, s) = {
            let a = col[k];
            let b2 = col[k + 1];
            let r = (a * a + b2 * b2).sqrt();
            if r == 0.0 {
                (1.0, 0.0)
            } else {
                (a / r, b2 / r)
            }
        };
        let r = c * col[k] + s * col[k + 1];
        col[k] = r;
        col[k + 1] = 0.0;
        cs.push(c);
        sn.push(s);
        let gk = g[k];
        g.push(-s * gk);
        g[k] = c * gk;
        h_cols.push(col);

        let rel = g[k + 1].abs() / bnorm;
        residuals.push(rel);
        iterates.push(solution_at(k + 1, &h_cols, &g, &basis));

        if rel < tol {
            converged = true;
            break;
        }
        if hnext <= f64::EPSILON * bnorm {
            // exact breakdown: Krylov space exhausted, solution is exact
            converged = rel < tol || rel < 1e-14;
            stagnated = !converged;
            break;
        }
        if k + 1 < max_iter {
            basis.push(w.iter().map(|v| v / hnext).collect());
        }
    }

    let solution = iterates.last().cloned().unwrap_or_else(|| vec![0.0; n]);
    GmresOutcome {
        solution,
        residuals,
        converged,
        stagnated,
        iterates,
    }
}
