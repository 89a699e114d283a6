//! Small self-contained linear algebra kernels used by the solver stack:
//! dense symmetric matrices with Cholesky and Jacobi eigendecomposition,
//! an envelope (skyline) Cholesky for the sparse subdomain operators, an
//! SPD tridiagonal factorization for mortar mass matrices, and a
//! restart-free matrix-free GMRES.

mod dense;
mod envelope;
mod gmres;
mod tridiag;

pub use dense::{DenseCholesky, DenseMat, JacobiEigen};
pub use envelope::{envelope_size, EnvelopeCholesky};
pub use gmres::{gmres, GmresOutcome};
pub use tridiag::TridiagFactor;

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut s = 0.0;
    for i in 0..a.len() {
        s += a[i] * b[i];
    }
    s
}

pub(crate) fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
