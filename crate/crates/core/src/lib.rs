//! Non-overlapping Schwarz domain decomposition for the 2D reaction-diffusion
//! problem (Id - Laplace)u = f with P1 finite elements on independently
//! generated, non-matching subdomain grids.
//!
//! Subdomains exchange Robin data (normal flux plus alpha times the trace)
//! through mortar-type multiplier spaces on each interface side: piecewise
//! linear functions whose degree drops to constant on the two end intervals.
//! Coupling between non-matching grids goes through an exact L2 projection
//! assembled on the merged interface partition.
//!
//! The crate provides:
//! - [`mesh2d`]: structured triangulations of rectangles with tagged boundaries,
//! - [`fem_p1`]: P1 assembly, local Robin subdomain solves, discrete norms,
//! - [`mortar`]: mortar spaces, inter-grid L2 projection, Robin moments,
//! - [`schwarz`]: the fixed-point iteration, its energy diagnostics, and a
//!   GMRES-accelerated interface formulation,
//! - [`study`]: configuration, named presets, and the CSV-emitting studies
//!   behind the command line interface,
//! - [`legendre`]: a standalone numerical verifier for the Legendre-polynomial
//!   inequality underlying the mortar end-interval construction at higher
//!   polynomial degree.

// Indexed loops in the assembly and factorization kernels mirror the
// stencil structure; iterator rewrites obscure them.
#![allow(clippy::needless_range_loop)]

pub mod error;
pub mod fem_p1;
pub mod legendre;
pub mod linalg;
pub mod mesh2d;
pub mod mortar;
pub mod schwarz;
pub mod study;

pub use error::{Error, Result};
