//! Mortar multiplier spaces on interface sides, the L2 projection between
//! opposite sides of a non-matching interface, and Robin data moments.
//!
//! A side's trace grid is a 1D partition s_0 < ... < s_n of the interface
//! in arclength. The mortar space on that side consists of the piecewise
//! linear functions that are constant on the two end intervals; its
//! dimension is the interior node count n-1. All coupling integrals are
//! piecewise polynomial products, evaluated exactly with a 2-point Gauss
//! rule per segment of the merged partition.

use crate::error::{Error, Result};
use crate::linalg::{DenseMat, TridiagFactor};
use crate::mesh2d::InterfaceId;

/// Breakpoints within this absolute distance are collapsed when merging
/// grids; lattice coordinates are exact at dyadic resolutions so this only
/// guards arithmetic noise.
pub const MERGE_TOL: f64 = 1e-12;

const GAUSS2: f64 = 0.577350269189625764509148780502; // 1/sqrt(3)

/// Trace partition of one interface side.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceGrid {
    pub interface: InterfaceId,
    pub subdomain: usize,
    points: Vec<f64>,
}

impl InterfaceGrid {
    pub fn new(interface: InterfaceId, subdomain: usize, points: Vec<f64>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(
                "interface grid needs at least 2 breakpoints".into(),
            ));
        }
        for w in points.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::InvalidArgument(
                    "interface grid breakpoints must be strictly increasing".into(),
                ));
            }
        }
        Ok(Self {
            interface,
            subdomain,
            points,
        })
    }

    pub fn points(&self) -> &[f64] {
        &self.points
    }

    pub fn segments(&self) -> usize {
        self.points.len() - 1
    }

    pub fn length(&self) -> f64 {
        self.points[self.points.len() - 1] - self.points[0]
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| w[1] - w[0]).collect()
    }
}

/// Piecewise linear function given by nodal values on an interface grid.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewiseLinearTrace {
    pub grid: InterfaceGrid,
    pub values: Vec<f64>,
}

impl PiecewiseLinearTrace {
    pub fn new(grid: InterfaceGrid, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.points().len() {
            return Err(Error::InvalidArgument(format!(
                "trace needs {} nodal values, got {}",
                grid.points().len(),
                values.len()
            )));
        }
        Ok(Self { grid, values })
    }

    pub fn eval(&self, s: f64) -> f64 {
        eval_pw_linear(self.grid.points(), &self.values, s)
    }
}

fn eval_pw_linear(points: &[f64], values: &[f64], s: f64) -> f64 {
    let n = points.len();
    if s <= points[0] {
        return values[0];
    }
    if s >= points[n - 1] {
        return values[n - 1];
    }
    let t = points.partition_point(|&p| p <= s) - 1;
    let t = t.min(n - 2);
    let len = points[t + 1] - points[t];
    let w = (s - points[t]) / len;
    values[t] * (1.0 - w) + values[t + 1] * w
}

/// Mortar multiplier space on one interface side: interior hat functions,
/// extended as constants over the first and last grid interval.
#[derive(Debug, Clone, PartialEq)]
pub struct MortarSpace {
    grid: InterfaceGrid,
}

impl MortarSpace {
    /// Needs at least one interior node (segments >= 2). Grids with a
    /// single segment have no mortar space and are rejected.
    pub fn new(grid: InterfaceGrid) -> Result<Self> {
        if grid.segments() < 2 {
            return Err(Error::MortarTooCoarse {
                points: grid.points().len(),
            });
        }
        Ok(Self { grid })
    }

    pub fn grid(&self) -> &InterfaceGrid {
        &self.grid
    }

    /// Number of basis functions = interior node count.
    pub fn dim(&self) -> usize {
        self.grid.segments() - 1
    }

    /// Nodal values (on the full grid) of the mortar function with the
    /// given coefficients: interior nodes carry the coefficients, the two
    /// end nodes repeat their neighboring interior value.
    pub fn to_nodal(&self, coeffs: &[f64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.dim());
        let n = self.grid.points().len();
        let mut v = vec![0.0; n];
        v[1..n - 1].copy_from_slice(coeffs);
        v[0] = v[1];
        v[n - 1] = v[n - 2];
        v
    }

    pub fn eval(&self, coeffs: &[f64], s: f64) -> f64 {
        eval_pw_linear(self.grid.points(), &self.to_nodal(coeffs), s)
    }

    pub fn basis_nodal(&self, i: usize) -> Vec<f64> {
        let mut c = vec![0.0; self.dim()];
        c[i] = 1.0;
        self.to_nodal(&c)
    }

    /// Tridiagonal mass matrix (diag, subdiag) of the basis.
    pub fn mass_entries(&self) -> (Vec<f64>, Vec<f64>) {
        let dim = self.dim();
        let pts = self.grid.points();
        let nodal: Vec<Vec<f64>> = (0..dim).map(|i| self.basis_nodal(i)).collect();
        let prod = |a: &[f64], b: &[f64]| -> f64 {
            let mut s = 0.0;
            for t in 0..pts.len() - 1 {
                let len = pts[t + 1] - pts[t];
                s += len / 6.0
                    * (2.0 * a[t] * b[t]
                        + a[t] * b[t + 1]
                        + a[t + 1] * b[t]
                        + 2.0 * a[t + 1] * b[t + 1]);
            }
            s
        };
        let diag: Vec<f64> = (0..dim).map(|i| prod(&nodal[i], &nodal[i])).collect();
        let sub: Vec<f64> = (1..dim).map(|i| prod(&nodal[i - 1], &nodal[i])).collect();
        (diag, sub)
    }

    pub fn mass_factor(&self) -> TridiagFactor {
        let (diag, sub) = self.mass_entries();
        TridiagFactor::new(&diag, &sub).expect("mortar mass matrix is SPD for any valid grid")
    }
}

/// Build the mortar space of a grid (alias of [`MortarSpace::new`]).
pub fn build_mortar(grid: InterfaceGrid) -> Result<MortarSpace> {
    MortarSpace::new(grid)
}

/// Sorted union of two breakpoint lists with near-duplicates collapsed.
/// Endpoints must agree within [`MERGE_TOL`].
pub fn merge_breakpoints(a: &[f64], b: &[f64]) -> Result<Vec<f64>> {
    if (a[0] - b[0]).abs() > MERGE_TOL || (a[a.len() - 1] - b[b.len() - 1]).abs() > MERGE_TOL {
        return Err(Error::GridMismatch(format!(
            "endpoints differ: [{}, {}] vs [{}, {}]",
            a[0],
            a[a.len() - 1],
            b[0],
            b[b.len() - 1]
        )));
    }
    let mut all: Vec<f64> = a.iter().chain(b.iter()).cloned().collect();
    all.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let mut merged = Vec::with_capacity(all.len());
    for v in all {
        match merged.last() {
            Some(&last) if v - last <= MERGE_TOL => {}
            _ => merged.push(v),
        }
    }
    Ok(merged)
}

/// Merge the partitions of two sides of the same interface.
pub fn merge_grids(a: &InterfaceGrid, b: &InterfaceGrid) -> Result<Vec<f64>> {
    if a.interface != b.interface {
        return Err(Error::GridMismatch(format!(
            "cannot merge grids of interfaces {} and {}",
            a.interface, b.interface
        )));
    }
    merge_breakpoints(a.points(), b.points())
}

fn for_each_gauss_point(merged: &[f64], mut f: impl FnMut(f64, f64)) {
    for w in merged.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let mid = 0.5 * (lo + hi);
        let half = 0.5 * (hi - lo);
        let offset = half * GAUSS2;
        f(mid - offset, half);
        f(mid + offset, half);
    }
}

/// Exact integral of the product of two piecewise linear functions given
/// on (possibly different) grids over the same interface span.
pub fn integrate_product(
    grid_a: &[f64],
    vals_a: &[f64],
    grid_b: &[f64],
    vals_b: &[f64],
) -> Result<f64> {
    let merged = merge_breakpoints(grid_a, grid_b)?;
    let mut acc = 0.0;
    for_each_gauss_point(&merged, |s, w| {
        acc += w * eval_pw_linear(grid_a, vals_a, s) * eval_pw_linear(grid_b, vals_b, s);
    });
    Ok(acc)
}

/// Exact L2 norm squared of a piecewise linear function.
pub fn l2_norm_sq(grid: &[f64], vals: &[f64]) -> f64 {
    let mut acc = 0.0;
    for t in 0..grid.len() - 1 {
        let len = grid[t + 1] - grid[t];
        let (a, b) = (vals[t], vals[t + 1]);
        acc += len / 3.0 * (a * a + a * b + b * b);
    }
    acc
}

/// The L2-orthogonal projection from piecewise linear data on a source
/// grid onto the mortar space of a (generally different) target side.
/// `cross[i][j] = int psi_i^{target} chi_j^{source}` on the merged
/// partition; applying the operator solves the target mortar mass system.
#[derive(Debug, Clone)]
pub struct ProjectionOperator {
    source_points: Vec<f64>,
    target: MortarSpace,
    cross: DenseMat,
    mass: TridiagFactor,
}

impl ProjectionOperator {
    pub fn new(source: &InterfaceGrid, target: &MortarSpace) -> Result<Self> {
        let merged = merge_grids(source, target.grid())?;
        let dim = target.dim();
        let ns = source.points().len();
        let mut cross = DenseMat::zeros(dim, ns);
        let tgt_nodal: Vec<Vec<f64>> = (0..dim).map(|i| target.basis_nodal(i)).collect();
        let src = source.points();
        let tp = target.grid().points();
        for_each_gauss_point(&merged, |s, w| {
            // source hat functions: at most two nonzero at any point
            let t = (src.partition_point(|&p| p <= s).max(1) - 1).min(ns - 2);
            let len = src[t + 1] - src[t];
            let frac = ((s - src[t]) / len).clamp(0.0, 1.0);
            for i in 0..dim {
                let psi = eval_pw_linear(tp, &tgt_nodal[i], s);
                if psi != 0.0 {
                    cross[(i, t)] += w * psi * (1.0 - frac);
                    cross[(i, t + 1)] += w * psi * frac;
                }
            }
        });
        Ok(Self {
            source_points: src.to_vec(),
            target: target.clone(),
            cross,
            mass: target.mass_factor(),
        })
    }

    pub fn target(&self) -> &MortarSpace {
        &self.target
    }

    pub fn source_points(&self) -> &[f64] {
        &self.source_points
    }

    pub fn cross(&self) -> &DenseMat {
        &self.cross
    }

    pub fn mass(&self) -> &TridiagFactor {
        &self.mass
    }

    /// Moment vector C v of source nodal data against the target basis.
    pub fn moment(&self, source_values: &[f64]) -> Vec<f64> {
        assert_eq!(source_values.len(), self.source_points.len());
        self.cross.matvec(source_values)
    }

    /// Mortar coefficients of the projection of source nodal data.
    pub fn apply(&self, source_values: &[f64]) -> Vec<f64> {
        self.mass.solve(&self.moment(source_values))
    }
}

/// Build the projection operator (alias of [`ProjectionOperator::new`]).
pub fn build_projection(
    source: &InterfaceGrid,
    target: &MortarSpace,
) -> Result<ProjectionOperator> {
    ProjectionOperator::new(source, target)
}

/// Incoming Robin moment vector formed from the opposite side's data:
/// G[i] = int (alpha u - p) psi_i^{target}, with u the source-side trace
/// and p the source-side mortar function.
pub fn robin_moment(
    source_u: &PiecewiseLinearTrace,
    source_mortar: &MortarSpace,
    source_p: &[f64],
    alpha: f64,
    op: &ProjectionOperator,
) -> Result<Vec<f64>> {
    if source_u.grid.interface != op.target.grid().interface
        || source_mortar.grid().interface != op.target.grid().interface
    {
        return Err(Error::GridMismatch(
            "robin_moment: mismatched interface ids".into(),
        ));
    }
    if source_u.grid.points() != op.source_points() {
        return Err(Error::GridMismatch(
            "robin_moment: source trace grid differs from the projection's source grid".into(),
        ));
    }
    let p_nodal = source_mortar.to_nodal(source_p);
    let w: Vec<f64> = source_u
        .values
        .iter()
        .zip(&p_nodal)
        .map(|(u, p)| alpha * u - p)
        .collect();
    Ok(op.moment(&w))
}

/// The end-interval construction pairing a trace function that vanishes at
/// both interface endpoints with a mortar element: psi equals eta at all
/// interior nodes and extends constantly over the end intervals. Returns
/// the mortar coefficients of psi on the same grid.
pub fn pairing_psi(eta: &PiecewiseLinearTrace) -> Result<Vec<f64>> {
    let n = eta.grid.segments();
    if n < 2 {
        return Err(Error::MortarTooCoarse {
            points: eta.grid.points().len(),
        });
    }
    let v = &eta.values;
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs())).max(1.0);
    if v[0].abs() > 1e-12 * scale || v[v.len() - 1].abs() > 1e-12 * scale {
        return Err(Error::InvalidArgument(
            "eta must vanish at both interface endpoints".into(),
        ));
    }
    Ok(v[1..v.len() - 1].to_vec())
}
