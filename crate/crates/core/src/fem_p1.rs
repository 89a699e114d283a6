//! P1 Lagrange finite elements on triangulated subdomains: assembly of the
//! stiffness-plus-mass operator for (Id - Laplace), volume loads, interface
//! cross-mass blocks, the local Robin subproblem solve, and discrete norms.
//!
//! The local Robin problem couples the subdomain unknowns u with one mortar
//! multiplier p per interface side:
//!
//!   A u - sum_s B_s^T p_s = F        (after Dirichlet elimination)
//!   M_s p_s + alpha B_s u = G_s      per interface side s
//!
//! Eliminating p gives the SPD Schur system
//! (A + alpha sum_s B_s^T M_s^{-1} B_s) u = F + sum_s B_s^T M_s^{-1} G_s,
//! solved with the cached Cholesky factor of A and a dense Woodbury
//! capacitance K = M + alpha B A^{-1} B^T over the (small) mortar space.

use crate::error::{Error, Result};
use crate::linalg::{DenseCholesky, DenseMat, EnvelopeCholesky, TridiagFactor};
use crate::mesh2d::{interface_trace, BoundaryTag, InterfaceId, Mesh2D, Point};
use crate::mortar::{build_projection, InterfaceGrid, MortarSpace};

type ValueRule = Box<dyn Fn(f64, f64) -> f64 + Send + Sync>;
type GradientRule = Box<dyn Fn(f64, f64) -> (f64, f64) + Send + Sync>;

/// Scalar field on the plane with an optional gradient rule.
pub struct ScalarField2D {
    value: ValueRule,
    gradient: Option<GradientRule>,
}

impl ScalarField2D {
    pub fn new(value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static) -> Self {
        Self {
            value: Box::new(value),
            gradient: None,
        }
    }

    pub fn with_gradient(
        value: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
        gradient: impl Fn(f64, f64) -> (f64, f64) + Send + Sync + 'static,
    ) -> Self {
        Self {
            value: Box::new(value),
            gradient: Some(Box::new(gradient)),
        }
    }

    pub fn zero() -> Self {
        Self::with_gradient(|_, _| 0.0, |_, _| (0.0, 0.0))
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        (self.value)(x, y)
    }

    pub fn gradient(&self, x: f64, y: f64) -> Option<(f64, f64)> {
        self.gradient.as_ref().map(|g| g(x, y))
    }

    pub fn has_gradient(&self) -> bool {
        self.gradient.is_some()
    }
}

impl std::fmt::Debug for ScalarField2D {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ScalarField2D")
            .field("has_gradient", &self.has_gradient())
            .finish()
    }
}

/// u(x, y) = x^3 y^2 + sin(xy), the manufactured solution of the studies.
pub fn manufactured_solution() -> ScalarField2D {
    ScalarField2D::with_gradient(
        |x, y| x.powi(3) * y * y + (x * y).sin(),
        |x, y| {
            (
                3.0 * x * x * y * y + y * (x * y).cos(),
                2.0 * x.powi(3) * y + x * (x * y).cos(),
            )
        },
    )
}

/// Right hand side of (Id - Laplace) u = f for the manufactured solution:
/// f(x, y) = x^3 (y^2 - 2) - 6 x y^2 + (1 + x^2 + y^2) sin(xy).
pub fn manufactured_rhs() -> ScalarField2D {
    ScalarField2D::new(|x, y| {
        x.powi(3) * (y * y - 2.0) - 6.0 * x * y * y + (1.0 + x * x + y * y) * (x * y).sin()
    })
}

/// Symmetric quadrature point on a triangle in barycentric coordinates;
/// weights sum to 1 and are scaled by the triangle area on use.
#[derive(Debug, Clone, Copy)]
pub struct TriQuadPoint {
    pub bary: [f64; 3],
    pub weight: f64,
}

fn orbit3(a: f64, w: f64, out: &mut Vec<TriQuadPoint>) {
    let b = 1.0 - 2.0 * a;
    for bary in [[b, a, a], [a, b, a], [a, a, b]] {
        out.push(TriQuadPoint { bary, weight: w });
    }
}

fn orbit6(a: f64, b: f64, w: f64, out: &mut Vec<TriQuadPoint>) {
    let c = 1.0 - a - b;
    for bary in [
        [a, b, c],
        [a, c, b],
        [b, a, c],
        [b, c, a],
        [c, a, b],
        [c, b, a],
    ] {
        out.push(TriQuadPoint { bary, weight: w });
    }
}

/// Smallest symmetric rule exact for polynomials of total degree `order`.
/// Available degrees: 2 (3 points), 4 (6), 5 (7), 7 (13).
pub fn triangle_rule(order: usize) -> Vec<TriQuadPoint> {
    let mut pts = Vec::new();
    match order {
        0..=2 => orbit3(1.0 / 6.0, 1.0 / 3.0, &mut pts),
        3..=4 => {
            orbit3(0.445948490915965, 0.223381589678011, &mut pts);
            orbit3(0.091576213509771, 0.109951743655322, &mut pts);
        }
        5 => {
            pts.push(TriQuadPoint {
                bary: [1.0 / 3.0; 3],
                weight: 0.225,
            });
            orbit3(0.470142064105115, 0.132394152788506, &mut pts);
            orbit3(0.101286507323456, 0.125939180544827, &mut pts);
        }
        _ => {
            // degree 7, 13 points (central weight is negative)
            pts.push(TriQuadPoint {
                bary: [1.0 / 3.0; 3],
                weight: -0.149570044467670,
            });
            orbit3(0.260345966079038, 0.175615257433204, &mut pts);
            orbit3(0.065130102902216, 0.053347235608839, &mut pts);
            orbit6(
                0.312865496004875,
                0.638444188569809,
                0.077113760890257,
                &mut pts,
            );
        }
    }
    pts
}

/// P1 space over a subdomain mesh: one dof per vertex, Dirichlet dofs are
/// the vertices of exterior-tagged boundary edges.
#[derive(Debug, Clone)]
pub struct P1Space {
    pub mesh: Mesh2D,
    dirichlet: Vec<bool>,
}

impl P1Space {
    pub fn new(mesh: Mesh2D) -> Self {
        let mut dirichlet = vec![false; mesh.vertices.len()];
        for be in &mesh.boundary_edges {
            if be.tag == BoundaryTag::Exterior {
                dirichlet[be.vertices[0]] = true;
                dirichlet[be.vertices[1]] = true;
            }
        }
        Self { mesh, dirichlet }
    }

    pub fn dof_count(&self) -> usize {
        self.mesh.vertices.len()
    }

    pub fn is_dirichlet(&self, dof: usize) -> bool {
        self.dirichlet[dof]
    }

    pub fn free_dofs(&self) -> Vec<usize> {
        (0..self.dof_count())
            .filter(|&i| !self.dirichlet[i])
            .collect()
    }

    pub fn dirichlet_dofs(&self) -> Vec<usize> {
        (0..self.dof_count())
            .filter(|&i| self.dirichlet[i])
            .collect()
    }

    /// Nodal interpolation of a field at the Dirichlet dofs (zeros elsewhere).
    pub fn dirichlet_values(&self, g: &ScalarField2D) -> Vec<f64> {
        (0..self.dof_count())
            .map(|i| {
                if self.dirichlet[i] {
                    let p = self.mesh.vertices[i];
                    g.eval(p.x, p.y)
                } else {
                    0.0
                }
            })
            .collect()
    }
}

/// Sparse symmetric operator stored as the lower triangle in row-major
/// adjacency lists.
#[derive(Debug, Clone)]
pub struct SparseSymOperator {
    n: usize,
    rows: Vec<Vec<(usize, f64)>>, // (col <= row, value)
}

impl SparseSymOperator {
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for &(i, j, v) in triplets {
            let (r, c) = if i >= j { (i, j) } else { (j, i) };
            rows[r].push((c, v));
        }
        for row in &mut rows {
            row.sort_by_key(|e| e.0);
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
            for &(c, v) in row.iter() {
                match merged.last_mut() {
                    Some(last) if last.0 == c => last.1 += v,
                    _ => merged.push((c, v)),
                }
            }
            *row = merged;
        }
        Self { n, rows }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        let mut y = vec![0.0; self.n];
        for i in 0..self.n {
            for &(j, v) in &self.rows[i] {
                y[i] += v * x[j];
                if j != i {
                    y[j] += v * x[i];
                }
            }
        }
        y
    }

    /// x^T A x (the discrete H1 energy for the stiffness+mass operator).
    pub fn quadratic_form(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for i in 0..self.n {
            for &(j, v) in &self.rows[i] {
                s += if j == i {
                    v * x[i] * x[i]
                } else {
                    2.0 * v * x[i] * x[j]
                };
            }
        }
        s
    }

    pub fn lower_triplets(&self) -> Vec<(usize, usize, f64)> {
        let mut t = Vec::new();
        for i in 0..self.n {
            for &(j, v) in &self.rows[i] {
                t.push((i, j, v));
            }
        }
        t
    }
}

/// Element stiffness and mass matrices of a P1 triangle, exact closed forms.
pub fn element_matrices(p0: Point, p1: Point, p2: Point) -> ([[f64; 3]; 3], [[f64; 3]; 3]) {
    let area = 0.5 * ((p1.x - p0.x) * (p2.y - p0.y) - (p2.x - p0.x) * (p1.y - p0.y));
    // gradients of barycentric coordinates
    let b = [p1.y - p2.y, p2.y - p0.y, p0.y - p1.y].map(|v| v / (2.0 * area));
    let c = [p2.x - p1.x, p0.x - p2.x, p1.x - p0.x].map(|v| v / (2.0 * area));
    let mut k = [[0.0; 3]; 3];
    let mut m = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            k[i][j] = area * (b[i] * b[j] + c[i] * c[j]);
            m[i][j] = area / 12.0 * if i == j { 2.0 } else { 1.0 };
        }
    }
    (k, m)
}

/// Assemble int(grad phi_i . grad phi_j + phi_i phi_j) over the subdomain,
/// with no boundary conditions applied.
pub fn assemble_stiffness_mass(space: &P1Space) -> Result<SparseSymOperator> {
    let mesh = &space.mesh;
    let mut triplets = Vec::with_capacity(6 * mesh.triangles.len());
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if mesh.triangle_area(t) <= 0.0 {
            return Err(Error::InvalidMesh(format!("triangle {t} is degenerate")));
        }
        let [a, b, c] = *tri;
        let (k, m) = element_matrices(mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
        let idx = [a, b, c];
        for i in 0..3 {
            for j in 0..=i {
                triplets.push((idx[i], idx[j], k[i][j] + m[i][j]));
            }
        }
    }
    Ok(SparseSymOperator::from_triplets(
        space.dof_count(),
        &triplets,
    ))
}

/// Assemble the load vector int f phi_i with a symmetric triangle rule of
/// the given polynomial order (order >= 2).
pub fn assemble_load(space: &P1Space, f: &ScalarField2D, order: usize) -> Vec<f64> {
    let rule = triangle_rule(order.max(2));
    let mesh = &space.mesh;
    let mut load = vec![0.0; space.dof_count()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.triangle_area(t);
        let [a, b, c] = *tri;
        let (pa, pb, pc) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
        for q in &rule {
            let [l1, l2, l3] = q.bary;
            let x = l1 * pa.x + l2 * pb.x + l3 * pc.x;
            let y = l1 * pa.y + l2 * pb.y + l3 * pc.y;
            let fv = f.eval(x, y) * q.weight * area;
            load[a] += fv * l1;
            load[b] += fv * l2;
            load[c] += fv * l3;
        }
    }
    load
}

/// One interface side of a subdomain: the trace grid with its dof indices,
/// the mortar space on this side, the same-grid cross-mass block
/// B[i][j] = int psi_i phi_j ds, and the factorized mortar mass.
#[derive(Debug, Clone)]
pub struct RobinInterfaceSide {
    pub interface: InterfaceId,
    pub grid: InterfaceGrid,
    /// Mesh dof of each trace grid point, in grid order.
    pub trace_dofs: Vec<usize>,
    pub mortar: MortarSpace,
    pub cross: DenseMat,
    pub mass: TridiagFactor,
}

impl RobinInterfaceSide {
    pub fn new(mesh: &Mesh2D, subdomain: usize, interface: InterfaceId) -> Result<Self> {
        let (coords, dofs) = interface_trace(mesh, interface)?;
        let grid = InterfaceGrid::new(interface, subdomain, coords)?;
        let mortar = MortarSpace::new(grid.clone())?;
        let cross = assemble_interface_cross_mass(&grid, &mortar)?;
        let mass = mortar.mass_factor();
        Ok(Self {
            interface,
            grid,
            trace_dofs: dofs,
            mortar,
            cross,
            mass,
        })
    }

    /// Trace values of a full nodal vector, in grid order.
    pub fn trace_values(&self, u: &[f64]) -> Vec<f64> {
        self.trace_dofs.iter().map(|&d| u[d]).collect()
    }

    /// B applied to a full nodal vector.
    pub fn apply_cross(&self, u: &[f64]) -> Vec<f64> {
        self.cross.matvec(&self.trace_values(u))
    }
}

/// Cross-mass B[i][j] = int psi_i phi_j over the interface, where psi is
/// the mortar basis and phi the trace hats of the same grid.
pub fn assemble_interface_cross_mass(
    grid: &InterfaceGrid,
    mortar: &MortarSpace,
) -> Result<DenseMat> {
    if mortar.grid().points() != grid.points() {
        return Err(Error::GridMismatch(
            "cross-mass needs the mortar built on the subdomain's own trace grid".into(),
        ));
    }
    Ok(build_projection(grid, mortar)?.cross().clone())
}

/// Cached factorizations for one subdomain's local Robin solves. The
/// operator depends on the mesh and alpha only, so a single factorization
/// serves every iteration.
#[derive(Debug)]
pub struct LocalRobinProblem {
    alpha: f64,
    operator: SparseSymOperator,
    free: Vec<usize>,
    free_index: Vec<Option<usize>>,
    factor: EnvelopeCholesky,
    sides: Vec<RobinInterfaceSide>,
    capacitance: Option<DenseCholesky>,
    side_offsets: Vec<usize>,
}

impl LocalRobinProblem {
    pub fn new(
        space: &P1Space,
        operator: SparseSymOperator,
        sides: Vec<RobinInterfaceSide>,
        alpha: f64,
    ) -> Result<Self> {
        if alpha <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "Robin parameter must be positive, got {alpha}"
            )));
        }
        let n = space.dof_count();
        // order the free dofs to keep the factorization envelope small:
        // lattice meshes want the numbering to run along the shorter axis
        let free = {
            let base = space.free_dofs();
            let sort_by = |key: fn(&Point) -> (f64, f64)| {
                let mut v = base.clone();
                v.sort_by(|&a, &b| {
                    let (pa, pb) = (key(&space.mesh.vertices[a]), key(&space.mesh.vertices[b]));
                    pa.partial_cmp(&pb).unwrap().then(a.cmp(&b))
                });
                v
            };
            let candidates = [base.clone(), sort_by(|p| (p.y, p.x)), sort_by(|p| (p.x, p.y))];
            let cost = |order: &[usize]| {
                let mut slot = vec![usize::MAX; n];
                for (k, &d) in order.iter().enumerate() {
                    slot[d] = k;
                }
                let t: Vec<(usize, usize, f64)> = operator
                    .lower_triplets()
                    .iter()
                    .filter(|(i, j, _)| slot[*i] != usize::MAX && slot[*j] != usize::MAX)
                    .map(|&(i, j, v)| (slot[i], slot[j], v))
                    .collect();
                crate::linalg::envelope_size(order.len(), &t)
            };
            candidates
                .into_iter()
                .min_by_key(|c| cost(c))
                .expect("candidate list is non-empty")
        };
        let mut free_index = vec![None; n];
        for (k, &d) in free.iter().enumerate() {
            free_index[d] = Some(k);
        }

        let mut reduced = Vec::new();
        for (i, j, v) in operator.lower_triplets() {
            if let (Some(fi), Some(fj)) = (free_index[i], free_index[j]) {
                reduced.push((fi, fj, v));
            }
        }
        let factor = EnvelopeCholesky::from_triplets(free.len(), &reduced).ok_or_else(|| {
            Error::SolverFailure("subdomain operator is not positive definite".into())
        })?;

        let side_offsets: Vec<usize> = sides
            .iter()
            .scan(0usize, |acc, s| {
                let off = *acc;
                *acc += s.mortar.dim();
                Some(off)
            })
            .collect();
        let m_total: usize = sides.iter().map(|s| s.mortar.dim()).sum();

        // capacitance K = M + alpha B A^{-1} B^T over all sides
        let capacitance = if m_total > 0 {
            let mut k = DenseMat::zeros(m_total, m_total);
            for (s, side) in sides.iter().enumerate() {
                let off = side_offsets[s];
                let (diag, sub) = side.mortar.mass_entries();
                for i in 0..diag.len() {
                    k[(off + i, off + i)] += diag[i];
                    if i > 0 {
                        k[(off + i, off + i - 1)] += sub[i - 1];
                        k[(off + i - 1, off + i)] += sub[i - 1];
                    }
                }
            }
            // one envelope solve per mortar basis row gives A^{-1} B^T
            let mut solved_rows: Vec<Vec<f64>> = Vec::with_capacity(m_total);
            for side in &sides {
                for i in 0..side.mortar.dim() {
                    let mut col = vec![0.0; free.len()];
                    for (t, &dof) in side.trace_dofs.iter().enumerate() {
                        if let Some(fi) = free_index[dof] {
                            col[fi] += side.cross[(i, t)];
                        }
                    }
                    factor.solve_in_place(&mut col);
                    solved_rows.push(col);
                }
            }
            for (s, side) in sides.iter().enumerate() {
                for i in 0..side.mortar.dim() {
                    let row = side_offsets[s] + i;
                    for (s2, side2) in sides.iter().enumerate() {
                        for i2 in 0..side2.mortar.dim() {
                            let col = side_offsets[s2] + i2;
                            let mut acc = 0.0;
                            for (t, &dof) in side2.trace_dofs.iter().enumerate() {
                                if let Some(fi) = free_index[dof] {
                                    acc += side2.cross[(i2, t)] * solved_rows[row][fi];
                                }
                            }
                            k[(row, col)] += alpha * acc;
                        }
                    }
                }
            }
            Some(k.cholesky().ok_or_else(|| {
                Error::SolverFailure("Robin capacitance matrix is not positive definite".into())
            })?)
        } else {
            None
        };

        Ok(Self {
            alpha,
            operator,
            free,
            free_index,
            factor,
            sides,
            capacitance,
            side_offsets,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sides(&self) -> &[RobinInterfaceSide] {
        &self.sides
    }

    /// Full (no boundary condition) stiffness+mass operator.
    pub fn operator(&self) -> &SparseSymOperator {
        &self.operator
    }

    /// u^T A u with the full operator: int(|grad u|^2 + u^2).
    pub fn energy(&self, u: &[f64]) -> f64 {
        self.operator.quadratic_form(u)
    }

    /// Solve the coupled local Robin system for a volume load (full dof
    /// layout), incoming Robin moments per side, and Dirichlet values
    /// (full layout, read at Dirichlet dofs only). Returns the full nodal
    /// solution and the mortar coefficients per side.
    pub fn solve(
        &self,
        load: &[f64],
        moments: &[Vec<f64>],
        dirichlet: &[f64],
    ) -> Result<(Vec<f64>, Vec<Vec<f64>>)> {
        let n = self.operator.dim();
        assert_eq!(load.len(), n);
        assert_eq!(moments.len(), self.sides.len());

        // lift Dirichlet data: rhs = F - A g on free rows
        let mut g = vec![0.0; n];
        for d in 0..n {
            if self.free_index[d].is_none() {
                g[d] = dirichlet[d];
            }
        }
        let ag = self.operator.matvec(&g);
        let mut rhs: Vec<f64> = self.free.iter().map(|&d| load[d] - ag[d]).collect();

        // rhs += B^T M^{-1} (G - alpha B g) over free trace dofs
        for (s, side) in self.sides.iter().enumerate() {
            assert_eq!(moments[s].len(), side.mortar.dim());
            let bg = side.apply_cross(&g);
            let gm: Vec<f64> = moments[s]
                .iter()
                .zip(&bg)
                .map(|(m, b)| m - self.alpha * b)
                .collect();
            let z = side.mass.solve(&gm);
            for (t, &dof) in side.trace_dofs.iter().enumerate() {
                if let Some(fi) = self.free_index[dof] {
                    for i in 0..z.len() {
                        rhs[fi] += side.cross[(i, t)] * z[i];
                    }
                }
            }
        }

        // Schur solve by Woodbury: S^{-1} r = y - alpha A^{-1} B^T K^{-1} B y
        let mut u_free = self.factor.solve(&rhs);
        if let Some(cap) = &self.capacitance {
            let m_total: usize = self.sides.iter().map(|s| s.mortar.dim()).sum();
            let mut by = vec![0.0; m_total];
            for (s, side) in self.sides.iter().enumerate() {
                let off = self.side_offsets[s];
                for (t, &dof) in side.trace_dofs.iter().enumerate() {
                    if let Some(fi) = self.free_index[dof] {
                        for i in 0..side.mortar.dim() {
                            by[off + i] += side.cross[(i, t)] * u_free[fi];
                        }
                    }
                }
            }
            let z = cap.solve(&by);
            let mut btz = vec![0.0; self.free.len()];
            for (s, side) in self.sides.iter().enumerate() {
                let off = self.side_offsets[s];
                for (t, &dof) in side.trace_dofs.iter().enumerate() {
                    if let Some(fi) = self.free_index[dof] {
                        for i in 0..side.mortar.dim() {
                            btz[fi] += side.cross[(i, t)] * z[off + i];
                        }
                    }
                }
            }
            self.factor.solve_in_place(&mut btz);
            for i in 0..u_free.len() {
                u_free[i] -= self.alpha * btz[i];
            }
        }

        let mut u = g;
        for (k, &d) in self.free.iter().enumerate() {
            u[d] = u_free[k];
        }

        // reconstruct p_s = M^{-1}(G_s - alpha B_s u)
        let mut ps = Vec::with_capacity(self.sides.len());
        for (s, side) in self.sides.iter().enumerate() {
            let bu = side.apply_cross(&u);
            let r: Vec<f64> = moments[s]
                .iter()
                .zip(&bu)
                .map(|(m, b)| m - self.alpha * b)
                .collect();
            ps.push(side.mass.solve(&r));
        }
        Ok((u, ps))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ErrorNorms {
    pub h1: f64,
    pub l2: f64,
    pub linf_nodal: f64,
    /// Full H1 norm of the exact field over the subdomain.
    pub h1_exact: f64,
}

/// Elementwise quadrature of |grad(u_h - u)|^2 + (u_h - u)^2 and of the
/// exact field's own H1 density (degree-7 rule).
pub fn error_norms(space: &P1Space, u_h: &[f64], exact: &ScalarField2D) -> Result<ErrorNorms> {
    if !exact.has_gradient() {
        return Err(Error::InvalidArgument(
            "error_norms needs a gradient rule on the exact field".into(),
        ));
    }
    let rule = triangle_rule(7);
    let mesh = &space.mesh;
    let mut h1_sq = 0.0;
    let mut l2_sq = 0.0;
    let mut ex_sq = 0.0;
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let area = mesh.triangle_area(t);
        let [a, b, c] = *tri;
        let (pa, pb, pc) = (mesh.vertices[a], mesh.vertices[b], mesh.vertices[c]);
        // constant gradient of u_h on the triangle
        let gb = [pb.y - pc.y, pc.y - pa.y, pa.y - pb.y].map(|v| v / (2.0 * area));
        let gc = [pc.x - pb.x, pa.x - pc.x, pb.x - pa.x].map(|v| v / (2.0 * area));
        let uv = [u_h[a], u_h[b], u_h[c]];
        let grad_h = (
            gb[0] * uv[0] + gb[1] * uv[1] + gb[2] * uv[2],
            gc[0] * uv[0] + gc[1] * uv[1] + gc[2] * uv[2],
        );
        for q in &rule {
            let [l1, l2, l3] = q.bary;
            let x = l1 * pa.x + l2 * pb.x + l3 * pc.x;
            let y = l1 * pa.y + l2 * pb.y + l3 * pc.y;
            let w = q.weight * area;
            let uh = l1 * uv[0] + l2 * uv[1] + l3 * uv[2];
            let ue = exact.eval(x, y);
            let (gx, gy) = exact.gradient(x, y).unwrap();
            let dv = uh - ue;
            let dgx = grad_h.0 - gx;
            let dgy = grad_h.1 - gy;
            h1_sq += w * (dgx * dgx + dgy * dgy + dv * dv);
            l2_sq += w * dv * dv;
            ex_sq += w * (gx * gx + gy * gy + ue * ue);
        }
    }
    let mut linf: f64 = 0.0;
    for (i, p) in mesh.vertices.iter().enumerate() {
        linf = linf.max((u_h[i] - exact.eval(p.x, p.y)).abs());
    }
    Ok(ErrorNorms {
        h1: h1_sq.sqrt(),
        l2: l2_sq.sqrt(),
        linf_nodal: linf,
        h1_exact: ex_sq.sqrt(),
    })
}
