//! Shared test oracles: a dense LU solver and the monolithic assembly of
//! the coupled multi-domain system (subdomain equations plus interface
//! constraints), solved without any iteration. These stay independent of
//! the library's solution path: the only library data reused are the
//! assembled matrices themselves.

#![allow(clippy::needless_range_loop)]

use schwarz_mortar::legendre::GaussLegendre;
use schwarz_mortar::mortar::{merge_breakpoints, InterfaceGrid, MortarSpace};
use schwarz_mortar::schwarz::{DecompositionProblem, SchwarzState};

fn eval_pw_linear(points: &[f64], values: &[f64], s: f64) -> f64 {
    let n = points.len();
    if s <= points[0] {
        return values[0];
    }
    if s >= points[n - 1] {
        return values[n - 1];
    }
    let t = (points.partition_point(|&p| p <= s) - 1).min(n - 2);
    let w = (s - points[t]) / (points[t + 1] - points[t]);
    values[t] * (1.0 - w) + values[t + 1] * w
}

/// Independent dense projection oracle: mortar mass and moment vector by
/// 10-point Gauss quadrature per merged segment, solved densely by
/// unpivoted Gaussian elimination on the (small, SPD) system.
#[allow(dead_code)]
pub fn dense_projection_oracle(
    source: &InterfaceGrid,
    target: &MortarSpace,
    source_values: &[f64],
) -> Vec<f64> {
    let merged = merge_breakpoints(source.points(), target.grid().points()).unwrap();
    let q = GaussLegendre::new(10);
    let dim = target.dim();
    let tgt: Vec<Vec<f64>> = (0..dim).map(|i| target.basis_nodal(i)).collect();
    let tp = target.grid().points();
    let mut m = vec![0.0; dim * dim];
    let mut rhs = vec![0.0; dim];
    for w in merged.windows(2) {
        let half = 0.5 * (w[1] - w[0]);
        let mid = 0.5 * (w[0] + w[1]);
        for (x, wq) in q.nodes.iter().zip(&q.weights) {
            let s = mid + half * x;
            let ww = half * wq;
            let psis: Vec<f64> = (0..dim).map(|i| eval_pw_linear(tp, &tgt[i], s)).collect();
            let v = eval_pw_linear(source.points(), source_values, s);
            for i in 0..dim {
                rhs[i] += ww * psis[i] * v;
                for j in 0..dim {
                    m[i * dim + j] += ww * psis[i] * psis[j];
                }
            }
        }
    }
    DenseLu::new(dim, m).unwrap().solve(&rhs)
}

/// Dense LU with partial pivoting; enough for the small monolithic systems.
pub struct DenseLu {
    n: usize,
    lu: Vec<f64>,
    piv: Vec<usize>,
}

impl DenseLu {
    pub fn new(n: usize, a: Vec<f64>) -> Option<Self> {
        assert_eq!(a.len(), n * n);
        let mut lu = a;
        let mut piv: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut p = k;
            for i in (k + 1)..n {
                if lu[i * n + k].abs() > lu[p * n + k].abs() {
                    p = i;
                }
            }
            if lu[p * n + k] == 0.0 {
                return None;
            }
            if p != k {
                for j in 0..n {
                    lu.swap(k * n + j, p * n + j);
                }
                piv.swap(k, p);
            }
            let pivot = lu[k * n + k];
            for i in (k + 1)..n {
                let m = lu[i * n + k] / pivot;
                lu[i * n + k] = m;
                for j in (k + 1)..n {
                    lu[i * n + j] -= m * lu[k * n + j];
                }
            }
        }
        Some(Self { n, lu, piv })
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let n = self.n;
        let mut x: Vec<f64> = self.piv.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            for k in 0..i {
                x[i] -= self.lu[i * n + k] * x[k];
            }
        }
        for i in (0..n).rev() {
            for k in (i + 1)..n {
                x[i] -= self.lu[i * n + k] * x[k];
            }
            x[i] /= self.lu[i * n + i];
        }
        x
    }
}

/// Assemble and solve the coupled system monolithically: unknowns are all
/// free subdomain dofs plus the mortar coefficients of every ordered
/// interface side; equations are the subdomain relations
/// A u - sum B^T p = F and, per ordered side (k, l), the constraint
/// M p_k + alpha B u_k + X p_l - alpha C u_l = 0 with X the cross-mortar
/// mass and C the cross-grid trace mass.
#[allow(dead_code)]
pub fn solve_monolithic(problem: &DecompositionProblem) -> SchwarzState {
    let alpha = problem.alpha;
    let nsub = problem.subdomains.len();

    // unknown layout: free dofs per subdomain, then p per (coupling, pos)
    let mut u_offset = Vec::with_capacity(nsub);
    let mut total = 0usize;
    let mut free_maps: Vec<Vec<Option<usize>>> = Vec::with_capacity(nsub);
    for sub in &problem.subdomains {
        u_offset.push(total);
        let n = sub.space.dof_count();
        let mut map = vec![None; n];
        let mut count = 0;
        for d in 0..n {
            if !sub.space.is_dirichlet(d) {
                map[d] = Some(total + count);
                count += 1;
            }
        }
        total += count;
        free_maps.push(map);
    }
    let mut p_offset = Vec::new();
    for cp in &problem.couplings {
        let mut per_side = Vec::new();
        for pos in 0..2 {
            per_side.push(total);
            let side_ref = cp.sides[pos];
            let side = &problem.subdomains[side_ref.subdomain].local.sides()[side_ref.local_side];
            total += side.mortar.dim();
        }
        p_offset.push(per_side);
    }

    let mut a = vec![0.0; total * total];
    let mut rhs = vec![0.0; total];
    let at = |m: &mut Vec<f64>, i: usize, j: usize, v: f64| m[i * total + j] += v;

    // subdomain equations on free rows
    for (k, sub) in problem.subdomains.iter().enumerate() {
        let g: Vec<f64> = (0..sub.space.dof_count())
            .map(|d| {
                if sub.space.is_dirichlet(d) {
                    sub.dirichlet[d]
                } else {
                    0.0
                }
            })
            .collect();
        let ag = sub.local.operator().matvec(&g);
        for (i, j, v) in sub.local.operator().lower_triplets() {
            for (r, c) in [(i, j), (j, i)] {
                if r == c && i != j {
                    continue;
                }
                if let (Some(ri), Some(cj)) = (free_maps[k][r], free_maps[k][c]) {
                    at(&mut a, ri, cj, v);
                }
                if i == j {
                    break;
                }
            }
        }
        for d in 0..sub.space.dof_count() {
            if let Some(ri) = free_maps[k][d] {
                rhs[ri] = sub.load[d] - ag[d];
            }
        }
        // -B^T p terms
        for (s, side) in sub.local.sides().iter().enumerate() {
            // which coupling/pos is this side?
            let (ci, pos) = problem
                .couplings
                .iter()
                .enumerate()
                .find_map(|(ci, cp)| {
                    (0..2).find_map(|pos| {
                        (cp.sides[pos].subdomain == k && cp.sides[pos].local_side == s)
                            .then_some((ci, pos))
                    })
                })
                .expect("every side belongs to a coupling");
            let po = p_offset[ci][pos];
            for (t, &dof) in side.trace_dofs.iter().enumerate() {
                if let Some(ri) = free_maps[k][dof] {
                    for i in 0..side.mortar.dim() {
                        at(&mut a, ri, po + i, -side.cross[(i, t)]);
                    }
                }
            }
        }
    }

    // interface constraints per ordered side
    for (ci, cp) in problem.couplings.iter().enumerate() {
        for pos in 0..2 {
            let own_ref = cp.sides[pos];
            let other_ref = cp.sides[1 - pos];
            let own = &problem.subdomains[own_ref.subdomain].local.sides()[own_ref.local_side];
            let other =
                &problem.subdomains[other_ref.subdomain].local.sides()[other_ref.local_side];
            let po = p_offset[ci][pos];
            let po_other = p_offset[ci][1 - pos];
            let dim = own.mortar.dim();

            // M p_own
            let (diag, sub_d) = own.mortar.mass_entries();
            for i in 0..dim {
                at(&mut a, po + i, po + i, diag[i]);
                if i > 0 {
                    at(&mut a, po + i, po + i - 1, sub_d[i - 1]);
                    at(&mut a, po + i - 1, po + i, sub_d[i - 1]);
                }
            }
            // + alpha B u_own (free columns; dirichlet to rhs)
            let own_sub = &problem.subdomains[own_ref.subdomain];
            for (t, &dof) in own.trace_dofs.iter().enumerate() {
                for i in 0..dim {
                    let v = alpha * own.cross[(i, t)];
                    match free_maps[own_ref.subdomain][dof] {
                        Some(cj) => at(&mut a, po + i, cj, v),
                        None => rhs[po + i] -= v * own_sub.dirichlet[dof],
                    }
                }
            }
            // + X p_other with X[i][j] = int psi_i^{own} psi_j^{other};
            // build from the cross-grid trace mass C = proj[pos].cross()
            // composed with the other side's coefficient-to-nodal map
            let c = cp.proj[pos].cross();
            for j in 0..other.mortar.dim() {
                let nodal = other.mortar.basis_nodal(j);
                for i in 0..dim {
                    let mut x = 0.0;
                    for (t, nv) in nodal.iter().enumerate() {
                        x += c[(i, t)] * nv;
                    }
                    at(&mut a, po + i, po_other + j, x);
                }
            }
            // - alpha C u_other (free columns; dirichlet to rhs)
            let other_sub = &problem.subdomains[other_ref.subdomain];
            for (t, &dof) in other.trace_dofs.iter().enumerate() {
                for i in 0..dim {
                    let v = -alpha * c[(i, t)];
                    match free_maps[other_ref.subdomain][dof] {
                        Some(cj) => at(&mut a, po + i, cj, v),
                        None => rhs[po + i] -= v * other_sub.dirichlet[dof],
                    }
                }
            }
        }
    }

    let lu = DenseLu::new(total, a).expect("monolithic system is nonsingular");
    let x = lu.solve(&rhs);

    // unpack
    let mut state = SchwarzState::zero(problem);
    for (k, sub) in problem.subdomains.iter().enumerate() {
        for d in 0..sub.space.dof_count() {
            state.u[k][d] = match free_maps[k][d] {
                Some(idx) => x[idx],
                None => sub.dirichlet[d],
            };
        }
    }
    for (ci, cp) in problem.couplings.iter().enumerate() {
        for pos in 0..2 {
            let side_ref = cp.sides[pos];
            let side = &problem.subdomains[side_ref.subdomain].local.sides()[side_ref.local_side];
            let po = p_offset[ci][pos];
            let dim = side.mortar.dim();
            state.p[side_ref.subdomain][side_ref.local_side].copy_from_slice(&x[po..po + dim]);
        }
    }
    state
}
