//! The linear system `Ap = b, p >= 0` over complete-state probabilities and its
//! analysis: feasibility, vertex enumeration, Carathéodory simplices, the
//! maximum-entropy solution and polytope centroids.
//!
//! Vertex enumeration is exhaustive over the `C(d, m)` basis candidates, which
//! is adequate at desk scale (`d <= 16` gives at most 12870 bases). The
//! maximum-entropy solution is computed on the dual: minimize
//! `F(alpha) = log Z(alpha) + sum_j alpha_j b_j` with
//! `Z = sum_w exp(-sum_j alpha_j a_{j,w})` by damped Newton steps, after pinning
//! the coordinates that vanish on every vertex (exponential-family solutions
//! are strictly positive on their support, so forced zeros must be removed
//! before the dual solve).
//!
//! Tolerances used throughout: `EPS_ZERO = 1e-9` (nonnegativity), `EPS_LIN =
//! 1e-9` (linear residuals), `EPS_DEDUPE = 1e-7` (vertex identity), rank pivots
//! at `1e-10` relative to the largest matrix entry, `EPS_OPT = 1e-7` and 200
//! damped Newton iterations for the dual solve.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::boolean::{ConstraintSpec, Register};
use crate::error::{Error, Result};

pub const EPS_ZERO: f64 = 1e-9;
pub const EPS_LIN: f64 = 1e-9;
pub const EPS_DEDUPE: f64 = 1e-7;
pub const EPS_OPT: f64 = 1e-7;
pub const MAX_ITER: usize = 200;
const RANK_PIVOT_REL: f64 = 1e-10;

/// The system `Ap = b` with linearly independent rows; row 0 is normalization.
#[derive(Debug, Clone)]
pub struct LinearSystem {
    a: DMatrix<f64>,
    b: DVector<f64>,
    register: Register,
}

impl LinearSystem {
    /// Assembles the normalization row plus the specific rows, dropping rows
    /// that are linear combinations of earlier ones. A dependent row whose
    /// right-hand side disagrees with the implied value makes the whole prior
    /// inconsistent; the error carries the 0-based index of that constraint.
    pub fn build(constraints: &[ConstraintSpec], register: &Register) -> Result<Self> {
        let d = register.dim();
        let mut rows: Vec<(Vec<f64>, f64)> = crate::boolean::universal_equations(register)
            .into_iter()
            .map(|(c, b)| (c.entries().to_vec(), b))
            .collect();
        for spec in constraints {
            let (cov, rhs) = spec.to_linear_equation(register)?;
            rows.push((cov.entries().to_vec(), rhs));
        }
        let scale = rows
            .iter()
            .flat_map(|(r, _)| r.iter())
            .fold(0.0f64, |m, x| m.max(x.abs()));
        let pivot_tol = RANK_PIVOT_REL * scale.max(1.0);

        // row echelon over reduced copies; keep the original independent rows
        let mut reduced: Vec<(Vec<f64>, f64, usize)> = Vec::new(); // (row, rhs, pivot col)
        let mut kept: Vec<usize> = Vec::new();
        for (i, (row, rhs)) in rows.iter().enumerate() {
            let mut r = row.clone();
            let mut v = *rhs;
            for (er, ev, pc) in &reduced {
                let factor = r[*pc] / er[*pc];
                if factor != 0.0 {
                    for k in 0..d {
                        r[k] -= factor * er[k];
                    }
                    v -= factor * ev;
                }
            }
            let (pivot, pmax) = r
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |(pi, pm), (k, x)| {
                    if x.abs() > pm {
                        (k, x.abs())
                    } else {
                        (pi, pm)
                    }
                });
            if pmax > pivot_tol {
                reduced.push((r, v, pivot));
                kept.push(i);
            } else if v.abs() > EPS_LIN {
                // dependent row with an incompatible right-hand side
                return Err(Error::InconsistentConstraint {
                    index: i.saturating_sub(1), // 0-based index into `constraints`
                });
            }
        }
        let m = kept.len();
        let mut a = DMatrix::zeros(m, d);
        let mut b = DVector::zeros(m);
        for (out, &i) in kept.iter().enumerate() {
            for k in 0..d {
                a[(out, k)] = rows[i].0[k];
            }
            b[out] = rows[i].1;
        }
        Ok(LinearSystem {
            a,
            b,
            register: *register,
        })
    }

    /// A system from raw independent rows. Intended for internal callers that
    /// already hold a basis (reverse transcription, partial systems); the rows
    /// are trusted, only the shape is checked.
    pub(crate) fn from_rows(a: DMatrix<f64>, b: DVector<f64>, register: Register) -> Self {
        debug_assert_eq!(a.ncols(), register.dim());
        debug_assert_eq!(a.nrows(), b.len());
        LinearSystem { a, b, register }
    }

    pub fn rank(&self) -> usize {
        self.a.nrows()
    }

    pub fn dim(&self) -> usize {
        self.a.ncols()
    }

    pub fn register(&self) -> &Register {
        &self.register
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn rhs(&self) -> &DVector<f64> {
        &self.b
    }

    /// Componentwise residual `max |Ap - b|`.
    pub fn residual(&self, p: &[f64]) -> f64 {
        let p = DVector::from_column_slice(p);
        (&self.a * p - &self.b).amax()
    }

    /// True iff some `p >= 0` solves the system (phase-1 simplex).
    pub fn feasible(&self) -> bool {
        phase_one(&self.a, &self.b).is_some()
    }

    /// All extreme points of the solution polytope, in descending
    /// lexicographic order.
    pub fn enumerate_vertices(&self) -> Result<Polytope> {
        let (m, d) = (self.rank(), self.dim());
        if !self.feasible() {
            return Err(Error::Infeasible);
        }
        let mut vertices: Vec<Vec<f64>> = Vec::new();
        for cols in (0..d).combinations(m) {
            let basis = DMatrix::from_fn(m, m, |r, c| self.a[(r, cols[c])]);
            let lu = basis.full_piv_lu();
            let Some(x) = lu.solve(&self.b) else {
                continue;
            };
            if x.iter().any(|&v| v < -EPS_ZERO || !v.is_finite()) {
                continue;
            }
            let mut full = vec![0.0; d];
            for (k, &c) in cols.iter().enumerate() {
                full[c] = x[k].max(0.0);
            }
            if self.residual(&full) > EPS_LIN {
                continue; // ill-conditioned basis
            }
            if !vertices
                .iter()
                .any(|v| linf_distance(v, &full) <= EPS_DEDUPE)
            {
                vertices.push(full);
            }
        }
        if vertices.is_empty() {
            return Err(Error::EmptyPolytope);
        }
        vertices.sort_by(|a, b| b.partial_cmp(a).expect("finite entries"));
        Ok(Polytope {
            vertices,
            affine_dim: d - m,
        })
    }

    /// Maximum-entropy solution. See the module docs for the dual iteration.
    pub fn maxent(&self) -> Result<MaxEntSolution> {
        let polytope = self.enumerate_vertices()?;
        let d = self.dim();

        // union of vertex supports; everything else is a forced zero
        let support: Vec<usize> = (0..d)
            .filter(|&k| polytope.vertices.iter().any(|v| v[k] > EPS_ZERO))
            .collect();

        // restrict to the support and drop rows that become dependent there
        let mut rows: Vec<(Vec<f64>, f64, usize)> = Vec::new(); // reduced row, rhs, original row
        let mut echelon: Vec<Vec<f64>> = Vec::new();
        let mut pivots: Vec<usize> = Vec::new();
        let scale = self.a.amax().max(1.0);
        for i in 0..self.rank() {
            let mut r: Vec<f64> = support.iter().map(|&k| self.a[(i, k)]).collect();
            for (er, pc) in echelon.iter().zip(&pivots) {
                let factor = r[*pc] / er[*pc];
                if factor != 0.0 {
                    for k in 0..r.len() {
                        r[k] -= factor * er[k];
                    }
                }
            }
            let (pivot, pmax) = r.iter().enumerate().fold((0, 0.0f64), |(pi, pm), (k, x)| {
                if x.abs() > pm {
                    (k, x.abs())
                } else {
                    (pi, pm)
                }
            });
            if pmax > RANK_PIVOT_REL * scale {
                rows.push((
                    support.iter().map(|&k| self.a[(i, k)]).collect(),
                    self.b[i],
                    i,
                ));
                echelon.push(r);
                pivots.push(pivot);
            }
        }
        let n = support.len();
        let specific: Vec<&(Vec<f64>, f64, usize)> = rows.iter().skip(1).collect();
        let m_red = specific.len(); // multipliers besides normalization

        let mut alpha = DVector::<f64>::zeros(m_red);
        let g_of = |alpha: &DVector<f64>| -> (Vec<f64>, f64) {
            // stabilized exp family over the support; returns (g, log Z)
            let mut expo = vec![0.0; n];
            for (j, row) in specific.iter().enumerate() {
                for k in 0..n {
                    expo[k] -= alpha[j] * row.0[k];
                }
            }
            let emax = expo.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            let mut g: Vec<f64> = expo.iter().map(|&e| (e - emax).exp()).collect();
            let z: f64 = g.iter().sum();
            for x in &mut g {
                *x /= z;
            }
            (g, z.ln() + emax)
        };
        let objective = |alpha: &DVector<f64>| -> f64 {
            let (_, logz) = g_of(alpha);
            logz + (0..m_red).map(|j| alpha[j] * specific[j].1).sum::<f64>()
        };

        let mut converged = m_red == 0;
        let mut grad_norm = 0.0;
        for _ in 0..MAX_ITER {
            if m_red == 0 {
                break;
            }
            let (g, _) = g_of(&alpha);
            let mut grad = DVector::<f64>::zeros(m_red);
            let mut means = vec![0.0; m_red];
            for j in 0..m_red {
                means[j] = (0..n).map(|k| specific[j].0[k] * g[k]).sum();
                grad[j] = specific[j].1 - means[j];
            }
            grad_norm = grad.amax();
            if grad_norm <= 1e-12 * scale.max(1.0) {
                converged = true;
                break;
            }
            let mut hess = DMatrix::<f64>::zeros(m_red, m_red);
            for j in 0..m_red {
                for l in j..m_red {
                    let cov: f64 = (0..n)
                        .map(|k| (specific[j].0[k] - means[j]) * (specific[l].0[k] - means[l]) * g[k])
                        .sum();
                    hess[(j, l)] = cov;
                    hess[(l, j)] = cov;
                }
            }
            let step = hess
                .clone()
                .cholesky()
                .map(|ch| ch.solve(&grad))
                .unwrap_or_else(|| grad.clone());
            // minimize F; the Newton direction for the gradient (b - E[a]) is -step
            let f0 = objective(&alpha);
            let slope = -grad.dot(&step);
            let mut t = 1.0;
            let mut accepted = false;
            for _ in 0..60 {
                let candidate = &alpha - &step * t;
                if objective(&candidate) <= f0 + 1e-4 * t * slope {
                    alpha = candidate;
                    accepted = true;
                    break;
                }
                t *= 0.5;
            }
            if !accepted {
                break;
            }
        }
        if !converged {
            // final gradient check at EPS_OPT quality
            let (g, _) = g_of(&alpha);
            let worst = (0..m_red)
                .map(|j| {
                    let mean: f64 = (0..n).map(|k| specific[j].0[k] * g[k]).sum();
                    (specific[j].1 - mean).abs()
                })
                .fold(0.0f64, f64::max);
            if worst > EPS_OPT {
                return Err(Error::NonConvergence {
                    iterations: MAX_ITER,
                    grad_norm: grad_norm.max(worst),
                });
            }
        }

        let (g_red, logz) = g_of(&alpha);
        let mut distribution = vec![0.0; d];
        for (k, &col) in support.iter().enumerate() {
            distribution[col] = g_red[k];
        }
        let mut multipliers = vec![0.0; self.rank()];
        multipliers[0] = logz; // the normalization multiplier equals log Z
        for (j, row) in specific.iter().enumerate() {
            multipliers[row.2] = alpha[j];
        }
        Ok(MaxEntSolution {
            distribution,
            multipliers,
            log_partition: logz,
        })
    }
}

fn linf_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

/// Phase-1 simplex: returns a nonnegative solution of `Ax = b` if one exists.
/// Bland's rule, so it terminates on degenerate systems.
fn phase_one(a: &DMatrix<f64>, b: &DVector<f64>) -> Option<Vec<f64>> {
    let (m, n) = (a.nrows(), a.ncols());
    // tableau over structural + artificial variables, rhs made nonnegative
    let mut t = DMatrix::<f64>::zeros(m, n + m + 1);
    for i in 0..m {
        let sign = if b[i] < 0.0 { -1.0 } else { 1.0 };
        for j in 0..n {
            t[(i, j)] = sign * a[(i, j)];
        }
        t[(i, n + i)] = 1.0;
        t[(i, n + m)] = sign * b[i];
    }
    let mut basis: Vec<usize> = (n..n + m).collect();
    // objective row: minimize the sum of artificials
    let mut obj = vec![0.0; n + m + 1];
    for i in 0..m {
        for j in 0..=n + m {
            obj[j] -= t[(i, j)];
        }
    }
    for j in n..n + m {
        obj[j] = 0.0;
    }
    loop {
        // Bland: entering variable = lowest index with a negative reduced cost
        let Some(enter) = (0..n + m).find(|&j| obj[j] < -1e-11) else {
            break;
        };
        let mut leave: Option<usize> = None;
        let mut best = f64::INFINITY;
        for i in 0..m {
            if t[(i, enter)] > 1e-11 {
                let ratio = t[(i, n + m)] / t[(i, enter)];
                if ratio < best - 1e-13
                    || (ratio < best + 1e-13
                        && leave.is_some_and(|l| basis[i] < basis[l]))
                {
                    best = ratio;
                    leave = Some(i);
                }
            }
        }
        let leave = leave?; // unbounded cannot occur for phase 1, but stay safe
        let pivot = t[(leave, enter)];
        for j in 0..=n + m {
            t[(leave, j)] /= pivot;
        }
        for i in 0..m {
            if i != leave {
                let f = t[(i, enter)];
                if f != 0.0 {
                    for j in 0..=n + m {
                        t[(i, j)] -= f * t[(leave, j)];
                    }
                }
            }
        }
        let f = obj[enter];
        if f != 0.0 {
            for j in 0..=n + m {
                obj[j] -= f * t[(leave, j)];
            }
        }
        basis[leave] = enter;
    }
    // feasible iff every artificial ended at zero
    let mut x = vec![0.0; n];
    for i in 0..m {
        let value = t[(i, n + m)];
        if basis[i] >= n {
            if value.abs() > 1e-8 {
                return None;
            }
        } else {
            x[basis[i]] = value.max(0.0);
        }
    }
    Some(x)
}

/// The solution polytope of a feasible system, described by its extreme points.
#[derive(Debug, Clone)]
pub struct Polytope {
    vertices: Vec<Vec<f64>>,
    affine_dim: usize,
}

impl Polytope {
    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// `d - m` from the system rank. The hull of the vertices may span less
    /// when inequality constraints bind everywhere (forced zeros).
    pub fn affine_dim(&self) -> usize {
        self.affine_dim
    }

    pub fn dim(&self) -> usize {
        self.vertices[0].len()
    }

    /// Rank of `{v_i - v_0}`: the dimension actually spanned by the vertices.
    pub fn hull_dim(&self) -> usize {
        let k = self.vertices.len();
        if k <= 1 {
            return 0;
        }
        let d = self.dim();
        let diffs = DMatrix::from_fn(k - 1, d, |r, c| self.vertices[r + 1][c] - self.vertices[0][c]);
        let svd = diffs.svd(false, false);
        let smax = svd.singular_values.max();
        svd.singular_values
            .iter()
            .filter(|&&s| s > 1e-9 * smax.max(1.0))
            .count()
    }

    pub fn is_simplicial(&self) -> bool {
        self.vertices.len() == self.hull_dim() + 1
    }

    /// Carathéodory representation of `anchor`: at most `hull_dim + 1`
    /// affinely independent vertices whose convex hull contains the anchor,
    /// with its barycentric coordinates. Vertices that end up with the
    /// smallest weight are dropped first when the support is over-complete,
    /// and ties fall back to enumeration order.
    pub fn caratheodory(&self, anchor: &[f64]) -> Result<SimplicialRepresentation> {
        let d = self.dim();
        if anchor.len() != d {
            return Err(Error::Dimension {
                expected: d,
                actual: anchor.len(),
            });
        }
        let k = self.vertices.len();
        // initial convex representation via phase-1 on [V^T; 1] mu = [anchor; 1]
        let mut a = DMatrix::<f64>::zeros(d + 1, k);
        let mut b = DVector::<f64>::zeros(d + 1);
        for j in 0..k {
            for i in 0..d {
                a[(i, j)] = self.vertices[j][i];
            }
            a[(d, j)] = 1.0;
        }
        for i in 0..d {
            b[i] = anchor[i];
        }
        b[d] = 1.0;
        let mut mu = match phase_one(&a, &b) {
            Some(mu) => mu,
            None => {
                let residual = self
                    .vertices
                    .iter()
                    .map(|v| linf_distance(v, anchor))
                    .fold(f64::INFINITY, f64::min);
                return Err(Error::OutsidePolytope { residual });
            }
        };

        // Carathéodory reduction: while the support is affinely dependent,
        // shift weight along a dependence until one coordinate reaches zero.
        loop {
            let support: Vec<usize> = (0..k).filter(|&j| mu[j] > EPS_ZERO).collect();
            let s = support.len();
            if s <= 1 {
                break;
            }
            let diffs = DMatrix::from_fn(s - 1, d, |r, c| {
                self.vertices[support[r + 1]][c] - self.vertices[support[0]][c]
            });
            let svd = diffs.clone().svd(true, false);
            let smax = svd.singular_values.max();
            let rank = svd
                .singular_values
                .iter()
                .filter(|&&x| x > 1e-9 * smax.max(1.0))
                .count();
            if rank == s - 1 {
                break; // affinely independent support
            }
            // affine dependence: c with sum c_j v_j = 0 and sum c_j = 0
            let u = svd.u.expect("u requested");
            let small = (0..s - 1)
                .min_by(|&i, &j| {
                    svd.singular_values[i]
                        .partial_cmp(&svd.singular_values[j])
                        .unwrap()
                })
                .expect("nonempty");
            let mut c = vec![0.0; s];
            for r in 0..s - 1 {
                c[r + 1] = u[(r, small)];
                c[0] -= u[(r, small)];
            }
            // drive towards zero; choose the orientation that zeroes the
            // smallest current weight among the blocking coordinates
            let step_for = |sign: f64| -> Option<(f64, usize)> {
                let mut best: Option<(f64, usize)> = None;
                for (j, &cj) in c.iter().enumerate() {
                    let cj = sign * cj;
                    if cj < -1e-13 {
                        let t = -mu[support[j]] / cj;
                        match best {
                            Some((tb, jb)) => {
                                if t < tb - 1e-13
                                    || (t <= tb + 1e-13 && mu[support[j]] < mu[support[jb]])
                                {
                                    best = Some((t, j));
                                }
                            }
                            None => best = Some((t, j)),
                        }
                    }
                }
                best
            };
            let (t, j, sign) = match (step_for(1.0), step_for(-1.0)) {
                (Some((t1, j1)), Some((t2, j2))) => {
                    if mu[support[j1]] <= mu[support[j2]] {
                        (t1, j1, 1.0)
                    } else {
                        (t2, j2, -1.0)
                    }
                }
                (Some((t, j)), None) => (t, j, 1.0),
                (None, Some((t, j))) => (t, j, -1.0),
                (None, None) => break, // c == 0 numerically
            };
            for (jj, &cjj) in c.iter().enumerate() {
                mu[support[jj]] = (mu[support[jj]] + t * sign * cjj).max(0.0);
            }
            mu[support[j]] = 0.0;
        }

        let support: Vec<usize> = (0..k).filter(|&j| mu[j] > EPS_ZERO).collect();
        // polish the coordinates by least squares on the augmented system
        let s = support.len();
        let mut asub = DMatrix::<f64>::zeros(d + 1, s);
        for (jj, &j) in support.iter().enumerate() {
            for i in 0..d {
                asub[(i, jj)] = self.vertices[j][i];
            }
            asub[(d, jj)] = 1.0;
        }
        let sol = asub
            .clone()
            .svd(true, true)
            .solve(&b, 1e-12)
            .map_err(|_| Error::OutsidePolytope { residual: f64::NAN })?;
        let mut coords: Vec<f64> = sol.iter().map(|&x| x.max(0.0)).collect();
        let total: f64 = coords.iter().sum();
        for c in &mut coords {
            *c /= total;
        }
        let vertices: Vec<Vec<f64>> = support.iter().map(|&j| self.vertices[j].clone()).collect();
        let mut recon = vec![0.0; d];
        for (v, &c) in vertices.iter().zip(&coords) {
            for i in 0..d {
                recon[i] += c * v[i];
            }
        }
        if linf_distance(&recon, anchor) > 1e-8 {
            return Err(Error::OutsidePolytope {
                residual: linf_distance(&recon, anchor),
            });
        }
        Ok(SimplicialRepresentation { vertices, coords })
    }

    /// Uniform-density center of mass. Exact (vertex average) when the vertex
    /// count matches the hull dimension plus one; otherwise estimated by
    /// rejection sampling inside the vertex bounding box of the affine hull,
    /// with the Monte-Carlo standard error reported per coordinate.
    pub fn centroid(&self) -> CentroidEstimate {
        self.centroid_sampled(20_000, 0)
    }

    pub fn centroid_sampled(&self, samples: usize, seed: u64) -> CentroidEstimate {
        let d = self.dim();
        let k = self.vertices.len();
        if self.is_simplicial() {
            let mut point = vec![0.0; d];
            for v in &self.vertices {
                for i in 0..d {
                    point[i] += v[i] / k as f64;
                }
            }
            return CentroidEstimate {
                point,
                std_err: None,
                samples: None,
            };
        }
        // orthonormal basis of the affine hull from the vertex differences
        let v0 = &self.vertices[0];
        let diffs = DMatrix::from_fn(k - 1, d, |r, c| self.vertices[r + 1][c] - v0[c]);
        let svd = diffs.svd(false, true);
        let vt = svd.v_t.expect("v_t requested");
        let smax = svd.singular_values.max();
        let hull: Vec<DVector<f64>> = svd
            .singular_values
            .iter()
            .enumerate()
            .filter(|(_, &s)| s > 1e-9 * smax.max(1.0))
            .map(|(i, _)| vt.row(i).transpose())
            .collect();
        let h = hull.len();
        // bounding box of the vertices in hull coordinates
        let coords_of = |v: &[f64]| -> Vec<f64> {
            hull.iter()
                .map(|e| (0..d).map(|i| e[i] * (v[i] - v0[i])).sum())
                .collect()
        };
        let mut lo = vec![f64::INFINITY; h];
        let mut hi = vec![f64::NEG_INFINITY; h];
        for v in &self.vertices {
            for (i, c) in coords_of(v).into_iter().enumerate() {
                lo[i] = lo[i].min(c);
                hi[i] = hi[i].max(c);
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut sum = vec![0.0; d];
        let mut sumsq = vec![0.0; d];
        let mut accepted = 0usize;
        let mut proposals = 0usize;
        let max_proposals = samples.saturating_mul(10_000).max(1_000_000);
        while accepted < samples && proposals < max_proposals {
            proposals += 1;
            let mut p = v0.clone();
            for (e, (&l, &hb)) in hull.iter().zip(lo.iter().zip(&hi)) {
                let t = rng.gen_range(l..=hb);
                for i in 0..d {
                    p[i] += t * e[i];
                }
            }
            if p.iter().all(|&x| x >= -EPS_ZERO) {
                accepted += 1;
                for i in 0..d {
                    sum[i] += p[i];
                    sumsq[i] += p[i] * p[i];
                }
            }
        }
        let n = accepted.max(1) as f64;
        let point: Vec<f64> = sum.iter().map(|s| (s / n).max(0.0)).collect();
        let std_err: Vec<f64> = (0..d)
            .map(|i| {
                let var = (sumsq[i] / n - (sum[i] / n).powi(2)).max(0.0);
                (var / n).sqrt()
            })
            .collect();
        CentroidEstimate {
            point,
            std_err: Some(std_err),
            samples: Some(accepted),
        }
    }

    /// Deterministic interior sampler used by property tests: a Dirichlet-like
    /// mixture of the vertices (not uniform on the polytope).
    pub fn sample_point(&self, rng: &mut impl Rng) -> Vec<f64> {
        let d = self.dim();
        let weights: Vec<f64> = (0..self.vertices.len())
            .map(|_| -rng.gen_range(1e-12f64..1.0).ln())
            .collect();
        let total: f64 = weights.iter().sum();
        let mut p = vec![0.0; d];
        for (v, w) in self.vertices.iter().zip(&weights) {
            for i in 0..d {
                p[i] += v[i] * w / total;
            }
        }
        p
    }
}

/// Center-of-mass value plus Monte-Carlo metadata when it was estimated.
#[derive(Debug, Clone)]
pub struct CentroidEstimate {
    pub point: Vec<f64>,
    pub std_err: Option<Vec<f64>>,
    pub samples: Option<usize>,
}

/// A Carathéodory simplex with the barycentric coordinates of its anchor.
#[derive(Debug, Clone)]
pub struct SimplicialRepresentation {
    vertices: Vec<Vec<f64>>,
    coords: Vec<f64>,
}

impl SimplicialRepresentation {
    /// Caller-supplied simplex; validates shape, nonnegativity and that the
    /// coordinates sum to one.
    pub fn from_parts(vertices: Vec<Vec<f64>>, coords: Vec<f64>) -> Result<Self> {
        if vertices.len() != coords.len() || vertices.is_empty() {
            return Err(Error::Dimension {
                expected: vertices.len(),
                actual: coords.len(),
            });
        }
        let total: f64 = coords.iter().sum();
        if coords.iter().any(|&c| c < -EPS_ZERO) || (total - 1.0).abs() > EPS_LIN {
            return Err(Error::NotADistribution { sum: total });
        }
        Ok(SimplicialRepresentation { vertices, coords })
    }

    pub fn vertices(&self) -> &[Vec<f64>] {
        &self.vertices
    }

    /// Barycentric (simplicial) coordinates of the anchor.
    pub fn coords(&self) -> &[f64] {
        &self.coords
    }

    pub fn rank(&self) -> usize {
        self.vertices.len()
    }

    /// The anchor point `sum_i mu_i w_i`.
    pub fn anchor(&self) -> Vec<f64> {
        let d = self.vertices[0].len();
        let mut p = vec![0.0; d];
        for (v, &c) in self.vertices.iter().zip(&self.coords) {
            for i in 0..d {
                p[i] += c * v[i];
            }
        }
        p
    }
}

/// The maximum-entropy distribution with its Lagrange multipliers.
/// `multipliers[0]` is the normalization multiplier and equals `log Z`
/// (natural log); the entropy identity `S = sum_i alpha_i b_i` holds in nats.
#[derive(Debug, Clone)]
pub struct MaxEntSolution {
    pub distribution: Vec<f64>,
    pub multipliers: Vec<f64>,
    pub log_partition: f64,
}

impl MaxEntSolution {
    /// Shannon entropy of the solution in bits.
    pub fn entropy_bits(&self) -> f64 {
        crate::state::shannon_entropy_bits(&self.distribution)
    }

    /// The dual-side entropy `sum_i alpha_i b_i`, converted to bits.
    pub fn entropy_from_multipliers_bits(&self, system: &LinearSystem) -> f64 {
        let nats: f64 = self
            .multipliers
            .iter()
            .zip(system.rhs().iter())
            .map(|(a, b)| a * b)
            .sum();
        nats / std::f64::consts::LN_2
    }
}
