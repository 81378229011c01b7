//! Faces of the feasible spectrahedron and facial reduction.
//!
//! A face is parameterized as `C = B Z B*` with `B` a `d² x r` isometry and
//! `Z ⪰ 0` an `r x r` Hermitian matrix in real coordinates (`h2v`). The
//! pinning conditions become affine equations on `Z`. When the feasible set
//! has no positive definite point (the usual case: the identity map has a
//! rank-one Choi matrix), an exposing vector `Y ⪰ 0` in the range of the
//! adjoint constraint map certifies that every feasible `Z` lives in `ker Y`,
//! and the face shrinks.

use crate::linalg::real::{axpy, h2v, rdot, rnorm, v2h, RealBasis};
use crate::linalg::{herm_eig, herm_eig_warm, ComplexMatrix, HermEig, ONE, ZERO};
use crate::rng::CounterRng;
use num_complex::Complex64;

/// Relative rank threshold for constraint functionals.
const RANK_TOL: f64 = 1e-10;
/// Eigenvalues of an exposing vector below this fraction of its largest
/// eigenvalue are treated as kernel.
const EXPOSE_REL: f64 = 1e-6;
/// An exposed direction must dominate the negative part of the exposing
/// vector by this factor (times the trace bound `d`), so that discarding it
/// moves feasible points by at most `1 / EXPOSE_MARGIN`.
const EXPOSE_MARGIN: f64 = 1e10;
const DUAL_MAX_ITER: usize = 5000;
/// Random positive definite starts used besides the identity.
const EXTRA_STARTS: usize = 3;
const EXPOSE_SEED: u64 = 0x5eed_face;

/// One reduction step, kept for the report.
#[derive(Debug, Clone, serde::Serialize)]
pub struct ReductionStep {
    pub dim_before: usize,
    pub dim_after: usize,
    pub smallest_exposed_eigenvalue: f64,
    pub negative_part: f64,
    pub dual_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct Face {
    pub d: usize,
    pub r: usize,
    /// `d² x r`, orthonormal columns.
    pub b: ComplexMatrix,
    /// Orthonormal normals of the affine constraints in `Z` coordinates.
    pub normals: RealBasis,
    /// Coordinates of the identity map's Choi matrix on this face.
    pub z_id: Vec<f64>,
}

fn omega(d: usize) -> Vec<Complex64> {
    let mut w = vec![ZERO; d * d];
    for i in 0..d {
        w[i * d + i] = ONE;
    }
    w
}

/// Rows `i·d + k`, `i = 0..d`, of `b`.
fn row_block(b: &ComplexMatrix, d: usize, k: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(d, b.cols(), |i, c| b[(i * d + k, c)])
}

/// `B* (aᵀ ⊗ E_lk) B`, the Z-side matrix of the functional `C ↦ Φ(a)_kl`.
fn entry_functional(blocks: &[ComplexMatrix], a_t: &ComplexMatrix, k: usize, l: usize) -> ComplexMatrix {
    blocks[l].adjoint_mul(&a_t.matmul(&blocks[k]))
}

fn re_im_parts(h: &ComplexMatrix) -> (ComplexMatrix, ComplexMatrix) {
    let re = h.hermitian_part();
    let im = (h - &h.adjoint()).scale(Complex64::new(0.0, -0.5));
    (re, im)
}

impl Face {
    pub fn full(d: usize, pinned: &[ComplexMatrix]) -> Face {
        Face::new(d, ComplexMatrix::identity(d * d), pinned)
    }

    pub fn new(d: usize, b: ComplexMatrix, pinned: &[ComplexMatrix]) -> Face {
        let r = b.cols();
        let om = omega(d);
        let w = b.adjoint().mul_vec(&om);
        let zid_mat = ComplexMatrix::from_fn(r, r, |i, j| w[i] * w[j].conj());
        let mut face = Face { d, r, b, normals: RealBasis::new(r * r), z_id: h2v(&zid_mat) };
        face.normals = face.constraint_normals(pinned);
        face
    }

    fn blocks(&self) -> Vec<ComplexMatrix> {
        (0..self.d).map(|k| row_block(&self.b, self.d, k)).collect()
    }

    fn constraint_normals(&self, pinned: &[ComplexMatrix]) -> RealBasis {
        let blocks = self.blocks();
        let mut rows = Vec::new();
        for g in pinned {
            let g_t = g.transpose();
            for k in 0..self.d {
                for l in 0..self.d {
                    let (re, im) = re_im_parts(&entry_functional(&blocks, &g_t, k, l));
                    rows.push(h2v(&re));
                    rows.push(h2v(&im));
                }
            }
        }
        let scale = rows.iter().map(|r| rnorm(r)).fold(0.0, f64::max);
        let mut basis = RealBasis::new(self.r * self.r);
        for row in &rows {
            if basis.len() == basis.dim {
                break;
            }
            basis.push_scaled(row, RANK_TOL, scale);
        }
        basis
    }

    /// Number of independent real constraints on this face.
    pub fn rank(&self) -> usize {
        self.normals.len()
    }

    /// Gradient of `Z ↦ Re⟨W, Φ(a)⟩` in `Z` coordinates.
    pub fn objective(&self, a: &ComplexMatrix, w: &ComplexMatrix) -> Vec<f64> {
        let blocks = self.blocks();
        let a_t = a.transpose();
        let mut h = ComplexMatrix::zeros(self.r, self.r);
        for k in 0..self.d {
            for l in 0..self.d {
                let c = w[(k, l)].conj();
                if c == ZERO {
                    continue;
                }
                h += &entry_functional(&blocks, &a_t, k, l).scale(c);
            }
        }
        h2v(&h.hermitian_part())
    }

    /// Projection onto the affine set `{z : ⟨n_i, z⟩ = ⟨n_i, z_id⟩}`.
    pub fn project_affine(&self, v: &[f64]) -> Vec<f64> {
        let diff: Vec<f64> = v.iter().zip(&self.z_id).map(|(x, y)| x - y).collect();
        let mut out = v.to_vec();
        for n in &self.normals.vectors {
            axpy(-rdot(n, &diff), n, &mut out);
        }
        out
    }

    /// Projection onto the tangent space of the affine set.
    pub fn project_tangent(&self, v: &[f64]) -> Vec<f64> {
        self.normals.reject(v)
    }

    /// `B Z B*`.
    pub fn choi(&self, z: &[f64]) -> ComplexMatrix {
        let zm = v2h(z, self.r);
        self.b.matmul(&zm).matmul(&self.b.adjoint()).hermitian_part()
    }
}

/// Nearest PSD matrix in `Z` coordinates, plus the eigendecomposition used.
pub(crate) fn psd_project_coords(v: &[f64], n: usize, warm: Option<&ComplexMatrix>) -> (Vec<f64>, HermEig) {
    let h = v2h(v, n);
    let eig = match warm {
        Some(g) => herm_eig_warm(&h, g),
        None => herm_eig(&h).expect("v2h output is Hermitian"),
    };
    (h2v(&eig.reconstruct_with(|l| l.max(0.0))), eig)
}

/// Repeats exposing steps until the face is a single point or no exposing
/// vector is found. Returns the final face and the reduction history.
pub fn reduce(d: usize, pinned: &[ComplexMatrix]) -> (Face, Vec<ReductionStep>) {
    let mut face = Face::full(d, pinned);
    let mut steps = Vec::new();
    while face.r > 1 {
        match exposing_step(&face) {
            Some((b_new, step)) => {
                steps.push(step);
                face = Face::new(d, b_new, pinned);
            }
            None => break,
        }
    }
    (face, steps)
}

fn exposing_step(face: &Face) -> Option<(ComplexMatrix, ReductionStep)> {
    let r = face.r;
    let d = face.d;
    if face.normals.is_empty() {
        return None;
    }
    // ω = B*Ω spans the identity map's Choi matrix on this face
    let w = face.b.adjoint().mul_vec(&omega(d));
    let wn = crate::linalg::norm(&w);
    let what: Vec<Complex64> = w.iter().map(|x| x / wn).collect();

    let ys: Vec<ComplexMatrix> = face.normals.vectors.iter().map(|n| v2h(n, r)).collect();
    let yw: Vec<Vec<Complex64>> = ys.iter().map(|y| y.mul_vec(&what)).collect();

    // coefficient vectors c with Σ c_k Y_k ω = 0
    let m = ys.len();
    let mut rowspace = RealBasis::new(m);
    let rows: Vec<Vec<f64>> =
        (0..2 * r).map(|t| yw.iter().map(|v| if t < r { v[t].re } else { v[t - r].im }).collect()).collect();
    let scale = rows.iter().map(|x| rnorm(x)).fold(0.0, f64::max);
    for row in &rows {
        rowspace.push_scaled(row, RANK_TOL, scale);
    }
    let null = rowspace.complement();
    if null.is_empty() {
        return None;
    }

    // orthonormal basis Q of ω⊥
    let mut qcols: Vec<Vec<Complex64>> = vec![what.clone()];
    for i in 0..r {
        let mut e = vec![ZERO; r];
        e[i] = ONE;
        crate::linalg::gram_schmidt_extend(&mut qcols, &e, 1e-8);
        if qcols.len() == r {
            break;
        }
    }
    let q = ComplexMatrix::from_fn(r, r - 1, |i, j| qcols[j + 1][i]);

    let n = r - 1;
    let mut sub = RealBasis::new(n * n);
    for c in &null.vectors {
        let mut y = ComplexMatrix::zeros(r, r);
        for (ck, yk) in c.iter().zip(&ys) {
            y += &yk.scale_real(*ck);
        }
        let compressed = q.adjoint_mul(&y.matmul(&q)).hermitian_part();
        sub.push(&h2v(&compressed), RANK_TOL);
    }
    if sub.is_empty() {
        return None;
    }

    // Points of sub ∩ PSD (a convex cone) nearest to several positive
    // definite starts. A single nearest point can sit on a lower-rank face of
    // the cone; the sum of several has the union of their ranges.
    let mut total = vec![0.0; n * n];
    let mut iterations = 0;
    let mut rng = CounterRng::stream(EXPOSE_SEED, r as u64);
    for k in 0..=EXTRA_STARTS {
        let start = if k == 0 {
            ComplexMatrix::identity(n)
        } else {
            let g = rng.ginibre(n);
            let pd = &g.matmul(&g.adjoint()) + &ComplexMatrix::identity(n);
            pd.scale_real(n as f64 / pd.trace().re)
        };
        let (x, its) = nearest_in_cone(&sub, &h2v(&start), n);
        iterations += its;
        axpy(1.0, &sub.project(&x), &mut total);
    }
    let total: Vec<f64> = total.iter().map(|v| v / (EXTRA_STARTS + 1) as f64).collect();
    // only the averaged vector is used, so only its negative part matters
    let eig = herm_eig(&v2h(&total, n)).expect("projection of Hermitian coordinates is Hermitian");
    let negative = (-eig.min_value()).max(0.0);
    let lmax = eig.max_value();
    if lmax <= 1e-8 {
        return None;
    }
    let threshold = (EXPOSE_REL * lmax).max(EXPOSE_MARGIN * negative * d as f64);
    let kernel: Vec<usize> = (0..n).filter(|&k| eig.values[k] <= threshold).collect();
    if kernel.len() == n {
        return None;
    }
    let smallest_exposed = eig.values.iter().copied().filter(|&l| l > threshold).fold(f64::INFINITY, f64::min);

    // new basis columns: ω̂ and Q·(kernel eigenvectors), orthonormal
    let new_r = 1 + kernel.len();
    let mut cols = ComplexMatrix::zeros(r, new_r);
    for i in 0..r {
        cols[(i, 0)] = what[i];
    }
    for (c, &k) in kernel.iter().enumerate() {
        let v = eig.vectors.column(k);
        let qv = q.mul_vec(&v);
        for i in 0..r {
            cols[(i, c + 1)] = qv[i];
        }
    }
    let b_new = face.b.matmul(&cols);
    Some((
        b_new,
        ReductionStep {
            dim_before: r,
            dim_after: new_r,
            smallest_exposed_eigenvalue: smallest_exposed,
            negative_part: negative,
            dual_iterations: iterations,
        },
    ))
}

/// Nearest point of `sub ∩ PSD` to `start`, by accelerated gradient on the
/// dual: minimize `½‖Π_PSD(start − λ)‖²` over `λ ⊥ sub`, with gradient
/// restarts. Returns the PSD point `Π_PSD(start − λ)` and the step count.
fn nearest_in_cone(sub: &RealBasis, start: &[f64], n: usize) -> (Vec<f64>, usize) {
    let mut lambda = vec![0.0; n * n];
    let mut mu = lambda.clone();
    let mut t = 1.0f64;
    let mut warm: Option<ComplexMatrix> = None;
    let mut x = start.to_vec();
    let mut iterations = 0;
    for it in 0..DUAL_MAX_ITER {
        iterations = it + 1;
        let shifted: Vec<f64> = start.iter().zip(&mu).map(|(s, m)| s - m).collect();
        let (xn, eig) = psd_project_coords(&shifted, n, warm.as_ref());
        warm = Some(eig.vectors);
        let infeasible = sub.reject(&xn);
        x = xn;
        if rnorm(&infeasible) < 1e-12 * (1.0 + rnorm(&x)) {
            break;
        }
        let next: Vec<f64> = mu.iter().zip(&infeasible).map(|(m, g)| m + g).collect();
        let step: Vec<f64> = next.iter().zip(&lambda).map(|(a, b)| a - b).collect();
        // restart when the momentum points against the gradient step
        let t_next = if rdot(&infeasible, &step) < 0.0 { 1.0 } else { (1.0 + (1.0 + 4.0 * t * t).sqrt()) / 2.0 };
        let beta = if t_next == 1.0 { 0.0 } else { (t - 1.0) / t_next };
        mu = next.iter().zip(&step).map(|(a, s)| a + beta * s).collect();
        lambda = next;
        t = t_next;
    }
    (x, iterations)
}
