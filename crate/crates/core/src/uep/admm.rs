//! Linear maximization over a face by ADMM, and Dykstra polishing.

use super::face::{psd_project_coords, Face};
use crate::linalg::real::rnorm;
use crate::linalg::ComplexMatrix;

/// Penalty parameter for a unit-norm objective.
const RHO: f64 = 0.2;
const STOP_TOL: f64 = 1e-10;
const POLISH_MAX_ITER: usize = 5000;

#[derive(Debug, Clone)]
pub struct AdmmResult {
    /// Final PSD iterate.
    pub z: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    /// Distance between the affine and the PSD iterate.
    pub psd_residual: f64,
    /// Distance of the PSD iterate from the affine set.
    pub affine_residual: f64,
}

fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

fn add(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Maximizes `⟨g, z⟩` over `{z ⪰ 0} ∩ affine(face)`.
///
/// Splitting: `x` lives in the affine set, `z` in the PSD cone, `u` is the
/// scaled dual. The objective is normalized along the tangent space first.
///
/// Feasible points have trace `d` (the columns of `B` are orthonormal and the
/// map is unital), so `‖z − z_id‖ ≤ 2d` and the objective varies by at most
/// `2d ‖g_t‖` over the feasible set. When that is below `flat`, the identity
/// point is returned without iterating.
pub fn maximize(face: &Face, g: &[f64], max_iter: usize, flat: f64) -> AdmmResult {
    let n = face.r;
    let gt = face.project_tangent(g);
    let gnorm = rnorm(&gt);
    if 2.0 * face.d as f64 * gnorm <= flat {
        return AdmmResult {
            z: face.z_id.clone(),
            iterations: 0,
            converged: true,
            psd_residual: 0.0,
            affine_residual: 0.0,
        };
    }
    let step: Vec<f64> = gt.iter().map(|x| x / (gnorm * RHO)).collect();

    let mut z = face.z_id.clone();
    let mut u = vec![0.0; z.len()];
    let mut warm: Option<ComplexMatrix> = None;
    let mut converged = false;
    let mut iterations = max_iter;
    let mut primal = f64::INFINITY;
    for it in 0..max_iter {
        let x = face.project_affine(&add(&sub(&z, &u), &step));
        let (zn, eig) = psd_project_coords(&add(&x, &u), n, warm.as_ref());
        warm = Some(eig.vectors);
        let r = sub(&x, &zn);
        u = add(&u, &r);
        primal = rnorm(&r);
        let dual = RHO * rnorm(&sub(&zn, &z));
        z = zn;
        if primal <= STOP_TOL && dual <= STOP_TOL {
            converged = true;
            iterations = it + 1;
            break;
        }
    }
    let affine_residual = rnorm(&sub(&face.project_affine(&z), &z));
    AdmmResult { z, iterations, converged, psd_residual: primal, affine_residual }
}

/// Dykstra's alternating projections between the affine set and the PSD
/// cone, started at `z`. The result is exactly PSD (it is the output of an
/// eigenvalue clip) with a much smaller affine residual.
pub fn polish(face: &Face, z: &[f64]) -> Vec<f64> {
    let n = face.r;
    let mut x = z.to_vec();
    let mut p = vec![0.0; x.len()];
    let mut q = vec![0.0; x.len()];
    let mut warm: Option<ComplexMatrix> = None;
    for _ in 0..POLISH_MAX_ITER {
        let xp = add(&x, &p);
        let y = face.project_affine(&xp);
        p = sub(&xp, &y);
        let yq = add(&y, &q);
        let (xn, eig) = psd_project_coords(&yq, n, warm.as_ref());
        warm = Some(eig.vectors);
        q = sub(&yq, &xn);
        x = xn;
        if rnorm(&sub(&face.project_affine(&x), &x)) <= 1e-14 * (1.0 + rnorm(&x)) {
            break;
        }
    }
    x
}
