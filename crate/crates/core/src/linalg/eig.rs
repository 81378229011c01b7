//! Cyclic Jacobi eigensolver for Hermitian matrices.

use num_complex::Complex64;

use super::{ComplexMatrix, ZERO};
use crate::error::Result;

const OFF_DIAG_TOL: f64 = 1e-13;
const MAX_SWEEPS: usize = 100;

/// Eigendecomposition `A = U diag(values) U*`, values in descending order,
/// eigenvectors stored as the columns of `vectors`.
#[derive(Debug, Clone)]
pub struct HermEig {
    pub values: Vec<f64>,
    pub vectors: ComplexMatrix,
}

impl HermEig {
    pub fn min_value(&self) -> f64 {
        *self.values.last().expect("non-empty spectrum")
    }

    pub fn max_value(&self) -> f64 {
        self.values[0]
    }

    /// `U diag(f(λ)) U*`.
    pub fn reconstruct_with(&self, f: impl Fn(f64) -> f64) -> ComplexMatrix {
        let n = self.values.len();
        let u = &self.vectors;
        let mut out = ComplexMatrix::zeros(n, n);
        for (k, &lambda) in self.values.iter().enumerate() {
            let w = f(lambda);
            if w == 0.0 {
                continue;
            }
            for i in 0..n {
                let ui = u[(i, k)] * w;
                if ui == ZERO {
                    continue;
                }
                for j in 0..n {
                    out[(i, j)] += ui * u[(j, k)].conj();
                }
            }
        }
        out
    }

    pub fn reconstruct(&self) -> ComplexMatrix {
        self.reconstruct_with(|l| l)
    }
}

/// Hermitian eigendecomposition by cyclic Jacobi rotations.
///
/// The input is validated to be Hermitian within [`super::HERM_TOL`] and then
/// symmetrized before rotating.
pub fn herm_eig(a: &ComplexMatrix) -> Result<HermEig> {
    a.require_hermitian("herm_eig")?;
    let n = a.rows();
    let mut work = a.hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    jacobi_in_place(&mut work, &mut v);
    Ok(sorted(work, v))
}

/// Same decomposition, started from an approximate eigenbasis `guess`
/// (unitary). Rotating into the guessed basis first leaves a nearly diagonal
/// matrix, so only a sweep or two is needed when `a` moved little since the
/// guess was computed. No Hermiticity validation is done here.
pub fn herm_eig_warm(a: &ComplexMatrix, guess: &ComplexMatrix) -> HermEig {
    let n = a.rows();
    let sym = a.hermitian_part();
    let mut work = guess.adjoint_mul(&sym.matmul(guess)).hermitian_part();
    let mut v = ComplexMatrix::identity(n);
    jacobi_in_place(&mut work, &mut v);
    let v = guess.matmul(&v);
    sorted(work, v)
}

fn sorted(work: ComplexMatrix, v: ComplexMatrix) -> HermEig {
    let n = work.rows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| work[(j, j)].re.total_cmp(&work[(i, i)].re));
    let values = order.iter().map(|&i| work[(i, i)].re).collect();
    let vectors = ComplexMatrix::from_fn(n, n, |r, c| v[(r, order[c])]);
    HermEig { values, vectors }
}

fn jacobi_in_place(a: &mut ComplexMatrix, v: &mut ComplexMatrix) {
    let n = a.rows();
    if n == 1 {
        return;
    }
    let scale = 1.0 + a.max_abs();
    let tol = OFF_DIAG_TOL * scale;

    for _sweep in 0..MAX_SWEEPS {
        let mut max_off = 0.0f64;
        for p in 0..n {
            for q in p + 1..n {
                max_off = max_off.max(a[(p, q)].norm());
            }
        }
        if max_off <= tol {
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[(p, q)];
                let beta = apq.norm();
                // rotations far below the stopping threshold only churn rounding error
                if beta <= 0.01 * tol {
                    continue;
                }
                rotate(a, v, p, q, apq, beta);
            }
        }
    }
}

/// Zeroes `a[p][q]` with the unitary `J = diag(1, conj(ω)) R` acting on the
/// (p, q) plane, where `ω = a_pq / |a_pq|` and `R` is the classical real
/// Jacobi rotation for the resulting real symmetric 2x2 block.
fn rotate(a: &mut ComplexMatrix, v: &mut ComplexMatrix, p: usize, q: usize, apq: Complex64, beta: f64) {
    let n = a.rows();
    let omega = apq / beta;
    let app = a[(p, p)].re;
    let aqq = a[(q, q)].re;
    let theta = (aqq - app) / (2.0 * beta);
    let t = if theta >= 0.0 {
        1.0 / (theta + (theta * theta + 1.0).sqrt())
    } else {
        -1.0 / (-theta + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    // J = [[jpp, jpq], [jqp, jqq]]
    let jpp = Complex64::new(c, 0.0);
    let jpq = Complex64::new(s, 0.0);
    let jqp = -omega.conj() * s;
    let jqq = omega.conj() * c;

    // A <- A J (columns p, q)
    for k in 0..n {
        let akp = a[(k, p)];
        let akq = a[(k, q)];
        a[(k, p)] = akp * jpp + akq * jqp;
        a[(k, q)] = akp * jpq + akq * jqq;
    }
    // A <- J* A (rows p, q)
    for k in 0..n {
        let apk = a[(p, k)];
        let aqk = a[(q, k)];
        a[(p, k)] = jpp.conj() * apk + jqp.conj() * aqk;
        a[(q, k)] = jpq.conj() * apk + jqq.conj() * aqk;
    }
    a[(p, q)] = ZERO;
    a[(q, p)] = ZERO;
    a[(p, p)] = Complex64::new(app - t * beta, 0.0);
    a[(q, q)] = Complex64::new(aqq + t * beta, 0.0);

    for k in 0..n {
        let vkp = v[(k, p)];
        let vkq = v[(k, q)];
        v[(k, p)] = vkp * jpp + vkq * jqp;
        v[(k, q)] = vkp * jpq + vkq * jqq;
    }
}

#[allow(dead_code)]
fn unitarity_defect(u: &ComplexMatrix) -> f64 {
    (&u.adjoint_mul(u) - &ComplexMatrix::identity(u.rows())).max_abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c64, ONE};
    use crate::rng::CounterRng;
    use proptest::prelude::*;

    #[test]
    fn diagonal_input() {
        let e = herm_eig(&ComplexMatrix::diag_real(&[3.0, 1.0])).unwrap();
        assert_eq!(e.values, vec![3.0, 1.0]);
        assert!((&e.vectors - &ComplexMatrix::identity(2)).max_abs() < 1e-15);
    }

    #[test]
    fn pauli_x() {
        let x = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let e = herm_eig(&x).unwrap();
        assert!((e.values[0] - 1.0).abs() < 1e-14);
        assert!((e.values[1] + 1.0).abs() < 1e-14);
        let r = std::f64::consts::FRAC_1_SQRT_2;
        // columns are (1,1)/√2 and (1,-1)/√2 up to a phase
        let u0 = e.vectors.column(0);
        let u1 = e.vectors.column(1);
        let overlap0 = (u0[0] * r + u0[1] * r).norm();
        let overlap1 = (u1[0] * r - u1[1] * r).norm();
        assert!((overlap0 - 1.0).abs() < 1e-12);
        assert!((overlap1 - 1.0).abs() < 1e-12);
    }

    #[test]
    fn recovers_constructed_spectrum() {
        let mut rng = CounterRng::new(2024);
        let q = rng.haar_unitary(3);
        let a = &q * &(&ComplexMatrix::diag_real(&[5.0, 2.0, -1.0]) * &q.adjoint());
        let e = herm_eig(&a.hermitian_part()).unwrap();
        for (got, want) in e.values.iter().zip([5.0, 2.0, -1.0]) {
            assert!((got - want).abs() < 1e-10, "{got} vs {want}");
        }
    }

    #[test]
    fn complex_offdiagonal() {
        let a =
            ComplexMatrix::from_vec(2, 2, vec![c64(1.0, 0.0), c64(0.0, 2.0), c64(0.0, -2.0), c64(1.0, 0.0)]).unwrap();
        let e = herm_eig(&a).unwrap();
        assert!((e.values[0] - 3.0).abs() < 1e-13);
        assert!((e.values[1] + 1.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(herm_eig(&ComplexMatrix::zeros(2, 3)).is_err());
        let a = ComplexMatrix::from_real_rows(&[&[0.0, 1.0], &[0.0, 0.0]]);
        assert!(herm_eig(&a).is_err());
    }

    #[test]
    fn reconstruction_over_many_random_matrices() {
        let mut rng = CounterRng::new(77);
        for trial in 0..1000 {
            let d = 1 + trial % 16;
            let a = rng.random_hermitian(d);
            let e = herm_eig(&a).unwrap();
            let err = (&a - &e.reconstruct()).frobenius_norm();
            assert!(err <= 1e-10 * (1.0 + a.frobenius_norm()), "d={d} err={err}");
            assert!(unitarity_defect(&e.vectors) <= 1e-10);
            assert!(e.values.windows(2).all(|w| w[0] >= w[1]));
        }
    }

    #[test]
    fn warm_start_agrees_with_cold() {
        let mut rng = CounterRng::new(8);
        let a = rng.random_hermitian(9);
        let cold = herm_eig(&a).unwrap();
        let perturbed = &a + &rng.random_hermitian(9).scale_real(1e-3);
        let warm = herm_eig_warm(&perturbed, &cold.vectors);
        let err = (&perturbed - &warm.reconstruct()).frobenius_norm();
        assert!(err < 1e-11 * (1.0 + perturbed.frobenius_norm()));
        assert!(unitarity_defect(&warm.vectors) < 1e-10);
        let direct = herm_eig(&perturbed).unwrap();
        for (x, y) in warm.values.iter().zip(&direct.values) {
            assert!((x - y).abs() < 1e-11);
        }
    }

    #[test]
    fn one_by_one() {
        let e = herm_eig(&ComplexMatrix::from_vec(1, 1, vec![ONE * 4.0]).unwrap()).unwrap();
        assert_eq!(e.values, vec![4.0]);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn psd_projection_is_idempotent(seed in any::<u64>(), d in 1usize..7) {
            let a = CounterRng::new(seed).random_hermitian(d);
            let p = crate::linalg::psd_project(&a).unwrap();
            let pp = crate::linalg::psd_project(&p.hermitian_part()).unwrap();
            prop_assert!((&p - &pp).max_abs() <= 1e-12 * (1.0 + a.max_abs()));
            prop_assert!(herm_eig(&p.hermitian_part()).unwrap().min_value() >= -1e-12 * (1.0 + a.max_abs()));
        }

        #[test]
        fn op_norm_submultiplicative(seed in any::<u64>(), d in 1usize..6) {
            let mut rng = CounterRng::new(seed);
            let a = rng.ginibre(d);
            let b = rng.ginibre(d);
            let lhs = crate::linalg::op_norm(&(&a * &b));
            prop_assert!(lhs <= crate::linalg::op_norm(&a) * crate::linalg::op_norm(&b) + 1e-9);
        }

        #[test]
        fn partial_trace_preserves_trace(seed in any::<u64>(), d in 1usize..5, m in 1usize..5) {
            let c = CounterRng::new(seed).ginibre(d * m);
            let t = crate::linalg::partial_trace_first(&c, d).unwrap().trace();
            prop_assert!((t - c.trace()).norm() <= 1e-12 * (1.0 + c.max_abs() * (d * m) as f64));
        }
    }
}
